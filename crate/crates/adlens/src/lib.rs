//! Minimal-supervision analytics for ad-archive corpora.
//!
//! The crate covers an end-to-end pipeline:
//!
//! * [`corpus`] — ad record ingestion, dedup, splitting, aggregation, and
//!   time-series construction.
//! * [`embed`] — document / token vectors from a sidecar file or a
//!   deterministic hashed fallback encoder, plus cosine similarity.
//! * [`weaklabel`] — weak theme labels by nearest phrase-bank match and weak
//!   moral-framing labels by lexicon counting, with quality scoring.
//! * [`mtlnet`] — a two-head Bi-LSTM classifier with hand-rolled
//!   backpropagation, Adam updates, and a finite-difference gradient checker.
//! * [`train`] — the four supervision strategies (fully supervised, hybrid,
//!   and the two two-stage variants) with early stopping and repeated runs.
//! * [`stats`] — self-contained chi-square, t, ADF, and Granger tests with
//!   the special functions they need.
//!
//! Batch gradients and record labeling run data-parallel when the `parallel`
//! feature (default) is enabled; every parallel path reduces in a fixed order
//! so results are bit-identical to the sequential build.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod metrics;
pub mod mtlnet;
pub mod stats;
pub mod synth;
pub mod train;
pub mod weaklabel;

pub use error::{Error, Result};
