//! Document, phrase, and token vectors.
//!
//! Vectors come from a precomputed sidecar file when available, otherwise
//! from a deterministic signed-feature-hashing fallback encoder so the whole
//! pipeline runs hermetically.
//!
//! Sidecar format: first line `dim=<D>`, then one entry per line,
//! `<key>\t<f1> <f2> ... <fD>`. Keys are the ad id for document vectors,
//! `theme:<name>:<idx>` for phrase-bank vectors, and `<adid>#<pos>` for
//! optional per-token vectors.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::corpus::AdRecord;
use crate::error::{Error, Result};

/// Immutable key → vector store with a single declared dimension.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    pub dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, key: String, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::invalid(format!(
                "vector for '{key}' has dim {}, store dim is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::non_finite(format!("embedding '{key}'")));
        }
        self.vectors.insert(key, vector);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.vectors.get(key).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Loads a sidecar embedding file, validating dimension and finiteness.
pub fn load_store(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let reader = BufReader::new(File::open(path.as_ref())?);
    store_from_reader(reader)
}

pub fn store_from_str(content: &str) -> Result<EmbeddingStore> {
    store_from_reader(BufReader::new(content.as_bytes()))
}

fn store_from_reader(reader: impl BufRead) -> Result<EmbeddingStore> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::invalid("empty embedding file, expected dim=<D> header"))?;
    let header = header?;
    let dim: usize = header
        .strip_prefix("dim=")
        .and_then(|d| d.trim().parse().ok())
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::parse(1, format!("bad header '{header}', expected dim=<D>")))?;
    let mut store = EmbeddingStore::new(dim);
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(line_no, "expected <key>\\t<floats>"))?;
        let vector: Vec<f64> = rest
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::parse(line_no, format!("bad float '{tok}': {e}")))
            })
            .collect::<Result<_>>()?;
        store
            .insert(key.to_string(), vector)
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
    }
    Ok(store)
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// FNV-1a, chosen over the stdlib hasher for stability across builds.
fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ seed.wrapping_mul(0x9e3779b97f4a7c15);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Deterministic bag-of-tokens encoder: each lowercased whitespace token is
/// hashed to a bucket with a hash-derived sign, accumulated, and the result
/// is L2-normalized. Empty text yields the zero vector.
pub fn hashed_embedding(text: &str, dim: usize, seed: u64) -> Vec<f64> {
    assert!(dim >= 1, "embedding dim must be at least 1");
    let mut v = vec![0.0f64; dim];
    let mut any = false;
    for token in text.split_whitespace() {
        let token = token.to_lowercase();
        let h = fnv1a(seed, token.as_bytes());
        let bucket = (h % dim as u64) as usize;
        let sign = if (h >> 63) & 1 == 1 { -1.0 } else { 1.0 };
        v[bucket] += sign;
        any = true;
    }
    if !any {
        return v;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

/// Where vectors come from: a store, the hashed fallback, or both
/// (store first, fallback for missing keys).
#[derive(Debug, Clone)]
pub struct EmbedSource {
    store: Option<EmbeddingStore>,
    fallback_seed: Option<u64>,
    dim: usize,
}

impl EmbedSource {
    pub fn from_store(store: EmbeddingStore) -> Self {
        EmbedSource {
            dim: store.dim,
            store: Some(store),
            fallback_seed: None,
        }
    }

    pub fn fallback(dim: usize, seed: u64) -> Self {
        EmbedSource {
            store: None,
            fallback_seed: Some(seed),
            dim,
        }
    }

    pub fn store_with_fallback(store: EmbeddingStore, seed: u64) -> Self {
        EmbedSource {
            dim: store.dim,
            store: Some(store),
            fallback_seed: Some(seed),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn lookup(&self, key: &str) -> Option<&[f64]> {
        self.store.as_ref().and_then(|s| s.get(key))
    }

    /// Vector for arbitrary text under a store key, hashed when absent.
    pub fn vector_for(&self, key: &str, text: &str) -> Result<Vec<f64>> {
        if let Some(v) = self.lookup(key) {
            return Ok(v.to_vec());
        }
        match self.fallback_seed {
            Some(seed) => Ok(hashed_embedding(text, self.dim, seed)),
            None => Err(Error::MissingInput(format!(
                "no embedding for key '{key}' and no fallback configured"
            ))),
        }
    }
}

/// Document vector for an ad: the stored vector under its id when present,
/// otherwise the hashed embedding of its body.
pub fn doc_vector(ad: &AdRecord, source: &EmbedSource) -> Result<Vec<f64>> {
    source.vector_for(&ad.id, &ad.body)
}

/// Fixed-length token sequence with an explicit pad mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    /// Exactly `n` vectors; pad positions are all-zero.
    pub tokens: Vec<Vec<f64>>,
    /// True for real token positions, false for padding.
    pub mask: Vec<bool>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn real_len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Whitespace-tokenizes `body` into per-token vectors, truncating to `n` and
/// right-padding with zero vectors. Stored token vectors are looked up under
/// `<id>#<pos>`; otherwise each token is hashed individually.
pub fn token_sequence(id: &str, body: &str, n: usize, source: &EmbedSource) -> TokenSequence {
    assert!(n >= 1, "sequence length must be at least 1");
    let dim = source.dim();
    let mut tokens = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    for (pos, tok) in body.split_whitespace().take(n).enumerate() {
        let key = format!("{id}#{pos}");
        let v = match source.lookup(&key) {
            Some(stored) => stored.to_vec(),
            None => hashed_embedding(
                tok,
                dim,
                source.fallback_seed.unwrap_or_default(),
            ),
        };
        tokens.push(v);
        mask.push(true);
    }
    while tokens.len() < n {
        tokens.push(vec![0.0; dim]);
        mask.push(false);
    }
    TokenSequence { tokens, mask }
}

/// Cosine similarity clamped to [−1, 1]. Zero-norm inputs are an error.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "cosine dims differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v.iter()) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Degenerate(
            "undefined similarity for zero-norm vector".into(),
        ));
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine distance used throughout theme assignment and silhouettes.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(1.0 - cosine_similarity(u, v)?)
}
