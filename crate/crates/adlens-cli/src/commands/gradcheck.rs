use clap::Args;

use adlens::error::{Error, Result};
use adlens::mtlnet::{grad_check, ModelConfig};

#[derive(Args)]
pub struct GradcheckArgs {
    /// Number of random seeds to sweep.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    /// Pass/fail threshold on the max relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 4)]
    pub seq_len: usize,
    #[arg(long, default_value_t = 6)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 5)]
    pub hidden_dim: usize,
    #[arg(long, default_value_t = 5)]
    pub repr_dim: usize,
    #[arg(long, default_value_t = 6)]
    pub theme_classes: usize,
    #[arg(long, default_value_t = 4)]
    pub mf_classes: usize,
}

pub fn run(args: GradcheckArgs) -> Result<()> {
    let cfg = ModelConfig {
        seq_len: args.seq_len,
        embed_dim: args.embed_dim,
        hidden_dim: args.hidden_dim,
        repr_dim: args.repr_dim,
        theme_classes: args.theme_classes,
        mf_classes: args.mf_classes,
        dropout: 0.0,
        ..ModelConfig::toy()
    };
    let mut worst = 0.0f64;
    for seed in 0..args.seeds {
        let err = grad_check(&cfg, seed, args.epsilon)?;
        println!("seed {seed}: max relative error {err:.3e}");
        worst = worst.max(err);
    }
    println!("worst over {} seeds: {worst:.3e}", args.seeds);
    if worst < args.tolerance {
        println!("PASS (tolerance {:.1e})", args.tolerance);
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "gradient check failed: {worst:.3e} >= tolerance {:.1e}",
            args.tolerance
        )))
    }
}
