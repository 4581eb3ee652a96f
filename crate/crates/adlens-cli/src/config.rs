//! TOML config file with `[model]` and `[strategy]` tables whose keys mirror
//! the `ModelConfig` / `StrategyConfig` field names. Any present key
//! overrides the default; CLI flags override the file in turn.

use std::path::Path;

use serde::Deserialize;

use adlens::error::{Error, Result};
use adlens::mtlnet::ModelConfig;
use adlens::train::{Strategy, StrategyConfig};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub strategy: StrategySection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub seq_len: Option<usize>,
    pub embed_dim: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub repr_dim: Option<usize>,
    pub theme_classes: Option<usize>,
    pub mf_classes: Option<usize>,
    pub dropout: Option<f64>,
    pub gamma: Option<f64>,
    pub lr: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    pub strategy: Option<String>,
    pub gold_mix_fraction: Option<f64>,
    pub weak_mix_fraction: Option<f64>,
    pub split_seed: Option<u64>,
    pub model_seed: Option<u64>,
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let content = std::fs::read_to_string(path)?;
    toml::from_str(&content).map_err(|e| Error::invalid(format!("config file: {e}")))
}

impl FileConfig {
    pub fn model_config(&self) -> ModelConfig {
        let mut cfg = ModelConfig::default();
        let m = &self.model;
        if let Some(v) = m.seq_len {
            cfg.seq_len = v;
        }
        if let Some(v) = m.embed_dim {
            cfg.embed_dim = v;
        }
        if let Some(v) = m.hidden_dim {
            cfg.hidden_dim = v;
        }
        if let Some(v) = m.repr_dim {
            cfg.repr_dim = v;
        }
        if let Some(v) = m.theme_classes {
            cfg.theme_classes = v;
        }
        if let Some(v) = m.mf_classes {
            cfg.mf_classes = v;
        }
        if let Some(v) = m.dropout {
            cfg.dropout = v;
        }
        if let Some(v) = m.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = m.lr {
            cfg.lr = v;
        }
        if let Some(v) = m.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = m.max_epochs {
            cfg.max_epochs = v;
        }
        if let Some(v) = m.patience {
            cfg.patience = v;
        }
        if let Some(v) = m.seed {
            cfg.seed = v;
        }
        cfg
    }

    pub fn strategy_config(&self) -> Result<StrategyConfig> {
        let mut cfg = StrategyConfig::default();
        let s = &self.strategy;
        if let Some(name) = &s.strategy {
            cfg.strategy = Strategy::from_name(name)
                .ok_or_else(|| Error::invalid(format!("unknown strategy '{name}'")))?;
        }
        if let Some(v) = s.gold_mix_fraction {
            cfg.gold_mix_fraction = v;
        }
        if let Some(v) = s.weak_mix_fraction {
            cfg.weak_mix_fraction = v;
        }
        if let Some(v) = s.split_seed {
            cfg.split_seed = v;
        }
        if let Some(v) = s.model_seed {
            cfg.model_seed = v;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let fc: FileConfig = toml::from_str("").unwrap();
        let cfg = fc.model_config();
        assert_eq!(cfg.seq_len, 100);
        assert_eq!(cfg.embed_dim, 768);
        let s = fc.strategy_config().unwrap();
        assert_eq!(s.strategy, Strategy::Hybrid);
    }

    #[test]
    fn partial_overrides_apply() {
        let fc: FileConfig = toml::from_str(
            "[model]\nseq_len = 12\nlr = 0.01\n[strategy]\nstrategy = \"two_stage1\"\nsplit_seed = 9\n",
        )
        .unwrap();
        let cfg = fc.model_config();
        assert_eq!(cfg.seq_len, 12);
        assert_eq!(cfg.lr, 0.01);
        assert_eq!(cfg.hidden_dim, 256);
        let s = fc.strategy_config().unwrap();
        assert_eq!(s.strategy, Strategy::TwoStage1);
        assert_eq!(s.split_seed, 9);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("[model]\nnot_a_key = 1\n").is_err());
    }
}
