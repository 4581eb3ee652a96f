//! Versioned JSON checkpoint: config + tensors in declared order + a
//! SHA-256 content checksum over the tensor bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ModelConfig, ModelParams};
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    config: ModelConfig,
    tensors: Vec<(String, Vec<f64>)>,
    checksum: String,
}

fn content_checksum(tensors: &[(String, Vec<f64>)]) -> String {
    let mut hasher = Sha256::new();
    for (name, data) in tensors {
        hasher.update(name.as_bytes());
        for v in data {
            hasher.update(v.to_le_bytes());
        }
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn save_checkpoint(
    params: &ModelParams,
    cfg: &ModelConfig,
    path: impl AsRef<Path>,
) -> Result<()> {
    let tensors: Vec<(String, Vec<f64>)> = params
        .tensors()
        .into_iter()
        .map(|(name, data)| (name, data.clone()))
        .collect();
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        config: cfg.clone(),
        checksum: content_checksum(&tensors),
        tensors,
    };
    let json = serde_json::to_string(&file).map_err(|e| Error::invalid(e.to_string()))?;
    fs::write(path.as_ref(), json)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelParams, ModelConfig)> {
    let content = fs::read_to_string(path.as_ref())?;
    let file: CheckpointFile =
        serde_json::from_str(&content).map_err(|e| Error::invalid(format!("checkpoint: {e}")))?;
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::invalid(format!(
            "unsupported checkpoint version {}",
            file.version
        )));
    }
    if content_checksum(&file.tensors) != file.checksum {
        return Err(Error::invalid("checkpoint checksum mismatch"));
    }
    file.config.validate()?;
    let mut params = ModelParams::zeros(&file.config);
    {
        let mut slots = params.tensors_mut();
        if slots.len() != file.tensors.len() {
            return Err(Error::invalid("checkpoint tensor count mismatch"));
        }
        for ((want_name, slot), (got_name, data)) in slots.iter_mut().zip(file.tensors.iter()) {
            if *want_name != *got_name {
                return Err(Error::invalid(format!(
                    "checkpoint tensor order mismatch: expected {want_name}, got {got_name}"
                )));
            }
            if slot.len() != data.len() {
                return Err(Error::invalid(format!(
                    "checkpoint tensor {got_name} has {} values, expected {}",
                    data.len(),
                    slot.len()
                )));
            }
            slot.copy_from_slice(data);
        }
    }
    Ok((params, file.config))
}
