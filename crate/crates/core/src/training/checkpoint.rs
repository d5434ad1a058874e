use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdamState, EpochLoss, TrainConfig, TrainError};
use crate::encoder::{EncoderConfig, EncoderWeights};

pub const CHECKPOINT_FORMAT: &str = "kginfluence-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to resume training bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub encoder: EncoderConfig,
    pub train: TrainConfig,
    pub epochs_completed: usize,
    pub weights: EncoderWeights,
    pub optimizer: AdamState,
    pub history: Vec<EpochLoss>,
}

impl Checkpoint {
    pub fn new(
        encoder: EncoderConfig,
        train: TrainConfig,
        epochs_completed: usize,
        weights: EncoderWeights,
        optimizer: AdamState,
        history: Vec<EpochLoss>,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            encoder,
            train,
            epochs_completed,
            weights,
            optimizer,
            history,
        }
    }

    /// Write via a temporary file so a crash never leaves a torn checkpoint.
    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        let tmp = path.with_extension("tmp");
        let json = serde_json::to_vec(self).map_err(|e| TrainError::file(path, e))?;
        std::fs::write(&tmp, json).map_err(|e| TrainError::file(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| TrainError::file(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, TrainError> {
        let bytes = std::fs::read(path).map_err(|e| TrainError::file(path, e))?;
        let ckpt: Checkpoint = serde_json::from_slice(&bytes).map_err(|e| TrainError::file(path, e))?;
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(TrainError::file(
                path,
                format!("unsupported checkpoint {} v{}", ckpt.format, ckpt.version),
            ));
        }
        let dims = (ckpt.encoder.in_dim, ckpt.encoder.hidden_dim, ckpt.encoder.out_dim);
        if ckpt.weights.dims() != dims || !ckpt.optimizer.matches(&ckpt.weights) {
            return Err(TrainError::file(path, "weights or optimizer state do not match the encoder config"));
        }
        Ok(ckpt)
    }
}
