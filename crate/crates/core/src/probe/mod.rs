//! Linear probe: a two-logit fully-connected head trained on frozen features.
//!
//! The encoder never appears here; the probe only sees vectors from an
//! [`EmbeddingSet`](crate::dataio::EmbeddingSet), so encoder weights are frozen by
//! construction.

mod io;
mod predict;
mod train;

use std::path::{Path, PathBuf};

pub use io::{model_from_str, model_to_string, read_model, read_predictions, write_model, write_predictions};
pub use predict::{decide, evaluate, predict, softmax2, Evaluation, PredictionRecord};
pub use train::{loss_and_gradient, train, train_traced, Batch, Params};

#[derive(Debug, thiserror::Error)]
pub enum ProbeError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("dimension mismatch: model expects {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Diverged { epoch: u32 },
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
    #[error("{}:{line}: {message}", path.display())]
    Predictions {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ProbeError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ProbeError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, ProbeError::Io { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: u32,
    pub batch_size: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 64,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ProbeError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ProbeError::InvalidConfig(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(ProbeError::InvalidConfig(
                "epochs and batch size must be positive".into(),
            ));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(ProbeError::InvalidConfig(format!(
                "l2 {} must be non-negative",
                self.l2
            )));
        }
        Ok(())
    }
}

/// Trained head. `weights` is row-major `2 × dim`: row 0 scores the distorted
/// class, row 1 the normal class.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeModel {
    pub dim: usize,
    pub weights: Vec<f32>,
    pub bias: [f32; 2],
    pub model_tag: String,
    pub feature_source: String,
    pub trained_epochs: u32,
}

impl ProbeModel {
    pub fn zeros(dim: usize, model_tag: &str, feature_source: &str) -> Self {
        ProbeModel {
            dim,
            weights: vec![0.0; 2 * dim],
            bias: [0.0; 2],
            model_tag: model_tag.into(),
            feature_source: feature_source.into(),
            trained_epochs: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    /// `[distorted, normal]` logits, accumulated in f64.
    pub fn logits(&self, x: &[f32]) -> Result<[f64; 2], ProbeError> {
        if x.len() != self.dim {
            return Err(ProbeError::DimMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let (w0, w1) = self.weights.split_at(self.dim);
        let dot = |w: &[f32]| w.iter().zip(x).map(|(&a, &b)| a as f64 * b as f64).sum::<f64>();
        Ok([self.bias[0] as f64 + dot(w0), self.bias[1] as f64 + dot(w1)])
    }
}
