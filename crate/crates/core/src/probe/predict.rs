use serde::{Deserialize, Serialize};

use super::{ProbeError, ProbeModel};
use crate::dataio::{EmbeddingRecord, EmbeddingSet};

/// Outcome of the probe on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub true_label: bool,
    pub predicted_label: bool,
    /// Softmax probability of the predicted class; at least 0.5 for probe output.
    pub p_predicted: f64,
}

impl PredictionRecord {
    pub fn is_correct(&self) -> bool {
        self.true_label == self.predicted_label
    }
}

/// Two-way softmax of `[distorted, normal]` logits with max subtraction.
/// Returns the class probabilities in the same order.
pub fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

/// `(predicted_label, p_predicted)`; exactly equal logits resolve to `false`.
pub fn decide(logits: [f64; 2]) -> (bool, f64) {
    let p = softmax2(logits);
    if logits[1] > logits[0] {
        (true, p[1])
    } else {
        (false, p[0])
    }
}

pub fn predict(model: &ProbeModel, record: &EmbeddingRecord) -> Result<PredictionRecord, ProbeError> {
    let (predicted_label, p_predicted) = decide(model.logits(&record.vector)?);
    Ok(PredictionRecord {
        sample_id: record.sample_id.clone(),
        true_label: record.label,
        predicted_label,
        p_predicted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<PredictionRecord>,
    pub accuracy: f64,
}

/// Predict every record in input order.
pub fn evaluate(model: &ProbeModel, set: &EmbeddingSet) -> Result<Evaluation, ProbeError> {
    if set.records.is_empty() {
        return Err(ProbeError::InvalidData("evaluation set is empty".into()));
    }
    if set.dim != model.dim {
        return Err(ProbeError::DimMismatch {
            expected: model.dim,
            got: set.dim,
        });
    }
    let predictions = set
        .records
        .iter()
        .map(|r| predict(model, r))
        .collect::<Result<Vec<_>, _>>()?;
    let correct = predictions.iter().filter(|p| p.is_correct()).count();
    Ok(Evaluation {
        accuracy: correct as f64 / predictions.len() as f64,
        predictions,
    })
}
