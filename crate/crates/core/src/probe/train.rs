//! Mini-batch gradient descent on the two-class softmax cross-entropy.

use rand::seq::SliceRandom;

use super::{ProbeError, ProbeModel, TrainConfig};
use crate::dataio::EmbeddingSet;
use crate::rng::rng_from_seed;

/// Double-precision parameters used while training. Row 0 scores "distorted",
/// row 1 scores "normal"; weights are row-major `2 × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub dim: usize,
    pub weights: Vec<f64>,
    pub bias: [f64; 2],
}

impl Params {
    pub fn zeros(dim: usize) -> Self {
        Params {
            dim,
            weights: vec![0.0; 2 * dim],
            bias: [0.0; 2],
        }
    }

    pub fn logits(&self, x: &[f64]) -> [f64; 2] {
        let (w0, w1) = self.weights.split_at(self.dim);
        let dot = |w: &[f64]| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        [self.bias[0] + dot(w0), self.bias[1] + dot(w1)]
    }
}

/// Row-major `n × dim` features with class indices, in f64.
#[derive(Debug, Clone)]
pub struct Batch {
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    fn from_set(set: &EmbeddingSet, order: &[usize]) -> Self {
        let mut features = Vec::with_capacity(order.len() * set.dim);
        let mut labels = Vec::with_capacity(order.len());
        for &i in order {
            let r = &set.records[i];
            features.extend(r.vector.iter().map(|&v| v as f64));
            labels.push(usize::from(r.label));
        }
        Batch {
            dim: set.dim,
            features,
            labels,
        }
    }
}

/// Mean cross-entropy over `rows` plus `l2/2 · ‖W‖²` (bias unpenalized), and its gradient.
pub fn loss_and_gradient(params: &Params, batch: &Batch, rows: &[usize], l2: f64) -> (f64, Params) {
    let dim = params.dim;
    let mut grad = Params::zeros(dim);
    let mut loss = 0.0;
    let scale = 1.0 / rows.len() as f64;
    for &i in rows {
        let x = batch.row(i);
        let z = params.logits(x);
        let m = z[0].max(z[1]);
        let (e0, e1) = ((z[0] - m).exp(), (z[1] - m).exp());
        let lse = m + (e0 + e1).ln();
        let y = batch.labels[i];
        loss += lse - z[y];
        let p = [e0 / (e0 + e1), e1 / (e0 + e1)];
        for (c, pc) in p.into_iter().enumerate() {
            let g = (pc - if c == y { 1.0 } else { 0.0 }) * scale;
            grad.bias[c] += g;
            for (gw, xv) in grad.weights[c * dim..(c + 1) * dim].iter_mut().zip(x) {
                *gw += g * xv;
            }
        }
    }
    let mut penalty = 0.0;
    for (gw, w) in grad.weights.iter_mut().zip(&params.weights) {
        *gw += l2 * w;
        penalty += w * w;
    }
    (loss * scale + 0.5 * l2 * penalty, grad)
}

fn check_inputs(set: &EmbeddingSet, cfg: &TrainConfig) -> Result<(), ProbeError> {
    cfg.validate()?;
    set.validate().map_err(|e| ProbeError::InvalidData(e.to_string()))?;
    if set.records.is_empty() {
        return Err(ProbeError::InvalidData("training set is empty".into()));
    }
    let (distorted, normal) = set.label_counts();
    if distorted == 0 || normal == 0 {
        return Err(ProbeError::InvalidData(format!(
            "training set has a single class ({distorted} distorted, {normal} normal)"
        )));
    }
    Ok(())
}

/// Train and also return the full-set objective after each epoch.
pub fn train_traced(set: &EmbeddingSet, cfg: &TrainConfig) -> Result<(ProbeModel, Vec<f64>), ProbeError> {
    check_inputs(set, cfg)?;
    // Canonical order first so the result is pinned to the seed, not to file order.
    let mut order: Vec<usize> = (0..set.records.len()).collect();
    order.sort_by(|&a, &b| set.records[a].sample_id.cmp(&set.records[b].sample_id));
    let data = Batch::from_set(set, &order);
    let all: Vec<usize> = (0..data.len()).collect();

    let mut rng = rng_from_seed(cfg.seed);
    let mut params = Params::zeros(set.dim);
    let mut history = Vec::with_capacity(cfg.epochs as usize);
    let mut perm = all.clone();
    for epoch in 1..=cfg.epochs {
        perm.shuffle(&mut rng);
        for rows in perm.chunks(cfg.batch_size) {
            let (_, grad) = loss_and_gradient(&params, &data, rows, cfg.l2);
            for (w, g) in params.weights.iter_mut().zip(&grad.weights) {
                *w -= cfg.learning_rate * g;
            }
            for c in 0..2 {
                params.bias[c] -= cfg.learning_rate * grad.bias[c];
            }
        }
        let (loss, _) = loss_and_gradient(&params, &data, &all, cfg.l2);
        if !loss.is_finite() || params.weights.iter().any(|w| !w.is_finite()) {
            return Err(ProbeError::Diverged { epoch });
        }
        history.push(loss);
    }

    let model = ProbeModel {
        dim: set.dim,
        weights: params.weights.iter().map(|&w| w as f32).collect(),
        bias: [params.bias[0] as f32, params.bias[1] as f32],
        model_tag: set.model_tag.clone(),
        feature_source: set.feature_source.clone(),
        trained_epochs: cfg.epochs,
    };
    if !model.is_finite() {
        return Err(ProbeError::Diverged { epoch: cfg.epochs });
    }
    Ok((model, history))
}

pub fn train(set: &EmbeddingSet, cfg: &TrainConfig) -> Result<ProbeModel, ProbeError> {
    train_traced(set, cfg).map(|(m, _)| m)
}
