//! Binary entropy, the equivariance score, and table-shaped reports.
//!
//! For one prediction with predicted-class probability `p`, `H(p)` is the binary
//! entropy in bits. The score averages `1 - H(p)` over correct predictions and
//! `H(p)` over incorrect ones, so confident correct answers and hesitant wrong
//! answers both score high. `H(p) = H(1 - p)`, so it does not matter which class
//! `p` is read from.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::probe::PredictionRecord;

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("probability {0} is outside [0, 1]")]
    Domain(f64),
    #[error("no predictions to score")]
    Empty,
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ScoreError {
    pub fn is_io(&self) -> bool {
        matches!(self, ScoreError::Io { .. })
    }
}

fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy in bits with `0 · log 0 = 0`.
pub fn entropy(p: f64) -> Result<f64, ScoreError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ScoreError::Domain(p));
    }
    Ok(-xlog2x(p) - xlog2x(1.0 - p))
}

/// Order-independent sum: values are sorted before accumulation.
fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

struct Partition {
    correct: Vec<f64>,
    incorrect: Vec<f64>,
}

fn partition(preds: &[PredictionRecord]) -> Result<Partition, ScoreError> {
    if preds.is_empty() {
        return Err(ScoreError::Empty);
    }
    let mut part = Partition {
        correct: Vec::new(),
        incorrect: Vec::new(),
    };
    for r in preds {
        let h = entropy(r.p_predicted)?;
        if r.is_correct() {
            part.correct.push(h)
        } else {
            part.incorrect.push(h)
        }
    }
    Ok(part)
}

fn mean_or_zero(values: Vec<f64>) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        let n = values.len() as f64;
        sorted_sum(values) / n
    }
}

/// `[Σ_correct (1 - H) + Σ_incorrect H] / N`.
pub fn equivariance_score(preds: &[PredictionRecord]) -> Result<f64, ScoreError> {
    let part = partition(preds)?;
    let n_correct = part.correct.len();
    let accuracy = n_correct as f64 / preds.len() as f64;
    // Evaluated as acc·(1 - mean H_correct) + (1 - acc)·mean H_incorrect, which is the
    // same quantity; this form makes the all-confident (score = acc) and all-p=0.5
    // (score = 1 - acc) cases exact in floating point.
    let score = accuracy * (1.0 - mean_or_zero(part.correct)) + (1.0 - accuracy) * mean_or_zero(part.incorrect);
    Ok(score.clamp(0.0, 1.0))
}

pub fn mean_entropy(preds: &[PredictionRecord]) -> Result<f64, ScoreError> {
    if preds.is_empty() {
        return Err(ScoreError::Empty);
    }
    let hs = preds
        .iter()
        .map(|r| entropy(r.p_predicted))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(mean_or_zero(hs))
}

pub fn accuracy(preds: &[PredictionRecord]) -> Result<f64, ScoreError> {
    if preds.is_empty() {
        return Err(ScoreError::Empty);
    }
    Ok(preds.iter().filter(|r| r.is_correct()).count() as f64 / preds.len() as f64)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub model_tag: String,
    pub pretrain_tag: String,
    /// Mean binary entropy over all scored predictions.
    pub mean_entropy: f64,
    pub accuracy: f64,
    pub equivariance_score: f64,
    pub n_correct: usize,
    pub n_incorrect: usize,
    /// Where the predictions came from, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

pub fn report(preds: &[PredictionRecord], model_tag: &str, pretrain_tag: &str) -> Result<ScoreReport, ScoreError> {
    let n_correct = preds.iter().filter(|r| r.is_correct()).count();
    Ok(ScoreReport {
        model_tag: model_tag.into(),
        pretrain_tag: pretrain_tag.into(),
        mean_entropy: mean_entropy(preds)?,
        accuracy: accuracy(preds)?,
        equivariance_score: equivariance_score(preds)?,
        n_correct,
        n_incorrect: preds.len() - n_correct,
        source: None,
    })
}

pub fn format_entropy(v: f64) -> String {
    format!("{v:.3}")
}

pub fn format_accuracy(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

pub fn format_score(v: f64) -> String {
    format!("{v:.3}")
}

/// Sort by score, highest first; ties keep their relative order.
pub fn sort_by_score(reports: &mut [ScoreReport]) {
    reports.sort_by(|a, b| b.equivariance_score.total_cmp(&a.equivariance_score));
}

/// Fixed-width text table: model, pre-trained dataset, entropy, acc., equivariance score.
pub fn render_table(reports: &[ScoreReport]) -> String {
    let header = ["model", "pre-trained dataset", "entropy", "acc.", "equivariance score"];
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            [
                r.model_tag.clone(),
                r.pretrain_tag.clone(),
                format_entropy(r.mean_entropy),
                format_accuracy(r.accuracy),
                format_score(r.equivariance_score),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(
                |(i, (c, w))| {
                    if i < 2 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                },
            )
            .collect();
        writeln!(out, "{}", parts.join("  ").trim_end()).expect("write to string");
    };
    line(&header.map(String::from));
    line(&widths.map(|w| "-".repeat(w)));
    for row in &rows {
        line(row);
    }
    out
}

pub fn write_report(report: &ScoreReport, path: &Path) -> Result<(), ScoreError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| ScoreError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_report(path: &Path) -> Result<ScoreReport, ScoreError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| ScoreError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(correct: bool, p: f64) -> PredictionRecord {
        PredictionRecord {
            sample_id: String::new(),
            true_label: true,
            predicted_label: correct,
            p_predicted: p,
        }
    }

    #[test]
    fn entropy_fixed_points() {
        assert_eq!(entropy(0.5).unwrap(), 1.0);
        assert_eq!(entropy(0.0).unwrap(), 0.0);
        assert_eq!(entropy(1.0).unwrap(), 0.0);
        // -0.25·log2(0.25) - 0.75·log2(0.75), evaluated at 40 digits
        assert!((entropy(0.25).unwrap() - 0.811_278_124_459_132_9).abs() < 1e-15);
    }

    #[test]
    fn entropy_domain() {
        assert!(entropy(-1e-9).is_err());
        assert!(entropy(1.0 + 1e-9).is_err());
        assert!(entropy(f64::NAN).is_err());
    }

    #[test]
    fn perfect_and_confidently_wrong() {
        let all_right: Vec<_> = (0..5).map(|_| rec(true, 1.0)).collect();
        assert_eq!(equivariance_score(&all_right).unwrap(), 1.0);
        let all_wrong: Vec<_> = (0..5).map(|_| rec(false, 1.0)).collect();
        assert_eq!(equivariance_score(&all_wrong).unwrap(), 0.0);
    }

    #[test]
    fn hesitant_wrong_earns_full_credit() {
        let preds = vec![rec(true, 1.0), rec(true, 1.0), rec(false, 0.5), rec(false, 0.5)];
        assert_eq!(equivariance_score(&preds).unwrap(), 1.0);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(equivariance_score(&[]), Err(ScoreError::Empty)));
        assert!(mean_entropy(&[]).is_err());
    }

    #[test]
    fn mean_entropy_examples() {
        assert_eq!(mean_entropy(&[rec(true, 0.5), rec(false, 0.5)]).unwrap(), 1.0);
        assert_eq!(mean_entropy(&[rec(true, 0.0), rec(false, 1.0)]).unwrap(), 0.0);
        assert_eq!(mean_entropy(&[rec(true, 0.5), rec(false, 1.0)]).unwrap(), 0.5);
    }

    #[test]
    fn table_formatting() {
        let mut r = report(&[rec(true, 1.0)], "ResNet", "ImageNet-1K").unwrap();
        r.accuracy = 0.955;
        r.mean_entropy = 0.0964;
        r.equivariance_score = 0.9104;
        let table = render_table(&[r]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("model"));
        assert!(lines[2].contains("95.50%"), "{table}");
        assert!(lines[2].contains("0.096"));
        assert!(lines[2].ends_with("0.910"));
    }

    #[test]
    fn sorting_is_descending() {
        let mk = |tag: &str, s: f64| ScoreReport {
            model_tag: tag.into(),
            pretrain_tag: String::new(),
            mean_entropy: 0.0,
            accuracy: 0.0,
            equivariance_score: s,
            n_correct: 0,
            n_incorrect: 0,
            source: None,
        };
        let mut v = vec![mk("a", 0.5), mk("b", 0.9), mk("c", 0.7)];
        sort_by_score(&mut v);
        let tags: Vec<_> = v.iter().map(|r| r.model_tag.as_str()).collect();
        assert_eq!(tags, ["b", "c", "a"]);
    }

    #[test]
    fn report_json_round_trip() {
        let preds = vec![rec(true, 0.93), rec(false, 0.61), rec(true, 0.77)];
        let mut r = report(&preds, "m", "p").unwrap();
        r.source = Some("preds.jsonl".into());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_report(&r, &path).unwrap();
        assert_eq!(read_report(&path).unwrap(), r);
        assert_eq!((r.n_correct, r.n_incorrect), (2, 1));
    }
}
