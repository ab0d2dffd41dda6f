//! Probe model files and line-delimited prediction files.
//!
//! A model file is a few `key value` header lines (strings JSON-quoted), a
//! `params N` line, the base64 of `N` little-endian f32 values (weights row-major,
//! then the two biases) wrapped at 76 columns, and a closing `end` line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use super::{PredictionRecord, ProbeError, ProbeModel};

const MODEL_MAGIC: &str = "hpuzzle-probe 1";
const WRAP: usize = 76;

pub fn model_to_string(model: &ProbeModel) -> String {
    let mut raw = Vec::with_capacity(4 * (model.weights.len() + 2));
    for v in model.weights.iter().chain(&model.bias) {
        raw.extend_from_slice(&v.to_le_bytes());
    }
    let encoded = STANDARD.encode(&raw);
    let quote = |s: &str| serde_json::to_string(s).expect("string serializes");
    let mut out = format!(
        "{MODEL_MAGIC}\ndim {}\nmodel_tag {}\nfeature_source {}\ntrained_epochs {}\nparams {}\n",
        model.dim,
        quote(&model.model_tag),
        quote(&model.feature_source),
        model.trained_epochs,
        model.weights.len() + 2
    );
    for chunk in encoded.as_bytes().chunks(WRAP) {
        out.push_str(std::str::from_utf8(chunk).expect("base64 is ASCII"));
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

pub fn model_from_str(text: &str) -> Result<ProbeModel, ProbeError> {
    let bad = |line: usize, message: String| ProbeError::ModelFormat { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |want: &str| -> Result<(usize, String), ProbeError> {
        let (n, line) = lines.next().ok_or_else(|| bad(0, format!("missing {want} line")))?;
        Ok((n, line.to_string()))
    };
    let (n, magic) = next("header")?;
    if magic != MODEL_MAGIC {
        return Err(bad(n, format!("expected {MODEL_MAGIC:?}, found {magic:?}")));
    }
    let mut field = |key: &str| -> Result<(usize, String), ProbeError> {
        let (n, line) = next(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((n, v.to_string())),
            _ => Err(bad(n, format!("expected `{key} ...`, found {line:?}"))),
        }
    };
    let number = |(n, v): (usize, String)| v.parse::<u64>().map_err(|e| bad(n, format!("{v:?}: {e}")));
    let string = |(n, v): (usize, String)| serde_json::from_str::<String>(&v).map_err(|e| bad(n, e.to_string()));

    let dim = number(field("dim")?)? as usize;
    let model_tag = string(field("model_tag")?)?;
    let feature_source = string(field("feature_source")?)?;
    let trained_epochs = number(field("trained_epochs")?)? as u32;
    let (pn, params) = field("params")?;
    let count = number((pn, params))? as usize;
    if dim == 0 || count != 2 * dim + 2 {
        return Err(bad(pn, format!("{count} parameters for dimension {dim}")));
    }
    let mut encoded = String::new();
    let mut closed = false;
    for (_, line) in lines.by_ref() {
        if line == "end" {
            closed = true;
            break;
        }
        encoded.push_str(line.trim());
    }
    if !closed {
        return Err(bad(0, "missing `end` line".into()));
    }
    let raw = STANDARD
        .decode(encoded.as_bytes())
        .map_err(|e| bad(0, format!("parameter block: {e}")))?;
    if raw.len() != 4 * count {
        return Err(bad(
            0,
            format!("parameter block holds {} bytes, expected {}", raw.len(), 4 * count),
        ));
    }
    let values: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")))
        .collect();
    let model = ProbeModel {
        dim,
        weights: values[..2 * dim].to_vec(),
        bias: [values[2 * dim], values[2 * dim + 1]],
        model_tag,
        feature_source,
        trained_epochs,
    };
    if !model.is_finite() {
        return Err(bad(0, "non-finite parameter".into()));
    }
    Ok(model)
}

pub fn write_model(model: &ProbeModel, path: &Path) -> Result<(), ProbeError> {
    std::fs::write(path, model_to_string(model)).map_err(|e| ProbeError::io(path, e))
}

pub fn read_model(path: &Path) -> Result<ProbeModel, ProbeError> {
    let text = std::fs::read_to_string(path).map_err(|e| ProbeError::io(path, e))?;
    model_from_str(&text)
}

pub fn write_predictions(preds: &[PredictionRecord], path: &Path) -> Result<(), ProbeError> {
    let file = File::create(path).map_err(|e| ProbeError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in preds {
        let line = serde_json::to_string(p).expect("prediction serializes");
        writeln!(w, "{line}").map_err(|e| ProbeError::io(path, e))?;
    }
    w.flush().map_err(|e| ProbeError::io(path, e))
}

/// Read a predictions file; probabilities must be finite and inside `[0, 1]`.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, ProbeError> {
    let file = File::open(path).map_err(|e| ProbeError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| ProbeError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| ProbeError::Predictions {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let rec: PredictionRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if !(0.0..=1.0).contains(&rec.p_predicted) {
            return Err(bad(format!("p_predicted {} outside [0, 1]", rec.p_predicted)));
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ProbeModel {
        ProbeModel {
            dim: 30,
            weights: (0..60).map(|i| (i as f32 - 29.5) * 0.123_456_7).collect(),
            bias: [f32::MIN_POSITIVE, -0.0],
            model_tag: "vit \"base\"\nx".into(),
            feature_source: "last_hidden_pooled".into(),
            trained_epochs: 200,
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = model();
        let text = model_to_string(&m);
        assert!(text.lines().all(|l| l.len() <= WRAP.max(60)));
        let back = model_from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.bias[1].to_bits(), (-0.0f32).to_bits());
        assert_eq!(model_to_string(&back), text);
    }

    #[test]
    fn corrupted_files_rejected() {
        let text = model_to_string(&model());
        assert!(model_from_str(&text.replacen("dim 30", "dim 31", 1)).is_err());
        assert!(model_from_str(&text.replace("end\n", "")).is_err());
        assert!(model_from_str("nonsense").is_err());
        let mut lines: Vec<&str> = text.lines().collect();
        lines.remove(7);
        assert!(model_from_str(&lines.join("\n")).is_err());
    }

    #[test]
    fn predictions_round_trip() {
        let preds = vec![
            PredictionRecord {
                sample_id: "a".into(),
                true_label: true,
                predicted_label: false,
                p_predicted: 0.734_567_890_123_456_7,
            },
            PredictionRecord {
                sample_id: "b".into(),
                true_label: false,
                predicted_label: false,
                p_predicted: 1.0,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        write_predictions(&preds, &path).unwrap();
        assert_eq!(read_predictions(&path).unwrap(), preds);
    }

    #[test]
    fn out_of_range_probability_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        std::fs::write(
            &path,
            "{\"sample_id\":\"a\",\"true_label\":true,\"predicted_label\":true,\"p_predicted\":1.5}\n",
        )
        .unwrap();
        assert!(matches!(
            read_predictions(&path),
            Err(ProbeError::Predictions { line: 1, .. })
        ));
    }
}
