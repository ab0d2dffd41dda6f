//! Consensus filtering: keep samples that at least `m` of `K` probes get wrong.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::probe::PredictionRecord;
use crate::synth::manifest::resolve_image;
use crate::synth::Manifest;

#[derive(Debug, thiserror::Error)]
pub enum FilterError {
    #[error("invalid consensus config: {0}")]
    Config(String),
    #[error("panel {panel} differs from panel 0 in sample ids ({count} differ; first: {ids:?})")]
    IdMismatch {
        panel: usize,
        count: usize,
        ids: Vec<String>,
    },
    #[error("panel {panel}: {message}")]
    Panel { panel: usize, message: String },
    #[error("sample {0:?} is not in the manifest")]
    Unresolved(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl FilterError {
    pub fn is_io(&self) -> bool {
        matches!(self, FilterError::Io { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsensusConfig {
    pub threshold: usize,
    pub panel_size: usize,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        ConsensusConfig {
            threshold: 2,
            panel_size: 3,
        }
    }
}

impl ConsensusConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        if self.threshold < 1 || self.threshold > self.panel_size {
            return Err(FilterError::Config(format!(
                "threshold {} must lie in 1..={}",
                self.threshold, self.panel_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MissCount {
    pub sample_id: String,
    pub true_label: bool,
    pub miss_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsensusResult {
    /// Ids with `miss_count >= threshold`, in table order.
    pub selected: Vec<String>,
    /// Every sample, sorted by miss count descending then id ascending.
    pub table: Vec<MissCount>,
}

fn panel_index(panel: usize, preds: &[PredictionRecord]) -> Result<HashMap<&str, &PredictionRecord>, FilterError> {
    let mut index = HashMap::with_capacity(preds.len());
    for p in preds {
        if index.insert(p.sample_id.as_str(), p).is_some() {
            return Err(FilterError::Panel {
                panel,
                message: format!("duplicate sample id {:?}", p.sample_id),
            });
        }
    }
    Ok(index)
}

pub fn consensus_filter(
    panels: &[Vec<PredictionRecord>],
    cfg: ConsensusConfig,
) -> Result<ConsensusResult, FilterError> {
    cfg.validate()?;
    if panels.len() != cfg.panel_size {
        return Err(FilterError::Config(format!(
            "expected {} prediction sets, got {}",
            cfg.panel_size,
            panels.len()
        )));
    }
    let indexes = panels
        .iter()
        .enumerate()
        .map(|(i, p)| panel_index(i, p))
        .collect::<Result<Vec<_>, _>>()?;
    let reference: BTreeSet<&str> = indexes[0].keys().copied().collect();
    for (panel, index) in indexes.iter().enumerate().skip(1) {
        let ids: BTreeSet<&str> = index.keys().copied().collect();
        let diff: Vec<String> = reference.symmetric_difference(&ids).map(|s| s.to_string()).collect();
        if !diff.is_empty() {
            return Err(FilterError::IdMismatch {
                panel,
                count: diff.len(),
                ids: diff.into_iter().take(10).collect(),
            });
        }
    }

    let mut table = Vec::with_capacity(reference.len());
    for id in reference {
        let true_label = indexes[0][id].true_label;
        let mut miss_count = 0;
        for (panel, index) in indexes.iter().enumerate() {
            let p = index[id];
            if p.true_label != true_label {
                return Err(FilterError::Panel {
                    panel,
                    message: format!("true label of {id:?} disagrees with panel 0"),
                });
            }
            if !p.is_correct() {
                miss_count += 1;
            }
        }
        table.push(MissCount {
            sample_id: id.to_string(),
            true_label,
            miss_count,
        });
    }
    table.sort_by(|a, b| {
        b.miss_count
            .cmp(&a.miss_count)
            .then_with(|| a.sample_id.cmp(&b.sample_id))
    });
    let selected = table
        .iter()
        .filter(|r| r.miss_count >= cfg.threshold)
        .map(|r| r.sample_id.clone())
        .collect();
    Ok(ConsensusResult { selected, table })
}

/// Copy the selected images into `out_dir/images/` and write `out_dir/review.csv`
/// (`id, miss_count, label, spec_summary`) plus the full `out_dir/miss_counts.csv`.
/// Returns the number of rows written to `review.csv`.
pub fn review_export(
    result: &ConsensusResult,
    manifest: &Manifest,
    manifest_path: &Path,
    out_dir: &Path,
) -> Result<usize, FilterError> {
    let index = manifest.index();
    let counts: HashMap<&str, &MissCount> = result.table.iter().map(|m| (m.sample_id.as_str(), m)).collect();
    let rows = result
        .selected
        .iter()
        .map(|id| {
            let rec = index
                .get(id.as_str())
                .ok_or_else(|| FilterError::Unresolved(id.clone()))?;
            let misses = counts.get(id.as_str()).map_or(0, |m| m.miss_count);
            Ok((*rec, misses))
        })
        .collect::<Result<Vec<_>, FilterError>>()?;

    let io = |path: &Path, e: &dyn std::fmt::Display| FilterError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let image_dir = out_dir.join("images");
    std::fs::create_dir_all(&image_dir).map_err(|e| io(&image_dir, &e))?;

    let csv_path = out_dir.join("review.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| io(&csv_path, &e))?;
    w.write_record(["id", "miss_count", "label", "spec_summary"])
        .map_err(|e| io(&csv_path, &e))?;
    for (rec, misses) in &rows {
        let src = resolve_image(manifest_path, rec);
        let file_name = src
            .file_name()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(format!("{}.png", rec.id)));
        let dst = image_dir.join(file_name);
        std::fs::copy(&src, &dst).map_err(|e| io(&src, &e))?;
        w.write_record([
            rec.id.as_str(),
            &misses.to_string(),
            if rec.label { "true" } else { "false" },
            &rec.spec.summary(),
        ])
        .map_err(|e| io(&csv_path, &e))?;
    }
    w.flush().map_err(|e| io(&csv_path, &e))?;

    let table_path = out_dir.join("miss_counts.csv");
    let mut t = csv::Writer::from_path(&table_path).map_err(|e| io(&table_path, &e))?;
    for m in &result.table {
        t.serialize(m).map_err(|e| io(&table_path, &e))?;
    }
    t.flush().map_err(|e| io(&table_path, &e))?;
    Ok(rows.len())
}
