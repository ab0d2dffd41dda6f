//! Line-delimited JSON manifest: one header object, then one record per sample.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DistortionSpec, Placement, SpecParams, SynthError};

pub const MANIFEST_FORMAT: &str = "hpuzzle-manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub format: String,
    pub version: u32,
    pub resolution: [u32; 2],
    pub rng: String,
    pub seed: u64,
    /// True when every distorted sample has a matched normal sample.
    pub balanced: bool,
    pub specs_per_figure: usize,
    pub spec_params: SpecParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    /// Relative to the manifest's directory.
    pub image_path: String,
    pub label: bool,
    pub figure_id: String,
    pub background_id: String,
    pub spec: DistortionSpec,
    pub placement: Placement,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn index(&self) -> HashMap<&str, &ManifestRecord> {
        self.records.iter().map(|r| (r.id.as_str(), r)).collect()
    }

    pub fn write(&self, path: &Path) -> Result<(), SynthError> {
        let file = File::create(path).map_err(|e| SynthError::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut line = |v: String| writeln!(w, "{v}").map_err(|e| SynthError::io(path, e));
        line(serde_json::to_string(&self.header).expect("header serializes"))?;
        for r in &self.records {
            line(serde_json::to_string(r).expect("record serializes"))?;
        }
        w.flush().map_err(|e| SynthError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, SynthError> {
        let file = File::open(path).map_err(|e| SynthError::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let bad = |line: usize, message: String| SynthError::Manifest {
            path: path.to_path_buf(),
            line: line + 1,
            message,
        };
        let (_, first) = lines.next().ok_or_else(|| bad(0, "empty manifest".into()))?;
        let first = first.map_err(|e| SynthError::io(path, e))?;
        let header: ManifestHeader = serde_json::from_str(&first).map_err(|e| bad(0, e.to_string()))?;
        if header.format != MANIFEST_FORMAT || header.version != MANIFEST_VERSION {
            return Err(bad(
                0,
                format!("unsupported manifest {} v{}", header.format, header.version),
            ));
        }
        let mut records = Vec::new();
        for (n, line) in lines {
            let line = line.map_err(|e| SynthError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(|e| bad(n, e.to_string()))?);
        }
        Ok(Manifest { header, records })
    }
}

/// Absolute location of a record's image given the manifest file path.
pub fn resolve_image(manifest_path: &Path, record: &ManifestRecord) -> PathBuf {
    manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&record.image_path)
}
