//! Embedding sets and their on-disk format.

mod hpemb;
mod split;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

pub use hpemb::{
    decode, encode, header_len, read_embeddings, record_len, write_embeddings, ParseError, ParseErrorKind,
    FORMAT_VERSION, MAGIC_PREFIX,
};
pub use split::split;

use crate::synth::Manifest;

#[derive(Debug, thiserror::Error)]
pub enum DataIoError {
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DataIoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DataIoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, DataIoError::Io { .. })
    }
}

/// One frozen feature vector. `label` is true for normal samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub sample_id: String,
    pub label: bool,
    pub vector: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub model_tag: String,
    /// Which activations were taken, e.g. `last_hidden_pooled` or `stage4_pooled`.
    pub feature_source: String,
    pub dim: usize,
    pub records: Vec<EmbeddingRecord>,
}

impl EmbeddingSet {
    /// Dimension, finiteness and id-uniqueness checks.
    pub fn validate(&self) -> Result<(), DataIoError> {
        if self.dim == 0 || self.dim > u32::MAX as usize {
            return Err(DataIoError::Invalid(format!("dimension {} out of range", self.dim)));
        }
        let mut seen = HashSet::new();
        for (i, r) in self.records.iter().enumerate() {
            if r.vector.len() != self.dim {
                return Err(DataIoError::Invalid(format!(
                    "record {i} ({}) has {} components, set dimension is {}",
                    r.sample_id,
                    r.vector.len(),
                    self.dim
                )));
            }
            if let Some(j) = r.vector.iter().position(|v| !v.is_finite()) {
                return Err(DataIoError::Invalid(format!(
                    "record {i} ({}) component {j} is not finite",
                    r.sample_id
                )));
            }
            if !seen.insert(r.sample_id.as_str()) {
                return Err(DataIoError::Invalid(format!("duplicate sample id {:?}", r.sample_id)));
            }
        }
        Ok(())
    }

    pub fn label_counts(&self) -> (usize, usize) {
        let normal = self.records.iter().filter(|r| r.label).count();
        (self.records.len() - normal, normal)
    }
}

/// Check every embedding id against a manifest.
///
/// Unknown ids are an error; label disagreements are returned as warnings.
pub fn cross_check(set: &EmbeddingSet, manifest: &Manifest) -> Result<Vec<String>, DataIoError> {
    let index = manifest.index();
    let mut warnings = Vec::new();
    for r in &set.records {
        match index.get(r.sample_id.as_str()) {
            None => {
                return Err(DataIoError::Invalid(format!(
                    "sample id {:?} is not in the manifest",
                    r.sample_id
                )))
            }
            Some(m) if m.label != r.label => warnings.push(format!(
                "{}: embedding label {} but manifest label {}",
                r.sample_id, r.label, m.label
            )),
            Some(_) => {}
        }
    }
    Ok(warnings)
}
