//! Synthesis of normal and puzzle-distorted composites.
//!
//! A figure is cut into straight strips along one axis, strips are optionally
//! mirrored and reordered, and the result is alpha-composited over a background.
//! Normal samples use the identity recipe, so `label == spec.is_identity()`.

mod assets;
mod composite;
mod generate;
pub mod manifest;
mod ops;
mod render;
mod spec;

use std::path::{Path, PathBuf};

pub use assets::{load_backgrounds, load_figures, BackgroundAsset, FigureAsset};
pub use composite::{background_crop, blend_channel, composite, scale_nearest, scaled_size, Placement};
pub use generate::{generate_specs, spec_from_seed, AxisChoice, SpecParams};
pub use manifest::{Manifest, ManifestHeader, ManifestRecord};
pub use ops::{apply_distortion, reassemble, reflect_segment, slice};
pub use render::{plan_dataset, render_dataset, render_sample, PuzzleSample, RenderParams, SampleJob};
pub use spec::{validate_cuts, Axis, DistortionSpec};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("cut #{index} at offset {cut} is outside (0, {extent})")]
    CutOutOfRange { index: usize, cut: u32, extent: u32 },
    #[error("cut #{index} at offset {cut} does not exceed previous cut {previous}")]
    CutNotIncreasing { index: usize, cut: u32, previous: u32 },
    #[error("invalid distortion spec: {0}")]
    InvalidSpec(String),
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("asset {id} is {width}x{height}, needs at least {min_width}x{min_height}")]
    AssetTooSmall {
        id: String,
        width: u32,
        height: u32,
        min_width: u32,
        min_height: u32,
    },
    #[error("placement out of bounds: {0}")]
    Placement(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("duplicate {0}")]
    DuplicateId(String),
    #[error("{}:{line}: {message}", path.display())]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("decoding {}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("writing sample {id}: {source}")]
    SampleIo {
        id: String,
        #[source]
        source: image::ImageError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SynthError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        SynthError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// True for failures of the filesystem or codecs rather than of the inputs' values.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            SynthError::Io { .. } | SynthError::SampleIo { .. } | SynthError::Image { .. }
        )
    }
}
