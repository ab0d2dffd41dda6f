//! A stand-in encoder for testing the pipeline without any ML runtime.
//!
//! Images are box-averaged to a `grid × grid` RGB thumbnail, centred, and
//! multiplied by a seeded Rademacher matrix scaled by `1/sqrt(inputs)`.

use std::path::Path;

use image::RgbImage;
use rand::Rng as _;

use crate::dataio::{EmbeddingRecord, EmbeddingSet};
use crate::rng::rng_from_seed;
use crate::synth::manifest::resolve_image;
use crate::synth::{Manifest, SynthError};

pub const STUB_MODEL_TAG: &str = "stub-random-projection";

#[derive(Debug, Clone, PartialEq)]
pub struct StubExtractor {
    pub dim: usize,
    pub grid: u32,
    projection: Vec<f32>,
}

impl StubExtractor {
    pub fn new(dim: usize, grid: u32, seed: u64) -> Self {
        assert!(dim > 0 && grid > 0, "stub extractor needs a non-zero dim and grid");
        let inputs = (grid * grid * 3) as usize;
        let scale = 1.0 / (inputs as f32).sqrt();
        let mut rng = rng_from_seed(seed);
        let projection = (0..dim * inputs)
            .map(|_| if rng.gen_bool(0.5) { scale } else { -scale })
            .collect();
        StubExtractor { dim, grid, projection }
    }

    pub fn feature_source(&self) -> String {
        format!("stub_pixels{}x{}_rp{}", self.grid, self.grid, self.dim)
    }

    /// Box-average thumbnail in `[-0.5, 0.5]`, row-major RGB.
    fn thumbnail(&self, img: &RgbImage) -> Vec<f32> {
        let (w, h) = img.dimensions();
        let g = self.grid;
        let mut out = Vec::with_capacity((g * g * 3) as usize);
        for gy in 0..g {
            let (y0, y1) = ((gy * h / g), ((gy + 1) * h / g).max(gy * h / g + 1).min(h));
            for gx in 0..g {
                let (x0, x1) = ((gx * w / g), ((gx + 1) * w / g).max(gx * w / g + 1).min(w));
                let mut acc = [0f64; 3];
                for y in y0..y1 {
                    for x in x0..x1 {
                        let p = img.get_pixel(x, y);
                        for c in 0..3 {
                            acc[c] += p[c] as f64;
                        }
                    }
                }
                let n = ((x1 - x0) * (y1 - y0)) as f64;
                out.extend(acc.iter().map(|a| (a / (n * 255.0) - 0.5) as f32));
            }
        }
        out
    }

    pub fn embed(&self, img: &RgbImage) -> Vec<f32> {
        let thumb = self.thumbnail(img);
        self.projection
            .chunks_exact(thumb.len())
            .map(|row| row.iter().zip(&thumb).map(|(a, b)| (a * b) as f64).sum::<f64>() as f32)
            .collect()
    }

    /// Embed every image listed in a manifest, keeping manifest order and labels.
    pub fn extract(&self, manifest: &Manifest, manifest_path: &Path) -> Result<EmbeddingSet, SynthError> {
        let records = manifest
            .records
            .iter()
            .map(|r| {
                let path = resolve_image(manifest_path, r);
                let img = image::open(&path)
                    .map_err(|source| SynthError::Image { path, source })?
                    .to_rgb8();
                Ok(EmbeddingRecord {
                    sample_id: r.id.clone(),
                    label: r.label,
                    vector: self.embed(&img),
                })
            })
            .collect::<Result<Vec<_>, SynthError>>()?;
        Ok(EmbeddingSet {
            model_tag: STUB_MODEL_TAG.into(),
            feature_source: self.feature_source(),
            dim: self.dim,
            records,
        })
    }
}
