use std::collections::HashSet;
use std::path::Path;

use image::RgbImage;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::{Manifest, ManifestHeader, ManifestRecord, MANIFEST_FORMAT, MANIFEST_VERSION};
use super::{
    apply_distortion, background_crop, composite, generate_specs, scaled_size, BackgroundAsset, DistortionSpec,
    FigureAsset, Placement, SpecParams, SynthError,
};
use crate::rng::{derive_seed, rng_from_seed, RNG_ALGORITHM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderParams {
    /// Canvas `(width, height)`.
    pub resolution: (u32, u32),
    /// Distorted specs drawn per figure; each is paired with every background.
    pub specs_per_figure: usize,
    pub spec_params: SpecParams,
    /// Figure scale as a fraction of the largest scale that fits the canvas.
    pub scale_range: (f64, f64),
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            resolution: (512, 512),
            specs_per_figure: 10,
            spec_params: SpecParams::default(),
            scale_range: (0.6, 1.0),
            threads: 0,
        }
    }
}

/// A rendered sample plus its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PuzzleSample {
    pub id: String,
    pub image: RgbImage,
    pub label: bool,
    pub figure_id: String,
    pub background_id: String,
    pub spec: DistortionSpec,
    pub placement: Placement,
    pub seed: u64,
}

/// Everything needed to render one sample; cheap to build for the whole dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleJob {
    pub id: String,
    pub figure: usize,
    pub background: usize,
    pub spec: DistortionSpec,
    pub placement: Placement,
    pub label: bool,
    pub seed: u64,
}

fn check_unique<'a>(kind: &str, ids: impl Iterator<Item = &'a str>) -> Result<(), SynthError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(SynthError::DuplicateId(format!("{kind} id {id:?}")));
        }
    }
    Ok(())
}

fn draw_placement(seed: u64, figure: (u32, u32), canvas: (u32, u32), range: (f64, f64)) -> Placement {
    let mut rng = rng_from_seed(seed);
    let fit = (canvas.0 as f64 / figure.0 as f64).min(canvas.1 as f64 / figure.1 as f64);
    let frac = if range.1 > range.0 {
        rng.gen_range(range.0..=range.1)
    } else {
        range.0
    };
    let scale = fit * frac;
    let (sw, sh) = scaled_size(figure.0, figure.1, scale);
    Placement {
        x: rng.gen_range(0..=canvas.0 - sw),
        y: rng.gen_range(0..=canvas.1 - sh),
        scale,
    }
}

/// Lay out every (figure, background, spec) combination as a matched normal/distorted pair.
/// Jobs are returned sorted by id.
pub fn plan_dataset(
    figures: &[FigureAsset],
    backgrounds: &[BackgroundAsset],
    params: &RenderParams,
    seed: u64,
) -> Result<Vec<SampleJob>, SynthError> {
    if figures.is_empty() {
        return Err(SynthError::EmptyInput("no figure assets".into()));
    }
    if backgrounds.is_empty() {
        return Err(SynthError::EmptyInput("no background assets".into()));
    }
    let (lo, hi) = params.scale_range;
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(SynthError::InvalidParams(format!(
            "scale range ({lo}, {hi}) must satisfy 0 < lo <= hi <= 1"
        )));
    }
    let canvas = params.resolution;
    if canvas.0 == 0 || canvas.1 == 0 {
        return Err(SynthError::InvalidParams("render resolution must be non-zero".into()));
    }
    check_unique("figure", figures.iter().map(|f| f.id.as_str()))?;
    check_unique("background", backgrounds.iter().map(|b| b.id.as_str()))?;
    for b in backgrounds {
        background_crop(b, canvas)?;
    }

    let mut jobs = Vec::new();
    for (fi, fig) in figures.iter().enumerate() {
        let dims = fig.pixels.dimensions();
        let specs = generate_specs(
            dims,
            &params.spec_params,
            derive_seed(seed, &[0, fi as u64]),
            params.specs_per_figure,
        )?;
        for (bi, bg) in backgrounds.iter().enumerate() {
            for (si, spec) in specs.iter().enumerate() {
                let sample_seed = derive_seed(seed, &[1, fi as u64, bi as u64, si as u64]);
                let placement = draw_placement(sample_seed, dims, canvas, params.scale_range);
                let base = format!("{}__{}__{:05}", fig.id, bg.id, si);
                for (label, spec) in [(true, DistortionSpec::identity(spec.axis)), (false, spec.clone())] {
                    jobs.push(SampleJob {
                        id: format!("{base}_{}", if label { 'T' } else { 'F' }),
                        figure: fi,
                        background: bi,
                        spec,
                        placement,
                        label,
                        seed: sample_seed,
                    });
                }
            }
        }
    }
    jobs.sort_by(|a, b| a.id.cmp(&b.id));
    check_unique("sample", jobs.iter().map(|j| j.id.as_str()))?;
    Ok(jobs)
}

pub fn render_sample(
    job: &SampleJob,
    figures: &[FigureAsset],
    backgrounds: &[BackgroundAsset],
    canvas: (u32, u32),
) -> Result<PuzzleSample, SynthError> {
    let figure = &figures[job.figure];
    let background = &backgrounds[job.background];
    let distorted = apply_distortion(figure, &job.spec)?;
    let image = composite(&distorted, background, job.placement, canvas)?;
    Ok(PuzzleSample {
        id: job.id.clone(),
        image,
        label: job.spec.is_identity(),
        figure_id: figure.id.clone(),
        background_id: background.id.clone(),
        spec: job.spec.clone(),
        placement: job.placement,
        seed: job.seed,
    })
}

/// Render all samples into `out_dir/images/` and write `out_dir/manifest.jsonl`.
///
/// Work is spread over `params.threads` workers; output is identical for any thread
/// count. The manifest is only written once every image has been saved.
pub fn render_dataset(
    figures: &[FigureAsset],
    backgrounds: &[BackgroundAsset],
    params: &RenderParams,
    seed: u64,
    out_dir: &Path,
) -> Result<Manifest, SynthError> {
    let jobs = plan_dataset(figures, backgrounds, params, seed)?;
    let image_dir = out_dir.join("images");
    std::fs::create_dir_all(&image_dir).map_err(|e| SynthError::io(&image_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.threads)
        .build()
        .map_err(|e| SynthError::InvalidParams(format!("thread pool: {e}")))?;
    let records: Vec<ManifestRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let sample = render_sample(job, figures, backgrounds, params.resolution)?;
                let rel = format!("images/{}.png", sample.id);
                sample
                    .image
                    .save_with_format(out_dir.join(&rel), image::ImageFormat::Png)
                    .map_err(|e| SynthError::SampleIo {
                        id: sample.id.clone(),
                        source: e,
                    })?;
                Ok(ManifestRecord {
                    id: sample.id,
                    image_path: rel,
                    label: sample.label,
                    figure_id: sample.figure_id,
                    background_id: sample.background_id,
                    spec: sample.spec,
                    placement: sample.placement,
                    seed: sample.seed,
                })
            })
            .collect::<Result<_, SynthError>>()
    })?;

    let manifest = Manifest {
        header: ManifestHeader {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            resolution: [params.resolution.0, params.resolution.1],
            rng: RNG_ALGORITHM.into(),
            seed,
            balanced: true,
            specs_per_figure: params.specs_per_figure,
            spec_params: params.spec_params.clone(),
        },
        records,
    };
    let tmp = out_dir.join("manifest.jsonl.partial");
    manifest.write(&tmp)?;
    let path = out_dir.join("manifest.jsonl");
    std::fs::rename(&tmp, &path).map_err(|e| SynthError::io(&path, e))?;
    Ok(manifest)
}
