use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng as _, RngCore};
use serde::{Deserialize, Serialize};

use super::spec::{Axis, DistortionSpec};
use super::SynthError;
use crate::rng::rng_from_seed;

/// Which cut axes the generator may pick from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AxisChoice {
    #[default]
    Both,
    Horizontal,
    Vertical,
}

impl AxisChoice {
    fn axes(self) -> &'static [Axis] {
        match self {
            AxisChoice::Both => &[Axis::Horizontal, Axis::Vertical],
            AxisChoice::Horizontal => &[Axis::Horizontal],
            AxisChoice::Vertical => &[Axis::Vertical],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecParams {
    pub max_cuts: u32,
    pub min_segment_px: u32,
    pub allow_reflect: bool,
    pub allow_permute: bool,
    pub axes: AxisChoice,
}

impl Default for SpecParams {
    fn default() -> Self {
        SpecParams {
            max_cuts: 3,
            min_segment_px: 32,
            allow_reflect: true,
            allow_permute: true,
            axes: AxisChoice::Both,
        }
    }
}

/// Largest number of cuts admissible along an extent.
fn max_cuts_for(extent: u32, params: &SpecParams) -> u32 {
    (extent / params.min_segment_px).saturating_sub(1).min(params.max_cuts)
}

fn check_params(dims: (u32, u32), params: &SpecParams) -> Result<Vec<Axis>, SynthError> {
    if params.min_segment_px < 1 || params.max_cuts < 1 {
        return Err(SynthError::InvalidParams(format!(
            "min_segment_px ({}) and max_cuts ({}) must both be >= 1",
            params.min_segment_px, params.max_cuts
        )));
    }
    if !params.allow_reflect && !params.allow_permute {
        return Err(SynthError::InvalidParams(
            "with reflection and permutation both disabled every spec is the identity".into(),
        ));
    }
    let feasible: Vec<Axis> = params
        .axes
        .axes()
        .iter()
        .copied()
        .filter(|a| max_cuts_for(a.extent(dims.0, dims.1), params) >= 1)
        .collect();
    if feasible.is_empty() {
        return Err(SynthError::InvalidParams(format!(
            "a {}x{} figure cannot hold two segments of at least {} px along {:?}",
            dims.0, dims.1, params.min_segment_px, params.axes
        )));
    }
    Ok(feasible)
}

/// Regenerate the single non-identity spec determined by `spec_seed`.
pub fn spec_from_seed(dims: (u32, u32), params: &SpecParams, spec_seed: u64) -> Result<DistortionSpec, SynthError> {
    let feasible = check_params(dims, params)?;
    let mut rng = rng_from_seed(spec_seed);
    let axis = feasible[rng.gen_range(0..feasible.len())];
    let extent = axis.extent(dims.0, dims.1);
    let k = rng.gen_range(1..=max_cuts_for(extent, params));
    let min = params.min_segment_px;
    // Spread the slack over k sorted offsets so every segment keeps at least `min` pixels.
    let slack = extent - (k + 1) * min;
    let mut offsets: Vec<u32> = (0..k).map(|_| rng.gen_range(0..=slack)).collect();
    offsets.sort_unstable();
    let cuts: Vec<u32> = offsets
        .iter()
        .enumerate()
        .map(|(i, off)| (i as u32 + 1) * min + off)
        .collect();
    let segments = k as usize + 1;
    loop {
        let reflections: Vec<bool> = (0..segments)
            .map(|_| params.allow_reflect && rng.gen_bool(0.5))
            .collect();
        let mut permutation: Vec<usize> = (0..segments).collect();
        if params.allow_permute {
            permutation.shuffle(&mut rng);
        }
        let spec = DistortionSpec {
            axis,
            cuts: cuts.clone(),
            reflections,
            permutation,
            seed: spec_seed,
        };
        if !spec.is_identity() {
            return Ok(spec);
        }
    }
}

/// `count` distinct-seeded, valid, non-identity specs for a figure of size `dims`.
/// Deterministic for fixed `(dims, params, seed)`.
pub fn generate_specs(
    dims: (u32, u32),
    params: &SpecParams,
    seed: u64,
    count: usize,
) -> Result<Vec<DistortionSpec>, SynthError> {
    check_params(dims, params)?;
    let mut master = rng_from_seed(seed);
    let mut used = HashSet::with_capacity(count);
    let mut specs = Vec::with_capacity(count);
    while specs.len() < count {
        let spec_seed = master.next_u64();
        if used.insert(spec_seed) {
            specs.push(spec_from_seed(dims, params, spec_seed)?);
        }
    }
    Ok(specs)
}
