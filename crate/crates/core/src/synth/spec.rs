use std::fmt;

use serde::{Deserialize, Serialize};

use super::SynthError;

/// Stacking direction of the strips produced by a cut.
///
/// `Horizontal` cuts are horizontal lines: offsets are rows, segments are full-width
/// strips stacked top to bottom, and reflection flips a strip upside down.
/// `Vertical` cuts are columns, segments are full-height strips, reflection mirrors
/// left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    /// Extent of a `width × height` image along the cut direction.
    pub fn extent(self, width: u32, height: u32) -> u32 {
        match self {
            Axis::Horizontal => height,
            Axis::Vertical => width,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Horizontal => "horizontal",
            Axis::Vertical => "vertical",
        })
    }
}

/// A deterministic recipe for rearranging a figure: straight cuts along one axis,
/// optional per-segment reflection, then a reordering of the segments.
///
/// Output position `i` receives input segment `permutation[i]`, reflected first if
/// `reflections[permutation[i]]` is set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DistortionSpec {
    pub axis: Axis,
    pub cuts: Vec<u32>,
    pub reflections: Vec<bool>,
    pub permutation: Vec<usize>,
    pub seed: u64,
}

impl DistortionSpec {
    /// The no-op spec carried by normal (True) samples.
    pub fn identity(axis: Axis) -> Self {
        DistortionSpec {
            axis,
            cuts: Vec::new(),
            reflections: vec![false],
            permutation: vec![0],
            seed: 0,
        }
    }

    pub fn segment_count(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.iter().enumerate().all(|(i, &p)| i == p) && self.reflections.iter().all(|r| !r)
    }

    /// Check structural invariants plus cut bounds against an image of `width × height`.
    pub fn validate(&self, width: u32, height: u32) -> Result<(), SynthError> {
        validate_cuts(self.axis.extent(width, height), &self.cuts)?;
        let k = self.segment_count();
        if self.reflections.len() != k {
            return Err(SynthError::InvalidSpec(format!(
                "{} reflection flags for {} segments",
                self.reflections.len(),
                k
            )));
        }
        if self.permutation.len() != k {
            return Err(SynthError::InvalidSpec(format!(
                "permutation of length {} for {} segments",
                self.permutation.len(),
                k
            )));
        }
        let mut seen = vec![false; k];
        for &p in &self.permutation {
            if p >= k || seen[p] {
                return Err(SynthError::InvalidSpec(format!(
                    "permutation {:?} is not a bijection on 0..{}",
                    self.permutation, k
                )));
            }
            seen[p] = true;
        }
        Ok(())
    }

    /// Short human-readable description, `"identity"` for the no-op spec.
    pub fn summary(&self) -> String {
        if self.is_identity() {
            return "identity".to_string();
        }
        let reflected: Vec<String> = self
            .reflections
            .iter()
            .enumerate()
            .filter(|(_, &r)| r)
            .map(|(i, _)| i.to_string())
            .collect();
        let cuts: Vec<String> = self.cuts.iter().map(u32::to_string).collect();
        let perm: Vec<String> = self.permutation.iter().map(usize::to_string).collect();
        format!(
            "{} cuts=[{}] reflect=[{}] perm=[{}]",
            self.axis,
            cuts.join(" "),
            reflected.join(" "),
            perm.join(" ")
        )
    }
}

/// Cuts must be strictly increasing and strictly inside `(0, extent)`.
pub fn validate_cuts(extent: u32, cuts: &[u32]) -> Result<(), SynthError> {
    let mut prev = 0u32;
    for (index, &cut) in cuts.iter().enumerate() {
        if cut == 0 || cut >= extent {
            return Err(SynthError::CutOutOfRange { index, cut, extent });
        }
        if index > 0 && cut <= prev {
            return Err(SynthError::CutNotIncreasing {
                index,
                cut,
                previous: prev,
            });
        }
        prev = cut;
    }
    Ok(())
}
