//! Slicing, reflection and reassembly of RGBA figures.

use image::{imageops, GenericImage, RgbaImage};

use super::spec::{validate_cuts, Axis, DistortionSpec};
use super::{FigureAsset, SynthError};

/// Cut `figure` into `cuts.len() + 1` strips along `axis`. Pixels are copied, never resampled.
pub fn slice(figure: &FigureAsset, axis: Axis, cuts: &[u32]) -> Result<Vec<RgbaImage>, SynthError> {
    slice_image(&figure.pixels, axis, cuts)
}

pub(crate) fn slice_image(img: &RgbaImage, axis: Axis, cuts: &[u32]) -> Result<Vec<RgbaImage>, SynthError> {
    let (w, h) = img.dimensions();
    let extent = axis.extent(w, h);
    validate_cuts(extent, cuts)?;
    let bounds = std::iter::once(0)
        .chain(cuts.iter().copied())
        .chain(std::iter::once(extent))
        .collect::<Vec<_>>();
    Ok(bounds
        .windows(2)
        .map(|b| {
            let (start, len) = (b[0], b[1] - b[0]);
            match axis {
                Axis::Horizontal => imageops::crop_imm(img, 0, start, w, len).to_image(),
                Axis::Vertical => imageops::crop_imm(img, start, 0, len, h).to_image(),
            }
        })
        .collect())
}

/// Mirror a segment across the cut axis.
pub fn reflect_segment(segment: &RgbaImage, axis: Axis) -> RgbaImage {
    match axis {
        Axis::Horizontal => imageops::flip_vertical(segment),
        Axis::Vertical => imageops::flip_horizontal(segment),
    }
}

/// Concatenate strips along `axis`; the inverse of [`slice`].
pub fn reassemble(segments: &[RgbaImage], axis: Axis) -> Result<RgbaImage, SynthError> {
    let first = segments
        .first()
        .ok_or_else(|| SynthError::InvalidSpec("no segments to reassemble".into()))?;
    let (w, h) = match axis {
        Axis::Horizontal => (first.width(), segments.iter().map(|s| s.height()).sum()),
        Axis::Vertical => (segments.iter().map(|s| s.width()).sum(), first.height()),
    };
    let mut out = RgbaImage::new(w, h);
    let mut offset = 0;
    for seg in segments {
        let (x, y) = match axis {
            Axis::Horizontal if seg.width() == w => (0, offset),
            Axis::Vertical if seg.height() == h => (offset, 0),
            _ => {
                return Err(SynthError::InvalidSpec(format!(
                    "segment {}x{} does not match strip size {}x{}",
                    seg.width(),
                    seg.height(),
                    w,
                    h
                )))
            }
        };
        out.copy_from(seg, x, y).expect("segment fits by construction");
        offset += axis.extent(seg.width(), seg.height());
    }
    Ok(out)
}

/// Slice, reflect flagged segments, reorder by the permutation and reassemble.
/// The result keeps the figure's id, source tag and dimensions.
pub fn apply_distortion(figure: &FigureAsset, spec: &DistortionSpec) -> Result<FigureAsset, SynthError> {
    let (w, h) = figure.pixels.dimensions();
    spec.validate(w, h)?;
    let segments = slice(figure, spec.axis, &spec.cuts)?;
    let arranged: Vec<RgbaImage> = spec
        .permutation
        .iter()
        .map(|&src| {
            if spec.reflections[src] {
                reflect_segment(&segments[src], spec.axis)
            } else {
                segments[src].clone()
            }
        })
        .collect();
    Ok(FigureAsset {
        id: figure.id.clone(),
        pixels: reassemble(&arranged, spec.axis)?,
        source: figure.source.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgba;

    fn numbered(w: u32, h: u32) -> FigureAsset {
        let pixels = RgbaImage::from_fn(w, h, |x, y| Rgba([x as u8, y as u8, (x * 7 + y) as u8, 200]));
        FigureAsset::new("fig", pixels, "test").unwrap()
    }

    #[test]
    fn horizontal_split_partitions_rows() {
        let f = numbered(4, 4);
        let segs = slice(&f, Axis::Horizontal, &[2]).unwrap();
        assert_eq!(segs.len(), 2);
        assert!(segs.iter().all(|s| s.dimensions() == (4, 2)));
        assert_eq!(reassemble(&segs, Axis::Horizontal).unwrap(), f.pixels);
    }

    #[test]
    fn no_cuts_is_single_segment() {
        let f = numbered(3, 5);
        let segs = slice(&f, Axis::Vertical, &[]).unwrap();
        assert_eq!(segs, vec![f.pixels.clone()]);
    }

    #[test]
    fn segment_heights_follow_offsets() {
        // 10 rows high, 6 columns wide
        let f = numbered(6, 10);
        let heights: Vec<u32> = slice(&f, Axis::Horizontal, &[3, 7])
            .unwrap()
            .iter()
            .map(|s| s.height())
            .collect();
        assert_eq!(heights, vec![3, 4, 3]);
    }

    #[test]
    fn bad_cuts_rejected() {
        let f = numbered(6, 10);
        assert!(matches!(
            slice(&f, Axis::Horizontal, &[0]),
            Err(SynthError::CutOutOfRange { cut: 0, .. })
        ));
        assert!(matches!(
            slice(&f, Axis::Vertical, &[6]),
            Err(SynthError::CutOutOfRange { cut: 6, extent: 6, .. })
        ));
        assert!(slice(&f, Axis::Horizontal, &[4, 4]).is_err());
    }

    #[test]
    fn reflect_two_by_two() {
        let (a, b, c, d) = (
            Rgba([1, 0, 0, 255]),
            Rgba([2, 0, 0, 255]),
            Rgba([3, 0, 0, 255]),
            Rgba([4, 0, 0, 255]),
        );
        let mut seg = RgbaImage::new(2, 2);
        seg.put_pixel(0, 0, a);
        seg.put_pixel(1, 0, b);
        seg.put_pixel(0, 1, c);
        seg.put_pixel(1, 1, d);
        let r = reflect_segment(&seg, Axis::Horizontal);
        assert_eq!((r[(0, 0)], r[(1, 0)], r[(0, 1)], r[(1, 1)]), (c, d, a, b));
        let r = reflect_segment(&seg, Axis::Vertical);
        assert_eq!((r[(0, 0)], r[(1, 0)], r[(0, 1)], r[(1, 1)]), (b, a, d, c));
    }

    #[test]
    fn reflect_single_pixel_is_fixed() {
        let seg = RgbaImage::from_pixel(1, 1, Rgba([9, 8, 7, 6]));
        assert_eq!(reflect_segment(&seg, Axis::Horizontal), seg);
        assert_eq!(reflect_segment(&seg, Axis::Vertical), seg);
    }

    #[test]
    fn transposition_twice_restores() {
        let f = numbered(8, 6);
        let spec = DistortionSpec {
            axis: Axis::Vertical,
            cuts: vec![4],
            reflections: vec![false, false],
            permutation: vec![1, 0],
            seed: 1,
        };
        let once = apply_distortion(&f, &spec).unwrap();
        assert_ne!(once.pixels, f.pixels);
        let twice = apply_distortion(&once, &spec).unwrap();
        assert_eq!(twice.pixels, f.pixels);
    }

    #[test]
    fn identity_spec_is_byte_identity() {
        let f = numbered(5, 7);
        let out = apply_distortion(&f, &DistortionSpec::identity(Axis::Horizontal)).unwrap();
        assert_eq!(out.pixels.as_raw(), f.pixels.as_raw());
    }

    #[test]
    fn reflected_and_permuted_layout() {
        let f = numbered(2, 3);
        let spec = DistortionSpec {
            axis: Axis::Horizontal,
            cuts: vec![1],
            reflections: vec![false, true],
            permutation: vec![1, 0],
            seed: 0,
        };
        let out = apply_distortion(&f, &spec).unwrap().pixels;
        // rows of segment 1 (y=1,2) reflected -> y=2,1, then segment 0 (y=0)
        let rows: Vec<u8> = (0..3).map(|y| out[(0, y)][1]).collect();
        assert_eq!(rows, vec![2, 1, 0]);
    }
}
