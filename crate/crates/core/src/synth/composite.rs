use image::{imageops, RgbImage, RgbaImage};
use serde::{Deserialize, Serialize};

use super::{BackgroundAsset, FigureAsset, SynthError};

/// Where the (scaled) figure lands on the canvas: top-left corner plus a uniform scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub x: u32,
    pub y: u32,
    pub scale: f64,
}

/// Size of a `width × height` figure after nearest-neighbour scaling by `scale`.
pub fn scaled_size(width: u32, height: u32, scale: f64) -> (u32, u32) {
    let s = |v: u32| ((v as f64 * scale).round() as u32).max(1);
    (s(width), s(height))
}

/// Nearest-neighbour resize using pixel-centre sampling.
pub fn scale_nearest(src: &RgbaImage, width: u32, height: u32) -> RgbaImage {
    let (sw, sh) = src.dimensions();
    if (sw, sh) == (width, height) {
        return src.clone();
    }
    let map = |d: u32, dst: u32, src: u32| -> u32 {
        let s = ((d as f64 + 0.5) * src as f64 / dst as f64).floor() as u32;
        s.min(src - 1)
    };
    RgbaImage::from_fn(width, height, |x, y| {
        *src.get_pixel(map(x, width, sw), map(y, height, sh))
    })
}

/// Centre crop of the background at canvas size.
pub fn background_crop(background: &BackgroundAsset, canvas: (u32, u32)) -> Result<RgbImage, SynthError> {
    let (bw, bh) = background.pixels.dimensions();
    let (cw, ch) = canvas;
    if bw < cw || bh < ch {
        return Err(SynthError::AssetTooSmall {
            id: background.id.clone(),
            width: bw,
            height: bh,
            min_width: cw,
            min_height: ch,
        });
    }
    Ok(imageops::crop_imm(&background.pixels, (bw - cw) / 2, (bh - ch) / 2, cw, ch).to_image())
}

/// One channel of straight-alpha "over", in 0..1 floats, rounded half away from zero.
#[inline]
pub fn blend_channel(fg: u8, bg: u8, alpha: u8) -> u8 {
    let a = alpha as f64 / 255.0;
    let out = (fg as f64 / 255.0) * a + (bg as f64 / 255.0) * (1.0 - a);
    (out * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Alpha-composite `figure` over the centre crop of `background` on a canvas of size `canvas`.
pub fn composite(
    figure: &FigureAsset,
    background: &BackgroundAsset,
    placement: Placement,
    canvas: (u32, u32),
) -> Result<RgbImage, SynthError> {
    if !(placement.scale.is_finite() && placement.scale > 0.0) {
        return Err(SynthError::Placement(format!(
            "scale {} must be positive and finite",
            placement.scale
        )));
    }
    let (fw, fh) = figure.pixels.dimensions();
    let (sw, sh) = scaled_size(fw, fh, placement.scale);
    let fits = |o: u32, len: u32, lim: u32| o.checked_add(len).is_some_and(|end| end <= lim);
    if !fits(placement.x, sw, canvas.0) || !fits(placement.y, sh, canvas.1) {
        return Err(SynthError::Placement(format!(
            "figure {} scaled to {}x{} at ({}, {}) exceeds canvas {}x{}",
            figure.id, sw, sh, placement.x, placement.y, canvas.0, canvas.1
        )));
    }
    let mut out = background_crop(background, canvas)?;
    let scaled = scale_nearest(&figure.pixels, sw, sh);
    for (x, y, fg) in scaled.enumerate_pixels() {
        let dst = out.get_pixel_mut(placement.x + x, placement.y + y);
        let alpha = fg[3];
        for c in 0..3 {
            dst[c] = blend_channel(fg[c], dst[c], alpha);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, Rgba};

    fn bg(w: u32, h: u32) -> BackgroundAsset {
        BackgroundAsset {
            id: "bg".into(),
            pixels: RgbImage::from_fn(w, h, |x, y| Rgb([x as u8, y as u8, 77])),
        }
    }

    #[test]
    fn half_alpha_rounds_to_128() {
        assert_eq!(blend_channel(255, 0, 128), 128);
        assert_eq!(blend_channel(0, 255, 128), 127);
        assert_eq!(blend_channel(200, 13, 0), 13);
        assert_eq!(blend_channel(200, 13, 255), 200);
    }

    #[test]
    fn exhaustive_alpha_endpoints() {
        for v in 0..=255u8 {
            for w in [0u8, 1, 127, 254, 255] {
                assert_eq!(blend_channel(v, w, 0), w);
                assert_eq!(blend_channel(v, w, 255), v);
            }
        }
    }

    #[test]
    fn transparent_figure_leaves_background_crop() {
        let fig = FigureAsset::new("f", RgbaImage::from_pixel(4, 4, Rgba([255, 0, 0, 0])), "t").unwrap();
        let b = bg(10, 10);
        let out = composite(&fig, &b, Placement { x: 1, y: 2, scale: 1.5 }, (8, 8)).unwrap();
        assert_eq!(out, background_crop(&b, (8, 8)).unwrap());
        assert_eq!(out[(0, 0)], Rgb([1, 1, 77]));
    }

    #[test]
    fn opaque_full_canvas_figure_wins() {
        let fig = FigureAsset::new(
            "f",
            RgbaImage::from_fn(6, 5, |x, y| Rgba([x as u8 * 10, y as u8 * 10, 3, 255])),
            "t",
        )
        .unwrap();
        let out = composite(&fig, &bg(6, 5), Placement { x: 0, y: 0, scale: 1.0 }, (6, 5)).unwrap();
        let expected = image::DynamicImage::ImageRgba8(fig.pixels.clone()).to_rgb8();
        assert_eq!(out, expected);
    }

    #[test]
    fn out_of_bounds_placement_rejected() {
        let fig = FigureAsset::new("f", RgbaImage::new(4, 4), "t").unwrap();
        let err = composite(&fig, &bg(8, 8), Placement { x: 5, y: 0, scale: 1.0 }, (8, 8)).unwrap_err();
        assert!(matches!(err, SynthError::Placement(_)));
        assert!(composite(&fig, &bg(8, 8), Placement { x: 0, y: 0, scale: 0.0 }, (8, 8)).is_err());
    }

    #[test]
    fn small_background_rejected() {
        let fig = FigureAsset::new("f", RgbaImage::new(2, 2), "t").unwrap();
        assert!(matches!(
            composite(&fig, &bg(4, 4), Placement { x: 0, y: 0, scale: 1.0 }, (8, 8)),
            Err(SynthError::AssetTooSmall { .. })
        ));
    }

    #[test]
    fn nearest_upscale_duplicates_pixels() {
        let src = RgbaImage::from_fn(2, 1, |x, _| Rgba([x as u8, 0, 0, 255]));
        let up = scale_nearest(&src, 4, 2);
        let row: Vec<u8> = (0..4).map(|x| up[(x, 1)][0]).collect();
        assert_eq!(row, vec![0, 0, 1, 1]);
        assert_eq!(scaled_size(10, 3, 0.5), (5, 2));
    }
}
