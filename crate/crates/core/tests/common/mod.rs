#![allow(dead_code)]

use std::path::Path;

use hpuzzle::dataio::{EmbeddingRecord, EmbeddingSet};
use hpuzzle::probe::PredictionRecord;
use hpuzzle::synth::{Axis, DistortionSpec, FigureAsset};
use image::{Rgb, RgbImage, Rgba, RgbaImage};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two Gaussian clusters at `±sep·e1` with unit variance; even-indexed samples are normal.
pub fn gaussian_clusters(n: usize, dim: usize, sep: f32, seed: u64) -> EmbeddingSet {
    let mut r = rng(seed);
    let records = (0..n)
        .map(|i| {
            let label = i % 2 == 0;
            let mut vector: Vec<f32> = (0..dim).map(|_| r.sample::<f32, _>(StandardNormal)).collect();
            vector[0] += if label { sep } else { -sep };
            EmbeddingRecord {
                sample_id: format!("g{i:05}"),
                label,
                vector,
            }
        })
        .collect();
    EmbeddingSet {
        model_tag: "gauss".into(),
        feature_source: "synthetic".into(),
        dim,
        records,
    }
}

pub fn random_figure(r: &mut ChaCha8Rng, max_side: u32) -> FigureAsset {
    let w = r.gen_range(2..=max_side);
    let h = r.gen_range(2..=max_side);
    let pixels = RgbaImage::from_fn(w, h, |_, _| Rgba(r.gen()));
    FigureAsset::new("rand", pixels, "random").unwrap()
}

/// Any valid spec for a `w × h` figure (not necessarily non-identity).
pub fn random_spec(r: &mut ChaCha8Rng, w: u32, h: u32) -> DistortionSpec {
    let axis = if r.gen_bool(0.5) {
        Axis::Horizontal
    } else {
        Axis::Vertical
    };
    let extent = axis.extent(w, h);
    let mut interior: Vec<u32> = (1..extent).collect();
    interior.shuffle(r);
    let k = r.gen_range(0..=interior.len().min(5));
    let mut cuts = interior[..k].to_vec();
    cuts.sort_unstable();
    let mut permutation: Vec<usize> = (0..=k).collect();
    permutation.shuffle(r);
    DistortionSpec {
        axis,
        cuts,
        reflections: (0..=k).map(|_| r.gen_bool(0.5)).collect(),
        permutation,
        seed: r.gen(),
    }
}

pub fn sorted_pixels(img: &RgbaImage) -> Vec<[u8; 4]> {
    let mut v: Vec<[u8; 4]> = img.pixels().map(|p| p.0).collect();
    v.sort_unstable();
    v
}

pub fn prediction(id: &str, truth: bool, correct: bool, p: f64) -> PredictionRecord {
    PredictionRecord {
        sample_id: id.into(),
        true_label: truth,
        predicted_label: if correct { truth } else { !truth },
        p_predicted: p,
    }
}

/// A soft-edged figure with a distinct head/torso/legs layout, plus a textured background.
pub fn write_assets(dir: &Path, figures: usize, backgrounds: usize) {
    let fig_dir = dir.join("figures");
    let bg_dir = dir.join("backgrounds");
    std::fs::create_dir_all(&fig_dir).unwrap();
    std::fs::create_dir_all(&bg_dir).unwrap();
    for f in 0..figures {
        let (w, h) = (96 + 16 * f as u32, 160);
        let img = RgbaImage::from_fn(w, h, |x, y| {
            let cx = w as i32 / 2;
            let dx = (x as i32 - cx).abs();
            let (inside, color) = if y < 40 {
                (dx < 18, [230, 190, 160])
            } else if y < 100 {
                (dx < 36, [40 + 30 * f as u8, 80, 200])
            } else {
                (dx > 6 && dx < 28, [60, 50, 40])
            };
            if inside {
                Rgba([color[0], color[1], color[2], 255])
            } else if dx < 40 {
                Rgba([color[0], color[1], color[2], 64])
            } else {
                Rgba([0, 0, 0, 0])
            }
        });
        img.save(fig_dir.join(format!("person{f:02}.png"))).unwrap();
    }
    for b in 0..backgrounds {
        let img = RgbImage::from_fn(300, 260, |x, y| {
            Rgb([((x * 7 + y) % 256) as u8, ((y * 3 + 40 * b as u32) % 256) as u8, 120])
        });
        img.save(bg_dir.join(format!("room{b:02}.png"))).unwrap();
    }
}
