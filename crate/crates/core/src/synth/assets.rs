use std::path::{Path, PathBuf};

use image::{RgbImage, RgbaImage};

use super::SynthError;

/// Foreground figure with straight (non-premultiplied) alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureAsset {
    pub id: String,
    pub pixels: RgbaImage,
    pub source: String,
}

impl FigureAsset {
    pub fn new(id: impl Into<String>, pixels: RgbaImage, source: impl Into<String>) -> Result<Self, SynthError> {
        let id = id.into();
        let (w, h) = pixels.dimensions();
        if w < 2 || h < 2 {
            return Err(SynthError::AssetTooSmall {
                id,
                width: w,
                height: h,
                min_width: 2,
                min_height: 2,
            });
        }
        Ok(FigureAsset {
            id,
            pixels,
            source: source.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundAsset {
    pub id: String,
    pub pixels: RgbImage,
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>, SynthError> {
    let entries = std::fs::read_dir(dir).map_err(|e| SynthError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| SynthError::io(dir, e))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn open(path: &Path) -> Result<image::DynamicImage, SynthError> {
    image::open(path).map_err(|e| SynthError::Image {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Load every `*.png` in `dir` (sorted by file name) as a figure; the id is the file stem.
pub fn load_figures(dir: &Path) -> Result<Vec<FigureAsset>, SynthError> {
    png_files(dir)?
        .into_iter()
        .map(|p| FigureAsset::new(stem(&p), open(&p)?.to_rgba8(), p.display().to_string()))
        .collect()
}

/// Load every `*.png` in `dir` as a background; alpha, if present, is dropped.
pub fn load_backgrounds(dir: &Path) -> Result<Vec<BackgroundAsset>, SynthError> {
    png_files(dir)?
        .into_iter()
        .map(|p| {
            Ok(BackgroundAsset {
                id: stem(&p),
                pixels: open(&p)?.to_rgb8(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgba;

    #[test]
    fn tiny_figure_rejected() {
        let img = RgbaImage::from_pixel(1, 5, Rgba([0, 0, 0, 255]));
        assert!(matches!(
            FigureAsset::new("x", img, "t"),
            Err(SynthError::AssetTooSmall { .. })
        ));
    }

    #[test]
    fn loads_sorted_pngs_only() {
        let dir = tempfile::tempdir().unwrap();
        RgbaImage::from_pixel(3, 3, Rgba([1, 2, 3, 4]))
            .save(dir.path().join("b.png"))
            .unwrap();
        RgbaImage::from_pixel(2, 2, Rgba([1, 2, 3, 4]))
            .save(dir.path().join("a.png"))
            .unwrap();
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let figs = load_figures(dir.path()).unwrap();
        let ids: Vec<_> = figs.iter().map(|f| f.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        let bgs = load_backgrounds(dir.path()).unwrap();
        assert_eq!(bgs[1].pixels.dimensions(), (3, 3));
    }
}
