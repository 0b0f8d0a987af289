//! Dataset ingestion and preprocessing: IDX image containers, nearest
//! neighbor resize, binarization and noise injection.
//!
//! All transformations are pure and, where randomized, fully determined by
//! the seed. Noise is injected on the grayscale image before resize and
//! binarize.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitVector;
use crate::error::{HtmError, Result};

pub const DEFAULT_BINARIZE_THRESHOLD: u8 = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Self {
        debug_assert_eq!(rows * cols, pixels.len());
        GrayImage { rows, cols, pixels }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledSet {
    pub images: Vec<GrayImage>,
    pub labels: Vec<u8>,
    pub name: String,
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32_be(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

/// Load an IDX image/label pair (the MNIST container format).
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledSet> {
    let mut img_bytes = Vec::new();
    File::open(images_path)
        .map_err(|e| HtmError::Data(format!("{}: {e}", images_path.display())))?
        .read_to_end(&mut img_bytes)?;
    let mut lab_bytes = Vec::new();
    File::open(labels_path)
        .map_err(|e| HtmError::Data(format!("{}: {e}", labels_path.display())))?
        .read_to_end(&mut lab_bytes)?;

    if img_bytes.len() < 16 {
        return Err(HtmError::Data("image file shorter than IDX header".into()));
    }
    let magic = read_u32_be(&img_bytes, 0);
    if magic != IDX_IMAGES_MAGIC {
        return Err(HtmError::Data(format!(
            "bad image magic: expected {IDX_IMAGES_MAGIC:#010x}, found {magic:#010x}"
        )));
    }
    let count = read_u32_be(&img_bytes, 4) as usize;
    let rows = read_u32_be(&img_bytes, 8) as usize;
    let cols = read_u32_be(&img_bytes, 12) as usize;
    let need = 16 + count * rows * cols;
    if img_bytes.len() < need {
        return Err(HtmError::Data(format!(
            "image payload truncated: need {need} bytes, found {}",
            img_bytes.len()
        )));
    }

    if lab_bytes.len() < 8 {
        return Err(HtmError::Data("label file shorter than IDX header".into()));
    }
    let lmagic = read_u32_be(&lab_bytes, 0);
    if lmagic != IDX_LABELS_MAGIC {
        return Err(HtmError::Data(format!(
            "bad label magic: expected {IDX_LABELS_MAGIC:#010x}, found {lmagic:#010x}"
        )));
    }
    let lcount = read_u32_be(&lab_bytes, 4) as usize;
    if lcount != count {
        return Err(HtmError::Data(format!(
            "count mismatch: {count} images vs {lcount} labels"
        )));
    }
    if lab_bytes.len() < 8 + lcount {
        return Err(HtmError::Data("label payload truncated".into()));
    }

    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let at = 16 + i * rows * cols;
        images.push(GrayImage::new(
            rows,
            cols,
            img_bytes[at..at + rows * cols].to_vec(),
        ));
    }
    Ok(LabeledSet {
        images,
        labels: lab_bytes[8..8 + lcount].to_vec(),
        name: images_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    })
}

/// Nearest-neighbor resize: source index = floor(target * src / dst).
pub fn resize_nearest(img: &GrayImage, out_rows: usize, out_cols: usize) -> GrayImage {
    let mut pixels = Vec::with_capacity(out_rows * out_cols);
    for r in 0..out_rows {
        let sr = r * img.rows / out_rows;
        for c in 0..out_cols {
            let sc = c * img.cols / out_cols;
            pixels.push(img.pixels[sr * img.cols + sc]);
        }
    }
    GrayImage::new(out_rows, out_cols, pixels)
}

/// Row-major binarization: bit = 1 iff pixel >= threshold.
pub fn binarize(img: &GrayImage, threshold: u8) -> BitVector {
    let mut v = BitVector::zeros(img.pixels.len());
    for (i, &p) in img.pixels.iter().enumerate() {
        if p >= threshold {
            v.set(i, true);
        }
    }
    v
}

/// Salt-and-pepper noise: each pixel is independently selected with
/// probability `density` and forced to 0 or 255 with equal probability.
pub fn salt_pepper(img: &GrayImage, density: f64, seed: u64) -> GrayImage {
    debug_assert!((0.0..=1.0).contains(&density));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    for p in &mut out.pixels {
        if rng.gen::<f64>() < density {
            *p = if rng.gen::<f64>() < 0.5 { 0 } else { 255 };
        }
    }
    out
}

/// Standard normal draw via Box-Muller (keeps the engine free of a
/// distributions dependency and pins the byte-exact stream).
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Additive Gaussian noise with `variance` as a fraction of full scale
/// squared: pixel' = clamp(pixel + round(z * 255 * sqrt(variance))).
pub fn gaussian_noise(img: &GrayImage, variance: f64, seed: u64) -> GrayImage {
    debug_assert!(variance >= 0.0);
    let sigma = 255.0 * variance.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    for p in &mut out.pixels {
        let z = standard_normal(&mut rng);
        let v = (*p as f64 + (z * sigma).round()).clamp(0.0, 255.0);
        *p = v as u8;
    }
    out
}

/// Binarized glyph stream for cyclic presentation: one vector per entry of
/// `order`, looked up by label.
pub fn make_sequence_set(glyphs: &LabeledSet, order: &[u8]) -> Result<Vec<BitVector>> {
    let mut out = Vec::with_capacity(order.len());
    for &label in order {
        let idx = glyphs
            .labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| HtmError::Data(format!("label {label} not present in glyph set")))?;
        out.push(binarize(&glyphs.images[idx], DEFAULT_BINARIZE_THRESHOLD));
    }
    Ok(out)
}
