//! Built-in 19x14 digit glyphs and PGM glyph-directory loading.
//!
//! The number-plate style bitmaps below are the hermetic stand-in for an
//! external glyph set: ten digits drawn with 3-pixel strokes, shaped so
//! their sparse codes stay well separated. A user-supplied directory of
//! `0.pgm` .. `9.pgm` (binary P5, any size; resized to 19x14) replaces them
//! when given.

use std::fs;
use std::path::Path;

use crate::data::{resize_nearest, GrayImage, LabeledSet};
use crate::error::{HtmError, Result};

pub const GLYPH_ROWS: usize = 19;
pub const GLYPH_COLS: usize = 14;

/// Default cyclic presentation order: the five built-in digits whose sparse
/// codes are the most mutually distinct.
pub const DEFAULT_SEQUENCE: [u8; 5] = [1, 2, 4, 5, 7];

const INK: u8 = 255;
const STROKE: usize = 3;

fn diag(img: &mut GrayImage, r0: i32, c0: i32, r1: i32, c1: i32) {
    let steps = (r1 - r0).abs().max((c1 - c0).abs()).max(1);
    for i in 0..=steps {
        let r = (r0 + (r1 - r0) * i / steps).clamp(0, GLYPH_ROWS as i32 - STROKE as i32) as usize;
        let c = (c0 + (c1 - c0) * i / steps).clamp(0, GLYPH_COLS as i32 - STROKE as i32) as usize;
        for rr in r..r + STROKE {
            for cc in c..c + STROKE {
                img.pixels[rr * GLYPH_COLS + cc] = INK;
            }
        }
    }
}

fn thicken_h(img: &mut GrayImage, r: usize, c0: usize, c1: usize) {
    for rr in r..(r + STROKE).min(GLYPH_ROWS) {
        for c in c0..c1.min(GLYPH_COLS) {
            img.pixels[rr * GLYPH_COLS + c] = INK;
        }
    }
}

fn thicken_v(img: &mut GrayImage, r0: usize, r1: usize, c: usize) {
    for r in r0..r1.min(GLYPH_ROWS) {
        for cc in c..(c + STROKE).min(GLYPH_COLS) {
            img.pixels[r * GLYPH_COLS + cc] = INK;
        }
    }
}

/// One built-in digit glyph as a grayscale 19x14 bitmap.
pub fn builtin_glyph(digit: u8) -> GrayImage {
    let mut img = GrayImage::new(GLYPH_ROWS, GLYPH_COLS, vec![0; GLYPH_ROWS * GLYPH_COLS]);
    match digit {
        0 => {
            thicken_h(&mut img, 0, 2, 12);
            thicken_h(&mut img, 16, 2, 12);
            thicken_v(&mut img, 0, 19, 0);
            thicken_v(&mut img, 0, 19, 11);
        }
        1 => {
            thicken_v(&mut img, 0, 19, 6);
            diag(&mut img, 4, 1, 0, 6);
        }
        2 => {
            thicken_h(&mut img, 0, 0, 12);
            thicken_v(&mut img, 2, 8, 11);
            diag(&mut img, 14, 0, 7, 11);
            thicken_h(&mut img, 16, 0, 14);
        }
        3 => {
            thicken_h(&mut img, 0, 0, 14);
            diag(&mut img, 2, 10, 7, 4);
            diag(&mut img, 9, 6, 14, 11);
            thicken_h(&mut img, 16, 0, 11);
            thicken_v(&mut img, 12, 16, 10);
        }
        4 => {
            diag(&mut img, 0, 9, 10, 0);
            thicken_h(&mut img, 10, 0, 14);
            thicken_v(&mut img, 0, 19, 9);
        }
        5 => {
            thicken_h(&mut img, 0, 0, 13);
            thicken_v(&mut img, 2, 8, 0);
            thicken_h(&mut img, 8, 0, 11);
            thicken_v(&mut img, 10, 16, 11);
            thicken_h(&mut img, 16, 0, 11);
        }
        6 => {
            diag(&mut img, 0, 10, 6, 2);
            thicken_v(&mut img, 6, 19, 0);
            thicken_h(&mut img, 16, 0, 12);
            thicken_v(&mut img, 10, 16, 11);
            thicken_h(&mut img, 9, 0, 12);
        }
        7 => {
            thicken_h(&mut img, 0, 0, 14);
            diag(&mut img, 2, 10, 18, 2);
            thicken_h(&mut img, 8, 2, 10);
        }
        8 => {
            thicken_h(&mut img, 0, 2, 12);
            thicken_h(&mut img, 8, 2, 12);
            thicken_h(&mut img, 16, 2, 12);
            thicken_v(&mut img, 0, 8, 1);
            thicken_v(&mut img, 0, 8, 10);
            thicken_v(&mut img, 8, 17, 1);
            thicken_v(&mut img, 8, 17, 10);
        }
        9 => {
            thicken_h(&mut img, 0, 0, 12);
            thicken_v(&mut img, 2, 8, 0);
            thicken_v(&mut img, 0, 10, 10);
            thicken_h(&mut img, 8, 0, 12);
            diag(&mut img, 10, 9, 18, 1);
        }
        other => panic!("digit {other} out of range"),
    }
    img
}

/// All ten built-in glyphs as a labeled set.
pub fn builtin_glyph_set() -> LabeledSet {
    LabeledSet {
        images: (0..10).map(builtin_glyph).collect(),
        labels: (0..10).collect(),
        name: "builtin".into(),
    }
}

/// Minimal binary PGM (P5) decoder, maxval <= 255.
fn load_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| HtmError::Data(format!("{}: {e}", path.display())))?;
    let mut fields = Vec::new();
    let mut i = 0;
    while fields.len() < 4 && i < bytes.len() {
        // skip whitespace and comments
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        fields.push(&bytes[start..i]);
    }
    if fields.len() < 4 || fields[0] != b"P5" {
        return Err(HtmError::Data(format!("{}: not a binary PGM (P5)", path.display())));
    }
    let dim = |f: &[u8]| -> Result<usize> {
        std::str::from_utf8(f)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| HtmError::Data(format!("{}: bad PGM header", path.display())))
    };
    let cols = dim(fields[1])?;
    let rows = dim(fields[2])?;
    let maxval = dim(fields[3])?;
    if maxval == 0 || maxval > 255 {
        return Err(HtmError::Data(format!("{}: unsupported maxval {maxval}", path.display())));
    }
    i += 1; // single whitespace after maxval
    if bytes.len() < i + rows * cols {
        return Err(HtmError::Data(format!("{}: truncated PGM payload", path.display())));
    }
    let mut pixels = bytes[i..i + rows * cols].to_vec();
    if maxval != 255 {
        for p in &mut pixels {
            *p = ((*p as usize * 255) / maxval) as u8;
        }
    }
    Ok(GrayImage::new(rows, cols, pixels))
}

/// Load `0.pgm` .. `9.pgm` from a directory, resized to the 19x14 glyph
/// grid. Missing digits are errors.
pub fn load_glyph_dir(dir: &Path) -> Result<LabeledSet> {
    let mut images = Vec::with_capacity(10);
    for digit in 0..10u8 {
        let path = dir.join(format!("{digit}.pgm"));
        let img = load_pgm(&path)?;
        images.push(if img.rows == GLYPH_ROWS && img.cols == GLYPH_COLS {
            img
        } else {
            resize_nearest(&img, GLYPH_ROWS, GLYPH_COLS)
        });
    }
    Ok(LabeledSet {
        images,
        labels: (0..10).collect(),
        name: dir.display().to_string(),
    })
}
