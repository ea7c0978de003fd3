//! Grayscale ingestion: Otsu binarization, disk open/close cleanup, and
//! inversion so that pores become foreground.
//!
//! Morphology treats the image as lying on an unbounded background plane.
//! Operations run on a canvas padded by the disk radius and are cropped back,
//! so border foreground can erode away under opening while closing stays
//! extensive.

use std::path::Path;

use crate::raster::io::{load_gray_raw, save_gray_raw};
use crate::raster::BinaryImage;
use crate::{Error, Result};

pub const DEFAULT_DISK_RADIUS: u32 = 3;

/// Row-major 8-bit intensities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("gray image dimensions must be at least 1x1".into()));
        }
        if values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "gray image has {} values, expected {}",
                values.len(),
                width * height
            )));
        }
        Ok(Self { width, height, values })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values).expect("from_fn dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn histogram(&self) -> [u64; 256] {
        let mut h = [0u64; 256];
        for &v in &self.values {
            h[v as usize] += 1;
        }
        h
    }
}

/// Loads any 8-bit grayscale PNG or plain PGM; colour PNGs are reduced to luma.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let (w, h, values) = load_gray_raw(path.as_ref())?;
    GrayImage::new(w, h, values)
}

pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    save_gray_raw(path.as_ref(), img.width, img.height, &img.values)
}

/// 256-bit product of two u128 values as (high, low).
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & MASK);
    let (b1, b0) = (b >> 64, b & MASK);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & MASK) + (p10 & MASK);
    let lo = (p00 & MASK) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// Threshold maximizing between-class variance, with pixels `> t` in the
/// upper class. Ties go to the smallest threshold.
///
/// Up to a constant factor the variance at `t` is
/// `(S*n0 - N*s0)^2 / (n0*n1)`, which is compared exactly in integers.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8> {
    otsu_from_histogram(&img.histogram())
}

pub fn otsu_from_histogram(hist: &[u64; 256]) -> Result<u8> {
    let n: u128 = hist.iter().map(|&c| c as u128).sum();
    let total: u128 = hist.iter().enumerate().map(|(v, &c)| v as u128 * c as u128).sum();
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::ConstantImage);
    }
    if n >= 1 << 56 {
        return Err(Error::InvalidArgument("image too large for exact Otsu".into()));
    }
    let (mut n0, mut s0) = (0u128, 0u128);
    let mut best: Option<(u8, u128, u128)> = None;
    for (t, &count) in hist.iter().enumerate().take(255) {
        n0 += count as u128;
        s0 += t as u128 * count as u128;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (total * n0).abs_diff(n * s0);
        let num = diff * diff;
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((_, bnum, bden)) => mul_wide(num, bden) > mul_wide(bnum, den),
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    Ok(best.expect("two distinct values give a valid split").0)
}

fn disk_offsets(radius: u32) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// A padded working canvas; cells outside it are background.
struct Canvas {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Canvas {
    fn padded(img: &BinaryImage, pad: usize) -> Self {
        let (width, height) = (img.width() + 2 * pad, img.height() + 2 * pad);
        let mut bits = vec![false; width * height];
        for y in 0..img.height() {
            for x in 0..img.width() {
                bits[(y + pad) * width + x + pad] = img.get(x, y);
            }
        }
        Self { width, height, bits }
    }

    fn at(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    fn apply(&self, offsets: &[(isize, isize)], dilate: bool) -> Self {
        let mut bits = vec![false; self.bits.len()];
        for y in 0..self.height as isize {
            for x in 0..self.width as isize {
                bits[y as usize * self.width + x as usize] = if dilate {
                    offsets.iter().any(|&(dx, dy)| self.at(x + dx, y + dy))
                } else {
                    offsets.iter().all(|&(dx, dy)| self.at(x + dx, y + dy))
                };
            }
        }
        Self { bits, ..*self }
    }

    fn crop(&self, width: usize, height: usize, pad: usize) -> BinaryImage {
        BinaryImage::from_fn(width, height, |x, y| self.bits[(y + pad) * self.width + x + pad])
    }
}

fn morph(img: &BinaryImage, radius: u32, dilate_first: bool) -> BinaryImage {
    let offsets = disk_offsets(radius);
    let pad = radius as usize;
    let canvas = Canvas::padded(img, pad);
    let out = canvas.apply(&offsets, dilate_first).apply(&offsets, !dilate_first);
    out.crop(img.width(), img.height(), pad)
}

pub fn erode(img: &BinaryImage, radius: u32) -> BinaryImage {
    let offsets = disk_offsets(radius);
    Canvas::padded(img, 0).apply(&offsets, false).crop(img.width(), img.height(), 0)
}

pub fn dilate(img: &BinaryImage, radius: u32) -> BinaryImage {
    let offsets = disk_offsets(radius);
    Canvas::padded(img, 0).apply(&offsets, true).crop(img.width(), img.height(), 0)
}

/// Erosion then dilation with the Euclidean disk `dx^2 + dy^2 <= r^2`.
pub fn morph_open(img: &BinaryImage, radius: u32) -> BinaryImage {
    morph(img, radius, false)
}

/// Dilation then erosion with the Euclidean disk `dx^2 + dy^2 <= r^2`.
pub fn morph_close(img: &BinaryImage, radius: u32) -> BinaryImage {
    morph(img, radius, true)
}

/// Otsu threshold, open, close, invert, with the default disk radius.
pub fn binarize_clean(img: &GrayImage) -> Result<BinaryImage> {
    binarize_clean_with(img, DEFAULT_DISK_RADIUS)
}

pub fn binarize_clean_with(img: &GrayImage, radius: u32) -> Result<BinaryImage> {
    let t = otsu_threshold(img)?;
    let bits = img.values.iter().map(|&v| v > t).collect();
    let mask = BinaryImage::new(img.width, img.height, bits)?;
    Ok(morph_close(&morph_open(&mask, radius), radius).invert())
}
