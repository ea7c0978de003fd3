//! Exact signed squared Euclidean distance transform.
//!
//! Distances are measured center-to-center and kept squared as `i64`, so the
//! whole transform is integer arithmetic and bit-reproducible. Squaring is
//! monotone on non-negative distances, which keeps the sublevel filtration
//! order identical to the one induced by true signed distances.
//!
//! The unsigned transform is the separable two-pass scheme of Meijster,
//! Roerdink and Hesselink: a per-column scan for vertical distances followed
//! by a per-row lower envelope of parabolas.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::raster::BinaryImage;
use crate::{Error, Result};

/// Row-major grid of signed squared distances (pixels²).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<i64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<i64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "field of {} values cannot be {width}x{height}",
                values.len()
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        assert!(width > 0 && height > 0, "field dimensions must be positive");
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> i64 {
        self.values[y * self.width + x]
    }

    pub fn min_value(&self) -> i64 {
        *self.values.iter().min().expect("fields are non-empty")
    }

    /// Pixelwise negation.
    pub fn negate(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(i64) -> i64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Comma-separated grid, one image row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.width) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Binary dump: 16-byte header (`SFLD`, format version, width, height as
    /// little-endian u32) followed by row-major little-endian i64 values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.values.len());
        out.extend_from_slice(FIELD_MAGIC);
        out.extend_from_slice(&FIELD_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        if bytes.len() < 16 || &bytes[..4] != FIELD_MAGIC || word(4) != FIELD_VERSION {
            return Err(Error::Parse("not a scalar field dump".into()));
        }
        let (width, height) = (word(8) as usize, word(12) as usize);
        if bytes.len() != 16 + 8 * width * height {
            return Err(Error::Parse("scalar field dump has wrong length".into()));
        }
        let values = bytes[16..]
            .chunks_exact(8)
            .map(|c| i64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::new(width, height, values)
    }

    pub fn write_bytes(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

const FIELD_MAGIC: &[u8; 4] = b"SFLD";
const FIELD_VERSION: u32 = 1;

/// Which phase distances are measured to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Foreground,
    Background,
}

/// Value used when the target phase is empty.
pub fn empty_phase_sentinel(width: usize, height: usize) -> i64 {
    let s = (width + height) as i64;
    s * s
}

/// Squared distance from every pixel to the nearest pixel of `target`.
///
/// Pixels of the target phase get 0. If the target phase is empty every pixel
/// gets [`empty_phase_sentinel`].
pub fn edt_squared(img: &BinaryImage, target: Phase) -> ScalarField {
    let (w, h) = (img.width(), img.height());
    let want = target == Phase::Foreground;
    if !img.bits().contains(&want) {
        return ScalarField {
            width: w,
            height: h,
            values: vec![empty_phase_sentinel(w, h); w * h],
        };
    }

    // Pass 1: vertical distance to the nearest target pixel in the same column.
    // `far` exceeds any real distance, so columns without targets never win.
    let far = (w + h) as i64;
    let mut g = vec![far; w * h];
    for x in 0..w {
        let mut run = far;
        for y in 0..h {
            run = if img.get(x, y) == want { 0 } else { (run + 1).min(far) };
            g[y * w + x] = run;
        }
        let mut run = far;
        for y in (0..h).rev() {
            run = if img.get(x, y) == want { 0 } else { (run + 1).min(far) };
            let cell = &mut g[y * w + x];
            *cell = (*cell).min(run);
        }
    }

    // Pass 2: lower envelope of the parabolas (x - i)^2 + g(i)^2 per row.
    let mut values = vec![0i64; w * h];
    let mut sites = vec![0usize; w];
    let mut starts = vec![0i64; w];
    for y in 0..h {
        let row = &g[y * w..(y + 1) * w];
        let f = |x: i64, i: usize| (x - i as i64).pow(2) + row[i].pow(2);
        let sep = |i: usize, u: usize| {
            let (ii, uu) = (i as i64, u as i64);
            (uu * uu - ii * ii + row[u].pow(2) - row[i].pow(2)).div_euclid(2 * (uu - ii))
        };
        let mut q: isize = 0;
        sites[0] = 0;
        starts[0] = 0;
        for u in 1..w {
            while q >= 0 && f(starts[q as usize], sites[q as usize]) > f(starts[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                sites[0] = u;
            } else {
                let start = 1 + sep(sites[q as usize], u);
                if start < w as i64 {
                    q += 1;
                    sites[q as usize] = u;
                    starts[q as usize] = start;
                }
            }
        }
        for u in (0..w).rev() {
            values[y * w + u] = f(u as i64, sites[q as usize]);
            if u as i64 == starts[q as usize] {
                q -= 1;
            }
        }
    }
    ScalarField {
        width: w,
        height: h,
        values,
    }
}

/// Signed squared distance: negative inside the foreground (distance to the
/// background), positive outside (distance to the foreground).
pub fn sedt(img: &BinaryImage) -> ScalarField {
    let inside = edt_squared(img, Phase::Background);
    let outside = edt_squared(img, Phase::Foreground);
    let values = img
        .bits()
        .iter()
        .zip(inside.values.iter().zip(&outside.values))
        .map(|(&fg, (&i, &o))| if fg { -i } else { o })
        .collect();
    ScalarField {
        width: img.width(),
        height: img.height(),
        values,
    }
}

/// `sign(v) * sqrt(|v|)`, for display of squared distances in pixel units.
pub fn signed_sqrt(v: i64) -> f64 {
    let r = (v.unsigned_abs() as f64).sqrt();
    if v < 0 {
        -r
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// O(n²) all-pairs oracle.
    fn brute_force(img: &BinaryImage, target: bool) -> Vec<i64> {
        let (w, h) = (img.width(), img.height());
        let targets: Vec<(i64, i64)> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|&(x, y)| img.get(x, y) == target)
            .map(|(x, y)| (x as i64, y as i64))
            .collect();
        (0..h)
            .flat_map(|y| (0..w).map(move |x| (x as i64, y as i64)))
            .map(|(x, y)| {
                targets
                    .iter()
                    .map(|&(tx, ty)| (tx - x).pow(2) + (ty - y).pow(2))
                    .min()
                    .unwrap_or_else(|| empty_phase_sentinel(w, h))
            })
            .collect()
    }

    fn ring3() -> BinaryImage {
        BinaryImage::from_ascii(&["###", "#.#", "###"]).unwrap()
    }

    #[test]
    fn one_row_distances() {
        let img = BinaryImage::from_ascii(&[".#."]).unwrap();
        assert_eq!(edt_squared(&img, Phase::Foreground).values(), &[1, 0, 1]);
    }

    #[test]
    fn ring_distances_to_background() {
        let d = edt_squared(&ring3(), Phase::Background);
        assert_eq!(d.values(), &[2, 1, 2, 1, 0, 1, 2, 1, 2]);
        assert_eq!(d.values(), brute_force(&ring3(), false).as_slice());
    }

    #[test]
    fn ring_signed_field() {
        assert_eq!(sedt(&ring3()).values(), &[-2, -1, -2, -1, 1, -1, -2, -1, -2]);
    }

    #[test]
    fn empty_phase_uses_sentinel() {
        let img = BinaryImage::filled(4, 3, true);
        assert!(sedt(&img).values().iter().all(|&v| v == -49));
        assert!(sedt(&img.invert()).values().iter().all(|&v| v == 49));
    }

    #[test]
    fn matches_brute_force_on_random_images() {
        let mut rng = crate::seed::rng(5);
        for _ in 0..100 {
            let density = rng.random_range(0.02..0.98);
            let img = BinaryImage::from_fn(32, 32, |_, _| rng.random_bool(density));
            assert_eq!(edt_squared(&img, Phase::Foreground).values(), brute_force(&img, true).as_slice());
            assert_eq!(edt_squared(&img, Phase::Background).values(), brute_force(&img, false).as_slice());
        }
    }

    #[test]
    fn non_square_and_sparse_images() {
        let mut rng = crate::seed::rng(6);
        for _ in 0..50 {
            let (w, h) = (rng.random_range(1..40), rng.random_range(1..40));
            let img = BinaryImage::from_fn(w, h, |_, _| rng.random_bool(0.01));
            assert_eq!(edt_squared(&img, Phase::Foreground).values(), brute_force(&img, true).as_slice());
        }
    }

    #[test]
    fn sign_and_bounds_invariants() {
        let mut rng = crate::seed::rng(7);
        for _ in 0..50 {
            let img = BinaryImage::from_fn(20, 13, |_, _| rng.random_bool(0.4));
            let s = sedt(&img);
            let bound = (20i64 * 20 + 13 * 13).max(empty_phase_sentinel(20, 13));
            for (v, &fg) in s.values().iter().zip(img.bits()) {
                assert_ne!(*v, 0);
                assert_eq!(*v < 0, fg);
                assert!(v.abs() <= bound);
            }
        }
    }

    #[test]
    fn antisymmetric_under_inversion() {
        let mut rng = crate::seed::rng(8);
        for _ in 0..50 {
            let img = BinaryImage::from_fn(17, 23, |_, _| rng.random_bool(0.5));
            assert_eq!(sedt(&img.invert()), sedt(&img).negate());
        }
    }

    #[test]
    fn lipschitz_between_neighbours() {
        // |sqrt|a| - sqrt|b|| <= 1  <=>  both roots within one unit; checked exactly:
        // with a <= b: sqrt b <= sqrt a + 1  <=>  (b - a - 1)^2 <= 4a when b >= a + 1
        let ok = |a: i64, b: i64| {
            let (a, b) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
            b <= a + 1 || (b - a - 1).pow(2) <= 4 * a
        };
        let mut rng = crate::seed::rng(9);
        for _ in 0..50 {
            let img = BinaryImage::from_fn(24, 24, |_, _| rng.random_bool(0.3));
            let s = sedt(&img);
            for y in 0..24 {
                for x in 0..24 {
                    for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                        if nx < 24 && ny < 24 && img.get(x, y) == img.get(nx, ny) {
                            assert!(ok(s.get(x, y), s.get(nx, ny)), "({x},{y})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn byte_dump_round_trip() {
        let s = sedt(&ring3());
        let bytes = s.to_bytes();
        assert_eq!(bytes.len(), 16 + 9 * 8);
        assert_eq!(ScalarField::from_bytes(&bytes).unwrap(), s);
        assert!(ScalarField::from_bytes(&bytes[..20]).is_err());
        assert_eq!(s.to_csv().lines().next(), Some("-2,-1,-2"));
    }

    #[test]
    fn signed_sqrt_keeps_sign() {
        assert_eq!(signed_sqrt(-9), -3.0);
        assert_eq!(signed_sqrt(4), 2.0);
    }
}
