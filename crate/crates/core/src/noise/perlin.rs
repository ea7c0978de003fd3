//! Seeded 2D Perlin gradient noise.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::seed;

/// Classic lattice-gradient noise with a seeded permutation and offset.
pub struct Perlin {
    perm: [u8; 512],
    offset: (f64, f64),
}

const GRADIENTS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
    (-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
    (std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
    (-std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
];

#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

impl Perlin {
    pub fn new(seed: u64) -> Self {
        let mut rng = seed::rng(seed::derive(seed, 0x7E41));
        let mut table: Vec<u8> = (0..=255).collect();
        table.shuffle(&mut rng);
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = table[i & 255];
        }
        let offset = (rng.random::<f64>() * 256.0, rng.random::<f64>() * 256.0);
        Self { perm, offset }
    }

    #[inline]
    fn gradient(&self, xi: usize, yi: usize) -> (f64, f64) {
        let h = self.perm[self.perm[xi & 255] as usize + (yi & 255)];
        GRADIENTS[(h & 7) as usize]
    }

    /// Raw noise at `(x, y)` in lattice units; roughly in [-1, 1].
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x + self.offset.0, y + self.offset.1);
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (xi, yi) = (x0 as i64 as usize, y0 as i64 as usize);
        let dot = |gx: usize, gy: usize, dx: f64, dy: f64| {
            let (a, b) = self.gradient(gx, gy);
            a * dx + b * dy
        };
        let n00 = dot(xi, yi, fx, fy);
        let n10 = dot(xi.wrapping_add(1), yi, fx - 1.0, fy);
        let n01 = dot(xi, yi.wrapping_add(1), fx, fy - 1.0);
        let n11 = dot(xi.wrapping_add(1), yi.wrapping_add(1), fx - 1.0, fy - 1.0);
        let (u, v) = (fade(fx), fade(fy));
        lerp(lerp(n00, n10, u), lerp(n01, n11, u), v)
    }
}

/// A `width x height` grid of Perlin noise sampled at `scale` cycles per
/// pixel and linearly rescaled to [0, 1]. A flat grid maps to 0.5.
pub fn perlin(width: usize, height: usize, scale: f64, seed: u64) -> Vec<f64> {
    assert!(scale > 0.0, "perlin scale must be positive");
    let noise = Perlin::new(seed);
    let mut grid = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            grid.push(noise.sample(x as f64 * scale, y as f64 * scale));
        }
    }
    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi > lo {
        let span = hi - lo;
        grid.iter_mut().for_each(|v| *v = (*v - lo) / span);
    } else {
        grid.iter_mut().for_each(|v| *v = 0.5);
    }
    grid
}
