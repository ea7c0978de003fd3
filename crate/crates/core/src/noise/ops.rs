//! Individual corruption operators on binary images.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::perlin::perlin;
use crate::raster::BinaryImage;
use crate::{seed, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    /// Turns background pixels into foreground.
    Additive,
    /// Turns foreground pixels into background.
    Subtractive,
}

/// Random boundary erosion: each pass clears every foreground pixel that is
/// 4-adjacent to background (the outside of the image counts as background)
/// independently with probability `prob`.
pub fn edge_peel(img: &BinaryImage, passes: u32, prob: f64, seed: u64) -> Result<BinaryImage> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InvalidArgument(format!("peel probability {prob} outside [0, 1]")));
    }
    let (w, h) = (img.width(), img.height());
    let mut rng = seed::rng(seed);
    let mut current = img.clone();
    let mut boundary = Vec::new();
    for _ in 0..passes {
        boundary.clear();
        for y in 0..h {
            for x in 0..w {
                if !current.get(x, y) {
                    continue;
                }
                let exposed = x == 0
                    || y == 0
                    || x + 1 == w
                    || y + 1 == h
                    || !current.get(x - 1, y)
                    || !current.get(x + 1, y)
                    || !current.get(x, y - 1)
                    || !current.get(x, y + 1);
                if exposed {
                    boundary.push((x, y));
                }
            }
        }
        for &(x, y) in &boundary {
            if rng.random_bool(prob) {
                current.set(x, y, false);
            }
        }
    }
    Ok(current)
}

/// Thresholded Gaussian flips: draws `g ~ N(mean, sigma)` per pixel in
/// row-major order and flips the pixel when `g > 0` and the polarity allows.
pub fn gaussian_flip(
    img: &BinaryImage,
    mean: f64,
    sigma: f64,
    polarity: Polarity,
    seed: u64,
) -> Result<BinaryImage> {
    let normal = Normal::new(mean, sigma)
        .ok()
        .filter(|_| sigma > 0.0)
        .ok_or_else(|| Error::InvalidArgument(format!("gaussian sigma must be positive, got {sigma}")))?;
    let mut rng = seed::rng(seed);
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let fire = normal.sample(&mut rng) > 0.0;
            if fire {
                match polarity {
                    Polarity::Additive => out.set(x, y, true),
                    Polarity::Subtractive => out.set(x, y, false),
                }
            }
        }
    }
    Ok(out)
}

/// Sets (additive) or clears (subtractive) every pixel where Perlin noise at
/// `scale` exceeds `threshold`.
pub fn perlin_mask_noise(
    img: &BinaryImage,
    scale: f64,
    threshold: f64,
    polarity: Polarity,
    seed: u64,
) -> Result<BinaryImage> {
    if scale <= 0.0 {
        return Err(Error::InvalidArgument(format!("perlin scale must be positive, got {scale}")));
    }
    let mask = perlin(img.width(), img.height(), scale, seed);
    let bits = img
        .bits()
        .iter()
        .zip(&mask)
        .map(|(&b, &m)| match (m > threshold, polarity) {
            (true, Polarity::Additive) => true,
            (true, Polarity::Subtractive) => false,
            (false, _) => b,
        })
        .collect();
    BinaryImage::new(img.width(), img.height(), bits)
}

/// Normalised 1D Gaussian kernel of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur of the 0/1 image with zero padding.
pub fn gaussian_blur(img: &BinaryImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as isize;
    let src: Vec<f64> = img.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = (x as isize - r).max(0) as usize;
            let hi = (x as isize + r).min(w as isize - 1) as usize;
            let mut acc = 0.0;
            for (sx, v) in row.iter().enumerate().take(hi + 1).skip(lo) {
                acc += v * kernel[(sx as isize - x as isize + r) as usize];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let lo = (y as isize - r).max(0) as usize;
        let hi = (y as isize + r).min(h as isize - 1) as usize;
        for sy in lo..=hi {
            let weight = kernel[(sy as isize - y as isize + r) as usize];
            let (dst, row) = (&mut out[y * w..(y + 1) * w], &tmp[sy * w..(sy + 1) * w]);
            for (d, v) in dst.iter_mut().zip(row) {
                *d += weight * v;
            }
        }
    }
    out
}

/// Per-pixel re-binarization threshold `0.5 + 0.3 (perlin - 0.5)`.
pub fn perlin_threshold_field(width: usize, height: usize, scale: f64, seed: u64) -> Vec<f64> {
    perlin(width, height, scale, seed)
        .into_iter()
        .map(|p| 0.5 + 0.3 * (p - 0.5))
        .collect()
}

/// Blurs the image with a Gaussian of width `sigma` and keeps the pixels whose
/// blurred value exceeds the local threshold.
pub fn blur_rethreshold(img: &BinaryImage, sigma: f64, threshold: &[f64]) -> Result<BinaryImage> {
    if sigma <= 0.0 || sigma.is_nan() {
        return Err(Error::InvalidArgument(format!("blur sigma must be positive, got {sigma}")));
    }
    if threshold.len() != img.width() * img.height() {
        return Err(Error::InvalidArgument("threshold field does not match image size".into()));
    }
    let blurred = gaussian_blur(img, sigma);
    let bits = blurred.iter().zip(threshold).map(|(&v, &t)| v > t).collect();
    BinaryImage::new(img.width(), img.height(), bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::betti_labels;

    fn random_image(seed: u64) -> BinaryImage {
        let mut rng = seed::rng(seed);
        BinaryImage::from_fn(40, 30, |_, _| rng.random_bool(0.5))
    }

    #[test]
    fn zero_probability_peel_is_identity() {
        let img = random_image(1);
        assert_eq!(edge_peel(&img, 3, 0.0, 9).unwrap(), img);
        assert!(edge_peel(&img, 1, 1.5, 9).is_err());
    }

    #[test]
    fn certain_peel_strips_block_to_centre() {
        let img = BinaryImage::filled(3, 3, true);
        let out = edge_peel(&img, 1, 1.0, 0).unwrap();
        assert_eq!(out.count_foreground(), 1);
        assert!(out.get(1, 1));
    }

    #[test]
    fn peel_rate_matches_probability() {
        // 64x64 block centred in 80x80: 252 boundary pixels per trial
        let img = BinaryImage::from_fn(80, 80, |x, y| (8..72).contains(&x) && (8..72).contains(&y));
        let boundary = 4 * 64 - 4;
        let p = 0.3;
        let trials = 1000;
        let cleared: usize = (0..trials)
            .map(|s| img.count_foreground() - edge_peel(&img, 1, p, s).unwrap().count_foreground())
            .sum();
        let n = (boundary * trials as usize) as f64;
        let expected = n * p;
        let sd = (n * p * (1.0 - p)).sqrt();
        assert!((cleared as f64 - expected).abs() <= 3.0 * sd, "{cleared} vs {expected}±{sd}");
    }

    #[test]
    fn far_negative_mean_flips_nothing() {
        let img = random_image(2);
        for polarity in [Polarity::Additive, Polarity::Subtractive] {
            assert_eq!(gaussian_flip(&img, -10.0, 1.0, polarity, 4).unwrap(), img);
        }
        assert!(gaussian_flip(&img, 0.0, 0.0, Polarity::Additive, 4).is_err());
    }

    #[test]
    fn flip_rate_matches_normal_tail() {
        // P(N(-3, 2) > 0) = Phi(-1.5)
        let phi = 0.066_807_201_268_858_07;
        let img = BinaryImage::filled(256, 256, false);
        let out = gaussian_flip(&img, -3.0, 2.0, Polarity::Additive, 17).unwrap();
        let n = (256 * 256) as f64;
        let sd = (n * phi * (1.0 - phi)).sqrt();
        assert!((out.count_foreground() as f64 - n * phi).abs() <= 3.0 * sd);
    }

    #[test]
    fn subtractive_on_background_is_identity() {
        let img = BinaryImage::filled(16, 16, false);
        assert_eq!(gaussian_flip(&img, 5.0, 1.0, Polarity::Subtractive, 1).unwrap(), img);
        assert_eq!(perlin_mask_noise(&img, 0.2, 0.1, Polarity::Subtractive, 1).unwrap(), img);
    }

    #[test]
    fn perlin_mask_extremes() {
        let img = random_image(3);
        assert_eq!(perlin_mask_noise(&img, 0.1, 1.0, Polarity::Additive, 5).unwrap(), img);
        assert_eq!(perlin_mask_noise(&img, 0.1, 1.0, Polarity::Subtractive, 5).unwrap(), img);
        let all = perlin_mask_noise(&img, 0.1, -0.1, Polarity::Additive, 5).unwrap();
        assert_eq!(all.count_foreground(), 40 * 30);
        assert!(perlin_mask_noise(&img, 0.0, 0.5, Polarity::Additive, 5).is_err());
    }

    #[test]
    fn severe_mask_covers_most_pixels() {
        let img = BinaryImage::filled(256, 256, false);
        let out = perlin_mask_noise(&img, 0.5, 0.175, Polarity::Additive, 8).unwrap();
        let frac = out.count_foreground() as f64 / (256.0 * 256.0);
        assert!(frac > 0.5, "{frac}");
    }

    #[test]
    fn kernel_is_normalised() {
        for sigma in [0.3, 1.0, 5.0, 20.0] {
            let k = gaussian_kernel(sigma);
            assert_eq!(k.len(), 2 * (3.0 * sigma).ceil() as usize + 1);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_sigma_blur_is_identity() {
        let img = random_image(4);
        let theta = perlin_threshold_field(40, 30, 0.1, 1);
        assert_eq!(blur_rethreshold(&img, 0.05, &theta).unwrap(), img);
        assert!(blur_rethreshold(&img, 0.0, &theta).is_err());
    }

    #[test]
    fn thick_wall_survives_blur() {
        // a 14px vertical wall splitting a 96x96 frame survives sigma 5 as one component
        let img = BinaryImage::from_fn(96, 96, |x, _| (41..55).contains(&x));
        let theta = perlin_threshold_field(96, 96, 0.125, 2);
        let out = blur_rethreshold(&img, 5.0, &theta).unwrap();
        assert_eq!(betti_labels(&out).beta0, 1);
        assert!(out.count_foreground() < img.count_foreground());
        assert!(out.hamming(&img) > 0);
    }

    #[test]
    fn thin_wall_dissolves_under_blur() {
        // peak of a 2px wall under sigma 5 is erf(0.1414) ~ 0.159 < min threshold 0.35
        let img = BinaryImage::from_fn(64, 64, |x, _| x == 31 || x == 32);
        let theta = perlin_threshold_field(64, 64, 0.125, 2);
        let out = blur_rethreshold(&img, 5.0, &theta).unwrap();
        assert_eq!(out.count_foreground(), 0);
    }
}
