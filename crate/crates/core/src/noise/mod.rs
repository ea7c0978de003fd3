//! Five-level corruption protocol for clean binary images.
//!
//! Each profile maps to a [`NoiseModel`] looked up by name. Every stage draws
//! from its own sub-seed `seed::derive(seed, stage)`, so changing one stage
//! never perturbs the random stream of another.

pub mod ops;
pub mod perlin;
pub mod presets;

pub use ops::{
    blur_rethreshold, edge_peel, gaussian_blur, gaussian_flip, gaussian_kernel, perlin_mask_noise,
    perlin_threshold_field, Polarity,
};
pub use perlin::perlin;
pub use presets::{EdgePeel, GaussianNoise, NoiseLevel, NoisePreset, PresetTable, Profile};

use crate::raster::BinaryImage;
use crate::{seed, Error, Result};

const STAGE_PEEL: u64 = 1;
const STAGE_GAUSS_SUB: u64 = 2;
const STAGE_GAUSS_ADD: u64 = 3;
const STAGE_PERLIN: u64 = 4;
const STAGE_BLUR: u64 = 5;

/// A corruption strategy applied to one image given a preset row.
pub trait NoiseModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn apply(&self, img: &BinaryImage, preset: &NoisePreset, seed: u64) -> Result<BinaryImage>;
}

/// Gaussian blur followed by re-binarization at a Perlin-modulated threshold.
pub struct BlurRethreshold;

impl NoiseModel for BlurRethreshold {
    fn name(&self) -> &'static str {
        "blur-rethreshold"
    }

    fn description(&self) -> &'static str {
        "gaussian blur, re-binarized at a perlin-modulated threshold"
    }

    fn apply(&self, img: &BinaryImage, preset: &NoisePreset, seed: u64) -> Result<BinaryImage> {
        let missing = |what: &str| Error::InvalidArgument(format!("{} {} has no {what}", preset.profile, preset.level));
        let sigma = preset.gaussian.ok_or_else(|| missing("gaussian sigma"))?.sigma;
        let scale = preset.perlin_scale.ok_or_else(|| missing("perlin scale"))?;
        let theta = perlin_threshold_field(img.width(), img.height(), scale, seed::derive(seed, STAGE_BLUR));
        blur_rethreshold(img, sigma, &theta)
    }
}

/// Edge peeling, then subtractive and additive Gaussian flips, then a
/// subtractive Perlin mask. Absent parameters skip their stage.
pub struct PeelFlipMask;

impl NoiseModel for PeelFlipMask {
    fn name(&self) -> &'static str {
        "peel-flip-mask"
    }

    fn description(&self) -> &'static str {
        "edge peel, gaussian flips in both polarities, subtractive perlin mask"
    }

    fn apply(&self, img: &BinaryImage, preset: &NoisePreset, seed: u64) -> Result<BinaryImage> {
        let mut out = img.clone();
        if let Some(p) = preset.peel {
            out = edge_peel(&out, p.passes, p.prob, seed::derive(seed, STAGE_PEEL))?;
        }
        if let Some(g) = preset.gaussian {
            out = gaussian_flip(&out, g.mean, g.sigma, Polarity::Subtractive, seed::derive(seed, STAGE_GAUSS_SUB))?;
            out = gaussian_flip(&out, g.mean, g.sigma, Polarity::Additive, seed::derive(seed, STAGE_GAUSS_ADD))?;
        }
        match (preset.perlin_scale, preset.perlin_threshold) {
            (Some(scale), Some(threshold)) => {
                out = perlin_mask_noise(&out, scale, threshold, Polarity::Subtractive, seed::derive(seed, STAGE_PERLIN))?;
            }
            (None, None) => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "{} {} needs both perlin scale and threshold",
                    preset.profile, preset.level
                )))
            }
        }
        Ok(out)
    }
}

static MODELS: &[&dyn NoiseModel] = &[&BlurRethreshold, &PeelFlipMask];

pub fn models() -> &'static [&'static dyn NoiseModel] {
    MODELS
}

pub fn model_names() -> Vec<&'static str> {
    MODELS.iter().map(|m| m.name()).collect()
}

pub fn model(name: &str) -> Result<&'static dyn NoiseModel> {
    MODELS
        .iter()
        .copied()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown noise model {name:?}; known: {}", model_names().join(", "))))
}

/// Default model for a dataset profile.
pub fn default_model(profile: Profile) -> &'static dyn NoiseModel {
    match profile {
        Profile::Voronoi => &BlurRethreshold,
        Profile::DeeporeLike | Profile::CemLike => &PeelFlipMask,
    }
}

/// Corrupts `img` at the preset's level with the profile's default model.
pub fn apply_level(img: &BinaryImage, preset: &NoisePreset, seed: u64) -> Result<BinaryImage> {
    apply_with(default_model(preset.profile), img, preset, seed)
}

/// Like [`apply_level`] with an explicit model. N0 is always the identity.
pub fn apply_with(model: &dyn NoiseModel, img: &BinaryImage, preset: &NoisePreset, seed: u64) -> Result<BinaryImage> {
    if preset.is_identity() {
        return Ok(img.clone());
    }
    model.apply(img, preset, seed)
}
