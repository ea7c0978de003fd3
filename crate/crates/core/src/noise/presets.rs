//! Noise presets per dataset profile and distortion level.
//!
//! The shipped table lives in `presets/noise_presets.csv`. Absent parameters
//! are written as `-`; numbers use a fixed number of decimals per column so
//! that parsing and re-serializing a canonical file reproduces it exactly.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseLevel {
    N0,
    N1,
    N2,
    N3,
    N4,
}

impl NoiseLevel {
    pub const ALL: [NoiseLevel; 5] = [Self::N0, Self::N1, Self::N2, Self::N3, Self::N4];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{}", self.index())
    }
}

impl FromStr for NoiseLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown noise level {s:?} (expected N0..N4)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Profile {
    Voronoi,
    DeeporeLike,
    CemLike,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Self::Voronoi, Self::DeeporeLike, Self::CemLike];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Voronoi => "voronoi",
            Profile::DeeporeLike => "deepore-like",
            Profile::CemLike => "cem-like",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown noise profile {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgePeel {
    pub passes: u32,
    pub prob: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNoise {
    pub mean: f64,
    pub sigma: f64,
}

/// One row of the preset table. `N0` rows carry no parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisePreset {
    pub profile: Profile,
    pub level: NoiseLevel,
    pub peel: Option<EdgePeel>,
    pub gaussian: Option<GaussianNoise>,
    pub perlin_scale: Option<f64>,
    pub perlin_threshold: Option<f64>,
}

impl NoisePreset {
    pub fn identity(profile: Profile) -> Self {
        Self {
            profile,
            level: NoiseLevel::N0,
            peel: None,
            gaussian: None,
            perlin_scale: None,
            perlin_threshold: None,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.level == NoiseLevel::N0
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Parse(format!("{} {}: {msg}", self.profile, self.level)));
        if self.level == NoiseLevel::N0
            && (self.peel.is_some()
                || self.gaussian.is_some()
                || self.perlin_scale.is_some()
                || self.perlin_threshold.is_some())
        {
            return bad("N0 must be the identity");
        }
        if let Some(p) = self.peel {
            if !(0.0..=1.0).contains(&p.prob) {
                return bad("peel probability outside [0, 1]");
            }
        }
        if let Some(g) = self.gaussian {
            if g.sigma <= 0.0 {
                return bad("gaussian sigma must be positive");
            }
        }
        if self.perlin_scale.is_some_and(|s| s <= 0.0) {
            return bad("perlin scale must be positive");
        }
        Ok(())
    }
}

const FORMAT_LINE: &str = "#format=1";
const HEADER: &str = "profile,level,peel_passes,peel_prob,gauss_mean,gauss_sigma,perlin_scale,perlin_threshold";
const BUILTIN: &str = include_str!("../../presets/noise_presets.csv");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetTable {
    presets: Vec<NoisePreset>,
}

fn opt<T: FromStr>(field: &str) -> std::result::Result<Option<T>, ()> {
    if field == "-" {
        Ok(None)
    } else {
        field.parse().map(Some).map_err(|_| ())
    }
}

fn fmt_opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.decimals$}"))
}

impl PresetTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("shipped preset table is valid")
    }

    pub fn builtin_text() -> &'static str {
        BUILTIN
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(FORMAT_LINE) {
            return Err(Error::Parse(format!("preset table must start with {FORMAT_LINE}")));
        }
        if lines.next().map(str::trim) != Some(HEADER) {
            return Err(Error::Parse("unexpected preset table header".into()));
        }
        let mut presets: Vec<NoisePreset> = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let bad = || Error::Parse(format!("bad preset row {line:?}"));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 8 {
                return Err(bad());
            }
            let peel = match (opt::<u32>(f[2]).map_err(|_| bad())?, opt::<f64>(f[3]).map_err(|_| bad())?) {
                (Some(passes), Some(prob)) => Some(EdgePeel { passes, prob }),
                (None, None) => None,
                _ => return Err(bad()),
            };
            let gaussian = match (opt::<f64>(f[4]).map_err(|_| bad())?, opt::<f64>(f[5]).map_err(|_| bad())?) {
                (Some(mean), Some(sigma)) => Some(GaussianNoise { mean, sigma }),
                (None, None) => None,
                _ => return Err(bad()),
            };
            let preset = NoisePreset {
                profile: f[0].parse()?,
                level: f[1].parse()?,
                peel,
                gaussian,
                perlin_scale: opt(f[6]).map_err(|_| bad())?,
                perlin_threshold: opt(f[7]).map_err(|_| bad())?,
            };
            preset.validate()?;
            if presets.iter().any(|p| p.profile == preset.profile && p.level == preset.level) {
                return Err(Error::Parse(format!("duplicate preset {} {}", preset.profile, preset.level)));
            }
            presets.push(preset);
        }
        Ok(Self { presets })
    }

    /// Canonical text form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{FORMAT_LINE}\n{HEADER}\n");
        for p in &self.presets {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.profile,
                p.level,
                p.peel.map_or_else(|| "-".to_string(), |e| e.passes.to_string()),
                fmt_opt(p.peel.map(|e| e.prob), 2),
                fmt_opt(p.gaussian.map(|g| g.mean), 1),
                fmt_opt(p.gaussian.map(|g| g.sigma), 1),
                fmt_opt(p.perlin_scale, 3),
                fmt_opt(p.perlin_threshold, 3),
            );
        }
        out
    }

    pub fn presets(&self) -> &[NoisePreset] {
        &self.presets
    }

    /// Preset for `(profile, level)`; N0 falls back to the identity.
    pub fn get(&self, profile: Profile, level: NoiseLevel) -> Result<NoisePreset> {
        if let Some(p) = self.presets.iter().find(|p| p.profile == profile && p.level == level) {
            return Ok(p.clone());
        }
        if level == NoiseLevel::N0 {
            return Ok(NoisePreset::identity(profile));
        }
        Err(Error::Missing(format!("no preset for {profile} {level}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_round_trips_byte_exactly() {
        let table = PresetTable::builtin();
        assert_eq!(table.to_text(), PresetTable::builtin_text());
        assert_eq!(table.presets().len(), 15);
    }

    #[test]
    fn names_parse() {
        assert_eq!("n3".parse::<NoiseLevel>().unwrap(), NoiseLevel::N3);
        assert!("N5".parse::<NoiseLevel>().is_err());
        assert_eq!("cem-like".parse::<Profile>().unwrap(), Profile::CemLike);
        assert!("mnist".parse::<Profile>().is_err());
    }

    #[test]
    fn rejects_bad_tables() {
        let head = format!("{FORMAT_LINE}\n{HEADER}\n");
        assert!(PresetTable::parse("profile\n").is_err());
        assert!(PresetTable::parse(&format!("{head}voronoi,N1,-,-,0.0,0.0,0.1,-\n")).is_err());
        assert!(PresetTable::parse(&format!("{head}voronoi,N0,1,0.5,-,-,-,-\n")).is_err());
        assert!(PresetTable::parse(&format!("{head}voronoi,N1,1,-,0.0,1.0,0.1,-\n")).is_err());
        let dup = format!("{head}voronoi,N0,-,-,-,-,-,-\nvoronoi,N0,-,-,-,-,-,-\n");
        assert!(PresetTable::parse(&dup).is_err());
    }

    #[test]
    fn n0_falls_back_to_identity() {
        let table = PresetTable::parse(&format!("{FORMAT_LINE}\n{HEADER}\n")).unwrap();
        assert!(table.get(Profile::Voronoi, NoiseLevel::N0).unwrap().is_identity());
        assert!(table.get(Profile::Voronoi, NoiseLevel::N1).is_err());
    }
}
