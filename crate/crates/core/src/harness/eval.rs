//! Diagram caching, per-(dataset, level, dim) calibration and test scoring.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::manifest::{ManifestRecord, Split};
use super::report::EvalRow;
use crate::estimator::{calibrate, count_window, default_grid, mae_std, CalibrationResult, GridSpec};
use crate::noise::NoiseLevel;
use crate::persistence::{PersistenceDiagram, PersistenceEngine};
use crate::raster::{load_image, BinaryImage};
use crate::sedt::sedt;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalibrationMode {
    /// Calibrate on the validation split, score on test.
    Validation,
    /// Calibrate and score on the test split (an upper bound).
    Oracle,
}

impl CalibrationMode {
    pub fn split(self) -> Split {
        match self {
            CalibrationMode::Validation => Split::Val,
            CalibrationMode::Oracle => Split::Test,
        }
    }
}

/// Content key of an image: SHA-256 over its dimensions and pixels.
pub fn content_key(img: &BinaryImage) -> String {
    let mut h = Sha256::new();
    h.update(format!("{}x{}\n", img.width(), img.height()).as_bytes());
    let bytes: Vec<u8> = img.bits().iter().map(|&b| u8::from(b)).collect();
    h.update(&bytes);
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Computes diagrams through `engine`, optionally memoized on disk by image
/// content. A missing or deleted cache only costs time.
pub struct DiagramCache {
    engine: &'static dyn PersistenceEngine,
    dir: Option<PathBuf>,
}

impl DiagramCache {
    pub fn new(engine: &'static dyn PersistenceEngine, dir: Option<PathBuf>) -> Self {
        Self { engine, dir }
    }

    pub fn diagram_for_image(&self, id: &str, img: &BinaryImage) -> Result<PersistenceDiagram> {
        let Some(dir) = &self.dir else {
            return Ok(self.engine.diagram(id, &sedt(img)));
        };
        let path = dir.join(format!("{}.pd.csv", content_key(img)));
        if let Ok(text) = fs::read_to_string(&path) {
            return PersistenceDiagram::from_csv(id, &text);
        }
        let diagram = self.engine.diagram(id, &sedt(img));
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let tmp = dir.join(format!(".{id}.tmp"));
        fs::write(&tmp, diagram.to_csv()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(diagram)
    }

    pub fn diagram(&self, record: &ManifestRecord, base_dir: &Path) -> Result<PersistenceDiagram> {
        let path = base_dir.join(&record.image_path);
        if !path.exists() {
            return Err(Error::Missing(format!("image {} for record {}", path.display(), record.id)));
        }
        self.diagram_for_image(&record.id, &load_image(&path)?)
    }

    /// Diagrams for `records` in order, computed in parallel.
    pub fn diagrams(&self, records: &[&ManifestRecord], base_dir: &Path) -> Result<Vec<PersistenceDiagram>> {
        records.par_iter().map(|r| self.diagram(r, base_dir)).collect()
    }
}

pub struct EvalConfig {
    pub grid: GridSpec,
    pub mode: CalibrationMode,
    pub cache: DiagramCache,
}

type GroupKey = (String, NoiseLevel);

fn groups(records: &[ManifestRecord]) -> Result<BTreeMap<GroupKey, Vec<&ManifestRecord>>> {
    if records.is_empty() {
        return Err(Error::Missing("manifest has no records".into()));
    }
    let mut out: BTreeMap<GroupKey, Vec<&ManifestRecord>> = BTreeMap::new();
    for r in records {
        if r.split.is_none() {
            return Err(Error::Missing(format!("record {} has no split assigned", r.id)));
        }
        out.entry((r.dataset.clone(), r.noise_level)).or_default().push(r);
    }
    Ok(out)
}

fn of_split<'a>(records: &[&'a ManifestRecord], split: Split) -> Vec<&'a ManifestRecord> {
    records.iter().copied().filter(|r| r.split == Some(split)).collect()
}

fn labels(records: &[&ManifestRecord], dim: u8) -> Vec<u32> {
    records.iter().map(|r| r.labels().get(dim as usize)).collect()
}

/// Calibrates a window for every (dataset, level, dim) present in `records`.
pub fn calibrate_manifest(records: &[ManifestRecord], base_dir: &Path, cfg: &EvalConfig) -> Result<Vec<CalibrationResult>> {
    let split = cfg.mode.split();
    let mut results = Vec::new();
    for ((dataset, level), members) in groups(records)? {
        let calib = of_split(&members, split);
        if calib.is_empty() {
            return Err(Error::Missing(format!("no {split} records for {dataset} {level}")));
        }
        let diagrams = cfg.cache.diagrams(&calib, base_dir)?;
        for dim in [0u8, 1] {
            let grid = default_grid(&diagrams, dim, &cfg.grid)?;
            let mut result = calibrate(&diagrams, &labels(&calib, dim), &grid, dim)?;
            result.dataset = dataset.clone();
            result.noise_level = level.to_string();
            result.calibration_split = split.to_string();
            results.push(result);
        }
    }
    Ok(results)
}

/// Scores calibrated windows on the test split. Every (dataset, level, dim)
/// in the manifest must have a calibration.
pub fn evaluate(
    records: &[ManifestRecord],
    base_dir: &Path,
    calibrations: &[CalibrationResult],
    cache: &DiagramCache,
) -> Result<Vec<EvalRow>> {
    let mut rows = Vec::new();
    for ((dataset, level), members) in groups(records)? {
        let test = of_split(&members, Split::Test);
        if test.is_empty() {
            return Err(Error::Missing(format!("no test records for {dataset} {level}")));
        }
        let diagrams = cache.diagrams(&test, base_dir)?;
        for dim in [0u8, 1] {
            let cal = calibrations
                .iter()
                .find(|c| c.dataset == dataset && c.noise_level == level.to_string() && c.dim == dim)
                .ok_or_else(|| Error::Missing(format!("no calibration for {dataset} {level} dim {dim}")))?;
            let preds: Vec<u32> = diagrams.iter().map(|d| count_window(d, &cal.best, dim)).collect();
            let (mae, std) = mae_std(&preds, &labels(&test, dim))?;
            rows.push(EvalRow {
                dataset: dataset.clone(),
                method: "PH".into(),
                dim,
                noise_level: level,
                mae,
                std,
                n: test.len(),
            });
        }
    }
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(rows)
}

/// Calibration followed by test scoring.
pub fn run_ph_eval(records: &[ManifestRecord], base_dir: &Path, cfg: &EvalConfig) -> Result<(Vec<CalibrationResult>, Vec<EvalRow>)> {
    let calibrations = calibrate_manifest(records, base_dir, cfg)?;
    let rows = evaluate(records, base_dir, &calibrations, &cfg.cache)?;
    Ok((calibrations, rows))
}
