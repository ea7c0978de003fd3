//! Betti numbers from persistence diagrams by windowed counting.
//!
//! A class of dimension `d` counts towards β_d when its birth lies in
//! `[birth_lb, birth_ub]` and its lifespan strictly exceeds `min_pers`.
//! Essential classes have infinite lifespan. The three window parameters are
//! calibrated by exhaustive grid search against ground-truth labels.

use serde::{Deserialize, Serialize};

use crate::persistence::PersistenceDiagram;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    pub birth_lb: f64,
    pub birth_ub: f64,
    pub min_pers: f64,
}

impl WindowParams {
    pub fn new(birth_lb: f64, birth_ub: f64, min_pers: f64) -> Result<Self> {
        if birth_lb.is_nan() || birth_ub.is_nan() || min_pers.is_nan() {
            return Err(Error::InvalidArgument("window parameters must not be NaN".into()));
        }
        if birth_lb > birth_ub {
            return Err(Error::InvalidArgument(format!(
                "birth window [{birth_lb}, {birth_ub}] is empty"
            )));
        }
        if min_pers < 0.0 {
            return Err(Error::InvalidArgument("min_pers must be non-negative".into()));
        }
        Ok(Self {
            birth_lb,
            birth_ub,
            min_pers,
        })
    }

    /// A window counting every pair of positive persistence.
    pub fn everything() -> Self {
        Self {
            birth_lb: f64::NEG_INFINITY,
            birth_ub: f64::INFINITY,
            min_pers: 0.0,
        }
    }

    /// `false` when `birth_lb > birth_ub`. Grid search may select such a
    /// window; it counts nothing.
    pub fn is_nonempty(&self) -> bool {
        self.birth_lb <= self.birth_ub
    }
}

/// Number of dimension-`dim` classes inside the window.
pub fn count_window(diagram: &PersistenceDiagram, params: &WindowParams, dim: u8) -> u32 {
    diagram
        .pairs_of_dim(dim)
        .filter(|p| {
            let b = p.birth as f64;
            let long_enough = p.lifespan().is_none_or(|l| l as f64 > params.min_pers);
            params.birth_lb <= b && b <= params.birth_ub && long_enough
        })
        .count() as u32
}

/// Mean and population standard deviation of absolute errors.
pub fn mae_std(preds: &[u32], labels: &[u32]) -> Result<(f64, f64)> {
    if preds.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::InvalidArgument("no samples to score".into()));
    }
    let n = preds.len() as f64;
    let errors: Vec<f64> = preds
        .iter()
        .zip(labels)
        .map(|(&p, &l)| (p as f64 - l as f64).abs())
        .collect();
    let mae = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mae).powi(2)).sum::<f64>() / n;
    Ok((mae, var.sqrt()))
}

/// Candidate values for each window parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationGrid {
    birth_lb: Vec<f64>,
    birth_ub: Vec<f64>,
    min_pers: Vec<f64>,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} axis is empty")));
    }
    if axis.iter().any(|v| v.is_nan()) || axis.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidArgument(format!("{name} axis is not strictly increasing")));
    }
    Ok(())
}

impl CalibrationGrid {
    pub fn new(birth_lb: Vec<f64>, birth_ub: Vec<f64>, min_pers: Vec<f64>) -> Result<Self> {
        check_axis("birth_lb", &birth_lb)?;
        check_axis("birth_ub", &birth_ub)?;
        check_axis("min_pers", &min_pers)?;
        if min_pers[0] < 0.0 {
            return Err(Error::InvalidArgument("min_pers axis must be non-negative".into()));
        }
        Ok(Self {
            birth_lb,
            birth_ub,
            min_pers,
        })
    }

    pub fn birth_lb(&self) -> &[f64] {
        &self.birth_lb
    }

    pub fn birth_ub(&self) -> &[f64] {
        &self.birth_ub
    }

    pub fn min_pers(&self) -> &[f64] {
        &self.min_pers
    }

    /// Number of (birth_lb, birth_ub, min_pers) combinations.
    pub fn len(&self) -> usize {
        self.birth_lb.len() * self.birth_ub.len() * self.min_pers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How [`default_grid`] places its axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per axis.
    pub points: usize,
    /// Percentile (0..=100) of observed births where the birth axes start.
    pub birth_low_pct: f64,
    /// Percentile of observed births where the birth axes end.
    pub birth_high_pct: f64,
    /// Percentile of finite lifespans where the persistence axis ends.
    pub pers_high_pct: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 25,
            birth_low_pct: 0.0,
            birth_high_pct: 100.0,
            pers_high_pct: 100.0,
        }
    }
}

/// Linear-interpolation percentile of an ascending slice.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let pos = (pct / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `points` evenly spaced values on `[lo, hi]`, collapsed to `[lo]` when the
/// interval is degenerate.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || hi <= lo {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut axis: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    axis[points - 1] = hi;
    axis.dedup();
    axis
}

/// Signed square root: squared distances back to pixel distances.
fn signed_root(v: f64) -> f64 {
    v.signum() * v.abs().sqrt()
}

/// Inverse of [`signed_root`].
fn signed_square(v: f64) -> f64 {
    v * v.abs()
}

/// `points` values between `lo` and `hi` (squared distances), evenly spaced
/// in unsquared distance. When the range straddles 0 it is split there and
/// each side is spaced evenly, so 0 is always on the axis.
pub fn distance_linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (signed_root(lo), signed_root(hi));
    let roots = if a < 0.0 && b > 0.0 && points >= 3 {
        let neg = (((points - 1) as f64 * -a / (b - a)).round() as usize).clamp(1, points - 2);
        let mut v = linspace(a, 0.0, neg + 1);
        v.extend(linspace(0.0, b, points - neg).into_iter().skip(1));
        v
    } else {
        linspace(a, b, points)
    };
    let mut axis: Vec<f64> = roots.into_iter().map(signed_square).collect();
    // the end points are reproduced exactly
    axis[0] = lo;
    if axis.len() > 1 {
        *axis.last_mut().unwrap() = hi;
    }
    axis.dedup();
    axis
}

/// Grid spanning the observed births and lifespans of dimension `dim`.
///
/// Filtration values are squared distances; the axes are spaced evenly in
/// unsquared distance, so the grid is fine near the foreground boundary and
/// coarse far from it.
pub fn default_grid(diagrams: &[PersistenceDiagram], dim: u8, spec: &GridSpec) -> Result<CalibrationGrid> {
    if diagrams.is_empty() {
        return Err(Error::InvalidArgument("default grid needs at least one diagram".into()));
    }
    let mut births: Vec<f64> = Vec::new();
    let mut lifespans: Vec<f64> = Vec::new();
    for d in diagrams {
        for p in d.pairs_of_dim(dim) {
            births.push(p.birth as f64);
            if let Some(l) = p.lifespan() {
                lifespans.push(l as f64);
            }
        }
    }
    births.sort_by(f64::total_cmp);
    lifespans.sort_by(f64::total_cmp);
    let birth_axis = if births.is_empty() {
        vec![0.0]
    } else {
        distance_linspace(
            percentile(&births, spec.birth_low_pct),
            percentile(&births, spec.birth_high_pct),
            spec.points,
        )
    };
    let pers_axis = if lifespans.is_empty() {
        vec![0.0]
    } else {
        distance_linspace(0.0, percentile(&lifespans, spec.pers_high_pct), spec.points)
    };
    CalibrationGrid::new(birth_axis.clone(), birth_axis, pers_axis)
}

/// Outcome of a grid search for one (dataset, noise level, dimension).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub dataset: String,
    pub noise_level: String,
    pub dim: u8,
    pub best: WindowParams,
    pub mae: f64,
    pub std: f64,
    pub n_samples: usize,
    /// Number of grid points scored.
    pub evaluated: usize,
    pub calibration_split: String,
}

/// Per-diagram count tables: for each persistence index, how many births
/// fall below each lower bound and at or below each upper bound.
struct CountTable {
    below_lb: Vec<u32>,
    upto_ub: Vec<u32>,
}

fn count_table(diagram: &PersistenceDiagram, grid: &CalibrationGrid, dim: u8) -> CountTable {
    let (nl, nu) = (grid.birth_lb.len(), grid.birth_ub.len());
    let mut below_lb = Vec::with_capacity(grid.min_pers.len() * nl);
    let mut upto_ub = Vec::with_capacity(grid.min_pers.len() * nu);
    let mut births = Vec::new();
    for &mp in &grid.min_pers {
        births.clear();
        births.extend(
            diagram
                .pairs_of_dim(dim)
                .filter(|p| p.lifespan().is_none_or(|l| l as f64 > mp))
                .map(|p| p.birth as f64),
        );
        births.sort_by(f64::total_cmp);
        below_lb.extend(grid.birth_lb.iter().map(|&lb| births.partition_point(|&b| b < lb) as u32));
        upto_ub.extend(grid.birth_ub.iter().map(|&ub| births.partition_point(|&b| b <= ub) as u32));
    }
    CountTable { below_lb, upto_ub }
}

/// Exhaustive grid search minimising MAE against `labels`.
///
/// Ties go to the lexicographically smallest `(birth_lb, birth_ub, min_pers)`.
pub fn calibrate(
    diagrams: &[PersistenceDiagram],
    labels: &[u32],
    grid: &CalibrationGrid,
    dim: u8,
) -> Result<CalibrationResult> {
    if diagrams.is_empty() {
        return Err(Error::InvalidArgument("calibration needs at least one diagram".into()));
    }
    if diagrams.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} diagrams but {} labels",
            diagrams.len(),
            labels.len()
        )));
    }
    CalibrationGrid::new(grid.birth_lb.clone(), grid.birth_ub.clone(), grid.min_pers.clone())?;
    let (nl, nu, nm) = (grid.birth_lb.len(), grid.birth_ub.len(), grid.min_pers.len());

    // total absolute error per grid point, indexed [lb][ub][mp]; integer so ties are exact
    let mut totals = vec![0u64; nl * nu * nm];
    for (diagram, &label) in diagrams.iter().zip(labels) {
        let table = count_table(diagram, grid, dim);
        for i in 0..nl {
            for j in 0..nu {
                let nonempty = grid.birth_lb[i] <= grid.birth_ub[j];
                for k in 0..nm {
                    let count = if nonempty {
                        table.upto_ub[k * nu + j] - table.below_lb[k * nl + i]
                    } else {
                        0
                    };
                    totals[(i * nu + j) * nm + k] += u64::from(count.abs_diff(label));
                }
            }
        }
    }
    let (best_idx, _) = totals
        .iter()
        .enumerate()
        .min_by_key(|&(idx, &t)| (t, idx))
        .expect("grid is non-empty");
    let (i, j, k) = (best_idx / (nu * nm), (best_idx / nm) % nu, best_idx % nm);
    let best = WindowParams {
        birth_lb: grid.birth_lb[i],
        birth_ub: grid.birth_ub[j],
        min_pers: grid.min_pers[k],
    };
    let preds: Vec<u32> = diagrams.iter().map(|d| count_window(d, &best, dim)).collect();
    let (mae, std) = mae_std(&preds, labels)?;
    Ok(CalibrationResult {
        dataset: String::new(),
        noise_level: String::new(),
        dim,
        best,
        mae,
        std,
        n_samples: diagrams.len(),
        evaluated: totals.len(),
        calibration_split: String::new(),
    })
}
