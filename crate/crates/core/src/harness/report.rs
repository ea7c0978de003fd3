//! Report, calibration and plot-data CSV files.
//!
//! Metrics are printed with six decimals. Window parameters use the shortest
//! representation that parses back to the same value, so a calibration file
//! can be re-applied exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::estimator::{CalibrationResult, WindowParams};
use crate::noise::NoiseLevel;
use crate::{Error, Result};

pub const REPORT_HEADER: &str = "dataset,method,dim,noise_level,mae,std,n";
pub const CALIBRATION_HEADER: &str =
    "dataset,noise_level,dim,birth_lb,birth_ub,min_pers,mae,std,n_samples,calibration_split";
pub const PLOT_HEADER: &str = "series,method,dim,dataset,x,mae,std";

pub fn fmt_metric(v: f64) -> String {
    format!("{v:.6}")
}

/// One evaluation result row. `method` is `PH` for this crate and `NN` for
/// external baselines sharing the schema.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub dataset: String,
    pub method: String,
    pub dim: u8,
    pub noise_level: NoiseLevel,
    pub mae: f64,
    pub std: f64,
    pub n: usize,
}

impl EvalRow {
    pub(crate) fn sort_key(&self) -> (&str, &str, u8, NoiseLevel) {
        (&self.dataset, &self.method, self.dim, self.noise_level)
    }
}

fn csv_field(s: &str) -> Result<&str> {
    if s.contains([',', '\n', '"']) {
        return Err(Error::InvalidArgument(format!("field {s:?} cannot be written to CSV")));
    }
    Ok(s)
}

pub fn report_to_csv(rows: &[EvalRow]) -> Result<String> {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.dataset)?,
            csv_field(&r.method)?,
            r.dim,
            r.noise_level,
            fmt_metric(r.mae),
            fmt_metric(r.std),
            r.n
        );
    }
    Ok(out)
}

fn check_header(text: &str, header: &str, what: &str) -> Result<()> {
    match text.lines().next().map(str::trim) {
        Some(h) if h == header => Ok(()),
        _ => Err(Error::Parse(format!("{what}: expected header {header}"))),
    }
}

fn fields(line: &str, n: usize, what: &str) -> Result<Vec<String>> {
    let f: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
    if f.len() != n {
        return Err(Error::Parse(format!("{what}: expected {n} fields in {line:?}")));
    }
    Ok(f)
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("{what}: bad number {s:?}")))
}

fn dim(s: &str, what: &str) -> Result<u8> {
    match num::<u8>(s, what)? {
        d @ (0 | 1) => Ok(d),
        d => Err(Error::Parse(format!("{what}: dim must be 0 or 1, got {d}"))),
    }
}

pub fn report_from_csv(text: &str) -> Result<Vec<EvalRow>> {
    check_header(text, REPORT_HEADER, "report")?;
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f = fields(line, 7, "report")?;
            let row = EvalRow {
                dataset: f[0].clone(),
                method: f[1].clone(),
                dim: dim(&f[2], "report")?,
                noise_level: f[3].parse()?,
                mae: num(&f[4], "report")?,
                std: num(&f[5], "report")?,
                n: num(&f[6], "report")?,
            };
            if !(row.mae >= 0.0 && row.std >= 0.0) {
                return Err(Error::Parse(format!("report: negative or NaN metric in {line:?}")));
            }
            Ok(row)
        })
        .collect()
}

pub fn write_report(path: impl AsRef<Path>, rows: &[EvalRow]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, report_to_csv(rows)?).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<EvalRow>> {
    let path = path.as_ref();
    report_from_csv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn calibrations_to_csv(results: &[CalibrationResult]) -> Result<String> {
    let mut out = format!("{CALIBRATION_HEADER}\n");
    for c in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&c.dataset)?,
            c.noise_level,
            c.dim,
            c.best.birth_lb,
            c.best.birth_ub,
            c.best.min_pers,
            fmt_metric(c.mae),
            fmt_metric(c.std),
            c.n_samples,
            c.calibration_split
        );
    }
    Ok(out)
}

pub fn calibrations_from_csv(text: &str) -> Result<Vec<CalibrationResult>> {
    check_header(text, CALIBRATION_HEADER, "calibration")?;
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f = fields(line, 10, "calibration")?;
            let level: NoiseLevel = f[1].parse()?;
            Ok(CalibrationResult {
                dataset: f[0].clone(),
                noise_level: level.to_string(),
                dim: dim(&f[2], "calibration")?,
                // empty windows (lb > ub) are legitimate grid-search outcomes
                best: WindowParams {
                    birth_lb: num(&f[3], "calibration")?,
                    birth_ub: num(&f[4], "calibration")?,
                    min_pers: num(&f[5], "calibration")?,
                },
                mae: num(&f[6], "calibration")?,
                std: num(&f[7], "calibration")?,
                n_samples: num(&f[8], "calibration")?,
                evaluated: 0,
                calibration_split: f[9].clone(),
            })
        })
        .collect()
}

pub fn write_calibrations(path: impl AsRef<Path>, results: &[CalibrationResult]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, calibrations_to_csv(results)?).map_err(|e| Error::io(path, e))
}

pub fn read_calibrations(path: impl AsRef<Path>) -> Result<Vec<CalibrationResult>> {
    let path = path.as_ref();
    calibrations_from_csv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Level-vs-MAE series, one per (method, dim, dataset), with x the level
/// index. Rows from any method sharing the report schema may be mixed.
pub fn emit_plot_data(rows: &[EvalRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("plot data needs at least one report row".into()));
    }
    let mut series: BTreeMap<(String, u8, String), BTreeMap<usize, &EvalRow>> = BTreeMap::new();
    for r in rows {
        let points = series.entry((r.method.clone(), r.dim, r.dataset.clone())).or_default();
        if points.insert(r.noise_level.index(), r).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate row for {} dim {} {} {}",
                r.method, r.dim, r.dataset, r.noise_level
            )));
        }
    }
    let mut out = format!("{PLOT_HEADER}\n");
    for ((method, dim, dataset), points) in &series {
        for (x, r) in points {
            let _ = writeln!(
                out,
                "{},{method},{dim},{},{x},{},{}",
                csv_field(&format!("{method}_b{dim}_{dataset}"))?,
                csv_field(dataset)?,
                fmt_metric(r.mae),
                fmt_metric(r.std)
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, dim: u8, level: NoiseLevel, mae: f64) -> EvalRow {
        EvalRow {
            dataset: "voronoi".into(),
            method: method.into(),
            dim,
            noise_level: level,
            mae,
            std: mae / 2.0,
            n: 30,
        }
    }

    #[test]
    fn report_round_trip() {
        let rows = vec![row("PH", 0, NoiseLevel::N0, 0.006), row("NN", 1, NoiseLevel::N4, 0.9)];
        let text = report_to_csv(&rows).unwrap();
        assert_eq!(text.lines().next(), Some(REPORT_HEADER));
        assert_eq!(report_from_csv(&text).unwrap(), rows);
        assert!(report_from_csv("dataset,method\n").is_err());
        assert!(report_from_csv(&format!("{REPORT_HEADER}\nv,PH,2,N0,0,0,1\n")).is_err());
        assert!(report_from_csv(&format!("{REPORT_HEADER}\nv,PH,0,N9,0,0,1\n")).is_err());
    }

    #[test]
    fn calibration_round_trip_is_exact() {
        let c = CalibrationResult {
            dataset: "voronoi".into(),
            noise_level: "N2".into(),
            dim: 1,
            best: WindowParams { birth_lb: -36.123456789, birth_ub: -1.0 / 3.0, min_pers: 12.5 },
            mae: 0.25,
            std: 0.5,
            n_samples: 30,
            evaluated: 0,
            calibration_split: "val".into(),
        };
        let text = calibrations_to_csv(std::slice::from_ref(&c)).unwrap();
        assert_eq!(calibrations_from_csv(&text).unwrap(), vec![c]);
    }

    #[test]
    fn single_row_gives_single_point_series() {
        let text = emit_plot_data(&[row("PH", 0, NoiseLevel::N2, 0.1)]).unwrap();
        assert_eq!(text, format!("{PLOT_HEADER}\nPH_b0_voronoi,PH,0,voronoi,2,0.100000,0.050000\n"));
        assert!(emit_plot_data(&[]).is_err());
    }

    #[test]
    fn mixed_methods_make_four_series() {
        let mut rows = Vec::new();
        for method in ["PH", "NN"] {
            for dim in [0, 1] {
                for level in NoiseLevel::ALL {
                    rows.push(row(method, dim, level, level.index() as f64 * 0.125));
                }
            }
        }
        let text = emit_plot_data(&rows).unwrap();
        let lines: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(lines.len(), 20);
        let series: std::collections::BTreeSet<&str> = lines.iter().map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(series.len(), 4);
        for name in series {
            let xs: Vec<&str> = lines
                .iter()
                .filter(|l| l.starts_with(&format!("{name},")))
                .map(|l| l.split(',').nth(4).unwrap())
                .collect();
            assert_eq!(xs, ["0", "1", "2", "3", "4"]);
        }
        // y values are the report's own formatting
        let report = report_to_csv(&rows).unwrap();
        for l in &lines {
            let f: Vec<&str> = l.split(',').collect();
            let level = format!("N{}", f[4]);
            let needle = format!("{},{},{},{},{},{}", f[3], f[1], f[2], level, f[5], f[6]);
            assert!(report.contains(&needle), "{needle}");
        }
        rows.push(row("PH", 0, NoiseLevel::N0, 1.0));
        assert!(emit_plot_data(&rows).is_err());
    }
}
