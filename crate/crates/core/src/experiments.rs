//! End-to-end runs: error-term scans against exact counts, exceptional-set
//! summaries, mean-square grids and exponent regression, with CSV output.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::sig15;
use crate::geodesic_counts::TraceTable;
use crate::spectral::{
    exceptional_threshold, optimal_truncation, optimal_truncation_scaled,
    window_exceptional_measure, window_mean_square, zero_sum, ZeroTable,
};

pub use crate::spectral::ExceptionalReport;

pub const SCAN_HEADER: &str =
    "x,pi,theta,psi,li,psi_residual,pi_residual,eq6_norm,thm_norm,T_used,exceptional";
pub const EXCEPTIONAL_HEADER: &str = "n,measure_estimate,paper_bound,exceeded,total";
pub const EQ4_HEADER: &str = "n,T,integral,ratio";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub x: f64,
    pub pi: u64,
    pub theta: f64,
    pub psi: f64,
    pub li: f64,
    /// `ψ − x`.
    pub psi_residual: f64,
    /// `π − li`.
    pub pi_residual: f64,
    /// `|ψ − x| / (x^{2/3} log x (log log x)^{1/3+ε})`.
    pub eq6_norm: f64,
    /// `|π − li| / (x^{2/3} (log log x)^{1/3+ε})`.
    pub thm_norm: f64,
    pub t_used: f64,
    /// Whether the truncated zero sum at `(x, T_used)` exceeds the threshold.
    pub exceptional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub per_decade: u32,
    pub epsilon: f64,
    pub capped: bool,
    /// Multiplier applied to the truncation height before clamping.
    pub t_scale: f64,
}

impl ScanConfig {
    pub fn new(x_min: f64, x_max: f64, per_decade: u32, epsilon: f64, capped: bool) -> Self {
        Self {
            x_min,
            x_max,
            per_decade,
            epsilon,
            capped,
            t_scale: 1.0,
        }
    }

    /// `x_min · 10^{i/per_decade}` up to `x_max`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let e = std::f64::consts::E;
        if !(self.x_min > e && self.x_min < self.x_max && self.x_max.is_finite()) {
            return Err(Error::Domain(format!(
                "scan needs e < x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.per_decade == 0 {
            return Err(Error::Domain("per_decade must be at least 1".into()));
        }
        let steps = (f64::from(self.per_decade) * (self.x_max / self.x_min).log10() + 1e-9).floor();
        Ok((0..=steps as u64)
            .map(|i| self.x_min * 10f64.powf(i as f64 / f64::from(self.per_decade)))
            .collect())
    }
}

/// `x^{2/3} log x (log log x)^{1/3+ε}`.
pub fn eq6_scale(x: f64, epsilon: f64) -> f64 {
    let log_x = x.ln();
    x.powf(2.0 / 3.0) * log_x * log_x.ln().powf(1.0 / 3.0 + epsilon)
}

/// `x^{2/3} (log log x)^{1/3+ε}`.
pub fn theorem_scale(x: f64, epsilon: f64) -> f64 {
    x.powf(2.0 / 3.0) * x.ln().ln().powf(1.0 / 3.0 + epsilon)
}

pub fn scan_row(
    x: f64,
    config: &ScanConfig,
    traces: &TraceTable,
    zeros: &ZeroTable,
) -> Result<ScanRow> {
    let snapshot = traces.snapshot(x)?;
    let choice = optimal_truncation_scaled(x, config.epsilon, config.capped, config.t_scale)?;
    zeros.require_coverage("truncation height", choice.t)?;
    let psi_residual = snapshot.psi - x;
    let pi_residual = snapshot.pi as f64 - snapshot.li;
    let exceptional =
        zero_sum(x, choice.t, zeros).abs() > exceptional_threshold(x, choice.t, config.epsilon)?;
    Ok(ScanRow {
        x,
        pi: snapshot.pi,
        theta: snapshot.theta,
        psi: snapshot.psi,
        li: snapshot.li,
        psi_residual,
        pi_residual,
        eq6_norm: psi_residual.abs() / eq6_scale(x, config.epsilon),
        thm_norm: pi_residual.abs() / theorem_scale(x, config.epsilon),
        t_used: choice.t,
        exceptional,
    })
}

/// One row per grid point, in ascending `x`.
pub fn run_error_scan(
    config: &ScanConfig,
    traces: &TraceTable,
    zeros: &ZeroTable,
) -> Result<Vec<ScanRow>> {
    config
        .grid()?
        .into_par_iter()
        .map(|x| scan_row(x, config, traces, zeros))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionSummary {
    pub x_min: f64,
    pub x_max: f64,
    /// Least-squares slope of `log|ψ − x|` against `log x`.
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
}

/// Fits `log|ψ − x| = slope·log x + intercept`, skipping zero residuals.
pub fn fit_exponent(rows: &[ScanRow]) -> Result<RegressionSummary> {
    let points: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.psi_residual != 0.0 && r.x > 0.0)
        .map(|r| (r.x, r.x.ln(), r.psi_residual.abs().ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need two rows with nonzero residual, have {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_u = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_v = points.iter().map(|p| p.2).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(_, u, v) in &points {
        sxx += (u - mean_u) * (u - mean_u);
        sxy += (u - mean_u) * (v - mean_v);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all rows share one x".into()));
    }
    let slope = sxy / sxx;
    Ok(RegressionSummary {
        x_min: points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        x_max: points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        slope,
        intercept: mean_v - slope * mean_u,
        points_used: points.len(),
    })
}

/// Height used for window `n`: the uncapped optimal height at `e^{n+1/2}`.
pub fn window_height(n: u32, epsilon: f64) -> Result<f64> {
    Ok(optimal_truncation((f64::from(n) + 0.5).exp(), epsilon, false)?.t)
}

pub fn run_exceptional_scan(
    n_min: u32,
    n_max: u32,
    epsilon: f64,
    samples: usize,
    zeros: &ZeroTable,
) -> Result<Vec<ExceptionalReport>> {
    if n_min < 2 || n_min > n_max {
        return Err(Error::Domain(format!(
            "need 2 <= n_min <= n_max, got {n_min}..{n_max}"
        )));
    }
    (n_min..=n_max)
        .map(|n| {
            let height = window_height(n, epsilon)?;
            zeros.require_coverage("window height", height)?;
            window_exceptional_measure(n, height, epsilon, zeros, samples)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq4Cell {
    pub n: u32,
    pub t: f64,
    pub integral: f64,
    /// `integral / (e^{2n} T)`.
    pub ratio: f64,
}

/// Mean squares over every `(n, T)` pair, `n` outer and ascending.
pub fn run_eq4_grid(ns: &[u32], heights: &[f64], zeros: &ZeroTable) -> Result<Vec<Eq4Cell>> {
    for &t in heights {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::Domain(format!("heights must be positive, got {t}")));
        }
        zeros.require_coverage("mean-square height", t)?;
    }
    let pairs: Vec<(u32, f64)> = ns
        .iter()
        .flat_map(|&n| heights.iter().map(move |&t| (n, t)))
        .collect();
    pairs
        .into_iter()
        .map(|(n, t)| {
            let integral = window_mean_square(n, t, zeros)?;
            Ok(Eq4Cell {
                n,
                t,
                integral,
                ratio: integral / ((2.0 * f64::from(n)).exp() * t),
            })
        })
        .collect()
}

pub fn write_scan_csv<W: Write>(rows: &[ScanRow], mut out: W) -> Result<()> {
    writeln!(out, "{SCAN_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            sig15(r.x),
            r.pi,
            sig15(r.theta),
            sig15(r.psi),
            sig15(r.li),
            sig15(r.psi_residual),
            sig15(r.pi_residual),
            sig15(r.eq6_norm),
            sig15(r.thm_norm),
            sig15(r.t_used),
            r.exceptional
        )?;
    }
    Ok(())
}

pub fn write_exceptional_csv<W: Write>(reports: &[ExceptionalReport], mut out: W) -> Result<()> {
    writeln!(out, "{EXCEPTIONAL_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            sig15(r.measure_estimate),
            sig15(r.paper_bound),
            r.exceeded_samples,
            r.total_samples
        )?;
    }
    Ok(())
}

pub fn write_eq4_csv<W: Write>(cells: &[Eq4Cell], mut out: W) -> Result<()> {
    writeln!(out, "{EQ4_HEADER}")?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{}",
            c.n,
            sig15(c.t),
            sig15(c.integral),
            sig15(c.ratio)
        )?;
    }
    Ok(())
}

/// Records of a CSV whose header must equal `header`.
fn read_records<R: Read>(input: R, header: &str) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let found = reader.headers().map_err(|e| csv_error(e, 1))?;
    let found = found.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {header}, found {found}"),
        });
    }
    reader
        .records()
        .enumerate()
        .map(|(i, r)| r.map(|r| (i + 2, r)).map_err(|e| csv_error(e, i + 2)))
        .collect()
}

fn csv_error(e: csv::Error, line: usize) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, line: usize, k: usize) -> Result<T> {
    record
        .get(k)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("invalid field {} {:?}", k + 1, record.get(k)),
        })
}

pub fn read_scan_csv<R: Read>(input: R) -> Result<Vec<ScanRow>> {
    read_records(input, SCAN_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok(ScanRow {
                x: field(&r, line, 0)?,
                pi: field(&r, line, 1)?,
                theta: field(&r, line, 2)?,
                psi: field(&r, line, 3)?,
                li: field(&r, line, 4)?,
                psi_residual: field(&r, line, 5)?,
                pi_residual: field(&r, line, 6)?,
                eq6_norm: field(&r, line, 7)?,
                thm_norm: field(&r, line, 8)?,
                t_used: field(&r, line, 9)?,
                exceptional: field(&r, line, 10)?,
            })
        })
        .collect()
}

pub fn read_exceptional_csv<R: Read>(input: R) -> Result<Vec<ExceptionalReport>> {
    read_records(input, EXCEPTIONAL_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok(ExceptionalReport {
                n: field(&r, line, 0)?,
                measure_estimate: field(&r, line, 1)?,
                paper_bound: field(&r, line, 2)?,
                exceeded_samples: field(&r, line, 3)?,
                total_samples: field(&r, line, 4)?,
            })
        })
        .collect()
}

pub fn read_eq4_csv<R: Read>(input: R) -> Result<Vec<Eq4Cell>> {
    read_records(input, EQ4_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok(Eq4Cell {
                n: field(&r, line, 0)?,
                t: field(&r, line, 1)?,
                integral: field(&r, line, 2)?,
                ratio: field(&r, line, 3)?,
            })
        })
        .collect()
}
