//! Mean square of the zero sum over `[eⁿ, eⁿ⁺¹]` and the logarithmic measure of
//! the set where it is exceptionally large.

use num_complex::Complex64;
use rayon::prelude::*;

use super::explicit::{exceptional_threshold, zero_sum};
use super::zeros::ZeroTable;
use crate::error::{Error, Result};
use crate::summation::{ComplexSum, NeumaierSum};

/// `∫_{eⁿ}^{eⁿ⁺¹} |Σ_{|γ| ≤ T} x^ρ/ρ|² dx` in closed form.
///
/// With `ρ_j` over both signs of `γ`, the integrand expands to
/// `Σ_{j,k} x^{1 + i(γ_j − γ_k)}/(ρ_j ρ̄_k)`, which integrates term by term.
pub fn window_mean_square(n: u32, height: f64, table: &ZeroTable) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("window index n must be at least 1".into()));
    }
    let signed: Vec<(f64, f64)> = table
        .up_to(height)
        .iter()
        .flat_map(|z| {
            let m = f64::from(z.multiplicity);
            [(-z.gamma, m), (z.gamma, m)]
        })
        .collect();
    if signed.is_empty() {
        return Ok(0.0);
    }
    let (lo, hi) = (f64::from(n), f64::from(n + 1));
    let rows: Vec<Complex64> = signed
        .par_iter()
        .map(|&(gj, mj)| {
            let rho_j = Complex64::new(0.5, gj);
            let mut row = ComplexSum::new();
            for &(gk, mk) in &signed {
                let rho_k = Complex64::new(0.5, gk);
                let delta = gj - gk;
                let exponent = Complex64::new(2.0, delta);
                let antiderivative = |u: f64| (exponent * u).exp();
                let span = antiderivative(hi) - antiderivative(lo);
                row.add(mj * mk * span / (exponent * rho_j * rho_k.conj()));
            }
            row.value()
        })
        .collect();
    let mut total = ComplexSum::new();
    for r in rows {
        total.add(r);
    }
    let total = total.value();
    debug_assert!(total.im.abs() <= 1e-9 * total.re.abs().max(f64::MIN_POSITIVE));
    Ok(total.re)
}

/// Logarithmic measure of the exceptional part of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalReport {
    pub n: u32,
    /// Estimate of `∫_{Aₙ} dx/x`, in `[0, 1]`.
    pub measure_estimate: f64,
    /// `1/(n (log n)^{1+3ε})`.
    pub paper_bound: f64,
    pub exceeded_samples: usize,
    pub total_samples: usize,
}

/// Comparison value `1/(n (log n)^{1+3ε})` for the measure of `Aₙ`.
pub fn measure_bound(n: u32, epsilon: f64) -> f64 {
    let n = f64::from(n);
    1.0 / (n * n.ln().powf(1.0 + 3.0 * epsilon))
}

/// Estimates `∫_{Aₙ} dx/x` where `Aₙ ⊂ [eⁿ, eⁿ⁺¹)` is the set on which
/// `|Σ_{|γ| ≤ T} x^ρ/ρ|` exceeds the threshold at `(x, T, ε)`.
///
/// `samples` points are spaced evenly in `log x`. Each cell whose endpoints
/// disagree is split once at its midpoint, and the crossing inside the
/// disagreeing half is located by linear interpolation.
pub fn window_exceptional_measure(
    n: u32,
    height: f64,
    epsilon: f64,
    table: &ZeroTable,
    samples: usize,
) -> Result<ExceptionalReport> {
    if n < 2 {
        return Err(Error::Domain("window index n must be at least 2".into()));
    }
    if samples < 16 {
        return Err(Error::Domain(format!(
            "need at least 16 samples, got {samples}"
        )));
    }
    let excess = |u: f64| -> Result<f64> {
        let x = u.exp();
        Ok(zero_sum(x, height, table).abs() - exceptional_threshold(x, height, epsilon)?)
    };
    let start = f64::from(n);
    let step = 1.0 / (samples - 1) as f64;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| excess(start + i as f64 * step))
        .collect::<Result<_>>()?;

    let mut measure = NeumaierSum::new();
    for (i, pair) in values.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if a > 0.0 && b > 0.0 {
            measure.add(step);
        } else if (a > 0.0) != (b > 0.0) {
            let mid = excess(start + (i as f64 + 0.5) * step)?;
            let half = 0.5 * step;
            for (left, right) in [(a, mid), (mid, b)] {
                measure.add(half * positive_fraction(left, right));
            }
        }
    }
    Ok(ExceptionalReport {
        n,
        measure_estimate: measure.value().clamp(0.0, 1.0),
        paper_bound: measure_bound(n, epsilon),
        exceeded_samples: values.iter().filter(|&&v| v > 0.0).count(),
        total_samples: samples,
    })
}

/// Fraction of a segment where the linear interpolant of `(left, right)` is positive.
fn positive_fraction(left: f64, right: f64) -> f64 {
    match (left > 0.0, right > 0.0) {
        (true, true) => 1.0,
        (false, false) => 0.0,
        (true, false) => left / (left - right),
        (false, true) => right / (right - left),
    }
}
