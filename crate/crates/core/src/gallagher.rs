//! Gallagher's mean-value inequality for finite exponential sums
//! `S(u) = Σ c(ν) e^{2πiνu}`:
//!
//! ```text
//! ∫_{-U}^{U} |S(u)|² du ≤ (πθ/sin πθ)² ∫ |(U/θ) Σ_{t ≤ ν ≤ t+θ/U} c(ν)|² dt
//! ```
//!
//! Both sides are evaluated exactly: the left through the Fejér-type kernel
//! of the interval, the right by sweeping the breakpoints of the window sum.

use std::f64::consts::PI;
use std::io::Read;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::ZeroTable;
use crate::summation::{ComplexSum, NeumaierSum};

/// Relative slack allowed when comparing the two sides.
pub const INEQUALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumSpec {
    /// `(ν, c(ν))` sorted by `ν`, frequencies distinct.
    terms: Vec<(f64, Complex64)>,
    theta: f64,
    u: f64,
}

impl ExpSumSpec {
    /// Sorts by frequency and adds the coefficients of repeated frequencies.
    pub fn new(mut terms: Vec<(f64, Complex64)>, theta: f64, u: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Domain(format!(
                "theta must lie in (0, 1), got {theta}"
            )));
        }
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::Domain(format!("U must be positive, got {u}")));
        }
        if let Some((nu, c)) = terms
            .iter()
            .find(|(nu, c)| !nu.is_finite() || !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Domain(format!("non-finite term ({nu}, {c})")));
        }
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, Complex64)> = Vec::with_capacity(terms.len());
        for (nu, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == nu => last.1 += c,
                _ => merged.push((nu, c)),
            }
        }
        Ok(Self {
            terms: merged,
            theta,
            u,
        })
    }

    pub fn terms(&self) -> &[(f64, Complex64)] {
        &self.terms
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    /// `S(u)`.
    pub fn evaluate(&self, u: f64) -> Complex64 {
        let mut acc = ComplexSum::new();
        for &(nu, c) in &self.terms {
            acc.add(c * Complex64::from_polar(1.0, 2.0 * PI * nu * u));
        }
        acc.value()
    }

    /// `(πθ/sin πθ)²`.
    pub fn sine_factor(&self) -> f64 {
        let a = PI * self.theta;
        (a / a.sin()).powi(2)
    }

    /// Window length `θ/U`.
    pub fn window(&self) -> f64 {
        self.theta / self.u
    }
}

/// `∫_{-U}^{U} |S(u)|² du = Σ_{j,k} c_j c̄_k K(ν_j − ν_k)` with
/// `K(0) = 2U`, `K(Δ) = sin(2πΔU)/(πΔ)`.
pub fn lhs_integral(spec: &ExpSumSpec) -> f64 {
    let u = spec.u;
    let kernel = |delta: f64| {
        if delta == 0.0 {
            2.0 * u
        } else {
            (2.0 * PI * delta * u).sin() / (PI * delta)
        }
    };
    let terms = &spec.terms;
    let mut acc = NeumaierSum::new();
    for (j, &(nj, cj)) in terms.iter().enumerate() {
        acc.add(cj.norm_sqr() * kernel(0.0));
        for &(nk, ck) in &terms[j + 1..] {
            acc.add(2.0 * (cj * ck.conj()).re * kernel(nj - nk));
        }
    }
    acc.value().max(0.0)
}

/// `∫ |Σ_{t ≤ ν ≤ t+L} w(ν)|² dt` for a window of length `L`, where `w` maps
/// each term to the weight summed in the window.
fn window_square_integral(
    terms: &[(f64, Complex64)],
    window: f64,
    weight: impl Fn(Complex64) -> Complex64,
) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let mut breaks: Vec<f64> = terms
        .iter()
        .flat_map(|&(nu, _)| [nu - window, nu])
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut acc = NeumaierSum::new();
    let (mut lo, mut hi) = (0usize, 0usize);
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let mid = 0.5 * (a + b);
        // terms with mid ≤ ν ≤ mid + L form a contiguous run
        while lo < terms.len() && terms[lo].0 < mid {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < terms.len() && terms[hi].0 <= mid + window {
            hi += 1;
        }
        if lo == hi {
            continue;
        }
        let mut sum = ComplexSum::new();
        for &(_, c) in &terms[lo..hi] {
            sum.add(weight(c));
        }
        acc.add(sum.value().norm_sqr() * (b - a));
    }
    acc.value()
}

/// `(πθ/sin πθ)² ∫ |(U/θ) Σ_{t ≤ ν ≤ t+θ/U} c(ν)|² dt`.
pub fn rhs_integral(spec: &ExpSumSpec) -> f64 {
    let scale = spec.u / spec.theta;
    spec.sine_factor() * scale * scale * window_square_integral(&spec.terms, spec.window(), |c| c)
}

/// The right side with every coefficient replaced by its modulus; an upper
/// bound for [`rhs_integral`] by the triangle inequality.
pub fn rhs_modulus_bound(spec: &ExpSumSpec) -> f64 {
    let scale = spec.u / spec.theta;
    spec.sine_factor()
        * scale
        * scale
        * window_square_integral(&spec.terms, spec.window(), |c| {
            Complex64::new(c.norm(), 0.0)
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GallagherCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_inequality(spec: &ExpSumSpec) -> GallagherCheck {
    let lhs = lhs_integral(spec);
    let rhs = rhs_integral(spec);
    GallagherCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + INEQUALITY_TOLERANCE),
    }
}

/// Between 1 and `max_terms` terms with `ν` uniform in `[-50, 50]` and
/// standard complex Gaussian coefficients.
pub fn random_terms<R: Rng + ?Sized>(rng: &mut R, max_terms: usize) -> Vec<(f64, Complex64)> {
    let count = rng.random_range(1..=max_terms.max(1));
    (0..count)
        .map(|_| {
            let nu = rng.random_range(-50.0..=50.0);
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            (nu, Complex64::new(re, im))
        })
        .collect()
}

/// [`random_terms`] with `θ` uniform in `(0.05, 0.95)` and `U` log-uniform in
/// `[0.01, 10]`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, max_terms: usize) -> ExpSumSpec {
    let terms = random_terms(rng, max_terms);
    let theta = rng.random_range(0.05..0.95);
    let u = 10f64.powf(rng.random_range(-2.0..=1.0));
    ExpSumSpec::new(terms, theta, u).expect("sampled parameters are valid")
}

/// Terms from CSV with header `nu,re,im`.
pub fn read_terms_csv<R: Read>(input: R) -> Result<Vec<(f64, Complex64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["nu", "re", "im"] {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header nu,re,im, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut terms = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| csv_error(e, line))?;
        let field = |k: usize| -> Result<f64> {
            record[k].parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid number {:?}", &record[k]),
            })
        };
        terms.push((field(0)?, Complex64::new(field(1)?, field(2)?)));
    }
    Ok(terms)
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

/// Frequency/coefficient shape of the zero sum over `[eⁿ, eⁿ⁺¹]`: after
/// `x = eⁿ e^{2π(u + 1/(4π))}` the sum `Σ x^{iγ}/ρ` becomes `S(u)` with
/// `ν = γ` and `c(γ) = e^{(n+1/2)iγ}/ρ`, on `|u| ≤ 1/(4π)`.
pub fn window_application_spec(table: &ZeroTable, n: u32, height: f64) -> ExpSumSpec {
    let phase = f64::from(n) + 0.5;
    let terms = table
        .up_to(height)
        .iter()
        .flat_map(|z| {
            let m = f64::from(z.multiplicity);
            [-z.gamma, z.gamma].map(|g| {
                let rho = Complex64::new(0.5, g);
                (g, m * Complex64::from_polar(1.0, phase * g) / rho)
            })
        })
        .collect();
    let width = 1.0 / (4.0 * PI);
    ExpSumSpec::new(terms, width, width).expect("window parameters are valid")
}

/// `∫ (Σ_{t < |ρ| ≤ t+1, |γ| ≤ T} 1/|ρ|)² dt` over both signs of `γ`.
pub fn spectral_window_integral(table: &ZeroTable, height: f64) -> f64 {
    let terms: Vec<(f64, Complex64)> = table
        .up_to(height)
        .iter()
        .map(|z| {
            (
                z.rho_abs(),
                Complex64::new(2.0 * f64::from(z.multiplicity) / z.rho_abs(), 0.0),
            )
        })
        .collect();
    window_square_integral(&terms, 1.0, |c| c)
}
