//! Truncated explicit formula `ψ_Γ(x) ≈ x + Σ_{|γ| ≤ T} x^ρ/ρ` and the
//! truncation rule used with it.

use super::zeros::ZeroTable;
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// `Σ_{|γ| ≤ T} x^ρ/ρ`, with each `±γ` pair collapsed to `2·Re`.
pub fn zero_sum(x: f64, height: f64, table: &ZeroTable) -> f64 {
    let log_x = x.ln();
    let root = x.sqrt();
    let acc: NeumaierSum = table
        .up_to(height)
        .iter()
        .map(|z| {
            let (sin, cos) = (z.gamma * log_x).sin_cos();
            let g = z.gamma;
            f64::from(z.multiplicity) * 2.0 * root * (0.5 * cos + g * sin) / (0.25 + g * g)
        })
        .collect();
    acc.value()
}

/// Truncation height for the zero sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationChoice {
    /// Height actually used.
    pub t: f64,
    pub epsilon: f64,
    /// Whether the height is restricted to `[1, √x/(log x)²]`.
    pub capped: bool,
    /// `x^{1/3} log x / (log log x)^{1/3+ε}` times the scale.
    pub uncapped_t: f64,
    /// Whether a bound of the allowed range changed the height.
    pub clamped: bool,
}

impl TruncationChoice {
    /// A fixed height with no cap.
    pub fn fixed(t: f64) -> Self {
        Self {
            t,
            epsilon: 0.0,
            capped: false,
            uncapped_t: t,
            clamped: false,
        }
    }
}

/// Upper end `√x/(log x)²` of the range where the truncated formula holds.
pub fn truncation_cap(x: f64) -> f64 {
    let log_x = x.ln();
    x.sqrt() / (log_x * log_x)
}

pub fn optimal_truncation(x: f64, epsilon: f64, capped: bool) -> Result<TruncationChoice> {
    optimal_truncation_scaled(x, epsilon, capped, 1.0)
}

/// [`optimal_truncation`] with the height multiplied by `scale` before clamping.
pub fn optimal_truncation_scaled(
    x: f64,
    epsilon: f64,
    capped: bool,
    scale: f64,
) -> Result<TruncationChoice> {
    check_above_e(x)?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let log_x = x.ln();
    let uncapped_t = scale * x.cbrt() * log_x / log_x.ln().powf(1.0 / 3.0 + epsilon);
    let target = if capped {
        uncapped_t.min(truncation_cap(x))
    } else {
        uncapped_t
    };
    let t = target.max(1.0);
    Ok(TruncationChoice {
        t,
        epsilon,
        capped,
        uncapped_t,
        clamped: t != uncapped_t,
    })
}

/// `√x·√T·√(log x)·(log log x)^{1/2 + 3ε/2}`.
pub fn exceptional_threshold(x: f64, height: f64, epsilon: f64) -> Result<f64> {
    check_above_e(x)?;
    if height < 0.0 {
        return Err(Error::Domain(format!(
            "height must be non-negative, got {height}"
        )));
    }
    let log_x = x.ln();
    Ok((x * height * log_x).sqrt() * log_x.ln().powf(0.5 + 1.5 * epsilon))
}

fn check_above_e(x: f64) -> Result<()> {
    if x > std::f64::consts::E && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("x must exceed e, got {x}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitPsi {
    pub value: f64,
    /// `x (log x)²/T`: the size of the remainder with constant 1.
    pub error_budget: f64,
}

pub fn explicit_psi(x: f64, choice: &TruncationChoice, table: &ZeroTable) -> Result<ExplicitPsi> {
    if !(x > 1.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x must exceed 1, got {x}")));
    }
    if choice.capped {
        let cap = truncation_cap(x);
        if !(1.0..=cap).contains(&choice.t) {
            return Err(Error::CapViolation {
                t: choice.t,
                cap,
                x,
            });
        }
    }
    let log_x = x.ln();
    Ok(ExplicitPsi {
        value: x + zero_sum(x, choice.t, table),
        error_budget: x * log_x * log_x / choice.t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn table() -> ZeroTable {
        ZeroTable::from_gammas(&[9.533_695_261_4, 12.173_008_324_7, 13.779_751_351_9], "t").unwrap()
    }

    #[test]
    fn empty_truncation_is_zero() {
        assert_eq!(zero_sum(1e6, 5.0, &table()), 0.0);
        assert_eq!(zero_sum(1e6, 100.0, &ZeroTable::empty("e")), 0.0);
    }

    #[test]
    fn single_zero_matches_complex_evaluation() {
        let g = 9.533_695_261_4;
        let single = ZeroTable::from_gammas(&[g], "t").unwrap();
        let x = std::f64::consts::E;
        let rho = Complex64::new(0.5, g);
        let term = |r: Complex64| (r * x.ln()).exp() / r;
        let naive = term(rho) + term(rho.conj());
        assert!(naive.im.abs() < 1e-14);
        let got = zero_sum(x, 10.0, &single);
        assert!(((got - naive.re) / naive.re).abs() < 1e-12);
    }

    #[test]
    fn optimal_truncation_at_a_million() {
        let c = optimal_truncation(1e6, 0.1, false).unwrap();
        assert!((c.uncapped_t - 909.5).abs() < 0.5, "{}", c.uncapped_t);
        assert_eq!(c.t, c.uncapped_t);
        assert!(!c.clamped);
        let c = optimal_truncation(1e6, 0.1, true).unwrap();
        assert!((c.t - 5.239).abs() < 1e-3, "{}", c.t);
        assert!(c.clamped && c.capped);
    }

    #[test]
    fn optimal_truncation_small_x() {
        let x = std::f64::consts::E.powi(2);
        let c = optimal_truncation(x, 0.3, false).unwrap();
        assert!(c.uncapped_t > x.cbrt() * x.ln());
        assert!(optimal_truncation(std::f64::consts::E, 0.1, false).is_err());
        // the cap is below 1 here, so the height floors at 1
        let c = optimal_truncation(100.0, 0.1, true).unwrap();
        assert_eq!(c.t, 1.0);
    }

    #[test]
    fn threshold_closed_form() {
        let b = exceptional_threshold(1e6, 100.0, 0.1).unwrap();
        let log_x = 1e6f64.ln();
        let expected = 1000.0 * 10.0 * log_x.sqrt() * log_x.ln().powf(0.65);
        assert!(((b - expected) / expected).abs() < 1e-14);
        assert_eq!(exceptional_threshold(1e6, 0.0, 0.1).unwrap(), 0.0);
        assert!(exceptional_threshold(2.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn explicit_psi_shapes() {
        let empty = ZeroTable::empty("e");
        let v = explicit_psi(1e4, &TruncationChoice::fixed(50.0), &empty).unwrap();
        assert_eq!(v.value, 1e4);
        let v = explicit_psi(1e6, &TruncationChoice::fixed(5.0), &table()).unwrap();
        assert_eq!(v.value, 1e6);
        let log_x = 1e6f64.ln();
        assert_eq!(v.error_budget, 1e6 * log_x * log_x / 5.0);
        let bad = TruncationChoice {
            capped: true,
            ..TruncationChoice::fixed(50.0)
        };
        assert!(matches!(
            explicit_psi(1e6, &bad, &table()),
            Err(Error::CapViolation { .. })
        ));
    }

    proptest! {
        #[test]
        fn capped_height_stays_in_range(lx in 1.01f64..40.0, eps in 0.01f64..1.0) {
            let x = lx.exp();
            let c = optimal_truncation(x, eps, true).unwrap();
            prop_assert!(c.t >= 1.0);
            prop_assert!(c.t <= truncation_cap(x).max(1.0));
        }

        #[test]
        fn threshold_is_monotone(lx in 2.72f64..30.0, t in 0.5f64..500.0, eps in 0.01f64..1.0) {
            let x = lx.exp();
            let b = exceptional_threshold(x, t, eps).unwrap();
            prop_assert!(exceptional_threshold(x * 1.01, t, eps).unwrap() > b);
            prop_assert!(exceptional_threshold(x, t * 1.01, eps).unwrap() > b);
            prop_assert!(exceptional_threshold(x, t, eps + 0.01).unwrap() > b);
        }

        #[test]
        fn zero_sum_changes_only_at_gammas(lx in 1.0f64..20.0, h in 9.6f64..12.1) {
            let x = lx.exp();
            prop_assert_eq!(zero_sum(x, h, &table()), zero_sum(x, 9.6, &table()));
        }

        #[test]
        fn imaginary_residual_is_negligible(lx in 1.0f64..20.0) {
            let x = lx.exp();
            let mut re = 0.0;
            let mut im = 0.0;
            for z in table().zeros() {
                for g in [z.gamma, -z.gamma] {
                    let rho = Complex64::new(0.5, g);
                    let v = (rho * lx).exp() / rho;
                    re += v.re;
                    im += v.im;
                }
            }
            prop_assert!(im.abs() <= 1e-12 * re.abs().max(x.sqrt()));
            let got = zero_sum(x, 20.0, &table());
            prop_assert!((got - re).abs() <= 1e-12 * x.sqrt() * 10.0);
        }
    }
}
