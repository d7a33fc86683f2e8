//! Principal-value logarithmic integral `li(x) = ∫₀^x dt / log t`.
//!
//! `li(x) = Ei(log x)`. The exponential integral is evaluated by its power
//! series for moderate arguments, by the asymptotic series for large positive
//! arguments and by a continued fraction for `E₁` when `x < 1/e`.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn li(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("li({x}) is undefined for x < 0")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Err(Error::Pole);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(ei(x.ln()))
}

/// Exponential integral `Ei(y)` for real `y ≠ 0` (principal value for `y > 0`).
pub fn ei(y: f64) -> f64 {
    if y > 40.0 {
        ei_asymptotic(y)
    } else if y >= -1.0 {
        ei_series(y)
    } else {
        -e1_continued_fraction(-y)
    }
}

fn ei_series(y: f64) -> f64 {
    // γ + ln|y| + Σ yᵏ/(k·k!)
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        term *= y / k;
        let contrib = term / k;
        sum += contrib;
        if contrib.abs() <= 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    EULER_GAMMA + y.abs().ln() + sum
}

fn ei_asymptotic(y: f64) -> f64 {
    // eʸ/y · Σ k!/yᵏ, truncated at the smallest term
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while k < y {
        let next = term * k / y;
        if next < 1e-17 {
            break;
        }
        if next > term {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    y.exp() / y * sum
}

/// `E₁(z)` for `z ≥ 1` by the modified Lentz continued fraction.
fn e1_continued_fraction(z: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}
