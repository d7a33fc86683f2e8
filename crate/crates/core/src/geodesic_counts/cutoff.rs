//! Exact cutoff `N_t ≤ x`.
//!
//! With `D = t² − 4`, `N_t ≤ x` is equivalent to `t·√D ≤ 2x − t² + 2`. The
//! comparison is made in `f64` when the two sides are clearly apart and with
//! exact big-integer arithmetic otherwise.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Traces beyond this are not supported by the `f64` initial guess.
const MAX_TRACE: u64 = 1 << 52;

/// Whether `N_t ≤ x`.
pub fn norm_at_most(t: u64, x: f64) -> bool {
    if t < 3 {
        return x >= 1.0;
    }
    let tf = t as f64;
    let t2 = tf * tf;
    let lhs = tf * (t2 - 4.0).sqrt();
    let rhs = 2.0 * x - t2 + 2.0;
    let band = 4.0 * f64::EPSILON * (lhs + 2.0 * x.abs() + t2 + 2.0);
    if lhs + band < rhs {
        return true;
    }
    if lhs - band > rhs {
        return false;
    }
    let (num, den) = exact_ratio(x);
    norm_at_most_ratio(t, &num, &den)
}

/// Whether `N_t ≤ num/den` for a positive denominator.
pub fn norm_at_most_ratio(t: u64, num: &BigInt, den: &BigUint) -> bool {
    let t = BigInt::from(t);
    let q = BigInt::from(den.clone());
    let t2 = &t * &t;
    // t·√D·q ≤ 2·num − (t² − 2)·q
    let rhs: BigInt = BigInt::from(2) * num - (&t2 - 2u32) * &q;
    if rhs.is_negative() {
        return false;
    }
    let lhs_sq: BigInt = &t2 * (&t2 - 4u32) * &q * &q;
    lhs_sq <= &rhs * &rhs
}

/// `x` as an exact fraction `num / den` with `den` a power of two.
fn exact_ratio(x: f64) -> (BigInt, BigUint) {
    if x == 0.0 {
        return (BigInt::zero(), BigUint::from(1u8));
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mantissa, exp2) = if exponent == 0 {
        (fraction, -1074)
    } else {
        (fraction | (1u64 << 52), exponent - 1075)
    };
    let mut num = BigInt::from(mantissa);
    if negative {
        num = -num;
    }
    if exp2 >= 0 {
        (num << exp2 as usize, BigUint::from(1u8))
    } else {
        (num, BigUint::from(1u8) << (-exp2) as usize)
    }
}

/// Largest `t ≥ 3` with `N_t ≤ x`, or `None` when `x < N_3`.
pub fn max_trace_for(x: f64) -> Result<Option<u64>> {
    if x.is_nan() || x.is_infinite() {
        return Err(Error::Domain(format!("cutoff requires finite x, got {x}")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("cutoff requires x ≥ 0, got {x}")));
    }
    search(x, |t| norm_at_most(t, x))
}

/// [`max_trace_for`] for an exact rational `num / den`.
pub fn max_trace_for_ratio(num: &BigInt, den: &BigUint) -> Result<Option<u64>> {
    if den.is_zero() {
        return Err(Error::Domain("zero denominator".into()));
    }
    if num.is_negative() {
        return Err(Error::Domain("cutoff requires x ≥ 0".into()));
    }
    let approx = num.to_f64().unwrap_or(f64::INFINITY) / den.to_f64().unwrap_or(f64::INFINITY);
    let approx = if approx.is_finite() { approx } else { f64::MAX };
    search(approx, |t| norm_at_most_ratio(t, num, den))
}

fn search(x: f64, fits: impl Fn(u64) -> bool) -> Result<Option<u64>> {
    // N_t + 1/N_t = t² − 2, so t = √x + 1/√x at the boundary
    let root = x.sqrt();
    let guess = if root > 0.0 { root + 1.0 / root } else { 0.0 };
    if guess > MAX_TRACE as f64 {
        return Err(Error::Domain(format!(
            "x = {x} is beyond the supported range"
        )));
    }
    let mut t = (guess.floor() as u64).max(3);
    while t > 3 && !fits(t) {
        t -= 1;
    }
    if !fits(t) {
        return Ok(None);
    }
    while t < MAX_TRACE && fits(t + 1) {
        t += 1;
    }
    Ok(Some(t))
}
