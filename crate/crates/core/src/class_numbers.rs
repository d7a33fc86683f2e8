//! Indefinite binary quadratic forms and their reduction cycles.
//!
//! For `D = t² − 4` the number of reduction cycles among all integral reduced
//! forms of discriminant `D` (imprimitive forms included) equals the number of
//! hyperbolic conjugacy classes of trace `t` in PSL(2, ℤ). That count is what
//! the geodesic counting functions are built on.
//!
//! A form `(a, b, c)` is *reduced* when `|√D − 2|a|| < b < √D`. All comparisons
//! against `√D` are carried out with integer squaring.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Discriminants above this bound would overflow the `i64` form coefficients
/// used by the reduction step.
pub const MAX_DISCRIMINANT: u64 = 1 << 62;

/// A validated positive non-square discriminant `D ≡ 0, 1 (mod 4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Discriminant(u64);

impl Discriminant {
    pub fn new(value: i128) -> Result<Self> {
        let invalid = |reason| Err(Error::InvalidDiscriminant { value, reason });
        if value <= 0 {
            return invalid("must be positive");
        }
        if value >= MAX_DISCRIMINANT as i128 {
            return invalid("too large");
        }
        let d = value as u64;
        if d % 4 == 2 || d % 4 == 3 {
            return invalid("must be 0 or 1 mod 4");
        }
        let s = isqrt(d);
        if s * s == d {
            return invalid("perfect square");
        }
        Ok(Discriminant(d))
    }

    /// `t² − 4` for a hyperbolic trace `t ≥ 3`.
    pub fn from_trace(t: u64) -> Result<Self> {
        if t < 3 {
            return Err(Error::Domain(format!("trace {t} is not hyperbolic")));
        }
        Self::new(t as i128 * t as i128 - 4)
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    /// `⌊√D⌋`; never equal to `√D` since `D` is not a square.
    #[inline]
    pub fn sqrt_floor(self) -> u64 {
        isqrt(self.0)
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadraticForm {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    pub fn discriminant(&self) -> i128 {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        b * b - 4 * a * c
    }

    /// `gcd(a, b, c)`; forms with content above 1 are imprimitive.
    pub fn content(&self) -> u64 {
        gcd(
            gcd(self.a.unsigned_abs(), self.b.unsigned_abs()),
            self.c.unsigned_abs(),
        )
    }

    pub fn is_reduced(&self, d: Discriminant) -> bool {
        self.discriminant() == d.value() as i128 && in_reduced_window(self.a, self.b, d.value())
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Counts for one discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormClassTally {
    pub d: Discriminant,
    pub reduced_count: u64,
    /// Number of reduction cycles, h*(D).
    pub class_count: u64,
}

/// `|√D − 2|a|| < b < √D`, decided exactly.
#[inline]
fn in_reduced_window(a: i64, b: i64, d: u64) -> bool {
    if b <= 0 {
        return false;
    }
    let d = d as i128;
    let b = b as i128;
    let two_a = 2 * a.unsigned_abs() as i128;
    if b * b >= d {
        return false;
    }
    let lo = two_a + b;
    if lo * lo <= d {
        return false;
    }
    let hi = two_a - b;
    hi <= 0 || hi * hi < d
}

/// Right neighbour of a reduced form. `sqrt_floor` must be `⌊√D⌋`.
#[inline]
fn right_neighbor(f: QuadraticForm, d: u64, sqrt_floor: i64) -> QuadraticForm {
    let two_c = 2 * f.c.abs();
    // largest b' ≤ ⌊√D⌋ with b' ≡ −b (mod 2|c|)
    let b_next = sqrt_floor - (sqrt_floor + f.b).rem_euclid(two_c);
    let c_next = ((b_next as i128 * b_next as i128 - d as i128) / (4 * f.c as i128)) as i64;
    QuadraticForm::new(f.c, b_next, c_next)
}

/// One reduction step `(a, b, c) ↦ (c, b′, c′)`.
pub fn reduction_step(f: QuadraticForm, d: Discriminant) -> Result<QuadraticForm> {
    if !f.is_reduced(d) {
        return Err(Error::NotReduced {
            a: f.a,
            b: f.b,
            c: f.c,
            d: d.value(),
        });
    }
    Ok(right_neighbor(f, d.value(), d.sqrt_floor() as i64))
}

/// All reduced forms of discriminant `d`, ordered by `(b, a)`.
///
/// For each admissible `b` the coefficient `a` runs over divisors of
/// `m = (D − b²)/4` inside the reduced window; `m` is factored by trial
/// division against a precomputed prime list.
pub fn list_reduced_forms(d: Discriminant) -> Vec<QuadraticForm> {
    let dv = d.value();
    let s = d.sqrt_floor();
    let primes = primes_up_to(isqrt(dv / 4) + 1);
    let mut factors = Vec::new();
    let mut divisors = Vec::new();
    let mut forms = Vec::new();
    let mut b = dv % 2;
    if b == 0 {
        b = 2;
    }
    while b <= s {
        let m = (dv - b * b) / 4;
        factor_trial_division(m, &primes, &mut factors);
        all_divisors(&factors, &mut divisors);
        divisors.sort_unstable();
        let mut row: Vec<QuadraticForm> = Vec::new();
        for &div in &divisors {
            let a = div as i64;
            if in_reduced_window(a, b as i64, dv) {
                let c = (m / div) as i64;
                row.push(QuadraticForm::new(a, b as i64, -c));
                row.push(QuadraticForm::new(-a, b as i64, c));
            }
        }
        row.sort_unstable_by_key(|f| f.a);
        forms.extend(row);
        b += 2;
    }
    forms
}

/// Partition of the reduced forms into reduction cycles. Each cycle starts at
/// its first form in `(b, a)` order.
pub fn reduction_cycles(d: Discriminant) -> Vec<Vec<QuadraticForm>> {
    let forms = list_reduced_forms(d);
    let s = d.sqrt_floor() as i64;
    let index_of = |f: &QuadraticForm| {
        forms
            .binary_search_by(|g| (g.b, g.a).cmp(&(f.b, f.a)))
            .expect("reduction step left the reduced set")
    };
    let mut seen = vec![false; forms.len()];
    let mut cycles = Vec::new();
    for start in 0..forms.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(forms[i]);
            i = index_of(&right_neighbor(forms[i], d.value(), s));
        }
        debug_assert_eq!(i, start);
        cycles.push(cycle);
    }
    cycles
}

/// h*(D): number of reduction cycles, imprimitive forms included.
pub fn class_number(d: Discriminant) -> u64 {
    reduction_cycles(d).len() as u64
}

pub fn tally(d: Discriminant) -> FormClassTally {
    let cycles = reduction_cycles(d);
    FormClassTally {
        d,
        reduced_count: cycles.iter().map(|c| c.len() as u64).sum(),
        class_count: cycles.len() as u64,
    }
}

/// Tallies for `D = t² − 4`, `t ∈ [t_min, t_max]`, in ascending `t`.
///
/// Uses [`TraceSieve`]; traces are distributed over the current rayon pool and
/// the ordered collect makes the output independent of the worker count.
pub fn trace_tallies(t_min: u64, t_max: u64) -> Result<Vec<FormClassTally>> {
    if t_min < 3 || t_max < t_min {
        return Err(Error::Domain(format!(
            "trace range [{t_min}, {t_max}] must satisfy 3 <= t_min <= t_max"
        )));
    }
    if t_max >= 1 << 30 {
        return Err(Error::Domain(format!("trace {t_max} too large")));
    }
    let primes = primes_up_to(t_max / 2 + 2);
    let tallies = (t_min as usize..t_max as usize + 1)
        .into_par_iter()
        .with_min_len(16)
        .map_init(
            || TraceSieve::new(&primes),
            |sieve, t| sieve.tally(t as u64),
        )
        .collect();
    Ok(tallies)
}

/// Per-trace enumeration of reduced forms.
///
/// With `b = t − 2k` the coefficient product is `m = k(t − k) − 1`, so one
/// sieve over `k` (roots of `k² − tk + 1 ≡ 0 mod p`) factors every `m` at
/// once. Reusable scratch buffers make it cheap to run trace after trace.
pub struct TraceSieve<'p> {
    primes: &'p [u64],
    rem: Vec<u64>,
    factors: Vec<(u64, u32)>,
    factor_len: Vec<u8>,
    divisors: Vec<u64>,
    window: Vec<u64>,
    offsets: Vec<usize>,
    scratch: Vec<(u64, u32)>,
    visited: Vec<bool>,
}

const FACTOR_SLOTS: usize = 16;

impl<'p> TraceSieve<'p> {
    /// `primes` must contain every prime up to `t_max / 2 + 1`.
    pub fn new(primes: &'p [u64]) -> Self {
        Self {
            primes,
            rem: Vec::new(),
            factors: Vec::new(),
            factor_len: Vec::new(),
            divisors: Vec::new(),
            window: Vec::new(),
            offsets: Vec::new(),
            scratch: Vec::new(),
            visited: Vec::new(),
        }
    }

    pub fn tally(&mut self, t: u64) -> FormClassTally {
        let d = t * t - 4;
        let k_max = ((t - 1) / 2) as usize;
        self.sieve(t, k_max);
        self.collect_window_divisors(t, d, k_max);
        let pairs = *self.offsets.last().unwrap_or(&0);
        let class_count = self.count_cycles(t, d, k_max, pairs);
        FormClassTally {
            d: Discriminant(d),
            reduced_count: 2 * pairs as u64,
            class_count,
        }
    }

    fn sieve(&mut self, t: u64, k_max: usize) {
        self.rem.clear();
        self.rem.push(0);
        self.rem.extend((1..=k_max as u64).map(|k| k * (t - k) - 1));
        self.factor_len.clear();
        self.factor_len.resize(k_max + 1, 0);
        self.factors.clear();
        self.factors.resize((k_max + 1) * FACTOR_SLOTS, (0, 0));

        for k in 1..=k_max {
            let tz = self.rem[k].trailing_zeros();
            if tz > 0 {
                self.rem[k] >>= tz;
                self.push_factor(k, 2, tz);
            }
        }
        let limit = k_max as u64;
        let m_max = self.rem.iter().copied().max().unwrap_or(0);
        for &p in self.primes.iter().skip(1) {
            if p * p > m_max {
                break;
            }
            let Some((r1, r2)) = quadratic_roots_mod(t, p) else {
                continue;
            };
            let mut roots = [r1, r2];
            let n_roots = if r1 == r2 { 1 } else { 2 };
            roots[..n_roots].sort_unstable();
            for &r in &roots[..n_roots] {
                let mut k = if r == 0 { p } else { r };
                while k <= limit {
                    let ku = k as usize;
                    let mut e = 0;
                    while self.rem[ku].is_multiple_of(p) {
                        self.rem[ku] /= p;
                        e += 1;
                    }
                    debug_assert!(e > 0);
                    self.push_factor(ku, p, e);
                    k += p;
                }
            }
        }
        for k in 1..=k_max {
            let r = self.rem[k];
            if r > 1 {
                self.push_factor(k, r, 1);
            }
        }
    }

    #[inline]
    fn push_factor(&mut self, k: usize, p: u64, e: u32) {
        let n = self.factor_len[k] as usize;
        self.factors[k * FACTOR_SLOTS + n] = (p, e);
        self.factor_len[k] += 1;
    }

    /// Fills `window` with, for each `k`, the sorted divisors `d` of `m_k`
    /// giving reduced forms `(±d, t − 2k, ∓m_k/d)`; `offsets[k]..offsets[k+1]`
    /// delimits row `k` (row 0 is empty).
    fn collect_window_divisors(&mut self, t: u64, d: u64, k_max: usize) {
        self.window.clear();
        self.offsets.clear();
        self.offsets.push(0);
        self.offsets.push(0);
        for k in 1..=k_max {
            let n = self.factor_len[k] as usize;
            self.scratch.clear();
            self.scratch
                .extend_from_slice(&self.factors[k * FACTOR_SLOTS..k * FACTOR_SLOTS + n]);
            all_divisors(&self.scratch, &mut self.divisors);
            let b = (t - 2 * k as u64) as i64;
            let start = self.window.len();
            for &div in &self.divisors {
                if in_reduced_window(div as i64, b, d) {
                    self.window.push(div);
                }
            }
            self.window[start..].sort_unstable();
            self.offsets.push(self.window.len());
        }
    }

    fn count_cycles(&mut self, t: u64, d: u64, k_max: usize, pairs: usize) -> u64 {
        let n_forms = 2 * pairs;
        self.visited.clear();
        self.visited.resize(n_forms, false);
        let s = (t - 1) as i64;
        let window = &self.window;
        let offsets = &self.offsets;
        let form_at = |idx: usize| -> QuadraticForm {
            let pair = idx / 2;
            // row k with offsets[k] <= pair < offsets[k + 1]
            let k = offsets.partition_point(|&o| o <= pair) - 1;
            let div = window[pair] as i64;
            let m = (k as i64) * (t as i64 - k as i64) - 1;
            let b = t as i64 - 2 * k as i64;
            if idx.is_multiple_of(2) {
                QuadraticForm::new(div, b, -m / div)
            } else {
                QuadraticForm::new(-div, b, m / div)
            }
        };
        let index_of = |f: QuadraticForm| -> usize {
            let k = ((t as i64 - f.b) / 2) as usize;
            debug_assert!(k >= 1 && k <= k_max);
            let row = &window[offsets[k]..offsets[k + 1]];
            let pos = row
                .binary_search(&f.a.unsigned_abs())
                .expect("reduction step left the reduced set");
            2 * (offsets[k] + pos) + usize::from(f.a < 0)
        };
        let mut cycles = 0;
        for start in 0..n_forms {
            if self.visited[start] {
                continue;
            }
            cycles += 1;
            let mut f = form_at(start);
            let mut i = start;
            while !self.visited[i] {
                self.visited[i] = true;
                f = right_neighbor(f, d, s);
                i = index_of(f);
            }
        }
        cycles
    }
}

/// Roots of `k² − t·k + 1 ≡ 0 (mod p)` for an odd prime `p`.
fn quadratic_roots_mod(t: u64, p: u64) -> Option<(u64, u64)> {
    let tm = t % p;
    let disc = (tm * tm + p - 4 % p) % p;
    let inv2 = p.div_ceil(2);
    let s = sqrt_mod(disc, p)?;
    let r1 = ((tm + s) % p) * inv2 % p;
    let r2 = ((tm + p - s) % p) * inv2 % p;
    Some((r1, r2))
}

/// Operands are reduced and `p < 2³²`, so the product fits in a `u64`.
#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Tonelli–Shanks square root modulo an odd prime.
fn sqrt_mod(n: u64, p: u64) -> Option<u64> {
    let n = n % p;
    if n == 0 {
        return Some(0);
    }
    if pow_mod(n, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(n, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

fn factor_trial_division(mut m: u64, primes: &[u64], out: &mut Vec<(u64, u32)>) {
    out.clear();
    for &p in primes {
        if p * p > m {
            break;
        }
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if m > 1 {
        out.push((m, 1));
    }
}

fn all_divisors(factors: &[(u64, u32)], out: &mut Vec<u64>) {
    out.clear();
    out.push(1);
    for &(p, e) in factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// `⌊√n⌋`, exact for all `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
