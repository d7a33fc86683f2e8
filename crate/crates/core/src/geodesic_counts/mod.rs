//! Prime-geodesic counting functions π_Γ, θ_Γ and ψ_Γ for Γ = PSL(2, ℤ).
//!
//! A hyperbolic class of trace `t` has norm `N_t = ((t + √(t² − 4))/2)²` and
//! length `ℓ_t = log N_t`. Every class is a power `P₀ᵏ` of a unique primitive
//! class, and the trace of `P₀ᵏ` follows `u₀ = 2, u₁ = t₀, uₖ = t₀·uₖ₋₁ − uₖ₋₂`.
//! Class multiplicities per trace come from [`crate::class_numbers`].

mod cache;
mod cutoff;
mod li;

use std::io::Write;

use crate::class_numbers::{trace_tallies, Discriminant};
use crate::error::{Error, Result};
use crate::format::sig15;
use crate::summation::NeumaierSum;

pub use cache::{read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use cutoff::{max_trace_for, max_trace_for_ratio, norm_at_most};
pub use li::{ei, li};

/// Smallest hyperbolic trace.
pub const FIRST_TRACE: u64 = 3;

/// `ℓ_t = 2 log((t + √(t² − 4))/2)`.
pub fn log_norm(t: u64) -> f64 {
    let t = t as f64;
    2.0 * ((t + (t * t - 4.0).sqrt()) / 2.0).ln()
}

/// `N_t = ((t + √(t² − 4))/2)²`.
pub fn norm(t: u64) -> f64 {
    let t = t as f64;
    let e = (t + (t * t - 4.0).sqrt()) / 2.0;
    e * e
}

/// Trace of the `k`-th power of a class of trace `t0`; `None` on overflow.
pub fn trace_power(t0: u64, k: u32) -> Option<u64> {
    let (mut prev, mut cur) = (2u64, t0);
    if k == 0 {
        return Some(2);
    }
    for _ in 1..k {
        let next = t0.checked_mul(cur)?.checked_sub(prev)?;
        (prev, cur) = (cur, next);
    }
    Some(cur)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub d: Discriminant,
    /// h*(t² − 4): all hyperbolic classes of trace `t`.
    pub total_classes: u64,
    /// Classes of trace `t` that are not proper powers.
    pub primitive_classes: u64,
    pub log_norm: f64,
    pub norm: f64,
}

/// One evaluation of the counting functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSnapshot {
    pub x: f64,
    pub pi: u64,
    pub theta: f64,
    pub psi: f64,
    pub li: f64,
}

/// Trace records for `t = 3, …, t_max`, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    records: Vec<TraceRecord>,
}

impl TraceTable {
    /// Class numbers for every trace up to `t_max`, then primitive counts by
    /// subtracting the powers of smaller primitive classes.
    pub fn build(t_max: u64) -> Result<Self> {
        if t_max < FIRST_TRACE {
            return Err(Error::Domain(format!("t_max = {t_max} must be at least 3")));
        }
        let totals: Vec<u64> = trace_tallies(FIRST_TRACE, t_max)?
            .iter()
            .map(|tally| tally.class_count)
            .collect();
        Self::from_totals(&totals)
    }

    /// `totals[i]` is h* for trace `3 + i`.
    pub fn from_totals(totals: &[u64]) -> Result<Self> {
        let t_max = FIRST_TRACE + totals.len() as u64 - 1;
        let mut powers = vec![0u64; totals.len()];
        let mut records = Vec::with_capacity(totals.len());
        for (i, &total) in totals.iter().enumerate() {
            let t = FIRST_TRACE + i as u64;
            let primitive = total.checked_sub(powers[i]).ok_or_else(|| {
                Error::Domain(format!(
                    "trace {t}: {total} classes but {} are powers",
                    powers[i]
                ))
            })?;
            if primitive > 0 {
                let mut k = 2;
                while let Some(u) = trace_power(t, k).filter(|&u| u <= t_max) {
                    powers[(u - FIRST_TRACE) as usize] += primitive;
                    k += 1;
                }
            }
            records.push(TraceRecord {
                t,
                d: Discriminant::from_trace(t)?,
                total_classes: total,
                primitive_classes: primitive,
                log_norm: log_norm(t),
                norm: norm(t),
            });
        }
        Ok(Self { records })
    }

    /// Rebuilds from stored `(t, h*, primitive)` triples, checking consistency.
    pub fn from_counts(counts: &[(u64, u64, u64)]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Domain("empty trace table".into()));
        }
        let totals: Vec<u64> = counts.iter().map(|c| c.1).collect();
        let table = Self::from_totals(&totals)?;
        for (rec, &(t, _, primitive)) in table.records.iter().zip(counts) {
            if rec.t != t || rec.primitive_classes != primitive {
                return Err(Error::Domain(format!(
                    "stored record for t = {t} is inconsistent"
                )));
            }
        }
        Ok(table)
    }

    pub fn t_max(&self) -> u64 {
        self.records.last().map_or(FIRST_TRACE - 1, |r| r.t)
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn get(&self, t: u64) -> Option<&TraceRecord> {
        t.checked_sub(FIRST_TRACE)
            .and_then(|i| self.records.get(i as usize))
    }

    /// Largest trace with `N_t ≤ x`, checked against table coverage.
    fn cutoff(&self, x: f64) -> Result<Option<u64>> {
        let Some(t) = max_trace_for(x)? else {
            return Ok(None);
        };
        if t > self.t_max() {
            return Err(Error::InsufficientTable {
                have: self.t_max(),
                need: t,
                x,
            });
        }
        Ok(Some(t))
    }

    /// ψ_Γ(x) = Σ_{N(P₀)ᵏ ≤ x} log N(P₀), summed over ascending `(t₀, k)`.
    pub fn psi(&self, x: f64) -> Result<f64> {
        let Some(t_cut) = self.cutoff(x)? else {
            return Ok(0.0);
        };
        let mut acc = NeumaierSum::new();
        for rec in &self.records[..=(t_cut - FIRST_TRACE) as usize] {
            if rec.primitive_classes == 0 {
                continue;
            }
            let weight = rec.primitive_classes as f64 * rec.log_norm;
            let mut k = 1;
            while trace_power(rec.t, k).is_some_and(|u| u <= t_cut) {
                acc.add(weight);
                k += 1;
            }
        }
        Ok(acc.value())
    }

    /// θ_Γ(x) = Σ_{N(P₀) ≤ x} log N(P₀).
    pub fn theta(&self, x: f64) -> Result<f64> {
        let Some(t_cut) = self.cutoff(x)? else {
            return Ok(0.0);
        };
        let acc: NeumaierSum = self.records[..=(t_cut - FIRST_TRACE) as usize]
            .iter()
            .map(|r| r.primitive_classes as f64 * r.log_norm)
            .collect();
        Ok(acc.value())
    }

    /// π_Γ(x): number of primitive classes with `N(P₀) ≤ x`.
    pub fn pi_count(&self, x: f64) -> Result<u64> {
        let Some(t_cut) = self.cutoff(x)? else {
            return Ok(0);
        };
        Ok(self.records[..=(t_cut - FIRST_TRACE) as usize]
            .iter()
            .map(|r| r.primitive_classes)
            .sum())
    }

    /// `∫ (1/log t) dθ_Γ(t)` up to `x`, as a sum over the jumps of θ_Γ.
    pub fn pi_stieltjes(&self, x: f64) -> Result<f64> {
        let Some(t_cut) = self.cutoff(x)? else {
            return Ok(0.0);
        };
        let acc: NeumaierSum = self.records[..=(t_cut - FIRST_TRACE) as usize]
            .iter()
            .filter(|r| r.primitive_classes > 0)
            .map(|r| {
                let jump = r.primitive_classes as f64 * r.log_norm;
                jump / r.norm.ln()
            })
            .collect();
        Ok(acc.value())
    }

    /// ψ_Γ(x) through `Σ_{n ≥ 1} θ_Γ(x^{1/n})`; a cross-check of [`Self::psi`].
    pub fn psi_via_theta(&self, x: f64) -> Result<f64> {
        let mut acc = NeumaierSum::new();
        let smallest = norm(FIRST_TRACE);
        let mut n = 1;
        loop {
            let root = if n == 1 { x } else { x.powf(1.0 / n as f64) };
            if root < smallest {
                break;
            }
            acc.add(self.theta(root)?);
            n += 1;
        }
        Ok(acc.value())
    }

    pub fn snapshot(&self, x: f64) -> Result<CountSnapshot> {
        Ok(CountSnapshot {
            x,
            pi: self.pi_count(x)?,
            theta: self.theta(x)?,
            psi: self.psi(x)?,
            li: li(x)?,
        })
    }

    /// CSV with header `t,D,h_star,primitive,log_norm,norm`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,D,h_star,primitive,log_norm,norm")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.t,
                r.d,
                r.total_classes,
                r.primitive_classes,
                sig15(r.log_norm),
                sig15(r.norm)
            )?;
        }
        Ok(())
    }
}
