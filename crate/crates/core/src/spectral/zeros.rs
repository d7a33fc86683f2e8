//! Tables of spectral parameters `γ` (zeros `ρ = 1/2 + iγ` of the Selberg zeta
//! function on the critical line).

use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Environment variable naming a zeros file to use instead of the bundled one.
pub const ZEROS_ENV: &str = "GEOLAB_ZEROS";

const BUNDLED: &str = include_str!("../../data/maass_zeros.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralZero {
    pub gamma: f64,
    pub multiplicity: u32,
}

impl SpectralZero {
    pub fn new(gamma: f64, multiplicity: u32) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if multiplicity == 0 {
            return Err(Error::Domain("multiplicity must be at least 1".into()));
        }
        Ok(Self {
            gamma,
            multiplicity,
        })
    }

    /// `|ρ| = √(1/4 + γ²)`.
    pub fn rho_abs(&self) -> f64 {
        (0.25 + self.gamma * self.gamma).sqrt()
    }
}

/// Zeros in strictly ascending `γ`; the conjugate `−γ` of each is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    zeros: Vec<SpectralZero>,
    source: String,
}

impl ZeroTable {
    /// Sorts and merges repeated `γ` into multiplicities.
    pub fn new(mut zeros: Vec<SpectralZero>, source: impl Into<String>) -> Self {
        zeros.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
        let mut merged: Vec<SpectralZero> = Vec::with_capacity(zeros.len());
        for z in zeros {
            match merged.last_mut() {
                Some(last) if last.gamma == z.gamma => last.multiplicity += z.multiplicity,
                _ => merged.push(z),
            }
        }
        Self {
            zeros: merged,
            source: source.into(),
        }
    }

    pub fn empty(source: impl Into<String>) -> Self {
        Self::new(Vec::new(), source)
    }

    /// Simple zeros at the given heights.
    pub fn from_gammas(gammas: &[f64], source: impl Into<String>) -> Result<Self> {
        let zeros = gammas
            .iter()
            .map(|&g| SpectralZero::new(g, 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(zeros, source))
    }

    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        load_zero_table(BUNDLED.as_bytes(), "bundled").expect("bundled zero table is valid")
    }

    /// Reads the file named by `GEOLAB_ZEROS` if set, the bundled table otherwise.
    pub fn from_env_or_bundled() -> Result<Self> {
        match std::env::var_os(ZEROS_ENV) {
            Some(path) => load_zero_file(Path::new(&path)),
            None => Ok(Self::bundled()),
        }
    }

    pub fn zeros(&self) -> &[SpectralZero] {
        &self.zeros
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Largest `γ`, or 0 for an empty table.
    pub fn max_gamma(&self) -> f64 {
        self.zeros.last().map_or(0.0, |z| z.gamma)
    }

    /// Zeros with `γ ≤ height`.
    pub fn up_to(&self, height: f64) -> &[SpectralZero] {
        let end = self.zeros.partition_point(|z| z.gamma <= height);
        &self.zeros[..end]
    }

    /// Errors when a non-empty table stops short of `height`.
    pub fn require_coverage(&self, what: &'static str, height: f64) -> Result<()> {
        if !self.is_empty() && height > self.max_gamma() {
            return Err(Error::Coverage {
                module: "spectral",
                what,
                requested: height,
                coverage: self.max_gamma(),
            });
        }
        Ok(())
    }
}

/// Parses `<gamma> [multiplicity]` lines; `#` starts a comment.
pub fn load_zero_table<R: BufRead>(input: R, source: impl Into<String>) -> Result<ZeroTable> {
    let mut zeros: Vec<SpectralZero> = Vec::new();
    for (index, line) in input.lines().enumerate() {
        let line = line?;
        let number = index + 1;
        let parse_error = |message: String| Error::Parse {
            line: number,
            message,
        };
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let gamma_text = fields.next().unwrap_or("");
        let gamma: f64 = gamma_text
            .parse()
            .map_err(|_| parse_error(format!("invalid gamma {gamma_text:?}")))?;
        let multiplicity = match fields.next() {
            None => 1,
            Some(text) => text
                .parse::<u32>()
                .map_err(|_| parse_error(format!("invalid multiplicity {text:?}")))?,
        };
        if let Some(extra) = fields.next() {
            return Err(parse_error(format!("unexpected field {extra:?}")));
        }
        let zero =
            SpectralZero::new(gamma, multiplicity).map_err(|e| parse_error(e.to_string()))?;
        if let Some(prev) = zeros.last() {
            if zero.gamma <= prev.gamma {
                return Err(parse_error(format!(
                    "gamma {} does not exceed previous {}",
                    zero.gamma, prev.gamma
                )));
            }
        }
        zeros.push(zero);
    }
    Ok(ZeroTable {
        zeros,
        source: source.into(),
    })
}

pub fn load_zero_file(path: &Path) -> Result<ZeroTable> {
    let file = std::fs::File::open(path)?;
    load_zero_table(std::io::BufReader::new(file), path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylDiagnostic {
    pub count: u64,
    /// `12·count/T²`, tending to 1 slowly.
    pub ratio: f64,
    pub valid: bool,
}

/// Compares `#{γ ≤ T}` with the leading Weyl term `T²/12`.
pub fn weyl_check(table: &ZeroTable, height: f64) -> Result<WeylDiagnostic> {
    if height.is_nan() || height <= 0.0 {
        return Err(Error::Domain(format!(
            "height must be positive, got {height}"
        )));
    }
    table.require_coverage("weyl_check height", height)?;
    let count: u64 = table
        .up_to(height)
        .iter()
        .map(|z| u64::from(z.multiplicity))
        .sum();
    let ratio = 12.0 * count as f64 / (height * height);
    Ok(WeylDiagnostic {
        count,
        ratio,
        valid: (0.5..=1.5).contains(&ratio),
    })
}

/// `Σ_{t < |ρ| ≤ t+1} 2·m/|ρ|`, counting both signs of `γ`.
pub fn unit_window_inverse_sum(table: &ZeroTable, t: f64) -> Result<f64> {
    table.require_coverage("unit window", t + 1.0)?;
    let acc: NeumaierSum = table
        .zeros()
        .iter()
        .filter(|z| {
            let r = z.rho_abs();
            t < r && r <= t + 1.0
        })
        .map(|z| 2.0 * f64::from(z.multiplicity) / z.rho_abs())
        .collect();
    Ok(acc.value())
}
