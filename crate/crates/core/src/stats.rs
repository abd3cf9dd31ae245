//! Kolmogorov–Smirnov distances and the JSON record every statistical check
//! emits.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Uniform01,
    StdNormal,
}

impl Reference {
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Reference::Uniform01 => x.clamp(0.0, 1.0),
            Reference::StdNormal => 0.5 * erfc(-x / std::f64::consts::SQRT_2),
        }
    }
}

/// `sup_x |F_n(x) - F(x)|` for the empirical CDF of `samples`.
pub fn ks_statistic<F: Real>(samples: &[F], reference: Reference) -> Result<F> {
    if samples.len() < 2 {
        return Err(Error::Stats(format!(
            "ks_statistic needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let mut xs: Vec<f64> = samples.iter().map(|v| v.as_f64()).collect();
    if xs.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("ks samples"));
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let c = reference.cdf(x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    Ok(F::of(d))
}

/// One line of a statistical check suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub test: String,
    pub n: usize,
    pub m: Option<usize>,
    pub samples: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl StatReport {
    /// Passes when `statistic <= threshold`.
    pub fn at_most(
        test: impl Into<String>,
        n: usize,
        m: Option<usize>,
        samples: usize,
        statistic: f64,
        threshold: f64,
    ) -> Self {
        Self {
            test: test.into(),
            n,
            m,
            samples,
            statistic,
            threshold,
            pass: statistic <= threshold,
        }
    }

    /// Passes when `statistic > threshold`; used for power checks.
    pub fn above(
        test: impl Into<String>,
        n: usize,
        m: Option<usize>,
        samples: usize,
        statistic: f64,
        threshold: f64,
    ) -> Self {
        Self {
            pass: statistic > threshold,
            ..Self::at_most(test, n, m, samples, statistic, threshold)
        }
    }
}
