use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sqrt(ln(2n(1 + 1/eps)) / (2 pi^2))`: the width above which a Gaussian
/// reduced modulo a lattice with `λ_n = 1` is `eps/2`-close to uniform.
pub fn smoothing_sigma(n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1/2), got {eps}"
        )));
    }
    let pi = std::f64::consts::PI;
    Ok(((2.0 * n as f64 * (1.0 + 1.0 / eps)).ln() / (2.0 * pi * pi)).sqrt())
}

/// Default smoothing error for dimension `n`: `exp(-ln^2 n)`, capped at
/// `0.01`. Without the cap `n <= 2` would give `eps >= 1/2`.
pub fn default_eps(n: usize) -> f64 {
    let l = (n.max(1) as f64).ln();
    (-l * l).exp().min(EPS_CAP)
}

pub const EPS_CAP: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    pub n: usize,
    pub eps: f64,
    pub sigma_threshold: f64,
}

impl SmoothingParams {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        Ok(Self {
            n,
            eps,
            sigma_threshold: smoothing_sigma(n, eps)?,
        })
    }

    pub fn for_dimension(n: usize) -> Result<Self> {
        Self::new(n, default_eps(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_over_pi() {
        let e2 = std::f64::consts::E.powi(2);
        let eps = 1.0 / (e2 / 2.0 - 1.0);
        let s = smoothing_sigma(1, eps).unwrap();
        assert!((s - std::f64::consts::FRAC_1_PI).abs() < 1e-14);
    }

    #[test]
    fn n16_matches_high_precision() {
        // mpmath, 50 digits: eps = exp(-ln(16)^2)
        let eps = (-(16f64.ln()).powi(2)).exp();
        assert!((eps - 4.586_385_078_964_97e-4).abs() < 1e-12);
        let s = smoothing_sigma(16, eps).unwrap();
        assert!((s - 0.751_691_430_003_784).abs() < 1e-12);
        assert_eq!(default_eps(16), eps);
    }

    #[test]
    fn monotone_in_n_and_inverse_eps() {
        assert!(smoothing_sigma(4, 0.01).unwrap() < smoothing_sigma(5, 0.01).unwrap());
        assert!(smoothing_sigma(4, 0.01).unwrap() < smoothing_sigma(4, 0.001).unwrap());
    }

    #[test]
    fn domain_checks() {
        assert!(smoothing_sigma(0, 0.1).is_err());
        assert!(smoothing_sigma(2, 0.5).is_err());
        assert!(smoothing_sigma(2, 0.0).is_err());
        assert_eq!(default_eps(1), 0.01);
        assert_eq!(default_eps(2), 0.01);
    }
}
