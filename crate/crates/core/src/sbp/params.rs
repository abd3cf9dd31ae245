use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::PlantedIncGddInstance;
use crate::pipeline::{KappaProfile, Regime, MEMORY_BUDGET};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpParams {
    pub n: usize,
    pub eps: f64,
    pub m: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub gamma: f64,
    pub kappa_profile: KappaProfile,
    /// Bound on `||A x||_inf` a solution must meet.
    #[serde(with = "crate::pipeline::target_serde")]
    pub kappa_target: f64,
    pub override_m: Option<usize>,
    pub regime: Regime,
    /// `r > gamma * λ_n`, when `λ_n` is known.
    pub gamma_condition: Option<bool>,
}

/// `(8 ln(n) n^{3/2 + eps})^{1/eps}` before rounding up.
pub fn sbp_m_real(n: usize, eps: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "the SBP reduction needs n >= 2 (sigma2 = ln n), got {n}"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let n = n as f64;
    Ok((8.0 * n.ln() * n.powf(1.5 + eps)).powf(1.0 / eps))
}

/// The formula value of `m`, rounded up; errors past `2^53`.
pub fn sbp_m(n: usize, eps: f64) -> Result<u64> {
    let m = sbp_m_real(n, eps)?.ceil();
    if !m.is_finite() || m > 2f64.powi(53) {
        return Err(Error::MOverflow { n, m });
    }
    Ok(m as u64)
}

/// `κ √m` for the given profile at `(n, m)`.
pub fn sbp_kappa_target(
    profile: KappaProfile,
    n: usize,
    m: usize,
    eps: f64,
    sigma2: f64,
) -> Result<f64> {
    let (nf, mf) = (n as f64, m as f64);
    Ok(match profile {
        KappaProfile::Asymptotic => (nf / mf).powf(0.5 + eps) * mf.sqrt(),
        KappaProfile::LogCorrected { c } => {
            let x = mf / nf;
            if x <= 1.0 {
                return Err(Error::InvalidParameter(
                    "log-corrected kappa needs m > n".into(),
                ));
            }
            mf.sqrt() / (x.sqrt() * x.ln().powf(1.0 + c))
        }
        KappaProfile::Fixed { target } => target,
        KappaProfile::EprimeBound => 1.0 / (8.0 * nf * sigma2),
        KappaProfile::Unbounded => f64::INFINITY,
    })
}

/// Parameters for one instance. Without `override_m` the formula `m` must
/// fit in [`MEMORY_BUDGET`] entries of `A`.
pub fn derive_sbp_params(
    inst: &PlantedIncGddInstance,
    eps: f64,
    override_m: Option<usize>,
    kappa: KappaProfile,
) -> Result<SbpParams> {
    let n = inst.dim();
    let formula_m = sbp_m_real(n, eps)?;
    let (m, regime) = match override_m {
        Some(m) => (m, Regime::Override),
        None => {
            let m = formula_m.ceil();
            if !(m * n as f64 <= MEMORY_BUDGET) {
                return Err(Error::MOverflow { n, m });
            }
            (m as usize, Regime::Formula)
        }
    };
    if m < n.max(2) {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must be at least max(n, 2) = {}",
            n.max(2)
        )));
    }
    let sigma2 = (n as f64).ln();
    let gamma = 4.0 * m as f64 * sigma2;
    let kappa_target = sbp_kappa_target(kappa, n, m, eps, sigma2)?;
    Ok(SbpParams {
        n,
        eps,
        m,
        sigma1: inst.r / (4.0 * m as f64),
        sigma2,
        gamma,
        kappa_profile: kappa,
        kappa_target,
        override_m,
        regime,
        gamma_condition: inst.lambda_n.map(|l| inst.r > gamma * l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Basis, Profile, SublatticePair};

    fn inst(n: usize, r: f64) -> PlantedIncGddInstance {
        let pair =
            SublatticePair::from_bases(Basis::identity(n), Basis::diagonal(&vec![2; n]).unwrap())
                .unwrap();
        PlantedIncGddInstance::new(
            pair,
            vec![0.0; n],
            r,
            Some(1.0),
            1.0,
            Profile::Diagonal,
            None,
        )
        .unwrap()
    }

    #[test]
    fn n4_eps1() {
        let p = derive_sbp_params(&inst(4, 1420.0), 1.0, None, KappaProfile::Asymptotic).unwrap();
        assert_eq!(p.m, 355);
        assert_eq!(p.sigma1, 1.0);
        assert!((p.sigma2 - 4f64.ln()).abs() < 1e-15);
        assert!((p.gamma - 1_968.537_992_790_245).abs() < 1e-9);
        assert_eq!(p.regime, Regime::Formula);
        assert_eq!(p.gamma_condition, Some(false));
    }

    #[test]
    fn n16_needs_override() {
        assert_eq!(sbp_m(16, 0.5).unwrap(), 32_242_656);
        let err =
            derive_sbp_params(&inst(16, 10.0), 0.5, None, KappaProfile::Asymptotic).unwrap_err();
        assert!(matches!(err, Error::MOverflow { n: 16, .. }));
        let p =
            derive_sbp_params(&inst(16, 10.0), 0.5, Some(64), KappaProfile::Asymptotic).unwrap();
        assert_eq!((p.m, p.regime), (64, Regime::Override));
    }

    #[test]
    fn override_sigma1() {
        let p = derive_sbp_params(&inst(2, 96.0), 1.0, Some(24), KappaProfile::Asymptotic).unwrap();
        assert_eq!(p.sigma1, 1.0);
        assert!((p.gamma - 4.0 * 24.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn kappa_targets() {
        let t = sbp_kappa_target(KappaProfile::Asymptotic, 2, 16, 1.0, 2f64.ln()).unwrap();
        assert!((t - 0.176_776_695_296_636_9).abs() < 1e-15);
        let e = sbp_kappa_target(KappaProfile::EprimeBound, 2, 16, 1.0, 2f64.ln()).unwrap();
        assert!((e * 2f64.ln() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_one_rejected() {
        assert!(sbp_m(1, 1.0).is_err());
        assert!(derive_sbp_params(&inst(2, 2.0), 1.0, Some(1), KappaProfile::Asymptotic).is_err());
    }
}
