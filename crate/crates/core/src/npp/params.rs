use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::PlantedIncGddInstance;
use crate::pipeline::{KappaProfile, Regime, MEMORY_BUDGET};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NppParams {
    pub n: usize,
    pub eps: f64,
    pub m: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub gamma: f64,
    pub kappa_profile: KappaProfile,
    /// Bound on `|a^T x|` a solution must meet.
    #[serde(with = "crate::pipeline::target_serde")]
    pub kappa_target: f64,
    pub override_m: Option<usize>,
    pub regime: Regime,
    pub gamma_condition: Option<bool>,
}

/// `2^{10 n^{1/(1+eps)}}` before rounding up.
pub fn npp_m_real(n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    Ok(2f64.powf(10.0 * (n as f64).powf(1.0 / (1.0 + eps))))
}

pub fn npp_m(n: usize, eps: f64) -> Result<u64> {
    let m = npp_m_real(n, eps)?.ceil();
    if !m.is_finite() || m > 2f64.powi(53) {
        return Err(Error::MOverflow { n, m });
    }
    Ok(m as u64)
}

/// `κ(m) √m` for the profile.
pub fn npp_kappa_target(
    profile: KappaProfile,
    n: usize,
    m: usize,
    eps: f64,
    sigma2: f64,
) -> Result<f64> {
    let mf = m as f64;
    Ok(match profile {
        KappaProfile::Asymptotic => 2f64.powf(-mf.log2().powf(2.0 + eps)) * mf.sqrt(),
        KappaProfile::LogCorrected { .. } => {
            return Err(Error::InvalidParameter(
                "the log-corrected kappa profile is SBP only".into(),
            ))
        }
        KappaProfile::Fixed { target } => target,
        KappaProfile::EprimeBound => 1.0 / (8.0 * n as f64 * sigma2),
        KappaProfile::Unbounded => f64::INFINITY,
    })
}

pub fn derive_npp_params(
    inst: &PlantedIncGddInstance,
    eps: f64,
    override_m: Option<usize>,
    kappa: KappaProfile,
) -> Result<NppParams> {
    let n = inst.dim();
    let formula_m = npp_m_real(n, eps)?;
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
    let sigma2 = (m as f64).ln();
    let gamma = 4.0 * m as f64 * sigma2;
    Ok(NppParams {
        n,
        eps,
        m,
        sigma1: inst.r / (4.0 * m as f64),
        sigma2,
        gamma,
        kappa_profile: kappa,
        kappa_target: npp_kappa_target(kappa, n, m, eps, sigma2)?,
        override_m,
        regime,
        gamma_condition: inst.lambda_n.map(|l| inst.r > gamma * l),
    })
}
