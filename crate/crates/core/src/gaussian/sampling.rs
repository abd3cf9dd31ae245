use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// I.i.d. `N(mu_i, sigma^2)` coordinates.
pub fn sample_normal_vec<R: Rng + ?Sized>(mu: &[f64], sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    Ok(mu
        .iter()
        .map(|&m| {
            let z: f64 = StandardNormal.sample(rng);
            m + sigma * z
        })
        .collect())
}

/// Parameters of `D_{Z^n + shift, s}` truncated to `k in [-tail_cut, tail_cut]`.
///
/// With `tail_cut >= ceil(8 s)` every omitted point has mass below
/// `exp(-pi (8s - 1)^2 / s^2)`, which is far under `2^-64` once `s >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteGaussianSpec {
    pub shift: Vec<f64>,
    pub s: f64,
    pub tail_cut: u32,
}

impl DiscreteGaussianSpec {
    pub fn new(shift: Vec<f64>, s: f64) -> Result<Self> {
        let tail_cut = min_tail_cut(s)?;
        Self::with_tail_cut(shift, s, tail_cut)
    }

    pub fn with_tail_cut(shift: Vec<f64>, s: f64, tail_cut: u32) -> Result<Self> {
        let need = min_tail_cut(s)?;
        if tail_cut < need {
            return Err(Error::InvalidParameter(format!(
                "tail_cut {tail_cut} below ceil(8s) = {need}"
            )));
        }
        if shift.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("discrete gaussian shift"));
        }
        Ok(Self { shift, s, tail_cut })
    }
}

fn min_tail_cut(s: f64) -> Result<u32> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "scale s must be positive, got {s}"
        )));
    }
    Ok((8.0 * s).ceil().max(1.0) as u32)
}

/// Unnormalized masses `exp(-pi (shift + k)^2 / s^2)` for `k = -tail_cut..=tail_cut`.
pub fn truncated_weights(shift: f64, s: f64, tail_cut: u32) -> Vec<f64> {
    let t = tail_cut as i64;
    let c = std::f64::consts::PI / (s * s);
    (-t..=t)
        .map(|k| {
            let x = shift + k as f64;
            (-c * x * x).exp()
        })
        .collect()
}

/// One coordinate of `D_{Z + shift, s}` by inversion of the truncated CDF.
pub fn sample_discrete_gaussian_1d<R: Rng + ?Sized>(
    shift: f64,
    s: f64,
    tail_cut: u32,
    rng: &mut R,
) -> f64 {
    let w = truncated_weights(shift, s, tail_cut);
    let total: f64 = w.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut idx = w.len() - 1;
    for (i, wi) in w.iter().enumerate() {
        acc += wi;
        if u < acc {
            idx = i;
            break;
        }
    }
    shift + (idx as i64 - tail_cut as i64) as f64
}

/// A sample of `D_{Z^n + shift, s}`, coordinate by coordinate.
pub fn sample_discrete_gaussian_coset<R: Rng + ?Sized>(
    spec: &DiscreteGaussianSpec,
    rng: &mut R,
) -> Vec<f64> {
    spec.shift
        .iter()
        .map(|&c| sample_discrete_gaussian_1d(c, spec.s, spec.tail_cut, rng))
        .collect()
}

/// Integer offsets `k` with `sample = shift + k`; used where the offset must
/// be kept exactly.
pub fn sample_discrete_gaussian_offsets<R: Rng + ?Sized>(
    spec: &DiscreteGaussianSpec,
    rng: &mut R,
) -> Vec<i64> {
    spec.shift
        .iter()
        .map(|&c| {
            let v = sample_discrete_gaussian_1d(c, spec.s, spec.tail_cut, rng);
            (v - c).round() as i64
        })
        .collect()
}
