//! Monte-Carlo checks of the Gaussian facts both reductions lean on.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{sample_discrete_gaussian_1d, sample_normal_vec, DiscreteGaussianSpec};
use super::spectral::spectral_norm;
use crate::error::{Error, Result};
use crate::lattice::Basis;
use crate::matrix::Matrix;
use crate::rng::SeedTree;
use crate::scalar::{frac, l2_norm};
use crate::stats::{ks_statistic, Reference, StatReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEvent {
    pub failures: usize,
    pub rate: f64,
    pub bound: f64,
    /// `bound` plus three binomial standard deviations.
    pub allowed: f64,
    pub pass: bool,
}

impl TailEvent {
    fn new(failures: usize, trials: usize, bound: f64) -> Self {
        let p = bound.min(1.0);
        let allowed = bound + 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
        let rate = failures as f64 / trials as f64;
        Self {
            failures,
            rate,
            bound,
            allowed,
            pass: rate <= allowed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    /// `sigma_max(A) > 3 sqrt(m) / 2` for `A ~ N(0,1)^{n x m}`.
    pub sigma_max: TailEvent,
    /// `||v||_2 >= sqrt(5/2) sqrt(n)` for `v ~ N(0, I_n)`.
    pub norm: TailEvent,
}

impl TailReport {
    pub fn pass(&self) -> bool {
        self.sigma_max.pass && self.norm.pass
    }

    pub fn to_stat_reports(&self) -> Vec<StatReport> {
        vec![
            StatReport::at_most(
                "tail_sigma_max",
                self.n,
                Some(self.m),
                self.trials,
                self.sigma_max.rate,
                self.sigma_max.allowed,
            ),
            StatReport::at_most(
                "tail_norm",
                self.n,
                None,
                self.trials,
                self.norm.rate,
                self.norm.allowed,
            ),
        ]
    }
}

/// Empirical failure rates of the singular-value and chi-squared tail
/// events, each compared with its bound (`2 e^{-n/2}`, `e^{-n/4}`).
pub fn check_gaussian_tails(
    n: usize,
    m: usize,
    trials: usize,
    seed: &SeedTree,
) -> Result<TailReport> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParameter(
            "n and trials must be positive".into(),
        ));
    }
    if m < 16 * n {
        return Err(Error::InvalidParameter(format!(
            "need m >= 16 n, got n = {n}, m = {m}"
        )));
    }
    let sig_cut = 1.5 * (m as f64).sqrt();
    let norm_cut = (2.5 * n as f64).sqrt();
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(bool, bool)> {
            let node = seed.child("tails", i as u64);
            let mut rng = node.rng("A");
            let a = Matrix::new(n, m, sample_normal_vec(&vec![0.0; n * m], 1.0, &mut rng)?)?;
            let v = sample_normal_vec(&vec![0.0; n], 1.0, &mut node.rng("v"))?;
            Ok((spectral_norm(&a)? > sig_cut, l2_norm(&v) >= norm_cut))
        })
        .collect::<Result<_>>()?;
    let sig_fail = outcomes.iter().filter(|o| o.0).count();
    let norm_fail = outcomes.iter().filter(|o| o.1).count();
    Ok(TailReport {
        n,
        m,
        trials,
        sigma_max: TailEvent::new(sig_fail, trials, 2.0 * (-(n as f64) / 2.0).exp()),
        norm: TailEvent::new(norm_fail, trials, (-(n as f64) / 4.0).exp()),
    })
}

/// Draws `v ~ U[0,1)^n`, then `w ~ D_{Z^n + v, sigma sqrt(2 pi)}`, pooling
/// `w_i / sigma` until `samples` values are collected, and returns their KS
/// distance to `N(0, 1)`.
pub fn gaussianization_statistic(
    n: usize,
    sigma: f64,
    samples: usize,
    seed: &SeedTree,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let s = sigma * (2.0 * std::f64::consts::PI).sqrt();
    let spec = DiscreteGaussianSpec::new(vec![], s)?;
    let vectors = samples.div_ceil(n);
    const CHUNK: usize = 1024;
    let pooled: Vec<f64> = (0..vectors.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = seed.child("gaussianization", c as u64).rng("w");
            let count = CHUNK.min(vectors - c * CHUNK);
            let mut out = Vec::with_capacity(count * n);
            for _ in 0..count * n {
                let v: f64 = rng.gen();
                out.push(sample_discrete_gaussian_1d(v, spec.s, spec.tail_cut, &mut rng) / sigma);
            }
            out
        })
        .collect();
    ks_statistic(&pooled[..samples.min(pooled.len())], Reference::StdNormal)
}

/// KS distance to `U[0,1)` of the pooled coordinates of
/// `B^{-1} (N(mu, sigma^2 I) mod P(B))`; `mu` is drawn once from the seed.
pub fn mod_uniformity_statistic(
    basis: &Basis,
    sigma: f64,
    samples: usize,
    seed: &SeedTree,
) -> Result<f64> {
    let n = basis.dim();
    let mut mu_rng = seed.rng("mu");
    let mu: Vec<f64> = (0..n).map(|_| mu_rng.gen_range(-10.0..10.0)).collect();
    let vectors = samples.div_ceil(n);
    const CHUNK: usize = 1024;
    let pooled: Vec<f64> = (0..vectors.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<Vec<f64>> {
            let mut rng = seed.child("mod-uniformity", c as u64).rng("x");
            let count = CHUNK.min(vectors - c * CHUNK);
            let mut out = Vec::with_capacity(count * n);
            for _ in 0..count {
                let x = sample_normal_vec(&mu, sigma, &mut rng)?;
                out.extend(basis.coordinates(&x).into_iter().map(frac));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    ks_statistic(&pooled[..samples.min(pooled.len())], Reference::Uniform01)
}
