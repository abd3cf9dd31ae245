use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{check_gaussian_tails, gaussianization_statistic, SmoothingParams};
use crate::lattice::{generate_planted_instance, PlantedConfig, PlantedIncGddInstance, Profile};
use crate::matrix::Matrix;
use crate::npp::{
    build_npp_instance, crt_build, crt_exhaustive_check, derive_npp_params, rounding_error,
    select_primes,
};
use crate::pipeline::{draw_cosets, KappaProfile, TargetEmbedding};
use crate::rng::SeedTree;
use crate::solvers::{brute_force_npp, discrepancy, karmarkar_karp};
use crate::stats::{ks_statistic, Reference, StatReport};

/// Entries pooled for every KS comparison.
pub const KS_SAMPLES: usize = 100_000;
pub const KS_THRESHOLD: f64 = 0.01;
/// A check with too little smoothing must land above this.
pub const POWER_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Uniformity,
    Gaussianization,
    Tails,
    Crt,
    Rounding,
    Kk,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::Uniformity,
        Suite::Gaussianization,
        Suite::Tails,
        Suite::Crt,
        Suite::Rounding,
        Suite::Kk,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Uniformity => "uniformity",
            Suite::Gaussianization => "gaussianization",
            Suite::Tails => "tails",
            Suite::Crt => "crt",
            Suite::Rounding => "rounding",
            Suite::Kk => "kk",
            Suite::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|v| v.to_string() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<StatReport>> {
    let root = SeedTree::root(seed).child(&suite.to_string(), 0);
    match suite {
        Suite::Uniformity => uniformity_suite(&root),
        Suite::Gaussianization => [1, 4, 16]
            .into_iter()
            .map(|n| {
                let sigma = SmoothingParams::for_dimension(n)?.sigma_threshold;
                let d =
                    gaussianization_statistic(n, sigma, KS_SAMPLES, &root.child("n", n as u64))?;
                Ok(StatReport::at_most(
                    "gaussianization_ks",
                    n,
                    None,
                    KS_SAMPLES,
                    d,
                    KS_THRESHOLD,
                ))
            })
            .collect(),
        Suite::Tails => Ok(check_gaussian_tails(16, 256, 10_000, &root)?.to_stat_reports()),
        Suite::Crt => crt_suite(2310),
        Suite::Rounding => rounding_suite(1000, &root),
        Suite::Kk => kk_suite(1000, 20, &root),
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::EACH {
                out.extend(run_suite(s, seed)?);
            }
            Ok(out)
        }
    }
}

/// KS distance of the pooled entries of `Ã` to `U[0,1)` over fresh draws at
/// width `sigma1`.
pub fn coset_uniformity(
    inst: &PlantedIncGddInstance,
    m: usize,
    sigma1: f64,
    samples: usize,
    seed: &SeedTree,
) -> Result<f64> {
    let per = inst.dim() * m;
    let draws = samples.div_ceil(per);
    let pooled: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let d = draw_cosets(
                inst,
                m,
                sigma1,
                TargetEmbedding::default(),
                &seed.child("draw", i as u64),
            )?;
            Ok(d.a_tilde.as_slice().to_vec())
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    ks_statistic(&pooled[..samples], Reference::Uniform01)
}

/// KS distances of the pooled NPP `y` to `U[0,1)` and `a` to `N(0,1)`; when
/// `sigma1` is given it replaces the derived width.
pub fn npp_input_statistics(
    inst: &PlantedIncGddInstance,
    m: usize,
    sigma1: Option<f64>,
    samples: usize,
    seed: &SeedTree,
) -> Result<(f64, f64)> {
    let mut params = derive_npp_params(inst, 1.0, Some(m), KappaProfile::Unbounded)?;
    if let Some(s) = sigma1 {
        params.sigma1 = s;
    }
    let draws = samples.div_ceil(m);
    let pooled: Vec<(Vec<f64>, Vec<f64>)> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let (npp, tr) = build_npp_instance(inst, &params, &seed.child("draw", i as u64))?;
            Ok((tr.y, npp.a))
        })
        .collect::<Result<_>>()?;
    let (y, a): (Vec<Vec<f64>>, Vec<Vec<f64>>) = pooled.into_iter().unzip();
    let (y, a) = (y.concat(), a.concat());
    Ok((
        ks_statistic(&y[..samples], Reference::Uniform01)?,
        ks_statistic(&a[..samples], Reference::StdNormal)?,
    ))
}

fn uniformity_suite(root: &SeedTree) -> Result<Vec<StatReport>> {
    let mut out = Vec::new();

    let (n, m) = (4, 355);
    let gamma = 4.0 * m as f64 * (n as f64).ln();
    let inst = generate_planted_instance(&PlantedConfig::new(
        n,
        Profile::Rotated,
        gamma,
        root.seed_u64("sbp"),
    ))?;
    let lambda = inst.lambda_n.expect("planted");
    let sigma1 = inst.r / (4.0 * m as f64);
    let threshold = SmoothingParams::for_dimension(n)?.sigma_threshold * lambda;
    out.push(StatReport::above(
        "sbp_sigma1_over_smoothing",
        n,
        Some(m),
        1,
        sigma1,
        threshold,
    ));
    let d = coset_uniformity(&inst, m, sigma1, KS_SAMPLES, &root.child("sbp-smooth", 0))?;
    out.push(StatReport::at_most(
        "sbp_a_tilde_uniform_ks",
        n,
        Some(m),
        KS_SAMPLES,
        d,
        KS_THRESHOLD,
    ));
    let d = coset_uniformity(
        &inst,
        m,
        0.05 * lambda,
        KS_SAMPLES,
        &root.child("sbp-narrow", 0),
    )?;
    out.push(StatReport::above(
        "sbp_a_tilde_narrow_ks",
        n,
        Some(m),
        KS_SAMPLES,
        d,
        POWER_THRESHOLD,
    ));

    let (n, m) = (2, 64);
    let gamma = 4.0 * m as f64 * (m as f64).ln();
    let inst = generate_planted_instance(&PlantedConfig::new(
        n,
        Profile::Rotated,
        gamma,
        root.seed_u64("npp"),
    ))?;
    let lambda = inst.lambda_n.expect("planted");
    let sigma1 = inst.r / (4.0 * m as f64);
    let threshold = SmoothingParams::for_dimension(n)?.sigma_threshold * lambda;
    out.push(StatReport::above(
        "npp_sigma1_over_smoothing",
        n,
        Some(m),
        1,
        sigma1,
        threshold,
    ));
    let (dy, da) = npp_input_statistics(&inst, m, None, KS_SAMPLES, &root.child("npp-smooth", 0))?;
    out.push(StatReport::at_most(
        "npp_y_uniform_ks",
        n,
        Some(m),
        KS_SAMPLES,
        dy,
        KS_THRESHOLD,
    ));
    out.push(StatReport::at_most(
        "npp_a_normal_ks",
        n,
        Some(m),
        KS_SAMPLES,
        da,
        KS_THRESHOLD,
    ));
    let (dy, _) = npp_input_statistics(
        &inst,
        m,
        Some(0.05 * lambda),
        KS_SAMPLES,
        &root.child("npp-narrow", 0),
    )?;
    out.push(StatReport::above(
        "npp_y_narrow_ks",
        n,
        Some(m),
        KS_SAMPLES,
        dy,
        POWER_THRESHOLD,
    ));
    Ok(out)
}

fn primes_up_to(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&p| crate::npp::is_prime(p)).collect()
}

/// Every increasing tuple of primes with product at most `max_q`.
pub fn prime_tuples(max_q: u64) -> Vec<Vec<u64>> {
    fn extend(primes: &[u64], max_q: u64, cur: &mut Vec<u64>, q: u64, out: &mut Vec<Vec<u64>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for (i, &p) in primes.iter().enumerate() {
            if q * p > max_q {
                break;
            }
            cur.push(p);
            extend(&primes[i + 1..], max_q, cur, q * p, out);
            cur.pop();
        }
    }
    let primes = primes_up_to(max_q);
    let mut out = Vec::new();
    extend(&primes, max_q, &mut Vec::new(), 1, &mut out);
    out
}

/// Exhaustive bijectivity, homomorphism and roundtrip over all prime tuples
/// with `q <= max_q`; the statistic is the number of failing tuples.
pub fn crt_suite(max_q: u64) -> Result<Vec<StatReport>> {
    let tuples = prime_tuples(max_q);
    let failures: Vec<(bool, bool, bool)> = tuples
        .par_iter()
        .map(|t| {
            let c = crt_exhaustive_check(&crt_build(t)?)?;
            Ok((c.bijective, c.homomorphic, c.roundtrip))
        })
        .collect::<Result<_>>()?;
    let count =
        |f: fn(&(bool, bool, bool)) -> bool| failures.iter().filter(|x| !f(x)).count() as f64;
    let n = tuples.iter().map(Vec::len).max().unwrap_or(0);
    Ok(vec![
        StatReport::at_most(
            "crt_bijective_failures",
            n,
            None,
            tuples.len(),
            count(|x| x.0),
            0.0,
        ),
        StatReport::at_most(
            "crt_homomorphic_failures",
            n,
            None,
            tuples.len(),
            count(|x| x.1),
            0.0,
        ),
        StatReport::at_most(
            "crt_roundtrip_failures",
            n,
            None,
            tuples.len(),
            count(|x| x.2),
            0.0,
        ),
    ])
}

/// Random `(A, x)` pairs with `n <= 4`, `m <= 32`; counts violations of the
/// `⌊·⌋_p` rounding bound and of `n m / min p <= 1/16`.
pub fn rounding_suite(cases: usize, root: &SeedTree) -> Result<Vec<StatReport>> {
    let results: Vec<(bool, bool)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.child("case", i as u64).rng("rounding");
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(n.max(2)..=32);
            let p = select_primes(n, m)?;
            let a = Matrix::from_fn(n, m, |_, _| rng.gen::<f64>());
            let x: Vec<i64> = (0..m)
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect();
            let (lhs, rhs) = rounding_error(&a, &p, &x)?;
            let min_p = *p.iter().min().expect("n >= 1");
            Ok((lhs <= rhs, 16 * n * m <= min_p as usize))
        })
        .collect::<Result<_>>()?;
    let bad_round = results.iter().filter(|r| !r.0).count() as f64;
    let bad_primes = results.iter().filter(|r| !r.1).count() as f64;
    Ok(vec![
        StatReport::at_most("rounding_bound_violations", 4, None, cases, bad_round, 0.0),
        StatReport::at_most(
            "prime_selection_violations",
            4,
            None,
            cases,
            bad_primes,
            0.0,
        ),
    ])
}

/// Karmarkar–Karp against brute force on integer-valued inputs (so sums are
/// exact): counts cases where KK beats the optimum or its `x` does not
/// reproduce its value, plus the fixed `(4, 5, 6, 7, 8)` case.
pub fn kk_suite(cases: usize, max_m: usize, root: &SeedTree) -> Result<Vec<StatReport>> {
    let results: Vec<(bool, bool)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.child("case", i as u64).rng("kk");
            let m = rng.gen_range(2..=max_m);
            let a: Vec<f64> = (0..m)
                .map(|_| rng.gen_range(1..=1u32 << 20) as f64)
                .collect();
            let kk = karmarkar_karp(&a)?;
            let best = brute_force_npp(&a)?;
            let row = Matrix::new(1, m, a)?;
            Ok((kk.value >= best.value, discrepancy(&row, &kk.x) == kk.value))
        })
        .collect::<Result<_>>()?;
    let below = results.iter().filter(|r| !r.0).count() as f64;
    let mismatch = results.iter().filter(|r| !r.1).count() as f64;
    let fixed = [4.0, 5.0, 6.0, 7.0, 8.0];
    let kk = karmarkar_karp(&fixed)?;
    let best = brute_force_npp(&fixed)?;
    let fixed_err = (kk.value - 2.0).abs() + best.value.abs();
    Ok(vec![
        StatReport::at_most("kk_below_optimum", max_m, None, cases, below, 0.0),
        StatReport::at_most("kk_value_mismatch", max_m, None, cases, mismatch, 0.0),
        StatReport::at_most("kk_fixed_case_error", 5, None, 1, fixed_err, 0.0),
    ])
}
