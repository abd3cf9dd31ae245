use std::collections::HashMap;

use proptest::prelude::*;
use sbp_npp::gaussian::{
    mod_uniformity_statistic, sample_discrete_gaussian_1d, sample_normal_vec, DiscreteGaussianSpec,
    SmoothingParams,
};
use sbp_npp::lattice::{generate_planted_instance, PlantedConfig, Profile};
use sbp_npp::rng::SeedTree;
use sbp_npp::stats::{ks_statistic, Reference};

/// `P[k + shift]` for `D_{Z + shift, s}` from a direct sum over a wide range.
fn exact_masses(shift: f64, s: f64) -> HashMap<i64, f64> {
    let span = (12.0 * s).ceil() as i64 + 2;
    let w: Vec<(i64, f64)> = (-span..=span)
        .map(|k| {
            let x = k as f64 + shift;
            (k, (-std::f64::consts::PI * x * x / (s * s)).exp())
        })
        .collect();
    let total: f64 = w.iter().map(|p| p.1).sum();
    w.into_iter().map(|(k, v)| (k, v / total)).collect()
}

#[test]
fn discrete_gaussian_matches_exact_masses() {
    let samples = 100_000;
    for (i, &(shift, s)) in [
        (0.0, 0.8),
        (0.3, 1.0),
        (-0.45, 2.5),
        (0.999, 4.0),
        (0.5, 7.0),
    ]
    .iter()
    .enumerate()
    {
        let spec = DiscreteGaussianSpec::new(vec![shift], s).unwrap();
        let mut rng = SeedTree::root(i as u64).rng("dg");
        let mut counts: HashMap<i64, usize> = HashMap::new();
        for _ in 0..samples {
            let v = sample_discrete_gaussian_1d(shift, s, spec.tail_cut, &mut rng);
            let k = (v - shift).round() as i64;
            assert!((v - shift - k as f64).abs() < 1e-9, "sample off the coset");
            *counts.entry(k).or_default() += 1;
        }
        let exact = exact_masses(shift, s);
        let mut tv = 0.0;
        for (k, p) in &exact {
            let emp = *counts.get(k).unwrap_or(&0) as f64 / samples as f64;
            tv += (emp - p).abs();
        }
        for k in counts.keys() {
            assert!(
                exact.contains_key(k),
                "sample outside the reference support"
            );
        }
        tv /= 2.0;
        assert!(tv <= 0.01, "shift {shift}, s {s}: TV {tv}");
    }
}

#[test]
fn smoothed_gaussian_reduces_to_uniform() {
    for (seed, profile) in [(1u64, Profile::Diagonal), (2, Profile::Rotated)] {
        for n in [2, 3] {
            let inst =
                generate_planted_instance(&PlantedConfig::new(n, profile, 10.0, seed)).unwrap();
            let lambda = inst.lambda_n.unwrap();
            let sigma = SmoothingParams::for_dimension(n).unwrap().sigma_threshold * lambda;
            let node = SeedTree::root(seed).child("smooth", n as u64);
            let d = mod_uniformity_statistic(inst.b(), sigma, 100_000, &node).unwrap();
            assert!(d <= 0.01, "{profile} n={n}: KS {d}");
            let d = mod_uniformity_statistic(
                inst.b(),
                0.05 * lambda,
                100_000,
                &node.child("narrow", 0),
            )
            .unwrap();
            assert!(d > 0.05, "{profile} n={n}: narrow KS {d}");
        }
    }
}

#[test]
fn ks_grid_and_point_mass() {
    for n in [10usize, 100, 1000] {
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&grid, Reference::Uniform01).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }
    assert_eq!(ks_statistic(&[0.5; 7], Reference::Uniform01).unwrap(), 0.5);
    assert!(ks_statistic(&[0.5], Reference::Uniform01).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn continuous_gaussian_moments(seed in any::<u64>(), mu in -5.0f64..5.0, sigma in 0.1f64..10.0) {
        let v = sample_normal_vec(&vec![mu; 4000], sigma, &mut SeedTree::root(seed).rng("n")).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        // 6 standard errors
        prop_assert!((mean - mu).abs() <= 6.0 * sigma / (v.len() as f64).sqrt());
    }

    #[test]
    fn discrete_samples_stay_on_coset(seed in any::<u64>(), shift in -3.0f64..3.0, s in 0.5f64..20.0) {
        let spec = DiscreteGaussianSpec::new(vec![shift], s).unwrap();
        let mut rng = SeedTree::root(seed).rng("c");
        for _ in 0..50 {
            let v = sample_discrete_gaussian_1d(shift, s, spec.tail_cut, &mut rng);
            prop_assert!(((v - shift) - (v - shift).round()).abs() < 1e-9);
            prop_assert!((v - shift).abs() <= spec.tail_cut as f64 + 1.0);
        }
    }
}
