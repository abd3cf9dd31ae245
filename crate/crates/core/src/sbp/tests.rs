use super::*;
use crate::lattice::{
    generate_planted_instance, lattice_membership, verify_incgdd_solution, Basis, PlantedConfig,
    PlantedIncGddInstance, Profile, SublatticePair, MEMBERSHIP_TOL,
};
use crate::pipeline::{KappaProfile, TargetEmbedding};
use crate::rng::SeedTree;
use crate::solvers::{Alphabet, AlwaysFail, Degraded, SolverKind, SolverSpec};
use rand::Rng;

fn planted(n: usize, m: usize, seed: u64) -> PlantedIncGddInstance {
    let gamma = 4.0 * m as f64 * (n as f64).ln();
    generate_planted_instance(&PlantedConfig::new(n, Profile::Diagonal, gamma, seed)).unwrap()
}

#[test]
fn random_sign_vectors_extract_to_lattice_points() {
    for seed in 0..200u64 {
        let n = 2 + (seed % 3) as usize;
        let m = 12;
        let profile = if seed % 2 == 0 {
            Profile::Rotated
        } else {
            Profile::Diagonal
        };
        let inst = generate_planted_instance(&PlantedConfig::new(n, profile, 4.0 * m as f64, seed))
            .unwrap();
        let params = derive_sbp_params(&inst, 1.0, Some(m), KappaProfile::Unbounded).unwrap();
        let node = SeedTree::root(seed).child("t", 0);
        let (_, tr) =
            build_sbp_instance(&inst, &params, TargetEmbedding::default(), &node).unwrap();
        let mut rng = node.rng("x");
        let x: Vec<i64> = (0..m)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        let ext = tr.extract(&x).unwrap();
        assert!(
            lattice_membership(inst.b(), &ext.s, MEMBERSHIP_TOL).is_some(),
            "seed {seed}"
        );
        assert!(tr.mod_identity_holds(&x, &ext.e_prime, 1e-6));
        // W x + e' = 0 by construction
        let wx = crate::pipeline::mul_int(&tr.w(), &x);
        assert!(wx
            .iter()
            .zip(&ext.e_prime)
            .all(|(a, b)| (a + b).abs() < 1e-9));
        assert!(tr.norm_chain(&x, &ext).unwrap().holds);
        // sign trick: x and -x give the same point, bit for bit
        let neg: Vec<i64> = x.iter().map(|v| -v).collect();
        assert_eq!(tr.extract(&neg).unwrap().s, ext.s);
    }
}

#[test]
fn identity_lattice_all_ones() {
    let pair = SublatticePair::from_bases(Basis::identity(3), Basis::identity(3)).unwrap();
    let inst = PlantedIncGddInstance::new(
        pair,
        vec![0.3, -0.2, 0.9],
        50.0,
        None,
        1.0,
        Profile::Custom,
        None,
    )
    .unwrap();
    let params = derive_sbp_params(&inst, 1.0, Some(8), KappaProfile::Unbounded).unwrap();
    let (_, tr) = build_sbp_instance(
        &inst,
        &params,
        TargetEmbedding::default(),
        &SeedTree::root(2),
    )
    .unwrap();
    let x = vec![1; 8];
    let ext = tr.extract(&x).unwrap();
    let ux = crate::pipeline::mul_int(&tr.u, &x);
    for i in 0..3 {
        assert!((ext.s[i] - (ux[i] + ext.e_prime[i])).abs() < 1e-12);
        assert!((ext.s[i] - ext.s[i].round()).abs() < 1e-9);
    }
}

#[test]
fn a_tilde_in_unit_cube_and_a_is_w_over_sigma2() {
    let inst = planted(3, 16, 5);
    let params = derive_sbp_params(&inst, 1.0, Some(16), KappaProfile::Asymptotic).unwrap();
    let (sbp, tr) = build_sbp_instance(
        &inst,
        &params,
        TargetEmbedding::default(),
        &SeedTree::root(5),
    )
    .unwrap();
    assert!(tr.a_tilde.iter().all(|&v| (0.0..1.0).contains(&v)));
    let w = tr.w();
    for (a, w) in sbp.a.iter().zip(w.iter()) {
        assert!((a * params.sigma2 - w).abs() < 1e-12);
    }
}

#[test]
fn brute_force_end_to_end() {
    let solver = SolverSpec::new(SolverKind::BruteSbp).build().unwrap();
    let mut verified = 0;
    for seed in 0..20u64 {
        let inst = planted(2, 16, seed);
        let params = derive_sbp_params(&inst, 1.0, Some(16), KappaProfile::Asymptotic).unwrap();
        let out = run_sbp_reduction(&inst, &params, &solver, 1, &SeedTree::root(seed)).unwrap();
        let rec = out.last().unwrap();
        assert!(rec.member);
        if rec.eprime_ok {
            assert!(rec.valid);
        }
        if out.verified {
            verified += 1;
            let v = verify_incgdd_solution(&inst, out.s.as_ref().unwrap(), MEMBERSHIP_TOL);
            assert!(v.valid);
        }
    }
    assert!(verified >= 16, "{verified}/20");
}

#[test]
fn all_ones_solver_exhausts_attempts() {
    let inst = planted(2, 16, 3);
    let params = derive_sbp_params(&inst, 1.0, Some(16), KappaProfile::Asymptotic).unwrap();
    let out = run_sbp_reduction(&inst, &params, &AlwaysFail, 5, &SeedTree::root(3)).unwrap();
    assert!(!out.verified);
    assert_eq!(out.attempts, 5);
    assert!(out.log.iter().all(|r| !r.kappa_ok && r.member));
}

#[test]
fn degraded_solver_recovers_within_budget() {
    let inner = SolverSpec::new(SolverKind::BruteSbp).build().unwrap();
    let solver = Degraded { inner, p: 0.2 };
    let mut ok = 0;
    for seed in 0..20u64 {
        let inst = planted(2, 12, seed);
        let params = derive_sbp_params(&inst, 1.0, Some(12), KappaProfile::EprimeBound).unwrap();
        let out =
            run_sbp_reduction(&inst, &params, &solver, 40, &SeedTree::root(100 + seed)).unwrap();
        ok += out.verified as usize;
    }
    assert!(ok >= 19, "{ok}/20");
}

#[test]
fn ternary_guessing() {
    let inst = planted(2, 10, 8);
    let params = derive_sbp_params(&inst, 1.0, Some(10), KappaProfile::Unbounded).unwrap();
    let mut hits = 0;
    let trials = 300;
    for i in 0..trials {
        let node = SeedTree::root(8).child("g", i);
        let emb = TargetEmbedding::guess(10, Alphabet::TernaryNonzero, &mut node.rng("guess"));
        let (_, tr) = build_sbp_instance(&inst, &params, emb, &node).unwrap();
        let mut rng = node.rng("x");
        let mut x: Vec<i64> = (0..10).map(|_| rng.gen_range(-1..=1)).collect();
        if x.iter().all(|&v| v == 0) {
            x[0] = 1;
        }
        match tr.extract(&x) {
            Ok(ext) => {
                hits += 1;
                assert!(lattice_membership(inst.b(), &ext.s, MEMBERSHIP_TOL).is_some());
            }
            Err(crate::Error::GuessMiss { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(hits as f64 / trials as f64 >= 0.1);
    assert!(tr_rejects_zero(&inst, &params));
}

fn tr_rejects_zero(inst: &PlantedIncGddInstance, params: &SbpParams) -> bool {
    let (_, tr) =
        build_sbp_instance(inst, params, TargetEmbedding::default(), &SeedTree::root(0)).unwrap();
    tr.extract(&vec![0; params.m]).is_err()
}

#[test]
fn bounded_alphabet_run() {
    let inst = planted(2, 8, 4);
    let params = derive_sbp_params(&inst, 1.0, Some(8), KappaProfile::Unbounded).unwrap();
    let solver = SolverSpec::new(SolverKind::BruteSbp)
        .with_alphabet(Alphabet::Bounded(2))
        .build()
        .unwrap();
    let out = run_sbp_reduction(&inst, &params, &solver, 64, &SeedTree::root(4)).unwrap();
    assert_eq!(out.guess_space, 32);
    assert!(out.verified);
    for r in &out.log {
        assert_eq!(r.guess_hit, r.error.is_none());
    }
}

#[test]
fn transcript_json_roundtrip() {
    let inst = planted(2, 12, 6);
    let params = derive_sbp_params(&inst, 1.0, Some(12), KappaProfile::Asymptotic).unwrap();
    let (_, tr) = build_sbp_instance(
        &inst,
        &params,
        TargetEmbedding::default(),
        &SeedTree::root(6),
    )
    .unwrap();
    let text = serde_json::to_string(&tr.to_json()).unwrap();
    let back = SbpTranscript::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    let x = vec![1, -1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1];
    assert_eq!(back.extract(&x).unwrap(), tr.extract(&x).unwrap());
}
