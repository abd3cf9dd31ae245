use super::params::NppParams;
use super::transcript::build_npp_instance;
use crate::error::{Error, Result};
use crate::lattice::{verify_incgdd_solution, PlantedIncGddInstance, MEMBERSHIP_TOL};
use crate::pipeline::{AttemptRecord, ReductionOutcome, TargetEmbedding};
use crate::rng::SeedTree;
use crate::solvers::{Alphabet, Solver};

/// The NPP counterpart of [`crate::sbp::run_sbp_reduction`]. Wraparound is
/// recorded per attempt but does not by itself fail an attempt; the distance
/// check decides.
pub fn run_npp_reduction(
    inst: &PlantedIncGddInstance,
    params: &NppParams,
    solver: &dyn Solver,
    max_attempts: usize,
    seed: &SeedTree,
) -> Result<ReductionOutcome> {
    if solver.alphabet() != Alphabet::PmOne {
        return Err(Error::InvalidParameter(
            "the NPP reduction takes ±1 solutions only".into(),
        ));
    }
    let n = inst.dim() as f64;
    let mut log = Vec::new();
    let mut found = None;
    for attempt in 0..max_attempts {
        let node = seed.child("attempt", attempt as u64);
        let (npp, transcript) = build_npp_instance(inst, params, &node)?;
        let out = solver.solve(&npp.as_row(), npp.kappa_target, &node.child("solver", 0))?;
        let mut rec = AttemptRecord {
            attempt: attempt + 1,
            solver_value: f64::NAN,
            kappa_target: params.kappa_target,
            kappa_ok: false,
            member: false,
            dist: f64::NAN,
            bound: inst.distance_bound(),
            valid: false,
            eprime_inf: f64::NAN,
            eprime_ok: false,
            embedding: TargetEmbedding::default(),
            guess_hit: true,
            wraparound: None,
            error: None,
        };
        match transcript.extract(&out.x) {
            Ok(ext) => {
                let verdict = verify_incgdd_solution(inst, &ext.s, MEMBERSHIP_TOL);
                rec.solver_value = ext.achieved;
                rec.kappa_ok = ext.achieved <= params.kappa_target;
                rec.member = verdict.member;
                rec.dist = verdict.dist;
                rec.valid = verdict.valid;
                rec.eprime_inf = ext.e_prime.abs();
                rec.eprime_ok = ext.e_prime.abs() <= 1.0 / (8.0 * n);
                rec.wraparound = Some(ext.wraparound);
                if rec.verified() {
                    found = Some((ext.s, out.x.clone()));
                }
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        log.push(rec);
        if found.is_some() {
            break;
        }
    }
    let (s, x) = found.unzip();
    Ok(ReductionOutcome {
        verified: s.is_some(),
        s,
        x,
        attempts: log.len(),
        regime: params.regime,
        guess_space: 1,
        log,
    })
}
