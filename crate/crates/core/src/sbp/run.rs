use super::params::SbpParams;
use super::transcript::build_sbp_instance;
use crate::error::Result;
use crate::lattice::{verify_incgdd_solution, PlantedIncGddInstance, MEMBERSHIP_TOL};
use crate::pipeline::{AttemptRecord, ReductionOutcome, TargetEmbedding};
use crate::rng::SeedTree;
use crate::solvers::{Alphabet, Solver};

/// Build, solve, extract, verify; repeat with fresh randomness until a
/// verified vector appears or `max_attempts` is spent.
///
/// Every attempt extracts and verifies, even when the solver missed its
/// target, so that membership can be audited on all runs.
pub fn run_sbp_reduction(
    inst: &PlantedIncGddInstance,
    params: &SbpParams,
    solver: &dyn Solver,
    max_attempts: usize,
    seed: &SeedTree,
) -> Result<ReductionOutcome> {
    let alphabet = solver.alphabet();
    let n = inst.dim() as f64;
    let mut log = Vec::new();
    for attempt in 0..max_attempts {
        let node = seed.child("attempt", attempt as u64);
        let embedding = match alphabet {
            Alphabet::PmOne => TargetEmbedding::default(),
            _ => TargetEmbedding::guess(params.m, alphabet, &mut node.rng("guess")),
        };
        let (sbp, transcript) = build_sbp_instance(inst, params, embedding, &node)?;
        let out = solver.solve(&sbp.a, sbp.kappa_target, &node.child("solver", 0))?;
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
            embedding,
            guess_hit: false,
            wraparound: None,
            error: None,
        };
        if let Err(e) = transcript.check_solution(&out.x, alphabet) {
            rec.error = Some(e.to_string());
            log.push(rec);
            continue;
        }
        match transcript.extract(&out.x) {
            Ok(ext) => {
                let verdict = verify_incgdd_solution(inst, &ext.s, MEMBERSHIP_TOL);
                rec.solver_value = ext.achieved;
                rec.kappa_ok = ext.achieved <= params.kappa_target;
                rec.member = verdict.member;
                rec.dist = verdict.dist;
                rec.valid = verdict.valid;
                rec.eprime_inf = ext.eprime_inf;
                rec.eprime_ok = ext.eprime_inf <= 1.0 / (8.0 * n);
                rec.guess_hit = true;
                let done = rec.verified();
                log.push(rec);
                if done {
                    return Ok(finish(Some((ext.s, out.x)), log, params, alphabet));
                }
            }
            Err(e) => {
                rec.solver_value = crate::solvers::discrepancy(&sbp.a, &out.x);
                rec.kappa_ok = rec.solver_value <= params.kappa_target;
                rec.error = Some(e.to_string());
                log.push(rec);
            }
        }
    }
    Ok(finish(None, log, params, alphabet))
}

fn finish(
    found: Option<(Vec<f64>, Vec<i64>)>,
    log: Vec<AttemptRecord>,
    params: &SbpParams,
    alphabet: Alphabet,
) -> ReductionOutcome {
    let (s, x) = found.unzip();
    ReductionOutcome {
        verified: s.is_some(),
        s,
        x,
        attempts: log.len(),
        regime: params.regime,
        guess_space: TargetEmbedding::guess_space(params.m, alphabet),
        log,
    }
}
