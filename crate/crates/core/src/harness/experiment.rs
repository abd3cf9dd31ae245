use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    generate_planted_instance, verify_incgdd_solution, IncGddVerdict, PlantedConfig,
    PlantedIncGddInstance, Profile, MEMBERSHIP_TOL,
};
use crate::npp::{
    build_npp_instance, derive_npp_params, npp_m, run_npp_reduction, NppTranscript,
    NppTranscriptJson,
};
use crate::pipeline::{KappaProfile, ReductionOutcome, Regime};
use crate::rng::SeedTree;
use crate::sbp::{
    build_sbp_instance, derive_sbp_params, run_sbp_reduction, sbp_m, SbpTranscript,
    SbpTranscriptJson,
};
use crate::solvers::{Alphabet, SolverKind, SolverSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Sbp,
    Npp,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Sbp => "sbp",
            Pipeline::Npp => "npp",
        })
    }
}

impl FromStr for Pipeline {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sbp" => Ok(Pipeline::Sbp),
            "npp" => Ok(Pipeline::Npp),
            other => Err(Error::Parse(format!(
                "unknown pipeline '{other}' (expected sbp or npp)"
            ))),
        }
    }
}

/// One batch of seeded reductions.
///
/// Trial `i` draws everything from `SeedTree::root(seed).child("trial", i)`:
/// the planted instance from its `"instance"` leaf and the reduction from
/// its `"reduce"` child, so trials are independent of each other and of the
/// trial count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pipeline: Pipeline,
    pub profile: Profile,
    pub n: usize,
    pub eps: f64,
    pub override_m: Option<usize>,
    pub kappa: KappaProfile,
    pub solver: SolverSpec,
    pub trials: usize,
    pub seed: u64,
    pub max_attempts: usize,
}

impl ExperimentConfig {
    /// Defaults: diagonal instances, `eps = 1`, one attempt, the asymptotic
    /// κ for SBP and the `e'` bound for NPP, brute force for both.
    pub fn new(
        pipeline: Pipeline,
        n: usize,
        override_m: Option<usize>,
        trials: usize,
        seed: u64,
    ) -> Self {
        let (kappa, kind) = match pipeline {
            Pipeline::Sbp => (KappaProfile::Asymptotic, SolverKind::BruteSbp),
            Pipeline::Npp => (KappaProfile::EprimeBound, SolverKind::BruteNpp),
        };
        Self {
            pipeline,
            profile: Profile::Diagonal,
            n,
            eps: 1.0,
            override_m,
            kappa,
            solver: SolverSpec::new(kind),
            trials,
            seed,
            max_attempts: 1,
        }
    }

    /// `m` this configuration runs at.
    pub fn m(&self) -> Result<usize> {
        match self.override_m {
            Some(m) => Ok(m),
            None => {
                let m = match self.pipeline {
                    Pipeline::Sbp => sbp_m(self.n, self.eps)?,
                    Pipeline::Npp => npp_m(self.n, self.eps)?,
                };
                usize::try_from(m).map_err(|_| Error::MOverflow {
                    n: self.n,
                    m: m as f64,
                })
            }
        }
    }

    /// Approximation factor the planted instances are built for:
    /// `4 m ln n` (SBP) or `4 m ln m` (NPP).
    pub fn gamma(&self) -> Result<f64> {
        let m = self.m()? as f64;
        Ok(match self.pipeline {
            Pipeline::Sbp => 4.0 * m * (self.n as f64).ln(),
            Pipeline::Npp => 4.0 * m * m.ln(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.max_attempts == 0 {
            return Err(Error::InvalidParameter(
                "trials and max_attempts must be at least 1".into(),
            ));
        }
        if self.pipeline == Pipeline::Npp && self.solver.alphabet != Alphabet::PmOne {
            return Err(Error::InvalidParameter(
                "the npp pipeline needs a pm_one solver".into(),
            ));
        }
        let m = self.m()?;
        if self.override_m.is_none()
            && (m as f64) * (self.n as f64) > crate::pipeline::MEMORY_BUDGET
        {
            return Err(Error::MOverflow {
                n: self.n,
                m: m as f64,
            });
        }
        self.solver.build()?;
        Ok(())
    }

    pub fn planted_instance(&self, trial: usize) -> Result<PlantedIncGddInstance> {
        let node = SeedTree::root(self.seed).child("trial", trial as u64);
        let cfg = PlantedConfig::new(
            self.n,
            self.profile,
            self.gamma()?,
            node.seed_u64("instance"),
        );
        generate_planted_instance(&cfg)
    }
}

/// One CSV row per trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub attempts: usize,
    pub solver_value: f64,
    #[serde(with = "crate::pipeline::target_serde")]
    pub kappa_target: f64,
    pub dist: f64,
    pub bound: f64,
    pub verified: bool,
    /// Empty for SBP.
    pub wraparound: Option<bool>,
    pub member: bool,
    pub eprime_inf: f64,
    pub regime: Regime,
}

/// Everything needed to recheck a verified trial without rerunning it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "lowercase")]
pub enum Replay {
    Sbp {
        transcript: SbpTranscriptJson,
        alphabet: Alphabet,
        x: Vec<i64>,
    },
    Npp {
        transcript: NppTranscriptJson,
        x: Vec<i64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayVerdict {
    pub kappa_ok: bool,
    pub verdict: IncGddVerdict,
}

impl ReplayVerdict {
    pub fn pass(&self) -> bool {
        self.kappa_ok && self.verdict.valid
    }
}

impl Replay {
    /// Re-extracts `s` from the stored transcript and solution and checks it
    /// against the stored instance.
    pub fn verify(&self) -> Result<ReplayVerdict> {
        match self {
            Replay::Sbp {
                transcript,
                alphabet,
                x,
            } => {
                let tr = SbpTranscript::from_json(transcript)?;
                tr.check_solution(x, *alphabet)?;
                let ext = tr.extract(x)?;
                Ok(ReplayVerdict {
                    kappa_ok: ext.achieved <= tr.params.kappa_target,
                    verdict: verify_incgdd_solution(&tr.inst, &ext.s, MEMBERSHIP_TOL),
                })
            }
            Replay::Npp { transcript, x } => {
                let tr = NppTranscript::from_json(transcript)?;
                let ext = tr.extract(x)?;
                Ok(ReplayVerdict {
                    kappa_ok: ext.achieved <= tr.params.kappa_target,
                    verdict: verify_incgdd_solution(&tr.inst, &ext.s, MEMBERSHIP_TOL),
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub row: TrialRow,
    pub outcome: ReductionOutcome,
    pub replay: Option<Replay>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pipeline: Pipeline,
    pub n: usize,
    pub m: usize,
    pub regime: Regime,
    pub trials: usize,
    pub verified: usize,
    pub success_rate: f64,
    pub mean_attempts: f64,
    /// NPP only: trials whose last attempt was flagged.
    pub wraparound: Option<usize>,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub summary: Summary,
    pub trials: Vec<TrialResult>,
}

impl ExperimentReport {
    pub fn rows(&self) -> impl Iterator<Item = &TrialRow> {
        self.trials.iter().map(|t| &t.row)
    }
}

pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialResult> {
    let inst = cfg.planted_instance(trial)?;
    let node = SeedTree::root(cfg.seed)
        .child("trial", trial as u64)
        .child("reduce", 0);
    let solver = cfg.solver.build()?;
    let (outcome, replay) = match cfg.pipeline {
        Pipeline::Sbp => {
            let params = derive_sbp_params(&inst, cfg.eps, cfg.override_m, cfg.kappa)?;
            let outcome = run_sbp_reduction(&inst, &params, &solver, cfg.max_attempts, &node)?;
            let replay = match (&outcome.x, outcome.last()) {
                (Some(x), Some(rec)) if outcome.verified => {
                    let at = node.child("attempt", (rec.attempt - 1) as u64);
                    let (_, tr) = build_sbp_instance(&inst, &params, rec.embedding, &at)?;
                    Some(Replay::Sbp {
                        transcript: tr.to_json(),
                        alphabet: cfg.solver.alphabet,
                        x: x.clone(),
                    })
                }
                _ => None,
            };
            (outcome, replay)
        }
        Pipeline::Npp => {
            let params = derive_npp_params(&inst, cfg.eps, cfg.override_m, cfg.kappa)?;
            let outcome = run_npp_reduction(&inst, &params, &solver, cfg.max_attempts, &node)?;
            let replay = match (&outcome.x, outcome.last()) {
                (Some(x), Some(rec)) if outcome.verified => {
                    let at = node.child("attempt", (rec.attempt - 1) as u64);
                    let (_, tr) = build_npp_instance(&inst, &params, &at)?;
                    Some(Replay::Npp {
                        transcript: tr.to_json(),
                        x: x.clone(),
                    })
                }
                _ => None,
            };
            (outcome, replay)
        }
    };
    let last = outcome
        .last()
        .ok_or_else(|| Error::InvalidParameter("no attempts were made".into()))?;
    let row = TrialRow {
        trial,
        attempts: outcome.attempts,
        solver_value: last.solver_value,
        kappa_target: last.kappa_target,
        dist: last.dist,
        bound: last.bound,
        verified: outcome.verified,
        wraparound: last.wraparound,
        member: last.member,
        eprime_inf: last.eprime_inf,
        regime: outcome.regime,
    };
    Ok(TrialResult {
        row,
        outcome,
        replay,
    })
}

/// Runs every trial (in parallel) and assembles the report in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let trials: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<_>>()?;
    let verified = trials.iter().filter(|t| t.row.verified).count();
    let attempts: usize = trials.iter().map(|t| t.row.attempts).sum();
    let wraparound = match cfg.pipeline {
        Pipeline::Sbp => None,
        Pipeline::Npp => Some(
            trials
                .iter()
                .filter(|t| t.row.wraparound == Some(true))
                .count(),
        ),
    };
    let summary = Summary {
        pipeline: cfg.pipeline,
        n: cfg.n,
        m: cfg.m()?,
        regime: trials[0].row.regime,
        trials: cfg.trials,
        verified,
        success_rate: verified as f64 / cfg.trials as f64,
        mean_attempts: attempts as f64 / cfg.trials as f64,
        wraparound,
        config: cfg.clone(),
    };
    Ok(ExperimentReport { summary, trials })
}

pub const TRIALS_CSV: &str = "trials.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const REPLAY_DIR: &str = "transcripts";

pub fn write_trials_csv<W: std::io::Write>(report: &ExperimentReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in report.rows() {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `trials.csv`, `summary.json` and one replay file per verified
/// trial under `dir`. Returns the paths written.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join(TRIALS_CSV);
    write_trials_csv(report, fs::File::create(&csv_path)?)?;
    written.push(csv_path);
    let summary_path = dir.join(SUMMARY_JSON);
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&report.summary)? + "\n",
    )?;
    written.push(summary_path);
    let replays: Vec<_> = report
        .trials
        .iter()
        .filter_map(|t| t.replay.as_ref().map(|r| (t.row.trial, r)))
        .collect();
    if !replays.is_empty() {
        let rdir = dir.join(REPLAY_DIR);
        fs::create_dir_all(&rdir)?;
        for (trial, replay) in replays {
            let p = rdir.join(format!("trial_{trial:05}.json"));
            fs::write(&p, serde_json::to_string(replay)?)?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbp_experiment_is_deterministic_and_replays() {
        let cfg = ExperimentConfig::new(Pipeline::Sbp, 2, Some(12), 6, 11);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_trials_csv(&a, &mut ca).unwrap();
        write_trials_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        let text = String::from_utf8(ca).unwrap();
        assert!(text.starts_with(
            "trial,attempts,solver_value,kappa_target,dist,bound,verified,wraparound,member,eprime_inf,regime\n"
        ));
        assert_eq!(text.lines().count(), 7);
        assert!(a.summary.verified > 0);
        for t in &a.trials {
            assert_eq!(t.replay.is_some(), t.row.verified);
            if let Some(r) = &t.replay {
                let back: Replay =
                    serde_json::from_str(&serde_json::to_string(r).unwrap()).unwrap();
                assert!(back.verify().unwrap().pass());
            }
        }
    }

    #[test]
    fn npp_experiment_reports_wraparound_column() {
        let cfg = ExperimentConfig::new(Pipeline::Npp, 2, Some(12), 4, 3);
        let rep = run_experiment(&cfg).unwrap();
        assert!(rep.rows().all(|r| r.wraparound.is_some()));
        assert_eq!(rep.summary.regime, Regime::Override);
        for t in rep.trials.iter().filter(|t| t.row.verified) {
            assert!(t.replay.as_ref().unwrap().verify().unwrap().pass());
        }
    }

    #[test]
    fn tampered_replay_fails() {
        let cfg = ExperimentConfig::new(Pipeline::Sbp, 2, Some(12), 4, 5);
        let rep = run_experiment(&cfg).unwrap();
        let Some(Replay::Sbp {
            transcript,
            alphabet,
            mut x,
        }) = rep.trials.iter().find_map(|t| t.replay.clone())
        else {
            panic!("no verified trial");
        };
        x[3] = -x[3];
        x[5] = -x[5];
        let v = Replay::Sbp {
            transcript,
            alphabet,
            x,
        }
        .verify()
        .unwrap();
        assert!(v.verdict.member);
        assert!(!v.pass());
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let mut cfg = ExperimentConfig::new(Pipeline::Sbp, 4, None, 1, 0);
        cfg.eps = 0.1;
        assert!(matches!(cfg.validate(), Err(Error::MOverflow { .. })));
        let mut cfg = ExperimentConfig::new(Pipeline::Npp, 2, Some(12), 1, 0);
        cfg.solver = SolverSpec::new(SolverKind::BruteSbp).with_alphabet(Alphabet::TernaryNonzero);
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::new(Pipeline::Sbp, 2, Some(12), 0, 0)
            .validate()
            .is_err());
    }
}
