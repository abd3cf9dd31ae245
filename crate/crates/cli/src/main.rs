use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use sbp_npp::harness::{
    self, run_experiment, run_trial, write_report, ExperimentConfig, Pipeline, Replay, Suite,
};
use sbp_npp::lattice::Profile;
use sbp_npp::npp::{build_npp_instance, derive_npp_params, NppInstance};
use sbp_npp::pipeline::{KappaProfile, TargetEmbedding};
use sbp_npp::rng::SeedTree;
use sbp_npp::sbp::{build_sbp_instance, derive_sbp_params, SbpInstance};
use sbp_npp::solvers::{discrepancy, Alphabet, SolverKind, SolverSpec};
use sbp_npp::Mat;

/// Reductions from planted lattice instances to symmetric binary perceptron
/// and number partitioning, with solvers, replayable transcripts and
/// statistical checks.
#[derive(Parser, Debug)]
#[command(name = "sbp-npp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a planted instance and the solver-facing problem built from it.
    Gen(Common),
    /// Run one reduction end to end; exit 0 iff it verifies.
    Reduce(Common),
    /// Run a solver on a problem file; exit 0 iff it meets the target.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Problem JSON as written by `gen`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Recheck a stored transcript and solution; exit 0 iff valid.
    Verify {
        /// Replay JSON as written by `reduce` or `experiment`.
        replay: PathBuf,
        /// Solution JSON from `solve`, replacing the stored one.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Run statistical check suites; exit 0 iff all pass.
    Stats {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "SBP_NPP_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Run a batch of trials; exit 0 iff every verified trial replays and the
    /// success rate reaches `--min-success-rate`.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        min_success_rate: f64,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, default_value = "sbp")]
    pipeline: Pipeline,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Use this `m` instead of the asymptotic formula.
    #[arg(long)]
    override_m: Option<usize>,
    /// brute_sbp, brute_npp, kk, random or always_fail; defaults to brute
    /// force for the pipeline.
    #[arg(long)]
    solver: Option<SolverKind>,
    /// pm_one, ternary_nonzero or bounded:B.
    #[arg(long, default_value = "pm_one")]
    alphabet: Alphabet,
    /// Draws for the random solver.
    #[arg(long, default_value_t = 4096)]
    budget: u64,
    /// asymptotic, eprime, unbounded, fixed:V or log:C; defaults to
    /// asymptotic for sbp and eprime for npp.
    #[arg(long)]
    kappa: Option<KappaProfile>,
    #[arg(long, default_value = "diagonal")]
    profile: Profile,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    max_attempts: usize,
    #[arg(long, env = "SBP_NPP_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn config(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            self.pipeline,
            self.n,
            self.override_m,
            self.trials,
            self.seed,
        );
        cfg.eps = self.eps;
        cfg.profile = self.profile;
        cfg.max_attempts = self.max_attempts;
        if let Some(k) = self.kappa {
            cfg.kappa = k;
        }
        let kind = self.solver.unwrap_or(cfg.solver.kind);
        cfg.solver = SolverSpec::new(kind)
            .with_alphabet(self.alphabet)
            .with_budget(self.budget);
        cfg
    }
}

/// Solver-facing problem, tagged by pipeline.
#[derive(Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "lowercase")]
enum Problem {
    Sbp(SbpInstance),
    Npp(NppInstance),
}

#[derive(Serialize, Deserialize)]
struct Solution {
    x: Vec<i64>,
    value: f64,
    #[serde(with = "sbp_npp::pipeline::target_serde")]
    kappa_target: f64,
    kappa_ok: bool,
    solver: String,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn gen(common: &Common) -> Result<bool> {
    let cfg = common.config();
    cfg.validate()?;
    let inst = cfg.planted_instance(0)?;
    let node = SeedTree::root(cfg.seed)
        .child("trial", 0)
        .child("reduce", 0)
        .child("attempt", 0);
    let problem = match cfg.pipeline {
        Pipeline::Sbp => {
            let params = derive_sbp_params(&inst, cfg.eps, cfg.override_m, cfg.kappa)?;
            Problem::Sbp(build_sbp_instance(&inst, &params, TargetEmbedding::default(), &node)?.0)
        }
        Pipeline::Npp => {
            let params = derive_npp_params(&inst, cfg.eps, cfg.override_m, cfg.kappa)?;
            Problem::Npp(build_npp_instance(&inst, &params, &node)?.0)
        }
    };
    write_json(&common.out.join("instance.json"), &inst.to_json())?;
    write_json(&common.out.join("problem.json"), &problem)?;
    println!(
        "wrote {} and {}",
        common.out.join("instance.json").display(),
        common.out.join("problem.json").display()
    );
    Ok(true)
}

fn reduce(common: &Common) -> Result<bool> {
    let cfg = common.config();
    cfg.validate()?;
    let result = run_trial(&cfg, 0)?;
    println!("{}", serde_json::to_string_pretty(&result.row)?);
    if let Some(replay) = &result.replay {
        let path = common.out.join("replay.json");
        write_json(&path, replay)?;
        println!("wrote {}", path.display());
    } else {
        for rec in &result.outcome.log {
            if let Some(e) = &rec.error {
                eprintln!("attempt {}: {e}", rec.attempt);
            }
        }
    }
    Ok(result.row.verified)
}

fn solve(common: &Common, input: &Path) -> Result<bool> {
    let problem: Problem = read_json(input)?;
    let (a, kappa_target, default_kind) = match problem {
        Problem::Sbp(p) => (p.a, p.kappa_target, SolverKind::BruteSbp),
        Problem::Npp(p) => (p.as_row(), p.kappa_target, SolverKind::BruteNpp),
    };
    let spec = SolverSpec::new(common.solver.unwrap_or(default_kind))
        .with_alphabet(common.alphabet)
        .with_budget(common.budget);
    let solver = spec.build()?;
    let out = solver.solve(
        &a,
        kappa_target,
        &SeedTree::root(common.seed).child("solve", 0),
    )?;
    let value = discrepancy::<f64>(&a as &Mat, &out.x);
    let solution = Solution {
        x: out.x,
        value,
        kappa_target,
        kappa_ok: value <= kappa_target,
        solver: out.solver,
    };
    let path = common.out.join("solution.json");
    write_json(&path, &solution)?;
    println!(
        "value {value:.6e} target {kappa_target:.6e} -> {}",
        path.display()
    );
    Ok(solution.kappa_ok)
}

fn verify(replay: &Path, solution: Option<&Path>) -> Result<bool> {
    let mut replay: Replay = read_json(replay)?;
    if let Some(path) = solution {
        let sol: Solution = read_json(path)?;
        match &mut replay {
            Replay::Sbp { x, .. } | Replay::Npp { x, .. } => *x = sol.x,
        }
    }
    let v = replay.verify()?;
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(v.pass())
}

fn stats(suite: Suite, seed: u64, out: &Path) -> Result<bool> {
    let reports = harness::run_suite(suite, seed)?;
    for r in &reports {
        println!(
            "{:<32} n={:<3} stat={:<12.6} threshold={:<12.6} {}",
            r.test,
            r.n,
            r.statistic,
            r.threshold,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    write_json(&out.join(format!("stats_{suite}.json")), &reports)?;
    Ok(reports.iter().all(|r| r.pass))
}

fn experiment(common: &Common, min_success_rate: f64) -> Result<bool> {
    let cfg = common.config();
    let report = run_experiment(&cfg)?;
    let written = write_report(&report, &common.out)?;
    let mut replays_ok = true;
    for t in &report.trials {
        if let Some(r) = &t.replay {
            if !r.verify()?.pass() {
                eprintln!("trial {} does not replay", t.row.trial);
                replays_ok = false;
            }
        }
    }
    let s = &report.summary;
    println!(
        "{} n={} m={} ({}): {}/{} verified, success rate {:.3}, mean attempts {:.2}{}",
        s.pipeline,
        s.n,
        s.m,
        s.regime,
        s.verified,
        s.trials,
        s.success_rate,
        s.mean_attempts,
        s.wraparound
            .map(|w| format!(", {w} wraparound"))
            .unwrap_or_default()
    );
    println!(
        "wrote {} files under {}",
        written.len(),
        common.out.display()
    );
    Ok(replays_ok && s.success_rate >= min_success_rate)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Gen(c) => gen(c),
        Command::Reduce(c) => reduce(c),
        Command::Solve { common, input } => solve(common, input),
        Command::Verify { replay, solution } => verify(replay, solution.as_deref()),
        Command::Stats { suite, seed, out } => stats(*suite, *seed, out),
        Command::Experiment {
            common,
            min_success_rate,
        } => {
            if !(0.0..=1.0).contains(min_success_rate) {
                bail!("--min-success-rate must lie in [0, 1]");
            }
            experiment(common, *min_success_rate)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
