//! Batch experiments, replayable reports and the statistical check suites.

mod experiment;
mod suites;

pub use experiment::{
    run_experiment, run_trial, write_report, write_trials_csv, ExperimentConfig, ExperimentReport,
    Pipeline, Replay, ReplayVerdict, Summary, TrialResult, TrialRow, REPLAY_DIR, SUMMARY_JSON,
    TRIALS_CSV,
};
pub use suites::{
    coset_uniformity, crt_suite, kk_suite, npp_input_statistics, prime_tuples, rounding_suite,
    run_suite, Suite, KS_SAMPLES, KS_THRESHOLD, POWER_THRESHOLD,
};
