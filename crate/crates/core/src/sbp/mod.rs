//! IncGDD to SBP: sample `A` from a worst-case instance, and map any good
//! enough sign vector back to a lattice point near the target.

mod params;
mod run;
mod transcript;

pub use params::{derive_sbp_params, sbp_kappa_target, sbp_m, sbp_m_real, SbpParams};
pub use run::run_sbp_reduction;
pub use transcript::{
    build_sbp_instance, NormChain, SbpExtraction, SbpInstance, SbpTranscript, SbpTranscriptJson,
};

#[cfg(test)]
mod tests;
