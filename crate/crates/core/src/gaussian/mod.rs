//! Continuous and discrete Gaussians, smoothing thresholds and tail checks.

mod checks;
mod sampling;
mod smoothing;
mod spectral;

pub use checks::{
    check_gaussian_tails, gaussianization_statistic, mod_uniformity_statistic, TailEvent,
    TailReport,
};
pub use sampling::{
    sample_discrete_gaussian_1d, sample_discrete_gaussian_coset, sample_discrete_gaussian_offsets,
    sample_normal_vec, truncated_weights, DiscreteGaussianSpec,
};
pub use smoothing::{default_eps, smoothing_sigma, SmoothingParams, EPS_CAP};
pub use spectral::spectral_norm;
