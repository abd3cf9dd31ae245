//! IncGDD to NPP: compress the `n x m` matrix into one vector through a
//! normalized CRT map, and recover a lattice point from a good partition.

mod crt;
mod params;
mod primes;
mod run;
mod transcript;

pub use crt::{
    balanced, balanced_l1, crt_build, crt_exhaustive_check, floor_p, floor_p_numerators, CrtCheck,
    CrtSystem,
};
pub use params::{derive_npp_params, npp_kappa_target, npp_m, npp_m_real, NppParams};
pub use primes::{is_prime, select_primes};
pub use run::run_npp_reduction;
pub use transcript::{
    build_npp_instance, max_grid_modulus, NppExtraction, NppInstance, NppTranscript,
    NppTranscriptJson,
};

use crate::matrix::Matrix;
use crate::pipeline::mul_int;

/// `||(A - ⌊A⌋_p) x||_1` and `(n / min p) ||x||_1`; the first never exceeds
/// the second.
pub fn rounding_error(a: &Matrix<f64>, p: &[u64], x: &[i64]) -> crate::Result<(f64, f64)> {
    let k = floor_p_numerators(a, p)?;
    let resid = Matrix::from_fn(a.rows(), a.cols(), |i, j| {
        a[(i, j)] - k[(i, j)] as f64 / p[i] as f64
    });
    let lhs = crate::scalar::l1_norm(&mul_int(&resid, x));
    let min_p = *p.iter().min().expect("nonempty") as f64;
    let x1: f64 = x.iter().map(|v| v.abs() as f64).sum();
    Ok((lhs, a.rows() as f64 / min_p * x1))
}
