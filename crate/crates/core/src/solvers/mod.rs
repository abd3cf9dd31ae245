//! Average-case SBP / NPP solvers behind a common interface.
//!
//! A solver sees the instance and the κ target and returns its best `x`;
//! the caller decides success. Every solver is deterministic given its input
//! and seed.

mod brute;
mod kk;
mod random;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use brute::{brute_force_npp, brute_force_sbp, ENUMERATION_CAP};
pub use kk::karmarkar_karp;
pub use random::random_search;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::SeedTree;
use crate::scalar::Real;

/// Allowed entries of `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alphabet {
    /// `{-1, +1}`
    PmOne,
    /// `{-1, 0, +1}`, `x != 0`
    TernaryNonzero,
    /// `{-B..B}`, `x != 0`
    Bounded(u32),
}

impl Alphabet {
    pub fn bound(self) -> i64 {
        match self {
            Alphabet::PmOne | Alphabet::TernaryNonzero => 1,
            Alphabet::Bounded(b) => b as i64,
        }
    }

    pub fn allows_zero(self) -> bool {
        !matches!(self, Alphabet::PmOne)
    }

    pub fn contains(self, x: &[i64]) -> bool {
        let b = self.bound();
        let entries_ok = x
            .iter()
            .all(|&v| v.abs() <= b && (v != 0 || self.allows_zero()));
        entries_ok && x.iter().any(|&v| v != 0)
    }

    /// Digit order used by enumeration: `+1, -1, +2, -2, ..., 0`.
    pub(crate) fn digits(self) -> Vec<i64> {
        match self {
            Alphabet::PmOne => vec![1, -1],
            _ => {
                let b = self.bound();
                let mut d: Vec<i64> = (1..=b).flat_map(|v| [v, -v]).collect();
                d.push(0);
                d
            }
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alphabet::PmOne => f.write_str("pm_one"),
            Alphabet::TernaryNonzero => f.write_str("ternary_nonzero"),
            Alphabet::Bounded(b) => write!(f, "bounded:{b}"),
        }
    }
}

impl FromStr for Alphabet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pm_one" | "pm1" => Ok(Alphabet::PmOne),
            "ternary_nonzero" | "ternary" => Ok(Alphabet::TernaryNonzero),
            other => {
                let b = other
                    .strip_prefix("bounded:")
                    .and_then(|v| v.parse::<u32>().ok())
                    .filter(|&b| b >= 1)
                    .ok_or_else(|| Error::Parse(format!("unknown alphabet '{other}'")))?;
                Ok(Alphabet::Bounded(b))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOutput {
    pub x: Vec<i64>,
    pub value: f64,
    pub solver: String,
    pub budget_used: u64,
}

/// `||A x||_inf`, computed in the scalar type of `A`.
pub fn discrepancy<F: Real>(a: &Matrix<F>, x: &[i64]) -> F {
    (0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .zip(x)
                .fold(F::zero(), |acc, (&v, &xi)| acc + v * F::of(xi as f64))
                .abs()
        })
        .fold(F::zero(), F::max)
}

pub trait Solver: Send + Sync {
    fn name(&self) -> String;
    fn alphabet(&self) -> Alphabet;
    /// `a` is `n x m`; NPP instances arrive as a single row.
    fn solve(&self, a: &Matrix<f64>, kappa_target: f64, seed: &SeedTree) -> Result<SolverOutput>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    BruteSbp,
    BruteNpp,
    KarmarkarKarp,
    RandomSearch,
    AlwaysFail,
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "brute_sbp" | "brute-sbp" => SolverKind::BruteSbp,
            "brute_npp" | "brute-npp" => SolverKind::BruteNpp,
            "karmarkar_karp" | "kk" => SolverKind::KarmarkarKarp,
            "random_search" | "random" => SolverKind::RandomSearch,
            "always_fail" => SolverKind::AlwaysFail,
            other => return Err(Error::Parse(format!("unknown solver '{other}'"))),
        })
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::BruteSbp => "brute_sbp",
            SolverKind::BruteNpp => "brute_npp",
            SolverKind::KarmarkarKarp => "karmarkar_karp",
            SolverKind::RandomSearch => "random_search",
            SolverKind::AlwaysFail => "always_fail",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub alphabet: Alphabet,
    /// Draw count for random search; ignored by the other solvers.
    pub budget: u64,
}

impl SolverSpec {
    pub fn new(kind: SolverKind) -> Self {
        Self {
            kind,
            alphabet: Alphabet::PmOne,
            budget: 1 << 12,
        }
    }

    pub fn with_alphabet(mut self, alphabet: Alphabet) -> Self {
        self.alphabet = alphabet;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn build(&self) -> Result<Box<dyn Solver>> {
        let nonbinary = self.alphabet != Alphabet::PmOne;
        if nonbinary && matches!(self.kind, SolverKind::BruteNpp | SolverKind::KarmarkarKarp) {
            return Err(Error::InvalidParameter(format!(
                "{} only supports the pm_one alphabet",
                self.kind
            )));
        }
        if self.budget == 0 {
            return Err(Error::InvalidParameter("budget must be at least 1".into()));
        }
        Ok(Box::new(Configured(*self)))
    }
}

struct Configured(SolverSpec);

impl Solver for Configured {
    fn name(&self) -> String {
        self.0.kind.to_string()
    }

    fn alphabet(&self) -> Alphabet {
        self.0.alphabet
    }

    fn solve(&self, a: &Matrix<f64>, _kappa_target: f64, seed: &SeedTree) -> Result<SolverOutput> {
        match self.0.kind {
            SolverKind::BruteSbp => brute_force_sbp(a, self.0.alphabet),
            SolverKind::BruteNpp => brute_force_npp(single_row(a)?),
            SolverKind::KarmarkarKarp => karmarkar_karp(single_row(a)?),
            SolverKind::RandomSearch => {
                random_search(a, self.0.alphabet, self.0.budget, &mut seed.rng("solver"))
            }
            SolverKind::AlwaysFail => Ok(AlwaysFail.solve_plain(a)),
        }
    }
}

fn single_row(a: &Matrix<f64>) -> Result<&[f64]> {
    if a.rows() != 1 {
        return Err(Error::Solver(format!(
            "NPP solver needs a single row, got {}",
            a.rows()
        )));
    }
    Ok(a.row(0))
}

/// Returns `x = (1, ..., 1)` whatever the input.
#[derive(Clone, Copy, Debug, Default)]
pub struct AlwaysFail;

impl AlwaysFail {
    fn solve_plain(&self, a: &Matrix<f64>) -> SolverOutput {
        let x = vec![1; a.cols()];
        SolverOutput {
            value: discrepancy(a, &x),
            x,
            solver: "always_fail".into(),
            budget_used: 1,
        }
    }
}

impl Solver for AlwaysFail {
    fn name(&self) -> String {
        "always_fail".into()
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::PmOne
    }

    fn solve(&self, a: &Matrix<f64>, _kappa_target: f64, _seed: &SeedTree) -> Result<SolverOutput> {
        Ok(self.solve_plain(a))
    }
}

/// Wraps a solver so that it answers honestly only with probability `p`,
/// returning the all-ones vector otherwise.
pub struct Degraded<S> {
    pub inner: S,
    pub p: f64,
}

impl<S: Solver> Solver for Degraded<S> {
    fn name(&self) -> String {
        format!("degraded({}, {})", self.inner.name(), self.p)
    }

    fn alphabet(&self) -> Alphabet {
        self.inner.alphabet()
    }

    fn solve(&self, a: &Matrix<f64>, kappa_target: f64, seed: &SeedTree) -> Result<SolverOutput> {
        if seed.rng("degrade").gen::<f64>() < self.p {
            self.inner.solve(a, kappa_target, seed)
        } else {
            AlwaysFail.solve(a, kappa_target, seed)
        }
    }
}

impl Solver for Box<dyn Solver> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn alphabet(&self) -> Alphabet {
        (**self).alphabet()
    }

    fn solve(&self, a: &Matrix<f64>, kappa_target: f64, seed: &SeedTree) -> Result<SolverOutput> {
        (**self).solve(a, kappa_target, seed)
    }
}
