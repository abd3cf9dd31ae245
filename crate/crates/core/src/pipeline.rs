//! Pieces shared by the SBP and NPP reductions: κ profiles, the target
//! embedding, the `U`/`V`/`Ã` sampling step and per-attempt records.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::sample_normal_vec;
use crate::lattice::PlantedIncGddInstance;
use crate::matrix::Matrix;
use crate::rng::SeedTree;
use crate::scalar::frac;
use crate::solvers::Alphabet;

/// Largest `n * m` a derived parameter set may ask for before the caller
/// must pass an explicit `override_m`.
pub const MEMORY_BUDGET: f64 = 1e7;

/// Serde for discrepancy targets: JSON has no infinity, so an unbounded
/// target is written as `null` and read back as `f64::INFINITY`.
pub mod target_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `m` from the asymptotic formula; the distance guarantee applies.
    #[serde(rename = "paper_params")]
    Formula,
    /// User-chosen `m`; the algebra still holds, norm bounds are only measured.
    Override,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Formula => "paper_params",
            Regime::Override => "override",
        })
    }
}

/// How the solver's target `κ √m` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KappaProfile {
    /// SBP: `κ(x) = x^{-(1/2 + eps)}` at `x = m/n`.
    /// NPP: `κ(m) = 2^{-(log2 m)^{2 + eps}}`.
    Asymptotic,
    /// SBP only: `κ(x) = 1 / (sqrt(x) ln^{1+c} x)`.
    LogCorrected {
        c: f64,
    },
    Fixed {
        target: f64,
    },
    /// The largest target with `sigma2 * target <= 1/(8n)`, so that any
    /// accepted solution has `||e'||_inf <= 1/(8n)`.
    EprimeBound,
    Unbounded,
}

impl FromStr for KappaProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(KappaProfile::Asymptotic),
            "eprime" | "eprime_bound" => Ok(KappaProfile::EprimeBound),
            "unbounded" => Ok(KappaProfile::Unbounded),
            other => {
                if let Some(v) = other.strip_prefix("fixed:") {
                    let target = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad kappa target '{v}'")))?;
                    Ok(KappaProfile::Fixed { target })
                } else if let Some(v) = other.strip_prefix("log:") {
                    let c = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad log exponent '{v}'")))?;
                    Ok(KappaProfile::LogCorrected { c })
                } else {
                    Err(Error::Parse(format!("unknown kappa profile '{other}'")))
                }
            }
        }
    }
}

/// Where the target enters: column `column` of `U` has mean `t / divisor`,
/// and the output is scaled by `x_column / divisor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetEmbedding {
    pub column: usize,
    pub divisor: i64,
}

impl Default for TargetEmbedding {
    fn default() -> Self {
        Self {
            column: 0,
            divisor: 1,
        }
    }
}

impl TargetEmbedding {
    /// Uniform guess of a column and of `z in {-B..B} \ {0}`.
    pub fn guess<R: Rng + ?Sized>(m: usize, alphabet: Alphabet, rng: &mut R) -> Self {
        let column = rng.gen_range(0..m);
        let divisor = match alphabet {
            Alphabet::PmOne | Alphabet::TernaryNonzero => 1,
            Alphabet::Bounded(b) => {
                let b = b as i64;
                let k = rng.gen_range(0..2 * b);
                if k < b {
                    k - b
                } else {
                    k - b + 1
                }
            }
        };
        Self { column, divisor }
    }

    /// Number of distinct guesses, the cost multiplier of the guessing loop.
    pub fn guess_space(m: usize, alphabet: Alphabet) -> u64 {
        match alphabet {
            Alphabet::PmOne => 1,
            Alphabet::TernaryNonzero => m as u64,
            Alphabet::Bounded(b) => 2 * b as u64 * m as u64,
        }
    }

    /// `x_column / divisor` when it is `±1`.
    pub fn output_sign(&self, x: &[i64]) -> Result<f64> {
        let xj = x[self.column];
        if xj == self.divisor {
            Ok(1.0)
        } else if xj == -self.divisor {
            Ok(-1.0)
        } else {
            Err(Error::GuessMiss {
                column: self.column,
                got: xj,
                divisor: self.divisor,
            })
        }
    }
}

/// `U`, `V` and `S^{-1}(V + U) mod Z^n`.
#[derive(Clone, Debug)]
pub struct CosetDraw {
    pub u: Matrix<f64>,
    pub v: Matrix<f64>,
    pub a_tilde: Matrix<f64>,
}

/// Samples `u_j ~ N(mu_j, sigma1^2 I)` with `mu_column = t / divisor` and
/// zero elsewhere, `v_j` uniform in `L(B) mod P(S)`, and reduces
/// `S^{-1}(v_j + u_j)` into `[0, 1)^n`.
pub fn draw_cosets(
    inst: &PlantedIncGddInstance,
    m: usize,
    sigma1: f64,
    embedding: TargetEmbedding,
    node: &SeedTree,
) -> Result<CosetDraw> {
    let n = inst.dim();
    if embedding.column >= m || embedding.divisor == 0 {
        return Err(Error::InvalidParameter(format!(
            "bad target embedding {embedding:?} for m = {m}"
        )));
    }
    let mut urng = node.rng("U");
    let mut vrng = node.rng("V");
    let zero = vec![0.0; n];
    let shifted: Vec<f64> = inst
        .t
        .iter()
        .map(|v| v / embedding.divisor as f64)
        .collect();
    let mut u_cols = Vec::with_capacity(m);
    let mut v_cols = Vec::with_capacity(m);
    let mut a_cols = Vec::with_capacity(m);
    for j in 0..m {
        let mu = if j == embedding.column {
            &shifted
        } else {
            &zero
        };
        let u = sample_normal_vec(mu, sigma1, &mut urng)?;
        let v = inst.pair.sample_coset_uniform(&mut vrng).coords;
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let at: Vec<f64> = inst.s().coordinates(&sum).into_iter().map(frac).collect();
        u_cols.push(u);
        v_cols.push(v);
        a_cols.push(at);
    }
    Ok(CosetDraw {
        u: Matrix::from_columns(n, &u_cols)?,
        v: Matrix::from_columns(n, &v_cols)?,
        a_tilde: Matrix::from_columns(n, &a_cols)?,
    })
}

/// `M x` with an integer vector.
pub fn mul_int(a: &Matrix<f64>, x: &[i64]) -> Vec<f64> {
    (0..a.rows())
        .map(|i| a.row(i).iter().zip(x).map(|(v, &xi)| v * xi as f64).sum())
        .collect()
}

/// `K x` in exact integer arithmetic.
pub fn mul_int_exact(k: &Matrix<i64>, x: &[i64]) -> Vec<i64> {
    (0..k.rows())
        .map(|i| k.row(i).iter().zip(x).map(|(v, &xi)| v * xi).sum())
        .collect()
}

/// What happened in one attempt of a reduction loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    /// Recomputed from the instance, never taken from the solver.
    pub solver_value: f64,
    #[serde(with = "crate::pipeline::target_serde")]
    pub kappa_target: f64,
    pub kappa_ok: bool,
    pub member: bool,
    pub dist: f64,
    pub bound: f64,
    pub valid: bool,
    pub eprime_inf: f64,
    /// `||e'||_inf <= 1/(8n)`.
    pub eprime_ok: bool,
    pub embedding: TargetEmbedding,
    pub guess_hit: bool,
    /// NPP only.
    pub wraparound: Option<bool>,
    pub error: Option<String>,
}

impl AttemptRecord {
    pub fn verified(&self) -> bool {
        self.kappa_ok && self.valid
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionOutcome {
    pub s: Option<Vec<f64>>,
    /// The solver output behind `s`.
    pub x: Option<Vec<i64>>,
    pub attempts: usize,
    pub verified: bool,
    pub regime: Regime,
    /// Cost multiplier from guessing the target coordinate.
    pub guess_space: u64,
    pub log: Vec<AttemptRecord>,
}

impl ReductionOutcome {
    pub fn last(&self) -> Option<&AttemptRecord> {
        self.log.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guesses_cover_nonzero_divisors() {
        let mut rng = SeedTree::root(1).rng("g");
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..400 {
            let e = TargetEmbedding::guess(5, Alphabet::Bounded(2), &mut rng);
            assert!(e.column < 5);
            seen.insert(e.divisor);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![-2, -1, 1, 2]);
    }

    #[test]
    fn output_sign_rules() {
        let e = TargetEmbedding {
            column: 1,
            divisor: -2,
        };
        assert_eq!(e.output_sign(&[0, -2, 1]).unwrap(), 1.0);
        assert_eq!(e.output_sign(&[0, 2, 1]).unwrap(), -1.0);
        assert!(matches!(
            e.output_sign(&[0, 1, 1]),
            Err(Error::GuessMiss { .. })
        ));
    }

    #[test]
    fn kappa_profile_parsing() {
        assert_eq!(
            "fixed:0.5".parse::<KappaProfile>().unwrap(),
            KappaProfile::Fixed { target: 0.5 }
        );
        assert_eq!(
            "log:0.1".parse::<KappaProfile>().unwrap(),
            KappaProfile::LogCorrected { c: 0.1 }
        );
        assert!("nope".parse::<KappaProfile>().is_err());
    }
}
