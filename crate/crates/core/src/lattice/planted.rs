//! Planted worst-case instances with known `λ_n`, and the solution verifier.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::basis::{lattice_membership, max_column_norm, Basis};
use super::minima::successive_minima_sq;
use super::sublattice::SublatticePair;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{self, matrix_from_repr, matrix_to_repr, ratio, RationalRepr};
use crate::rng::SeedTree;
use crate::scalar::l2_norm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Diagonal,
    Qary,
    Rotated,
    /// Ingested from a file; `λ_n` may be unknown.
    Custom,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Profile::Diagonal => "diagonal",
            Profile::Qary => "qary",
            Profile::Rotated => "rotated",
            Profile::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(Profile::Diagonal),
            "qary" => Ok(Profile::Qary),
            "rotated" => Ok(Profile::Rotated),
            "custom" => Ok(Profile::Custom),
            other => Err(Error::UnsupportedProfile(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub n: usize,
    pub profile: Profile,
    pub gamma: f64,
    /// `r = r_factor * gamma * λ_n`; must exceed one.
    pub r_factor: f64,
    /// Diagonal entries for the diagonal and rotated profiles. Drawn from
    /// `{1, 2, 3}` when absent.
    pub diag: Option<Vec<i64>>,
    /// `S = B D` with `D = diag(sublattice_diag)`; defaults to `2 I`.
    pub sublattice_diag: Option<Vec<i64>>,
    /// Prime modulus for the q-ary profile; drawn from `{3, 5, 7}` when absent.
    pub modulus: Option<u64>,
    /// Half-width of the box `t` is drawn from; defaults to `2 ||B||`.
    pub target_box: Option<f64>,
    pub seed: u64,
}

impl PlantedConfig {
    pub fn new(n: usize, profile: Profile, gamma: f64, seed: u64) -> Self {
        Self {
            n,
            profile,
            gamma,
            r_factor: 2.0,
            diag: None,
            sublattice_diag: None,
            modulus: None,
            target_box: None,
            seed,
        }
    }
}

/// An IncGDD instance `(B, S, t, r)` plus the bookkeeping needed to check
/// `r > γ λ_n`.
#[derive(Clone, Debug)]
pub struct PlantedIncGddInstance {
    pub pair: SublatticePair,
    pub t: Vec<f64>,
    pub r: f64,
    pub lambda_n: Option<f64>,
    pub gamma: f64,
    pub profile: Profile,
    pub seed: Option<u64>,
}

impl PlantedIncGddInstance {
    pub fn new(
        pair: SublatticePair,
        t: Vec<f64>,
        r: f64,
        lambda_n: Option<f64>,
        gamma: f64,
        profile: Profile,
        seed: Option<u64>,
    ) -> Result<Self> {
        if t.len() != pair.dim() {
            return Err(Error::Dimension(format!(
                "t has {} entries, n = {}",
                t.len(),
                pair.dim()
            )));
        }
        if t.iter().any(|v| !v.is_finite()) || !r.is_finite() || !gamma.is_finite() {
            return Err(Error::NonFinite("instance"));
        }
        if r <= 0.0 || gamma <= 0.0 {
            return Err(Error::InvalidParameter(
                "r and gamma must be positive".into(),
            ));
        }
        if let Some(l) = lambda_n {
            if !(l > 0.0) {
                return Err(Error::InvalidParameter("lambda_n must be positive".into()));
            }
            if r <= gamma * l {
                return Err(Error::InvalidParameter(format!(
                    "r = {r} does not exceed gamma * lambda_n = {}",
                    gamma * l
                )));
            }
        }
        Ok(Self {
            pair,
            t,
            r,
            lambda_n,
            gamma,
            profile,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    pub fn b(&self) -> &Basis {
        self.pair.b()
    }

    pub fn s(&self) -> &Basis {
        self.pair.s()
    }

    /// `||S||`, the largest column norm of `S`.
    pub fn s_norm(&self) -> f64 {
        max_column_norm(self.pair.s().as_f64())
    }

    /// `r + ||S|| / 8`.
    pub fn distance_bound(&self) -> f64 {
        self.r + self.s_norm() / 8.0
    }

    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            n: self.dim(),
            b: matrix_to_repr(self.pair.b().entries()),
            s: matrix_to_repr(self.pair.s().entries()),
            t: self.t.clone(),
            r: self.r,
            lambda_n: self.lambda_n,
            gamma: self.gamma,
            profile: self.profile,
            seed: self.seed,
        }
    }

    pub fn from_json(j: &InstanceJson) -> Result<Self> {
        let b = Basis::new(matrix_from_repr(&j.b)?)?;
        let s = Basis::new(matrix_from_repr(&j.s)?)?;
        if b.dim() != j.n {
            return Err(Error::Dimension(format!(
                "n = {} but B is {}x{}",
                j.n,
                b.dim(),
                b.dim()
            )));
        }
        let pair = SublatticePair::from_bases(b, s)?;
        Self::new(
            pair,
            j.t.clone(),
            j.r,
            j.lambda_n,
            j.gamma,
            j.profile,
            j.seed,
        )
    }
}

/// Wire format for instances. Matrices are row-major; rationals are pairs of
/// decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    #[serde(rename = "B")]
    pub b: Vec<Vec<RationalRepr>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<RationalRepr>>,
    pub t: Vec<f64>,
    pub r: f64,
    pub lambda_n: Option<f64>,
    pub gamma: f64,
    pub profile: Profile,
    pub seed: Option<u64>,
}

/// Pythagorean triples for exact rational rotations.
const TRIPLES: [(i64, i64, i64); 5] = [
    (3, 4, 5),
    (5, 12, 13),
    (8, 15, 17),
    (7, 24, 25),
    (20, 21, 29),
];

/// Orthogonal matrix with rational entries: a product of Givens rotations on
/// consecutive coordinate pairs.
pub fn rational_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix<BigRational> {
    let mut rot = Matrix::<BigRational>::identity(n);
    for k in 0..n.saturating_sub(1) {
        let (a, b, c) = TRIPLES[rng.gen_range(0..TRIPLES.len())];
        let (cos, sin) = (ratio(a, c), ratio(b, c));
        let mut g = Matrix::<BigRational>::identity(n);
        g[(k, k)] = cos.clone();
        g[(k + 1, k + 1)] = cos;
        g[(k, k + 1)] = -sin.clone();
        g[(k + 1, k)] = sin;
        rot = g.matmul(&rot).expect("square");
    }
    rot
}

pub fn generate_planted_instance(cfg: &PlantedConfig) -> Result<PlantedIncGddInstance> {
    let n = cfg.n;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(cfg.gamma >= 1.0) {
        return Err(Error::InvalidParameter("gamma must be >= 1".into()));
    }
    if !(cfg.r_factor > 1.0) {
        return Err(Error::InvalidParameter("r_factor must exceed 1".into()));
    }
    let seeds = SeedTree::root(cfg.seed).child("planted", 0);
    let mut rng = seeds.rng("basis");

    let draw_diag = |rng: &mut rand_chacha::ChaCha20Rng| -> Result<Vec<i64>> {
        match &cfg.diag {
            Some(d) if d.len() != n => Err(Error::Dimension(format!(
                "diag has {} entries, n = {n}",
                d.len()
            ))),
            Some(d) if d.iter().any(|&v| v <= 0) => Err(Error::InvalidParameter(
                "diag entries must be positive".into(),
            )),
            Some(d) => Ok(d.clone()),
            None => Ok((0..n).map(|_| rng.gen_range(1..=3)).collect()),
        }
    };

    let (b, lambda_n) = match cfg.profile {
        Profile::Diagonal => {
            let d = draw_diag(&mut rng)?;
            let lam = *d.iter().max().expect("n >= 1") as f64;
            (Basis::diagonal(&d)?, lam)
        }
        Profile::Rotated => {
            let d = draw_diag(&mut rng)?;
            let lam = *d.iter().max().expect("n >= 1") as f64;
            let rot = rational_rotation(n, &mut rng);
            let dm = Matrix::diagonal(&d.iter().map(|&v| ratio(v, 1)).collect::<Vec<_>>());
            (Basis::new(rot.matmul(&dm)?)?, lam)
        }
        Profile::Qary => {
            if n > 4 {
                return Err(Error::UnsupportedProfile(format!(
                    "qary profile needs n <= 4 for exact lambda_n enumeration, got n = {n}"
                )));
            }
            let q = match cfg.modulus {
                Some(q) if q < 2 => {
                    return Err(Error::InvalidParameter("modulus must be >= 2".into()))
                }
                Some(q) => q as i64,
                None => [3, 5, 7][rng.gen_range(0..3)],
            };
            // columns (1, a_2, ..., a_n) and q e_i for i >= 2
            let mut rows = vec![vec![0i64; n]; n];
            rows[0][0] = 1;
            for i in 1..n {
                rows[i][0] = rng.gen_range(1..q);
                rows[i][i] = q;
            }
            let b = Basis::from_integer_rows(rows)?;
            let minima = successive_minima_sq(&b)?;
            let lam = rational::to_f64(minima.last().expect("n minima")).sqrt();
            (b, lam)
        }
        Profile::Custom => {
            return Err(Error::UnsupportedProfile(
                "custom instances are ingested from JSON, not generated".into(),
            ))
        }
    };

    let d = match &cfg.sublattice_diag {
        Some(d) if d.len() != n => return Err(Error::Dimension("sublattice_diag length".into())),
        Some(d) if d.contains(&0) => return Err(Error::Singular),
        Some(d) => d.clone(),
        None => vec![2; n],
    };
    let m = Matrix::diagonal(&d.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>());
    let pair = SublatticePair::from_change_of_basis(b, m)?;

    let half = cfg
        .target_box
        .unwrap_or_else(|| 2.0 * max_column_norm(pair.b().as_f64()));
    let mut trng = seeds.rng("target");
    let t: Vec<f64> = (0..n).map(|_| trng.gen_range(-half..=half)).collect();
    let r = cfg.r_factor * cfg.gamma * lambda_n;
    PlantedIncGddInstance::new(
        pair,
        t,
        r,
        Some(lambda_n),
        cfg.gamma,
        cfg.profile,
        Some(cfg.seed),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncGddVerdict {
    pub valid: bool,
    pub member: bool,
    pub coeffs: Option<Vec<i64>>,
    pub dist: f64,
    pub bound: f64,
}

/// `s` is accepted iff it is a lattice point (to within `tau`) and
/// `||s - t||_2 <= r + ||S|| / 8`.
pub fn verify_incgdd_solution(inst: &PlantedIncGddInstance, s: &[f64], tau: f64) -> IncGddVerdict {
    let coeffs = lattice_membership(inst.b(), s, tau);
    let diff: Vec<f64> = s.iter().zip(&inst.t).map(|(a, b)| a - b).collect();
    let dist = l2_norm(&diff);
    let bound = inst.distance_bound();
    let member = coeffs.is_some();
    IncGddVerdict {
        valid: member && dist <= bound,
        member,
        coeffs,
        dist,
        bound,
    }
}
