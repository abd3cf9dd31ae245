use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::crt::{balanced, crt_build, floor_p_numerators, CrtSystem};
use super::params::NppParams;
use super::primes::select_primes;
use crate::error::{Error, Result};
use crate::gaussian::{sample_discrete_gaussian_offsets, DiscreteGaussianSpec};
use crate::lattice::{max_column_norm, InstanceJson, PlantedIncGddInstance};
use crate::matrix::Matrix;
use crate::pipeline::{draw_cosets, mul_int, TargetEmbedding};
use crate::rational::{bigint_string, bigint_vec_string};
use crate::rng::SeedTree;
use crate::scalar::{l1_norm, l2_norm};

/// What the solver sees: `a ~ N(0, I_m)` (statistically) and its target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NppInstance {
    pub a: Vec<f64>,
    #[serde(with = "crate::pipeline::target_serde")]
    pub kappa_target: f64,
}

impl NppInstance {
    pub fn as_row(&self) -> Matrix<f64> {
        Matrix::new(1, self.a.len(), self.a.clone()).expect("1 x m")
    }
}

#[derive(Clone, Debug)]
pub struct NppTranscript {
    pub inst: PlantedIncGddInstance,
    pub params: NppParams,
    pub crt: CrtSystem,
    pub u: Matrix<f64>,
    pub v: Matrix<f64>,
    /// `S^{-1}(V + U) mod Z^n`.
    pub a_mat: Matrix<f64>,
    /// Numerators of `⌊A⌋_p`: row `i` over `p_i`.
    pub a_floor: Matrix<i64>,
    /// `q φ̃(⌊a_j⌋_p)`, in `[0, q)`.
    pub g: Vec<BigInt>,
    pub f: Vec<f64>,
    pub y: Vec<f64>,
    /// `w = y + K`.
    pub k: Vec<i64>,
    /// `w / sigma2`.
    pub a: Vec<f64>,
}

/// Largest `q` for which `e''` can be snapped to the `1/q` grid from
/// double-precision data with `m` terms.
pub fn max_grid_modulus(m: usize) -> f64 {
    2f64.powi(52) / (64.0 * m as f64)
}

pub fn build_npp_instance(
    inst: &PlantedIncGddInstance,
    params: &NppParams,
    node: &SeedTree,
) -> Result<(NppInstance, NppTranscript)> {
    let (n, m) = (params.n, params.m);
    if n != inst.dim() {
        return Err(Error::Dimension(format!(
            "params for n = {n}, instance has n = {}",
            inst.dim()
        )));
    }
    let primes = select_primes(n, m)?;
    let crt = crt_build(&primes)?;
    let qf = crt.q.to_f64().unwrap_or(f64::INFINITY);
    if qf >= max_grid_modulus(m) {
        return Err(Error::InvalidParameter(format!(
            "q = {} is too large to resolve the 1/q grid in double precision at m = {m}; lower m or n",
            crt.q
        )));
    }
    let draw = draw_cosets(inst, m, params.sigma1, TargetEmbedding::default(), node)?;
    let a_floor = floor_p_numerators(&draw.a_tilde, &primes)?;
    let g: Vec<BigInt> = (0..m)
        .map(|j| {
            let k: Vec<BigInt> = (0..n).map(|i| BigInt::from(a_floor[(i, j)])).collect();
            crt.phi_numerators(&k)
        })
        .collect();
    let mut frng = node.rng("f");
    let f: Vec<f64> = (0..m).map(|_| frng.gen::<f64>() / qf).collect();
    let below_one = 1.0 - f64::EPSILON / 2.0;
    let y: Vec<f64> = g
        .iter()
        .zip(&f)
        .map(|(gj, fj)| (gj.to_f64().expect("g < q") / qf + fj).min(below_one))
        .collect();
    let spec = DiscreteGaussianSpec::new(
        y.clone(),
        params.sigma2 * (2.0 * std::f64::consts::PI).sqrt(),
    )?;
    let k = sample_discrete_gaussian_offsets(&spec, &mut node.rng("discrete"));
    let a: Vec<f64> = y
        .iter()
        .zip(&k)
        .map(|(yj, &kj)| (yj + kj as f64) / params.sigma2)
        .collect();
    let transcript = NppTranscript {
        inst: inst.clone(),
        params: params.clone(),
        crt,
        u: draw.u,
        v: draw.v,
        a_mat: draw.a_tilde,
        a_floor,
        g,
        f,
        y,
        k,
        a: a.clone(),
    };
    Ok((
        NppInstance {
            a,
            kappa_target: params.kappa_target,
        },
        transcript,
    ))
}

/// Everything the NPP extraction computes, for the checks and the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NppExtraction {
    pub s: Vec<f64>,
    /// `-w^T x`.
    pub e_prime: f64,
    /// `f^T x + e'` as computed in floating point.
    pub e_double_prime: f64,
    /// `q e'' mod q` after snapping.
    #[serde(with = "bigint_string")]
    pub grid: BigInt,
    pub snap_distance: f64,
    /// Numerators `grid mod p_i` of `φ̃^{-1}(e'')`.
    #[serde(with = "bigint_vec_string")]
    pub inverse: Vec<BigInt>,
    /// `||φ̃^{-1}(e'')||_1` over balanced representatives.
    pub inverse_l1: f64,
    /// `inverse_l1 > 1/16`: the no-wraparound condition of the analysis fails.
    pub wraparound: bool,
    /// `grid ≡ -Σ g_j x_j (mod q)`, checked in exact arithmetic.
    pub grid_exact: bool,
    /// `⌊A⌋_p x + φ̃^{-1}(e'') ∈ Z^n`, checked in exact arithmetic.
    pub integral: bool,
    /// `||(A - ⌊A⌋_p) x||_1`.
    pub rounding_l1: f64,
    /// `n m / min p + inverse_l1 <= 1/8`.
    pub chain_ok: bool,
    /// `|a^T x|`, recomputed.
    pub achieved: f64,
}

impl NppTranscript {
    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn check_solution(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.m() {
            return Err(Error::BadSolution(format!(
                "x has {} entries, m = {}",
                x.len(),
                self.m()
            )));
        }
        if x.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::BadSolution("x must be a ±1 vector".into()));
        }
        Ok(())
    }

    pub fn extract(&self, x: &[i64]) -> Result<NppExtraction> {
        self.check_solution(x)?;
        let (n, m) = (self.params.n, self.m());
        let q = &self.crt.q;
        let qf = q.to_f64().expect("q checked at build time");
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let kx: i64 = self.k.iter().zip(x).map(|(k, xi)| k * xi).sum();
        let yx: f64 = self.y.iter().zip(&xf).map(|(a, b)| a * b).sum();
        let fx: f64 = self.f.iter().zip(&xf).map(|(a, b)| a * b).sum();
        let e_prime = -(yx + kx as f64);
        // f_j - y_j = -g_j / q up to rounding, so this is e'' without the
        // integer part that the mod-1 reduction discards anyway
        let fractional: f64 = self
            .f
            .iter()
            .zip(&self.y)
            .zip(&xf)
            .map(|((f, y), xi)| (f - y) * xi)
            .sum();
        let scaled = fractional.rem_euclid(1.0) * qf;
        let rounded = scaled.round();
        let snap_distance = (scaled - rounded).abs();
        if snap_distance > 0.25 {
            return Err(Error::OffGrid(format!(
                "e'' is {snap_distance} grid steps from the 1/q grid"
            )));
        }
        let grid = BigInt::from(rounded as i64).mod_floor(q);
        let gx = self
            .g
            .iter()
            .zip(x)
            .fold(BigInt::from(0), |acc, (gj, &xj)| {
                acc + gj * BigInt::from(xj)
            });
        let grid_exact = (&grid + &gx).mod_floor(q) == BigInt::from(0);
        let inverse = self.crt.inverse_numerators(&grid);
        let integral = (0..n).all(|i| {
            let row: i64 = (0..m).map(|j| self.a_floor[(i, j)] * x[j]).sum();
            (BigInt::from(row) + &inverse[i]).mod_floor(&self.crt.p[i]) == BigInt::from(0)
        });
        let bal: Vec<f64> = inverse
            .iter()
            .zip(&self.crt.p)
            .map(|(k, p)| crate::rational::to_f64(&balanced(k, p)))
            .collect();
        let inverse_l1 = l1_norm(&bal);
        let p = self.crt.p_u64();
        let resid = Matrix::from_fn(n, m, |i, j| {
            self.a_mat[(i, j)] - self.a_floor[(i, j)] as f64 / p[i] as f64
        });
        let rx = mul_int(&resid, x);
        let ux = mul_int(&self.u, x);
        let s_rx = self.inst.s().apply(&rx);
        let s_inv = self.inst.s().apply(&bal);
        let x1 = x[0] as f64;
        let s: Vec<f64> = (0..n).map(|i| x1 * (ux[i] - s_rx[i] + s_inv[i])).collect();
        let min_p = *p.iter().min().expect("n >= 1") as f64;
        Ok(NppExtraction {
            s,
            e_prime,
            e_double_prime: fx + e_prime,
            grid,
            snap_distance,
            inverse,
            inverse_l1,
            wraparound: inverse_l1 > 1.0 / 16.0,
            grid_exact,
            integral,
            rounding_l1: l1_norm(&rx),
            chain_ok: (n * m) as f64 / min_p + inverse_l1 <= 0.125,
            achieved: self
                .a
                .iter()
                .zip(&xf)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs(),
        })
    }

    /// `||s - t||_2 <= 4 sigma1 m + ||S|| (n m / min p + ||φ̃^{-1}(e'')||_1)`.
    pub fn norm_chain_holds(&self, ext: &NppExtraction) -> bool {
        let (n, m) = (self.params.n as f64, self.m() as f64);
        let min_p = self.crt.min_p() as f64;
        let s_norm = max_column_norm(self.inst.s().as_f64());
        let rhs = 4.0 * self.params.sigma1 * m + s_norm * (n * m / min_p + ext.inverse_l1);
        let diff: Vec<f64> = ext.s.iter().zip(&self.inst.t).map(|(a, b)| a - b).collect();
        l2_norm(&diff) <= rhs
    }

    pub fn to_json(&self) -> NppTranscriptJson {
        NppTranscriptJson {
            instance: self.inst.to_json(),
            params: self.params.clone(),
            crt: self.crt.clone(),
            u: self.u.clone(),
            v: self.v.clone(),
            a_mat: self.a_mat.clone(),
            a_floor: self.a_floor.clone(),
            g: self.g.clone(),
            f: self.f.clone(),
            y: self.y.clone(),
            k: self.k.clone(),
            a: self.a.clone(),
        }
    }

    pub fn from_json(j: &NppTranscriptJson) -> Result<Self> {
        let inst = PlantedIncGddInstance::from_json(&j.instance)?;
        let (n, m) = (inst.dim(), j.params.m);
        let shapes_ok = [&j.u, &j.v, &j.a_mat]
            .iter()
            .all(|a| a.rows() == n && a.cols() == m)
            && j.a_floor.rows() == n
            && j.a_floor.cols() == m
            && [j.f.len(), j.y.len(), j.k.len(), j.a.len(), j.g.len()]
                .iter()
                .all(|&l| l == m)
            && j.crt.n() == n;
        if !shapes_ok {
            return Err(Error::Transcript(format!(
                "shapes do not match n = {n}, m = {m}"
            )));
        }
        let rebuilt = crt_build(&j.crt.p_u64())?;
        if rebuilt != j.crt {
            return Err(Error::Transcript("CRT data is inconsistent".into()));
        }
        Ok(Self {
            inst,
            params: j.params.clone(),
            crt: j.crt.clone(),
            u: j.u.clone(),
            v: j.v.clone(),
            a_mat: j.a_mat.clone(),
            a_floor: j.a_floor.clone(),
            g: j.g.clone(),
            f: j.f.clone(),
            y: j.y.clone(),
            k: j.k.clone(),
            a: j.a.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NppTranscriptJson {
    pub instance: InstanceJson,
    pub params: NppParams,
    pub crt: CrtSystem,
    #[serde(rename = "U")]
    pub u: Matrix<f64>,
    #[serde(rename = "V")]
    pub v: Matrix<f64>,
    #[serde(rename = "A")]
    pub a_mat: Matrix<f64>,
    #[serde(rename = "A_floor")]
    pub a_floor: Matrix<i64>,
    #[serde(with = "bigint_vec_string")]
    pub g: Vec<BigInt>,
    pub f: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Vec<i64>,
    #[serde(rename = "a")]
    pub a: Vec<f64>,
}
