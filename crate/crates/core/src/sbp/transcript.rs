use serde::{Deserialize, Serialize};

use super::params::SbpParams;
use crate::error::{Error, Result};
use crate::gaussian::{sample_discrete_gaussian_offsets, spectral_norm, DiscreteGaussianSpec};
use crate::lattice::{max_column_norm, InstanceJson, PlantedIncGddInstance};
use crate::matrix::Matrix;
use crate::pipeline::{draw_cosets, mul_int, mul_int_exact, TargetEmbedding};
use crate::rng::SeedTree;
use crate::scalar::{l2_norm, linf_norm};
use crate::solvers::Alphabet;

/// What the solver sees: `A ~ N(0,1)^{n x m}` (statistically) and its target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpInstance {
    pub a: Matrix<f64>,
    #[serde(with = "crate::pipeline::target_serde")]
    pub kappa_target: f64,
}

/// Everything sampled while building an [`SbpInstance`].
#[derive(Clone, Debug)]
pub struct SbpTranscript {
    pub inst: PlantedIncGddInstance,
    pub params: SbpParams,
    pub embedding: TargetEmbedding,
    pub u: Matrix<f64>,
    pub v: Matrix<f64>,
    /// `S^{-1}(V + U) mod Z^n`.
    pub a_tilde: Matrix<f64>,
    /// `W = Ã + K` is the discrete Gaussian sample.
    pub k: Matrix<i64>,
    /// `W / sigma2`.
    pub a: Matrix<f64>,
}

pub fn build_sbp_instance(
    inst: &PlantedIncGddInstance,
    params: &SbpParams,
    embedding: TargetEmbedding,
    node: &SeedTree,
) -> Result<(SbpInstance, SbpTranscript)> {
    if params.n != inst.dim() {
        return Err(Error::Dimension(format!(
            "params for n = {}, instance has n = {}",
            params.n,
            inst.dim()
        )));
    }
    let (n, m) = (params.n, params.m);
    let draw = draw_cosets(inst, m, params.sigma1, embedding, node)?;
    let s = params.sigma2 * (2.0 * std::f64::consts::PI).sqrt();
    let mut drng = node.rng("discrete");
    let mut k = Matrix::zeros(n, m);
    for j in 0..m {
        let spec = DiscreteGaussianSpec::new(draw.a_tilde.column(j), s)?;
        k.set_column(j, &sample_discrete_gaussian_offsets(&spec, &mut drng));
    }
    let a = Matrix::from_fn(n, m, |i, j| {
        (draw.a_tilde[(i, j)] + k[(i, j)] as f64) / params.sigma2
    });
    let transcript = SbpTranscript {
        inst: inst.clone(),
        params: params.clone(),
        embedding,
        u: draw.u,
        v: draw.v,
        a_tilde: draw.a_tilde,
        k,
        a: a.clone(),
    };
    Ok((
        SbpInstance {
            a,
            kappa_target: params.kappa_target,
        },
        transcript,
    ))
}

/// Output of the extraction step with the quantities the checks need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpExtraction {
    pub s: Vec<f64>,
    /// `-W x`.
    pub e_prime: Vec<f64>,
    pub eprime_inf: f64,
    /// `||A x||_inf`, recomputed.
    pub achieved: f64,
}

/// The three terms bounding `||s - t||_2` in the analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormChain {
    /// `|z| ||u_c - t/z||_2` for the target column `c`.
    pub target_term: f64,
    /// `sigma_max(U_{-c}) ||x_{-c}||_2`.
    pub noise_term: f64,
    /// `n ||S|| ||e'||_inf`.
    pub error_term: f64,
    pub dist: f64,
    pub holds: bool,
}

impl SbpTranscript {
    pub fn m(&self) -> usize {
        self.params.m
    }

    /// `W = Ã + K`.
    pub fn w(&self) -> Matrix<f64> {
        Matrix::from_fn(self.a_tilde.rows(), self.a_tilde.cols(), |i, j| {
            self.a_tilde[(i, j)] + self.k[(i, j)] as f64
        })
    }

    pub fn check_solution(&self, x: &[i64], alphabet: Alphabet) -> Result<()> {
        if x.len() != self.m() {
            return Err(Error::BadSolution(format!(
                "x has {} entries, m = {}",
                x.len(),
                self.m()
            )));
        }
        if !alphabet.contains(x) {
            return Err(Error::BadSolution(format!(
                "x is not a nonzero vector over {alphabet}"
            )));
        }
        Ok(())
    }

    /// `e' = -W x` and `s = (x_c / z)(U x + S e')`.
    pub fn extract(&self, x: &[i64]) -> Result<SbpExtraction> {
        if x.len() != self.m() {
            return Err(Error::BadSolution(format!(
                "x has {} entries, m = {}",
                x.len(),
                self.m()
            )));
        }
        if x.iter().all(|&v| v == 0) {
            return Err(Error::BadSolution("x must be nonzero".into()));
        }
        let sign = self.embedding.output_sign(x)?;
        let ax = mul_int(&self.a_tilde, x);
        let kx = mul_int_exact(&self.k, x);
        let e_prime: Vec<f64> = ax.iter().zip(&kx).map(|(a, &k)| -(a + k as f64)).collect();
        let ux = mul_int(&self.u, x);
        let se = self.inst.s().apply(&e_prime);
        let s: Vec<f64> = ux.iter().zip(&se).map(|(a, b)| sign * (a + b)).collect();
        Ok(SbpExtraction {
            eprime_inf: linf_norm(&e_prime),
            achieved: linf_norm(&mul_int(&self.a, x)),
            e_prime,
            s,
        })
    }

    /// `S^{-1}(V + U) x + e'` is integral up to `tol`.
    pub fn mod_identity_holds(&self, x: &[i64], e_prime: &[f64], tol: f64) -> bool {
        let vu = &self.v + &self.u;
        let lhs = self.inst.s().coordinates(&mul_int(&vu, x));
        lhs.iter()
            .zip(e_prime)
            .all(|(a, e)| ((a + e) - (a + e).round()).abs() <= tol)
    }

    /// Recomputes each term of the distance bound independently.
    pub fn norm_chain(&self, x: &[i64], ext: &SbpExtraction) -> Result<NormChain> {
        let c = self.embedding.column;
        let z = self.embedding.divisor as f64;
        let uc = self.u.column(c);
        let u_prime: Vec<f64> = uc
            .iter()
            .zip(&self.inst.t)
            .map(|(u, t)| u - t / z)
            .collect();
        let target_term = z.abs() * l2_norm(&u_prime);
        let others: Vec<Vec<f64>> = (0..self.m())
            .filter(|&j| j != c)
            .map(|j| self.u.column(j))
            .collect();
        let x_rest: Vec<f64> = (0..self.m())
            .filter(|&j| j != c)
            .map(|j| x[j] as f64)
            .collect();
        let noise_term = if others.is_empty() {
            0.0
        } else {
            spectral_norm(&Matrix::from_columns(self.u.rows(), &others)?)? * l2_norm(&x_rest)
        };
        let s_norm = max_column_norm(self.inst.s().as_f64());
        let error_term = self.params.n as f64 * s_norm * ext.eprime_inf;
        let diff: Vec<f64> = ext.s.iter().zip(&self.inst.t).map(|(a, b)| a - b).collect();
        let dist = l2_norm(&diff);
        let total = target_term + noise_term + error_term;
        Ok(NormChain {
            target_term,
            noise_term,
            error_term,
            dist,
            holds: dist <= total * (1.0 + 1e-9) + 1e-9,
        })
    }

    pub fn to_json(&self) -> SbpTranscriptJson {
        SbpTranscriptJson {
            instance: self.inst.to_json(),
            params: self.params.clone(),
            embedding: self.embedding,
            u: self.u.clone(),
            v: self.v.clone(),
            a_tilde: self.a_tilde.clone(),
            k: self.k.clone(),
            a: self.a.clone(),
        }
    }

    pub fn from_json(j: &SbpTranscriptJson) -> Result<Self> {
        let inst = PlantedIncGddInstance::from_json(&j.instance)?;
        let (n, m) = (inst.dim(), j.params.m);
        for (name, mat) in [
            ("U", &j.u),
            ("V", &j.v),
            ("A_tilde", &j.a_tilde),
            ("A", &j.a),
        ] {
            if mat.rows() != n || mat.cols() != m {
                return Err(Error::Transcript(format!(
                    "{name} is {}x{}, expected {n}x{m}",
                    mat.rows(),
                    mat.cols()
                )));
            }
        }
        if j.k.rows() != n || j.k.cols() != m {
            return Err(Error::Transcript("K has the wrong shape".into()));
        }
        Ok(Self {
            inst,
            params: j.params.clone(),
            embedding: j.embedding,
            u: j.u.clone(),
            v: j.v.clone(),
            a_tilde: j.a_tilde.clone(),
            k: j.k.clone(),
            a: j.a.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpTranscriptJson {
    pub instance: InstanceJson,
    pub params: SbpParams,
    pub embedding: TargetEmbedding,
    #[serde(rename = "U")]
    pub u: Matrix<f64>,
    #[serde(rename = "V")]
    pub v: Matrix<f64>,
    #[serde(rename = "A_tilde")]
    pub a_tilde: Matrix<f64>,
    #[serde(rename = "K")]
    pub k: Matrix<i64>,
    #[serde(rename = "A")]
    pub a: Matrix<f64>,
}
