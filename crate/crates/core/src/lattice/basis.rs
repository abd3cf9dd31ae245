use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{self, invert};
use crate::scalar::{frac, l2_norm, Real};

/// Default tolerance for lattice-membership decisions.
pub const MEMBERSHIP_TOL: f64 = 1e-6;

/// An invertible `n x n` basis with exact rational entries. The inverse is
/// computed exactly once; float copies of both are cached for the
/// Gaussian-side arithmetic.
#[derive(Clone, Debug)]
pub struct Basis {
    entries: Matrix<BigRational>,
    inverse: Matrix<BigRational>,
    det: BigRational,
    entries_f64: Matrix<f64>,
    inverse_f64: Matrix<f64>,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Basis {
    pub fn new(entries: Matrix<BigRational>) -> Result<Self> {
        if entries.rows() == 0 {
            return Err(Error::Dimension("basis must have n >= 1".into()));
        }
        let (inverse, det) = invert(&entries)?;
        if det.is_zero() {
            return Err(Error::Singular);
        }
        Ok(Self {
            entries_f64: rational::matrix_to_f64(&entries),
            inverse_f64: rational::matrix_to_f64(&inverse),
            entries,
            inverse,
            det,
        })
    }

    pub fn from_integer_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        Self::new(m.map(|&v| BigRational::from_integer(v.into())))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n)).expect("identity is invertible")
    }

    pub fn diagonal(d: &[i64]) -> Result<Self> {
        let vals: Vec<BigRational> = d
            .iter()
            .map(|&v| BigRational::from_integer(v.into()))
            .collect();
        Self::new(Matrix::diagonal(&vals))
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix<BigRational> {
        &self.entries
    }

    pub fn inverse(&self) -> &Matrix<BigRational> {
        &self.inverse
    }

    pub fn determinant(&self) -> &BigRational {
        &self.det
    }

    pub fn as_f64(&self) -> &Matrix<f64> {
        &self.entries_f64
    }

    pub fn inverse_f64(&self) -> &Matrix<f64> {
        &self.inverse_f64
    }

    pub fn to_real<F: Real>(&self) -> Matrix<F> {
        self.entries_f64.map(|&v| F::of(v))
    }

    /// `B z` for a real coefficient vector.
    pub fn apply<F: Real>(&self, z: &[F]) -> Vec<F> {
        mul_f64_matrix(&self.entries_f64, z)
    }

    /// `B^{-1} x`.
    pub fn coordinates<F: Real>(&self, x: &[F]) -> Vec<F> {
        mul_f64_matrix(&self.inverse_f64, x)
    }
}

fn mul_f64_matrix<F: Real>(m: &Matrix<f64>, v: &[F]) -> Vec<F> {
    assert_eq!(m.cols(), v.len(), "vector length mismatch");
    (0..m.rows())
        .map(|i| m.row(i).iter().zip(v).map(|(&a, &b)| F::of(a) * b).sum())
        .collect()
}

/// A point of `L(B)` together with its integer coefficients, when known.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeVector {
    pub coords: Vec<f64>,
    pub coeffs: Option<Vec<i64>>,
}

impl LatticeVector {
    /// `||coords - B coeffs||_inf <= tol`; vacuous without coefficients.
    pub fn is_consistent(&self, basis: &Basis, tol: f64) -> bool {
        match &self.coeffs {
            None => true,
            Some(z) => {
                let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
                basis
                    .apply(&zf)
                    .iter()
                    .zip(&self.coords)
                    .all(|(a, b)| (a - b).abs() <= tol)
            }
        }
    }
}

/// Reduces `x` into the half-open parallelepiped `P(B)`: `B frac(B^{-1} x)`.
pub fn mod_parallelepiped<F: Real>(basis: &Basis, x: &[F]) -> Result<Vec<F>> {
    if x.len() != basis.dim() {
        return Err(Error::Dimension(format!(
            "expected {} coordinates, got {}",
            basis.dim(),
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("mod_parallelepiped input"));
    }
    let c: Vec<F> = basis.coordinates(x).into_iter().map(frac).collect();
    Ok(basis.apply(&c))
}

/// Integer coefficients of `s` in `B` if `B^{-1} s` is within `tau` of an
/// integer vector (sup norm).
pub fn lattice_membership<F: Real>(basis: &Basis, s: &[F], tau: F) -> Option<Vec<i64>> {
    if s.len() != basis.dim() || s.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let z = basis.coordinates(s);
    let mut out = Vec::with_capacity(z.len());
    for v in z {
        let r = v.round();
        if (v - r).abs() > tau {
            return None;
        }
        out.push(r.to_i64()?);
    }
    Some(out)
}

/// `||A|| = max_j ||a_j||_2`, the largest column norm (not the spectral norm).
pub fn max_column_norm<F: Real>(a: &Matrix<F>) -> F {
    (0..a.cols())
        .map(|j| l2_norm(&a.column(j)))
        .fold(F::zero(), F::max)
}
