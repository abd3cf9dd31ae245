use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 64;

/// Largest singular value, via cyclic Jacobi on the smaller Gram matrix.
pub fn spectral_norm<F: Real>(a: &Matrix<F>) -> Result<F> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("spectral_norm input"));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(F::zero());
    }
    let g = gram(a);
    let eig = symmetric_eigenvalues(g)?;
    let top = eig.into_iter().fold(F::zero(), F::max);
    Ok(top.max(F::zero()).sqrt())
}

fn gram<F: Real>(a: &Matrix<F>) -> Matrix<F> {
    let (r, c) = (a.rows(), a.cols());
    if r <= c {
        Matrix::from_fn(r, r, |i, j| (0..c).map(|k| a[(i, k)] * a[(j, k)]).sum())
    } else {
        Matrix::from_fn(c, c, |i, j| (0..r).map(|k| a[(k, i)] * a[(k, j)]).sum())
    }
}

fn symmetric_eigenvalues<F: Real>(g: Matrix<F>) -> Result<Vec<F>> {
    let n = g.rows();
    let mut a = g.to_rows();
    let frob = a.iter().flatten().map(|&v| v * v).sum::<F>().sqrt();
    if frob == F::zero() {
        return Ok(vec![F::zero(); n]);
    }
    let tol = F::of(4.0 * n as f64) * F::epsilon() * frob;
    for _ in 0..MAX_SWEEPS {
        let off: F = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<F>()
            .sqrt();
        if off <= tol {
            return Ok((0..n).map(|i| a[i][i]).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= F::min_positive_value() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (F::of(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NoConvergence(MAX_SWEEPS))
}
