//! Column-style Hermite normal form over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// `M U = H` with `U` unimodular and `H` lower triangular, positive on the
/// diagonal, and `0 <= H[i][j] < H[i][i]` for `j < i`.
#[derive(Clone, Debug)]
pub struct Hnf {
    pub h: Matrix<BigInt>,
    pub u: Matrix<BigInt>,
}

impl Hnf {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.h.rows()).map(|i| self.h[(i, i)].clone()).collect()
    }
}

fn combine_columns(
    m: &mut Matrix<BigInt>,
    i: usize,
    j: usize,
    (a, b, c, d): (&BigInt, &BigInt, &BigInt, &BigInt),
) {
    // col_i <- a col_i + b col_j ; col_j <- c col_i + d col_j
    for r in 0..m.rows() {
        let ci = m[(r, i)].clone();
        let cj = m[(r, j)].clone();
        m[(r, i)] = a * &ci + b * &cj;
        m[(r, j)] = c * &ci + d * &cj;
    }
}

fn sub_multiple(m: &mut Matrix<BigInt>, target: usize, source: usize, k: &BigInt) {
    for r in 0..m.rows() {
        let v = &m[(r, source)] * k;
        m[(r, target)] -= v;
    }
}

fn negate_column(m: &mut Matrix<BigInt>, j: usize) {
    for r in 0..m.rows() {
        m[(r, j)] = -m[(r, j)].clone();
    }
}

pub fn hermite_normal_form(m: &Matrix<BigInt>) -> Result<Hnf> {
    if !m.is_square() {
        return Err(Error::Dimension("HNF expects a square matrix".into()));
    }
    let n = m.rows();
    let mut h = m.clone();
    let mut u = Matrix::<BigInt>::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if h[(i, j)].is_zero() {
                continue;
            }
            let a = h[(i, i)].clone();
            let b = h[(i, j)].clone();
            let eg = a.extended_gcd(&b);
            let g = eg.gcd;
            // [[x, -b/g], [y, a/g]] has determinant 1
            let coeffs = (&eg.x, &eg.y, &(-(&b / &g)), &(&a / &g));
            combine_columns(&mut h, i, j, coeffs);
            combine_columns(&mut u, i, j, coeffs);
        }
        if h[(i, i)].is_zero() {
            return Err(Error::Singular);
        }
        if h[(i, i)].is_negative() {
            negate_column(&mut h, i);
            negate_column(&mut u, i);
        }
        let d = h[(i, i)].clone();
        for j in 0..i {
            let k = h[(i, j)].div_floor(&d);
            if !k.is_zero() {
                sub_multiple(&mut h, j, i, &k);
                sub_multiple(&mut u, j, i, &k);
            }
        }
    }
    debug_assert!((0..n).all(|i| h[(i, i)] >= BigInt::one()));
    Ok(Hnf { h, u })
}
