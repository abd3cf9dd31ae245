use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;

use super::basis::{Basis, LatticeVector};
use super::hnf::{hermite_normal_form, Hnf};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{self, as_integer_matrix, int_to_rational, invert};

/// `L(S) ⊆ L(B)` witnessed by the integer change of basis `S = B M`.
#[derive(Clone, Debug)]
pub struct SublatticePair {
    b: Basis,
    s: Basis,
    m: Matrix<BigInt>,
    m_inv: Matrix<BigRational>,
    hnf: Hnf,
    coset_bounds: Vec<u64>,
}

impl SublatticePair {
    /// Builds `S = B M` from an integer matrix `M` with `det M != 0`.
    pub fn from_change_of_basis(b: Basis, m: Matrix<BigInt>) -> Result<Self> {
        if m.rows() != b.dim() || !m.is_square() {
            return Err(Error::Dimension("M must be n x n".into()));
        }
        let s_entries = b.entries().matmul(&int_to_rational(&m))?;
        let s = Basis::new(s_entries)?;
        Self::assemble(b, s, m)
    }

    /// Recovers `M = B^{-1} S` and rejects `S` unless `M` is integral.
    pub fn from_bases(b: Basis, s: Basis) -> Result<Self> {
        if b.dim() != s.dim() {
            return Err(Error::Dimension("B and S differ in dimension".into()));
        }
        let m_rat = b.inverse().matmul(s.entries())?;
        let m = as_integer_matrix(&m_rat)
            .ok_or_else(|| Error::NotSublattice("B^{-1} S is not integral".into()))?;
        Self::assemble(b, s, m)
    }

    fn assemble(b: Basis, s: Basis, m: Matrix<BigInt>) -> Result<Self> {
        let (m_inv, _) = invert(&int_to_rational(&m))?;
        let hnf = hermite_normal_form(&m)?;
        let coset_bounds = hnf
            .diagonal()
            .iter()
            .map(|d| {
                d.to_u64().ok_or_else(|| {
                    Error::InvalidParameter(format!("sublattice index factor {d} exceeds u64"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            b,
            s,
            m,
            m_inv,
            hnf,
            coset_bounds,
        })
    }

    pub fn b(&self) -> &Basis {
        &self.b
    }

    pub fn s(&self) -> &Basis {
        &self.s
    }

    pub fn change_of_basis(&self) -> &Matrix<BigInt> {
        &self.m
    }

    pub fn hnf(&self) -> &Hnf {
        &self.hnf
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    /// `[L(B) : L(S)] = |det M|`.
    pub fn index(&self) -> BigInt {
        self.hnf.diagonal().iter().product::<BigInt>().abs()
    }

    /// Reduces integer coefficients `z` (w.r.t. `B`) so that `B z` lands in
    /// `P(S)`; exact.
    pub fn reduce_coefficients(&self, z: &[BigInt]) -> Vec<BigInt> {
        let zr: Vec<BigRational> = z
            .iter()
            .map(|v| BigRational::from_integer(v.clone()))
            .collect();
        let w = self.m_inv.mul_vec(&zr);
        let shift: Vec<BigInt> = w.iter().map(|v| v.floor().to_integer()).collect();
        let ms = self.m.mul_vec(&shift);
        z.iter().zip(ms).map(|(a, b)| a - b).collect()
    }

    /// Uniform element of `L(B) mod P(S)`.
    ///
    /// With `M U = H` lower triangular, `{z : 0 <= z_i < H_ii}` is a complete
    /// residue system for `Z^n / M Z^n`, so drawing each `z_i` uniformly and
    /// reducing `B z` into `P(S)` is uniform over the `|det M|` cosets.
    pub fn sample_coset_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> LatticeVector {
        let z: Vec<BigInt> = self
            .coset_bounds
            .iter()
            .map(|&h| BigInt::from(rng.gen_range(0..h)))
            .collect();
        let reduced = self.reduce_coefficients(&z);
        let coords = self
            .b
            .entries()
            .mul_vec(
                &reduced
                    .iter()
                    .map(|v| BigRational::from_integer(v.clone()))
                    .collect::<Vec<_>>(),
            )
            .iter()
            .map(rational::to_f64)
            .collect();
        LatticeVector {
            coords,
            coeffs: Some(
                reduced
                    .iter()
                    .map(|v| v.to_i64().expect("coset coefficient fits i64"))
                    .collect(),
            ),
        }
    }

    /// `S^{-1} B z` computed exactly; every entry in `[0, 1)` iff `B z ∈ P(S)`.
    pub fn s_coordinates(&self, z: &[i64]) -> Vec<BigRational> {
        let zr: Vec<BigRational> = z
            .iter()
            .map(|&v| BigRational::from_integer(v.into()))
            .collect();
        self.m_inv.mul_vec(&zr)
    }

    pub fn in_s_parallelepiped(&self, z: &[i64]) -> bool {
        let one = BigRational::from_integer(1.into());
        self.s_coordinates(z)
            .iter()
            .all(|v| !v.is_negative() && v < &one)
    }

    /// Enumerates the coset representatives in `P(S)` (as `B`-coefficients).
    pub fn coset_representatives(&self) -> Vec<Vec<i64>> {
        let mut out = vec![];
        let mut z = vec![0u64; self.coset_bounds.len()];
        loop {
            let zi: Vec<BigInt> = z.iter().map(|&v| BigInt::from(v)).collect();
            out.push(
                self.reduce_coefficients(&zi)
                    .iter()
                    .map(|v| v.to_i64().expect("fits i64"))
                    .collect(),
            );
            let mut k = 0;
            loop {
                if k == z.len() {
                    return out;
                }
                z[k] += 1;
                if z[k] < self.coset_bounds[k] {
                    break;
                }
                z[k] = 0;
                k += 1;
            }
        }
    }
}
