//! The normalized CRT map `φ̃ : ⊕ (1/p_i) Z/p_i Z -> (1/q) Z/q Z`,
//! `φ̃(y) = Σ c_i y_i mod 1`.
//!
//! Elements are handled through integer numerators: `y_i = k_i / p_i` and
//! `z = g / q`. With `c_i = (q/p_i)^{-1} mod p_i` the map on numerators is
//! `g = Σ c_i (q/p_i) k_i mod q`, which is the plain CRT isomorphism.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::primes::is_prime;
use crate::error::{Error, Result};
use crate::rational::{bigint_string, bigint_vec_string};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrtSystem {
    #[serde(with = "bigint_vec_string")]
    pub p: Vec<BigInt>,
    #[serde(with = "bigint_string")]
    pub q: BigInt,
    /// Normalized coefficients, `c_i in [1, p_i)`.
    #[serde(with = "bigint_vec_string")]
    pub c: Vec<BigInt>,
}

pub fn crt_build(p: &[u64]) -> Result<CrtSystem> {
    if p.is_empty() {
        return Err(Error::BadModuli("no moduli".into()));
    }
    for (i, &pi) in p.iter().enumerate() {
        if !is_prime(pi) {
            return Err(Error::BadModuli(format!("{pi} is not prime")));
        }
        if p[..i].contains(&pi) {
            return Err(Error::BadModuli(format!("{pi} repeated")));
        }
    }
    let pb: Vec<BigInt> = p.iter().map(|&v| BigInt::from(v)).collect();
    let q: BigInt = pb.iter().product();
    let c = pb
        .iter()
        .map(|pi| {
            let r = (&q / pi).mod_floor(pi);
            let g = r.extended_gcd(pi);
            debug_assert!(g.gcd.is_one());
            g.x.mod_floor(pi)
        })
        .collect();
    Ok(CrtSystem { p: pb, q, c })
}

impl CrtSystem {
    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn p_u64(&self) -> Vec<u64> {
        self.p
            .iter()
            .map(|v| v.to_u64().expect("prime fits u64"))
            .collect()
    }

    pub fn min_p(&self) -> u64 {
        self.p_u64().into_iter().min().expect("n >= 1")
    }

    /// `(q / p_i) c_i`, the coefficients of the unnormalized map; each is a
    /// multiple of `q / p_i` and is `1 mod p_i`.
    pub fn plain_coefficients(&self) -> Vec<BigInt> {
        self.p
            .iter()
            .zip(&self.c)
            .map(|(pi, ci)| (&self.q / pi) * ci)
            .collect()
    }

    /// Numerator `g` of `φ̃(k / p)`, in `[0, q)`.
    pub fn phi_numerators(&self, k: &[BigInt]) -> BigInt {
        self.plain_coefficients()
            .iter()
            .zip(k)
            .fold(BigInt::zero(), |acc, (a, ki)| acc + a * ki)
            .mod_floor(&self.q)
    }

    /// `φ̃(y)` for `y_i` with denominators dividing `p_i`.
    pub fn phi(&self, y: &[BigRational]) -> Result<BigRational> {
        if y.len() != self.n() {
            return Err(Error::Dimension(format!(
                "{} residues for {} moduli",
                y.len(),
                self.n()
            )));
        }
        let mut k = Vec::with_capacity(y.len());
        for (yi, pi) in y.iter().zip(&self.p) {
            let scaled = yi * BigRational::from_integer(pi.clone());
            if !scaled.is_integer() {
                return Err(Error::OffGrid(format!("{yi} is not a multiple of 1/{pi}")));
            }
            k.push(scaled.to_integer());
        }
        Ok(BigRational::new(self.phi_numerators(&k), self.q.clone()))
    }

    /// Numerators `g mod p_i` of `φ̃^{-1}(g / q)`.
    pub fn inverse_numerators(&self, g: &BigInt) -> Vec<BigInt> {
        self.p.iter().map(|pi| g.mod_floor(pi)).collect()
    }

    /// `φ̃^{-1}(z) = ((q / p_i) z mod 1)_i` for `z` on the `1/q` grid.
    pub fn crt_inverse(&self, z: &BigRational) -> Result<Vec<BigRational>> {
        let scaled = z * BigRational::from_integer(self.q.clone());
        if !scaled.is_integer() {
            return Err(Error::OffGrid(format!(
                "{z} is not a multiple of 1/{}",
                self.q
            )));
        }
        let g = scaled.to_integer();
        Ok(self
            .inverse_numerators(&g)
            .into_iter()
            .zip(&self.p)
            .map(|(k, pi)| BigRational::new(k, pi.clone()))
            .collect())
    }

    /// `q <= (320 n m)^n`.
    pub fn q_within(&self, m: usize) -> bool {
        let base = BigInt::from(320u64) * BigInt::from(self.n() as u64) * BigInt::from(m as u64);
        self.q <= num_traits::pow(base, self.n())
    }
}

/// Balanced representative of `k / p` in `(-1/2, 1/2]`.
pub fn balanced(k: &BigInt, p: &BigInt) -> BigRational {
    let r = k.mod_floor(p);
    let v = BigRational::new(r, p.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if v > half {
        v - BigRational::one()
    } else {
        v
    }
}

/// Outcome of enumerating the whole domain of a small system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrtCheck {
    pub bijective: bool,
    pub homomorphic: bool,
    pub roundtrip: bool,
}

impl CrtCheck {
    pub fn pass(&self) -> bool {
        self.bijective && self.homomorphic && self.roundtrip
    }
}

/// Exhaustive check of `φ̃` on every domain element and every pair, in
/// machine integers. Meant for `q` up to a few thousand.
pub fn crt_exhaustive_check(sys: &CrtSystem) -> Result<CrtCheck> {
    let q =
        sys.q.to_u64().filter(|&q| q <= 1 << 16).ok_or_else(|| {
            Error::InvalidParameter("exhaustive CRT check needs q <= 65536".into())
        })?;
    let p = sys.p_u64();
    let plain: Vec<u64> = sys
        .plain_coefficients()
        .iter()
        .map(|v| (v % &sys.q).to_u64().expect("< q"))
        .collect();
    let digits = |mut idx: u64| -> Vec<u64> {
        p.iter()
            .map(|&pi| {
                let d = idx % pi;
                idx /= pi;
                d
            })
            .collect()
    };
    let index = |d: &[u64]| -> u64 {
        d.iter()
            .zip(&p)
            .rev()
            .fold(0, |acc, (&di, &pi)| acc * pi + di)
    };
    let table: Vec<u64> = (0..q)
        .map(|idx| {
            digits(idx)
                .iter()
                .zip(&plain)
                .map(|(d, c)| d * c % q)
                .sum::<u64>()
                % q
        })
        .collect();

    let mut hit = vec![false; q as usize];
    for &g in &table {
        hit[g as usize] = true;
    }
    let bijective = hit.iter().all(|&h| h);

    let roundtrip = (0..q).all(|idx| {
        let back: Vec<u64> = p.iter().map(|&pi| table[idx as usize] % pi).collect();
        back == digits(idx)
    }) && (0..q).all(|g| {
        let k: Vec<u64> = p.iter().map(|&pi| g % pi).collect();
        table[index(&k) as usize] == g
    });

    // flat digit table and mixed-radix strides keep the q^2 loop allocation free
    let n = p.len();
    let flat: Vec<u64> = (0..q).flat_map(digits).collect();
    let strides: Vec<u64> = p
        .iter()
        .scan(1, |acc, &pi| {
            let s = *acc;
            *acc *= pi;
            Some(s)
        })
        .collect();
    let homomorphic = (0..q as usize).into_par_iter().all(|a| {
        let da = &flat[a * n..(a + 1) * n];
        let ta = table[a];
        (0..q as usize).all(|b| {
            let db = &flat[b * n..(b + 1) * n];
            let mut idx = 0;
            for i in 0..n {
                let mut d = da[i] + db[i];
                if d >= p[i] {
                    d -= p[i];
                }
                idx += d * strides[i];
            }
            let mut want = ta + table[b];
            if want >= q {
                want -= q;
            }
            table[idx as usize] == want
        })
    });
    Ok(CrtCheck {
        bijective,
        homomorphic,
        roundtrip,
    })
}

/// `⌊a p_i⌋` for every entry of row `i`: numerators of `⌊A⌋_p`.
pub fn floor_p_numerators<F: crate::scalar::Real>(
    a: &crate::matrix::Matrix<F>,
    p: &[u64],
) -> Result<crate::matrix::Matrix<i64>> {
    if a.rows() != p.len() {
        return Err(Error::Dimension(format!(
            "{} rows, {} moduli",
            a.rows(),
            p.len()
        )));
    }
    let mut out = crate::matrix::Matrix::zeros(a.rows(), a.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = a[(i, j)];
            if !(v >= F::zero() && v < F::one()) {
                return Err(Error::OutOfUnitRange(v.as_f64()));
            }
            let k = (v * F::of(p[i] as f64)).floor().as_f64() as i64;
            out[(i, j)] = k.min(p[i] as i64 - 1);
        }
    }
    Ok(out)
}

/// `⌊A⌋_p` entry-wise as exact rationals `⌊A_ij p_i⌋ / p_i`.
pub fn floor_p<F: crate::scalar::Real>(
    a: &crate::matrix::Matrix<F>,
    p: &[u64],
) -> Result<crate::matrix::Matrix<BigRational>> {
    let k = floor_p_numerators(a, p)?;
    Ok(crate::matrix::Matrix::from_fn(
        k.rows(),
        k.cols(),
        |i, j| BigRational::new(BigInt::from(k[(i, j)]), BigInt::from(p[i])),
    ))
}

/// Sum of absolute values of the balanced representatives.
pub fn balanced_l1(k: &[BigInt], p: &[BigInt]) -> BigRational {
    k.iter()
        .zip(p)
        .map(|(ki, pi)| balanced(ki, pi).abs())
        .fold(BigRational::zero(), |a, b| a + b)
}
