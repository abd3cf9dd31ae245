//! Exhaustive enumeration.
//!
//! Sign vectors are indexed so that numeric order of the index is the
//! lexicographic order of `x` under `+1 < -1` (and `+1 < -1 < +2 < ... < 0`
//! for wider alphabets). Ties on the objective go to the smallest index.

use rayon::prelude::*;

use super::{discrepancy, Alphabet, SolverOutput};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Most candidates any exhaustive search will visit.
pub const ENUMERATION_CAP: u64 = 1 << 30;

const MAX_PM_M: usize = 30;
const LOW_BITS: usize = 12;

/// `x` minimizing `||A x||_inf` over the alphabet, with the global sign fixed
/// by making the first nonzero entry positive.
pub fn brute_force_sbp<F: Real>(a: &Matrix<F>, alphabet: Alphabet) -> Result<SolverOutput> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("solver input"));
    }
    let (x, budget) = match alphabet {
        Alphabet::PmOne => pm_one(a)?,
        _ => mixed_radix(a, &alphabet.digits())?,
    };
    Ok(SolverOutput {
        value: discrepancy(a, &x).as_f64(),
        x,
        solver: "brute_sbp".into(),
        budget_used: budget,
    })
}

/// `x in {±1}^m` with `x_1 = +1` minimizing `|a^T x|`.
pub fn brute_force_npp<F: Real>(a: &[F]) -> Result<SolverOutput> {
    let row = Matrix::new(1, a.len(), a.to_vec())?;
    let mut out = brute_force_sbp(&row, Alphabet::PmOne)?;
    out.solver = "brute_npp".into();
    Ok(out)
}

fn objective<F: Real>(s: &[F]) -> F {
    s.iter().fold(F::zero(), |m, v| m.max(v.abs()))
}

fn better<F: Real>(a: (F, u64), b: (F, u64)) -> (F, u64) {
    match a.0.partial_cmp(&b.0) {
        Some(std::cmp::Ordering::Less) => a,
        Some(std::cmp::Ordering::Greater) => b,
        _ => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

fn pm_one<F: Real>(a: &Matrix<F>) -> Result<(Vec<i64>, u64)> {
    let (n, m) = (a.rows(), a.cols());
    if m == 0 {
        return Err(Error::Solver("empty instance".into()));
    }
    if m > MAX_PM_M {
        return Err(Error::Solver(format!(
            "exhaustive search needs m <= {MAX_PM_M}, got {m}"
        )));
    }
    let free = m - 1;
    let low = free.min(LOW_BITS);
    let high = free - low;
    let cols: Vec<Vec<F>> = (0..m).map(|j| a.column(j)).collect();
    // bit b of the index drives coordinate m - 1 - b; a set bit means -1
    let sign_of = |k: u64, j: usize| -> F {
        if j == 0 || (k >> (m - 1 - j)) & 1 == 0 {
            F::one()
        } else {
            -F::one()
        }
    };
    let best = (0..1u64 << high)
        .into_par_iter()
        .map(|h| {
            let base = h << low;
            let mut s = vec![F::zero(); n];
            for (j, col) in cols.iter().enumerate() {
                let sg = sign_of(base, j);
                for (si, &v) in s.iter_mut().zip(col) {
                    *si = *si + sg * v;
                }
            }
            let mut best = (objective(&s), base);
            let mut gray = 0u64;
            for g in 1..1u64 << low {
                let bit = g.trailing_zeros() as usize;
                gray ^= 1 << bit;
                let j = m - 1 - bit;
                // the flipped coordinate's new sign is -1 iff its bit is now set
                let delta = if gray >> bit & 1 == 1 {
                    -F::of(2.0)
                } else {
                    F::of(2.0)
                };
                for (si, &v) in s.iter_mut().zip(&cols[j]) {
                    *si = *si + delta * v;
                }
                best = better(best, (objective(&s), base | gray));
            }
            best
        })
        .reduce_with(better)
        .expect("at least one chunk");
    let x = (0..m)
        .map(|j| {
            if sign_of(best.1, j) > F::zero() {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok((x, 1u64 << free))
}

fn mixed_radix<F: Real>(a: &Matrix<F>, digits: &[i64]) -> Result<(Vec<i64>, u64)> {
    let (n, m) = (a.rows(), a.cols());
    if m == 0 {
        return Err(Error::Solver("empty instance".into()));
    }
    let r = digits.len() as u64;
    let total = (0..m).try_fold(1u64, |acc, _| {
        acc.checked_mul(r).filter(|&v| v <= ENUMERATION_CAP)
    });
    let total = total.ok_or_else(|| {
        Error::Solver(format!(
            "{}^{m} candidates exceed the enumeration cap 2^30",
            r
        ))
    })?;
    let cols: Vec<Vec<F>> = (0..m).map(|j| a.column(j)).collect();
    // leading coordinates are fixed per parallel chunk
    let lead = (0..m)
        .take_while(|&k| r.pow(k as u32 + 1) <= 4096)
        .count()
        .min(m);
    let tail = m - lead;
    let tail_size = r.pow(tail as u32);
    let best = (0..r.pow(lead as u32))
        .into_par_iter()
        .filter_map(|h| {
            let mut d = vec![0usize; m];
            let mut rest = h;
            for k in (0..lead).rev() {
                d[k] = (rest % r) as usize;
                rest /= r;
            }
            let mut s = vec![F::zero(); n];
            for (j, col) in cols.iter().enumerate() {
                let v = F::of(digits[d[j]] as f64);
                for (si, &c) in s.iter_mut().zip(col) {
                    *si = *si + v * c;
                }
            }
            let mut best: Option<(F, u64)> = None;
            for t in 0..tail_size {
                if t > 0 {
                    // odometer step over the tail digits, last coordinate fastest
                    let mut k = m - 1;
                    loop {
                        let old = digits[d[k]];
                        d[k] = (d[k] + 1) % r as usize;
                        let diff = F::of((digits[d[k]] - old) as f64);
                        for (si, &c) in s.iter_mut().zip(&cols[k]) {
                            *si = *si + diff * c;
                        }
                        if d[k] != 0 {
                            break;
                        }
                        k -= 1;
                    }
                }
                match d.iter().map(|&i| digits[i]).find(|&v| v != 0) {
                    Some(v) if v > 0 => {
                        let cand = (objective(&s), h * tail_size + t);
                        best = Some(best.map_or(cand, |b| better(b, cand)));
                    }
                    _ => {}
                }
            }
            best
        })
        .reduce_with(better)
        .ok_or_else(|| Error::Solver("no admissible candidate".into()))?;
    let mut x = vec![0; m];
    let mut rest = best.1;
    for k in (0..m).rev() {
        x[k] = digits[(rest % r) as usize];
        rest /= r;
    }
    Ok((x, total))
}
