//! Successive minima by exhaustive enumeration. Only meant for tiny
//! dimensions; the coefficient box grows exponentially in `n`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::basis::Basis;
use crate::error::{Error, Result};

const MAX_BOX: u128 = 20_000_000;

/// Squared successive minima `λ_1^2 <= ... <= λ_n^2`, exact.
pub fn successive_minima_sq(basis: &Basis) -> Result<Vec<BigRational>> {
    let n = basis.dim();
    let entries = basis.entries();
    let denom = entries
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled: Vec<i128> = entries
        .iter()
        .map(|v| {
            (v * BigRational::from_integer(denom.clone()))
                .to_integer()
                .to_i128()
                .ok_or_else(|| {
                    Error::InvalidParameter("basis entries too large to enumerate".into())
                })
        })
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| scaled[i * n + j];

    // the basis columns themselves give n independent vectors of norm <= max column norm
    let radius_sq: i128 = (0..n)
        .map(|j| (0..n).map(|i| at(i, j) * at(i, j)).sum::<i128>())
        .max()
        .unwrap_or(0);
    let radius = (radius_sq as f64).sqrt() / denom.to_f64().unwrap_or(f64::INFINITY);
    let inv = basis.inverse_f64();
    let bounds: Vec<i64> = (0..n)
        .map(|i| {
            let row_norm = inv.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            (row_norm * radius * (1.0 + 1e-9)).floor() as i64 + 1
        })
        .collect();
    let box_size: u128 = bounds.iter().map(|&b| (2 * b + 1) as u128).product();
    if box_size > MAX_BOX {
        return Err(Error::UnsupportedProfile(format!(
            "enumeration box of {box_size} points is too large (n = {n})"
        )));
    }

    let mut short: Vec<(i128, Vec<i128>)> = vec![];
    let mut z: Vec<i64> = bounds.iter().map(|&b| -b).collect();
    loop {
        if z.iter().any(|&v| v != 0) {
            let v: Vec<i128> = (0..n)
                .map(|i| (0..n).map(|j| at(i, j) * z[j] as i128).sum())
                .collect();
            let nsq: i128 = v.iter().map(|x| x * x).sum();
            if nsq <= radius_sq {
                short.push((nsq, v));
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return finish(short, n, &denom);
            }
            z[k] += 1;
            if z[k] <= bounds[k] {
                break;
            }
            z[k] = -bounds[k];
            k += 1;
        }
    }
}

fn finish(mut short: Vec<(i128, Vec<i128>)>, n: usize, denom: &BigInt) -> Result<Vec<BigRational>> {
    short.sort_by_key(|(nsq, _)| *nsq);
    let mut echelon: Vec<Vec<BigRational>> = vec![];
    let mut minima = vec![];
    let d2 = BigRational::from_integer(denom * denom);
    for (nsq, v) in short {
        let mut w: Vec<BigRational> = v
            .iter()
            .map(|&x| BigRational::from_integer(x.into()))
            .collect();
        for row in &echelon {
            let p = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
            if !w[p].is_zero() {
                let f = &w[p] / &row[p];
                for (wi, ri) in w.iter_mut().zip(row) {
                    *wi -= &f * ri;
                }
            }
        }
        if w.iter().any(|x| !x.is_zero()) {
            echelon.push(w);
            minima.push(BigRational::from_integer(nsq.into()) / &d2);
            if minima.len() == n {
                return Ok(minima);
            }
        }
    }
    Err(Error::InvalidParameter(
        "enumeration did not find n independent vectors".into(),
    ))
}
