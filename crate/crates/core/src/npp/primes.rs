use crate::error::{Error, Result};

/// Deterministic Miller–Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in SMALL {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The `n` smallest primes in `[32 n m, 320 n m]`.
pub fn select_primes(n: usize, m: usize) -> Result<Vec<u64>> {
    if n == 0 || m < n {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1 and m >= n, got n = {n}, m = {m}"
        )));
    }
    let nm = (n as u64)
        .checked_mul(m as u64)
        .and_then(|v| v.checked_mul(320))
        .ok_or_else(|| Error::InvalidParameter("320 n m overflows u64".into()))?
        / 320;
    let (lo, hi) = (32 * nm, 320 * nm);
    let mut out = Vec::with_capacity(n);
    let mut k = lo;
    while k <= hi && out.len() < n {
        if is_prime(k) {
            out.push(k);
        }
        k += 1;
    }
    if out.len() < n {
        return Err(Error::NotEnoughPrimes {
            lo,
            hi,
            found: out.len(),
            needed: n,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve(limit: usize) -> Vec<bool> {
        let mut p = vec![true; limit + 1];
        p[0] = false;
        p[1] = false;
        let mut i = 2;
        while i * i <= limit {
            if p[i] {
                let mut j = i * i;
                while j <= limit {
                    p[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        p
    }

    #[test]
    fn miller_rabin_matches_sieve() {
        let s = sieve(100_000);
        for (k, &p) in s.iter().enumerate() {
            assert_eq!(is_prime(k as u64), p, "{k}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
    }

    #[test]
    fn examples() {
        assert_eq!(select_primes(1, 1).unwrap(), vec![37]);
        assert_eq!(select_primes(2, 4).unwrap(), vec![257, 263]);
        assert_eq!(select_primes(2, 12).unwrap(), vec![769, 773]);
        assert!(select_primes(3, 2).is_err());
    }
}
