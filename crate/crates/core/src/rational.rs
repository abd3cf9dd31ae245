//! Exact rational linear algebra and the decimal-string wire format for
//! arbitrary-precision values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Gauss-Jordan elimination. Returns `(inverse, determinant)`.
pub fn invert(m: &Matrix<BigRational>) -> Result<(Matrix<BigRational>, BigRational)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{}x{} is not square",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = Matrix::<BigRational>::identity(n);
    let mut det = BigRational::one();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[(r, col)].is_zero())
            .ok_or(Error::Singular)?;
        if pivot != col {
            for j in 0..n {
                let t = a[(col, j)].clone();
                a[(col, j)] = a[(pivot, j)].clone();
                a[(pivot, j)] = t;
                let t = inv[(col, j)].clone();
                inv[(col, j)] = inv[(pivot, j)].clone();
                inv[(pivot, j)] = t;
            }
            det = -det;
        }
        let p = a[(col, col)].clone();
        det *= &p;
        for j in 0..n {
            a[(col, j)] = &a[(col, j)] / &p;
            inv[(col, j)] = &inv[(col, j)] / &p;
        }
        for r in 0..n {
            if r == col || a[(r, col)].is_zero() {
                continue;
            }
            let f = a[(r, col)].clone();
            for j in 0..n {
                let da = &f * &a[(col, j)];
                a[(r, j)] -= da;
                let di = &f * &inv[(col, j)];
                inv[(r, j)] -= di;
            }
        }
    }
    Ok((inv, det))
}

pub fn determinant(m: &Matrix<BigRational>) -> Result<BigRational> {
    match invert(m) {
        Ok((_, d)) => Ok(d),
        Err(Error::Singular) => Ok(BigRational::zero()),
        Err(e) => Err(e),
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn matrix_to_f64(m: &Matrix<BigRational>) -> Matrix<f64> {
    m.map(to_f64)
}

pub fn int_to_rational(m: &Matrix<BigInt>) -> Matrix<BigRational> {
    m.map(|v| BigRational::from_integer(v.clone()))
}

pub fn from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or(Error::NonFinite("rational conversion"))
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Returns the integer matrix if every entry is integral.
pub fn as_integer_matrix(m: &Matrix<BigRational>) -> Option<Matrix<BigInt>> {
    if m.iter().all(|v| v.is_integer()) {
        Some(m.map(|v| v.to_integer()))
    } else {
        None
    }
}

/// A rational as a pair of decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalRepr {
    fn from(r: &BigRational) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl RationalRepr {
    pub fn to_rational(&self) -> Result<BigRational> {
        let num: BigInt = self
            .num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator {:?}", self.num)))?;
        let den: BigInt = self
            .den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator {:?}", self.den)))?;
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(BigRational::new(num, den))
    }
}

pub fn matrix_to_repr(m: &Matrix<BigRational>) -> Vec<Vec<RationalRepr>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(RationalRepr::from).collect())
        .collect()
}

pub fn matrix_from_repr(rows: &[Vec<RationalRepr>]) -> Result<Matrix<BigRational>> {
    let parsed = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(RationalRepr::to_rational)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(parsed)
}

/// Serde adapter writing a `BigInt` as a decimal string.
pub mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<BigInt>` as decimal strings.
pub mod bigint_vec_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}
