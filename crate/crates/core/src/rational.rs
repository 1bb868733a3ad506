//! Parsing and formatting of exact rationals as `"p/q"` strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn frac(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `"p/q"` in lowest terms, or `"p"` for integers.
pub fn to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(p))
        }
    }
}

/// Lossy conversion used only for diagnostics and bounds with slack.
pub fn to_f64(r: &BigRational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    // Scale so both sides fit comfortably in f64 range.
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = (nb.max(db) - 900).max(0);
    let n2: BigInt = n >> shift;
    let d2: BigInt = d >> shift;
    if d2.is_zero() {
        return if n.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    let nf: f64 = n2.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d2.to_string().parse().unwrap_or(f64::NAN);
    nf / df
}
