//! Truncated Laurent series in `1/n` with exact rational coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::gaussian::Ring;
use crate::hp::Hp;

/// `Σ_p c_p n^{-p}` for `p` in `[lo, lo + coeffs.len())`.
///
/// `prec = Some(P)` means every coefficient with `p < P` is exact and the
/// remainder is `O(n^{-P})`; `None` means the series is exact.
#[derive(Clone, Debug)]
pub struct LaurentSeries {
    lo: i32,
    coeffs: Vec<BigRational>,
    prec: Option<i32>,
}

impl PartialEq for LaurentSeries {
    fn eq(&self, other: &Self) -> bool {
        if self.prec != other.prec {
            return false;
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..hi).all(|p| self.coeff(p) == other.coeff(p))
    }
}

impl LaurentSeries {
    pub fn zero() -> Self {
        LaurentSeries { lo: 0, coeffs: Vec::new(), prec: None }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    /// `c · n^{-p}`.
    pub fn monomial(c: BigRational, p: i32) -> Self {
        let mut s = LaurentSeries { lo: p, coeffs: vec![c], prec: None };
        s.normalize();
        s
    }

    /// Exact series from coefficients of `n^{-lo}, n^{-lo-1}, ...`.
    pub fn from_coeffs(lo: i32, coeffs: Vec<BigRational>) -> Self {
        let mut s = LaurentSeries { lo, coeffs, prec: None };
        s.normalize();
        s
    }

    /// Exact polynomial `Σ_k a_k n^k` given ascending integer coefficients.
    pub fn polynomial_in_n(ascending: &[BigInt]) -> Self {
        let deg = ascending.len() as i32 - 1;
        let coeffs = ascending.iter().rev().map(|c| BigRational::from_integer(c.clone())).collect();
        Self::from_coeffs(-deg, coeffs)
    }

    /// The zero series known only up to `O(n^{-prec})`.
    pub fn big_o(prec: i32) -> Self {
        LaurentSeries { lo: prec, coeffs: Vec::new(), prec: Some(prec) }
    }

    pub fn precision(&self) -> Option<i32> {
        self.prec
    }

    fn hi(&self) -> i32 {
        self.lo + self.coeffs.len() as i32
    }

    pub fn coeff(&self, p: i32) -> BigRational {
        if p < self.lo || p >= self.hi() {
            BigRational::zero()
        } else {
            self.coeffs[(p - self.lo) as usize].clone()
        }
    }

    /// Nonzero `(p, c_p)` pairs in increasing `p`.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigRational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, c)| (self.lo + i as i32, c))
    }

    /// Smallest `p` with a nonzero coefficient; the precision for a zero series
    /// with a remainder, and `None` for the exact zero.
    pub fn valuation(&self) -> Option<i32> {
        self.terms().next().map(|(p, _)| p).or(self.prec)
    }

    /// Largest `p` carried with a nonzero coefficient.
    pub fn max_power(&self) -> Option<i32> {
        self.terms().last().map(|(p, _)| p)
    }

    fn normalize(&mut self) {
        if let Some(pr) = self.prec {
            let keep = (pr - self.lo).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.lo = self.prec.unwrap_or(0);
        } else if lead > 0 {
            self.coeffs.drain(..lead);
            self.lo += lead as i32;
        }
    }

    /// Drops every term with `p ≥ prec` and records the remainder.
    pub fn truncate(&self, prec: i32) -> Self {
        let mut s = self.clone();
        s.prec = Some(self.prec.map_or(prec, |q| q.min(prec)));
        s.normalize();
        s
    }

    /// Multiplies by `n^k`.
    pub fn shift(&self, k: i32) -> Self {
        LaurentSeries { lo: self.lo - k, coeffs: self.coeffs.clone(), prec: self.prec.map(|p| p - k) }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return match self.prec {
                None => Self::zero(),
                Some(p) => Self::big_o(p),
            };
        }
        LaurentSeries { lo: self.lo, coeffs: self.coeffs.iter().map(|x| x * c).collect(), prec: self.prec }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = match (self.prec, other.prec) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let (a_empty, b_empty) = (self.coeffs.is_empty(), other.coeffs.is_empty());
        let lo = match (a_empty, b_empty) {
            (true, true) => 0,
            (true, false) => other.lo,
            (false, true) => self.lo,
            (false, false) => self.lo.min(other.lo),
        };
        let hi = self.hi().max(other.hi());
        let hi = prec.map_or(hi, |p| hi.min(p)).max(lo);
        let coeffs = (lo..hi).map(|p| self.coeff(p) + other.coeff(p)).collect();
        let mut s = LaurentSeries { lo, coeffs, prec };
        s.normalize();
        s
    }

    pub fn neg(&self) -> Self {
        LaurentSeries { lo: self.lo, coeffs: self.coeffs.iter().map(|c| -c).collect(), prec: self.prec }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let va = self.valuation();
        let vb = other.valuation();
        let prec = match (self.prec, other.prec) {
            (None, None) => None,
            (Some(pa), None) => vb.map(|v| pa + v),
            (None, Some(pb)) => va.map(|v| pb + v),
            (Some(pa), Some(pb)) => Some((pa + vb.unwrap_or(pb)).min(pb + va.unwrap_or(pa))),
        };
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return match prec {
                Some(p) => Self::big_o(p),
                None => Self::zero(),
            };
        }
        let lo = self.lo + other.lo;
        let full = self.coeffs.len() + other.coeffs.len() - 1;
        let len = match prec {
            Some(p) => ((p - lo).max(0) as usize).min(full),
            None => full,
        };
        let mut coeffs = vec![BigRational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len || a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        let mut s = LaurentSeries { lo, coeffs, prec };
        s.normalize();
        s
    }

    /// `exp(self)` for a series with valuation ≥ 1, up to its precision or `prec`.
    pub fn exp_small(&self, prec: i32) -> Self {
        assert!(self.valuation().is_none_or(|v| v >= 1), "exp_small needs a series in O(1/n)");
        let mut result = Self::one().truncate(prec);
        let mut term = Self::one();
        let mut k = 1i64;
        loop {
            term = term.mul(self).truncate(prec).scale(&BigRational::new(BigInt::one(), BigInt::from(k)));
            if term.coeffs.is_empty() {
                break;
            }
            result = result.add(&term);
            k += 1;
        }
        result
    }

    /// `log(1 + self)` for a series with valuation ≥ 1.
    pub fn log1p_small(&self, prec: i32) -> Self {
        assert!(self.valuation().is_none_or(|v| v >= 1), "log1p_small needs a series in O(1/n)");
        let mut result = Self::zero().truncate(prec);
        let mut power = Self::one();
        let mut k = 1i64;
        loop {
            power = power.mul(self).truncate(prec);
            if power.coeffs.is_empty() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            result = result.add(&power.scale(&BigRational::new(BigInt::from(sign), BigInt::from(k))));
            k += 1;
        }
        result
    }

    /// Numeric value at `n`, ignoring the remainder.
    pub fn eval_hp(&self, n: &Hp) -> Hp {
        let bits = n.precision();
        let inv = Hp::one(bits) / n.clone();
        let mut acc = Hp::zero(bits);
        for (p, c) in self.terms() {
            let c = Hp::from_rational(c, bits);
            let pw = if p >= 0 { inv.powi(p as usize) } else { n.powi((-p) as usize) };
            acc = acc + c * pw;
        }
        acc
    }

    pub fn eval_rational(&self, n: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (p, c) in self.terms() {
            acc += c * pow_rational(n, -p);
        }
        acc
    }
}

fn pow_rational(x: &BigRational, e: i32) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        r *= x;
    }
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, c) in self.terms() {
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = crate::rational::to_string(&mag);
            match p {
                0 => write!(f, "{mag}")?,
                _ => write!(f, "{mag}·n^{}", -p)?,
            }
        }
        if let Some(p) = self.prec {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "O(n^{})", -p)?;
        } else if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Ring for LaurentSeries {
    fn zero_like(&self) -> Self {
        Self::zero()
    }
    fn one_like(&self) -> Self {
        Self::one()
    }
    fn vanishes(&self) -> bool {
        self.coeffs.is_empty() && self.prec.is_none()
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn minus(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn times(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn scaled(&self, c: &BigRational) -> Self {
        self.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use proptest::prelude::*;

    fn series(lo: i32, cs: &[i64]) -> LaurentSeries {
        LaurentSeries::from_coeffs(lo, cs.iter().map(|&c| frac(c, 1)).collect())
    }

    #[test]
    fn polynomial_product() {
        // n(n-1) = n^2 - n
        let a = LaurentSeries::polynomial_in_n(&[BigInt::zero(), BigInt::one()]);
        let b = LaurentSeries::polynomial_in_n(&[BigInt::from(-1), BigInt::one()]);
        let p = a.mul(&b);
        assert_eq!(p.coeff(-2), frac(1, 1));
        assert_eq!(p.coeff(-1), frac(-1, 1));
        assert_eq!(p.valuation(), Some(-2));
    }

    #[test]
    fn truncated_product_precision() {
        let a = series(0, &[1, 1, 1]).truncate(3);
        let b = series(1, &[2, 5]).truncate(4);
        let p = a.mul(&b);
        assert_eq!(p.precision(), Some(4));
        assert_eq!(p.coeff(1), frac(2, 1));
        assert_eq!(p.coeff(2), frac(7, 1));
        assert_eq!(p.coeff(3), frac(7, 1));
        assert_eq!(p.coeff(4), frac(0, 1));
    }

    #[test]
    fn exp_log_roundtrip() {
        let x = LaurentSeries::from_coeffs(1, vec![frac(1, 4), frac(1, 4), frac(7, 24)]);
        let e = x.exp_small(8);
        let back = e.sub(&LaurentSeries::one()).log1p_small(8);
        assert_eq!(back, x.truncate(8));
    }

    #[test]
    fn display_form() {
        let s = LaurentSeries::from_coeffs(0, vec![frac(-1, 2), frac(1, 4)]).truncate(2);
        assert_eq!(s.to_string(), "-1/2 + 1/4·n^-1 + O(n^-2)");
        assert_eq!(LaurentSeries::zero().to_string(), "0");
    }

    #[test]
    fn evaluates() {
        let s = series(-1, &[1, -1]);
        assert_eq!(s.eval_rational(&frac(5, 1)), frac(4, 1));
        assert!((s.eval_hp(&Hp::from_i64(5, 128)).to_f64() - 4.0).abs() < 1e-30);
    }

    fn arb_series() -> impl Strategy<Value = LaurentSeries> {
        (-2i32..2, prop::collection::vec(-5i64..5, 0..5)).prop_map(|(lo, cs)| series(lo, &cs))
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_series(), b in arb_series(), c in arb_series()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b).sub(&b), a.clone());
        }

        #[test]
        fn truncation_commutes_with_product(a in arb_series(), b in arb_series(), k in 0i32..4) {
            let exact = a.mul(&b).truncate(k);
            let lhs = a.truncate(k + 4).mul(&b.truncate(k + 4)).truncate(k);
            prop_assert_eq!(lhs, exact);
        }
    }
}
