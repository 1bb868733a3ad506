//! High-precision floating point on top of `astro-float`.
//!
//! [`Hp`] carries its own precision (in bits) and uses round-to-nearest; every
//! operation of the underlying library is correctly rounded, which is what the
//! outward-widened [`Interval`] relies on.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision in bits.
pub const DEFAULT_BITS: usize = 256;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

#[derive(Clone)]
pub struct Hp {
    v: BigFloat,
    p: usize,
}

impl Hp {
    fn wrap(v: BigFloat, p: usize) -> Self {
        Hp { v, p }
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn zero(p: usize) -> Self {
        Self::from_i64(0, p)
    }

    pub fn one(p: usize) -> Self {
        Self::from_i64(1, p)
    }

    pub fn from_i64(x: i64, p: usize) -> Self {
        Self::wrap(BigFloat::from_i64(x, p), p)
    }

    pub fn from_f64(x: f64, p: usize) -> Self {
        Self::wrap(BigFloat::from_f64(x, p), p)
    }

    pub fn from_bigint(x: &BigInt, p: usize) -> Self {
        let s = x.to_string();
        let v = with_consts(|cc| BigFloat::parse(&s, Radix::Dec, p, RM, cc));
        Self::wrap(v, p)
    }

    pub fn from_rational(x: &BigRational, p: usize) -> Self {
        let n = Self::from_bigint(x.numer(), p + 64);
        let d = Self::from_bigint(x.denom(), p + 64);
        let mut q = &n / &d;
        q.set_precision(p);
        q
    }

    pub fn pi(p: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(p, RM)), p)
    }

    pub fn set_precision(&mut self, p: usize) {
        self.v.set_precision(p, RM).expect("valid precision");
        self.p = p;
    }

    pub fn ln(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.ln(self.p, RM, cc)), self.p)
    }

    pub fn exp(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.exp(self.p, RM, cc)), self.p)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.v.sqrt(self.p, RM), self.p)
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.p)
    }

    pub fn powi(&self, k: usize) -> Self {
        Self::wrap(self.v.powi(k, self.p, RM), self.p)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.v.is_nan() {
            return "NaN".into();
        }
        if self.v.is_inf() {
            return if self.v.is_negative() { "-inf".into() } else { "inf".into() };
        }
        if self.v.is_zero() {
            return "0".into();
        }
        let s = with_consts(|cc| self.v.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into());
        let (mant, exp) = match s.split_once('e') {
            Some((m, e)) => (m.to_string(), e.parse::<i64>().unwrap_or(0)),
            None => (s.clone(), 0),
        };
        let (sign, mant) = match mant.strip_prefix('-') {
            Some(m) => ("-", m.to_string()),
            None => ("", mant),
        };
        let digits_only: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
        let keep = digits.max(1).min(digits_only.len());
        let head = &digits_only[..keep];
        let lead = &head[..1];
        let rest = &head[1..];
        if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_decimal(20).parse().unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(30))
    }
}

impl fmt::Display for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(f.precision().unwrap_or(30)))
    }
}

impl PartialEq for Hp {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Hp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Hp> for &Hp {
            type Output = Hp;
            fn $m(self, rhs: &Hp) -> Hp {
                let p = self.p.max(rhs.p);
                Hp::wrap(self.v.$m(&rhs.v, p, RM), p)
            }
        }
        impl $tr<Hp> for Hp {
            type Output = Hp;
            fn $m(self, rhs: Hp) -> Hp {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Hp> for Hp {
            type Output = Hp;
            fn $m(self, rhs: &Hp) -> Hp {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp::wrap(self.v.neg(), self.p)
    }
}

impl Neg for &Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp::wrap(self.v.clone().neg(), self.p)
    }
}

/// Closed interval `[lo, hi]` of high-precision floats.
///
/// Operations round to nearest and then widen outward by a few ulps, so the true
/// real result always lies inside the returned interval.
#[derive(Clone, Debug)]
pub struct Interval {
    pub lo: Hp,
    pub hi: Hp,
}

impl Interval {
    fn slack(x: &Hp) -> Hp {
        // 2^-(p-4) relative plus an absolute floor far below any value we compare.
        let p = x.p;
        let eps = Hp::from_i64(2, p).powi(p - 4);
        let floor = Hp::from_i64(2, p).powi(4 * p);
        &(&x.abs() / &eps) + &(&Hp::one(p) / &floor)
    }

    fn down(x: Hp) -> Hp {
        let s = Self::slack(&x);
        &x - &s
    }

    fn up(x: Hp) -> Hp {
        let s = Self::slack(&x);
        &x + &s
    }

    pub fn point(x: Hp) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn from_rational(x: &BigRational, p: usize) -> Self {
        let v = Hp::from_rational(x, p);
        Interval { lo: Self::down(v.clone()), hi: Self::up(v) }
    }

    pub fn add(&self, o: &Self) -> Self {
        Interval { lo: Self::down(&self.lo + &o.lo), hi: Self::up(&self.hi + &o.hi) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Interval { lo: Self::down(&self.lo - &o.hi), hi: Self::up(&self.hi - &o.lo) }
    }

    /// Multiplication by a nonnegative interval.
    pub fn mul_nonneg(&self, o: &Self) -> Self {
        debug_assert!(!o.lo.is_negative());
        let cands = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if *c < lo {
                lo = c.clone();
            }
            if *c > hi {
                hi = c.clone();
            }
        }
        Interval { lo: Self::down(lo), hi: Self::up(hi) }
    }

    /// Division by a positive exact scalar.
    pub fn div_pos(&self, d: &Hp) -> Self {
        Interval { lo: Self::down(&self.lo / d), hi: Self::up(&self.hi / d) }
    }

    pub fn exp(&self) -> Self {
        Interval { lo: Self::down(self.lo.exp()), hi: Self::up(self.hi.exp()) }
    }

    /// Natural log of a positive interval.
    pub fn ln(&self) -> Self {
        Interval { lo: Self::down(self.lo.ln()), hi: Self::up(self.hi.ln()) }
    }

    pub fn midpoint(&self) -> Hp {
        let two = Hp::from_i64(2, self.lo.p);
        &(&self.lo + &self.hi) / &two
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn basic_arithmetic() {
        let p = 256;
        let a = Hp::from_i64(2, p);
        let l = a.ln();
        assert!((l.to_f64() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((l.exp().to_f64() - 2.0).abs() < 1e-15);
        let third = Hp::from_rational(&frac(1, 3), p);
        assert!(((&third * &Hp::from_i64(3, p)) - Hp::one(p)).abs().to_f64() < 1e-70);
        assert!((Hp::pi(p).to_f64() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn big_integers_convert() {
        let x: BigInt = "48251508480".parse().unwrap();
        assert_eq!(Hp::from_bigint(&x, 128).to_f64(), 48251508480.0);
        assert_eq!(Hp::from_i64(-3, 64).to_decimal(3), "-3e0");
    }

    #[test]
    fn interval_contains_value() {
        let p = 128;
        let i = Interval::from_rational(&frac(1, 3), p).exp();
        let v = Hp::from_f64((1.0f64 / 3.0).exp(), p);
        assert!(i.lo < i.hi);
        assert!((i.lo.to_f64() - v.to_f64()).abs() < 1e-15);
        let l = i.ln();
        assert!(l.lo.to_f64() <= 1.0 / 3.0 + 1e-15 && l.hi.to_f64() >= 1.0 / 3.0 - 1e-15);
    }
}
