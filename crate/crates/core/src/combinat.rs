//! Small exact combinatorial helpers shared by the counters and the series code.

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `C(n, k)` in machine integers; `None` on overflow.
pub fn binomial_u128(n: u32, k: u32) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `(m-1)!!` for even `m`, i.e. the number of perfect matchings on `m` points.
/// Returns zero for odd `m`, matching the Gaussian moment convention.
pub fn matchings(m: u32) -> BigInt {
    if m % 2 == 1 {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    let mut k = 1;
    while k < m {
        acc *= k;
        k += 2;
    }
    acc
}

pub fn matchings_u128(m: u32) -> Option<u128> {
    if m % 2 == 1 {
        return Some(0);
    }
    let mut acc: u128 = 1;
    let mut k = 1u128;
    while k < m as u128 {
        acc = acc.checked_mul(k)?;
        k += 2;
    }
    Some(acc)
}

/// Bell numbers `B_0..=B_n` via the Bell triangle.
pub fn bell_numbers(n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    let mut row = vec![BigInt::one()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().unwrap().clone());
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        out.push(next[0].clone());
        row = next;
    }
    out.truncate(n + 1);
    out
}

pub fn bell(n: usize) -> BigInt {
    bell_numbers(n).pop().unwrap()
}

/// Stirling numbers of the second kind `S(m, k)` for `k = 0..=m`.
pub fn stirling2_row(m: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 1..=m {
        let mut next = vec![BigInt::zero(); i + 1];
        for k in 1..=i {
            let mut v = if k < row.len() { &row[k] * k } else { BigInt::zero() };
            v += &row[k - 1];
            next[k] = v;
        }
        row = next;
    }
    row
}

/// Signed Stirling numbers of the first kind: the coefficients of the falling
/// factorial, `(n)_q = sum_k s(q, k) n^k`, for `k = 0..=q`.
pub fn falling_factorial_coeffs(q: usize) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::one()];
    for i in 0..q {
        // multiply by (n - i)
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * i;
        }
        coeffs = next;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(binomial(10, 3), BigInt::from(120));
        assert_eq!(binomial_u128(10, 7), Some(120));
        assert_eq!(matchings(6), BigInt::from(15));
        assert_eq!(matchings(5), BigInt::zero());
        assert_eq!(matchings_u128(8), Some(105));
    }

    #[test]
    fn bell_and_stirling_agree() {
        let bells = bell_numbers(12);
        assert_eq!(bells[3], BigInt::from(5));
        assert_eq!(bells[10], BigInt::from(115_975));
        for (m, b) in bells.iter().enumerate() {
            let s: BigInt = stirling2_row(m).into_iter().sum();
            assert_eq!(&s, b);
        }
    }

    #[test]
    fn bell_22() {
        assert_eq!(bell(22).to_string(), "4506715738447323");
    }

    #[test]
    fn falling_factorial_evaluates() {
        let c = falling_factorial_coeffs(4);
        let n = BigInt::from(9);
        let v: BigInt = c.iter().enumerate().map(|(k, a)| a * n.pow(k as u32)).sum();
        assert_eq!(v, BigInt::from(9 * 8 * 7 * 6));
        assert!(c[0].is_zero());
    }
}
