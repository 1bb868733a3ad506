//! Exhaustive checks of the cumulant tail bound on finite product spaces.
//!
//! A function on `S_1 × ... × S_n` is a dense table indexed in mixed radix with
//! coordinate 0 varying fastest. Everything is exact except `log E e^f`, which is
//! enclosed in an interval.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::combinat::factorial;
use crate::gaussian::moments_to_cumulants;
use crate::hp::{Hp, Interval};
use crate::rational;
use crate::{Error, Result};

/// Largest `Π |S_i|` accepted.
pub const MAX_POINTS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteProductSpace {
    values: Vec<Vec<BigRational>>,
    weights: Vec<Vec<BigRational>>,
    strides: Vec<usize>,
    size: usize,
}

impl DiscreteProductSpace {
    /// Coordinate `j` takes `values[j][i]` with probability `weights[j][i]`.
    pub fn new(values: Vec<Vec<BigRational>>, weights: Vec<Vec<BigRational>>) -> Result<Self> {
        if values.len() != weights.len() || values.is_empty() {
            return Err(Error::invalid("need one weight vector per coordinate, and at least one coordinate"));
        }
        let mut strides = Vec::with_capacity(values.len());
        let mut size = 1usize;
        for (v, w) in values.iter().zip(&weights) {
            if v.is_empty() || v.len() != w.len() {
                return Err(Error::invalid("alphabet and weights must be nonempty and of equal length"));
            }
            if w.iter().any(|p| !p.is_positive()) {
                return Err(Error::invalid("weights must be positive"));
            }
            if w.iter().sum::<BigRational>() != BigRational::one() {
                return Err(Error::invalid("weights of each coordinate must sum to 1"));
            }
            strides.push(size);
            size = size
                .checked_mul(v.len())
                .filter(|&s| s <= MAX_POINTS)
                .ok_or_else(|| Error::size(format!("product space exceeds {MAX_POINTS} points")))?;
        }
        Ok(DiscreteProductSpace { values, weights, strides, size })
    }

    /// `n` independent fair bits with values 0 and 1.
    pub fn fair_bits(n: usize) -> Result<Self> {
        let half = rational::frac(1, 2);
        Self::new(vec![vec![rational::int(0), rational::int(1)]; n], vec![vec![half.clone(), half]; n])
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn alphabet_size(&self, j: usize) -> usize {
        self.values[j].len()
    }

    pub fn values(&self) -> &[Vec<BigRational>] {
        &self.values
    }

    pub fn weights(&self) -> &[Vec<BigRational>] {
        &self.weights
    }

    fn digit(&self, idx: usize, j: usize) -> usize {
        (idx / self.strides[j]) % self.values[j].len()
    }

    /// Tabulate `f` from the coordinate values.
    pub fn tabulate(&self, f: impl Fn(&[BigRational]) -> BigRational) -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); self.n()];
        (0..self.size)
            .map(|idx| {
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = self.values[j][self.digit(idx, j)].clone();
                }
                f(&x)
            })
            .collect()
    }

    fn probabilities(&self) -> Vec<BigRational> {
        (0..self.size).map(|idx| (0..self.n()).map(|j| &self.weights[j][self.digit(idx, j)]).product()).collect()
    }

    fn check_table(&self, f: &[BigRational]) -> Result<()> {
        if f.len() != self.size {
            return Err(Error::invalid(format!("function table has {} entries, space has {}", f.len(), self.size)));
        }
        Ok(())
    }
}

/// `f` scaled to integers by the lcm of its denominators.
struct IntegerTable {
    values: Vec<i128>,
    denom: BigInt,
}

impl IntegerTable {
    fn new(f: &[BigRational], max_terms: usize) -> Result<Self> {
        let denom = f.iter().fold(BigInt::one(), |d, x| d.lcm(x.denom()));
        // 2^|V| terms in each difference must not overflow.
        let cap = i128::MAX >> (max_terms + 1);
        let values = f
            .iter()
            .map(|x| {
                let v = x.numer() * (&denom / x.denom());
                v.to_i128()
                    .filter(|v| v.abs() <= cap)
                    .ok_or_else(|| Error::size("function values too large for exact differencing"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntegerTable { values, denom })
    }
}

fn check_subset(space: &DiscreteProductSpace, v: &[usize]) -> Result<()> {
    for (i, &j) in v.iter().enumerate() {
        if j >= space.n() || v[..i].contains(&j) {
            return Err(Error::invalid("V must list distinct coordinates of the space"));
        }
    }
    Ok(())
}

fn delta_scaled(space: &DiscreteProductSpace, g: &IntegerTable, v: &[usize]) -> i128 {
    if v.is_empty() {
        return g.values.iter().map(|x| x.abs()).max().unwrap_or(0);
    }
    // Swapping x_j and y_j flips the sign of ∂^V, and x_j = y_j gives zero,
    // so it is enough to take y_j > x_j on every coordinate of V.
    let k = v.len();
    let mut best = 0i128;
    let mut shift = vec![0usize; k];
    for idx in 0..space.size {
        let lows: Vec<usize> = v.iter().map(|&j| space.digit(idx, j)).collect();
        if v.iter().zip(&lows).any(|(&j, &a)| a + 1 >= space.alphabet_size(j)) {
            continue;
        }
        // odometer over y_j in (x_j, |S_j|)
        for (s, &a) in shift.iter_mut().zip(&lows) {
            *s = a + 1;
        }
        loop {
            let mut total = 0i128;
            for mask in 0u32..(1 << k) {
                let mut at = idx;
                for (t, &j) in v.iter().enumerate() {
                    if mask & (1 << t) != 0 {
                        at += (shift[t] - lows[t]) * space.strides[j];
                    }
                }
                if mask.count_ones() % 2 == 0 {
                    total += g.values[at];
                } else {
                    total -= g.values[at];
                }
            }
            best = best.max(total.abs());
            let mut t = 0;
            loop {
                if t == k {
                    break;
                }
                shift[t] += 1;
                if shift[t] < space.alphabet_size(v[t]) {
                    break;
                }
                shift[t] = lows[t] + 1;
                t += 1;
            }
            if t == k {
                break;
            }
        }
    }
    best
}

/// `Δ_V(f) = sup_{x,y} |∂^V_y f(x)|`, with `Δ_∅(f) = sup |f|`.
pub fn delta_v(space: &DiscreteProductSpace, f: &[BigRational], v: &[usize]) -> Result<BigRational> {
    space.check_table(f)?;
    check_subset(space, v)?;
    let g = IntegerTable::new(f, v.len())?;
    Ok(BigRational::new(BigInt::from(delta_scaled(space, &g, v)), g.denom))
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// `max_{v ≤ m, j} Σ_{|V| = v, j ∈ V} Δ_V(f)`.
pub fn alpha(space: &DiscreteProductSpace, f: &[BigRational], m: usize) -> Result<BigRational> {
    space.check_table(f)?;
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let n = space.n();
    let top = m.min(n);
    let g = IntegerTable::new(f, top)?;
    let mut best = 0i128;
    for v in 1..=top {
        let subsets = subsets_of_size(n, v);
        let deltas: Vec<i128> = subsets.par_iter().map(|s| delta_scaled(space, &g, s)).collect();
        let mut per_coord = vec![0i128; n];
        for (s, d) in subsets.iter().zip(&deltas) {
            for &j in s {
                per_coord[j] += d;
            }
        }
        best = best.max(per_coord.into_iter().max().unwrap_or(0));
    }
    Ok(BigRational::new(BigInt::from(best), g.denom))
}

/// `E[f^r]` for `r = 1..=r_max`, exactly.
pub fn exact_moments(space: &DiscreteProductSpace, f: &[BigRational], r_max: usize) -> Result<Vec<BigRational>> {
    space.check_table(f)?;
    // Merge equal values first; structured functions repeat a lot.
    let mut mass: HashMap<&BigRational, BigRational> = HashMap::new();
    for (x, p) in f.iter().zip(space.probabilities()) {
        *mass.entry(x).or_insert_with(BigRational::zero) += p;
    }
    let mut grouped: Vec<(&BigRational, BigRational)> = mass.into_iter().collect();
    grouped.sort_by(|a, b| a.0.cmp(b.0));
    let mut moments = vec![BigRational::zero(); r_max];
    for (x, p) in grouped {
        let mut pw = p;
        for m in moments.iter_mut() {
            pw *= x;
            *m += &pw;
        }
    }
    Ok(moments)
}

/// `κ_1, ..., κ_{r_max}` of `f(X)`, exactly.
pub fn exact_cumulants_discrete(
    space: &DiscreteProductSpace,
    f: &[BigRational],
    r_max: usize,
) -> Result<Vec<BigRational>> {
    Ok(moments_to_cumulants(&exact_moments(space, f, r_max)?))
}

/// `E^j f`: `f` averaged over coordinate `j`, as a table on the same space.
pub fn expectation_over(space: &DiscreteProductSpace, f: &[BigRational], j: usize) -> Result<Vec<BigRational>> {
    space.check_table(f)?;
    check_subset(space, &[j])?;
    let stride = space.strides[j];
    Ok((0..space.size)
        .map(|idx| {
            let base = idx - space.digit(idx, j) * stride;
            space.weights[j].iter().enumerate().map(|(a, w)| w * &f[base + a * stride]).sum()
        })
        .collect())
}

/// A space together with a function table, as stored in instance files.
#[derive(Clone, Debug, PartialEq)]
pub struct TailInstance {
    pub space: DiscreteProductSpace,
    pub f: Vec<BigRational>,
}

impl TailInstance {
    pub fn new(space: DiscreteProductSpace, f: Vec<BigRational>) -> Result<Self> {
        space.check_table(&f)?;
        Ok(TailInstance { space, f })
    }

    pub fn to_json(&self) -> Value {
        let strs = |v: &[BigRational]| v.iter().map(rational::to_string).collect::<Vec<_>>();
        json!({
            "values": self.space.values.iter().map(|v| strs(v)).collect::<Vec<_>>(),
            "weights": self.space.weights.iter().map(|v| strs(v)).collect::<Vec<_>>(),
            "f": strs(&self.f),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let list = |v: &Value, what: &str| -> Result<Vec<BigRational>> {
            v.as_array()
                .ok_or_else(|| Error::invalid(format!("{what} must be an array")))?
                .iter()
                .map(|x| match x {
                    Value::String(s) => rational::parse(s),
                    Value::Number(n) => rational::parse(&n.to_string()),
                    _ => Err(Error::invalid(format!("{what} entries must be rationals"))),
                })
                .collect()
        };
        let nested = |key: &str| -> Result<Vec<Vec<BigRational>>> {
            v[key]
                .as_array()
                .ok_or_else(|| Error::invalid(format!("missing array \"{key}\"")))?
                .iter()
                .map(|row| list(row, key))
                .collect()
        };
        let weights = nested("weights")?;
        let values = match v.get("values") {
            Some(_) => nested("values")?,
            None => weights.iter().map(|w| (0..w.len()).map(|i| rational::int(i as i64)).collect()).collect(),
        };
        let space = DiscreteProductSpace::new(values, weights)?;
        let f = list(&v["f"], "f")?;
        Self::new(space, f)
    }
}

#[derive(Clone, Debug)]
pub struct TailReport {
    pub n: usize,
    pub m: usize,
    pub alpha: BigRational,
    pub kappas: Vec<BigRational>,
    /// Enclosure of `log E e^f`.
    pub log_mgf: Interval,
    /// Enclosure of `δ` with `E e^f = (1+δ)^n exp(Σ_{r≤m} κ_r / r!)`.
    pub delta: Interval,
    /// Enclosure of `e^{(100α)^{m+1}} - 1`.
    pub delta_bound: Interval,
    pub delta_holds: bool,
    /// `0.014 n ((r-1)!/r) (80α)^r` for `r = 1..=m`.
    pub cumulant_bounds: Vec<BigRational>,
    pub cumulants_hold: Vec<bool>,
    pub bits: usize,
}

impl TailReport {
    pub fn holds(&self) -> bool {
        self.delta_holds && self.cumulants_hold.iter().all(|&b| b)
    }

    pub fn to_json(&self) -> Value {
        let digits = (self.bits as f64 * std::f64::consts::LOG10_2) as usize - 6;
        let iv = |x: &Interval| json!([x.lo.to_decimal(digits), x.hi.to_decimal(digits)]);
        json!({
            "n": self.n,
            "m": self.m,
            "alpha": rational::to_string(&self.alpha),
            "kappas": self.kappas.iter().map(rational::to_string).collect::<Vec<_>>(),
            "log_mgf": iv(&self.log_mgf),
            "delta": iv(&self.delta),
            "delta_bound": iv(&self.delta_bound),
            "delta_holds": self.delta_holds,
            "cumulant_bounds": self.cumulant_bounds.iter().map(rational::to_string).collect::<Vec<_>>(),
            "cumulants_hold": self.cumulants_hold,
            "holds": self.holds(),
            "bits": self.bits,
        })
    }
}

/// Compute every quantity in the tail bound and test both inequalities.
pub fn check_tail_theorem(
    space: &DiscreteProductSpace,
    f: &[BigRational],
    m: usize,
    bits: usize,
) -> Result<TailReport> {
    space.check_table(f)?;
    if bits < 128 {
        return Err(Error::invalid(format!("need at least 128 bits, got {bits}")));
    }
    let n = space.n();
    let a = alpha(space, f, m)?;
    let kappas = exact_cumulants_discrete(space, f, m)?;
    let nq = BigRational::from_integer(BigInt::from(n));
    let mut cumulant_bounds = Vec::with_capacity(m);
    let mut cumulants_hold = Vec::with_capacity(m);
    for (i, k) in kappas.iter().enumerate() {
        let r = i as u32 + 1;
        let b = rational::frac(7, 500)
            * &nq
            * BigRational::new(factorial(r - 1), BigInt::from(r))
            * (rational::int(80) * &a).pow(r as i32);
        cumulants_hold.push(k.abs() <= b);
        cumulant_bounds.push(b);
    }
    let mut series = BigRational::zero();
    for (i, k) in kappas.iter().enumerate() {
        series += k / BigRational::from_integer(factorial(i as u32 + 1));
    }

    let mut mass: HashMap<&BigRational, BigRational> = HashMap::new();
    for (x, p) in f.iter().zip(space.probabilities()) {
        *mass.entry(x).or_insert_with(BigRational::zero) += p;
    }
    let mut grouped: Vec<(&BigRational, BigRational)> = mass.into_iter().collect();
    grouped.sort_by(|x, y| x.0.cmp(y.0));
    let terms: Vec<Interval> = grouped
        .par_iter()
        .map(|(x, p)| Interval::from_rational(x, bits).exp().mul_nonneg(&Interval::from_rational(p, bits)))
        .collect();
    let zero = Interval::point(Hp::zero(bits));
    let mgf = terms.iter().fold(zero, |acc, t| acc.add(t));
    let log_mgf = mgf.ln();
    let one = Interval::from_rational(&BigRational::one(), bits);

    let constant = grouped.len() == 1;
    let (delta, delta_holds) = if constant {
        // E e^c = e^c and κ_1 = c, κ_{r≥2} = 0, so δ = 0 exactly.
        (Interval::point(Hp::zero(bits)), true)
    } else {
        let z = log_mgf.sub(&Interval::from_rational(&series, bits)).div_pos(&Hp::from_i64(n as i64, bits));
        (z.exp().sub(&one), false)
    };
    let power = (rational::int(100) * &a).pow(m as i32 + 1);
    let delta_bound = Interval::from_rational(&power, bits).exp().sub(&one);
    let delta_holds = delta_holds || {
        let minus_one = Hp::from_i64(-1, bits);
        delta.lo > minus_one && delta.hi <= delta_bound.lo && -&delta.lo <= delta_bound.lo
    };
    Ok(TailReport {
        n,
        m,
        alpha: a,
        kappas,
        log_mgf,
        delta,
        delta_bound,
        delta_holds,
        cumulant_bounds,
        cumulants_hold,
        bits,
    })
}
