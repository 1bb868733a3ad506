//! Asymptotic expansions of the dense counts: regular tournaments, Eulerian
//! digraphs and Eulerian oriented graphs.
//!
//! Each count is a closed-form prefactor times `exp(Σ_p c_p n^{-p})`. The
//! exponent series is `Σ_r κ_r(f_K(X)) / r!` where `X` has i.i.d. centered
//! Gaussian components and `f_K` is the Taylor tail of the log edge weight, so
//! everything reduces to moments of power sums.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::combinat::{binomial, factorial};
use crate::gaussian::moments_to_cumulants;
use crate::hp::Hp;
use crate::laurent::LaurentSeries;
use crate::ptypes::{mu_moments_batch_int, MuMonomial};
use crate::rational::frac;
use crate::{Error, Result};

/// Largest supported expansion order.
pub const MAX_ORDER: usize = 12;
/// Largest number of log-cosine coefficients.
pub const MAX_LOG_TERMS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Rt,
    Ed,
    Eog,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Rt => "rt",
            Family::Ed => "ed",
            Family::Eog => "eog",
            Family::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rt" => Ok(Family::Rt),
            "ed" => Ok(Family::Ed),
            "eog" => Ok(Family::Eog),
            "custom" => Ok(Family::Custom),
            _ => Err(Error::invalid(format!("unknown family {s:?}"))),
        }
    }
}

/// Edge factor `a + b cos(θ_j - θ_k)` with `a + b = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSpec {
    pub a: BigRational,
    pub b: BigRational,
    pub family: Family,
}

impl WeightSpec {
    pub fn new(a: BigRational, b: BigRational) -> Result<Self> {
        if !b.is_positive() || a.is_negative() {
            return Err(Error::domain("edge weight needs a >= 0 and b > 0"));
        }
        if &a + &b != BigRational::one() {
            return Err(Error::domain("edge weight must satisfy a + b = 1"));
        }
        Ok(WeightSpec { a, b, family: Family::Custom })
    }

    pub fn family(f: Family) -> Self {
        let (a, b) = match f {
            Family::Rt | Family::Custom => (frac(0, 1), frac(1, 1)),
            Family::Ed => (frac(1, 2), frac(1, 2)),
            Family::Eog => (frac(1, 3), frac(2, 3)),
        };
        WeightSpec { a, b, family: f }
    }
}

/// Bernoulli numbers `B_0..=B_m` (with `B_1 = -1/2`).
pub fn bernoulli_numbers(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    for k in 1..=m {
        let mut s = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            s += BigRational::from_integer(binomial(k as u32 + 1, j as u32)) * bj;
        }
        b.push(-s / BigRational::from_integer(BigInt::from(k + 1)));
    }
    b
}

/// Taylor coefficients `c_2, c_4, ..., c_{2L}` of `log cos x`:
/// `c_{2ℓ} = -4^ℓ (4^ℓ - 1) |B_{2ℓ}| / (2ℓ (2ℓ)!)`.
pub fn log_cos_coeffs(l_max: usize) -> Result<Vec<BigRational>> {
    if l_max > MAX_LOG_TERMS {
        return Err(Error::size(format!("log-cosine coefficients limited to L <= {MAX_LOG_TERMS}")));
    }
    let b = bernoulli_numbers(2 * l_max);
    Ok((1..=l_max)
        .map(|l| {
            let four = BigInt::from(4).pow(l as u32);
            let num = &four * (&four - 1u32);
            let den = BigInt::from(2 * l) * factorial(2 * l as u32);
            -BigRational::new(num, den) * b[2 * l].abs()
        })
        .collect())
}

/// Coefficients of `log(1 + u(y))` for a power series `u` in `y` with `u(0) = 0`,
/// truncated after `y^len`.
fn series_log1p(u: &[BigRational], len: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); len + 1];
    let mut power = vec![BigRational::zero(); len + 1];
    power[0] = BigRational::one();
    for j in 1..=len {
        let mut next = vec![BigRational::zero(); len + 1];
        for (i, p) in power.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (k, uk) in u.iter().enumerate().skip(1) {
                if i + k > len {
                    break;
                }
                next[i + k] += p * uk;
            }
        }
        power = next;
        let sign = if j % 2 == 1 { 1 } else { -1 };
        for (o, p) in out.iter_mut().zip(&power) {
            *o += p * frac(sign, j as i64);
        }
    }
    out
}

/// Taylor coefficients `e_2, e_4, ..., e_{2L}` of `log(a + b cos x)`, by
/// composing the cosine series with `log(1 + u)`.
pub fn weight_log_coeffs(w: &WeightSpec, l_max: usize) -> Result<Vec<BigRational>> {
    if &w.a + &w.b != BigRational::one() || !w.b.is_positive() || w.a.is_negative() {
        return Err(Error::domain("edge weight must satisfy a + b = 1, a >= 0, b > 0"));
    }
    if l_max > MAX_LOG_TERMS {
        return Err(Error::size(format!("log coefficients limited to L <= {MAX_LOG_TERMS}")));
    }
    // a + b cos x = 1 + b (cos x - 1), as a series in y = x^2
    let u: Vec<BigRational> = (0..=l_max)
        .map(|k| {
            if k == 0 {
                BigRational::zero()
            } else {
                let sign = if k % 2 == 1 { -1 } else { 1 };
                &w.b * BigRational::new(BigInt::from(sign), factorial(2 * k as u32))
            }
        })
        .collect();
    Ok(series_log1p(&u, l_max)[1..].to_vec())
}

/// Component variance of the Gaussian, as a multiple of `1/n`: `1 / (2|e_2|)`.
pub fn family_variance(w: &WeightSpec) -> Result<BigRational> {
    let e2 = weight_log_coeffs(w, 1)?.remove(0);
    Ok(BigRational::one() / (frac(2, 1) * e2.abs()))
}

/// Polynomial in `n` and the power sums: `(n^a · monomial) → coefficient`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MuPolynomial {
    pub terms: BTreeMap<(i32, MuMonomial), BigRational>,
}

impl MuPolynomial {
    fn add_term(&mut self, a: i32, m: MuMonomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let key = (a, m);
        let e = self.terms.entry(key.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at a point, with `μ_k = Σ x_j^k` and `n = x.len()`.
    pub fn evaluate(&self, x: &[BigRational]) -> BigRational {
        let n = BigRational::from_integer(BigInt::from(x.len()));
        let mut cache: HashMap<u32, BigRational> = HashMap::new();
        let mut total = BigRational::zero();
        for ((a, m), c) in &self.terms {
            let mut v = c.clone();
            for _ in 0..*a {
                v *= &n;
            }
            for (&k, &mult) in &m.0 {
                let mu = cache
                    .entry(k)
                    .or_insert_with(|| x.iter().map(|xi| (0..k).fold(BigRational::one(), |acc, _| acc * xi)).sum());
                for _ in 0..mult {
                    v *= &*mu;
                }
            }
            total += v;
        }
        total
    }
}

/// Leading exponent bound of `E[n^a · m]`: `a + #even + #odd/2 - degree/2`, doubled.
fn order_doubled(a: i32, m: &MuMonomial) -> i64 {
    2 * a as i64 + m.order_bound_doubled()
}

/// `f_K(x) = Σ_{ℓ=2}^{K} e_{2ℓ} Σ_{j<k} (x_j - x_k)^{2ℓ}` on the complete graph,
/// written in power sums of the unit-variance-`1/n` variables `X = x / √s`,
/// using `Σ_{j<k} (x_j - x_k)^{2ℓ} = ½ Σ_t (-1)^t C(2ℓ, t) μ_t μ_{2ℓ-t}`.
pub fn f_as_mu_polynomial(w: &WeightSpec, k: usize, variance_scale: &BigRational) -> Result<MuPolynomial> {
    if !(2..=16).contains(&k) {
        return Err(Error::invalid(format!("K must be in 2..=16, got {k}")));
    }
    let e = weight_log_coeffs(w, k)?;
    let mut poly = MuPolynomial::default();
    let mut s_pow = variance_scale.clone();
    for l in 2..=k {
        s_pow *= variance_scale;
        let coef = &e[l - 1] * &s_pow * frac(1, 2);
        let two_l = 2 * l as u32;
        for t in 0..=two_l {
            let sign = if t % 2 == 0 { 1 } else { -1 };
            let c = &coef * BigRational::from_integer(binomial(two_l, t) * sign);
            let mut a = 0;
            let mut factors = Vec::new();
            for x in [t, two_l - t] {
                if x == 0 {
                    a += 1;
                } else {
                    factors.push(x);
                }
            }
            poly.add_term(a, MuMonomial::from_factors(&factors)?, c);
        }
    }
    Ok(poly)
}

/// `(M, K)` from the general order formulas
/// `M = ⌊(c+1) log n / (log d - 2 log log n)⌋`, `K = ⌊(c+1) log n / (log d - log log n)⌋`,
/// given `log n` and `log d`.
pub fn orders_for_precision_log(ln_n: f64, ln_d: f64, c: f64) -> Result<(u64, u64)> {
    if ln_n <= 0.0 {
        return Err(Error::domain("need n > 1"));
    }
    let lln = ln_n.ln();
    let den_m = ln_d - 2.0 * lln;
    let den_k = ln_d - lln;
    if den_m <= 0.0 || den_k <= 0.0 {
        return Err(Error::domain("degree too small: need d > (log n)^2"));
    }
    Ok((((c + 1.0) * ln_n / den_m).floor() as u64, ((c + 1.0) * ln_n / den_k).floor() as u64))
}

pub fn orders_for_precision(n: f64, d: f64, c: f64) -> Result<(u64, u64)> {
    orders_for_precision_log(n.ln(), d.ln(), c)
}

/// Orders used for the dense families: `M = K = c + 1`.
pub fn family_orders(c: usize) -> (usize, usize) {
    (c + 1, c + 1)
}

/// Closed-form prefactor multiplying `exp(series)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prefactor {
    /// `n^{1/2} (2^{n+1} / (π n))^{(n-1)/2}`
    Rt,
    /// `n^{1/2} (4^n / (π n))^{(n-1)/2}`
    Ed,
    /// `n^{1/2} (3^{n+1} / (4 π n))^{(n-1)/2}`
    Eog,
    None,
}

impl Prefactor {
    pub fn tag(self) -> &'static str {
        match self {
            Prefactor::Rt => "n^(1/2)*(2^(n+1)/(pi*n))^((n-1)/2)",
            Prefactor::Ed => "n^(1/2)*(4^n/(pi*n))^((n-1)/2)",
            Prefactor::Eog => "n^(1/2)*(3^(n+1)/(4*pi*n))^((n-1)/2)",
            Prefactor::None => "none",
        }
    }

    fn for_family(f: Family) -> Self {
        match f {
            Family::Rt => Prefactor::Rt,
            Family::Ed => Prefactor::Ed,
            Family::Eog => Prefactor::Eog,
            Family::Custom => Prefactor::None,
        }
    }

    /// Natural log of the prefactor at `n`.
    pub fn ln_at(self, n: u64, bits: usize) -> Result<Hp> {
        let nf = Hp::from_i64(n as i64, bits);
        let ln_n = nf.ln();
        let ln_pi = Hp::pi(bits).ln();
        let ln2 = Hp::from_i64(2, bits).ln();
        let ln3 = Hp::from_i64(3, bits).ln();
        let n_i = n as i64;
        let inner = match self {
            Prefactor::Rt => &ln2 * &Hp::from_i64(n_i + 1, bits) - &ln_pi - &ln_n,
            Prefactor::Ed => &ln2 * &Hp::from_i64(2 * n_i, bits) - &ln_pi - &ln_n,
            Prefactor::Eog => &ln3 * &Hp::from_i64(n_i + 1, bits) - &(&ln2 * &Hp::from_i64(2, bits)) - &ln_pi - &ln_n,
            Prefactor::None => return Err(Error::domain("no closed-form prefactor for a custom weight")),
        };
        let half = Hp::from_rational(&frac(1, 2), bits);
        Ok(&half * &ln_n + &inner * &Hp::from_rational(&frac(n_i - 1, 2), bits))
    }
}

/// Exponent series of a dense family together with the data that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionResult {
    pub family: Family,
    pub weight: WeightSpec,
    /// Number of exact coefficients: the series is `Σ_{p<order} c_p n^{-p} + O(n^{-order})`.
    pub order: usize,
    pub coeffs: Vec<BigRational>,
    /// Component variance times `n`.
    pub variance: BigRational,
    /// Largest cumulant order included.
    pub m: usize,
    /// Largest Taylor index of the log weight included.
    pub k: usize,
    pub prefactor: Prefactor,
    /// `κ_r(f_K(X))` for `r = 1..=m` up to the same remainder.
    pub cumulants: Vec<LaurentSeries>,
}

impl ExpansionResult {
    pub fn series(&self) -> LaurentSeries {
        LaurentSeries::from_coeffs(0, self.coeffs.clone()).truncate(self.order as i32)
    }

    /// `{"prefactor": tag, "coeffs": {"0": "-1/2", ...}}`
    pub fn to_json(&self) -> Value {
        let coeffs: serde_json::Map<String, Value> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(p, c)| (p.to_string(), Value::String(crate::rational::to_string(c))))
            .collect();
        json!({ "prefactor": self.prefactor.tag(), "coeffs": coeffs })
    }

    pub fn from_json(v: &Value) -> Result<(String, Vec<BigRational>)> {
        let tag = v["prefactor"].as_str().ok_or_else(|| Error::invalid("missing prefactor"))?.to_string();
        let map = v["coeffs"].as_object().ok_or_else(|| Error::invalid("missing coeffs"))?;
        let mut coeffs = vec![BigRational::zero(); map.len()];
        for (k, val) in map {
            let p: usize = k.parse().map_err(|_| Error::invalid(format!("bad power {k:?}")))?;
            let s = val.as_str().ok_or_else(|| Error::invalid("coefficient must be a string"))?;
            *coeffs.get_mut(p).ok_or_else(|| Error::invalid("coefficient powers must be 0..len"))? =
                crate::rational::parse(s)?;
        }
        Ok((tag, coeffs))
    }
}

impl fmt::Display for ExpansionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} · exp({})", self.prefactor.tag(), self.series())
    }
}

/// Knobs for [`expansion_series_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ExpansionOptions {
    /// Cumulant orders `1..=m`; defaults to the order, the last one that reaches
    /// the retained powers.
    pub m: Option<usize>,
    /// Taylor terms `2..=k` of the log weight; defaults to `order + 1`.
    pub k: Option<usize>,
}

/// Exponent series of a family to `order` coefficients.
pub fn expansion_series(family: Family, order: usize) -> Result<ExpansionResult> {
    expansion_series_for(&WeightSpec::family(family), order, ExpansionOptions::default())
}

pub fn expansion_series_with(family: Family, order: usize, opts: ExpansionOptions) -> Result<ExpansionResult> {
    expansion_series_for(&WeightSpec::family(family), order, opts)
}

/// Exponent series for an arbitrary edge weight.
pub fn expansion_series_for(w: &WeightSpec, order: usize, opts: ExpansionOptions) -> Result<ExpansionResult> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::size(format!("expansion order must be in 1..={MAX_ORDER}, got {order}")));
    }
    let m = opts.m.unwrap_or(order);
    let k = opts.k.unwrap_or(order + 1).max(2);
    let p_max = order as i32 - 1;
    let s = family_variance(w)?;
    let f = f_as_mu_polynomial(w, k, &s)?;
    let moments = power_moments(&f, m, p_max)?;
    let cumulants = moments_to_cumulants(&moments);
    let prec = order as i32;
    let mut exponent = LaurentSeries::zero().truncate(prec);
    for (r, kappa) in cumulants.iter().enumerate() {
        let inv = BigRational::new(BigInt::one(), factorial(r as u32 + 1));
        exponent = exponent.add(&kappa.scale(&inv));
    }
    let coeffs = (0..prec).map(|p| exponent.coeff(p)).collect();
    Ok(ExpansionResult {
        family: w.family,
        weight: w.clone(),
        order,
        coeffs,
        variance: s,
        m,
        k,
        prefactor: Prefactor::for_family(w.family),
        cumulants,
    })
}

/// `E[f^r]` for `r = 1..=m`, exact through `n^{-p_max}`.
///
/// Powers of `f` are formed with every term whose leading exponent falls below
/// `n^{-p_max}` dropped; the surviving power-sum monomials are evaluated once
/// each, at the deepest precision any term asks for.
pub fn power_moments(f: &MuPolynomial, m: usize, p_max: i32) -> Result<Vec<LaurentSeries>> {
    // Work with `g = D·f`, which has integer coefficients, and divide by `D^j` at the end.
    let keep = |a: i32, mono: &MuMonomial| order_doubled(a, mono) >= -2 * p_max as i64;
    let denom = f.terms.values().fold(BigInt::one(), |d, c| d.lcm(c.denom()));
    let base: Vec<((i32, MuMonomial), BigInt)> = f
        .terms
        .iter()
        .filter(|((a, mono), _)| keep(*a, mono))
        .map(|(k, c)| (k.clone(), c.numer() * (&denom / c.denom())))
        .collect();
    let mut powers: Vec<HashMap<(i32, MuMonomial), BigInt>> = Vec::with_capacity(m);
    powers.push(base.iter().cloned().collect());
    for _ in 1..m {
        let prev = powers.last().unwrap();
        let mut next: HashMap<(i32, MuMonomial), BigInt> = HashMap::new();
        for ((a1, m1), c1) in prev {
            for ((a2, m2), c2) in &base {
                let a = a1 + a2;
                let mono = m1.times(m2);
                if !keep(a, &mono) {
                    continue;
                }
                *next.entry((a, mono)).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        next.retain(|_, v| !v.is_zero());
        powers.push(next);
    }
    let mut need: HashMap<MuMonomial, i32> = HashMap::new();
    for pw in &powers {
        for (a, mono) in pw.keys() {
            if mono.degree() % 2 == 1 {
                continue;
            }
            let p = p_max + a;
            need.entry(mono.clone()).and_modify(|q| *q = (*q).max(p)).or_insert(p);
        }
    }
    let mut jobs: Vec<(MuMonomial, i32)> = need.into_iter().collect();
    jobs.sort();
    let table = mu_moments_batch_int(&jobs)?;
    let mut out = Vec::with_capacity(m);
    let mut scale = BigInt::one();
    for pw in &powers {
        scale *= &denom;
        let mut acc: BTreeMap<i32, BigInt> = BTreeMap::new();
        for ((a, mono), c) in pw {
            let Some((vlo, coeffs)) = table.get(mono) else { continue };
            for (i, x) in coeffs.iter().enumerate() {
                // n^a · n^{-q} = n^{-(q - a)}
                let q = vlo + i as i32 - a;
                if q > p_max {
                    break;
                }
                *acc.entry(q).or_insert_with(BigInt::zero) += c * x;
            }
        }
        let lo = acc.keys().next().copied().unwrap_or(p_max + 1);
        let coeffs =
            (lo..=p_max).map(|q| BigRational::new(acc.remove(&q).unwrap_or_default(), scale.clone())).collect();
        out.push(LaurentSeries::from_coeffs(lo, coeffs).truncate(p_max + 1));
    }
    Ok(out)
}

/// `prefactor · exp(series)` at `n`, with its natural log, at `bits` of precision.
pub fn evaluate_expansion(result: &ExpansionResult, n: u64, bits: usize) -> Result<(Hp, Hp)> {
    evaluate_expansion_terms(result, n, bits, result.coeffs.len())
}

/// As [`evaluate_expansion`] but keeping only the first `terms` coefficients.
pub fn evaluate_expansion_terms(result: &ExpansionResult, n: u64, bits: usize, terms: usize) -> Result<(Hp, Hp)> {
    if bits < 128 {
        return Err(Error::invalid(format!("need at least 128 bits, got {bits}")));
    }
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    if result.family == Family::Rt && n.is_multiple_of(2) {
        return Err(Error::domain(format!("regular tournaments need odd n, got {n}")));
    }
    let mut log = result.prefactor.ln_at(n, bits)?;
    let nf = Hp::from_i64(n as i64, bits);
    let inv = Hp::one(bits) / nf;
    let mut pw = Hp::one(bits);
    for c in result.coeffs.iter().take(terms) {
        log = log + Hp::from_rational(c, bits) * pw.clone();
        pw = pw * inv.clone();
    }
    Ok((log.exp(), log))
}
