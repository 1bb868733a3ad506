//! Moments of products of power sums `μ_k = Σ_j X_j^k` for i.i.d. centered
//! Gaussians of variance `1/n`, summed over partition types.
//!
//! A partition type groups the set partitions of the factor positions that
//! differ only by which positions of equal exponent go to which cell, so the
//! sum runs over far fewer objects than the Bell number.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::combinat::{binomial, binomial_u128, factorial, falling_factorial_coeffs, matchings, matchings_u128};
use crate::gaussian::enumerate_partitions;
use crate::laurent::LaurentSeries;
use crate::{Error, Result};

/// Largest number of factors accepted by the partition-type routines.
pub const MAX_FACTORS: usize = 26;
/// Largest number of factors accepted by the set-partition oracle.
pub const ORACLE_MAX_FACTORS: usize = 10;

/// Multiset of exponents sharing one index, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellType(pub Vec<u32>);

impl CellType {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// Multiset of cell types: each cell with its multiplicity `η`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionType {
    pub cells: Vec<(CellType, u32)>,
}

impl PartitionType {
    /// Total number of cells `q = Σ η`.
    pub fn cell_count(&self) -> u32 {
        self.cells.iter().map(|(_, e)| e).sum()
    }

    /// The monomial this type decomposes.
    pub fn monomial(&self) -> MuMonomial {
        let mut m = MuMonomial::one();
        for (c, eta) in &self.cells {
            for &k in &c.0 {
                *m.0.entry(k).or_insert(0) += eta;
            }
        }
        m
    }
}

/// `Π μ_k^{ν̂(k)}` for `k ≥ 1`; `μ_0 = n` is kept outside.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MuMonomial(pub BTreeMap<u32, u32>);

impl MuMonomial {
    pub fn one() -> Self {
        MuMonomial(BTreeMap::new())
    }

    /// Monomial from a list of exponents; zeros are rejected.
    pub fn from_factors(factors: &[u32]) -> Result<Self> {
        let mut m = Self::one();
        for &k in factors {
            if k == 0 {
                return Err(Error::invalid("μ_0 is the literal n, not a factor"));
            }
            *m.0.entry(k).or_insert(0) += 1;
        }
        Ok(m)
    }

    pub fn factors(&self) -> Vec<u32> {
        self.0.iter().flat_map(|(&k, &c)| std::iter::repeat_n(k, c as usize)).collect()
    }

    pub fn factor_count(&self) -> usize {
        self.0.values().map(|&c| c as usize).sum()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(k, c)| k * c).sum()
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut m = self.clone();
        for (&k, &c) in &other.0 {
            *m.0.entry(k).or_insert(0) += c;
        }
        m
    }

    /// Exponent `J` with `E[monomial] = O(n^J)`:
    /// `#even factors + #odd factors / 2 - degree / 2`, doubled to stay integral.
    pub fn order_bound_doubled(&self) -> i64 {
        let (mut even, mut odd) = (0i64, 0i64);
        for (&k, &c) in &self.0 {
            if k % 2 == 0 {
                even += c as i64;
            } else {
                odd += c as i64;
            }
        }
        2 * even + odd - self.degree() as i64
    }
}

impl fmt::Display for MuMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> =
            self.0.iter().map(|(k, c)| if *c == 1 { format!("μ{k}") } else { format!("μ{k}^{c}") }).collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn check_factors(m: &MuMonomial, cap: usize) -> Result<()> {
    if m.factor_count() > cap {
        return Err(Error::size(format!("monomial has {} factors, limit is {cap}", m.factor_count())));
    }
    Ok(())
}

/// Candidate cells for a monomial: count vectors over its distinct exponents,
/// in decreasing lexicographic order.
struct CellTable {
    exps: Vec<u32>,
    target: Vec<u32>,
    cells: Vec<Vec<u32>>,
    sums: Vec<u32>,
}

impl CellTable {
    fn new(m: &MuMonomial, even_only: bool) -> Self {
        let exps: Vec<u32> = m.0.keys().copied().collect();
        let target: Vec<u32> = m.0.values().copied().collect();
        let mut cells = vec![Vec::new()];
        for &t in &target {
            cells = cells
                .into_iter()
                .flat_map(|c: Vec<u32>| {
                    (0..=t).rev().map(move |x| {
                        let mut c = c.clone();
                        c.push(x);
                        c
                    })
                })
                .collect();
        }
        cells.retain(|c| c.iter().any(|&x| x > 0));
        let sums: Vec<u32> = cells.iter().map(|c| c.iter().zip(&exps).map(|(a, k)| a * k).sum()).collect();
        let (cells, sums) = cells.into_iter().zip(sums).filter(|(_, s)| !even_only || s % 2 == 0).unzip();
        CellTable { exps, target, cells, sums }
    }

    fn fits(&self, i: usize, rem: &[u32]) -> bool {
        self.cells[i].iter().zip(rem).all(|(a, r)| a <= r)
    }

    fn cell_type(&self, i: usize) -> CellType {
        let mut v = Vec::new();
        for (&c, &k) in self.cells[i].iter().zip(&self.exps) {
            v.extend(std::iter::repeat_n(k, c as usize));
        }
        CellType(v)
    }
}

/// Lazily enumerates every partition type of `m` exactly once, including
/// types with odd-degree cells.
pub fn enumerate_partition_types(m: &MuMonomial) -> Result<PartitionTypeIter> {
    check_factors(m, MAX_FACTORS)?;
    let table = CellTable::new(m, false);
    let rem = table.target.clone();
    Ok(PartitionTypeIter { table, rem, stack: Vec::new(), started: false, done: false })
}

/// Partition types of `m` whose cells all have even degree: the only ones
/// with a nonzero Gaussian contribution.
pub fn enumerate_contributing_partition_types(m: &MuMonomial) -> Result<PartitionTypeIter> {
    check_factors(m, MAX_FACTORS)?;
    let table = CellTable::new(m, true);
    let rem = table.target.clone();
    Ok(PartitionTypeIter { table, rem, stack: Vec::new(), started: false, done: false })
}

pub struct PartitionTypeIter {
    table: CellTable,
    rem: Vec<u32>,
    stack: Vec<usize>,
    started: bool,
    done: bool,
}

impl PartitionTypeIter {
    fn push(&mut self, i: usize) {
        for (r, a) in self.rem.iter_mut().zip(&self.table.cells[i]) {
            *r -= a;
        }
        self.stack.push(i);
    }

    fn pop(&mut self) -> Option<usize> {
        let i = self.stack.pop()?;
        for (r, a) in self.rem.iter_mut().zip(&self.table.cells[i]) {
            *r += a;
        }
        Some(i)
    }

    fn current(&self) -> PartitionType {
        let mut cells: Vec<(CellType, u32)> = Vec::new();
        let mut last = usize::MAX;
        for &i in &self.stack {
            if i == last {
                cells.last_mut().unwrap().1 += 1;
            } else {
                cells.push((self.table.cell_type(i), 1));
                last = i;
            }
        }
        PartitionType { cells }
    }
}

impl Iterator for PartitionTypeIter {
    type Item = PartitionType;

    fn next(&mut self) -> Option<PartitionType> {
        if self.done {
            return None;
        }
        let mut from = if !self.started {
            self.started = true;
            if self.rem.iter().all(|&r| r == 0) {
                self.done = true;
                return Some(PartitionType { cells: Vec::new() });
            }
            0
        } else {
            match self.pop() {
                Some(i) => i + 1,
                None => {
                    self.done = true;
                    return None;
                }
            }
        };
        loop {
            match (from..self.table.cells.len()).find(|&i| self.table.fits(i, &self.rem)) {
                Some(i) => {
                    self.push(i);
                    if self.rem.iter().all(|&r| r == 0) {
                        return Some(self.current());
                    }
                    from = i;
                }
                None => match self.pop() {
                    Some(i) => from = i + 1,
                    None => {
                        self.done = true;
                        return None;
                    }
                },
            }
        }
    }
}

/// `(n)_q / Π η!` as an exact polynomial in `n`.
pub fn a_coeff(t: &PartitionType) -> LaurentSeries {
    let q = t.cell_count() as usize;
    let denom: BigInt = t.cells.iter().map(|(_, e)| factorial(*e)).product();
    let coeffs: Vec<BigInt> = falling_factorial_coeffs(q).into_iter().collect();
    LaurentSeries::polynomial_in_n(&coeffs).scale(&BigRational::new(BigInt::one(), denom))
}

/// `Π_k (Σ ν(k))! / Π_cells ν(k)!`: assignments of factor positions to the
/// cells when the cells are told apart.
pub fn b_coeff(t: &PartitionType) -> BigInt {
    let m = t.monomial();
    let num: BigInt = m.0.values().map(|&c| factorial(c)).product();
    let mut den = BigInt::one();
    for (cell, eta) in &t.cells {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for &k in &cell.0 {
            *counts.entry(k).or_insert(0) += 1;
        }
        for &c in counts.values() {
            den *= factorial(c).pow(*eta);
        }
    }
    num / den
}

/// `E[X^m] = (m-1)!! n^{-m/2}` for `X ~ N(0, 1/n)`.
pub fn gaussian_power_moment(m: u32) -> LaurentSeries {
    if m % 2 == 1 {
        return LaurentSeries::zero();
    }
    LaurentSeries::monomial(BigRational::from_integer(matchings(m)), (m / 2) as i32)
}

/// One partition type's contribution `A_T B_T Π E[X^{deg τ}]`.
pub fn type_contribution(t: &PartitionType) -> LaurentSeries {
    let mut s = a_coeff(t).scale(&BigRational::from_integer(b_coeff(t)));
    for (cell, eta) in &t.cells {
        for _ in 0..*eta {
            s = s.mul(&gaussian_power_moment(cell.degree()));
        }
    }
    s
}

/// Integer accumulator that stays in `u128` until it overflows.
#[derive(Clone, Debug)]
enum Weight {
    Small(u128),
    Big(BigInt),
}

impl Weight {
    fn mul(&self, x: u128) -> Weight {
        match self {
            Weight::Small(a) => match a.checked_mul(x) {
                Some(v) => Weight::Small(v),
                None => Weight::Big(BigInt::from(*a) * x),
            },
            Weight::Big(a) => Weight::Big(a * x),
        }
    }

    fn mul_big(&self, x: &BigInt) -> Weight {
        Weight::Big(self.to_big() * x)
    }

    fn div_exact(&self, x: u128) -> Weight {
        match self {
            Weight::Small(a) => Weight::Small(a / x),
            Weight::Big(a) => {
                let v = a / x;
                match v.to_u128() {
                    Some(s) => Weight::Small(s),
                    None => Weight::Big(v),
                }
            }
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Weight::Small(a) => BigInt::from(*a),
            Weight::Big(a) => a.clone(),
        }
    }
}

struct Accumulator {
    small: Vec<u128>,
    big: Vec<BigInt>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Accumulator { small: vec![0; len], big: vec![BigInt::zero(); len] }
    }

    fn add(&mut self, q: usize, w: &Weight) {
        match w {
            Weight::Small(v) => match self.small[q].checked_add(*v) {
                Some(s) => self.small[q] = s,
                None => {
                    self.big[q] += self.small[q];
                    self.small[q] = *v;
                }
            },
            Weight::Big(v) => self.big[q] += v,
        }
    }

    fn totals(self) -> Vec<BigInt> {
        self.big.into_iter().zip(self.small).map(|(b, s)| b + s).collect()
    }
}

struct MomentSearch<'a> {
    table: &'a CellTable,
    // (s - 1)!! per cell, `None` when it overflows u128
    dfact: Vec<Option<u128>>,
    dfact_big: Vec<BigInt>,
    odd_exp: Vec<bool>,
    min_cells: i64,
    acc: Accumulator,
}

impl MomentSearch<'_> {
    fn max_more_cells(&self, rem: &[u32]) -> i64 {
        let (mut even, mut odd) = (0i64, 0i64);
        for (r, &o) in rem.iter().zip(&self.odd_exp) {
            if o {
                odd += *r as i64;
            } else {
                even += *r as i64;
            }
        }
        even + odd / 2
    }

    fn run(&mut self, start: usize, rem: &mut Vec<u32>, q: usize, run: (usize, u128), w: Weight) {
        if rem.iter().all(|&r| r == 0) {
            self.acc.add(q, &w);
            return;
        }
        if (q as i64) + self.max_more_cells(rem) < self.min_cells {
            return;
        }
        for i in start..self.table.cells.len() {
            if !self.table.fits(i, rem) {
                continue;
            }
            let cell = &self.table.cells[i];
            let mut nw = w.clone();
            for (&c, &r) in cell.iter().zip(rem.iter()) {
                if c > 0 {
                    nw = match binomial_u128(r, c) {
                        Some(b) => nw.mul(b),
                        None => nw.mul_big(&crate::combinat::binomial(r, c)),
                    };
                }
            }
            let run_len = if run.0 == i && q > 0 { run.1 + 1 } else { 1 };
            if run_len > 1 {
                nw = nw.div_exact(run_len);
            }
            nw = match self.dfact[i] {
                Some(d) => nw.mul(d),
                None => nw.mul_big(&self.dfact_big[i]),
            };
            for (r, &c) in rem.iter_mut().zip(cell) {
                *r -= c;
            }
            self.run(i, rem, q + 1, (i, run_len), nw);
            for (r, &c) in rem.iter_mut().zip(cell) {
                *r += c;
            }
        }
    }
}

/// `E[Π μ_k^{ν̂(k)}]` as a Laurent series in `1/n` with every power up to
/// `n^{-p_max}` exact, i.e. remainder `O(n^{-p_max-1})`.
///
/// Types whose cell count cannot reach the leading power `n^{-p_max}` are
/// skipped before any coefficient is formed.
pub fn mu_moment(m: &MuMonomial, p_max: i32) -> Result<LaurentSeries> {
    check_factors(m, MAX_FACTORS)?;
    let degree = m.degree();
    if degree % 2 == 1 {
        return Ok(LaurentSeries::zero());
    }
    let half = (degree / 2) as i64;
    let table = CellTable::new(m, true);
    let dfact: Vec<Option<u128>> = table.sums.iter().map(|&s| matchings_u128(s)).collect();
    let dfact_big: Vec<BigInt> = table.sums.iter().map(|&s| matchings(s)).collect();
    let odd_exp = table.exps.iter().map(|k| k % 2 == 1).collect();
    let nfactors = m.factor_count();
    let mut search = MomentSearch {
        table: &table,
        dfact,
        dfact_big,
        odd_exp,
        min_cells: half - p_max as i64,
        acc: Accumulator::new(nfactors + 1),
    };
    let mut rem = table.target.clone();
    search.run(0, &mut rem, 0, (usize::MAX, 0), Weight::Small(1));
    let totals = search.acc.totals();
    // Σ_q W_q (n)_q n^{-S/2}
    let prec = p_max + 1;
    let mut coeffs: BTreeMap<i32, BigInt> = BTreeMap::new();
    for (q, w) in totals.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for (j, s) in falling_factorial_coeffs(q).iter().enumerate() {
            let p = half as i32 - j as i32;
            if p < prec && !s.is_zero() {
                *coeffs.entry(p).or_insert_with(BigInt::zero) += w * s;
            }
        }
    }
    let lo = coeffs.keys().next().copied().unwrap_or(prec);
    let hi = prec.max(lo);
    let dense = (lo..hi).map(|p| BigRational::from_integer(coeffs.get(&p).cloned().unwrap_or_default())).collect();
    Ok(LaurentSeries::from_coeffs(lo, dense).truncate(prec))
}

/// Same value as [`mu_moment`] without truncation, by summing `(n)_{|π|} Π E[X^{deg B}]`
/// over every set partition of the factor positions.
pub fn set_partition_moment_oracle(m: &MuMonomial) -> Result<LaurentSeries> {
    check_factors(m, ORACLE_MAX_FACTORS)?;
    let factors = m.factors();
    let mut total = LaurentSeries::zero();
    for pi in enumerate_partitions(factors.len())? {
        let q = pi.blocks.len();
        let mut term = LaurentSeries::polynomial_in_n(&falling_factorial_coeffs(q));
        for b in &pi.blocks {
            let d: u32 = b.iter().map(|&i| factors[i]).sum();
            term = term.mul(&gaussian_power_moment(d));
        }
        total = total.add(&term);
    }
    Ok(total)
}

/// Multiset of exponents as counts: entry `k - 1` is the multiplicity of `μ_k`.
type Counts = Vec<u8>;

fn counts_of(m: &MuMonomial) -> Result<Counts> {
    let top = m.0.keys().next_back().copied().unwrap_or(0) as usize;
    let mut c = vec![0u8; top];
    for (&k, &v) in &m.0 {
        c[k as usize - 1] = u8::try_from(v).map_err(|_| Error::size("multiplicity above 255"))?;
    }
    Ok(c)
}

fn trim(mut c: Counts) -> Counts {
    while c.last() == Some(&0) {
        c.pop();
    }
    c
}

fn counts_degree(c: &[u8]) -> u32 {
    c.iter().enumerate().map(|(i, &v)| (i as u32 + 1) * v as u32).sum()
}

/// `2·#even + #odd - degree`: twice the leading exponent bound of the moment.
fn counts_order_doubled(c: &[u8]) -> i64 {
    let mut j = 0i64;
    for (i, &v) in c.iter().enumerate() {
        let k = i as i64 + 1;
        j += v as i64 * (if k % 2 == 0 { 2 } else { 1 } - k);
    }
    j
}

/// `2·#even + #odd` of a block.
fn block_weight_doubled(c: &[u8]) -> i64 {
    c.iter().enumerate().map(|(i, &v)| v as i64 * if (i + 1) % 2 == 0 { 2 } else { 1 }).sum()
}

/// Sub-multisets `β ≤ bound` with `2·#even + #odd ≤ cap`, all of them.
fn sub_multisets(bound: &[u8], cap: i64) -> Vec<Counts> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; bound.len()];
    fn rec(i: usize, bound: &[u8], cap: i64, used: i64, cur: &mut Counts, out: &mut Vec<Counts>) {
        if i == bound.len() {
            out.push(cur.clone());
            return;
        }
        let w = if (i + 1).is_multiple_of(2) { 2 } else { 1 };
        for v in 0..=bound[i] {
            let u = used + w * v as i64;
            if u > cap {
                break;
            }
            cur[i] = v;
            rec(i + 1, bound, cap, u, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, bound, cap, 0, &mut cur, &mut out);
    out
}

fn binom_small(n: u8, k: u8) -> BigInt {
    binomial(n as u32, k as u32)
}

/// Joint cumulants `κ(Z^{k_1}, ..., Z^{k_m})` of powers of one standard Gaussian,
/// by `κ(β) = E[Z^{deg β}] - Σ_{γ ∋ top, γ ≠ β} (ways) κ(γ) E[Z^{deg(β-γ)}]`.
#[derive(Default)]
struct PowerCumulants {
    memo: HashMap<Counts, BigInt>,
}

impl PowerCumulants {
    fn get(&mut self, beta: &Counts) -> BigInt {
        if let Some(v) = self.memo.get(beta) {
            return v.clone();
        }
        let s = counts_degree(beta);
        let value = if s % 2 == 1 {
            BigInt::zero()
        } else {
            let top = beta.len() - 1;
            let mut rest = beta.clone();
            rest[top] -= 1;
            let mut v = matchings(s);
            for g in sub_multisets(&rest, i64::MAX) {
                if g == rest {
                    continue;
                }
                let mut gamma = g.clone();
                gamma[top] += 1;
                let sg = counts_degree(&gamma);
                if sg % 2 == 1 || (s - sg) % 2 == 1 {
                    continue;
                }
                let ways: BigInt = rest.iter().zip(&g).map(|(&a, &b)| binom_small(a, b)).product();
                let gamma = trim(gamma);
                v -= ways * self.get(&gamma) * matchings(s - sg);
            }
            v
        };
        self.memo.insert(beta.clone(), value.clone());
        value
    }
}

/// Integer series `Σ_{p ≥ lo} c_p n^{-p}`, exact through `p = hi`.
#[derive(Clone, Debug)]
struct IntSeries {
    lo: i32,
    coeffs: Vec<BigInt>,
}

/// `E[Π μ_k^{ν̂(k)}]` for many monomials at once, each exact through its own
/// power `n^{-p}`.
///
/// Uses `E[Π μ] = Σ_{B ∋ top} n κ(B) E[Π_{rest} μ]`, where `B` runs over the
/// blocks of positions containing one fixed factor and `κ(B)` is the joint
/// cumulant of the corresponding powers of a single coordinate. Each block
/// contributes exactly `n^{1 - deg B / 2}`, so blocks too heavy to reach the
/// requested power are never formed, and sub-monomials are shared between all
/// requests.
pub fn mu_moments_batch(requests: &[(MuMonomial, i32)]) -> Result<HashMap<MuMonomial, LaurentSeries>> {
    let values = mu_moments_batch_int(requests)?;
    let mut out = HashMap::new();
    for (m, p) in requests {
        let prec = p + 1;
        let series = match values.get(m) {
            Some((lo, coeffs)) => {
                let coeffs = coeffs.iter().map(|x| BigRational::from_integer(x.clone())).collect();
                LaurentSeries::from_coeffs(*lo, coeffs).truncate(prec)
            }
            None if m.degree() % 2 == 1 => LaurentSeries::zero(),
            None => LaurentSeries::big_o(prec),
        };
        out.insert(m.clone(), series);
    }
    Ok(out)
}

/// Integer coefficients behind [`mu_moments_batch`]: for each request the
/// coefficients of `n^{-lo}, ..., n^{-p}`. Requests whose moment vanishes
/// through `n^{-p}` are absent.
pub(crate) fn mu_moments_batch_int(requests: &[(MuMonomial, i32)]) -> Result<HashMap<MuMonomial, (i32, Vec<BigInt>)>> {
    // slack = 2p + J·2 for each state: blocks of doubled weight w cost w - 2.
    let mut needs: BTreeMap<usize, HashMap<Counts, i64>> = BTreeMap::new();
    let mut keys = Vec::with_capacity(requests.len());
    for (m, p) in requests {
        check_factors(m, MAX_FACTORS)?;
        let c = counts_of(m)?;
        let slack = 2 * *p as i64 + counts_order_doubled(&c);
        keys.push((m.clone(), c.clone(), *p));
        if slack < 0 || counts_degree(&c) % 2 == 1 {
            continue;
        }
        let e = needs.entry(m.factor_count()).or_default().entry(c).or_insert(slack);
        *e = (*e).max(slack);
    }
    let sizes: Vec<usize> = needs.keys().rev().copied().collect();
    let mut order: Vec<usize> = Vec::new();
    let mut size = sizes.first().copied().unwrap_or(0);
    loop {
        if let Some(level) = needs.get(&size).cloned() {
            order.push(size);
            for (nu, slack) in level {
                if nu.is_empty() {
                    continue;
                }
                for (rest, child) in blocks_of(&nu, slack).into_iter().map(|(_, r, s)| (r, s)) {
                    let count = rest.iter().map(|&v| v as usize).sum();
                    let e = needs.entry(count).or_default().entry(rest).or_insert(child);
                    *e = (*e).max(child);
                }
            }
        }
        if size == 0 {
            break;
        }
        size -= 1;
    }
    let mut cumulants = PowerCumulants::default();
    let mut values: HashMap<Counts, IntSeries> = HashMap::new();
    for size in order.into_iter().rev() {
        let level = &needs[&size];
        let mut level_keys: Vec<&Counts> = level.keys().collect();
        level_keys.sort();
        for nu in level_keys {
            let slack = level[nu];
            let jd = counts_order_doubled(nu);
            let p = ((slack - jd) / 2) as i32;
            let lo = ((-jd + 1).div_euclid(2)) as i32;
            let len = (p - lo + 1).max(0) as usize;
            let mut coeffs = vec![BigInt::zero(); len];
            if nu.is_empty() {
                if len > 0 {
                    coeffs[(0 - lo) as usize] = BigInt::one();
                }
            } else {
                for (block, rest, _) in blocks_of(nu, slack) {
                    let sb = counts_degree(&block);
                    let shift = (sb / 2) as i32 - 1;
                    let top = nu.len() - 1;
                    let mut others = nu.clone();
                    others[top] -= 1;
                    let mut inner = block.clone();
                    inner[top] -= 1;
                    let ways: BigInt = others
                        .iter()
                        .zip(inner.iter().chain(std::iter::repeat(&0)))
                        .map(|(&a, &b)| binom_small(a, b))
                        .product();
                    let kappa = cumulants.get(&block);
                    if kappa.is_zero() {
                        continue;
                    }
                    let factor = ways * kappa;
                    let sub = &values[&rest];
                    for (i, c) in sub.coeffs.iter().enumerate() {
                        let q = sub.lo + i as i32 + shift;
                        if q > p || c.is_zero() {
                            continue;
                        }
                        coeffs[(q - lo) as usize] += &factor * c;
                    }
                }
            }
            values.insert(nu.clone(), IntSeries { lo, coeffs });
        }
    }
    let mut out = HashMap::new();
    for (m, c, p) in keys {
        if counts_degree(&c) % 2 == 1 {
            continue;
        }
        if let Some(v) = values.get(&c) {
            let keep = (p + 1 - v.lo).max(0) as usize;
            out.insert(m, (v.lo, v.coeffs.iter().take(keep).cloned().collect()));
        }
    }
    Ok(out)
}

/// Blocks containing one copy of the top exponent of `nu` that fit within
/// `slack`, with the remaining multiset and its slack.
fn blocks_of(nu: &Counts, slack: i64) -> Vec<(Counts, Counts, i64)> {
    let top = nu.len() - 1;
    let mut others = nu.clone();
    others[top] -= 1;
    let top_w = if nu.len().is_multiple_of(2) { 2 } else { 1 };
    let cap = slack + 2 - top_w;
    if cap < 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for g in sub_multisets(&others, cap) {
        let mut block = g.clone();
        block[top] += 1;
        if counts_degree(&block) % 2 == 1 {
            continue;
        }
        let w = block_weight_doubled(&block);
        let child = slack - (w - 2);
        let rest: Counts = trim(others.iter().zip(&g).map(|(&a, &b)| a - b).collect());
        if counts_degree(&rest) % 2 == 1 || child < 0 {
            continue;
        }
        out.push((trim(block), rest, child));
    }
    out
}

/// Number of set partitions of the factor positions realising `t`: `B_T / Π η!`.
pub fn realising_partitions(t: &PartitionType) -> BigInt {
    let denom: BigInt = t.cells.iter().map(|(_, e)| factorial(*e)).product();
    b_coeff(t) / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::bell;
    use crate::rational::{frac, int};

    fn mono(f: &[u32]) -> MuMonomial {
        MuMonomial::from_factors(f).unwrap()
    }

    fn ty(cells: &[(&[u32], u32)]) -> PartitionType {
        PartitionType { cells: cells.iter().map(|(c, e)| (CellType(c.to_vec()), *e)).collect() }
    }

    #[test]
    fn type_enumeration_examples() {
        let t: Vec<_> = enumerate_partition_types(&mono(&[2])).unwrap().collect();
        assert_eq!(t, vec![ty(&[(&[2], 1)])]);
        let t: Vec<_> = enumerate_partition_types(&mono(&[1, 1])).unwrap().collect();
        assert_eq!(t.len(), 2);
        assert!(t.contains(&ty(&[(&[1, 1], 1)])));
        assert!(t.contains(&ty(&[(&[1], 2)])));
        assert!(enumerate_partition_types(&mono(&[1; 27])).is_err());
    }

    #[test]
    fn coefficient_examples() {
        let t = ty(&[(&[1, 1, 2], 2), (&[1, 2, 2], 1)]);
        // n(n-1)(n-2)/2 = n^3/2 - 3n^2/2 + n
        let a = a_coeff(&t);
        assert_eq!(a.coeff(-3), frac(1, 2));
        assert_eq!(a.coeff(-2), frac(-3, 2));
        assert_eq!(a.coeff(-1), frac(1, 1));
        assert_eq!(b_coeff(&t), BigInt::from(120 / 4 * 24 / 2));
        let single = ty(&[(&[1, 2, 3], 1)]);
        assert_eq!(a_coeff(&single), LaurentSeries::monomial(int(1), -1));
        assert_eq!(b_coeff(&single), BigInt::one());
        let two = ty(&[(&[1], 1), (&[2], 1)]);
        assert_eq!(a_coeff(&two).coeff(-2), int(1));
        assert_eq!(a_coeff(&two).coeff(-1), int(-1));
        // two identical singleton cells: positions told apart, A carries the 1/2!
        let split = ty(&[(&[1], 2)]);
        assert_eq!(b_coeff(&split), BigInt::from(2));
        assert_eq!(realising_partitions(&split), BigInt::one());
    }

    #[test]
    fn power_moments() {
        assert_eq!(gaussian_power_moment(2), LaurentSeries::monomial(int(1), 1));
        assert_eq!(gaussian_power_moment(3), LaurentSeries::zero());
        assert_eq!(gaussian_power_moment(6), LaurentSeries::monomial(int(15), 3));
    }

    #[test]
    fn moment_examples() {
        assert_eq!(mu_moment(&mono(&[2]), 6).unwrap(), LaurentSeries::one().truncate(7));
        assert_eq!(mu_moment(&mono(&[1, 2]), 6).unwrap(), LaurentSeries::zero());
        let mu22 = LaurentSeries::from_coeffs(0, vec![int(1), int(2)]);
        assert_eq!(mu_moment(&mono(&[2, 2]), 6).unwrap(), mu22.truncate(7));
        assert_eq!(set_partition_moment_oracle(&mono(&[2, 2])).unwrap(), mu22);
        assert_eq!(set_partition_moment_oracle(&mono(&[4])).unwrap(), LaurentSeries::monomial(int(3), 1));
        // μ1^4 = (Σ X)^4 with Σ X ~ N(0, 1): exactly 3
        assert_eq!(set_partition_moment_oracle(&mono(&[1, 1, 1, 1])).unwrap(), LaurentSeries::constant(int(3)));
    }

    #[test]
    fn matches_oracle_on_exhaustive_grid() {
        // every monomial with at most 8 factors and exponents at most 4 is too many
        // for the oracle's Bell-number cost at 8 factors; cover 8 factors with two
        // distinct exponents and everything up to 6 factors.
        let mut checked = 0;
        for len in 1..=6usize {
            let mut f = vec![1u32; len];
            loop {
                check_one(&f);
                checked += 1;
                // next non-decreasing sequence over 1..=4
                let mut i = len;
                while i > 0 && f[i - 1] == 4 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                f[i - 1] += 1;
                let v = f[i - 1];
                for x in f.iter_mut().skip(i) {
                    *x = v;
                }
            }
        }
        for a in 1..=4u32 {
            for b in a..=4u32 {
                for split in 0..=8usize {
                    let mut f = vec![a; split];
                    f.extend(vec![b; 8 - split]);
                    check_one(&f);
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn batch_matches_type_enumeration() {
        let mut requests = Vec::new();
        for f in [
            &[2u32][..],
            &[3, 3],
            &[2, 2, 2],
            &[3, 4, 5],
            &[4, 4],
            &[3, 3, 2, 2],
            &[6, 3, 3],
            &[5, 4, 3, 2, 2],
            &[3, 3, 3, 3, 2],
        ] {
            for p in -2..4 {
                requests.push((mono(f), p));
            }
        }
        for (m, p) in &requests {
            let got = mu_moments_batch(&[(m.clone(), *p)]).unwrap();
            assert_eq!(got[m], mu_moment(m, *p).unwrap(), "{m} p={p}");
        }
    }

    #[test]
    fn batch_matches_set_partition_oracle() {
        for f in [&[2u32, 2, 2, 2][..], &[3, 3, 3, 3], &[4, 3, 3, 2], &[5, 5, 2, 2, 2]] {
            let m = mono(f);
            let exact = set_partition_moment_oracle(&m).unwrap();
            let got = mu_moments_batch(&[(m.clone(), 6)]).unwrap();
            assert_eq!(got[&m], exact.truncate(7), "{m}");
        }
    }

    #[test]
    fn batch_shares_states_between_requests() {
        let reqs: Vec<(MuMonomial, i32)> =
            [&[3u32, 3][..], &[3, 3, 3, 3], &[4, 3, 3], &[2, 2, 3, 3]].iter().map(|f| (mono(f), 3)).collect();
        let together = mu_moments_batch(&reqs).unwrap();
        for (m, p) in &reqs {
            assert_eq!(together[m], mu_moment(m, *p).unwrap());
        }
    }

    fn check_one(f: &[u32]) {
        let m = mono(f);
        let oracle = set_partition_moment_oracle(&m).unwrap();
        let top = oracle.max_power().unwrap_or(0).max(0);
        let fast = mu_moment(&m, top + 2).unwrap();
        assert_eq!(fast.truncate(top + 3), oracle.truncate(top + 3), "{m}");
        if m.degree() % 2 == 1 {
            assert_eq!(oracle, LaurentSeries::zero());
        }
        if let Some(v) = oracle.valuation() {
            // leading power n^{-v} at most n^J
            assert!(-2 * v as i64 <= m.order_bound_doubled(), "{m}");
        }
        // truncation at a lower order keeps the leading part
        let cut = mu_moment(&m, 0).unwrap();
        assert_eq!(cut.truncate(1), oracle.truncate(1), "{m}");
    }

    #[test]
    fn type_contributions_sum_to_moment() {
        for f in [&[1u32, 1, 2, 2][..], &[2, 3, 3, 4], &[1, 1, 1, 3]] {
            let m = mono(f);
            let total = enumerate_partition_types(&m)
                .unwrap()
                .fold(LaurentSeries::zero(), |acc, t| acc.add(&type_contribution(&t)));
            assert_eq!(total, set_partition_moment_oracle(&m).unwrap());
        }
    }

    #[test]
    fn types_cover_all_set_partitions() {
        for f in [&[1u32, 1, 2, 2, 4][..], &[2, 2, 2, 3, 3], &[1, 2, 3, 4, 5, 6]] {
            let m = mono(f);
            let total: BigInt = enumerate_partition_types(&m).unwrap().map(|t| realising_partitions(&t)).sum();
            assert_eq!(total, bell(f.len()));
        }
    }
}
