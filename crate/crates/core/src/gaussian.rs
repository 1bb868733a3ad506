//! Gaussian moment and cumulant calculus.
//!
//! Moments of monomials in a centered Gaussian vector are sums over pairings
//! (Isserlis). Joint cumulants of such monomials are the sums over pairings whose
//! contraction graph on the monomials is connected. The conversion from moments
//! to cumulants is written once against [`Ring`] so it serves plain numbers and
//! [`LaurentSeries`](crate::LaurentSeries) alike.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combinat::{binomial, factorial, matchings};
use crate::hp::Hp;
use crate::rational::to_f64;
use crate::{Error, Result};

/// Largest set size for [`enumerate_partitions`].
pub const MAX_PARTITION_SET: usize = 16;
/// Largest point count for [`enumerate_pairings`].
pub const MAX_PAIRING_POINTS: usize = 24;

/// Commutative ring with rational scalars.
pub trait Ring: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn vanishes(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scaled(&self, c: &BigRational) -> Self;

    fn pow(&self, k: u32) -> Self {
        let mut acc = self.one_like();
        for _ in 0..k {
            acc = acc.times(self);
        }
        acc
    }
}

impl Ring for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scaled(&self, c: &BigRational) -> Self {
        self * c
    }
}

impl Ring for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn vanishes(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scaled(&self, c: &BigRational) -> Self {
        self * to_f64(c)
    }
}

impl Ring for Hp {
    fn zero_like(&self) -> Self {
        Hp::zero(self.precision())
    }
    fn one_like(&self) -> Self {
        Hp::one(self.precision())
    }
    fn vanishes(&self) -> bool {
        Hp::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scaled(&self, c: &BigRational) -> Self {
        self * &Hp::from_rational(c, self.precision())
    }
}

fn from_int<R: Ring>(like: &R, k: &BigInt) -> R {
    like.one_like().scaled(&BigRational::from_integer(k.clone()))
}

/// Symmetric covariance matrix over a ring.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix<R> {
    data: Vec<Vec<R>>,
}

impl<R: Ring + PartialEq> CovarianceMatrix<R> {
    pub fn new(data: Vec<Vec<R>>) -> Result<Self> {
        let n = data.len();
        for (i, row) in data.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("covariance matrix must be square"));
            }
            for j in 0..i {
                if data[i][j] != data[j][i] {
                    return Err(Error::invalid(format!("covariance matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        if n == 0 {
            return Err(Error::invalid("covariance matrix must be nonempty"));
        }
        Ok(CovarianceMatrix { data })
    }
}

impl<R: Ring> CovarianceMatrix<R> {
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i][j]
    }

    fn check(&self, indices: &[usize]) -> Result<()> {
        match indices.iter().find(|&&i| i >= self.dim()) {
            Some(i) => Err(Error::invalid(format!("index {i} out of range for dimension {}", self.dim()))),
            None => Ok(()),
        }
    }

    fn zero(&self) -> R {
        self.data[0][0].zero_like()
    }
}

/// `E[Π Z_i]` over the multiset `indices` (0-based): the sum over all pairings
/// of the product of covariances.
pub fn isserlis_moment<R: Ring>(cov: &CovarianceMatrix<R>, indices: &[usize]) -> Result<R> {
    cov.check(indices)?;
    if indices.len() % 2 == 1 {
        return Ok(cov.zero());
    }
    let mut counts = vec![0u32; cov.dim()];
    for &i in indices {
        counts[i] += 1;
    }
    let mut memo = HashMap::new();
    Ok(moment_counts(cov, &mut counts, &mut memo))
}

fn moment_counts<R: Ring>(cov: &CovarianceMatrix<R>, counts: &mut [u32], memo: &mut HashMap<Vec<u32>, R>) -> R {
    let Some(i) = counts.iter().position(|&c| c > 0) else {
        return cov.zero().one_like();
    };
    if let Some(v) = memo.get(counts) {
        return v.clone();
    }
    counts[i] -= 1;
    let mut total = cov.zero();
    for j in i..counts.len() {
        let c = counts[j];
        if c == 0 {
            continue;
        }
        counts[j] -= 1;
        let sub = moment_counts(cov, counts, memo);
        counts[j] += 1;
        if !sub.vanishes() && !cov.get(i, j).vanishes() {
            let term = cov.get(i, j).times(&sub);
            total = total.plus(&term.scaled(&BigRational::from_integer(c.into())));
        }
    }
    counts[i] += 1;
    memo.insert(counts.to_vec(), total.clone());
    total
}

/// Joint cumulant `κ(Π_{P_1} Z, ..., Π_{P_r} Z)`: the sum over pairings of all
/// factors whose contraction graph on the parts is connected.
pub fn joint_cumulant_connected<R: Ring>(cov: &CovarianceMatrix<R>, parts: &[Vec<usize>]) -> Result<R> {
    for p in parts {
        cov.check(p)?;
    }
    let r = parts.len();
    let mut owner = Vec::new();
    let mut index = Vec::new();
    for (k, p) in parts.iter().enumerate() {
        for &i in p {
            owner.push(k);
            index.push(i);
        }
    }
    if owner.len() % 2 == 1 || r == 0 || parts.iter().any(|p| p.is_empty()) {
        return Ok(cov.zero());
    }
    let state =
        Components { parent: (0..r).collect(), size: vec![1; r], open: parts.iter().map(|p| p.len()).collect() };
    let mut used = vec![false; owner.len()];
    let one = cov.zero().one_like();
    Ok(connected_rec(cov, &owner, &index, &mut used, state, r, one))
}

#[derive(Clone)]
struct Components {
    parent: Vec<usize>,
    size: Vec<usize>,
    // unpaired positions in each component (valid at roots)
    open: Vec<usize>,
}

impl Components {
    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Joins the parts of a new pair and reports whether the merged component is
    /// now closed while still missing some parts.
    fn pair(&mut self, a: usize, b: usize, r: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        let root = if ra == rb {
            self.open[ra] -= 2;
            ra
        } else {
            let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
            self.parent[small] = big;
            self.size[big] += self.size[small];
            self.open[big] = self.open[big] + self.open[small] - 2;
            big
        };
        self.open[root] == 0 && self.size[root] < r
    }
}

fn connected_rec<R: Ring>(
    cov: &CovarianceMatrix<R>,
    owner: &[usize],
    index: &[usize],
    used: &mut [bool],
    state: Components,
    r: usize,
    acc: R,
) -> R {
    let Some(a) = used.iter().position(|&u| !u) else {
        return acc;
    };
    used[a] = true;
    let mut total = cov.zero();
    for b in a + 1..used.len() {
        if used[b] {
            continue;
        }
        let s = cov.get(index[a], index[b]);
        if s.vanishes() {
            continue;
        }
        let mut next = state.clone();
        if next.pair(owner[a], owner[b], r) {
            continue;
        }
        used[b] = true;
        total = total.plus(&connected_rec(cov, owner, index, used, next, r, acc.times(s)));
        used[b] = false;
    }
    used[a] = false;
    total
}

/// Joint cumulant of the monomials by the partition sum
/// `Σ_τ (-1)^{|τ|-1} (|τ|-1)! Π_{B∈τ} E[Π_{i∈B} X_i]`.
pub fn joint_cumulant_partition_sum<R: Ring>(cov: &CovarianceMatrix<R>, parts: &[Vec<usize>]) -> Result<R> {
    let mut total = cov.zero();
    for tau in enumerate_partitions(parts.len())? {
        let k = tau.blocks.len() as u32;
        let mut term = cov.zero().one_like();
        for block in &tau.blocks {
            let idx: Vec<usize> = block.iter().flat_map(|&b| parts[b].iter().copied()).collect();
            term = term.times(&isserlis_moment(cov, &idx)?);
        }
        let mut coef = BigRational::from_integer(factorial(k - 1));
        if k.is_multiple_of(2) {
            coef = -coef;
        }
        total = total.plus(&term.scaled(&coef));
    }
    Ok(total)
}

/// Agreement of the connected-pairing and partition-sum routes.
pub fn cumulant_via_both_routes_check<R: Ring + PartialEq>(
    cov: &CovarianceMatrix<R>,
    parts: &[Vec<usize>],
) -> Result<bool> {
    Ok(joint_cumulant_connected(cov, parts)? == joint_cumulant_partition_sum(cov, parts)?)
}

/// `E[Z_1^p Z_2^q]` for a centered bivariate Gaussian with covariances
/// `s11, s12, s22`, by counting cross pairs.
pub fn bivariate_moment<R: Ring>(s11: &R, s12: &R, s22: &R, p: u32, q: u32) -> R {
    let mut total = s11.zero_like();
    for k in 0..=p.min(q) {
        if (p - k) % 2 == 1 || (q - k) % 2 == 1 {
            continue;
        }
        let count = binomial(p, k) * binomial(q, k) * factorial(k) * matchings(p - k) * matchings(q - k);
        let term = s12.pow(k).times(&s11.pow((p - k) / 2)).times(&s22.pow((q - k) / 2));
        total = total.plus(&term.times(&from_int(s11, &count)));
    }
    total
}

/// Unordered partition of `{0, ..., s-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartition {
    pub blocks: Vec<Vec<usize>>,
}

/// Perfect matching of `{0, ..., k-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
}

/// Every set partition of `{0, ..., s-1}` once, via restricted growth strings.
pub fn enumerate_partitions(s: usize) -> Result<impl Iterator<Item = SetPartition>> {
    if s > MAX_PARTITION_SET {
        return Err(Error::size(format!("partition enumeration limited to s <= {MAX_PARTITION_SET}, got {s}")));
    }
    Ok(PartitionIter { rgs: vec![0; s], max: vec![0; s], done: false })
}

struct PartitionIter {
    rgs: Vec<usize>,
    // max[i] = max(rgs[0..i])
    max: Vec<usize>,
    done: bool,
}

impl Iterator for PartitionIter {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let s = self.rgs.len();
        let nblocks = self.rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); nblocks];
        for (i, &b) in self.rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        let out = SetPartition { blocks };
        // advance
        let mut i = s;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.rgs[i] <= self.max[i] {
                self.rgs[i] += 1;
                for j in i + 1..s {
                    self.rgs[j] = 0;
                    self.max[j] = self.max[j - 1].max(self.rgs[j - 1]);
                }
                break;
            }
        }
        Some(out)
    }
}

/// Every perfect matching of `{0, ..., k-1}` once; nothing for odd `k`.
pub fn enumerate_pairings(k: usize) -> Result<impl Iterator<Item = Pairing>> {
    if k > MAX_PAIRING_POINTS {
        return Err(Error::size(format!("pairing enumeration limited to k <= {MAX_PAIRING_POINTS}, got {k}")));
    }
    // Mixed-radix counter: digit t picks the partner of the smallest free point
    // among the k - 2t - 1 remaining candidates.
    let radices: Vec<usize> = (0..k / 2).map(|t| k - 2 * t - 1).collect();
    Ok(PairingIter { digits: vec![0; k / 2], radices, done: k % 2 == 1, k })
}

struct PairingIter {
    digits: Vec<usize>,
    radices: Vec<usize>,
    done: bool,
    k: usize,
}

impl Iterator for PairingIter {
    type Item = Pairing;

    fn next(&mut self) -> Option<Pairing> {
        if self.done {
            return None;
        }
        let mut free: Vec<usize> = (0..self.k).collect();
        let mut pairs = Vec::with_capacity(self.k / 2);
        for &d in &self.digits {
            let a = free.remove(0);
            let b = free.remove(d);
            pairs.push((a, b));
        }
        let mut t = self.digits.len();
        loop {
            if t == 0 {
                self.done = true;
                break;
            }
            t -= 1;
            self.digits[t] += 1;
            if self.digits[t] < self.radices[t] {
                break;
            }
            self.digits[t] = 0;
        }
        Some(Pairing { pairs })
    }
}

/// Cumulants `κ_1..κ_r` from raw moments `m_1..m_r`, i.e. `r!·[t^r] log Σ m_k t^k/k!`,
/// via `κ_n = m_n - Σ_{k<n} C(n-1, k-1) κ_k m_{n-k}`.
pub fn moments_to_cumulants<R: Ring>(moments: &[R]) -> Vec<R> {
    let mut kappa: Vec<R> = Vec::with_capacity(moments.len());
    for n in 1..=moments.len() {
        let mut k_n = moments[n - 1].clone();
        for k in 1..n {
            let c = BigRational::from_integer(binomial((n - 1) as u32, (k - 1) as u32));
            k_n = k_n.minus(&kappa[k - 1].times(&moments[n - k - 1]).scaled(&c));
        }
        kappa.push(k_n);
    }
    kappa
}

/// Raw moments from cumulants; inverse of [`moments_to_cumulants`].
pub fn cumulants_to_moments<R: Ring>(kappa: &[R]) -> Vec<R> {
    let mut moments: Vec<R> = Vec::with_capacity(kappa.len());
    for n in 1..=kappa.len() {
        let mut m_n = kappa[n - 1].clone();
        for k in 1..n {
            let c = BigRational::from_integer(binomial((n - 1) as u32, (k - 1) as u32));
            m_n = m_n.plus(&kappa[k - 1].times(&moments[n - k - 1]).scaled(&c));
        }
        moments.push(m_n);
    }
    moments
}

/// `κ_r` from moments by the explicit partition sum; an independent route used in tests.
pub fn cumulant_partition_sum<R: Ring>(moments: &[R], r: usize) -> Result<R> {
    let mut total = moments[0].zero_like();
    for tau in enumerate_partitions(r)? {
        let k = tau.blocks.len();
        let mut term = moments[0].one_like();
        for b in &tau.blocks {
            term = term.times(&moments[b.len() - 1]);
        }
        let mut coef = BigRational::from_integer(factorial(k as u32 - 1));
        if k % 2 == 0 {
            coef = -coef;
        }
        total = total.plus(&term.scaled(&coef));
    }
    Ok(total)
}

/// `Σ_k (-1)^{k-1} (k-1)! S(m, k)`.
pub fn stirling_alternating_sum(m: usize) -> BigInt {
    crate::combinat::stirling2_row(m)
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, s)| {
            let f = factorial(k as u32 - 1) * s;
            if k % 2 == 1 {
                f
            } else {
                -f
            }
        })
        .sum()
}

/// `Σ_{τ ∈ P_s} (|τ|-1)!` computed from the Stirling numbers of the second kind.
pub fn partition_factorial_sum(s: usize) -> BigInt {
    crate::combinat::stirling2_row(s).iter().enumerate().skip(1).map(|(k, st)| factorial(k as u32 - 1) * st).sum()
}
