//! Ground-truth counters: Eulerian orientations by backtracking, regular
//! tournaments by a degree-sequence recurrence, Eulerian digraphs and oriented
//! graphs by exhaustive search, and a quadrature of the torus integral.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::combinat::binomial;
use crate::graph::Graph;
use crate::rational::to_f64;
use crate::{Error, Result};

/// Edge cap for [`eo_count_bruteforce`].
pub const EO_MAX_EDGES: usize = 40;
/// Largest odd order accepted by [`rt_count`]; the memo grows about fivefold per step beyond it.
pub const RT_MAX_N: usize = 21;
/// Largest vertex count for the digraph brute-force counters.
pub const DIGRAPH_MAX_N: usize = 5;
/// Largest vertex count for [`torus_integral_estimate`].
pub const TORUS_MAX_N: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    Bruteforce,
    Dp,
    IntegralApprox,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientationCount {
    pub value: BigInt,
    pub method: CountMethod,
}

/// Counts balanced assignments where each edge independently takes one of
/// `options` (net out-degree change of the lower endpoint). Backtracks in
/// edge order, pruning when a vertex can no longer return to balance.
fn balanced_assignments(g: &Graph, options: &[i32], fix_first: bool) -> u64 {
    let n = g.n();
    let edges = g.edges();
    let mut remaining: Vec<i32> = g.degrees().iter().map(|&d| d as i32).collect();
    let mut balance = vec![0i32; n];
    // After processing edge i, which vertices see their last edge.
    fn rec(
        i: usize,
        edges: &[(usize, usize)],
        options: &[i32],
        balance: &mut [i32],
        remaining: &mut [i32],
        only: Option<i32>,
    ) -> u64 {
        if i == edges.len() {
            return 1;
        }
        let (a, b) = edges[i];
        remaining[a] -= 1;
        remaining[b] -= 1;
        let mut total = 0;
        for &delta in options {
            if let Some(o) = only {
                if i == 0 && delta != o {
                    continue;
                }
            }
            balance[a] += delta;
            balance[b] -= delta;
            if balance[a].abs() <= remaining[a] && balance[b].abs() <= remaining[b] {
                total += rec(i + 1, edges, options, balance, remaining, only);
            }
            balance[a] -= delta;
            balance[b] += delta;
        }
        remaining[a] += 1;
        remaining[b] += 1;
        total
    }
    let only = if fix_first { Some(1) } else { None };
    rec(0, edges, options, &mut balance, &mut remaining, only)
}

/// Exact number of Eulerian orientations of `g`.
///
/// Fixes the orientation of the first edge and doubles, using the reversal
/// involution.
pub fn eo_count_bruteforce(g: &Graph) -> Result<BigInt> {
    if g.num_edges() > EO_MAX_EDGES {
        return Err(Error::size(format!(
            "brute-force orientation count limited to {EO_MAX_EDGES} edges, got {}",
            g.num_edges()
        )));
    }
    if !g.all_degrees_even() {
        return Ok(BigInt::zero());
    }
    if g.num_edges() == 0 {
        return Ok(BigInt::one());
    }
    Ok(BigInt::from(balanced_assignments(g, &[1, -1], true)) * 2)
}

/// Number of regular tournaments on `n` labelled vertices.
///
/// Vertex-elimination recurrence over the sorted multiset of residual out-degree
/// requirements: removing a vertex with residual `r` among `m` remaining vertices
/// means choosing which `m - 1 - r` of the others beat it, and those others lose
/// one unit of residual. Equal residuals are grouped and weighted by binomials.
pub fn rt_count(n: usize) -> Result<BigInt> {
    if n.is_multiple_of(2) {
        return Err(Error::domain(format!("regular tournaments need odd n, got {n}")));
    }
    if n > RT_MAX_N {
        return Err(Error::size(format!("rt_count limited to n <= {RT_MAX_N}, got {n}")));
    }
    let start = vec![((n - 1) / 2) as u8; n];
    let mut memo = HashMap::new();
    Ok(tournaments_with_scores(&start, &mut memo))
}

/// Number of tournaments whose out-degrees are exactly `scores` (sorted ascending).
pub fn tournaments_with_scores(scores: &[u8], memo: &mut HashMap<Vec<u8>, BigInt>) -> BigInt {
    let m = scores.len();
    if m <= 1 {
        return if scores.iter().all(|&s| s == 0) { BigInt::one() } else { BigInt::zero() };
    }
    let sum: usize = scores.iter().map(|&s| s as usize).sum();
    if sum != m * (m - 1) / 2 || scores[m - 1] as usize > m - 1 {
        return BigInt::zero();
    }
    if let Some(v) = memo.get(scores) {
        return v.clone();
    }
    // Eliminate the vertex with the largest residual.
    let r = scores[m - 1] as usize;
    let others = &scores[..m - 1];
    let beaters = m - 1 - r;
    let mut groups: Vec<(u8, usize)> = Vec::new();
    for &s in others {
        match groups.last_mut() {
            Some((v, c)) if *v == s => *c += 1,
            _ => groups.push((s, 1)),
        }
    }
    let mut total = BigInt::zero();
    let mut take = vec![0usize; groups.len()];
    fn split(
        gi: usize,
        left: usize,
        groups: &[(u8, usize)],
        take: &mut Vec<usize>,
        memo: &mut HashMap<Vec<u8>, BigInt>,
        total: &mut BigInt,
    ) {
        if gi == groups.len() {
            if left != 0 {
                return;
            }
            let mut next = Vec::new();
            let mut weight = BigInt::one();
            for (&(v, c), &b) in groups.iter().zip(take.iter()) {
                weight *= binomial(c as u32, b as u32);
                if b > 0 {
                    next.extend(std::iter::repeat_n(v - 1, b));
                }
                next.extend(std::iter::repeat_n(v, c - b));
            }
            next.sort_unstable();
            let sub = tournaments_with_scores(&next, memo);
            if !sub.is_zero() {
                *total += weight * sub;
            }
            return;
        }
        let (v, c) = groups[gi];
        let cap = if v == 0 { 0 } else { c.min(left) };
        let rest: usize = groups[gi + 1..].iter().filter(|g| g.0 > 0).map(|g| g.1).sum();
        for b in 0..=cap {
            if left - b > rest {
                continue;
            }
            take[gi] = b;
            split(gi + 1, left - b, groups, take, memo, total);
        }
        take[gi] = 0;
    }
    split(0, beaters, &groups, &mut take, memo, &mut total);
    memo.insert(scores.to_vec(), total.clone());
    total
}

fn check_digraph_n(n: usize) -> Result<()> {
    if n > DIGRAPH_MAX_N {
        return Err(Error::size(format!("exhaustive digraph count limited to n <= {DIGRAPH_MAX_N}, got {n}")));
    }
    Ok(())
}

/// Eulerian digraphs on `n` labelled vertices: each pair carries none, either
/// arc, or both arcs, and every vertex is balanced.
pub fn eulerian_digraph_count_bruteforce(n: usize) -> Result<BigInt> {
    check_digraph_n(n)?;
    Ok(BigInt::from(balanced_assignments(&Graph::complete(n), &[0, 1, -1, 0], false)))
}

/// Eulerian oriented graphs on `n` labelled vertices: each pair carries at most one arc.
pub fn eulerian_oriented_count_bruteforce(n: usize) -> Result<BigInt> {
    check_digraph_n(n)?;
    Ok(BigInt::from(balanced_assignments(&Graph::complete(n), &[0, 1, -1], false)))
}

/// Per-edge weight `a + b cos(θ_j - θ_k)` of the torus integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeWeight {
    pub a: BigRational,
    pub b: BigRational,
}

/// Trapezoid approximation of the torus integral
/// `(2/b)^|E| (2π)^-n ∫ Π_{jk∈G} (a + b cos(θ_j - θ_k)) dθ`,
/// the constant term of `Π (2a/b + z_j/z_k + z_k/z_j)`.
///
/// One angle is pinned by translation invariance. When `a = 0` and every degree
/// is even the integrand is π-periodic in each angle, and the grid covers `[0, π)`.
pub fn torus_integral_estimate(g: &Graph, a: &BigRational, b: &BigRational, grid: usize) -> Result<f64> {
    let n = g.n();
    if n > TORUS_MAX_N {
        return Err(Error::size(format!("torus quadrature limited to n <= {TORUS_MAX_N}, got {n}")));
    }
    if grid < 64 {
        return Err(Error::invalid(format!("grid must be at least 64, got {grid}")));
    }
    if !b.is_positive() || a.is_negative() {
        return Err(Error::domain("edge weight needs a >= 0 and b > 0"));
    }
    if n <= 1 {
        return Ok(1.0);
    }
    let (af, bf) = (to_f64(a), to_f64(b));
    let half_period = a.is_zero() && g.all_degrees_even();
    let span = if half_period { std::f64::consts::PI } else { 2.0 * std::f64::consts::PI };
    // factor[d + grid - 1] = a + b cos(span * d / grid) for d in -(grid-1)..grid
    let factor: Vec<f64> = (0..2 * grid - 1)
        .map(|i| {
            let d = i as f64 - (grid as f64 - 1.0);
            af + bf * (span * d / grid as f64).cos()
        })
        .collect();
    let dims = n - 1;
    let points = grid.pow(dims as u32);
    let mut idx = vec![0usize; n];
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for p in 0..points {
        let mut rest = p;
        for slot in idx.iter_mut().take(dims) {
            *slot = rest % grid;
            rest /= grid;
        }
        idx[n - 1] = 0;
        let mut prod = 1.0;
        for &(j, k) in g.edges() {
            prod *= factor[idx[j] + grid - 1 - idx[k]];
        }
        // Kahan summation
        let y = prod - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let mean = sum / points as f64;
    Ok((2.0 / bf).powi(g.num_edges() as i32) * mean)
}
