//! Cumulant-corrected estimates of `EO(G)` for general even-degree graphs.
//!
//! The Gaussian vector has covariance `Σ_w = (L + wJ)^{-1}`. Only differences
//! `X_j - X_k` enter `f_K`, and their covariances do not depend on `w`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::combinat::{binomial, factorial, matchings};
use crate::expansion::log_cos_coeffs;
use crate::graph::{Graph, CHEEGER_MAX_VERTICES};
use crate::hp::Hp;
use crate::rational;
use crate::{Error, Result};

/// Largest `n` for the exact rational inverse.
pub const EXACT_SIGMA_MAX_N: usize = 12;
/// Largest `K` accepted by [`kappa2_f`].
pub const KAPPA2_MAX_K: usize = 6;
/// Largest `|E|^2` accepted by [`kappa2_f`].
pub const KAPPA2_MAX_EDGE_PAIRS: usize = 250_000;

/// Dense symmetric matrix of high-precision floats, row-major.
#[derive(Clone, Debug)]
pub struct HpMatrix {
    n: usize,
    data: Vec<Hp>,
}

impl HpMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> &Hp {
        &self.data[j * self.n + k]
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> Hp {
        let bits = self.data[0].precision();
        let mut best = Hp::zero(bits);
        for j in 0..self.n {
            let mut s = Hp::zero(bits);
            for k in 0..self.n {
                s = &s + &self.get(j, k).abs();
            }
            best = best.max(s);
        }
        best
    }
}

/// Default `w = 2d/n` with `d` the maximum degree.
pub fn default_w(g: &Graph) -> BigRational {
    BigRational::new(BigInt::from(2 * g.max_degree()), BigInt::from(g.n()))
}

fn check_w(g: &Graph, w: &BigRational) -> Result<()> {
    if !w.is_positive() {
        return Err(Error::invalid("w must be positive"));
    }
    if !g.is_connected() {
        return Err(Error::domain("graph is disconnected, so L + wJ does not determine the difference covariances"));
    }
    Ok(())
}

fn shifted_laplacian(g: &Graph, w: &BigRational) -> Vec<Vec<BigRational>> {
    let n = g.n();
    let lap = g.laplacian();
    (0..n).map(|j| (0..n).map(|k| BigRational::from_integer(lap.get(j, k).clone()) + w).collect()).collect()
}

/// `Σ_w = (L + wJ)^{-1}` by Gauss-Jordan elimination at `bits` of precision.
pub fn covariance_sigma(g: &Graph, w: &BigRational, bits: usize) -> Result<HpMatrix> {
    check_w(g, w)?;
    let n = g.n();
    let a = shifted_laplacian(g, w);
    let mut m: Vec<Vec<Hp>> = a.iter().map(|row| row.iter().map(|x| Hp::from_rational(x, bits)).collect()).collect();
    let mut inv: Vec<Vec<Hp>> = (0..n).map(|j| (0..n).map(|k| Hp::from_i64((j == k) as i64, bits)).collect()).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("nonempty range");
        if m[pivot][col].is_zero() {
            return Err(Error::domain("L + wJ is singular"));
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].clone();
        for k in 0..n {
            m[col][k] = &m[col][k] / &p;
            inv[col][k] = &inv[col][k] / &p;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for k in 0..n {
                let t = &factor * &m[col][k];
                m[r][k] = &m[r][k] - &t;
                let t = &factor * &inv[col][k];
                inv[r][k] = &inv[r][k] - &t;
            }
        }
    }
    Ok(HpMatrix { n, data: inv.into_iter().flatten().collect() })
}

/// Exact `(L + wJ)^{-1}` over the rationals, for `n ≤ 12`.
pub fn covariance_sigma_exact(g: &Graph, w: &BigRational) -> Result<Vec<Vec<BigRational>>> {
    check_w(g, w)?;
    let n = g.n();
    if n > EXACT_SIGMA_MAX_N {
        return Err(Error::size(format!("exact inverse limited to n <= {EXACT_SIGMA_MAX_N}")));
    }
    let mut m = shifted_laplacian(g, w);
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|j| (0..n).map(|k| if j == k { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or_else(|| Error::domain("L + wJ is singular"))?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].clone();
        for k in 0..n {
            m[col][k] = &m[col][k] / &p;
            inv[col][k] = &inv[col][k] / &p;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for k in 0..n {
                let t = &factor * &m[col][k];
                m[r][k] -= t;
                let t = &factor * &inv[col][k];
                inv[r][k] -= t;
            }
        }
    }
    Ok(inv)
}

/// `σ_{jk,st} = Cov(X_j - X_k, X_s - X_t)`.
pub fn edge_covariance(sigma: &HpMatrix, e: (usize, usize), f: (usize, usize)) -> Hp {
    let (j, k) = e;
    let (s, t) = f;
    let a = sigma.get(j, s) - sigma.get(j, t);
    let b = sigma.get(k, s) - sigma.get(k, t);
    a - b
}

fn check_even(g: &Graph) -> Result<()> {
    if !g.all_degrees_even() {
        return Err(Error::domain("every degree must be even"));
    }
    if !g.is_connected() {
        return Err(Error::domain("graph must be connected"));
    }
    Ok(())
}

/// `-¼ Σ_{jk∈G} (1/d_j + 1/d_k)²`, exactly.
pub fn degree_correction(g: &Graph) -> BigRational {
    let d = g.degrees();
    let mut total = BigRational::zero();
    for &(j, k) in g.edges() {
        let s =
            BigRational::new(BigInt::one(), BigInt::from(d[j])) + BigRational::new(BigInt::one(), BigInt::from(d[k]));
        total += &s * &s;
    }
    -total / BigRational::from_integer(BigInt::from(4))
}

/// `|E| log 2 - ½ log τ(G) + ((n-1)/2) log(2/π)`: the estimate before any cumulant.
fn log_base(g: &Graph, bits: usize) -> Hp {
    let two = Hp::from_i64(2, bits);
    let ln2 = two.ln();
    let tau = Hp::from_bigint(&g.spanning_tree_count(), bits);
    let half = Hp::from_rational(&rational::frac(1, 2), bits);
    let n1 = Hp::from_rational(&rational::frac(g.n() as i64 - 1, 2), bits);
    let ln_2_over_pi = (&two / &Hp::pi(bits)).ln();
    &(&(&Hp::from_i64(g.num_edges() as i64, bits) * &ln2) - &(&half * &tau.ln())) + &(&n1 * &ln_2_over_pi)
}

/// `log ÊO(G)`.
pub fn eo_hat(g: &Graph, bits: usize) -> Result<Hp> {
    check_even(g)?;
    let corr = Hp::from_rational(&degree_correction(g), bits);
    Ok(&log_base(g, bits) + &corr)
}

/// `E f_K(X_G) = Σ_{ℓ=2}^K c_{2ℓ} Σ_{jk∈G} (2ℓ-1)!! σ_{jk,jk}^ℓ`.
///
/// Does not insist on even degrees so that single edges can be fed in.
pub fn kappa1_f(g: &Graph, sigma: &HpMatrix, k: usize) -> Result<Hp> {
    if k < 2 {
        return Err(Error::invalid("K must be at least 2"));
    }
    let bits = sigma.get(0, 0).precision();
    let c = log_cos_coeffs(k)?;
    let mut per_l: Vec<Hp> = vec![Hp::zero(bits); k + 1];
    for &e in g.edges() {
        let s = edge_covariance(sigma, e, e);
        let mut pw = s.clone();
        for slot in per_l.iter_mut().skip(2) {
            pw = &pw * &s;
            *slot = &*slot + &pw;
        }
    }
    let mut total = Hp::zero(bits);
    for l in 2..=k {
        let coef = BigRational::from_integer(matchings(2 * l as u32)) * &c[l - 1];
        total = &total + &(&Hp::from_rational(&coef, bits) * &per_l[l]);
    }
    Ok(total)
}

/// `κ(X^{2a}, Y^{2b})` for a centred Gaussian pair, as the terms of the bivariate
/// Isserlis sum with at least one cross pairing:
/// `Σ_{i≥1} C(2a,2i) C(2b,2i) (2i)! (2a-2i-1)!! (2b-2i-1)!! s12^{2i} s11^{a-i} s22^{b-i}`.
fn pair_cumulant_table(k: usize, bits: usize) -> Vec<Vec<Vec<Hp>>> {
    (0..=k)
        .map(|a| {
            (0..=k)
                .map(|b| {
                    (0..=a.min(b))
                        .map(|i| {
                            if i == 0 {
                                return Hp::zero(bits);
                            }
                            let (a, b, i) = (a as u32, b as u32, i as u32);
                            let v = binomial(2 * a, 2 * i)
                                * binomial(2 * b, 2 * i)
                                * factorial(2 * i)
                                * matchings(2 * a - 2 * i)
                                * matchings(2 * b - 2 * i);
                            Hp::from_bigint(&v, bits)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `Σ_{a,b} c_{2a} c_{2b} κ(X_e^{2a}, X_f^{2b})` from the power tables of
/// `σ_{e,e}`, `σ_{f,f}` and `σ_{e,f}`.
fn pair_contribution(pe: &[Hp], pf: &[Hp], p12: &[Hp], c: &[Hp], table: &[Vec<Vec<Hp>>]) -> Hp {
    let k = c.len();
    let mut total = Hp::zero(pe[0].precision());
    for a in 2..=k {
        for b in 2..=k {
            let mut kap = Hp::zero(pe[0].precision());
            for i in 1..=a.min(b) {
                let t = &(&(&table[a][b][i] * &p12[2 * i]) * &pe[a - i]) * &pf[b - i];
                kap = &kap + &t;
            }
            total = &total + &(&(&c[a - 1] * &c[b - 1]) * &kap);
        }
    }
    total
}

/// Second cumulant `κ_2(f_K(X_G))`, summed over ordered edge pairs.
pub fn kappa2_f(g: &Graph, sigma: &HpMatrix, k: usize) -> Result<Hp> {
    if !(2..=KAPPA2_MAX_K).contains(&k) {
        return Err(Error::size(format!("second cumulant needs 2 <= K <= {KAPPA2_MAX_K}")));
    }
    let m = g.num_edges();
    if m * m > KAPPA2_MAX_EDGE_PAIRS {
        return Err(Error::size(format!("{} edge pairs exceed the cap of {KAPPA2_MAX_EDGE_PAIRS}", m * m)));
    }
    let bits = sigma.get(0, 0).precision();
    let c: Vec<Hp> = log_cos_coeffs(k)?.iter().map(|x| Hp::from_rational(x, bits)).collect();
    let table = pair_cumulant_table(k, bits);
    let edges = g.edges();
    let diag: Vec<Hp> = edges.iter().map(|&e| edge_covariance(sigma, e, e)).collect();
    let powers = |x: &Hp| -> Vec<Hp> {
        let mut v = vec![Hp::one(bits)];
        for i in 1..=2 * k {
            let next = &v[i - 1] * x;
            v.push(next);
        }
        v
    };
    let diag_pows: Vec<Vec<Hp>> = diag.iter().map(powers).collect();
    // One row per first edge; rows are summed in order so the result does not
    // depend on the thread count.
    let rows: Vec<Hp> = (0..m)
        .into_par_iter()
        .map(|x| {
            let mut row = Hp::zero(bits);
            for y in 0..m {
                let s12 = edge_covariance(sigma, edges[x], edges[y]);
                if s12.is_zero() {
                    continue;
                }
                row = &row + &pair_contribution(&diag_pows[x], &diag_pows[y], &powers(&s12), &c, &table);
            }
            row
        })
        .collect();
    Ok(rows.iter().fold(Hp::zero(bits), |acc, r| &acc + r))
}

/// The bound `(n / 2δ) (5d/δ)^r ‖Σ_w‖_∞^{r-1} (4r-1)!!` on `|κ_r(f_K)|`.
pub fn kappa_bound(g: &Graph, sigma_norm: &Hp, r: u32) -> Hp {
    let bits = sigma_norm.precision();
    let n = Hp::from_i64(g.n() as i64, bits);
    let d = Hp::from_i64(g.max_degree() as i64, bits);
    let delta = Hp::from_i64(g.min_degree() as i64, bits);
    let lead = &n / &(&Hp::from_i64(2, bits) * &delta);
    let ratio = &(&Hp::from_i64(5, bits) * &d) / &delta;
    let norm = if r == 0 { Hp::one(bits) } else { sigma_norm.powi(r as usize - 1) };
    &(&(&lead * &ratio.powi(r as usize)) * &norm) * &Hp::from_bigint(&matchings(4 * r), bits)
}

/// `Π C(d_i, d_i/2) / 2^{|E|} ≤ EO(G) ≤ Π C(d_i, d_i/2)^{1/2}`, kept exact.
#[derive(Clone, Debug, PartialEq)]
pub struct SchrijverBounds {
    pub lower: BigRational,
    /// Square of the upper bound, an integer.
    pub upper_squared: BigInt,
}

impl SchrijverBounds {
    pub fn new(g: &Graph) -> Result<Self> {
        if !g.all_degrees_even() {
            return Err(Error::domain("every degree must be even"));
        }
        let prod: BigInt = g.degrees().iter().map(|&d| binomial(d as u32, d as u32 / 2)).product();
        let lower = BigRational::new(prod.clone(), BigInt::one() << g.num_edges());
        Ok(SchrijverBounds { lower, upper_squared: prod })
    }

    /// Whether `lower < count < upper`, both strictly.
    pub fn strictly_brackets(&self, count: &BigInt) -> (bool, bool) {
        let c = BigRational::from_integer(count.clone());
        (self.lower < c, count * count < self.upper_squared)
    }

    /// Whether `lower ≤ count ≤ upper`.
    pub fn brackets(&self, count: &BigInt) -> bool {
        let c = BigRational::from_integer(count.clone());
        self.lower <= c && count * count <= self.upper_squared
    }

    pub fn log_lower(&self, bits: usize) -> Hp {
        Hp::from_bigint(self.lower.numer(), bits).ln() - Hp::from_bigint(self.lower.denom(), bits).ln()
    }

    pub fn log_upper(&self, bits: usize) -> Hp {
        let half = Hp::from_rational(&rational::frac(1, 2), bits);
        &half * &Hp::from_bigint(&self.upper_squared, bits).ln()
    }
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    /// Number of cumulant corrections, at most 2.
    pub m: usize,
    pub k: usize,
    pub w: Option<BigRational>,
    pub bits: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { m: 2, k: 4, w: None, bits: crate::hp::DEFAULT_BITS }
    }
}

#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub graph_id: String,
    pub n: usize,
    pub edges: usize,
    pub bits: usize,
    pub k: usize,
    pub log_eo_hat: Hp,
    /// `κ_1, κ_2` up to the requested `M`.
    pub kappas: Vec<Hp>,
    /// `log` of the estimate with corrections `r ≤ 1, r ≤ 2, ...`.
    pub log_corrected: Vec<Hp>,
    pub schrijver: SchrijverBounds,
    pub log_schrijver_lower: Hp,
    pub log_schrijver_upper: Hp,
    /// Pauling's heuristic, which coincides with the Schrijver lower bound.
    pub log_pauling: Hp,
    /// `h(G)/d`, when the graph is small enough for the exact minimisation.
    pub cheeger_ratio: Option<BigRational>,
    pub w: BigRational,
    pub sigma_inf_norm: Hp,
    /// `‖Σ_w‖_∞ > 1/2`: outside the range where the cumulant bounds are proved.
    pub out_of_hypothesis: bool,
}

impl EstimateReport {
    /// The estimate itself, with all requested corrections.
    pub fn log_estimate(&self) -> &Hp {
        self.log_corrected.last().unwrap_or(&self.log_eo_hat)
    }

    pub fn to_json(&self) -> Value {
        let digits = (self.bits as f64 * std::f64::consts::LOG10_2) as usize - 2;
        let hp = |x: &Hp| Value::String(x.to_decimal(digits));
        json!({
            "graph": self.graph_id,
            "n": self.n,
            "edges": self.edges,
            "bits": self.bits,
            "K": self.k,
            "M": self.kappas.len(),
            "log_eo_hat": hp(&self.log_eo_hat),
            "kappas": self.kappas.iter().map(hp).collect::<Vec<_>>(),
            "log_corrected": self.log_corrected.iter().map(hp).collect::<Vec<_>>(),
            "log_estimate": hp(self.log_estimate()),
            "estimate": hp(&self.log_estimate().exp()),
            "schrijver_lower": rational::to_string(&self.schrijver.lower),
            "schrijver_upper_squared": self.schrijver.upper_squared.to_string(),
            "log_schrijver_lower": hp(&self.log_schrijver_lower),
            "log_schrijver_upper": hp(&self.log_schrijver_upper),
            "log_pauling": hp(&self.log_pauling),
            "cheeger_ratio": self.cheeger_ratio.as_ref().map(rational::to_string),
            "w": rational::to_string(&self.w),
            "sigma_inf_norm": hp(&self.sigma_inf_norm),
            "out_of_hypothesis": self.out_of_hypothesis,
        })
    }
}

/// `log EO(G) ≈ log ÊO-base + Σ_{r ≤ M} κ_r(f_K) / r!`.
pub fn eo_estimate(g: &Graph, graph_id: &str, opts: &EstimateOptions) -> Result<EstimateReport> {
    check_even(g)?;
    if opts.m > 2 {
        return Err(Error::size("at most two cumulant corrections for general graphs"));
    }
    let bits = opts.bits;
    let w = opts.w.clone().unwrap_or_else(|| default_w(g));
    let sigma = covariance_sigma(g, &w, bits)?;
    let norm = sigma.inf_norm();
    let base = log_base(g, bits);
    let mut kappas = Vec::new();
    let mut log_corrected = Vec::new();
    if opts.m >= 1 {
        kappas.push(kappa1_f(g, &sigma, opts.k)?);
        log_corrected.push(&base + &kappas[0]);
    }
    if opts.m >= 2 {
        let k2 = kappa2_f(g, &sigma, opts.k)?;
        let half = Hp::from_rational(&rational::frac(1, 2), bits);
        log_corrected.push(&log_corrected[0] + &(&half * &k2));
        kappas.push(k2);
    }
    let schrijver = SchrijverBounds::new(g)?;
    let cheeger_ratio = if g.n() <= CHEEGER_MAX_VERTICES { Some(g.cheeger_ratio()?) } else { None };
    let out_of_hypothesis = norm.to_f64() > 0.5;
    Ok(EstimateReport {
        graph_id: graph_id.to_string(),
        n: g.n(),
        edges: g.num_edges(),
        bits,
        k: opts.k,
        log_eo_hat: eo_hat(g, bits)?,
        kappas,
        log_corrected,
        log_schrijver_lower: schrijver.log_lower(bits),
        log_schrijver_upper: schrijver.log_upper(bits),
        log_pauling: schrijver.log_lower(bits),
        schrijver,
        cheeger_ratio,
        w,
        sigma_inf_norm: norm,
        out_of_hypothesis,
    })
}

/// Relative difference of two positive-or-negative values, as an `f64`.
pub fn relative_gap(a: &Hp, b: &Hp) -> f64 {
    let d = (a - b).abs();
    let s = a.abs().max(b.abs());
    if s.is_zero() {
        return 0.0;
    }
    (&d / &s).to_f64()
}

/// `log(count)` for an exact count.
pub fn log_count(count: &BigInt, bits: usize) -> Result<Hp> {
    if !count.is_positive() {
        return Err(Error::domain("count must be positive"));
    }
    Ok(Hp::from_bigint(count, bits).ln())
}

/// `log` distance `|log a - log b|` as an `f64`.
pub fn log_distance(a: &Hp, b: &Hp) -> f64 {
    (a - b).abs().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    const BITS: usize = 192;

    fn close(a: &Hp, b: &BigRational, tol: f64) -> bool {
        (a - &Hp::from_rational(b, a.precision())).abs().to_f64() <= tol
    }

    #[test]
    fn k3_inverse_matches_hand_computation() {
        // L + wJ = 3I + (w-1)J on K_3, whose inverse is I/3 - (w-1)/(9w) J.
        let g = Graph::complete(3);
        let w = default_w(&g);
        assert_eq!(w, frac(4, 3));
        let s = covariance_sigma(&g, &w, BITS).unwrap();
        let diag = frac(1, 3) - frac(1, 36);
        let off = -frac(1, 36);
        for j in 0..3 {
            for k in 0..3 {
                assert!(close(s.get(j, k), if j == k { &diag } else { &off }, 1e-50));
            }
        }
    }

    #[test]
    fn c4_inverse_solves_the_system() {
        let g = Graph::cycle(4);
        let w = int(1);
        let exact = covariance_sigma_exact(&g, &w).unwrap();
        let a = shifted_laplacian(&g, &w);
        for j in 0..4 {
            for k in 0..4 {
                let v: BigRational = (0..4).map(|i| &a[j][i] * &exact[i][k]).sum();
                assert_eq!(v, if j == k { int(1) } else { int(0) });
            }
        }
        let s = covariance_sigma(&g, &w, BITS).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                assert!(close(s.get(j, k), &exact[j][k], 1e-50));
            }
        }
    }

    #[test]
    fn float_inverse_matches_rational_inverse() {
        for g in [Graph::octahedron(), Graph::circulant(8, &[1, 2]).unwrap(), Graph::complete(7)] {
            let w = default_w(&g);
            let exact = covariance_sigma_exact(&g, &w).unwrap();
            let s = covariance_sigma(&g, &w, BITS).unwrap();
            for j in 0..g.n() {
                for k in 0..g.n() {
                    assert!(close(s.get(j, k), &exact[j][k], 1e-50));
                }
            }
        }
    }

    #[test]
    fn edge_covariances_do_not_depend_on_w() {
        let g = Graph::complete(4);
        let a = covariance_sigma(&g, &int(1), BITS).unwrap();
        let b = covariance_sigma(&g, &frac(7, 2), BITS).unwrap();
        for &e in g.edges() {
            for &f in g.edges() {
                let x = edge_covariance(&a, e, f);
                let y = edge_covariance(&b, e, f);
                assert!((&x - &y).abs().to_f64() < 1e-50);
            }
        }
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(covariance_sigma(&g, &int(1), BITS), Err(Error::Domain(_))));
    }

    #[test]
    fn single_edge_first_cumulant_is_one_term() {
        let g = Graph::complete(2);
        let s = covariance_sigma(&g, &int(1), BITS).unwrap();
        let var = edge_covariance(&s, (0, 1), (0, 1));
        let expect = &Hp::from_rational(&(frac(-1, 12) * int(3)), BITS) * &var.powi(2);
        let got = kappa1_f(&g, &s, 2).unwrap();
        assert!((&got - &expect).abs().to_f64() < 1e-50);
    }

    #[test]
    fn uncorrelated_edge_pair_contributes_nothing() {
        // Opposite edges of K_4 have σ_{01,23} = 0 by symmetry.
        let g = Graph::complete(4);
        let s = covariance_sigma(&g, &int(1), BITS).unwrap();
        let s12 = edge_covariance(&s, (0, 1), (2, 3));
        assert!(s12.abs().to_f64() < 1e-50);
        let k = 4;
        let c: Vec<Hp> = log_cos_coeffs(k).unwrap().iter().map(|x| Hp::from_rational(x, BITS)).collect();
        let table = pair_cumulant_table(k, BITS);
        let pw = |x: &Hp| (0..=2 * k).map(|i| x.powi(i)).collect::<Vec<_>>();
        let var = edge_covariance(&s, (0, 1), (0, 1));
        let t = pair_contribution(&pw(&var), &pw(&var), &pw(&Hp::zero(BITS)), &c, &table);
        assert!(t.is_zero());
    }

    #[test]
    fn kappa2_single_edge_is_a_variance() {
        // With one edge, κ_2 = Var(f) = Σ c_a c_b (E X^{2a+2b} - E X^{2a} E X^{2b}).
        let g = Graph::complete(2);
        let s = covariance_sigma(&g, &int(1), BITS).unwrap();
        let var = edge_covariance(&s, (0, 1), (0, 1));
        let c = log_cos_coeffs(3).unwrap();
        let mut expect = Hp::zero(BITS);
        for a in 2..=3u32 {
            for b in 2..=3u32 {
                let m = BigRational::from_integer(matchings(2 * a + 2 * b) - matchings(2 * a) * matchings(2 * b));
                let coef = &c[a as usize - 1] * &c[b as usize - 1] * m;
                expect = &expect + &(&Hp::from_rational(&coef, BITS) * &var.powi((a + b) as usize));
            }
        }
        let got = kappa2_f(&g, &s, 3).unwrap();
        assert!(relative_gap(&got, &expect) < 1e-50);
    }

    #[test]
    fn cumulants_are_invariant_under_w() {
        let g = Graph::complete(5);
        let a = covariance_sigma(&g, &int(1), BITS).unwrap();
        let b = covariance_sigma(&g, &default_w(&g), BITS).unwrap();
        assert!(relative_gap(&kappa1_f(&g, &a, 4).unwrap(), &kappa1_f(&g, &b, 4).unwrap()) < 1e-9);
        assert!(relative_gap(&kappa2_f(&g, &a, 4).unwrap(), &kappa2_f(&g, &b, 4).unwrap()) < 1e-9);
    }

    #[test]
    fn eo_hat_of_k5_is_near_24() {
        let g = Graph::complete(5);
        let ratio = (eo_hat(&g, BITS).unwrap() - log_count(&BigInt::from(24), BITS).unwrap()).exp().to_f64();
        assert!((0.5..=2.0).contains(&ratio), "{ratio}");
        let g7 = Graph::complete(7);
        let r7 = (eo_hat(&g7, BITS).unwrap() - log_count(&BigInt::from(2640), BITS).unwrap()).exp().to_f64();
        assert!((r7 - 1.0).abs() < (ratio - 1.0).abs(), "{r7} vs {ratio}");
    }

    #[test]
    fn odd_degrees_are_a_domain_error() {
        assert!(matches!(eo_hat(&Graph::complete(4), BITS), Err(Error::Domain(_))));
    }

    #[test]
    fn schrijver_bounds_of_k5() {
        let b = SchrijverBounds::new(&Graph::complete(5)).unwrap();
        // C(4,2)^5 = 7776
        assert_eq!(b.lower, frac(7776, 1024));
        assert_eq!(b.upper_squared, BigInt::from(7776));
        assert_eq!(b.strictly_brackets(&BigInt::from(24)), (true, true));
    }

    #[test]
    fn k5_second_cumulant_is_within_its_bound() {
        let g = Graph::complete(5);
        let s = covariance_sigma(&g, &default_w(&g), BITS).unwrap();
        let k2 = kappa2_f(&g, &s, 4).unwrap();
        assert!(k2.abs() <= kappa_bound(&g, &s.inf_norm(), 2));
    }

    #[test]
    fn k5_first_cumulant_is_near_the_degree_term() {
        let g = Graph::complete(5);
        let s = covariance_sigma(&g, &default_w(&g), BITS).unwrap();
        let k1 = kappa1_f(&g, &s, 4).unwrap();
        let main = Hp::from_rational(&degree_correction(&g), BITS);
        // O(1/δ) with δ = 4
        assert!((&k1 - &main).abs().to_f64() < 1.0 / 4.0);
    }

    #[test]
    fn report_fields_are_consistent() {
        let r = eo_estimate(&Graph::octahedron(), "octahedron", &EstimateOptions::default()).unwrap();
        assert_eq!(r.kappas.len(), 2);
        assert!(r.log_schrijver_lower <= r.log_schrijver_upper);
        assert_eq!(r.log_pauling, r.log_schrijver_lower);
        let v = r.to_json();
        assert_eq!(v["graph"], "octahedron");
        assert_eq!(v["M"], 2);
    }
}
