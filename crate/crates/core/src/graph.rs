//! Simple undirected graphs and the combinatorial quantities the estimators need.
//!
//! Vertices are `0..n` internally. The text and JSON formats are 1-based.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest vertex count accepted by [`Graph::cheeger_constant`].
pub const CHEEGER_MAX_VERTICES: usize = 28;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
    adj: Vec<Vec<bool>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Builds a graph from 0-based edges. Rejects loops, parallel edges and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![vec![false; n]; n];
        let mut degrees = vec![0; n];
        let mut out = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            if adj[a][b] {
                return Err(Error::invalid(format!("parallel edge ({a}, {b})")));
            }
            adj[a][b] = true;
            adj[b][a] = true;
            degrees[a] += 1;
            degrees[b] += 1;
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        Ok(Graph { n, edges: out, degrees, adj })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k)));
        Self::new(n, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|j| (j, (j + 1) % n))).expect("cycle is simple")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|j| (j - 1, j))).expect("path is simple")
    }

    /// Circulant graph `C_n(s_1, s_2, ...)`: `j ~ j ± s_i (mod n)`.
    pub fn circulant(n: usize, steps: &[usize]) -> Result<Self> {
        let mut edges = Vec::new();
        for j in 0..n {
            for &s in steps {
                let k = (j + s) % n;
                let e = (j.min(k), j.max(k));
                if j != k && !edges.contains(&e) {
                    edges.push(e);
                }
            }
        }
        Self::new(n, edges)
    }

    /// The octahedron `K_{2,2,2}`: complete graph on six vertices minus a perfect matching.
    pub fn octahedron() -> Self {
        let edges = (0..6).flat_map(|j| (j + 1..6).map(move |k| (j, k))).filter(|&(j, k)| !(j % 2 == 0 && k == j + 1));
        Self::new(6, edges).expect("octahedron is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as sorted 0-based pairs `(j, k)` with `j < k`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.degrees.iter().copied().min().unwrap_or(0)
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.adj[j][k]
    }

    pub fn all_degrees_even(&self) -> bool {
        self.degrees.iter().all(|d| d % 2 == 0)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in 0..self.n {
                if self.adj[v][w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn laplacian(&self) -> IntegerMatrix {
        let mut m = IntegerMatrix::zeros(self.n);
        for j in 0..self.n {
            m.set(j, j, BigInt::from(self.degrees[j]));
        }
        for &(j, k) in &self.edges {
            m.set(j, k, BigInt::from(-1));
            m.set(k, j, BigInt::from(-1));
        }
        m
    }

    /// Number of spanning trees by the matrix-tree theorem. Zero for a
    /// disconnected graph.
    pub fn spanning_tree_count(&self) -> BigInt {
        self.spanning_tree_count_deleting(self.n.saturating_sub(1))
    }

    /// Same as [`Graph::spanning_tree_count`] but deleting row/column `skip`.
    pub fn spanning_tree_count_deleting(&self, skip: usize) -> BigInt {
        if self.n <= 1 {
            return BigInt::one();
        }
        self.laplacian().minor(skip).determinant()
    }

    /// Exact Cheeger constant `min |∂U|/|U|` over `1 <= |U| <= n/2`.
    ///
    /// Scans the `2^(n-1)` subsets avoiding the last vertex in Gray-code order,
    /// updating the cut size incrementally; each subset also stands for its complement.
    pub fn cheeger_constant(&self) -> Result<BigRational> {
        let n = self.n;
        if n < 2 {
            return Err(Error::domain("Cheeger constant needs at least two vertices"));
        }
        if n > CHEEGER_MAX_VERTICES {
            return Err(Error::size(format!("Cheeger scan limited to {CHEEGER_MAX_VERTICES} vertices, got {n}")));
        }
        let nbr: Vec<u32> =
            (0..n).map(|v| (0..n).filter(|&w| self.adj[v][w]).fold(0u32, |m, w| m | (1 << w))).collect();
        let half = n / 2;
        let mut set = 0u32;
        let mut size = 0usize;
        let mut cut: i64 = 0;
        // best = cut / size, kept as a pair to compare exactly
        let mut best: Option<(i64, i64)> = None;
        let total = 1u64 << (n - 1);
        for i in 1..total {
            let v = i.trailing_zeros() as usize;
            let inside = (nbr[v] & set).count_ones() as i64;
            let deg = self.degrees[v] as i64;
            if set & (1 << v) == 0 {
                cut += deg - 2 * inside;
                set |= 1 << v;
                size += 1;
            } else {
                set &= !(1 << v);
                cut -= deg - 2 * inside;
                size -= 1;
            }
            for s in [size, n - size] {
                if s >= 1 && s <= half {
                    let cand = (cut, s as i64);
                    best = match best {
                        Some((bc, bs)) if bc * cand.1 <= cand.0 * bs => Some((bc, bs)),
                        _ => Some(cand),
                    };
                }
            }
        }
        let (c, s) = best.expect("n >= 2 admits |U| = 1");
        Ok(BigRational::new(BigInt::from(c), BigInt::from(s)))
    }

    /// Parses the 1-based edge list (`n` on the first line, then `j k` pairs) or
    /// the JSON form `{"n": N, "edges": [[j, k], ...]}`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let g: GraphJson = serde_json::from_str(text).map_err(|e| Error::invalid(format!("graph JSON: {e}")))?;
            return Self::from_one_based(g.n, g.edges.iter().map(|e| (e[0], e[1])));
        }
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split_whitespace())
            .map(|t| t.parse::<usize>().map_err(|_| Error::invalid(format!("bad token {t:?} in edge list"))));
        let n = tokens.next().ok_or_else(|| Error::invalid("empty edge list"))??;
        let rest: Vec<usize> = tokens.collect::<Result<_>>()?;
        if !rest.len().is_multiple_of(2) {
            return Err(Error::invalid("edge list has an odd number of endpoints"));
        }
        Self::from_one_based(n, rest.chunks(2).map(|c| (c[0], c[1])))
    }

    fn from_one_based(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut zero_based = Vec::new();
        for (a, b) in edges {
            if a == 0 || b == 0 {
                return Err(Error::invalid("vertices are numbered from 1"));
            }
            zero_based.push((a - 1, b - 1));
        }
        Self::new(n, zero_based)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for &(j, k) in &self.edges {
            let _ = writeln!(s, "{} {}", j + 1, k + 1);
        }
        s
    }

    pub fn to_json(&self) -> String {
        let g = GraphJson { n: self.n, edges: self.edges.iter().map(|&(j, k)| [j + 1, k + 1]).collect() };
        serde_json::to_string(&g).expect("graph serializes")
    }
}

/// Dense square matrix of exact integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    n: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(n: usize) -> Self {
        IntegerMatrix { n, data: vec![BigInt::zero(); n * n] }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (j, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (k, &v) in row.iter().enumerate() {
                m.set(j, k, BigInt::from(v));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> &BigInt {
        &self.data[j * self.n + k]
    }

    pub fn set(&mut self, j: usize, k: usize, v: BigInt) {
        self.data[j * self.n + k] = v;
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|j| (0..j).all(|k| self.get(j, k) == self.get(k, j)))
    }

    /// `x^T M x`.
    pub fn quadratic_form(&self, x: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for j in 0..self.n {
            for k in 0..self.n {
                acc += self.get(j, k) * &x[j] * &x[k];
            }
        }
        acc
    }

    /// Matrix with row and column `skip` removed.
    pub fn minor(&self, skip: usize) -> Self {
        let idx: Vec<usize> = (0..self.n).filter(|&i| i != skip).collect();
        let mut m = Self::zeros(idx.len());
        for (a, &j) in idx.iter().enumerate() {
            for (b, &k) in idx.iter().enumerate() {
                m.set(a, b, self.get(j, k).clone());
            }
        }
        m
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn determinant(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|j| (0..n).map(|k| self.get(j, k).clone()).collect()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }
}

impl std::fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for j in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|k| self.get(j, k).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Brute-force spanning-tree count: every `(n-1)`-edge subset that is acyclic.
/// Exponential; test oracle only.
pub fn spanning_tree_count_bruteforce(g: &Graph) -> BigInt {
    let m = g.num_edges();
    let need = g.n().saturating_sub(1);
    let mut count = BigInt::zero();
    let mut chosen = Vec::with_capacity(need);
    fn rec(g: &Graph, start: usize, need: usize, chosen: &mut Vec<usize>, count: &mut BigInt, m: usize) {
        if chosen.len() == need {
            let mut parent: Vec<usize> = (0..g.n()).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                p[x] = r;
                r
            }
            for &e in chosen.iter() {
                let (a, b) = g.edges()[e];
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    return;
                }
                parent[ra] = rb;
            }
            *count += 1;
            return;
        }
        for e in start..m {
            chosen.push(e);
            rec(g, e + 1, need, chosen, count, m);
            chosen.pop();
        }
    }
    rec(g, 0, need, &mut chosen, &mut count, m);
    count
}

impl Graph {
    /// `true` if the degree sequence is regular.
    pub fn is_regular(&self) -> bool {
        self.degrees.windows(2).all(|w| w[0] == w[1])
    }

    /// Cheeger ratio `h(G)/d` with `d` the maximum degree.
    pub fn cheeger_ratio(&self) -> Result<BigRational> {
        let h = self.cheeger_constant()?;
        let d = self.max_degree();
        if d == 0 {
            return Err(Error::domain("graph has no edges"));
        }
        Ok(h / BigRational::from_integer(BigInt::from(d)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(Graph::complete(2).laplacian(), IntegerMatrix::from_rows(&[vec![1, -1], vec![-1, 1]]));
        assert_eq!(
            Graph::complete(3).laplacian(),
            IntegerMatrix::from_rows(&[vec![2, -1, -1], vec![-1, 2, -1], vec![-1, -1, 2]])
        );
        let p = Graph::path(3).laplacian();
        assert_eq!(p, IntegerMatrix::from_rows(&[vec![1, -1, 0], vec![-1, 2, -1], vec![0, -1, 1]]));
        assert!(p.is_symmetric());
    }

    #[test]
    fn spanning_trees() {
        assert_eq!(Graph::path(6).spanning_tree_count(), BigInt::from(1));
        let k4 = Graph::complete(4);
        assert_eq!(spanning_tree_count_bruteforce(&k4), BigInt::from(16));
        assert_eq!(k4.spanning_tree_count(), BigInt::from(16));
        let c5 = Graph::cycle(5);
        assert_eq!(spanning_tree_count_bruteforce(&c5), BigInt::from(5));
        assert_eq!(c5.spanning_tree_count(), BigInt::from(5));
        // Cayley: n^(n-2)
        assert_eq!(Graph::complete(9).spanning_tree_count(), BigInt::from(9).pow(7));
        let disconnected = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(disconnected.spanning_tree_count().is_zero());
        assert!(!disconnected.is_connected());
    }

    #[test]
    fn spanning_trees_match_bruteforce_on_small_graphs() {
        for g in [Graph::octahedron(), Graph::circulant(7, &[1, 2]).unwrap(), Graph::cycle(6)] {
            assert_eq!(g.spanning_tree_count(), spanning_tree_count_bruteforce(&g));
        }
    }

    #[test]
    fn cheeger_examples() {
        assert_eq!(Graph::complete(2).cheeger_constant().unwrap(), r(1, 1));
        assert_eq!(Graph::cycle(4).cheeger_constant().unwrap(), r(1, 1));
        assert_eq!(Graph::complete(4).cheeger_constant().unwrap(), r(2, 1));
        assert!(matches!(Graph::complete(1).cheeger_constant(), Err(Error::Domain(_))));
        assert!(matches!(Graph::cycle(40).cheeger_constant(), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn cheeger_complete_graphs() {
        for n in 2..=10usize {
            let g = Graph::complete(n);
            // direct cut counting for the best U of size floor(n/2)
            let u = n / 2;
            let direct = r((u * (n - u)) as i64, u as i64);
            assert_eq!(g.cheeger_constant().unwrap(), direct);
            assert_eq!(direct, r(n.div_ceil(2) as i64, 1));
        }
    }

    #[test]
    fn degree_parity() {
        assert!(Graph::cycle(4).all_degrees_even());
        assert!(!Graph::complete(4).all_degrees_even());
        assert!(Graph::complete(5).all_degrees_even());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn parse_formats() {
        let g = Graph::parse("# cycle\n4\n1 2\n2 3\n3 4\n4 1\n").unwrap();
        assert_eq!(g, Graph::cycle(4));
        let h = Graph::parse(r#"{"n":4,"edges":[[1,2],[2,3],[3,4],[4,1]]}"#).unwrap();
        assert_eq!(g, h);
        assert_eq!(Graph::parse(&g.to_json()).unwrap(), g);
        assert_eq!(Graph::parse(&g.to_edge_list()).unwrap(), g);
        assert!(Graph::parse("3\n1 2 3").is_err());
        assert!(Graph::parse("3\n0 1").is_err());
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..9).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect();
            let m = pairs.len();
            proptest::collection::vec(any::<bool>(), m).prop_map(move |mask| {
                Graph::new(n, pairs.iter().zip(&mask).filter(|(_, &b)| b).map(|(&e, _)| e)).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn laplacian_quadratic_form(g in arb_graph(), xs in proptest::collection::vec(-20i64..20, 9)) {
            let x: Vec<BigInt> = xs[..g.n()].iter().map(|&v| BigInt::from(v)).collect();
            let l = g.laplacian();
            let direct: BigInt = g.edges().iter().map(|&(j, k)| { let d = &x[j] - &x[k]; &d * &d }).sum();
            prop_assert_eq!(l.quadratic_form(&x), direct);
            for j in 0..g.n() {
                let row: BigInt = (0..g.n()).map(|k| l.get(j, k).clone()).sum();
                prop_assert!(row.is_zero());
                prop_assert_eq!(l.get(j, j), &BigInt::from(g.degrees()[j]));
            }
        }

        #[test]
        fn tree_count_independent_of_deleted_index(g in arb_graph()) {
            let t0 = g.spanning_tree_count_deleting(0);
            for skip in 1..g.n() {
                prop_assert_eq!(&g.spanning_tree_count_deleting(skip), &t0);
            }
            prop_assert!(!t0.is_negative());
            prop_assert_eq!(t0.is_zero(), !g.is_connected());
        }
    }
}
