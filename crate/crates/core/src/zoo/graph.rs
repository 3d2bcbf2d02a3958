//! Weighted graphs, spanning trees and the spanning tree polytope.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use petgraph::unionfind::UnionFind;

use crate::error::{HsbError, Result};
use crate::labeled::{Label, LabelData, LabeledSlackMatrix};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Largest vertex count accepted by [`spanning_tree_slack`].
pub const SPANNING_TREE_CAP: usize = 8;

/// Symmetric nonnegative weight matrix; diagonal entries are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph<T> {
    a: Matrix<T>,
}

impl<T: Scalar> WeightedGraph<T> {
    pub fn new(a: Matrix<T>) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(HsbError::dims((a.rows(), a.rows()), a.shape()));
        }
        a.check_nonnegative()?;
        for i in 0..a.rows() {
            for j in i + 1..a.cols() {
                if a.get(i, j) != a.get(j, i) {
                    return Err(HsbError::Asymmetric(i + 1, j + 1));
                }
            }
        }
        Ok(WeightedGraph { a })
    }

    /// K_n with unit weights and zero diagonal.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(Matrix::from_fn(n, n, |i, j| {
            if i == j {
                T::zero()
            } else {
                T::one()
            }
        })?)
    }

    /// Unit-weight graph on `n` vertices from 0-based edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_weighted_edges(
            n,
            &edges
                .iter()
                .map(|&(u, v)| (u, v, T::one()))
                .collect::<Vec<_>>(),
        )
    }

    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, T)]) -> Result<Self> {
        let mut a = Matrix::zeros(n, n)?;
        for (u, v, w) in edges {
            if *u >= n || *v >= n {
                return Err(HsbError::InvalidArgument(format!(
                    "edge ({}, {}) outside {n} vertices",
                    u + 1,
                    v + 1
                )));
            }
            a.set(*u, *v, w.clone());
            a.set(*v, *u, w.clone());
        }
        Self::new(a)
    }

    /// Whitespace-separated `u v [weight]` lines with 1-based vertices;
    /// `#` starts a comment.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || HsbError::Parse(format!("line {}: expected 'u v [weight]'", lineno + 1));
            if !(2..=3).contains(&fields.len()) {
                return Err(bad());
            }
            let u: usize = fields[0].parse().map_err(|_| bad())?;
            let v: usize = fields[1].parse().map_err(|_| bad())?;
            if u == 0 || v == 0 {
                return Err(bad());
            }
            let w = match fields.get(2) {
                Some(t) => T::parse_text(t)?,
                None => T::one(),
            };
            n = n.max(u).max(v);
            edges.push((u - 1, v - 1, w));
        }
        if n == 0 {
            return Err(HsbError::Parse("edge list is empty".into()));
        }
        Self::from_weighted_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.a
    }

    /// Edges `(i, j)` with `i < j` and positive weight, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.a.get(i, j).is_pos())
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.n());
        let mut parts = self.n();
        for (u, v) in self.edges() {
            if uf.union(u, v) {
                parts -= 1;
            }
        }
        parts == 1
    }
}

/// Edge set of a spanning tree, 0-based, sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpanningTree {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl SpanningTree {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        edges.sort_unstable();
        if n == 0 || edges.len() != n - 1 || edges.iter().any(|&(_, v)| v >= n) {
            return Err(HsbError::InvalidArgument("not a spanning tree".into()));
        }
        let mut uf = UnionFind::new(n);
        if !edges.iter().all(|&(u, v)| uf.union(u, v)) {
            return Err(HsbError::InvalidArgument("edge set has a cycle".into()));
        }
        Ok(SpanningTree { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        let e = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&e).is_ok()
    }

    /// The two colour classes of the tree (vertex 0 is in the first).
    pub fn bipartition(&self) -> (Vec<usize>, Vec<usize>) {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut colour = vec![None; self.n];
        let mut stack = vec![0];
        colour[0] = Some(false);
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if colour[v].is_none() {
                    colour[v] = Some(!colour[u].unwrap_or(false));
                    stack.push(v);
                }
            }
        }
        let (a, b): (Vec<usize>, Vec<usize>) = (0..self.n).partition(|&v| colour[v] == Some(false));
        (a, b)
    }
}

impl fmt::Display for SpanningTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .edges
            .iter()
            .map(|(u, v)| format!("{}-{}", u + 1, v + 1))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Every spanning tree exactly once, in lexicographic edge-set order.
pub fn enumerate_spanning_trees<T: Scalar>(g: &WeightedGraph<T>) -> Result<Vec<SpanningTree>> {
    if !g.is_connected() {
        return Err(HsbError::Disconnected);
    }
    let n = g.n();
    let edges = g.edges();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    let mut excluded = vec![false; edges.len()];
    branch(n, &edges, 0, &mut chosen, &mut excluded, &mut out);
    let expected = matrix_tree_count(g);
    if BigInt::from(out.len()) != expected {
        return Err(HsbError::Internal(format!(
            "enumerated {} spanning trees, matrix-tree theorem gives {expected}",
            out.len()
        )));
    }
    Ok(out)
}

fn branch(
    n: usize,
    edges: &[(usize, usize)],
    k: usize,
    chosen: &mut Vec<(usize, usize)>,
    excluded: &mut [bool],
    out: &mut Vec<SpanningTree>,
) {
    if chosen.len() + 1 == n {
        out.push(SpanningTree {
            n,
            edges: chosen.clone(),
        });
        return;
    }
    if k == edges.len() || chosen.len() + (edges.len() - k) + 1 < n {
        return;
    }
    let (u, v) = edges[k];
    let mut uf = UnionFind::new(n);
    for &(a, b) in chosen.iter() {
        uf.union(a, b);
    }
    if !uf.equiv(u, v) {
        chosen.push((u, v));
        branch(n, edges, k + 1, chosen, excluded, out);
        chosen.pop();
    }
    // dropping edge k must leave the remaining graph connected
    excluded[k] = true;
    let mut uf = UnionFind::new(n);
    let mut parts = n;
    for (i, &(a, b)) in edges.iter().enumerate() {
        if !excluded[i] && uf.union(a, b) {
            parts -= 1;
        }
    }
    if parts == 1 {
        branch(n, edges, k + 1, chosen, excluded, out);
    }
    excluded[k] = false;
}

/// Number of spanning trees of the underlying simple graph, by a Bareiss
/// determinant of the reduced Laplacian.
pub fn matrix_tree_count<T: Scalar>(g: &WeightedGraph<T>) -> BigInt {
    let n = g.n();
    if n <= 1 {
        return BigInt::one();
    }
    let mut lap = vec![vec![BigInt::zero(); n - 1]; n - 1];
    for (u, v) in g.edges() {
        for (a, b) in [(u, v), (v, u)] {
            if a < n - 1 {
                lap[a][a] += 1;
                if b < n - 1 {
                    lap[a][b] -= 1;
                }
            }
        }
    }
    bareiss_determinant(lap)
}

/// Fraction-free Gaussian elimination; exact integer determinant.
pub fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let k = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for c in 0..k {
        if m[c][c].is_zero() {
            match (c + 1..k).find(|&r| !m[r][c].is_zero()) {
                Some(r) => {
                    m.swap(c, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for r in c + 1..k {
            for j in c + 1..k {
                let v = (&m[r][j] * &m[c][c] - &m[r][c] * &m[c][j]) / &prev;
                m[r][j] = v;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[c][c].clone();
    }
    if k == 0 {
        return BigInt::one();
    }
    sign * &m[k - 1][k - 1]
}

/// c(U, T): components of (U, T ∩ E(U)).
pub fn component_count(u: &[usize], tree: &SpanningTree) -> Result<usize> {
    let set: BTreeSet<usize> = u.iter().copied().collect();
    if set.is_empty() {
        return Err(HsbError::InvalidArgument("vertex set U is empty".into()));
    }
    if set.iter().any(|&v| v >= tree.n()) {
        return Err(HsbError::InvalidArgument("vertex outside the tree".into()));
    }
    let mut uf = UnionFind::new(tree.n());
    let mut parts = set.len();
    for &(a, b) in tree.edges() {
        if set.contains(&a) && set.contains(&b) && uf.union(a, b) {
            parts -= 1;
        }
    }
    Ok(parts)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpanningTreeRows {
    /// Keep the equality row U = V (identically zero).
    pub include_full_set: bool,
    pub drop_zero_rows: bool,
}

/// Slack matrix of the spanning tree polytope: rows x(E(U)) ≤ |U| − 1 for
/// nonempty proper U in binary-counter order (slack c(U,T) − 1), then one
/// x_e ≥ 0 row per edge; columns are the spanning trees.
pub fn spanning_tree_slack<T: Scalar>(
    g: &WeightedGraph<T>,
    rows: SpanningTreeRows,
) -> Result<LabeledSlackMatrix<T>> {
    let n = g.n();
    if n > SPANNING_TREE_CAP {
        return Err(HsbError::TooLarge(format!(
            "{n} vertices exceed the spanning tree cap {SPANNING_TREE_CAP}"
        )));
    }
    let trees = enumerate_spanning_trees(g)?;
    let edges = g.edges();
    let last_mask = if rows.include_full_set {
        (1usize << n) - 1
    } else {
        (1usize << n) - 2
    };
    let subsets: Vec<Vec<usize>> = (1..=last_mask)
        .map(|mask| (0..n).filter(|b| mask >> b & 1 == 1).collect())
        .collect();
    let m = subsets.len() + edges.len();
    let mut data = Vec::with_capacity(m * trees.len());
    for u in &subsets {
        for t in &trees {
            data.push(T::from_usize(component_count(u, t)? - 1));
        }
    }
    for &(a, b) in &edges {
        for t in &trees {
            data.push(if t.contains(a, b) {
                T::one()
            } else {
                T::zero()
            });
        }
    }
    let matrix = Matrix::new(m, trees.len(), data)?;
    let one_based = |v: &[usize]| v.iter().map(|x| x + 1).collect::<Vec<_>>();
    let row_labels = subsets
        .iter()
        .map(|u| {
            let ub = one_based(u);
            let text = format!(
                "U={{{}}}",
                ub.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            Label::with(text, LabelData::Subset(ub))
        })
        .chain(edges.iter().map(|&(a, b)| {
            Label::with(
                format!("x{}-{}>=0", a + 1, b + 1),
                LabelData::Edge(a + 1, b + 1),
            )
        }))
        .collect();
    let col_labels = trees
        .iter()
        .map(|t| {
            let e = t.edges().iter().map(|&(a, b)| (a + 1, b + 1)).collect();
            Label::with(t.to_string(), LabelData::SpanningTree(e))
        })
        .collect();
    let s = LabeledSlackMatrix::new(matrix, row_labels, col_labels)?;
    if rows.drop_zero_rows {
        s.drop_zero_rows()
    } else {
        Ok(s)
    }
}

/// Named graphs `K<n>` (complete), `P<n>` (path) and `C<n>` (cycle).
pub fn named_graph<T: Scalar>(name: &str) -> Option<Result<WeightedGraph<T>>> {
    let (kind, rest) = name.split_at(1.min(name.len()));
    let n: usize = rest.parse().ok()?;
    let graph = match kind {
        "K" => WeightedGraph::complete(n),
        "P" => WeightedGraph::from_edges(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>()),
        "C" if n >= 3 => {
            WeightedGraph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
        }
        _ => return None,
    };
    Some(graph)
}
