//! Graphic zonotopes Z(A), completion-time polytopes and permutahedra.

use std::fmt;

use itertools::Itertools;

use crate::error::{HsbError, Result};
use crate::labeled::{Label, LabelData, LabeledSlackMatrix};
use crate::matrix::{Matrix, Rectangle};
use crate::scalar::Scalar;
use crate::zoo::graph::WeightedGraph;

/// Largest n accepted by [`zonotope_slack`] (n! columns).
pub const ZONOTOPE_CAP: usize = 7;
/// Largest n for brute-force cuts.
pub const CUT_CAP: usize = 24;
/// Largest n for the exhaustive supermodularity check.
pub const SUPERMODULAR_CAP: usize = 10;

/// Bijection on `0..n` stored as its image array.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        crate::matrix::check_permutation(&image, image.len())?;
        Ok(Permutation(image))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// All n! permutations in lexicographic image order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (0..n).permutations(n).map(Permutation)
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}]",
            self.0.iter().map(|v| (v + 1).to_string()).join(",")
        )
    }
}

fn members(n: usize, mask: usize) -> Vec<usize> {
    (0..n).filter(|b| mask >> b & 1 == 1).collect()
}

/// g_A(S) = Σ_{i ≤ j, i,j ∈ S} a_ij.
pub fn g_a<T: Scalar>(a: &Matrix<T>, subset: &[usize]) -> T {
    let mut total = T::zero();
    for (x, &i) in subset.iter().enumerate() {
        for &j in &subset[x..] {
            total = total + a.get(i, j).clone();
        }
    }
    total
}

fn g_mask<T: Scalar>(a: &Matrix<T>, mask: usize) -> T {
    g_a(a, &members(a.rows(), mask))
}

fn check_square<T: Scalar>(a: &Matrix<T>, cap: usize) -> Result<usize> {
    if a.rows() != a.cols() {
        return Err(HsbError::dims((a.rows(), a.rows()), a.shape()));
    }
    if a.rows() > cap {
        return Err(HsbError::TooLarge(format!(
            "n = {} exceeds the cap {cap}",
            a.rows()
        )));
    }
    Ok(a.rows())
}

/// g(S∪T) + g(S∩T) ≥ g(S) + g(T) over all pairs of subsets.
pub fn check_supermodular<T: Scalar>(a: &Matrix<T>) -> Result<bool> {
    supermodularity(a, false)
}

/// Strict inequality for every pair of incomparable subsets.
pub fn check_strictly_supermodular<T: Scalar>(a: &Matrix<T>) -> Result<bool> {
    supermodularity(a, true)
}

fn supermodularity<T: Scalar>(a: &Matrix<T>, strict: bool) -> Result<bool> {
    let n = check_square(a, SUPERMODULAR_CAP)?;
    let g: Vec<T> = (0..1usize << n).map(|mask| g_mask(a, mask)).collect();
    for s in 0..1usize << n {
        for t in 0..1usize << n {
            let lhs = g[s | t].clone() + g[s & t].clone();
            let rhs = g[s].clone() + g[t].clone();
            let incomparable = s & t != s && s & t != t;
            if lhs < rhs || (strict && incomparable && lhs <= rhs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// x_j^π = Σ_{i : π(i) ≤ π(j)} a_ij.
pub fn vertex_of_permutation<T: Scalar>(a: &Matrix<T>, pi: &Permutation) -> Result<Vec<T>> {
    let n = check_square(a, usize::MAX)?;
    if pi.len() != n {
        return Err(HsbError::dims((n, n), (pi.len(), pi.len())));
    }
    Ok((0..n)
        .map(|j| {
            (0..n)
                .filter(|&i| pi.apply(i) <= pi.apply(j))
                .fold(T::zero(), |acc, i| acc + a.get(i, j).clone())
        })
        .collect())
}

/// Σ_{i∉S, j∈S, π(i) ≤ π(j)} a_ij.
fn slack_entry<T: Scalar>(a: &Matrix<T>, mask: usize, pi: &Permutation) -> T {
    let n = a.rows();
    let mut total = T::zero();
    for j in (0..n).filter(|j| mask >> j & 1 == 1) {
        for i in (0..n).filter(|i| mask >> i & 1 == 0) {
            if pi.apply(i) <= pi.apply(j) {
                total = total + a.get(i, j).clone();
            }
        }
    }
    total
}

/// M_A: one row x(S) ≥ g_A(S) per nonempty proper S (binary-counter order),
/// one column per permutation (lexicographic). Each entry is checked
/// against x^π(S) − g_A(S).
pub fn zonotope_slack<T: Scalar>(g: &WeightedGraph<T>) -> Result<LabeledSlackMatrix<T>> {
    let a = g.weights();
    let n = check_square(a, ZONOTOPE_CAP)?;
    if n < 2 {
        return Err(HsbError::InvalidArgument("zonotope needs n ≥ 2".into()));
    }
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    let vertices: Vec<Vec<T>> = perms
        .iter()
        .map(|p| vertex_of_permutation(a, p))
        .collect::<Result<_>>()?;
    let masks: Vec<usize> = (1..(1usize << n) - 1).collect();
    let scale = T::max_of(T::one(), a.sum());
    let mut data = Vec::with_capacity(masks.len() * perms.len());
    for &mask in &masks {
        let g_s = g_mask(a, mask);
        let subset = members(n, mask);
        for (p, x) in perms.iter().zip(&vertices) {
            let direct = slack_entry(a, mask, p);
            let via_vertex =
                subset.iter().fold(T::zero(), |acc, &j| acc + x[j].clone()) - g_s.clone();
            if (direct.clone() - via_vertex.clone()).abs() > T::tol(1e-9) * scale.clone() {
                return Err(HsbError::Internal(format!(
                    "zonotope slack {direct} differs from x(S) − g(S) = {via_vertex}"
                )));
            }
            data.push(direct);
        }
    }
    let matrix = Matrix::new(masks.len(), perms.len(), data)?;
    let row_labels = masks
        .iter()
        .map(|&mask| {
            let s: Vec<usize> = members(n, mask).into_iter().map(|v| v + 1).collect();
            Label::with(
                format!("S={{{}}}", s.iter().join(",")),
                LabelData::Subset(s),
            )
        })
        .collect();
    let col_labels = perms
        .iter()
        .map(|p| {
            let image = p.image().iter().map(|v| v + 1).collect();
            Label::with(format!("pi={p}"), LabelData::Permutation(image))
        })
        .collect();
    LabeledSlackMatrix::new(matrix, row_labels, col_labels)
}

/// Σ_{i≠j} a_ij R̂(i,j) = M_A with R̂(i,j) = {S : i∉S, j∈S} × {π : π(i) < π(j)}.
pub fn zonotope_decomposition<T: Scalar>(g: &WeightedGraph<T>) -> Result<Vec<(Rectangle, T)>> {
    let a = g.weights();
    let n = check_square(a, ZONOTOPE_CAP)?;
    if n < 2 {
        return Err(HsbError::InvalidArgument("zonotope needs n ≥ 2".into()));
    }
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    let rows = (1usize << n) - 2;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !a.get(i, j).is_pos() {
                continue;
            }
            let row_set: Vec<usize> = (1..=rows)
                .filter(|&mask| mask >> i & 1 == 0 && mask >> j & 1 == 1)
                .map(|mask| mask - 1)
                .collect();
            let col_set: Vec<usize> = perms
                .iter()
                .enumerate()
                .filter(|(_, p)| p.apply(i) < p.apply(j))
                .map(|(c, _)| c)
                .collect();
            out.push((
                Rectangle::new(row_set, col_set, rows, perms.len())?,
                a.get(i, j).clone(),
            ));
        }
    }
    Ok(out)
}

/// A cut: the weight Σ_{i∉S, j∈S} a_ij and the side S (0-based).
pub type Cut<T> = (T, Vec<usize>);

/// Maximum-weight cut over nonempty proper subsets by Gray-code
/// enumeration. Ties go to the smallest subset mask.
pub fn max_cut_weight<T: Scalar>(a: &Matrix<T>) -> Result<Cut<T>> {
    extreme_cut(a, true)
}

pub fn min_cut_weight<T: Scalar>(a: &Matrix<T>) -> Result<Cut<T>> {
    extreme_cut(a, false)
}

fn extreme_cut<T: Scalar>(a: &Matrix<T>, maximize: bool) -> Result<Cut<T>> {
    let n = check_square(a, CUT_CAP)?;
    if n < 2 {
        return Err(HsbError::InvalidArgument("a cut needs n ≥ 2".into()));
    }
    // S and its complement have equal weight for symmetric A, so vertex n
    // stays outside S; masks then run over 1..2^(n-1).
    let mut mask = 0usize;
    let mut weight = T::zero();
    let mut best: Option<(T, usize)> = None;
    for k in 1..1usize << (n - 1) {
        let v = k.trailing_zeros() as usize;
        let entering = mask >> v & 1 == 0;
        // moving v across changes the ordered-pair sum by its edges to
        // both sides
        let mut to_out = T::zero();
        let mut to_in = T::zero();
        for u in (0..n).filter(|&u| u != v) {
            if mask >> u & 1 == 1 {
                to_in = to_in + a.get(v, u).clone();
            } else {
                to_out = to_out + a.get(u, v).clone();
            }
        }
        weight = if entering {
            weight + to_out - to_in
        } else {
            weight - to_out + to_in
        };
        mask ^= 1 << v;
        let better = match &best {
            None => true,
            Some((w, m)) => {
                if maximize {
                    weight > *w || (weight == *w && mask < *m)
                } else {
                    weight < *w || (weight == *w && mask < *m)
                }
            }
        };
        if better {
            best = Some((weight.clone(), mask));
        }
    }
    let (w, m) = best.expect("n ≥ 2");
    Ok((w, members(n, m)))
}

/// pp^T for processing times p > 0.
pub fn completion_time_matrix<T: Scalar>(p: &[T]) -> Result<WeightedGraph<T>> {
    if p.is_empty() {
        return Err(HsbError::InvalidArgument("p is empty".into()));
    }
    if let Some(bad) = p.iter().find(|v| !v.is_pos()) {
        return Err(HsbError::NonPositiveScalar(bad.to_string()));
    }
    WeightedGraph::new(Matrix::from_fn(p.len(), p.len(), |i, j| {
        p[i].clone() * p[j].clone()
    })?)
}

/// The n×n all-ones matrix, whose zonotope is the permutahedron.
pub fn permutahedron_matrix<T: Scalar>(n: usize) -> Result<WeightedGraph<T>> {
    WeightedGraph::new(Matrix::ones(n, n)?)
}
