//! Maximum rectangle weight ρ(X) = max ⟨X, R⟩ over nonempty 0/1 rank-one R.
//!
//! For a fixed row set I the best column set is the set of columns with a
//! positive sum over I, so every search below ranges over subsets of one
//! dimension only.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{Matrix, Rectangle};
use crate::scalar::Scalar;

/// Absolute pruning slack of the float branch-and-bound, scaled by
/// `max(1, |incumbent|)`.
pub const FLOAT_PRUNE_TOL: f64 = 1e-12;

/// Largest smaller dimension accepted by [`rho_enumerate`].
pub const ENUMERATION_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct RhoResult<T> {
    pub value: T,
    pub witness: Rectangle,
    pub nodes_explored: u64,
    /// Certified optimal (false for heuristics and timed-out searches).
    pub exact: bool,
}

/// `candidate` beats `incumbent` if strictly larger, or equal and
/// lexicographically smaller.
fn better<T: Scalar>(value: &T, rect: &Rectangle, best: &Option<(T, Rectangle)>) -> bool {
    match best {
        None => true,
        Some((bv, br)) => value > bv || (value == bv && rect < br),
    }
}

/// Column set maximizing ⟨X, I × J⟩ for a fixed row set, and its value.
fn best_cols<T: Scalar>(x: &Matrix<T>, rows: &[usize]) -> Vec<usize> {
    let mut sums = vec![T::zero(); x.cols()];
    for &i in rows {
        for (s, v) in sums.iter_mut().zip(x.row(i)) {
            *s = s.clone() + v.clone();
        }
    }
    positive_support_or_argmax(&sums)
}

fn best_rows<T: Scalar>(x: &Matrix<T>, cols: &[usize]) -> Vec<usize> {
    let sums: Vec<T> = (0..x.rows())
        .map(|i| {
            let row = x.row(i);
            cols.iter().fold(T::zero(), |acc, &j| acc + row[j].clone())
        })
        .collect();
    positive_support_or_argmax(&sums)
}

/// Lexicographically smallest maximizer of Σ_{j∈J} sums[j] over nonempty J:
/// the positive support plus the zero entries preceding its last index, or
/// the first argmax when nothing is positive.
fn positive_support_or_argmax<T: Scalar>(sums: &[T]) -> Vec<usize> {
    match (0..sums.len()).rev().find(|&j| sums[j].is_pos()) {
        Some(last) => (0..=last)
            .filter(|&j| sums[j].is_pos() || sums[j].is_zero())
            .collect(),
        None => {
            let mut arg = 0;
            for j in 1..sums.len() {
                if sums[j] > sums[arg] {
                    arg = j;
                }
            }
            vec![arg]
        }
    }
}

/// Largest entry, first in row-major order (the lexicographically smallest
/// singleton among the maximizers).
fn max_entry<T: Scalar>(x: &Matrix<T>) -> (T, Rectangle) {
    let mut best = 0;
    for k in 1..x.data().len() {
        if x.data()[k] > x.data()[best] {
            best = k;
        }
    }
    let (i, j) = (best / x.cols(), best % x.cols());
    let rect = Rectangle::singleton(i, j, x.rows(), x.cols()).expect("in range");
    (x.data()[best].clone(), rect)
}

fn rect_of<T: Scalar>(x: &Matrix<T>, rows: Vec<usize>, cols: Vec<usize>) -> (T, Rectangle) {
    let rect = Rectangle::new(rows, cols, x.rows(), x.cols()).expect("nonempty in-range sets");
    let value = x.rectangle_inner(&rect).expect("same ambient shape");
    (value, rect)
}

/// Runs alternating maximization from `start` to a fixed point.
fn climb<T: Scalar>(x: &Matrix<T>, start: Vec<usize>) -> (T, Rectangle) {
    let mut cols = best_cols(x, &start);
    let (mut value, mut rect) = rect_of(x, start, cols.clone());
    // each accepted step strictly improves, so this terminates
    loop {
        let next_rows = best_rows(x, &cols);
        let next_cols = best_cols(x, &next_rows);
        let (v, r) = rect_of(x, next_rows.clone(), next_cols.clone());
        if v > value {
            value = v;
            rect = r;
            cols = next_cols;
        } else {
            if v == value && r < rect {
                rect = r;
            }
            return (value, rect);
        }
    }
}

/// All distinct local optima found by alternating maximization, best first.
pub fn heuristic_candidates<T: Scalar>(
    x: &Matrix<T>,
    restarts: usize,
    seed: u64,
) -> Vec<(T, Rectangle)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = x.rows();
    let pos_sum = |i: usize| {
        x.row(i)
            .iter()
            .filter(|v| v.is_pos())
            .fold(T::zero(), |acc, v| acc + v.clone())
    };
    let mut argmax = 0;
    let mut best_sum = pos_sum(0);
    for i in 1..m {
        let s = pos_sum(i);
        if s > best_sum {
            best_sum = s;
            argmax = i;
        }
    }
    let massive: Vec<usize> = (0..m).filter(|&i| pos_sum(i).is_pos()).collect();
    let mut starts = vec![vec![argmax]];
    if massive.len() > 1 {
        starts.extend(massive.iter().filter(|&&i| i != argmax).map(|&i| vec![i]));
        starts.push(massive);
    }
    for _ in 0..restarts {
        let mut rows: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
        if rows.is_empty() {
            rows.push(rng.gen_range(0..m));
        }
        starts.push(rows);
    }
    let mut seen = BTreeSet::new();
    let mut found = Vec::new();
    for start in starts {
        let (value, rect) = climb(x, start);
        if seen.insert(rect.clone()) {
            found.push((value, rect));
        }
    }
    found.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.1.cmp(&b.1))
    });
    found
}

/// Lower bound on ρ(X) by alternating maximization from the best
/// positive-mass row, from all rows with positive mass, and from `restarts`
/// random row sets.
pub fn rho_heuristic<T: Scalar>(x: &Matrix<T>, restarts: usize, seed: u64) -> RhoResult<T> {
    let candidates = heuristic_candidates(x, restarts.max(1), seed);
    let (value, witness) = candidates
        .into_iter()
        .next()
        .expect("at least the deterministic start");
    RhoResult {
        value,
        witness,
        nodes_explored: 0,
        exact: false,
    }
}

/// Exact ρ(X) by enumerating every subset of the smaller dimension.
pub fn rho_enumerate<T: Scalar>(x: &Matrix<T>) -> RhoResult<T> {
    let transposed = x.cols() < x.rows();
    let work = if transposed { x.transpose() } else { x.clone() };
    let k = work.rows();
    assert!(
        k <= ENUMERATION_LIMIT,
        "enumeration over 2^{k} subsets refused"
    );
    let mut best: Option<(T, Rectangle)> = None;
    for mask in 1u64..(1u64 << k) {
        let rows: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).collect();
        let cols = best_cols(&work, &rows);
        let (value, rect) = rect_of(&work, rows, cols);
        let rect = if transposed { rect.transpose() } else { rect };
        if better(&value, &rect, &best) {
            best = Some((value, rect));
        }
    }
    let (value, witness) = best.expect("at least one subset");
    RhoResult {
        value,
        witness,
        nodes_explored: (1u64 << k) - 1,
        exact: true,
    }
}

struct Search<'a, T> {
    x: &'a Matrix<T>,
    order: Vec<usize>,
    active_cols: Vec<usize>,
    /// suffix[d][c] = Σ_{k ≥ d} max(0, X[order[k]][active_cols[c]])
    suffix: Vec<Vec<T>>,
    transposed: bool,
    best: Option<(T, Rectangle)>,
    chosen: Vec<usize>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
    eps: T,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn incumbent(&self) -> T {
        self.best.as_ref().map(|b| b.0.clone()).expect("seeded")
    }

    fn prune_margin(&self) -> T {
        let inc = self.incumbent();
        let scale = T::max_of(T::one(), inc.abs());
        self.eps.clone() * scale
    }

    fn offer(&mut self, sums: &[T]) {
        let approx = sums
            .iter()
            .filter(|s| s.is_pos())
            .fold(T::zero(), |acc, s| acc + s.clone());
        let inc = self.incumbent();
        if approx + self.prune_margin() < inc {
            return;
        }
        let mut rows = self.chosen.clone();
        rows.sort_unstable();
        let cols = best_cols(self.x, &rows);
        let (value, rect) = rect_of(self.x, rows, cols);
        let rect = if self.transposed {
            rect.transpose()
        } else {
            rect
        };
        if better(&value, &rect, &self.best) {
            self.best = Some((value, rect));
        }
    }

    fn dfs(&mut self, depth: usize, sums: &[T]) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.timed_out = true;
                    return;
                }
            }
        }
        if depth == self.order.len() {
            return;
        }
        let bound = sums
            .iter()
            .zip(&self.suffix[depth])
            .map(|(s, u)| s.clone() + u.clone())
            .filter(|v| v.is_pos())
            .fold(T::zero(), |acc, v| acc + v);
        if bound <= self.incumbent() + self.prune_margin() {
            return;
        }
        let row = self.x.row(self.order[depth]);
        let with: Vec<T> = sums
            .iter()
            .zip(&self.active_cols)
            .map(|(s, &j)| s.clone() + row[j].clone())
            .collect();
        self.chosen.push(self.order[depth]);
        self.offer(&with);
        self.dfs(depth + 1, &with);
        self.chosen.pop();
        self.dfs(depth + 1, sums);
    }
}

/// Exact ρ(X) by branch-and-bound over row subsets of the smaller
/// dimension, warm-started by [`rho_heuristic`].
///
/// With a time limit the best incumbent is returned with `exact = false`.
pub fn rho_exact<T: Scalar>(x: &Matrix<T>, time_limit: Option<Duration>) -> RhoResult<T> {
    let start = Instant::now();
    if !x.data().iter().any(|v| v.is_pos()) {
        let (value, witness) = max_entry(x);
        return RhoResult {
            value,
            witness,
            nodes_explored: 1,
            exact: true,
        };
    }
    let transposed = x.cols() < x.rows();
    let work = if transposed { x.transpose() } else { x.clone() };
    let heuristic = rho_heuristic(x, 8, 0);

    let pos = |v: &T| if v.is_pos() { v.clone() } else { T::zero() };
    let pos_sum = |i: usize| work.row(i).iter().fold(T::zero(), |a, v| a + pos(v));
    // rows without positive entries never increase a column sum
    let mut order: Vec<(usize, T)> = (0..work.rows())
        .map(|i| (i, pos_sum(i)))
        .filter(|(_, s)| s.is_pos())
        .collect();
    order.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    let order: Vec<usize> = order.into_iter().map(|(i, _)| i).collect();
    let active_cols: Vec<usize> = (0..work.cols())
        .filter(|&j| (0..work.rows()).any(|i| work.get(i, j).is_pos()))
        .collect();
    let mut suffix = vec![vec![T::zero(); active_cols.len()]; order.len() + 1];
    for d in (0..order.len()).rev() {
        let row = work.row(order[d]);
        suffix[d] = suffix[d + 1]
            .iter()
            .zip(&active_cols)
            .map(|(s, &j)| s.clone() + pos(&row[j]))
            .collect();
    }

    let mut search = Search {
        x: &work,
        order,
        active_cols,
        suffix,
        transposed,
        best: Some((heuristic.value, heuristic.witness)),
        chosen: Vec::new(),
        nodes: 0,
        deadline: time_limit.map(|t| start + t),
        timed_out: false,
        eps: T::tol(FLOAT_PRUNE_TOL),
    };
    let zeros = vec![T::zero(); search.active_cols.len()];
    search.dfs(0, &zeros);
    let (value, witness) = search.best.take().expect("seeded");
    RhoResult {
        value,
        witness,
        nodes_explored: search.nodes,
        exact: !search.timed_out,
    }
}
