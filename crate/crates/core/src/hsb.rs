//! hsb(S) by cutting planes on the primal LP, which is column generation
//! on the rectangle-decomposition dual.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HsbError, Result};
use crate::labeled::{matrix_rows_to_json, scalar_from_json, scalar_to_json};
use crate::master::{Master, MasterStatus};
use crate::matrix::{Matrix, Rectangle};
use crate::oracle::{heuristic_candidates, rho_enumerate, rho_exact, ENUMERATION_LIMIT};
use crate::scalar::{Scalar, ScalarMode};
use crate::symmetry::SymmetryGroup;

/// Rational runs are limited to this many cells.
pub const RATIONAL_CELL_LIMIT: usize = 64;

/// Float residual tolerance of dual certificates, relative to ‖S‖.
pub const DUAL_CHECK_TOL: f64 = 1e-8;

/// A cut must exceed 1 by this much (float mode) to enter the pool.
const CUT_TOL: f64 = 1e-9;
/// Smoothing is dropped after an exact separation explores more nodes.
const SMOOTHING_NODE_LIMIT: u64 = 100_000;

#[derive(Clone, Debug)]
pub struct HsbOptions {
    /// Absolute gap at which the loop stops. Ignored in rational mode,
    /// which always runs to a zero gap.
    pub tol: f64,
    pub time_limit: Option<Duration>,
    /// Most rectangles added to the pool per round.
    pub cuts_per_round: usize,
    pub heuristic_restarts: usize,
    pub seed: u64,
    /// Weight of the best certified X in the separation point (float mode
    /// only; 0 separates at the master duals alone).
    pub smoothing: f64,
    /// Automorphisms of S; the master then works on cell orbits.
    pub symmetry: Option<SymmetryGroup>,
}

impl Default for HsbOptions {
    fn default() -> Self {
        HsbOptions {
            tol: 1e-6,
            time_limit: None,
            cuts_per_round: 12,
            heuristic_restarts: 12,
            seed: 0,
            smoothing: 0.8,
            symmetry: None,
        }
    }
}

impl HsbOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_symmetry(mut self, group: SymmetryGroup) -> Self {
        self.symmetry = Some(group);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HsbStatus {
    Optimal,
    /// Stopped early; `[value, value + gap]` still brackets hsb(S).
    TimeLimit,
}

#[derive(Clone, Debug)]
pub struct HsbResult<T> {
    /// Certified lower bound ⟨S,X⟩ / (‖S‖ ρ(X)) of `primal_x`.
    pub value: T,
    pub primal_x: Matrix<T>,
    /// Decomposition Σ w_R R = S with every w_R > 0.
    pub dual_weights: Vec<(Rectangle, T)>,
    /// Σ w_R / ‖S‖ − value, clamped at zero.
    pub gap: T,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub lp_iterations: u64,
    pub mode: ScalarMode,
    pub status: HsbStatus,
}

impl<T: Scalar> HsbResult<T> {
    pub fn upper(&self) -> T {
        self.value.clone() + self.gap.clone()
    }

    pub fn certificate(&self) -> Certificate<T> {
        Certificate {
            value: self.value.clone(),
            gap: self.gap.clone(),
            primal_x: self.primal_x.clone(),
            dual: self.dual_weights.clone(),
        }
    }
}

struct Bracket<T> {
    value: T,
    x: Matrix<T>,
}

/// Computes hsb(S) together with a primal matrix and a rectangle
/// decomposition whose bounds differ by at most `opts.tol`.
pub fn compute_hsb<T: Scalar>(s: &Matrix<T>, opts: &HsbOptions) -> Result<HsbResult<T>> {
    s.check_nonnegative()?;
    if s.is_zero() {
        return Err(HsbError::ZeroMatrix);
    }
    let (m, n) = s.shape();
    if T::is_exact() && m * n > RATIONAL_CELL_LIMIT {
        return Err(HsbError::RationalTooLarge {
            cells: m * n,
            limit: RATIONAL_CELL_LIMIT,
        });
    }
    if !(opts.tol > 0.0) {
        return Err(HsbError::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let start = Instant::now();
    let deadline = opts.time_limit.map(|t| start + t);
    let norm = s.max_abs_entry();
    let tol = T::tol(opts.tol);
    let cut_threshold = T::one() + T::tol(CUT_TOL);

    let group = match &opts.symmetry {
        Some(g) => {
            g.check(s)?;
            g.clone()
        }
        None => SymmetryGroup::trivial(m, n),
    };
    let mut master = Master::new(s, &group.cell_orbits())?;
    for rect in initial_pool(s) {
        master.add_column(rect)?;
    }

    // a singleton at ‖S‖ always certifies hsb ≥ 1
    let mut best = trivial_bracket(s);
    let mut iterations = 0usize;
    let mut oracle_calls = 0usize;
    let finish = |master: &Master<T>,
                  best: Bracket<T>,
                  iterations: usize,
                  oracle_calls: usize,
                  status: HsbStatus| {
        let dual_weights = clean_decomposition(s, expand_orbits(&group, master.weights()));
        let upper = dual_weights
            .iter()
            .fold(T::zero(), |acc, (_, w)| acc + w.clone())
            / norm.clone();
        let gap = T::max_of(upper - best.value.clone(), T::zero());
        HsbResult {
            value: best.value,
            primal_x: best.x,
            dual_weights,
            gap,
            iterations,
            oracle_calls,
            lp_iterations: master.pivots,
            mode: T::MODE,
            status,
        }
    };

    // separation points mix the best certified X into the current duals,
    // which damps the oscillation of degenerate master duals
    let mut smoothing = if T::is_exact() || !(opts.smoothing > 0.0 && opts.smoothing < 1.0) {
        None
    } else {
        Some(T::tol(opts.smoothing))
    };
    loop {
        let expired = deadline.is_some_and(|d| Instant::now() >= d);
        if expired || master.solve(deadline)? == MasterStatus::TimeLimit {
            return Ok(finish(
                &master,
                best,
                iterations,
                oracle_calls,
                HsbStatus::TimeLimit,
            ));
        }
        iterations += 1;
        let current = off_support_floor(s, &master.dual_matrix(T::zero()));
        let restricted = master.objective() / norm.clone();
        let prices_out = |rect: &Rectangle| {
            current
                .rectangle_inner(rect)
                .is_ok_and(|v| v > cut_threshold)
        };

        let mut cuts: Vec<Rectangle> = Vec::new();
        let points: Vec<Option<T>> = smoothing
            .clone()
            .into_iter()
            .map(Some)
            .chain([None])
            .collect();
        for alpha in points {
            let x = match alpha {
                Some(a) => Matrix::from_fn(m, n, |i, j| {
                    a.clone() * best.x.get(i, j).clone()
                        + (T::one() - a.clone()) * current.get(i, j).clone()
                })?,
                None => current.clone(),
            };
            cuts = heuristic_candidates(
                &x,
                opts.heuristic_restarts,
                opts.seed.wrapping_add(iterations as u64),
            )
            .into_iter()
            .filter(|(v, r)| *v > cut_threshold && prices_out(r))
            .map(|(_, r)| r)
            .collect();
            if !cuts.is_empty() {
                break;
            }

            oracle_calls += 1;
            let rho = if T::is_exact() {
                rho_enumerate(&x)
            } else {
                let remaining = deadline.map(|d| d.saturating_duration_since(Instant::now()));
                rho_exact(&x, remaining)
            };
            if !rho.exact {
                return Ok(finish(
                    &master,
                    best,
                    iterations,
                    oracle_calls,
                    HsbStatus::TimeLimit,
                ));
            }
            if rho.nodes_explored > SMOOTHING_NODE_LIMIT {
                // exact separation is too dear to spend on extra points
                smoothing = None;
            }
            if !rho.value.is_pos() {
                return Err(HsbError::SolverFailure(
                    "separation point has ρ(X) ≤ 0".into(),
                ));
            }
            let value = x.frobenius_inner(s)? / (norm.clone() * rho.value.clone());
            if value > best.value {
                best = Bracket {
                    value,
                    x: x.scalar_scale(&(T::one() / rho.value.clone()))?,
                };
            }
            if restricted.clone() - best.value.clone() <= tol {
                return Ok(finish(
                    &master,
                    best,
                    iterations,
                    oracle_calls,
                    HsbStatus::Optimal,
                ));
            }
            if prices_out(&rho.witness) {
                cuts.push(rho.witness);
                break;
            }
        }

        let mut added = 0;
        for rect in cuts {
            if added >= opts.cuts_per_round.max(1) {
                break;
            }
            if master.add_column(rect)? {
                added += 1;
            }
        }
        if added == 0 {
            return Err(HsbError::SolverFailure(format!(
                "no violated rectangle left but gap is {}",
                restricted - best.value
            )));
        }
    }
}

fn trivial_bracket<T: Scalar>(s: &Matrix<T>) -> Bracket<T> {
    let (m, n) = s.shape();
    let norm = s.max_abs_entry();
    let arg = s.data().iter().position(|v| *v == norm).unwrap_or(0);
    let x = Matrix::from_fn(m, n, |i, j| {
        if i * n + j == arg {
            T::one()
        } else {
            T::zero()
        }
    })
    .expect("shape of S");
    Bracket { value: T::one(), x }
}

/// Every row and every column cut down to the support of S, and the
/// support itself when it is a rectangle. With zero cells pinned at 0 the
/// cut-down rows are the same constraints as the full ones.
fn initial_pool<T: Scalar>(s: &Matrix<T>) -> Vec<Rectangle> {
    let (m, n) = s.shape();
    let nonzero = |i: usize, j: usize| !s.get(i, j).is_zero();
    let mut pool = Vec::new();
    for i in 0..m {
        let cols: Vec<usize> = (0..n).filter(|&j| nonzero(i, j)).collect();
        if let Ok(r) = Rectangle::new(vec![i], cols, m, n) {
            pool.push(r);
        }
    }
    for j in 0..n {
        let rows: Vec<usize> = (0..m).filter(|&i| nonzero(i, j)).collect();
        if let Ok(r) = Rectangle::new(rows, vec![j], m, n) {
            pool.push(r);
        }
    }
    let rows: Vec<usize> = (0..m).filter(|&i| (0..n).any(|j| nonzero(i, j))).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| (0..m).any(|i| nonzero(i, j))).collect();
    if rows.iter().all(|&i| cols.iter().all(|&j| nonzero(i, j))) {
        if let Ok(r) = Rectangle::new(rows, cols, m, n) {
            pool.push(r);
        }
    }
    pool
}

/// X with every cell outside the support of S pushed below minus the
/// total positive mass, so no rectangle through such a cell is positive.
/// Separating on this matrix only ever yields support-contained
/// rectangles, and it is itself a primal certificate for the same value.
fn off_support_floor<T: Scalar>(s: &Matrix<T>, x: &Matrix<T>) -> Matrix<T> {
    let mass = x
        .data()
        .iter()
        .zip(s.data())
        .filter(|(v, w)| v.is_pos() && !w.is_zero())
        .fold(T::one(), |acc, (v, _)| acc + v.clone());
    let (m, n) = x.shape();
    Matrix::from_fn(m, n, |i, j| {
        if s.get(i, j).is_zero() {
            -mass.clone()
        } else {
            x.get(i, j).clone()
        }
    })
    .expect("shape of S")
}

/// Spreads each weight evenly over the orbit of its rectangle.
fn expand_orbits<T: Scalar>(
    group: &SymmetryGroup,
    weights: Vec<(Rectangle, T)>,
) -> Vec<(Rectangle, T)> {
    if group.is_trivial() {
        return weights;
    }
    let mut out = Vec::new();
    for (rect, w) in weights {
        let orbit = group.rectangle_orbit(&rect);
        let share = w / T::from_usize(orbit.len());
        out.extend(orbit.into_iter().map(|r| (r, share.clone())));
    }
    out
}

/// Turns approximate weights into an exact decomposition of S: repeated
/// rectangles are merged, nonpositive weights dropped, weights shrunk
/// where they overshoot S, and singletons absorb the remainder.
pub fn clean_decomposition<T: Scalar>(
    s: &Matrix<T>,
    raw: Vec<(Rectangle, T)>,
) -> Vec<(Rectangle, T)> {
    let (m, n) = s.shape();
    let mut merged: BTreeMap<Rectangle, T> = BTreeMap::new();
    for (rect, w) in raw {
        if rect.is_singleton() {
            continue;
        }
        let entry = merged.entry(rect).or_insert_with(T::zero);
        *entry = entry.clone() + w;
    }
    let mut weights: Vec<(Rectangle, T)> = merged.into_iter().filter(|(_, w)| w.is_pos()).collect();
    let coverage = |weights: &[(Rectangle, T)]| {
        let mut cover = vec![T::zero(); m * n];
        for (rect, w) in weights {
            for c in rect.cells() {
                cover[c] = cover[c].clone() + w.clone();
            }
        }
        cover
    };
    // weights only shrink, so a repaired cell never overshoots again
    let cover = coverage(&weights);
    for cell in 0..m * n {
        let target = &s.data()[cell];
        if cover[cell] <= *target {
            continue;
        }
        let current = coverage(&weights);
        if current[cell] <= *target {
            continue;
        }
        let factor = target.clone() / current[cell].clone();
        let (i, j) = (cell / n, cell % n);
        for (rect, w) in weights.iter_mut() {
            if rect.contains(i, j) {
                *w = w.clone() * factor.clone();
            }
        }
    }
    weights.retain(|(_, w)| w.is_pos());
    let cover = coverage(&weights);
    for cell in 0..m * n {
        let residual = s.data()[cell].clone() - cover[cell].clone();
        if residual.is_pos() {
            let rect = Rectangle::singleton(cell / n, cell % n, m, n).expect("cell");
            weights.push((rect, residual));
        }
    }
    weights
}

/// ⟨S,X⟩ / (‖S‖ ρ(X)) with ρ computed exactly: a lower bound on hsb(S).
pub fn verify_primal_certificate<T: Scalar>(
    s: &Matrix<T>,
    x: &Matrix<T>,
    time_limit: Option<Duration>,
) -> Result<T> {
    if s.shape() != x.shape() {
        return Err(HsbError::dims(s.shape(), x.shape()));
    }
    if s.is_zero() {
        return Err(HsbError::ZeroMatrix);
    }
    if x.is_zero() {
        return Err(HsbError::InvalidArgument("primal matrix X is zero".into()));
    }
    let rho = if T::is_exact() && s.rows().min(s.cols()) <= ENUMERATION_LIMIT {
        rho_enumerate(x)
    } else {
        rho_exact(x, time_limit)
    };
    if !rho.exact {
        return Err(HsbError::TimeLimit);
    }
    if !rho.value.is_pos() {
        return Err(HsbError::InvalidArgument(
            "ρ(X) ≤ 0, the ratio is not a bound".into(),
        ));
    }
    Ok(s.frobenius_inner(x)? / (s.max_abs_entry() * rho.value))
}

/// Checks Σ w_R R = S and returns the upper bound Σ w_R / ‖S‖.
pub fn verify_dual_certificate<T: Scalar>(s: &Matrix<T>, weights: &[(Rectangle, T)]) -> Result<T> {
    if s.is_zero() {
        return Err(HsbError::ZeroMatrix);
    }
    let (m, n) = s.shape();
    let mut recon = vec![T::zero(); m * n];
    let mut total = T::zero();
    for (rect, w) in weights {
        if rect.ambient() != s.shape() {
            return Err(HsbError::dims(s.shape(), rect.ambient()));
        }
        if !w.is_pos() {
            return Err(HsbError::InvalidArgument(format!(
                "dual weight {w} on {rect} is not positive"
            )));
        }
        for c in rect.cells() {
            recon[c] = recon[c].clone() + w.clone();
        }
        total = total + w.clone();
    }
    let norm = s.max_abs_entry();
    let mut worst: Option<(T, usize)> = None;
    for (c, r) in recon.iter().enumerate() {
        let diff = (r.clone() - s.data()[c].clone()).abs();
        if worst.as_ref().is_none_or(|(w, _)| diff > *w) {
            worst = Some((diff, c));
        }
    }
    let (residual, cell) = worst.expect("nonempty matrix");
    if residual > T::tol(DUAL_CHECK_TOL) * norm.clone() {
        return Err(HsbError::CertificateInvalid {
            residual: residual.as_f64(),
            row: cell / n + 1,
            col: cell % n + 1,
        });
    }
    Ok(total / norm)
}

/// Re-loadable pair of certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<T> {
    pub value: T,
    pub gap: T,
    pub primal_x: Matrix<T>,
    pub dual: Vec<(Rectangle, T)>,
}

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    value: Value,
    gap: Value,
    #[serde(rename = "primal_X")]
    primal_x: Vec<Vec<Value>>,
    dual: Vec<DualEntry>,
}

#[derive(Serialize, Deserialize)]
struct DualEntry {
    rows: Vec<usize>,
    cols: Vec<usize>,
    weight: Value,
}

impl<T: Scalar> Certificate<T> {
    /// Rectangle indices are 1-based in the file.
    pub fn to_json(&self) -> String {
        let file = serde_json::json!({
            "value": scalar_to_json(&self.value),
            "gap": scalar_to_json(&self.gap),
            "primal_X": matrix_rows_to_json(&self.primal_x),
            "dual": dual_entries(&self.dual),
        });
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CertificateFile =
            serde_json::from_str(text).map_err(|e| HsbError::Parse(e.to_string()))?;
        let rows = file
            .primal_x
            .iter()
            .map(|row| row.iter().map(scalar_from_json).collect::<Result<Vec<T>>>())
            .collect::<Result<Vec<_>>>()?;
        let primal_x = Matrix::from_rows(rows)?;
        let (m, n) = primal_x.shape();
        Ok(Certificate {
            value: scalar_from_json(&file.value)?,
            gap: scalar_from_json(&file.gap)?,
            primal_x,
            dual: parse_dual(&file.dual, m, n)?,
        })
    }
}

fn dual_entries<T: Scalar>(dual: &[(Rectangle, T)]) -> Vec<Value> {
    dual.iter()
        .map(|(r, w)| {
            serde_json::json!({
                "rows": r.rows_one_based(),
                "cols": r.cols_one_based(),
                "weight": scalar_to_json(w),
            })
        })
        .collect()
}

fn parse_dual<T: Scalar>(entries: &[DualEntry], m: usize, n: usize) -> Result<Vec<(Rectangle, T)>> {
    entries
        .iter()
        .map(|e| {
            let rect = Rectangle::from_one_based(&e.rows, &e.cols, m, n)?;
            Ok((rect, scalar_from_json(&e.weight)?))
        })
        .collect()
}

#[derive(Deserialize)]
struct DualFile {
    dual: Vec<DualEntry>,
}

/// A decomposition alone, `{"dual": [...]}`, in the certificate layout.
pub fn dual_to_json<T: Scalar>(dual: &[(Rectangle, T)]) -> String {
    serde_json::to_string_pretty(&serde_json::json!({ "dual": dual_entries(dual) }))
        .expect("serializable")
}

/// Reads the `dual` part of a certificate file for an m×n matrix; other
/// keys are ignored.
pub fn dual_from_json<T: Scalar>(text: &str, m: usize, n: usize) -> Result<Vec<(Rectangle, T)>> {
    let file: DualFile = serde_json::from_str(text).map_err(|e| HsbError::Parse(e.to_string()))?;
    parse_dual(&file.dual, m, n)
}
