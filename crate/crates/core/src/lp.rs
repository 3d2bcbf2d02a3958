//! Restricted primal LP max{⟨S,X⟩ : ⟨X,R⟩ ≤ 1 (R in pool), X ≥ −M}.
//!
//! Singleton rectangles become the variable bounds X_ij ≤ 1, every other
//! pool rectangle is a constraint row. The solver is a dense revised dual
//! simplex with bounded variables: after a row is added the previous basis
//! stays dual feasible, so each cutting-plane round is a warm start.

use std::collections::HashSet;

use crate::error::{HsbError, Result};
use crate::matrix::{Matrix, Rectangle};
use crate::scalar::Scalar;

const FEAS_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
/// Non-improving pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

/// Revised dual simplex for
/// min cᵀx  s.t.  Σ_{j∈row r} x_j + s_r = 1,  l ≤ x ≤ u,  0 ≤ s_r ≤ u_r.
///
/// Variables `0..n` are structural (one per matrix cell); the slack of row
/// `r` is variable `n + r`.
#[derive(Clone, Debug)]
pub(crate) struct DualSimplex<T> {
    n: usize,
    cost: Vec<T>,
    rows: Vec<Vec<usize>>,
    cell_rows: Vec<Vec<usize>>,
    lower: Vec<T>,
    upper: Vec<T>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<Vec<T>>,
    x: Vec<T>,
    d: Vec<T>,
    since_refactor: usize,
    pub iterations: u64,
}

impl<T: Scalar> DualSimplex<T> {
    /// All structurals nonbasic; `lower`/`upper` per structural.
    pub fn new(cost: Vec<T>, lower: Vec<T>, upper: Vec<T>) -> Self {
        let n = cost.len();
        let mut lp = DualSimplex {
            n,
            d: cost.clone(),
            cost,
            rows: Vec::new(),
            cell_rows: vec![Vec::new(); n],
            x: vec![T::zero(); n],
            state: vec![VarState::AtLower; n],
            lower,
            upper,
            basis: Vec::new(),
            binv: Vec::new(),
            since_refactor: 0,
            iterations: 0,
        };
        for j in 0..n {
            lp.place_at_dual_feasible_bound(j);
        }
        lp
    }

    fn place_at_dual_feasible_bound(&mut self, j: usize) {
        let at_upper = self.d[j].is_neg();
        self.state[j] = if at_upper {
            VarState::AtUpper
        } else {
            VarState::AtLower
        };
        self.x[j] = if at_upper {
            self.upper[j].clone()
        } else {
            self.lower[j].clone()
        };
    }

    /// Appends the row Σ_{j∈cells} x_j ≤ 1 with its slack basic.
    pub fn add_row(&mut self, cells: Vec<usize>, slack_upper: T) {
        let r = self.rows.len();
        let slack = self.n + r;
        let in_row: HashSet<usize> = cells.iter().copied().collect();
        // new B⁻¹ row: −a_Bᵀ B⁻¹ where a_B marks basic structurals in the row
        let mut new_row = vec![T::zero(); r + 1];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n && in_row.contains(&b) {
                for (c, v) in self.binv[i].iter().enumerate() {
                    new_row[c] = new_row[c].clone() - v.clone();
                }
            }
        }
        new_row[r] = T::one();
        for row in &mut self.binv {
            row.push(T::zero());
        }
        self.binv.push(new_row);
        let value = cells
            .iter()
            .fold(T::one(), |acc, &j| acc - self.x[j].clone());
        for &j in &cells {
            self.cell_rows[j].push(r);
        }
        self.rows.push(cells);
        self.basis.push(slack);
        self.lower.push(T::zero());
        self.upper.push(slack_upper);
        self.x.push(value);
        self.d.push(T::zero());
        self.state.push(VarState::Basic(r));
    }

    /// Changes the bounds of a nonbasic or basic structural, keeping the
    /// basis dual feasible.
    pub fn set_bounds(&mut self, j: usize, lower: T, upper: T) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        if let VarState::Basic(_) = self.state[j] {
            return;
        }
        let old = self.x[j].clone();
        self.place_at_dual_feasible_bound(j);
        let delta = self.x[j].clone() - old;
        if !delta.is_zero() {
            self.shift_basics(j, &delta);
        }
    }

    pub fn set_slack_upper(&mut self, r: usize, upper: T) {
        self.upper[self.n + r] = upper;
    }

    /// x_B −= B⁻¹ A_j · delta after nonbasic j moved by delta.
    fn shift_basics(&mut self, j: usize, delta: &T) {
        let col = self.ftran(j);
        for (i, a) in col.into_iter().enumerate() {
            if !a.is_zero() {
                let b = self.basis[i];
                self.x[b] = self.x[b].clone() - a * delta.clone();
            }
        }
    }

    /// B⁻¹ A_j.
    fn ftran(&self, j: usize) -> Vec<T> {
        let k = self.rows.len();
        let mut col = vec![T::zero(); k];
        if j >= self.n {
            let r = j - self.n;
            for (i, c) in col.iter_mut().enumerate() {
                *c = self.binv[i][r].clone();
            }
            return col;
        }
        for &r in &self.cell_rows[j] {
            for (i, c) in col.iter_mut().enumerate() {
                let v = &self.binv[i][r];
                if !v.is_zero() {
                    *c = c.clone() + v.clone();
                }
            }
        }
        col
    }

    pub fn value(&self, j: usize) -> &T {
        &self.x[j]
    }

    pub fn reduced_cost(&self, j: usize) -> &T {
        &self.d[j]
    }

    pub fn slack_reduced_cost(&self, r: usize) -> &T {
        &self.d[self.n + r]
    }

    pub fn is_basic(&self, j: usize) -> bool {
        matches!(self.state[j], VarState::Basic(_))
    }

    pub fn objective(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, j| {
            acc + self.cost[j].clone() * self.x[j].clone()
        })
    }

    /// Rebuilds B⁻¹ from the basis and recomputes x_B, duals and reduced
    /// costs; nonbasics with a wrong-signed reduced cost are flipped.
    fn refactor(&mut self) -> Result<()> {
        let k = self.rows.len();
        self.since_refactor = 0;
        if k > 0 {
            let mut b = vec![vec![T::zero(); k]; k];
            for (i, &var) in self.basis.iter().enumerate() {
                if var < self.n {
                    for &r in &self.cell_rows[var] {
                        b[r][i] = T::one();
                    }
                } else {
                    b[var - self.n][i] = T::one();
                }
            }
            self.binv = invert(b)?;
        }
        self.recompute_duals();
        for j in 0..self.x.len() {
            if matches!(self.state[j], VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                continue;
            }
            let tol = T::tol(DUAL_TOL);
            let wrong = match self.state[j] {
                VarState::AtLower => self.d[j] < -tol,
                VarState::AtUpper => self.d[j] > tol,
                VarState::Basic(_) => false,
            };
            if wrong {
                self.place_at_dual_feasible_bound(j);
            }
        }
        self.recompute_primal();
        Ok(())
    }

    fn recompute_primal(&mut self) {
        let k = self.rows.len();
        let mut rhs = vec![T::one(); k];
        for (r, cells) in self.rows.iter().enumerate() {
            for &j in cells {
                if !matches!(self.state[j], VarState::Basic(_)) {
                    rhs[r] = rhs[r].clone() - self.x[j].clone();
                }
            }
            let s = self.n + r;
            if !matches!(self.state[s], VarState::Basic(_)) {
                rhs[r] = rhs[r].clone() - self.x[s].clone();
            }
        }
        for i in 0..k {
            let v = self.binv[i]
                .iter()
                .zip(&rhs)
                .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
            self.x[self.basis[i]] = v;
        }
    }

    fn recompute_duals(&mut self) {
        let k = self.rows.len();
        let mut y = vec![T::zero(); k];
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = if b < self.n {
                self.cost[b].clone()
            } else {
                T::zero()
            };
            if cb.is_zero() {
                continue;
            }
            for (c, v) in self.binv[i].iter().enumerate() {
                y[c] = y[c].clone() + cb.clone() * v.clone();
            }
        }
        for j in 0..self.n {
            self.d[j] = self.cell_rows[j]
                .iter()
                .fold(self.cost[j].clone(), |acc, &r| acc - y[r].clone());
        }
        for r in 0..k {
            self.d[self.n + r] = -y[r].clone();
        }
        for &b in &self.basis {
            self.d[b] = T::zero();
        }
    }

    fn infeasibility(&self, var: usize) -> T {
        let v = &self.x[var];
        if *v < self.lower[var] {
            self.lower[var].clone() - v.clone()
        } else if *v > self.upper[var] {
            v.clone() - self.upper[var].clone()
        } else {
            T::zero()
        }
    }

    fn choose_leaving(&self, bland: bool) -> Option<usize> {
        let tol = T::tol(FEAS_TOL);
        let mut best: Option<(usize, T)> = None;
        for (r, &var) in self.basis.iter().enumerate() {
            let inf = self.infeasibility(var);
            if inf <= tol {
                continue;
            }
            let replace = match &best {
                None => true,
                Some((br, bv)) => {
                    if bland {
                        var < self.basis[*br]
                    } else {
                        inf > *bv
                    }
                }
            };
            if replace {
                best = Some((r, inf));
            }
        }
        best.map(|(r, _)| r)
    }

    /// Runs dual simplex pivots to optimality.
    pub fn solve(&mut self, max_iterations: u64) -> Result<LpStatus> {
        let exact = T::is_exact();
        let mut stall = 0usize;
        let mut last_obj = self.objective();
        let mut verified = false;
        loop {
            if !exact && self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = stall > STALL_LIMIT;
            let Some(r) = self.choose_leaving(bland) else {
                if exact || verified || self.since_refactor == 0 {
                    return Ok(LpStatus::Optimal);
                }
                // confirm optimality on freshly factored values
                self.refactor()?;
                verified = true;
                continue;
            };
            verified = false;
            if self.iterations >= max_iterations {
                return Err(HsbError::SolverFailure(format!(
                    "iteration limit {max_iterations} reached"
                )));
            }
            if !self.pivot(r, bland)? {
                return Ok(LpStatus::Infeasible);
            }
            let obj = self.objective();
            if obj == last_obj {
                stall += 1;
            } else {
                stall = 0;
                last_obj = obj;
            }
        }
    }

    /// One dual simplex pivot on leaving row `r`. Returns false when the
    /// row proves primal infeasibility.
    fn pivot(&mut self, r: usize, bland: bool) -> Result<bool> {
        let p = self.basis[r];
        let to_lower = self.x[p] < self.lower[p];
        let target = if to_lower {
            self.lower[p].clone()
        } else {
            self.upper[p].clone()
        };

        // α_r = e_rᵀ B⁻¹ A over all variables
        let k = self.rows.len();
        let rho = self.binv[r].clone();
        let mut alpha = vec![T::zero(); self.n + k];
        for (row, cells) in self.rows.iter().enumerate() {
            let w = &rho[row];
            if w.is_zero() {
                continue;
            }
            for &j in cells {
                alpha[j] = alpha[j].clone() + w.clone();
            }
            alpha[self.n + row] = w.clone();
        }

        let piv_tol = T::tol(PIVOT_TOL);
        let mut entering: Option<(usize, T)> = None;
        for (j, a) in alpha.iter().enumerate() {
            if a.abs() <= piv_tol || self.lower[j] == self.upper[j] {
                continue;
            }
            let eligible = match self.state[j] {
                VarState::Basic(_) => false,
                VarState::AtLower => {
                    if to_lower {
                        a.is_neg()
                    } else {
                        a.is_pos()
                    }
                }
                VarState::AtUpper => {
                    if to_lower {
                        a.is_pos()
                    } else {
                        a.is_neg()
                    }
                }
            };
            if !eligible {
                continue;
            }
            let ratio = self.d[j].abs() / a.abs();
            let replace = match &entering {
                None => true,
                Some((q, best)) => {
                    let slack = T::tol(1e-12);
                    if ratio < best.clone() - slack.clone() {
                        true
                    } else if ratio <= best.clone() + slack {
                        // ties: larger pivot, or smallest index under Bland
                        if bland {
                            false
                        } else {
                            a.abs() > alpha[*q].abs()
                        }
                    } else {
                        false
                    }
                }
            };
            if replace {
                entering = Some((j, ratio));
            }
        }
        let Some((q, _)) = entering else {
            return Ok(false);
        };

        let col = self.ftran(q);
        let arq = col[r].clone();
        if arq.abs() <= piv_tol {
            return Err(HsbError::SolverFailure(
                "pivot element vanished in column update".into(),
            ));
        }
        let t = (self.x[p].clone() - target.clone()) / arq.clone();
        for (i, a) in col.iter().enumerate() {
            if !a.is_zero() {
                let b = self.basis[i];
                self.x[b] = self.x[b].clone() - a.clone() * t.clone();
            }
        }
        self.x[q] = self.x[q].clone() + t;
        self.x[p] = target;

        let theta = self.d[q].clone() / alpha[q].clone();
        if !theta.is_zero() {
            for (j, a) in alpha.iter().enumerate() {
                if !a.is_zero() && !matches!(self.state[j], VarState::Basic(_)) {
                    self.d[j] = self.d[j].clone() - theta.clone() * a.clone();
                }
            }
        }
        self.d[q] = T::zero();
        self.d[p] = -theta;

        let pivot_row: Vec<T> = self.binv[r]
            .iter()
            .map(|v| v.clone() / arq.clone())
            .collect();
        for (i, row) in self.binv.iter_mut().enumerate() {
            if i == r || col[i].is_zero() {
                continue;
            }
            let f = col[i].clone();
            for (c, v) in row.iter_mut().enumerate() {
                if !pivot_row[c].is_zero() {
                    *v = v.clone() - f.clone() * pivot_row[c].clone();
                }
            }
        }
        self.binv[r] = pivot_row;

        self.state[p] = if to_lower {
            VarState::AtLower
        } else {
            VarState::AtUpper
        };
        self.state[q] = VarState::Basic(r);
        self.basis[r] = q;
        self.iterations += 1;
        self.since_refactor += 1;
        Ok(true)
    }
}

/// Gauss–Jordan inverse with partial pivoting.
fn invert<T: Scalar>(mut a: Vec<Vec<T>>) -> Result<Vec<Vec<T>>> {
    let k = a.len();
    let mut inv: Vec<Vec<T>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    for c in 0..k {
        let mut piv = c;
        for r in c + 1..k {
            if a[r][c].abs() > a[piv][c].abs() {
                piv = r;
            }
        }
        if a[piv][c].abs() <= T::tol(1e-12) {
            return Err(HsbError::SolverFailure("singular basis".into()));
        }
        a.swap(c, piv);
        inv.swap(c, piv);
        let p = a[c][c].clone();
        for v in a[c].iter_mut() {
            *v = v.clone() / p.clone();
        }
        for v in inv[c].iter_mut() {
            *v = v.clone() / p.clone();
        }
        for r in 0..k {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone();
            let (arow, crow) = (a[c].clone(), inv[c].clone());
            for (v, w) in a[r].iter_mut().zip(&arow) {
                if !w.is_zero() {
                    *v = v.clone() - f.clone() * w.clone();
                }
            }
            for (v, w) in inv[r].iter_mut().zip(&crow) {
                if !w.is_zero() {
                    *v = v.clone() - f.clone() * w.clone();
                }
            }
        }
    }
    Ok(inv)
}

/// Solution of a restricted LP over a rectangle pool.
#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Optimal X (same shape as S).
    pub primal: Matrix<T>,
    pub objective: T,
    /// Multiplier y_R ≥ 0 per pool rectangle, in pool order (repeated
    /// rectangles get zero after the first occurrence).
    pub duals: Vec<T>,
    /// Multipliers of the box X_ij ≥ −M; all zero when the box is inactive.
    pub box_duals: Matrix<T>,
    pub iterations: u64,
}

/// The rectangle-constrained LP with bound-encoded singletons, pinned
/// zero-objective cells, and an artificial box X ≥ −M.
#[derive(Clone, Debug)]
pub struct RestrictedLp<T> {
    s: Matrix<T>,
    box_size: T,
    pinned: Vec<bool>,
    rows: Vec<Rectangle>,
    keys: HashSet<Rectangle>,
    simplex: DualSimplex<T>,
}

pub const DEFAULT_MAX_ITERATIONS: u64 = 2_000_000;

impl<T: Scalar> RestrictedLp<T> {
    /// Starts with the singleton bounds only. Cells with S_ij = 0 are
    /// pinned to zero.
    pub fn new(s: &Matrix<T>, box_size: T) -> Result<Self> {
        if !box_size.is_pos() {
            return Err(HsbError::NonPositiveScalar(box_size.to_string()));
        }
        let pinned: Vec<bool> = s.data().iter().map(|v| v.is_zero()).collect();
        let cost: Vec<T> = s.data().iter().map(|v| -v.clone()).collect();
        let lower = pinned
            .iter()
            .map(|&p| if p { T::zero() } else { -box_size.clone() })
            .collect();
        let upper = pinned
            .iter()
            .map(|&p| if p { T::zero() } else { T::one() })
            .collect();
        Ok(RestrictedLp {
            s: s.clone(),
            box_size,
            pinned,
            rows: Vec::new(),
            keys: HashSet::new(),
            simplex: DualSimplex::new(cost, lower, upper),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.s.shape()
    }

    pub fn box_size(&self) -> &T {
        &self.box_size
    }

    /// Non-singleton constraint rectangles, in insertion order.
    pub fn rows(&self) -> &[Rectangle] {
        &self.rows
    }

    fn slack_upper(&self, rect: &Rectangle) -> T {
        T::one() + self.box_size.clone() * T::from_usize(rect.cell_count())
    }

    /// Adds ⟨X, R⟩ ≤ 1. Singletons are already bounds and duplicates are
    /// ignored; returns whether a row was added.
    pub fn add_rectangle(&mut self, rect: Rectangle) -> Result<bool> {
        if rect.ambient() != self.s.shape() {
            return Err(HsbError::dims(self.s.shape(), rect.ambient()));
        }
        if rect.is_singleton() || self.keys.contains(&rect) {
            return Ok(false);
        }
        let upper = self.slack_upper(&rect);
        self.simplex.add_row(rect.cells().collect(), upper);
        self.keys.insert(rect.clone());
        self.rows.push(rect);
        Ok(true)
    }

    pub fn is_pinned(&self, cell: usize) -> bool {
        self.pinned[cell]
    }

    pub fn unpin(&mut self, cell: usize) {
        if self.pinned[cell] {
            self.pinned[cell] = false;
            self.simplex
                .set_bounds(cell, -self.box_size.clone(), T::one());
        }
    }

    pub fn set_box_size(&mut self, box_size: T) {
        self.box_size = box_size;
        for cell in 0..self.pinned.len() {
            if !self.pinned[cell] {
                self.simplex
                    .set_bounds(cell, -self.box_size.clone(), T::one());
            }
        }
        for (r, rect) in self.rows.iter().enumerate() {
            let upper = T::one() + self.box_size.clone() * T::from_usize(rect.cell_count());
            self.simplex.set_slack_upper(r, upper);
        }
    }

    pub fn solve(&mut self, max_iterations: u64) -> Result<LpStatus> {
        self.simplex.solve(max_iterations)
    }

    pub fn iterations(&self) -> u64 {
        self.simplex.iterations
    }

    pub fn primal(&self) -> Matrix<T> {
        let (m, n) = self.s.shape();
        Matrix::from_fn(m, n, |i, j| self.simplex.value(i * n + j).clone()).expect("shape of S")
    }

    /// ⟨S, X⟩ at the current basis.
    pub fn objective(&self) -> T {
        -self.simplex.objective()
    }

    /// Multiplier of constraint row `r` (a non-singleton rectangle).
    pub fn row_dual(&self, r: usize) -> T {
        let d = self.simplex.slack_reduced_cost(r).clone();
        T::max_of(d, T::zero())
    }

    /// Σ_{R ∋ cell} y_R − S_cell; negative part is the singleton weight,
    /// positive part on a free cell at its lower bound is the box dual.
    pub fn cell_reduced_cost(&self, cell: usize) -> &T {
        self.simplex.reduced_cost(cell)
    }

    /// Pinned cells covered by rectangles with positive multipliers.
    pub fn pinned_cells_to_release(&self) -> Vec<usize> {
        let tol = T::tol(DUAL_TOL);
        (0..self.pinned.len())
            .filter(|&c| self.pinned[c] && *self.simplex.reduced_cost(c) > tol)
            .collect()
    }

    /// Free cells whose box bound carries a positive multiplier.
    pub fn active_box_cells(&self) -> Vec<usize> {
        let tol = T::tol(DUAL_TOL);
        (0..self.pinned.len())
            .filter(|&c| {
                !self.pinned[c]
                    && !self.simplex.is_basic(c)
                    && *self.simplex.value(c) == -self.box_size.clone()
                    && *self.simplex.reduced_cost(c) > tol
            })
            .collect()
    }

    fn singleton_dual(&self, cell: usize) -> T {
        if self.pinned[cell] || self.simplex.is_basic(cell) {
            return T::zero();
        }
        let d = self.simplex.reduced_cost(cell);
        if d.is_neg() {
            -d.clone()
        } else {
            T::zero()
        }
    }

    fn box_dual(&self, cell: usize) -> T {
        if self.pinned[cell] || self.simplex.is_basic(cell) {
            return T::zero();
        }
        let d = self.simplex.reduced_cost(cell);
        if d.is_pos() && *self.simplex.value(cell) == -self.box_size.clone() {
            d.clone()
        } else {
            T::zero()
        }
    }

    /// Snapshot of the current optimum with duals in `pool` order. Every
    /// singleton of the ambient shape maps to its bound multiplier.
    pub fn solution(&self, status: LpStatus, pool: &[Rectangle]) -> LpSolution<T> {
        let (m, n) = self.s.shape();
        let index: std::collections::HashMap<&Rectangle, usize> = self
            .rows
            .iter()
            .enumerate()
            .map(|(r, rect)| (rect, r))
            .collect();
        let mut seen = HashSet::new();
        let duals = pool
            .iter()
            .map(|rect| {
                if !seen.insert(rect) {
                    T::zero()
                } else if rect.is_singleton() {
                    let cell = rect.rows()[0] * n + rect.cols()[0];
                    self.singleton_dual(cell)
                } else {
                    index.get(rect).map_or_else(T::zero, |&r| self.row_dual(r))
                }
            })
            .collect();
        LpSolution {
            status,
            primal: self.primal(),
            objective: self.objective(),
            duals,
            box_duals: Matrix::from_fn(m, n, |i, j| self.box_dual(i * n + j)).expect("shape"),
            iterations: self.iterations(),
        }
    }
}

/// Solves max{⟨S,X⟩ : ⟨X,R⟩ ≤ 1 ∀R ∈ pool, X ≥ −M} from scratch.
///
/// The pool must contain every singleton rectangle. Zero-objective cells
/// stay pinned at 0 unless a rectangle covering them carries a positive
/// multiplier, in which case they are released and the LP re-solved.
pub fn solve_restricted_lp<T: Scalar>(
    s: &Matrix<T>,
    pool: &[Rectangle],
    box_size: T,
) -> Result<LpSolution<T>> {
    let (m, n) = s.shape();
    let singletons: HashSet<(usize, usize)> = pool
        .iter()
        .filter(|r| r.is_singleton())
        .map(|r| (r.rows()[0], r.cols()[0]))
        .collect();
    if singletons.len() != m * n {
        return Err(HsbError::InvalidArgument(
            "pool must contain every singleton rectangle".into(),
        ));
    }
    let mut lp = RestrictedLp::new(s, box_size)?;
    for rect in pool {
        lp.add_rectangle(rect.clone())?;
    }
    loop {
        let status = lp.solve(DEFAULT_MAX_ITERATIONS)?;
        if status != LpStatus::Optimal {
            return Ok(lp.solution(status, pool));
        }
        let release = lp.pinned_cells_to_release();
        if release.is_empty() {
            return Ok(lp.solution(status, pool));
        }
        for cell in release {
            lp.unpin(cell);
        }
    }
}
