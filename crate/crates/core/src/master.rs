//! Column-generation master min{Σ y_R : Σ y_R R = S on supp(S), y ≥ 0}.
//!
//! Rows are orbits of support cells under a symmetry group of S (single
//! cells when the group is trivial), columns are support-contained
//! rectangles, each standing for its weight spread evenly over its orbit.
//! The row constraint for orbit C reads Σ y_R |R ∩ C| = S_C |C|. The
//! simplex multipliers are the primal matrix X of the cutting-plane LP,
//! constant on orbits, and a column prices out exactly when ⟨X, R⟩ > 1.
//! Singletons start as the (identity) basis.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HsbError, Result};
use crate::matrix::{Matrix, Rectangle};
use crate::scalar::Scalar;

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before perturbing (float) or switching
/// to Bland's rule.
const STALL_LIMIT: usize = 200;
const MAX_PERTURBATIONS: usize = 3;
/// Relative size of the random shift given to basic values.
const PERTURBATION: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum MasterStatus {
    Optimal,
    TimeLimit,
}

#[derive(Clone, Debug)]
pub(crate) struct Master<T> {
    shape: (usize, usize),
    row_of_cell: Vec<Option<usize>>,
    cell_of_row: Vec<usize>,
    rhs: Vec<T>,
    /// Right-hand side the basis currently solves for; differs from `rhs`
    /// only while degeneracy is broken by perturbation.
    work_rhs: Vec<T>,
    perturbed: bool,
    rng: ChaCha8Rng,
    rects: Vec<Rectangle>,
    /// (row, |R ∩ C|) pairs.
    columns: Vec<Vec<(usize, T)>>,
    keys: HashSet<Rectangle>,
    basis: Vec<usize>,
    basic: Vec<bool>,
    /// Row-major B⁻¹.
    binv: Vec<T>,
    y: Vec<T>,
    duals: Vec<T>,
    since_refactor: usize,
    refactor_every: usize,
    pub pivots: u64,
}

impl<T: Scalar> Master<T> {
    /// `orbits[c]` labels the orbit of cell c; cells of one orbit must
    /// carry equal entries of S.
    pub fn new(s: &Matrix<T>, orbits: &[usize]) -> Result<Self> {
        let (m, n) = s.shape();
        if orbits.len() != m * n {
            return Err(HsbError::dims((m, n), (orbits.len(), 1)));
        }
        let mut row_of_orbit: HashMap<usize, usize> = HashMap::new();
        let mut row_of_cell = vec![None; m * n];
        let mut cell_of_row = Vec::new();
        let mut sizes: Vec<usize> = Vec::new();
        for (c, v) in s.data().iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let r = *row_of_orbit.entry(orbits[c]).or_insert_with(|| {
                cell_of_row.push(c);
                sizes.push(0);
                cell_of_row.len() - 1
            });
            if s.data()[cell_of_row[r]] != *v {
                return Err(HsbError::Internal("orbit with unequal entries".into()));
            }
            sizes[r] += 1;
            row_of_cell[c] = Some(r);
        }
        let k = cell_of_row.len();
        if k == 0 {
            return Err(HsbError::ZeroMatrix);
        }
        let rhs: Vec<T> = cell_of_row
            .iter()
            .zip(&sizes)
            .map(|(&c, &size)| s.data()[c].clone() * T::from_usize(size))
            .collect();
        let mut binv = vec![T::zero(); k * k];
        for i in 0..k {
            binv[i * k + i] = T::one();
        }
        let mut master = Master {
            shape: (m, n),
            row_of_cell,
            rhs: rhs.clone(),
            work_rhs: rhs.clone(),
            perturbed: false,
            rng: ChaCha8Rng::seed_from_u64(0x5eed),
            rects: Vec::with_capacity(k),
            columns: Vec::with_capacity(k),
            keys: HashSet::new(),
            basis: (0..k).collect(),
            basic: vec![true; k],
            binv,
            y: rhs,
            duals: vec![T::one(); k],
            since_refactor: 0,
            refactor_every: 100.max(k / 8),
            pivots: 0,
            cell_of_row,
        };
        for r in 0..k {
            let c = master.cell_of_row[r];
            let rect = Rectangle::singleton(c / n, c % n, m, n)?;
            master.keys.insert(rect.clone());
            master.rects.push(rect);
            master.columns.push(vec![(r, T::one())]);
        }
        Ok(master)
    }

    pub fn support_size(&self) -> usize {
        self.cell_of_row.len()
    }

    /// Adds a support-contained rectangle; duplicates are ignored.
    pub fn add_column(&mut self, rect: Rectangle) -> Result<bool> {
        if rect.ambient() != self.shape {
            return Err(HsbError::dims(self.shape, rect.ambient()));
        }
        if self.keys.contains(&rect) {
            return Ok(false);
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for c in rect.cells() {
            let r = self.row_of_cell[c].ok_or_else(|| {
                HsbError::InvalidRectangle(format!("{rect} leaves the support of S"))
            })?;
            *counts.entry(r).or_default() += 1;
        }
        self.keys.insert(rect.clone());
        self.rects.push(rect);
        self.columns.push(
            counts
                .into_iter()
                .map(|(r, k)| (r, T::from_usize(k)))
                .collect(),
        );
        self.basic.push(false);
        Ok(true)
    }

    /// Current multipliers as a matrix; cells outside the support get
    /// `off_support`.
    pub fn dual_matrix(&self, off_support: T) -> Matrix<T> {
        let (m, n) = self.shape;
        let data = self
            .row_of_cell
            .iter()
            .map(|r| r.map_or_else(|| off_support.clone(), |r| self.duals[r].clone()))
            .collect();
        Matrix::new(m, n, data).expect("shape")
    }

    /// Σ y_R at the current basis.
    pub fn objective(&self) -> T {
        self.y.iter().fold(T::zero(), |acc, v| acc + v.clone())
    }

    /// Basic columns with their values, each standing for its orbit.
    pub fn weights(&self) -> Vec<(Rectangle, T)> {
        self.basis
            .iter()
            .zip(&self.y)
            .map(|(&col, v)| (self.rects[col].clone(), v.clone()))
            .collect()
    }

    fn reduced_cost(&self, col: usize) -> T {
        self.columns[col].iter().fold(T::one(), |acc, (r, w)| {
            acc - w.clone() * self.duals[*r].clone()
        })
    }

    fn ftran(&self, col: usize) -> Vec<T> {
        let k = self.support_size();
        let mut a = vec![T::zero(); k];
        for (c, w) in &self.columns[col] {
            for (i, ai) in a.iter_mut().enumerate() {
                let v = &self.binv[i * k + c];
                if !v.is_zero() {
                    *ai = ai.clone() + w.clone() * v.clone();
                }
            }
        }
        a
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, T)> {
        let tol = T::tol(OPT_TOL);
        let mut best: Option<(usize, T)> = None;
        for col in 0..self.columns.len() {
            if self.basic[col] {
                continue;
            }
            let d = self.reduced_cost(col);
            if d >= -tol.clone() {
                continue;
            }
            if bland {
                return Some((col, d));
            }
            if best.as_ref().is_none_or(|(_, b)| d < *b) {
                best = Some((col, d));
            }
        }
        best
    }

    /// Harris two-pass ratio test; Bland mode takes the textbook minimum
    /// ratio, ties broken by the smallest basic column.
    fn choose_leaving(&self, a: &[T], bland: bool) -> Option<usize> {
        let piv = T::tol(PIVOT_TOL);
        let ratio = |i: usize| T::max_of(self.y[i].clone(), T::zero()) / a[i].clone();
        if bland {
            let tie = T::tol(FEAS_TOL);
            let eligible = (0..a.len()).filter(|&i| a[i] > piv);
            let min = eligible.clone().map(ratio).reduce(|x, y| T::min_of(x, y))?;
            return eligible
                .filter(|&i| ratio(i) <= min.clone() + tie.clone())
                .min_by_key(|&i| self.basis[i]);
        }
        let feas = T::tol(FEAS_TOL);
        let mut bound: Option<T> = None;
        for (i, ai) in a.iter().enumerate() {
            if *ai > piv {
                let t = (T::max_of(self.y[i].clone(), T::zero()) + feas.clone()) / ai.clone();
                if bound.as_ref().is_none_or(|b| t < *b) {
                    bound = Some(t);
                }
            }
        }
        let bound = bound?;
        let mut best: Option<usize> = None;
        for (i, ai) in a.iter().enumerate() {
            if *ai > piv && ratio(i) <= bound && best.is_none_or(|b| *ai > a[b]) {
                best = Some(i);
            }
        }
        best
    }

    fn pivot(&mut self, q: usize, d: T, a: Vec<T>, r: usize, theta: T) {
        let k = self.support_size();
        let ar = a[r].clone();
        for (i, ai) in a.iter().enumerate() {
            if i != r && !ai.is_zero() {
                self.y[i] = self.y[i].clone() - theta.clone() * ai.clone();
            }
        }
        self.y[r] = theta;

        let pivot_row: Vec<T> = self.binv[r * k..(r + 1) * k]
            .iter()
            .map(|v| v.clone() / ar.clone())
            .collect();
        for (c, v) in pivot_row.iter().enumerate() {
            if !v.is_zero() {
                // duals += (d_q / a_r) · e_rᵀB⁻¹
                self.duals[c] = self.duals[c].clone() + d.clone() * v.clone();
            }
        }
        let nz: Vec<usize> = (0..k).filter(|&c| !pivot_row[c].is_zero()).collect();
        for (i, ai) in a.iter().enumerate() {
            if i == r || ai.is_zero() {
                continue;
            }
            let row = &mut self.binv[i * k..(i + 1) * k];
            for &c in &nz {
                row[c] = row[c].clone() - ai.clone() * pivot_row[c].clone();
            }
        }
        self.binv[r * k..(r + 1) * k].clone_from_slice(&pivot_row);

        let leaving = self.basis[r];
        self.basic[leaving] = false;
        self.basic[q] = true;
        self.basis[r] = q;
        self.pivots += 1;
        self.since_refactor += 1;
    }

    /// Rebuilds B⁻¹ from the basis, then y = B⁻¹S and duals = 1ᵀB⁻¹.
    fn refactor(&mut self) -> Result<()> {
        let k = self.support_size();
        let mut b = vec![T::zero(); k * k];
        for (i, &col) in self.basis.iter().enumerate() {
            for (r, w) in &self.columns[col] {
                b[r * k + i] = w.clone();
            }
        }
        self.binv = invert_flat(b, k)?;
        for i in 0..k {
            let row = &self.binv[i * k..(i + 1) * k];
            self.y[i] = row
                .iter()
                .zip(&self.work_rhs)
                .filter(|(v, _)| !v.is_zero())
                .fold(T::zero(), |acc, (v, s)| acc + v.clone() * s.clone());
        }
        for c in 0..k {
            self.duals[c] = (0..k).fold(T::zero(), |acc, i| acc + self.binv[i * k + c].clone());
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// Raises every basic value by a small random amount, which moves the
    /// right-hand side to B(y + δ) and makes ties in the ratio test unlikely.
    fn perturb(&mut self) {
        let k = self.support_size();
        let scale = self
            .rhs
            .iter()
            .fold(T::one(), |acc, v| T::max_of(acc, v.clone()));
        for i in 0..k {
            let delta = PERTURBATION * self.rng.gen_range(0.5..1.0);
            self.y[i] = T::max_of(self.y[i].clone(), T::zero()) + T::tol(delta) * scale.clone();
        }
        let mut work = vec![T::zero(); k];
        for (i, &col) in self.basis.iter().enumerate() {
            for (r, w) in &self.columns[col] {
                work[*r] = work[*r].clone() + w.clone() * self.y[i].clone();
            }
        }
        self.work_rhs = work;
        self.perturbed = true;
    }

    /// Restores the true right-hand side and repairs primal feasibility by
    /// dual simplex pivots; the basis stays dual feasible throughout.
    fn unperturb(&mut self, deadline: Option<Instant>) -> Result<MasterStatus> {
        self.work_rhs = self.rhs.clone();
        self.perturbed = false;
        self.refactor()?;
        let k = self.support_size();
        let feas = T::tol(FEAS_TOL);
        let piv = T::tol(PIVOT_TOL);
        loop {
            if self.pivots.is_multiple_of(64) && deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok(MasterStatus::TimeLimit);
            }
            if self.since_refactor >= self.refactor_every {
                self.refactor()?;
            }
            let Some(r) = (0..k)
                .filter(|&i| self.y[i] < -feas.clone())
                .min_by(|&i, &j| self.y[i].partial_cmp(&self.y[j]).unwrap_or(Ordering::Equal))
            else {
                return Ok(MasterStatus::Optimal);
            };
            let row = &self.binv[r * k..(r + 1) * k];
            let mut best: Option<(usize, T, T)> = None;
            for col in 0..self.columns.len() {
                if self.basic[col] {
                    continue;
                }
                let alpha = self.columns[col]
                    .iter()
                    .fold(T::zero(), |acc, (c, w)| acc + w.clone() * row[*c].clone());
                if alpha >= -piv.clone() {
                    continue;
                }
                let d = self.reduced_cost(col);
                let ratio = T::max_of(d.clone(), T::zero()) / -alpha;
                if best.as_ref().is_none_or(|(_, b, _)| ratio < *b) {
                    best = Some((col, ratio, d));
                }
            }
            let Some((q, _, d)) = best else {
                return Err(HsbError::SolverFailure(
                    "master infeasible after removing perturbation".into(),
                ));
            };
            let a = self.ftran(q);
            let theta = self.y[r].clone() / a[r].clone();
            self.pivot(q, d, a, r, theta);
        }
    }

    /// Primal simplex to optimality over the current pool.
    pub fn solve(&mut self, deadline: Option<Instant>) -> Result<MasterStatus> {
        let exact = T::is_exact();
        let mut degenerate = 0usize;
        let mut perturbations = 0usize;
        let mut verified = false;
        loop {
            if !exact && self.since_refactor >= self.refactor_every {
                self.refactor()?;
            }
            if self.pivots.is_multiple_of(64) && deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok(MasterStatus::TimeLimit);
            }
            if degenerate > STALL_LIMIT
                && !exact
                && !self.perturbed
                && perturbations < MAX_PERTURBATIONS
            {
                self.perturb();
                perturbations += 1;
                degenerate = 0;
            }
            let bland = degenerate > STALL_LIMIT;
            let Some((q, d)) = self.choose_entering(bland) else {
                if self.perturbed {
                    if self.unperturb(deadline)? == MasterStatus::TimeLimit {
                        return Ok(MasterStatus::TimeLimit);
                    }
                    verified = true;
                    continue;
                }
                if exact || verified || self.since_refactor == 0 {
                    return Ok(MasterStatus::Optimal);
                }
                self.refactor()?;
                verified = true;
                continue;
            };
            verified = false;
            let a = self.ftran(q);
            let Some(r) = self.choose_leaving(&a, bland) else {
                return Err(HsbError::SolverFailure(
                    "master LP unbounded, which is impossible for y ≥ 0".into(),
                ));
            };
            let theta = T::max_of(self.y[r].clone(), T::zero()) / a[r].clone();
            if theta > T::tol(FEAS_TOL) {
                degenerate = 0;
            } else {
                degenerate += 1;
            }
            self.pivot(q, d, a, r, theta);
        }
    }
}

/// Gauss–Jordan inverse of a row-major k×k matrix with partial pivoting;
/// zero multipliers are skipped, which keeps near-identity bases cheap.
fn invert_flat<T: Scalar>(mut a: Vec<T>, k: usize) -> Result<Vec<T>> {
    let mut inv = vec![T::zero(); k * k];
    for i in 0..k {
        inv[i * k + i] = T::one();
    }
    for c in 0..k {
        let mut piv = c;
        for r in c + 1..k {
            if a[r * k + c].abs() > a[piv * k + c].abs() {
                piv = r;
            }
        }
        if a[piv * k + c].abs() <= T::tol(1e-12) {
            return Err(HsbError::SolverFailure("singular master basis".into()));
        }
        if piv != c {
            for j in 0..k {
                a.swap(c * k + j, piv * k + j);
                inv.swap(c * k + j, piv * k + j);
            }
        }
        let p = a[c * k + c].clone();
        let a_nz: Vec<usize> = (0..k).filter(|&j| !a[c * k + j].is_zero()).collect();
        let i_nz: Vec<usize> = (0..k).filter(|&j| !inv[c * k + j].is_zero()).collect();
        for &j in &a_nz {
            a[c * k + j] = a[c * k + j].clone() / p.clone();
        }
        for &j in &i_nz {
            inv[c * k + j] = inv[c * k + j].clone() / p.clone();
        }
        for r in 0..k {
            if r == c || a[r * k + c].is_zero() {
                continue;
            }
            let f = a[r * k + c].clone();
            for &j in &a_nz {
                let v = a[c * k + j].clone();
                a[r * k + j] = a[r * k + j].clone() - f.clone() * v;
            }
            for &j in &i_nz {
                let v = inv[c * k + j].clone();
                inv[r * k + j] = inv[r * k + j].clone() - f.clone() * v;
            }
        }
    }
    Ok(inv)
}
