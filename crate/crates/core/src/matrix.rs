//! Dense matrices, rectangles, and the structural operations that the
//! bound is invariant under.

use std::fmt;
use std::ops::Index;

use crate::error::{HsbError, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix over a [`Scalar`] field.
///
/// Entries may be signed; slack matrices are checked with
/// [`Matrix::check_nonnegative`] where it matters.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols) {
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(HsbError::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(HsbError::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(HsbError::InvalidArgument("ragged rows".into()));
        }
        Self::new(m, n, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor from integer literals.
    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| T::from_ratio(v, 1)).collect())
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        Self::from_fn(rows, cols, |_, _| T::one())
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols).map(<[T]>::to_vec).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::as_f64)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| !v.is_neg())
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        match self.data.iter().position(|v| v.is_neg()) {
            Some(k) => Err(HsbError::NegativeEntry {
                row: k / self.cols,
                col: k % self.cols,
            }),
            None => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn sum(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc + v.clone())
    }

    pub fn row_sum(&self, i: usize) -> T {
        self.row(i).iter().fold(T::zero(), |acc, v| acc + v.clone())
    }

    /// Σ a_ij b_ij.
    pub fn frobenius_inner(&self, other: &Matrix<T>) -> Result<T> {
        if self.shape() != other.shape() {
            return Err(HsbError::dims(self.shape(), other.shape()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
    }

    /// max |a_ij|; zero only for the zero matrix.
    pub fn max_abs_entry(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, v| T::max_of(acc, v.abs()))
    }

    /// ⟨X, R⟩ without densifying R.
    pub fn rectangle_inner(&self, rect: &Rectangle) -> Result<T> {
        if rect.ambient() != self.shape() {
            return Err(HsbError::dims(self.shape(), rect.ambient()));
        }
        let mut acc = T::zero();
        for &i in rect.rows() {
            let row = self.row(i);
            for &j in rect.cols() {
                acc = acc + row[j].clone();
            }
        }
        Ok(acc)
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Row `i` of the result is row `row_perm[i]` of `self`; likewise for
    /// columns.
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> Result<Matrix<T>> {
        check_permutation(row_perm, self.rows)?;
        check_permutation(col_perm, self.cols)?;
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(row_perm[i], col_perm[j]).clone()
        })
    }

    pub fn scalar_scale(&self, c: &T) -> Result<Matrix<T>> {
        if !c.is_pos() {
            return Err(HsbError::NonPositiveScalar(c.to_string()));
        }
        Ok(self.map(|v| v.clone() * c.clone()))
    }

    pub fn hstack(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.rows != other.rows {
            return Err(HsbError::dims(
                (self.rows, other.cols),
                (other.rows, other.cols),
            ));
        }
        Matrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.cols {
            return Err(HsbError::dims(
                (other.rows, self.cols),
                (other.rows, other.cols),
            ));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix::new(self.rows + other.rows, self.cols, data)
    }

    pub fn select_rows(&self, keep: &[usize]) -> Result<Matrix<T>> {
        Matrix::from_fn(keep.len(), self.cols, |i, j| self.get(keep[i], j).clone())
    }

    pub fn select_cols(&self, keep: &[usize]) -> Result<Matrix<T>> {
        Matrix::from_fn(self.rows, keep.len(), |i, j| self.get(i, keep[j]).clone())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(HsbError::InvalidPermutation(format!(
            "length {} for dimension {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(HsbError::InvalidPermutation(format!("{perm:?}")));
        }
    }
    Ok(())
}

/// A rank-one 0/1 matrix stored as its (row set, column set) support.
///
/// Ordering is lexicographic on (rows, cols) with 0-based sorted index
/// vectors, which is also the tie-break order among optimal rectangles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rectangle {
    rows: Vec<usize>,
    cols: Vec<usize>,
    ambient_rows: usize,
    ambient_cols: usize,
}

impl Rectangle {
    pub fn new(
        mut rows: Vec<usize>,
        mut cols: Vec<usize>,
        ambient_rows: usize,
        ambient_cols: usize,
    ) -> Result<Self> {
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        if rows.is_empty() || cols.is_empty() {
            return Err(HsbError::InvalidRectangle("empty row or column set".into()));
        }
        if rows.last().is_some_and(|&r| r >= ambient_rows)
            || cols.last().is_some_and(|&c| c >= ambient_cols)
        {
            return Err(HsbError::InvalidRectangle(format!(
                "index out of range for {ambient_rows}x{ambient_cols}"
            )));
        }
        Ok(Rectangle {
            rows,
            cols,
            ambient_rows,
            ambient_cols,
        })
    }

    pub fn singleton(i: usize, j: usize, ambient_rows: usize, ambient_cols: usize) -> Result<Self> {
        Self::new(vec![i], vec![j], ambient_rows, ambient_cols)
    }

    pub fn full(ambient_rows: usize, ambient_cols: usize) -> Result<Self> {
        Self::new(
            (0..ambient_rows).collect(),
            (0..ambient_cols).collect(),
            ambient_rows,
            ambient_cols,
        )
    }

    /// Builds from 1-based index lists, as used in certificate files.
    pub fn from_one_based(
        rows: &[usize],
        cols: &[usize],
        ambient_rows: usize,
        ambient_cols: usize,
    ) -> Result<Self> {
        let shift = |v: &[usize]| -> Result<Vec<usize>> {
            v.iter()
                .map(|&x| {
                    x.checked_sub(1)
                        .ok_or_else(|| HsbError::InvalidRectangle("index 0 in 1-based list".into()))
                })
                .collect()
        };
        Self::new(shift(rows)?, shift(cols)?, ambient_rows, ambient_cols)
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn ambient(&self) -> (usize, usize) {
        (self.ambient_rows, self.ambient_cols)
    }

    pub fn rows_one_based(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r + 1).collect()
    }

    pub fn cols_one_based(&self) -> Vec<usize> {
        self.cols.iter().map(|c| c + 1).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.rows.len() == 1 && self.cols.len() == 1
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows.binary_search(&i).is_ok() && self.cols.binary_search(&j).is_ok()
    }

    /// Row-major cell indices `i * ambient_cols + j`.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows
            .iter()
            .flat_map(move |&i| self.cols.iter().map(move |&j| i * self.ambient_cols + j))
    }

    pub fn transpose(&self) -> Rectangle {
        Rectangle {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            ambient_rows: self.ambient_cols,
            ambient_cols: self.ambient_rows,
        }
    }

    pub fn dense<T: Scalar>(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.ambient_rows, self.ambient_cols)
            .expect("rectangle ambient dimensions are positive");
        for &i in &self.rows {
            for &j in &self.cols {
                m.set(i, j, T::one());
            }
        }
        m
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:?} x {:?})",
            self.rows_one_based(),
            self.cols_one_based()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Matrix<f64> {
        Matrix::from_i64(rows).unwrap()
    }

    #[test]
    fn frobenius_examples() {
        let ones = Matrix::<f64>::ones(2, 2).unwrap();
        assert_eq!(ones.frobenius_inner(&ones).unwrap(), 4.0);
        let id = Matrix::<f64>::identity(3).unwrap();
        assert_eq!(
            id.frobenius_inner(&Matrix::ones(3, 3).unwrap()).unwrap(),
            3.0
        );
        let a = m(&[&[1, 2], &[3, 4]]);
        let b = m(&[&[1, 0], &[0, 1]]);
        assert_eq!(a.frobenius_inner(&b).unwrap(), 5.0);
        assert!(matches!(
            a.frobenius_inner(&id),
            Err(HsbError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn max_abs_examples() {
        assert_eq!(m(&[&[0, 1], &[1, 0]]).max_abs_entry(), 1.0);
        assert_eq!(m(&[&[-3, 2], &[1, 0]]).max_abs_entry(), 3.0);
        let mut s = Matrix::<Rational>::identity(4).unwrap();
        s.set(0, 0, Rational::from_ratio(4, 1));
        assert_eq!(s.max_abs_entry(), Rational::from_ratio(4, 1));
        assert_eq!(Matrix::<f64>::zeros(2, 3).unwrap().max_abs_entry(), 0.0);
    }

    #[test]
    fn rectangle_inner_examples() {
        let ones = Matrix::<f64>::ones(3, 3).unwrap();
        let full = Rectangle::full(3, 3).unwrap();
        assert_eq!(ones.rectangle_inner(&full).unwrap(), 9.0);
        let id = Matrix::<f64>::identity(3).unwrap();
        let r = Rectangle::from_one_based(&[1], &[2], 3, 3).unwrap();
        assert_eq!(id.rectangle_inner(&r).unwrap(), 0.0);
        let x = m(&[&[1, -1], &[-1, 1]]);
        assert_eq!(
            x.rectangle_inner(&Rectangle::full(2, 2).unwrap()).unwrap(),
            0.0
        );
        assert!(x.rectangle_inner(&full).is_err());
    }

    #[test]
    fn structural_examples() {
        let a = m(&[&[1, 2, 3], &[4, 5, 6]]);
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.hstack(&a).unwrap().cols(), 6);
        assert_eq!(a.vstack(&a).unwrap().rows(), 4);
        assert_eq!(a.permute(&[0, 1], &[0, 1, 2]).unwrap(), a);
        let p = a.permute(&[1, 0], &[2, 0, 1]).unwrap();
        assert_eq!(p, m(&[&[6, 4, 5], &[3, 1, 2]]));
        assert!(a.permute(&[0, 0], &[0, 1, 2]).is_err());
        assert!(a.scalar_scale(&0.0).is_err());
        assert!(a.scalar_scale(&-1.0).is_err());
        assert!(a.hstack(&a.transpose()).is_err());
        assert!(Matrix::<f64>::new(0, 3, vec![]).is_err());
    }

    #[test]
    fn rectangle_validation() {
        assert!(Rectangle::new(vec![], vec![0], 2, 2).is_err());
        assert!(Rectangle::new(vec![2], vec![0], 2, 2).is_err());
        assert!(Rectangle::from_one_based(&[0], &[1], 2, 2).is_err());
        let r = Rectangle::new(vec![1, 0, 1], vec![1], 2, 2).unwrap();
        assert_eq!(r.rows(), &[0, 1]);
        assert_eq!(r.cells().collect::<Vec<_>>(), vec![1, 3]);
        assert!(r.contains(1, 1) && !r.contains(1, 0));
        assert_eq!(r.to_string(), "([1, 2] x [2])");
    }

    #[test]
    fn rectangle_inner_matches_dense_exhaustively_on_small() {
        // every rectangle of a 3x3 matrix
        let x = m(&[&[1, -2, 3], &[0, 5, -1], &[2, 2, -4]]);
        for rmask in 1u32..8 {
            for cmask in 1u32..8 {
                let rows = (0..3).filter(|b| rmask >> b & 1 == 1).collect();
                let cols = (0..3).filter(|b| cmask >> b & 1 == 1).collect();
                let r = Rectangle::new(rows, cols, 3, 3).unwrap();
                assert_eq!(
                    x.rectangle_inner(&r).unwrap(),
                    x.frobenius_inner(&r.dense()).unwrap()
                );
            }
        }
    }

    fn matrix_pair() -> impl Strategy<Value = (Matrix<f64>, Matrix<f64>, Matrix<f64>)> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            let v = || proptest::collection::vec(-20i64..20, r * c);
            (v(), v(), v()).prop_map(move |(a, b, d)| {
                let f = |v: Vec<i64>| {
                    Matrix::new(r, c, v.into_iter().map(|x| x as f64).collect()).unwrap()
                };
                (f(a), f(b), f(d))
            })
        })
    }

    proptest! {
        #[test]
        fn frobenius_is_symmetric_and_bilinear((a, b, c) in matrix_pair(), k in -5i64..5) {
            prop_assert_eq!(a.frobenius_inner(&b).unwrap(), b.frobenius_inner(&a).unwrap());
            let k = k as f64;
            let combo = Matrix::new(a.rows(), a.cols(),
                a.data().iter().zip(b.data()).map(|(x, y)| k * x + y).collect()).unwrap();
            prop_assert_eq!(
                combo.frobenius_inner(&c).unwrap(),
                k * a.frobenius_inner(&c).unwrap() + b.frobenius_inner(&c).unwrap()
            );
        }

        #[test]
        fn rectangle_inner_matches_dense(
            (r, c) in (1usize..9, 1usize..9),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = Matrix::<f64>::from_fn(r, c, |_, _| rng.gen_range(-4i64..=4) as f64).unwrap();
            let rows: Vec<usize> = (0..r).filter(|_| rng.gen_bool(0.5)).collect();
            let cols: Vec<usize> = (0..c).filter(|_| rng.gen_bool(0.5)).collect();
            if let Ok(rect) = Rectangle::new(rows, cols, r, c) {
                prop_assert_eq!(x.rectangle_inner(&rect).unwrap(), x.frobenius_inner(&rect.dense()).unwrap());
            }
        }

        #[test]
        fn max_abs_scales_linearly((a, _, _) in matrix_pair(), c in 1i64..50) {
            let c = c as f64 / 7.0;
            prop_assert!((a.scalar_scale(&c).unwrap().max_abs_entry() - c * a.max_abs_entry()).abs() < 1e-9);
        }
    }
}
