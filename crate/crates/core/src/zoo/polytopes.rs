//! Hypercubes and λ-scaled simplices.

use crate::error::{HsbError, Result};
use crate::labeled::{Label, LabelData, LabeledSlackMatrix};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const HYPERCUBE_CAP: usize = 16;

/// Coordinates of hypercube vertex `col`; x₁ is the most significant bit.
pub fn hypercube_vertex(n: usize, col: usize) -> Vec<u8> {
    (0..n).map(|i| ((col >> (n - 1 - i)) & 1) as u8).collect()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(HsbError::InvalidArgument(
            "hypercube dimension must be ≥ 1".into(),
        ));
    }
    if n > HYPERCUBE_CAP {
        return Err(HsbError::TooLarge(format!(
            "hypercube n = {n} exceeds the cap {HYPERCUBE_CAP}"
        )));
    }
    Ok(())
}

/// S_n: rows x_i ≥ 0 (slack v_i) for every i, then x_i ≤ 1 (slack 1 − v_i);
/// one column per 0/1 vertex.
pub fn hypercube_slack<T: Scalar>(n: usize) -> Result<LabeledSlackMatrix<T>> {
    check_dim(n)?;
    let cols = 1usize << n;
    let vertices: Vec<Vec<u8>> = (0..cols).map(|c| hypercube_vertex(n, c)).collect();
    let matrix = Matrix::from_fn(2 * n, cols, |r, c| {
        let bit = vertices[c][r % n];
        let v = if r < n { bit } else { 1 - bit };
        T::from_usize(v as usize)
    })?;
    let row_labels = (1..=n)
        .map(|i| Label::plain(format!("x{i}>=0")))
        .chain((1..=n).map(|i| Label::plain(format!("x{i}<=1"))))
        .collect();
    let col_labels = vertices
        .into_iter()
        .map(|v| {
            let text: String = v.iter().map(|b| char::from(b'0' + b)).collect();
            Label::with(text, LabelData::Vertex(v))
        })
        .collect();
    LabeledSlackMatrix::new(matrix, row_labels, col_labels)
}

/// S_n with the valid inequality Σ x_i ≥ 0 appended as a last row.
pub fn hypercube_slack_redundant<T: Scalar>(n: usize) -> Result<LabeledSlackMatrix<T>> {
    let base = hypercube_slack::<T>(n)?;
    let cols = base.matrix.cols();
    let extra = Matrix::from_fn(1, cols, |_, c| {
        T::from_usize(hypercube_vertex(n, c).iter().map(|&b| b as usize).sum())
    })?;
    let combo = (1..=n).map(|i| (i, "1".to_string())).collect();
    let row = LabeledSlackMatrix::new(
        extra,
        vec![Label::with("sum x>=0", LabelData::Combination(combo))],
        base.col_labels.clone(),
    )?;
    base.vstack(&row)
}

/// S_{n,λ}: the (n+1)×(n+1) identity with the first row multiplied by λ.
pub fn simplex_slack<T: Scalar>(n: usize, lambda: T) -> Result<LabeledSlackMatrix<T>> {
    if n == 0 {
        return Err(HsbError::InvalidArgument(
            "simplex dimension must be ≥ 1".into(),
        ));
    }
    if lambda < T::one() {
        return Err(HsbError::InvalidArgument(format!(
            "λ must be ≥ 1, got {lambda}"
        )));
    }
    let mut matrix = Matrix::identity(n + 1)?;
    matrix.set(0, 0, lambda);
    let row_labels = (1..=n + 1)
        .map(|i| Label::plain(format!("facet{i}")))
        .collect();
    let col_labels = (1..=n + 1)
        .map(|j| Label::plain(format!("vertex{j}")))
        .collect();
    LabeledSlackMatrix::new(matrix, row_labels, col_labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn one_dimensional_cube() {
        let s = hypercube_slack::<f64>(1).unwrap();
        assert_eq!(s.matrix, Matrix::from_i64(&[&[0, 1], &[1, 0]]).unwrap());
    }

    #[test]
    fn redundant_row_and_norm() {
        let s = hypercube_slack_redundant::<Rational>(2).unwrap();
        let last = s.matrix.row(4).to_vec();
        let want: Vec<Rational> = [0, 1, 1, 2]
            .iter()
            .map(|&v| Rational::from_ratio(v, 1))
            .collect();
        assert_eq!(last, want);
        assert_eq!(s.matrix.max_abs_entry(), Rational::from_ratio(2, 1));
        assert_eq!(s.col_labels[1].text, "01");
    }

    #[test]
    fn columns_have_n_zeros_and_n_ones() {
        for n in 1..=5 {
            let s = hypercube_slack::<f64>(n).unwrap();
            for c in 0..s.matrix.cols() {
                let ones = (0..2 * n).filter(|&r| *s.matrix.get(r, c) == 1.0).count();
                let zeros = (0..2 * n).filter(|&r| *s.matrix.get(r, c) == 0.0).count();
                assert_eq!((ones, zeros), (n, n));
            }
        }
        assert!(hypercube_slack::<f64>(17).is_err());
        assert!(hypercube_slack::<f64>(0).is_err());
    }

    #[test]
    fn simplex_examples() {
        let s = simplex_slack(2, 1.0).unwrap();
        assert_eq!(s.matrix, Matrix::identity(3).unwrap());
        let s = simplex_slack(2, Rational::from_ratio(4, 1)).unwrap();
        assert_eq!(s.matrix.max_abs_entry(), Rational::from_ratio(4, 1));
        assert!(simplex_slack(2, 0.5).is_err());
    }
}
