//! Diagonal scalings, normalization and redundant rows, with the brackets
//! they imply for hsb.

use serde::{Deserialize, Serialize};

use crate::error::{HsbError, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Positive diagonals D₁ (length m) and D₂ (length n) acting as D₁ S D₂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct DiagonalScaling<T> {
    pub d1: Vec<T>,
    pub d2: Vec<T>,
}

impl<T: Scalar> DiagonalScaling<T> {
    pub fn new(d1: Vec<T>, d2: Vec<T>) -> Result<Self> {
        if let Some(bad) = d1.iter().chain(&d2).find(|v| !v.is_pos()) {
            return Err(HsbError::NonPositiveScalar(bad.to_string()));
        }
        Ok(DiagonalScaling { d1, d2 })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        DiagonalScaling {
            d1: vec![T::one(); m],
            d2: vec![T::one(); n],
        }
    }

    pub fn inverse(&self) -> Self {
        let inv = |d: &[T]| d.iter().map(|v| T::one() / v.clone()).collect();
        DiagonalScaling {
            d1: inv(&self.d1),
            d2: inv(&self.d2),
        }
    }

    pub fn norm_d1(&self) -> T {
        max_entry(&self.d1)
    }

    pub fn norm_d2(&self) -> T {
        max_entry(&self.d2)
    }
}

fn max_entry<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| T::max_of(acc, x.abs()))
}

/// D₁ S D₂.
pub fn apply_scaling<T: Scalar>(s: &Matrix<T>, d: &DiagonalScaling<T>) -> Result<Matrix<T>> {
    let (m, n) = s.shape();
    if d.d1.len() != m || d.d2.len() != n {
        return Err(HsbError::dims((m, n), (d.d1.len(), d.d2.len())));
    }
    Matrix::from_fn(m, n, |i, j| {
        d.d1[i].clone() * s.get(i, j).clone() * d.d2[j].clone()
    })
}

/// The interval that must contain hsb(D₁SD₂) given hsb(S):
/// lower = ‖S‖ hsb(S) / (‖D₁⁻¹‖ ‖D₁SD₂‖ ‖D₂⁻¹‖),
/// upper = hsb(S) ‖D₁‖ ‖S‖ ‖D₂‖ / ‖D₁SD₂‖.
pub fn scaling_sandwich<T: Scalar>(
    s: &Matrix<T>,
    d: &DiagonalScaling<T>,
    hsb_s: &T,
) -> Result<(T, T)> {
    if s.is_zero() {
        return Err(HsbError::ZeroMatrix);
    }
    let scaled = apply_scaling(s, d)?;
    let norm_s = s.max_abs_entry();
    let norm_scaled = scaled.max_abs_entry();
    let inv = d.inverse();
    let lower =
        norm_s.clone() * hsb_s.clone() / (inv.norm_d1() * norm_scaled.clone() * inv.norm_d2());
    let upper = hsb_s.clone() * d.norm_d1() * norm_s * d.norm_d2() / norm_scaled;
    Ok((lower, upper))
}

/// The scaling dividing each nonzero row by its largest entry; zero rows
/// keep factor 1.
pub fn row_normalizer<T: Scalar>(s: &Matrix<T>) -> DiagonalScaling<T> {
    let (m, n) = s.shape();
    let d1 = (0..m)
        .map(|i| {
            let top = max_entry(s.row(i));
            if top.is_zero() {
                T::one()
            } else {
                T::one() / top
            }
        })
        .collect();
    DiagonalScaling {
        d1,
        d2: vec![T::one(); n],
    }
}

pub fn col_normalizer<T: Scalar>(s: &Matrix<T>) -> DiagonalScaling<T> {
    let t = row_normalizer(&s.transpose());
    DiagonalScaling { d1: t.d2, d2: t.d1 }
}

pub fn normalize_rows<T: Scalar>(s: &Matrix<T>) -> Matrix<T> {
    apply_scaling(s, &row_normalizer(s)).expect("normalizer has the shape of S")
}

pub fn normalize_cols<T: Scalar>(s: &Matrix<T>) -> Matrix<T> {
    apply_scaling(s, &col_normalizer(s)).expect("normalizer has the shape of S")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationOrder {
    #[default]
    RowsFirst,
    ColsFirst,
}

/// Normalizes in the given order and returns the combined scaling, whose
/// first factor makes the intermediate matrix row (or column) normalized.
pub fn normalize_both<T: Scalar>(
    s: &Matrix<T>,
    order: NormalizationOrder,
) -> (Matrix<T>, DiagonalScaling<T>) {
    let (first, second): (
        fn(&Matrix<T>) -> DiagonalScaling<T>,
        fn(&Matrix<T>) -> DiagonalScaling<T>,
    ) = match order {
        NormalizationOrder::RowsFirst => (row_normalizer, col_normalizer),
        NormalizationOrder::ColsFirst => (col_normalizer, row_normalizer),
    };
    let a = first(s);
    let mid = apply_scaling(s, &a).expect("shape");
    let b = second(&mid);
    let out = apply_scaling(&mid, &b).expect("shape");
    let combined = DiagonalScaling {
        d1: a
            .d1
            .iter()
            .zip(&b.d1)
            .map(|(x, y)| x.clone() * y.clone())
            .collect(),
        d2: a
            .d2
            .iter()
            .zip(&b.d2)
            .map(|(x, y)| x.clone() * y.clone())
            .collect(),
    };
    (out, combined)
}

pub fn normalize_rows_then_cols<T: Scalar>(s: &Matrix<T>) -> Matrix<T> {
    normalize_both(s, NormalizationOrder::RowsFirst).0
}

/// What to do when the new row wS has a larger entry than S.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RedundantRowPolicy {
    /// Refuse, since the bracket below needs ‖wS‖ ≤ ‖S‖.
    #[default]
    Reject,
    /// Shrink w so that ‖wS‖ = ‖S‖.
    Rescale,
    /// Append wS as is; the report then carries no bracket.
    Allow,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RedundantRowReport<T> {
    pub matrix: Matrix<T>,
    /// The weights actually used, after any rescaling.
    pub w: Vec<T>,
    pub w_l1: T,
    /// hsb(S) ≤ hsb(S') ≤ factor · hsb(S) with factor = max(1, ‖w‖₁), when
    /// ‖wS‖ ≤ ‖S‖.
    pub upper_factor: Option<T>,
}

impl<T: Scalar> RedundantRowReport<T> {
    pub fn bracket(&self, hsb_s: &T) -> Option<(T, T)> {
        self.upper_factor
            .as_ref()
            .map(|f| (hsb_s.clone(), hsb_s.clone() * f.clone()))
    }
}

/// Appends the row wS.
pub fn add_redundant_row<T: Scalar>(
    s: &Matrix<T>,
    w: &[T],
    policy: RedundantRowPolicy,
) -> Result<RedundantRowReport<T>> {
    let (m, n) = s.shape();
    if w.len() != m {
        return Err(HsbError::dims((m, 1), (w.len(), 1)));
    }
    if let Some(bad) = w.iter().find(|v| v.is_neg()) {
        return Err(HsbError::InvalidArgument(format!("negative weight {bad}")));
    }
    let combine = |w: &[T]| -> Vec<T> {
        (0..n)
            .map(|j| (0..m).fold(T::zero(), |acc, i| acc + w[i].clone() * s.get(i, j).clone()))
            .collect()
    };
    let mut w = w.to_vec();
    let mut row = combine(&w);
    let norm_s = s.max_abs_entry();
    let norm_row = max_entry(&row);
    let fits = norm_row <= norm_s;
    let mut upper_factor = None;
    match policy {
        _ if fits => {}
        RedundantRowPolicy::Reject => {
            return Err(HsbError::InvalidArgument(format!(
                "redundant row has entry {norm_row} above the largest entry {norm_s} of the matrix"
            )))
        }
        RedundantRowPolicy::Rescale => {
            let c = norm_s / norm_row;
            w = w.into_iter().map(|v| v * c.clone()).collect();
            row = combine(&w);
        }
        RedundantRowPolicy::Allow => {}
    }
    let w_l1 = w.iter().fold(T::zero(), |acc, v| acc + v.clone());
    if fits || policy == RedundantRowPolicy::Rescale {
        upper_factor = Some(T::max_of(T::one(), w_l1.clone()));
    }
    let matrix = s.vstack(&Matrix::new(1, n, row)?)?;
    Ok(RedundantRowReport {
        matrix,
        w,
        w_l1,
        upper_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hsb::{compute_hsb, HsbOptions};
    use crate::scalar::Rational;
    use crate::zoo::{hypercube_slack, hypercube_slack_redundant, simplex_slack};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn hsb(s: &Matrix<f64>) -> f64 {
        compute_hsb(s, &HsbOptions::default()).unwrap().value
    }

    #[test]
    fn identity_scaling_is_tight() {
        let s = Matrix::<f64>::from_i64(&[&[1, 2], &[0, 3]]).unwrap();
        let (lo, hi) = scaling_sandwich(&s, &DiagonalScaling::identity(2, 2), &1.5).unwrap();
        assert_eq!((lo, hi), (1.5, 1.5));
    }

    #[test]
    fn scaled_identity_is_a_simplex() {
        let s = Matrix::<Rational>::identity(3).unwrap();
        let d = DiagonalScaling::new(vec![r(2, 1), r(1, 1), r(1, 1)], vec![r(1, 1); 3]).unwrap();
        let scaled = apply_scaling(&s, &d).unwrap();
        assert_eq!(scaled, simplex_slack(2, r(2, 1)).unwrap().matrix);
        let (lo, hi) = scaling_sandwich(&s, &d, &r(3, 1)).unwrap();
        assert!(lo <= r(2, 1) && r(2, 1) <= hi);
        assert!(DiagonalScaling::new(vec![r(0, 1)], vec![r(1, 1)]).is_err());
    }

    #[test]
    fn normalization_examples() {
        let simplex = simplex_slack(3, r(5, 2)).unwrap().matrix;
        assert_eq!(normalize_rows(&simplex), Matrix::identity(4).unwrap());
        let ones = Matrix::<Rational>::ones(2, 3).unwrap();
        assert_eq!(normalize_rows_then_cols(&ones), ones);
        let z = Matrix::<Rational>::from_i64(&[&[0, 0], &[2, 4]]).unwrap();
        assert_eq!(
            normalize_rows(&z),
            Matrix::from_rows(vec![vec![r(0, 1), r(0, 1)], vec![r(1, 2), r(1, 1)]]).unwrap()
        );
        assert_eq!(
            normalize_cols(&z),
            Matrix::from_i64(&[&[0, 0], &[1, 1]]).unwrap()
        );
        let (out, d) = normalize_both(&z, NormalizationOrder::ColsFirst);
        assert_eq!(apply_scaling(&z, &d).unwrap(), out);
    }

    #[test]
    fn hypercube_redundant_row_needs_allow() {
        let s = hypercube_slack::<Rational>(2).unwrap().matrix;
        let w = vec![r(1, 1), r(1, 1), r(0, 1), r(0, 1)];
        assert!(add_redundant_row(&s, &w, RedundantRowPolicy::Reject).is_err());
        let report = add_redundant_row(&s, &w, RedundantRowPolicy::Allow).unwrap();
        assert_eq!(
            report.matrix,
            hypercube_slack_redundant::<Rational>(2).unwrap().matrix
        );
        assert!(report.upper_factor.is_none());
        let rescaled = add_redundant_row(&s, &w, RedundantRowPolicy::Rescale).unwrap();
        assert_eq!(rescaled.w_l1, r(1, 1));
        assert_eq!(rescaled.bracket(&r(4, 1)), Some((r(4, 1), r(4, 1))));
        assert!(add_redundant_row(
            &s,
            &[r(-1, 1), r(0, 1), r(0, 1), r(0, 1)],
            RedundantRowPolicy::Allow
        )
        .is_err());
    }

    #[test]
    fn small_weights_leave_hsb_unchanged() {
        let s = Matrix::<f64>::from_i64(&[&[1, 0, 2], &[0, 3, 1], &[2, 1, 0]]).unwrap();
        let base = hsb(&s);
        for w in [vec![0.3, 0.0, 0.0], vec![0.2, 0.5, 0.3]] {
            let report = add_redundant_row(&s, &w, RedundantRowPolicy::Reject).unwrap();
            assert!((hsb(&report.matrix) - base).abs() < 1e-6);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn scaling_sandwich_holds(
            entries in prop::collection::vec(0u8..=4, 9),
            d1 in prop::collection::vec(1u8..=16, 3),
            d2 in prop::collection::vec(1u8..=16, 3),
        ) {
            let s = Matrix::new(3, 3, entries.iter().map(|&v| v as f64).collect()).unwrap();
            prop_assume!(!s.is_zero());
            let d = DiagonalScaling::new(
                d1.iter().map(|&v| v as f64 / 4.0).collect(),
                d2.iter().map(|&v| v as f64 / 4.0).collect(),
            ).unwrap();
            let (lo, hi) = scaling_sandwich(&s, &d, &hsb(&s)).unwrap();
            let scaled = hsb(&apply_scaling(&s, &d).unwrap());
            prop_assert!(lo <= scaled + 1e-6 && scaled <= hi + 1e-6);
        }
    }
}
