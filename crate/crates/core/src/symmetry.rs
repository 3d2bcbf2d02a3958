//! Row and column permutations that leave a matrix unchanged.
//!
//! hsb is a convex program whose feasible set is invariant under any
//! automorphism of S, so averaging an optimal X or decomposition over the
//! group keeps it optimal. The engine uses this to solve over cell orbits.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{HsbError, Result};
use crate::matrix::{Matrix, Rectangle};
use crate::scalar::Scalar;

/// A pair of permutations with `S[rows[i]][cols[j]] = S[i][j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automorphism {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Automorphism {
    pub fn identity(m: usize, n: usize) -> Self {
        Automorphism {
            rows: (0..m).collect(),
            cols: (0..n).collect(),
        }
    }

    pub fn image(&self, rect: &Rectangle) -> Rectangle {
        let (m, n) = rect.ambient();
        Rectangle::new(
            rect.rows().iter().map(|&i| self.rows[i]).collect(),
            rect.cols().iter().map(|&j| self.cols[j]).collect(),
            m,
            n,
        )
        .expect("permutation keeps a rectangle nonempty and in range")
    }

    fn fixes<T: Scalar>(&self, s: &Matrix<T>) -> bool {
        let (m, n) = s.shape();
        is_permutation(&self.rows, m)
            && is_permutation(&self.cols, n)
            && (0..m).all(|i| (0..n).all(|j| s.get(self.rows[i], self.cols[j]) == s.get(i, j)))
    }
}

fn is_permutation(p: &[usize], len: usize) -> bool {
    let mut seen = vec![false; len];
    p.len() == len
        && p.iter()
            .all(|&v| v < len && !std::mem::replace(&mut seen[v], true))
}

/// Finds a column permutation completing `rows` to an automorphism of S,
/// by matching each permuted column against the columns of S.
pub fn complete_row_permutation<T: Scalar>(s: &Matrix<T>, rows: &[usize]) -> Option<Automorphism> {
    let (m, n) = s.shape();
    if !is_permutation(rows, m) {
        return None;
    }
    let key = |col: &mut dyn Iterator<Item = &T>| {
        col.map(|v| {
            if v.is_zero() {
                "0".to_string()
            } else {
                v.to_string()
            }
        })
        .collect::<Vec<_>>()
    };
    let mut by_column: HashMap<Vec<String>, Vec<usize>> = HashMap::new();
    for j in (0..n).rev() {
        by_column
            .entry(key(&mut (0..m).map(|i| s.get(i, j))))
            .or_default()
            .push(j);
    }
    let mut inverse = vec![0; m];
    for (i, &r) in rows.iter().enumerate() {
        inverse[r] = i;
    }
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let image = key(&mut (0..m).map(|r| s.get(inverse[r], j)));
        cols.push(by_column.get_mut(&image)?.pop()?);
    }
    Some(Automorphism {
        rows: rows.to_vec(),
        cols,
    })
}

/// A permutation group acting on the cells of an m×n matrix, given by
/// generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryGroup {
    shape: (usize, usize),
    generators: Vec<Automorphism>,
}

impl SymmetryGroup {
    pub fn trivial(m: usize, n: usize) -> Self {
        SymmetryGroup {
            shape: (m, n),
            generators: Vec::new(),
        }
    }

    pub fn new<T: Scalar>(s: &Matrix<T>, generators: Vec<Automorphism>) -> Result<Self> {
        for (k, g) in generators.iter().enumerate() {
            if !g.fixes(s) {
                return Err(HsbError::InvalidArgument(format!(
                    "symmetry generator {} is not an automorphism of the matrix",
                    k + 1
                )));
            }
        }
        Ok(SymmetryGroup {
            shape: s.shape(),
            generators,
        })
    }

    /// Completes each row permutation with a matching column permutation.
    pub fn from_row_permutations<T: Scalar>(s: &Matrix<T>, perms: &[Vec<usize>]) -> Result<Self> {
        let generators = perms
            .iter()
            .enumerate()
            .map(|(k, p)| {
                complete_row_permutation(s, p).ok_or_else(|| {
                    HsbError::InvalidArgument(format!(
                        "row permutation {} extends to no automorphism of the matrix",
                        k + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(s, generators)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn generators(&self) -> &[Automorphism] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    /// Re-checks every generator against `s`.
    pub fn check<T: Scalar>(&self, s: &Matrix<T>) -> Result<()> {
        if self.shape != s.shape() {
            return Err(HsbError::dims(self.shape, s.shape()));
        }
        Self::new(s, self.generators.clone()).map(|_| ())
    }

    /// Orbit label of each cell (row-major); labels are the smallest cell
    /// index in the orbit.
    pub fn cell_orbits(&self) -> Vec<usize> {
        let (m, n) = self.shape;
        let mut parent: Vec<usize> = (0..m * n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for g in &self.generators {
            for i in 0..m {
                for j in 0..n {
                    let a = find(&mut parent, i * n + j);
                    let b = find(&mut parent, g.rows[i] * n + g.cols[j]);
                    if a != b {
                        let (lo, hi) = (a.min(b), a.max(b));
                        parent[hi] = lo;
                    }
                }
            }
        }
        (0..m * n).map(|c| find(&mut parent, c)).collect()
    }

    /// All images of `rect`, sorted.
    pub fn rectangle_orbit(&self, rect: &Rectangle) -> Vec<Rectangle> {
        let mut seen = BTreeSet::from([rect.clone()]);
        let mut queue = VecDeque::from([rect.clone()]);
        while let Some(r) = queue.pop_front() {
            for g in &self.generators {
                let image = g.image(&r);
                if seen.insert(image.clone()) {
                    queue.push_back(image);
                }
            }
        }
        seen.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn int(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from_ratio(v, 1)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn completes_identity_symmetry() {
        let s = int(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let g = complete_row_permutation(&s, &[1, 2, 0]).unwrap();
        assert_eq!(g.cols, vec![1, 2, 0]);
        let group = SymmetryGroup::new(&s, vec![g]).unwrap();
        let orbits = group.cell_orbits();
        assert_eq!(orbits.iter().collect::<BTreeSet<_>>().len(), 3);
        assert_eq!(orbits[0], orbits[4]);
        assert_eq!(orbits[1], orbits[5]);
    }

    #[test]
    fn rejects_non_automorphisms() {
        let s = int(&[&[2, 0], &[0, 1]]);
        assert!(complete_row_permutation(&s, &[1, 0]).is_none());
        let bad = Automorphism {
            rows: vec![1, 0],
            cols: vec![1, 0],
        };
        assert!(SymmetryGroup::new(&s, vec![bad]).is_err());
        assert!(SymmetryGroup::from_row_permutations(&s, &[vec![0, 0]]).is_err());
    }

    #[test]
    fn duplicate_columns_are_matched_once_each() {
        let s = int(&[&[1, 1, 0], &[0, 0, 1]]);
        let g = complete_row_permutation(&s, &[0, 1]).unwrap();
        let mut cols = g.cols.clone();
        cols.sort();
        assert_eq!(cols, vec![0, 1, 2]);
    }

    #[test]
    fn rectangle_orbits() {
        let s = int(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let group =
            SymmetryGroup::from_row_permutations(&s, &[vec![1, 2, 0], vec![1, 0, 2]]).unwrap();
        let r = Rectangle::new(vec![0], vec![0, 1], 3, 3).unwrap();
        assert_eq!(group.rectangle_orbit(&r).len(), 6);
        assert_eq!(
            group.rectangle_orbit(&Rectangle::full(3, 3).unwrap()).len(),
            1
        );
    }
}
