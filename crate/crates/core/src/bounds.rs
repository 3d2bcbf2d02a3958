//! Comparison bounds: rectangle covering number and real rank.

use crate::error::Result;
use crate::matrix::{Matrix, Rectangle};
use crate::scalar::Scalar;

/// Most support cells the set cover will look at.
pub const COVER_CELL_LIMIT: usize = 2000;
/// Most maximal rectangles generated before giving up on exactness.
pub const COVER_RECTANGLE_LIMIT: usize = 5000;
/// Default branch-and-bound budget of [`rectangle_cover_bound`].
pub const COVER_NODE_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverResult {
    /// Proven lower bound on the covering number (equal to `upper` when
    /// exact).
    pub lower: usize,
    /// Size of `cover`.
    pub upper: usize,
    pub exact: bool,
    pub cover: Vec<Rectangle>,
}

impl CoverResult {
    /// The value reported as the bound on rk+: the covering number when
    /// exact, the proven lower bound otherwise.
    pub fn bound(&self) -> usize {
        self.lower
    }
}

#[derive(Clone, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not_count(&self, other: &Bits) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & !b).count_ones())
            .sum()
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            (0..64)
                .filter(move |b| w >> b & 1 == 1)
                .map(move |b| k * 64 + b)
        })
    }
}

impl PartialEq for Bits {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}
impl Eq for Bits {}
impl std::hash::Hash for Bits {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

/// Maximal all-nonzero rectangles of S: the column sets closed under
/// intersection of row supports, each with every row containing it.
/// Returns `None` once more than `limit` exist.
fn maximal_rectangles<T: Scalar>(s: &Matrix<T>, limit: usize) -> Option<Vec<Rectangle>> {
    let (m, n) = s.shape();
    let supports: Vec<Bits> = (0..m)
        .map(|i| {
            let mut b = Bits::new(n);
            for j in 0..n {
                if !s.get(i, j).is_zero() {
                    b.set(j);
                }
            }
            b
        })
        .collect();
    let mut closed: Vec<Bits> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for b in &supports {
        if !b.is_empty() && seen.insert(b.clone()) {
            closed.push(b.clone());
        }
    }
    let mut k = 0;
    while k < closed.len() {
        for row in &supports {
            let meet = closed[k].and(row);
            if !meet.is_empty() && seen.insert(meet.clone()) {
                if closed.len() >= limit {
                    return None;
                }
                closed.push(meet);
            }
        }
        k += 1;
    }
    let mut rects: Vec<Rectangle> = closed
        .iter()
        .map(|cols| {
            let rows = (0..m).filter(|&i| cols.is_subset(&supports[i])).collect();
            Rectangle::new(rows, cols.ones().collect(), m, n).expect("nonempty closed set")
        })
        .collect();
    rects.sort();
    Some(rects)
}

struct CoverSearch<'a> {
    cells: usize,
    sets: &'a [Bits],
    /// `containing[c]`: sets covering support cell c.
    containing: Vec<Vec<usize>>,
    /// `compatible[c]` has bit d when some set covers both c and d.
    compatible: Vec<Bits>,
    best: Vec<usize>,
    nodes: u64,
    node_limit: u64,
    aborted: bool,
}

impl CoverSearch<'_> {
    /// Greedy fooling set among uncovered cells: no two can share a set.
    fn fooling_bound(&self, covered: &Bits) -> usize {
        let mut chosen: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..self.cells).filter(|&c| !covered.get(c)).collect();
        order.sort_by_key(|&c| self.containing[c].len());
        for c in order {
            if chosen.iter().all(|&d| !self.compatible[c].get(d)) {
                chosen.push(c);
            }
        }
        chosen.len()
    }

    /// Each uncovered cell pays 1/k, where k is the most uncovered cells
    /// an allowed set through it can take; a set then pays at most 1.
    /// `None` when some cell has no allowed set left.
    fn share_bound(&self, covered: &Bits, excluded: &[bool]) -> Option<usize> {
        let gain: Vec<u32> = self
            .sets
            .iter()
            .enumerate()
            .map(|(r, set)| {
                if excluded[r] {
                    0
                } else {
                    set.and_not_count(covered)
                }
            })
            .collect();
        let mut total = 0.0;
        for c in (0..self.cells).filter(|&c| !covered.get(c)) {
            let best = self.containing[c]
                .iter()
                .map(|&r| gain[r])
                .max()
                .unwrap_or(0);
            if best == 0 {
                return None;
            }
            total += 1.0 / f64::from(best);
        }
        Some((total - 1e-9).ceil().max(0.0) as usize)
    }

    fn search(&mut self, covered: &mut Bits, picked: &mut Vec<usize>, excluded: &mut Vec<bool>) {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            self.aborted = true;
            return;
        }
        let allowed = |c: usize| self.containing[c].iter().filter(|&&r| !excluded[r]).count();
        let Some(cell) = (0..self.cells)
            .filter(|&c| !covered.get(c))
            .min_by_key(|&c| allowed(c))
        else {
            if picked.len() < self.best.len() {
                self.best = picked.clone();
            }
            return;
        };
        let Some(share) = self.share_bound(covered, excluded) else {
            return;
        };
        let bound = share.max(self.fooling_bound(covered));
        if picked.len() + bound >= self.best.len() {
            return;
        }
        let mut options: Vec<usize> = self.containing[cell]
            .iter()
            .copied()
            .filter(|&r| !excluded[r])
            .collect();
        options.sort_by_key(|&r| std::cmp::Reverse(self.sets[r].and_not_count(covered)));
        let mut tried = Vec::new();
        for r in options {
            let before = covered.clone();
            for (w, v) in covered.0.iter_mut().zip(&self.sets[r].0) {
                *w |= v;
            }
            picked.push(r);
            self.search(covered, picked, excluded);
            picked.pop();
            *covered = before;
            if self.aborted {
                break;
            }
            // covers using r were all seen in this branch
            excluded[r] = true;
            tried.push(r);
        }
        for r in tried {
            excluded[r] = false;
        }
    }
}

/// Fewest support-contained rectangles covering the support of S, by
/// branch and bound over maximal rectangles with a fooling-set bound.
/// Past the size or search budget the result is flagged inexact and
/// carries the best bounds found.
pub fn rectangle_cover_bound<T: Scalar>(s: &Matrix<T>) -> Result<CoverResult> {
    rectangle_cover_bound_with_budget(s, COVER_NODE_LIMIT)
}

/// [`rectangle_cover_bound`] with at most `node_limit` search nodes.
pub fn rectangle_cover_bound_with_budget<T: Scalar>(
    s: &Matrix<T>,
    node_limit: u64,
) -> Result<CoverResult> {
    s.check_nonnegative()?;
    let (m, n) = s.shape();
    let support: Vec<usize> = (0..m * n).filter(|&c| !s.data()[c].is_zero()).collect();
    if support.is_empty() {
        return Ok(CoverResult {
            lower: 0,
            upper: 0,
            exact: true,
            cover: Vec::new(),
        });
    }
    let index_of = |cell: usize| support.binary_search(&cell).ok();
    let rects = if support.len() <= COVER_CELL_LIMIT {
        maximal_rectangles(s, COVER_RECTANGLE_LIMIT)
    } else {
        None
    };
    let Some(rects) = rects else {
        // rows of the support are a cover, and a greedy fooling set a bound
        let cover: Vec<Rectangle> = (0..m)
            .filter_map(|i| {
                let cols: Vec<usize> = (0..n).filter(|&j| !s.get(i, j).is_zero()).collect();
                Rectangle::new(vec![i], cols, m, n).ok()
            })
            .collect();
        let mut fooling: Vec<(usize, usize)> = Vec::new();
        for &c in &support {
            let (i, j) = (c / n, c % n);
            if fooling
                .iter()
                .all(|&(k, l)| s.get(i, l).is_zero() || s.get(k, j).is_zero())
            {
                fooling.push((i, j));
            }
        }
        return Ok(CoverResult {
            lower: fooling.len(),
            upper: cover.len(),
            exact: false,
            cover,
        });
    };
    let sets: Vec<Bits> = rects
        .iter()
        .map(|r| {
            let mut b = Bits::new(support.len());
            for c in r.cells() {
                b.set(index_of(c).expect("maximal rectangles avoid zeros"));
            }
            b
        })
        .collect();
    let cells = support.len();
    let mut containing = vec![Vec::new(); cells];
    for (k, set) in sets.iter().enumerate() {
        for c in set.ones() {
            containing[c].push(k);
        }
    }
    let compatible: Vec<Bits> = (0..cells)
        .map(|c| {
            let (i, j) = (support[c] / n, support[c] % n);
            let mut b = Bits::new(cells);
            for (d, &cell) in support.iter().enumerate() {
                let (k, l) = (cell / n, cell % n);
                if !s.get(i, l).is_zero() && !s.get(k, j).is_zero() {
                    b.set(d);
                }
            }
            b
        })
        .collect();

    // greedy cover as the first incumbent
    let mut covered = Bits::new(cells);
    let mut greedy = Vec::new();
    while (0..cells).any(|c| !covered.get(c)) {
        let r = (0..sets.len())
            .max_by_key(|&r| (sets[r].and_not_count(&covered), std::cmp::Reverse(r)))
            .expect("some set covers each cell");
        for (w, v) in covered.0.iter_mut().zip(&sets[r].0) {
            *w |= v;
        }
        greedy.push(r);
    }

    let mut search = CoverSearch {
        cells,
        sets: &sets,
        containing,
        compatible,
        best: greedy,
        nodes: 0,
        node_limit,
        aborted: false,
    };
    let none_excluded = vec![false; sets.len()];
    let root_bound = search.fooling_bound(&Bits::new(cells)).max(
        search
            .share_bound(&Bits::new(cells), &none_excluded)
            .unwrap_or(0),
    );
    if root_bound < search.best.len() {
        search.search(
            &mut Bits::new(cells),
            &mut Vec::new(),
            &mut none_excluded.clone(),
        );
    }
    let upper = search.best.len();
    let exact = !search.aborted || root_bound == upper;
    let mut cover: Vec<Rectangle> = search.best.iter().map(|&r| rects[r].clone()).collect();
    cover.sort();
    Ok(CoverResult {
        lower: if exact { upper } else { root_bound },
        upper,
        exact,
        cover,
    })
}

/// Rank of S. Exact arithmetic uses fraction-free (Bareiss) elimination;
/// floats use partial pivoting with a relative tolerance.
pub fn real_rank<T: Scalar>(s: &Matrix<T>) -> usize {
    let (m, n) = s.shape();
    let mut a = s.to_rows();
    let exact = T::is_exact();
    let eps = T::tol(1e-9) * T::max_of(T::one(), s.max_abs_entry());
    let mut prev = T::one();
    let mut rank = 0;
    for c in 0..n {
        if rank == m {
            break;
        }
        let pivot = if exact {
            (rank..m).find(|&r| !a[r][c].is_zero())
        } else {
            (rank..m).filter(|&r| a[r][c].abs() > eps).max_by(|&x, &y| {
                a[x][c]
                    .abs()
                    .partial_cmp(&a[y][c].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        };
        let Some(p) = pivot else { continue };
        a.swap(rank, p);
        let top = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            let f = row[c].clone();
            for j in c..n {
                row[j] = if exact {
                    (row[j].clone() * top[c].clone() - f.clone() * top[j].clone()) / prev.clone()
                } else {
                    row[j].clone() - f.clone() / top[c].clone() * top[j].clone()
                };
            }
        }
        if exact {
            prev = top[c].clone();
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::zoo::{hypercube_slack, spanning_tree_slack, SpanningTreeRows, WeightedGraph};
    use proptest::prelude::*;

    fn brute_cover(s: &Matrix<f64>) -> usize {
        let rects = maximal_rectangles(s, usize::MAX).unwrap();
        let support: Vec<usize> = (0..s.data().len())
            .filter(|&c| s.data()[c] != 0.0)
            .collect();
        for k in 1..=rects.len() {
            for pick in itertools::Itertools::combinations(0..rects.len(), k) {
                let mut hit = vec![false; s.data().len()];
                for &r in &pick {
                    rects[r].cells().for_each(|c| hit[c] = true);
                }
                if support.iter().all(|&c| hit[c]) {
                    return k;
                }
            }
        }
        0
    }

    #[test]
    fn cover_examples() {
        let id = Matrix::<f64>::identity(5).unwrap();
        let r = rectangle_cover_bound(&id).unwrap();
        assert_eq!((r.lower, r.upper, r.exact), (5, 5, true));
        let ones = Matrix::<f64>::ones(3, 4).unwrap();
        assert_eq!(rectangle_cover_bound(&ones).unwrap().bound(), 1);
        let zero = Matrix::<f64>::zeros(2, 2).unwrap();
        assert_eq!(rectangle_cover_bound(&zero).unwrap().bound(), 0);
    }

    #[test]
    fn cover_of_hypercube_and_k4() {
        let s = hypercube_slack::<Rational>(3).unwrap().matrix;
        let r = rectangle_cover_bound(&s).unwrap();
        assert!(r.exact);
        assert_eq!(r.upper, 6);
        let k4 = spanning_tree_slack(
            &WeightedGraph::<Rational>::complete(4).unwrap(),
            SpanningTreeRows::default(),
        )
        .unwrap();
        let r = rectangle_cover_bound(&k4.matrix).unwrap();
        assert!(r.exact);
        for rect in &r.cover {
            assert!(rect.cells().all(|c| k4.matrix.data()[c].is_pos()));
        }
        let r = rectangle_cover_bound_with_budget(&k4.matrix, 10).unwrap();
        assert!(!r.exact && r.lower <= 12 && 12 <= r.upper);
    }

    #[test]
    fn oversized_support_falls_back_to_fooling_set() {
        let blocks =
            Matrix::<f64>::from_fn(90, 90, |i, j| if i / 30 == j / 30 { 1.0 } else { 0.0 })
                .unwrap();
        let r = rectangle_cover_bound(&blocks).unwrap();
        assert_eq!((r.lower, r.upper, r.exact), (3, 90, false));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(real_rank(&Matrix::<Rational>::identity(4).unwrap()), 4);
        assert_eq!(real_rank(&Matrix::<f64>::ones(3, 5).unwrap()), 1);
        let p = [1i64, 2, 3];
        let ppt =
            Matrix::<Rational>::from_fn(3, 3, |i, j| Rational::from_ratio(p[i] * p[j], 1)).unwrap();
        assert_eq!(real_rank(&ppt), 1);
        assert_eq!(real_rank(&ppt.to_f64()), 1);
        assert_eq!(
            real_rank(&hypercube_slack::<Rational>(3).unwrap().matrix),
            4
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cover_matches_brute_force(bits in prop::collection::vec(0u8..3, 16)) {
            let s = Matrix::new(4, 4, bits.iter().map(|&b| f64::from(b.min(1))).collect()).unwrap();
            let r = rectangle_cover_bound(&s).unwrap();
            prop_assert!(r.exact);
            prop_assert_eq!(r.upper, brute_cover(&s));
        }

        #[test]
        fn rank_agrees_across_modes(entries in prop::collection::vec(-3i64..=3, 12)) {
            let q = Matrix::new(3, 4, entries.iter().map(|&v| Rational::from_ratio(v, 1)).collect()).unwrap();
            prop_assert_eq!(real_rank(&q), real_rank(&q.to_f64()));
        }
    }
}
