//! Linear assignment: exhaustive search with a lexicographic tie-break and an
//! O(n^3) Hungarian solver for larger problems.

use crate::error::{Error, Result};
use crate::formation::ShapePointSet;

/// Largest size accepted by [`ExactMethod::Exhaustive`].
pub const EXHAUSTIVE_MAX: usize = 12;

/// Sizes up to this use exhaustive search in [`exact_assignment`].
const AUTO_EXHAUSTIVE_MAX: usize = 9;

/// A bijection from agents (rows) to slots (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `slot_of[agent] = slot`.
    pub slot_of: Vec<usize>,
    /// Total cost; squared meters when built from shapes.
    pub cost: f64,
}

impl Assignment {
    pub fn identity(n: usize) -> Self {
        Assignment {
            slot_of: (0..n).collect(),
            cost: 0.0,
        }
    }

    /// Permutation scored against a cost matrix, summing rows in order.
    pub fn from_cost(slot_of: Vec<usize>, cost: &[Vec<f64>]) -> Self {
        let total = slot_of.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        Assignment {
            slot_of,
            cost: total,
        }
    }

    /// Permutation scored by total squared displacement between shapes.
    pub fn from_shapes(
        slot_of: Vec<usize>,
        current: &ShapePointSet,
        target: &ShapePointSet,
    ) -> Self {
        let total = slot_of
            .iter()
            .enumerate()
            .map(|(i, &j)| current.points[i].distance_sq(target.points[j]))
            .sum();
        Assignment {
            slot_of,
            cost: total,
        }
    }

    pub fn is_permutation(&self) -> bool {
        let n = self.slot_of.len();
        let mut seen = vec![false; n];
        self.slot_of
            .iter()
            .all(|&j| j < n && !std::mem::replace(&mut seen[j], true))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactMethod {
    /// Depth-first enumeration in lexicographic order; returns the
    /// lexicographically smallest optimal permutation. `n <= 12`.
    Exhaustive,
    /// Shortest augmenting paths with potentials; any `n`.
    Hungarian,
}

/// Squared distances between every current point (rows) and target slot
/// (columns).
pub fn squared_distance_matrix(
    current: &ShapePointSet,
    target: &ShapePointSet,
) -> Result<Vec<Vec<f64>>> {
    if current.len() != target.len() {
        return Err(Error::SizeMismatch {
            expected: current.len(),
            actual: target.len(),
        });
    }
    Ok(current
        .points
        .iter()
        .map(|c| target.points.iter().map(|t| c.distance_sq(*t)).collect())
        .collect())
}

fn check_square(cost: &[Vec<f64>]) -> Result<usize> {
    let n = cost.len();
    for (row, r) in cost.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                row,
                cols: r.len(),
            });
        }
        if r.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("cost matrix entry"));
        }
    }
    Ok(n)
}

/// Minimum-cost assignment. Small problems are solved exhaustively (so ties
/// resolve to the lexicographically smallest permutation); larger ones use
/// the Hungarian method.
pub fn exact_assignment(cost: &[Vec<f64>]) -> Result<Assignment> {
    let method = if cost.len() <= AUTO_EXHAUSTIVE_MAX {
        ExactMethod::Exhaustive
    } else {
        ExactMethod::Hungarian
    };
    exact_assignment_with(cost, method)
}

pub fn exact_assignment_with(cost: &[Vec<f64>], method: ExactMethod) -> Result<Assignment> {
    let n = check_square(cost)?;
    match method {
        ExactMethod::Exhaustive if n > EXHAUSTIVE_MAX => Err(Error::TooLargeForExhaustive {
            n,
            max: EXHAUSTIVE_MAX,
        }),
        ExactMethod::Exhaustive => Ok(exhaustive(cost)),
        ExactMethod::Hungarian => Ok(hungarian(cost)),
    }
}

fn exhaustive(cost: &[Vec<f64>]) -> Assignment {
    let n = cost.len();
    // suffix_min[i] = sum of row minima for rows i.., a valid lower bound
    let mut suffix_min = vec![0.0; n + 1];
    for i in (0..n).rev() {
        let m = cost[i].iter().copied().fold(f64::INFINITY, f64::min);
        suffix_min[i] = suffix_min[i + 1] + m;
    }
    struct Search<'a> {
        cost: &'a [Vec<f64>],
        suffix_min: Vec<f64>,
        used: Vec<bool>,
        current: Vec<usize>,
        best: Vec<usize>,
        best_cost: f64,
    }
    impl Search<'_> {
        fn go(&mut self, row: usize, partial: f64) {
            let n = self.cost.len();
            if row == n {
                if partial < self.best_cost {
                    self.best_cost = partial;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            for col in 0..n {
                if self.used[col] {
                    continue;
                }
                let next = partial + self.cost[row][col];
                // only strict improvements replace, so equal-cost branches
                // later in lexicographic order can be skipped
                if next + self.suffix_min[row + 1] >= self.best_cost {
                    continue;
                }
                self.used[col] = true;
                self.current.push(col);
                self.go(row + 1, next);
                self.current.pop();
                self.used[col] = false;
            }
        }
    }
    let mut s = Search {
        cost,
        suffix_min,
        used: vec![false; n],
        current: Vec::with_capacity(n),
        best: (0..n).collect(),
        best_cost: f64::INFINITY,
    };
    s.go(0, 0.0);
    Assignment::from_cost(s.best, cost)
}

fn hungarian(cost: &[Vec<f64>]) -> Assignment {
    let n = cost.len();
    if n == 0 {
        return Assignment::identity(0);
    }
    // 1-based potentials; column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut slot_of = vec![0; n];
    for j in 1..=n {
        slot_of[row_of_col[j] - 1] = j - 1;
    }
    Assignment::from_cost(slot_of, cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_dominant_is_identity() {
        let cost = vec![
            vec![0.0, 9.0, 9.0],
            vec![9.0, 1.0, 9.0],
            vec![9.0, 9.0, 2.0],
        ];
        let a = exact_assignment(&cost).unwrap();
        assert_eq!(a.slot_of, vec![0, 1, 2]);
        assert_eq!(a.cost, 3.0);
    }

    #[test]
    fn two_by_two() {
        let a = exact_assignment(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!((a.slot_of, a.cost), (vec![0, 1], 0.0));
        let a = exact_assignment(&[vec![5.0, 1.0], vec![2.0, 9.0]]).unwrap();
        assert_eq!((a.slot_of, a.cost), (vec![1, 0], 3.0));
    }

    #[test]
    fn ties_resolve_lexicographically() {
        let a = exact_assignment(&vec![vec![1.0; 4]; 4]).unwrap();
        assert_eq!(a.slot_of, vec![0, 1, 2, 3]);
        let cost = vec![
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
        ];
        // (2, 0, 1) is the unique zero-cost permutation
        assert_eq!(exact_assignment(&cost).unwrap().slot_of, vec![2, 0, 1]);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            exact_assignment(&[vec![1.0, 2.0], vec![3.0]]),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            exact_assignment_with(&vec![vec![0.0; 13]; 13], ExactMethod::Exhaustive),
            Err(Error::TooLargeForExhaustive { .. })
        ));
    }

    fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == cost.len() {
                *best = best.min(acc);
                return;
            }
            for c in 0..cost.len() {
                if !used[c] {
                    used[c] = true;
                    rec(cost, row + 1, used, acc + cost[row][c], best);
                    used[c] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
        best
    }

    #[test]
    fn hungarian_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(1..=7);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-50.0..100.0)).collect())
                .collect();
            let want = brute_force_min(&cost);
            let h = exact_assignment_with(&cost, ExactMethod::Hungarian).unwrap();
            let e = exact_assignment_with(&cost, ExactMethod::Exhaustive).unwrap();
            assert!(h.is_permutation() && e.is_permutation());
            assert!((h.cost - want).abs() < 1e-9, "{} vs {}", h.cost, want);
            assert!((e.cost - want).abs() < 1e-9);
        }
    }

    #[test]
    fn hungarian_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40;
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let a = exact_assignment(&cost).unwrap();
        assert!(a.is_permutation());
        // no improving 2-swap exists at an optimum
        for i in 0..n {
            for k in i + 1..n {
                let (ji, jk) = (a.slot_of[i], a.slot_of[k]);
                let delta = cost[i][jk] + cost[k][ji] - cost[i][ji] - cost[k][jk];
                assert!(delta >= -1e-12);
            }
        }
    }
}
