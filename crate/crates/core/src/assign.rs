//! Rectangular linear assignment with forbidden pairs.
//!
//! Solves min-cost assignment of rows to columns where entries of
//! `f64::INFINITY` are forbidden, by successive shortest augmenting paths
//! over reduced costs (Jonker-Volgenant-family, dense O(n^3)). Rows that
//! cannot reach any column through finite entries stay unassigned; among
//! all assignments of maximum cardinality the returned one has minimum
//! total cost.
//!
//! Matrices here are scene-sized (detections x tracks), so the dense
//! formulation is the right trade: no epsilon scaling, no sparse
//! bookkeeping, and exact optimality that a brute-force oracle can
//! confirm.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AssignError {
    #[error("cost matrix dimensions {rows}x{cols} do not match data length {len}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    #[error("cost at ({0}, {1}) is NaN or negative")]
    BadCost(usize, usize),
}

/// Dense row-major cost matrix; `f64::INFINITY` marks a forbidden pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<CostMatrix, AssignError> {
        if data.len() != rows * cols {
            return Err(AssignError::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        for (k, &v) in data.iter().enumerate() {
            if v.is_nan() || v < 0.0 {
                return Err(AssignError::BadCost(k / cols.max(1), k % cols.max(1)));
            }
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

/// An optimal assignment: `row_to_col[r]` is the column taken by row `r`,
/// `None` when the row is unassigned. `total_cost` sums the assigned
/// entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub row_to_col: Vec<Option<usize>>,
    pub total_cost: f64,
}

impl Assignment {
    pub fn assigned_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_to_col
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| (r, c)))
    }
}

/// Solves the assignment problem on `costs`.
///
/// The rectangular gated problem is embedded in a square one: every row
/// gains a private dummy column priced at one unit above the sum of all
/// finite entries (so taking any real pair always beats staying
/// unassigned, which makes max-cardinality-then-min-cost a single
/// objective), and dummy rows absorb unused columns for free. The square
/// problem is always feasible, so the augmenting-path search never dead-
/// ends and greedy row-by-row augmentation is globally optimal.
pub fn solve(costs: &CostMatrix) -> Assignment {
    let (nr, nc) = (costs.rows, costs.cols);
    if nr == 0 || nc == 0 {
        return Assignment {
            row_to_col: vec![None; nr],
            total_cost: 0.0,
        };
    }
    let sum_finite: f64 = costs.data.iter().filter(|v| v.is_finite()).sum();
    let unassigned_penalty = sum_finite + 1.0;

    let n = nr + nc;
    let mut sq = vec![f64::INFINITY; n * n];
    for r in 0..nr {
        for c in 0..nc {
            sq[r * n + c] = costs.at(r, c);
        }
        sq[r * n + nc + r] = unassigned_penalty;
    }
    for i in 0..nc {
        let r = nr + i;
        sq[r * n + i] = 0.0;
        for j in nc..n {
            sq[r * n + j] = 0.0;
        }
    }

    let col_at_row = solve_square(n, &sq);
    let mut row_to_col = vec![None; nr];
    let mut total_cost = 0.0;
    for r in 0..nr {
        let c = col_at_row[r];
        if c < nc {
            row_to_col[r] = Some(c);
            total_cost += costs.at(r, c);
        }
    }
    Assignment {
        row_to_col,
        total_cost,
    }
}

/// Min-cost perfect matching on a feasible square matrix by successive
/// shortest augmenting paths over reduced costs. Returns the column taken
/// by each row.
fn solve_square(n: usize, cost: &[f64]) -> Vec<usize> {
    let at = |r: usize, c: usize| cost[r * n + c];
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut row_at_col: Vec<Option<usize>> = vec![None; n];
    let mut col_at_row: Vec<Option<usize>> = vec![None; n];

    let mut shortest = vec![f64::INFINITY; n];
    let mut path_row = vec![0usize; n];
    let mut in_tree_row = vec![false; n];
    let mut in_tree_col = vec![false; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);

    for start in 0..n {
        shortest.iter_mut().for_each(|d| *d = f64::INFINITY);
        in_tree_row.iter_mut().for_each(|b| *b = false);
        in_tree_col.iter_mut().for_each(|b| *b = false);
        remaining.clear();
        remaining.extend(0..n);

        let mut min_val = 0.0f64;
        let mut i = start;
        let sink;

        loop {
            in_tree_row[i] = true;
            let mut lowest = f64::INFINITY;
            let mut lowest_at = usize::MAX;
            for (slot, &j) in remaining.iter().enumerate() {
                let reduced = min_val + at(i, j) - u[i] - v[j];
                if reduced < shortest[j] {
                    shortest[j] = reduced;
                    path_row[j] = i;
                }
                if shortest[j] < lowest || (shortest[j] == lowest && row_at_col[j].is_none()) {
                    lowest = shortest[j];
                    lowest_at = slot;
                }
            }
            debug_assert!(
                lowest.is_finite(),
                "padded assignment problem must stay feasible"
            );
            min_val = lowest;
            let j = remaining[lowest_at];
            remaining.swap_remove(lowest_at);
            in_tree_col[j] = true;
            match row_at_col[j] {
                None => {
                    sink = j;
                    break;
                }
                Some(r) => i = r,
            }
        }

        // dual update keeps every reduced cost nonnegative and the new
        // alternating path tight
        u[start] += min_val;
        for r in 0..n {
            if in_tree_row[r] && r != start {
                u[r] += min_val - shortest[col_at_row[r].expect("tree rows are matched")];
            }
        }
        for j in 0..n {
            if in_tree_col[j] {
                v[j] -= min_val - shortest[j];
            }
        }

        // flip the alternating path back to the start row
        let mut j = sink;
        loop {
            let r = path_row[j];
            row_at_col[j] = Some(r);
            let prev = col_at_row[r].replace(j);
            if r == start {
                break;
            }
            j = prev.expect("interior path rows were matched");
        }
    }

    col_at_row.into_iter().map(|c| c.expect("perfect matching")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> CostMatrix {
        CostMatrix::new(rows, cols, data.to_vec()).unwrap()
    }

    /// Exhaustive reference: enumerate every injective partial map
    /// rows -> cols over finite entries; maximize cardinality, then
    /// minimize cost.
    fn brute_force(costs: &CostMatrix) -> (usize, f64) {
        fn rec(
            costs: &CostMatrix,
            row: usize,
            used: &mut Vec<bool>,
            matched: usize,
            cost: f64,
            best: &mut (usize, f64),
        ) {
            if row == costs.rows() {
                if matched > best.0 || (matched == best.0 && cost < best.1) {
                    *best = (matched, cost);
                }
                return;
            }
            rec(costs, row + 1, used, matched, cost, best); // leave row unmatched
            for c in 0..costs.cols() {
                if !used[c] && costs.at(row, c).is_finite() {
                    used[c] = true;
                    rec(costs, row + 1, used, matched + 1, cost + costs.at(row, c), best);
                    used[c] = false;
                }
            }
        }
        let mut best = (0usize, f64::INFINITY);
        let mut used = vec![false; costs.cols()];
        rec(costs, 0, &mut used, 0, 0.0, &mut best);
        if best.0 == 0 {
            best.1 = 0.0;
        }
        (best.0, best.1)
    }

    #[test]
    fn trivial_single_pair() {
        let a = solve(&mat(1, 1, &[500.0]));
        assert_eq!(a.row_to_col, vec![Some(0)]);
        assert_eq!(a.total_cost, 500.0);
    }

    #[test]
    fn forbidden_row_unassigned() {
        let a = solve(&mat(1, 1, &[f64::INFINITY]));
        assert_eq!(a.row_to_col, vec![None]);
        assert_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn prefers_cheap_cross_pairing() {
        // off-diagonal is cheaper in total
        let a = solve(&mat(2, 2, &[10.0, 1.0, 1.0, 10.0]));
        assert_eq!(a.row_to_col, vec![Some(1), Some(0)]);
        assert_eq!(a.total_cost, 2.0);
    }

    #[test]
    fn rerouting_through_matched_column() {
        // row 1 only fits col 0; row 0 must give way to col 1
        let a = solve(&mat(2, 2, &[1.0, 5.0, 2.0, f64::INFINITY]));
        assert_eq!(a.row_to_col, vec![Some(1), Some(0)]);
        assert_eq!(a.total_cost, 7.0);
    }

    #[test]
    fn maximizes_cardinality_before_cost() {
        // matching both rows costs 5001; matching only row 0 costs 1.
        // cardinality wins.
        let a = solve(&mat(
            2,
            2,
            &[1.0, 5000.0, 1.0, f64::INFINITY],
        ));
        assert_eq!(a.row_to_col, vec![Some(1), Some(0)]);
    }

    #[test]
    fn conflict_leaves_one_unassigned() {
        // both rows can only use col 0
        let a = solve(&mat(2, 2, &[3.0, f64::INFINITY, 1.0, f64::INFINITY]));
        let assigned: Vec<_> = a.assigned_pairs().collect();
        assert_eq!(assigned, vec![(1, 0)]);
        assert_eq!(a.total_cost, 1.0);
    }

    #[test]
    fn rectangular_more_rows_than_cols() {
        let a = solve(&mat(3, 2, &[4.0, 9.0, 2.0, 3.0, 8.0, 1.0]));
        let (card, cost) = brute_force(&mat(3, 2, &[4.0, 9.0, 2.0, 3.0, 8.0, 1.0]));
        assert_eq!(a.assigned_pairs().count(), card);
        assert_eq!(a.total_cost, cost);
    }

    #[test]
    fn matches_brute_force_on_random_gated_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..200 {
            let nr = rng.gen_range(1..=6);
            let nc = rng.gen_range(1..=6);
            let data: Vec<f64> = (0..nr * nc)
                .map(|_| {
                    if rng.gen_bool(0.35) {
                        f64::INFINITY
                    } else {
                        // small integers make cost equality exact
                        rng.gen_range(0..100) as f64
                    }
                })
                .collect();
            let m = mat(nr, nc, &data);
            let a = solve(&m);
            let (card, cost) = brute_force(&m);
            assert_eq!(
                a.assigned_pairs().count(),
                card,
                "case {case}: cardinality mismatch on {m:?}"
            );
            assert_eq!(a.total_cost, cost, "case {case}: cost mismatch on {m:?}");
            // gate respected: no assigned pair is forbidden
            for (r, c) in a.assigned_pairs() {
                assert!(m.at(r, c).is_finite());
            }
            // one-to-one
            let mut seen = vec![false; nc];
            for (_, c) in a.assigned_pairs() {
                assert!(!seen[c]);
                seen[c] = true;
            }
        }
    }

    #[test]
    fn rejects_bad_matrix() {
        assert!(CostMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(CostMatrix::new(1, 2, vec![1.0, -2.0]).is_err());
        assert!(CostMatrix::new(1, 1, vec![f64::NAN]).is_err());
    }
}
