//! Square min-cost assignment, used as the relaxation bound in family
//! formation and as the machine-placement subproblem in cell formation.
//!
//! Costs are `i64`; entries at or above [`FORBIDDEN`] mark pairs that must
//! not be matched. The caller checks the returned total against
//! [`FORBIDDEN`] to detect that no allowed perfect matching exists.

/// Sentinel cost for a disallowed pairing. Large enough to dominate any
/// real total, small enough that n of them cannot overflow `i64`.
pub(crate) const FORBIDDEN: i64 = 1 << 40;

/// Minimum-cost perfect matching on an `n` x `n` cost matrix
/// (shortest-augmenting-path method, O(n^3)).
///
/// Returns the total cost and `row_to_col`. A total `>= FORBIDDEN` means
/// every perfect matching uses at least one disallowed pair.
pub(crate) fn solve_assignment(n: usize, cost: &dyn Fn(usize, usize) -> i64) -> (i64, Vec<usize>) {
    assert!(n > 0, "empty assignment problem");
    let inf = i64::MAX / 2;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut col_row = vec![0usize; n + 1]; // 1-based row matched to each column; 0 = free
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[col_row[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost(i, row_to_col[i])).sum();
    (total, row_to_col)
}
