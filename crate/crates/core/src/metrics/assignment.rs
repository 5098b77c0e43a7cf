//! Exact minimum-cost assignment on square cost matrices.

/// Solves the assignment problem on a row-major m x m cost matrix by
/// shortest augmenting paths with dual potentials, O(m^3) time. Returns
/// the column assigned to each row. Entries must be finite. Ties resolve
/// toward the lowest column index, so equal inputs give equal outputs.
pub(crate) fn min_cost_assignment(cost: &[f64], m: usize) -> Vec<usize> {
    debug_assert!(m >= 1);
    debug_assert_eq!(cost.len(), m * m);
    debug_assert!(cost.iter().all(|c| c.is_finite()));
    // Columns are 1-based; slot 0 stages the row currently seeking a
    // match. row_at[j] is the row matched to column j, MAX when free.
    let mut u = vec![0.0_f64; m];
    let mut v = vec![0.0_f64; m + 1];
    let mut row_at = vec![usize::MAX; m + 1];
    let mut way = vec![0_usize; m + 1];
    let mut minv = vec![f64::INFINITY; m + 1];
    let mut used = vec![false; m + 1];
    for i in 0..m {
        row_at[0] = i;
        let mut j0 = 0_usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_at[j0];
            let row = &cost[i0 * m..(i0 + 1) * m];
            let mut delta = f64::INFINITY;
            let mut j1 = 0_usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = row[j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            // Finite costs keep delta finite, so j1 lands on a real column.
            for j in 0..=m {
                if used[j] {
                    u[row_at[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_at[j0] == usize::MAX {
                break;
            }
        }
        // Flip the matching along the recorded augmenting path.
        loop {
            let j1 = way[j0];
            row_at[j0] = row_at[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0_usize; m];
    for j in 1..=m {
        assign[row_at[j]] = j - 1;
    }
    assign
}
