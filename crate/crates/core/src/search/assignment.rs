//! Maximum-weight one-to-one assignment (Hungarian method with potentials).

/// Solves `max Σ w[r][assign[r]]` over one-to-one assignments of the rows of
/// a `rows` x `cols` row-major weight matrix. When rows outnumber columns
/// some rows stay unassigned. Weights must be finite and non-negative, so a
/// zero-weight pair is as good as leaving both ends unmatched.
///
/// Returns the optimal total and, per row, the chosen column.
pub fn max_weight_assignment(weights: &[f64], rows: usize, cols: usize) -> (f64, Vec<Option<usize>>) {
    debug_assert_eq!(weights.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return (0.0, vec![None; rows]);
    }
    if rows > cols {
        let mut transposed = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                transposed[c * rows + r] = weights[r * cols + c];
            }
        }
        let (total, by_col) = solve(&transposed, cols, rows);
        let mut by_row = vec![None; rows];
        for (c, r) in by_col.into_iter().enumerate() {
            if let Some(r) = r {
                by_row[r] = Some(c);
            }
        }
        return (total, by_row);
    }
    solve(weights, rows, cols)
}

/// Requires `n <= m`. Minimizes negated weights; every row gets a column.
fn solve(weights: &[f64], n: usize, m: usize) -> (f64, Vec<Option<usize>>) {
    let cost = |i: usize, j: usize| -weights[(i - 1) * m + (j - 1)];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // owner[j]: row matched to column j (1-based, 0 = free).
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![None; n];
    for j in 1..=m {
        if owner[j] != 0 {
            assign[owner[j] - 1] = Some(j - 1);
        }
    }
    let total = assign
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| weights[r * m + c]))
        .sum();
    (total, assign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(weights: &[f64], rows: usize, cols: usize) -> f64 {
        fn go(r: usize, used: &mut Vec<bool>, w: &[f64], rows: usize, cols: usize) -> f64 {
            if r == rows {
                return 0.0;
            }
            let mut best = go(r + 1, used, w, rows, cols);
            for c in 0..cols {
                if !used[c] {
                    used[c] = true;
                    best = best.max(w[r * cols + c] + go(r + 1, used, w, rows, cols));
                    used[c] = false;
                }
            }
            best
        }
        go(0, &mut vec![false; cols], weights, rows, cols)
    }

    #[test]
    fn classic_instance() {
        #[rustfmt::skip]
        let w = [
            7.0, 5.0, 0.0,
            6.0, 2.0, 3.0,
            5.0, 0.0, 9.0,
        ];
        let (total, assign) = max_weight_assignment(&w, 3, 3);
        // 6 + 5 + 9.
        assert_eq!(total, 20.0);
        assert_eq!(assign, vec![Some(1), Some(0), Some(2)]);
    }

    #[test]
    fn more_rows_than_columns() {
        let w = [1.0, 3.0, 2.0];
        let (total, assign) = max_weight_assignment(&w, 3, 1);
        assert_eq!(total, 3.0);
        assert_eq!(assign, vec![None, Some(0), None]);
    }

    #[test]
    fn empty_sides() {
        assert_eq!(max_weight_assignment(&[], 0, 4), (0.0, vec![]));
        assert_eq!(max_weight_assignment(&[], 2, 0), (0.0, vec![None, None]));
    }

    proptest! {
        #[test]
        fn matches_enumeration(
            rows in 1..6usize,
            cols in 1..7usize,
            seed in prop::collection::vec(0.0..5.0f64, 42),
            zero_mask in any::<u64>(),
        ) {
            let w: Vec<f64> = (0..rows * cols)
                .map(|k| if zero_mask >> (k % 64) & 1 == 1 { 0.0 } else { seed[k % seed.len()] })
                .collect();
            let (total, assign) = max_weight_assignment(&w, rows, cols);
            prop_assert!((total - brute(&w, rows, cols)).abs() < 1e-9);
            let mut seen = vec![false; cols];
            for c in assign.into_iter().flatten() {
                prop_assert!(!seen[c]);
                seen[c] = true;
            }
        }
    }
}
