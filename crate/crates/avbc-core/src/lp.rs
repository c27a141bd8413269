//! Dense phase-1 simplex for small equality-form feasibility problems:
//! find x >= 0 with A x = b, or certify that none exists.
//!
//! Sized for the kernels this crate needs (tens of variables), favoring
//! robustness over speed: Bland's rule, explicit artificial variables, and a
//! residual threshold supplied by the caller.

const PIVOT_TOL: f64 = 1e-11;
const MAX_ITERS: usize = 100_000;

/// Returns a feasible point of {x >= 0 : A x = b} if the phase-1 optimum is
/// at most `tol`, else `None`. Rows may be linearly dependent.
pub(crate) fn feasible_point(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let m = a.len();
    assert_eq!(m, b.len(), "constraint matrix and rhs disagree");
    if m == 0 {
        return Some(Vec::new());
    }
    let n = a[0].len();
    assert!(a.iter().all(|r| r.len() == n), "ragged constraint matrix");

    // tableau: m constraint rows + objective row; columns = structural,
    // artificial, rhs. Rows are sign-flipped so the rhs is nonnegative and
    // the artificial basis is feasible.
    let cols = n + m + 1;
    let mut t = vec![vec![0.0; cols]; m + 1];
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][cols - 1] = flip * b[i];
    }
    // minimize the sum of artificials; with the artificial basis priced out,
    // the objective row holds -(column sums) and -(rhs sum).
    for j in 0..n {
        t[m][j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
    }
    t[m][cols - 1] = -(0..m).map(|i| t[i][cols - 1]).sum::<f64>();

    let mut basis: Vec<usize> = (n..n + m).collect();
    for _ in 0..MAX_ITERS {
        // Bland's rule: smallest-index column with a negative reduced cost
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -PIVOT_TOL) else {
            break;
        };
        let mut row: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > PIVOT_TOL {
                let ratio = t[i][cols - 1] / t[i][enter];
                let better = match row {
                    None => true,
                    Some(r) => {
                        ratio < best - PIVOT_TOL
                            || ((ratio - best).abs() <= PIVOT_TOL && basis[i] < basis[r])
                    }
                };
                if better {
                    best = ratio;
                    row = Some(i);
                }
            }
        }
        let Some(r) = row else {
            // phase-1 objective is bounded below by zero; a missing ratio row
            // only arises from numerical breakdown
            return None;
        };
        let piv = t[r][enter];
        for v in t[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..=m {
            if i != r {
                let f = t[i][enter];
                if f != 0.0 {
                    for j in 0..cols {
                        t[i][j] -= f * t[r][j];
                    }
                }
            }
        }
        basis[r] = enter;
    }

    let objective = -t[m][cols - 1];
    if objective > tol {
        return None;
    }
    let mut x = vec![0.0; n];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = t[i][cols - 1].max(0.0);
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_simple_feasible_system() {
        // x1 + x2 = 1, x1 - x2 = 0  =>  (0.5, 0.5)
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let x = feasible_point(&a, &[1.0, 0.0], 1e-9).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-9);
        assert!((x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn test_infeasible_system() {
        // x1 + x2 = 1 and x1 + x2 = 2 cannot both hold
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(feasible_point(&a, &[1.0, 2.0], 1e-9).is_none());
    }

    #[test]
    fn test_nonnegativity_binds() {
        // x1 = -1 has no nonnegative solution
        let a = vec![vec![1.0]];
        assert!(feasible_point(&a, &[-1.0], 1e-9).is_none());
        // but x1 = -(-1) after sign flip is fine
        let x = feasible_point(&[vec![-1.0]], &[-1.0], 1e-9).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn test_redundant_rows_accepted() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![2.0, 0.0]];
        let x = feasible_point(&a, &[1.0, 1.0, 1.0], 1e-9).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-9);
        assert!((x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn test_degenerate_zero_rhs() {
        // 0 = 0 rows plus a real constraint
        let a = vec![vec![0.0, 0.0], vec![1.0, 2.0]];
        let x = feasible_point(&a, &[0.0, 2.0], 1e-9).unwrap();
        assert!((x[0] + 2.0 * x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn test_near_feasible_within_tolerance() {
        // residual 1e-12 should count as feasible at tol 1e-9
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(feasible_point(&a, &[1.0, 1.0 + 1e-12], 1e-9).is_some());
        assert!(feasible_point(&a, &[1.0, 1.0 + 1e-6], 1e-9).is_none());
    }
}
