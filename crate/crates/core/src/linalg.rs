//! Small dense real solver: Gaussian elimination with partial pivoting.
//!
//! The systems here are tiny (N <= 6 unknowns from the exceptional-point
//! design equations and Newton corrections), so a plain row-major solve is
//! all that is needed.

use crate::{Error, Result};

/// Solve `a x = b` in place for a square row-major matrix.
pub fn solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));

    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col][col].abs();
        for row in col + 1..n {
            let v = a[row][col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::InvalidInput(format!(
                "singular or non-finite linear system (pivot column {col})"
            )));
        }
        if pivot != col {
            a.swap(col, pivot);
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_pivoting_case() {
        // First pivot is zero; elimination must swap rows.
        let mut a = vec![vec![0.0, 2.0], vec![3.0, -1.0]];
        let mut b = vec![4.0, 5.0];
        let x = solve(&mut a, &mut b).unwrap();
        assert!((x[0] - 7.0 / 3.0).abs() < 1e-14);
        assert!((x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn solves_vandermonde_in_powers() {
        // sum_m (m tau)^k x_m = rhs_k, the shape used by the design solve.
        let tau = 0.7;
        let n = 4;
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|k| (0..n).map(|m| (m as f64 * tau).powi(k as i32)).collect())
            .collect();
        let mut b = vec![1.0, 0.5, -0.25, 0.0];
        let x = solve(&mut a, &mut b).unwrap();
        for k in 0..n {
            let lhs: f64 = (0..n)
                .map(|m| (m as f64 * tau).powi(k as i32) * x[m])
                .sum();
            let rhs = [1.0, 0.5, -0.25, 0.0][k];
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_singular() {
        let mut a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        let mut b = vec![1.0, 2.0];
        assert!(solve(&mut a, &mut b).is_err());
    }
}
