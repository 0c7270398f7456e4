//! Dense complex linear solves for the tiny systems that appear here
//! (Vandermonde-type, n <= 4): Gaussian elimination with scaled partial
//! pivoting, plus a 1-norm condition estimate from the explicit inverse.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {0:.3e})")]
    Singular(f64),
    #[error("shape mismatch: matrix {rows}x{cols}, rhs {rhs}")]
    Shape { rows: usize, cols: usize, rhs: usize },
}

/// Solve A x = b with scaled partial pivoting. `a` is row-major, consumed.
pub fn solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) || b.len() != n {
        return Err(LinalgError::Shape {
            rows: n,
            cols: a.first().map_or(0, |r| r.len()),
            rhs: b.len(),
        });
    }
    // scale factors: max |entry| per row
    let scales: Vec<f64> = a
        .iter()
        .map(|r| r.iter().map(|x| x.norm()).fold(0.0, f64::max))
        .collect();
    if scales.iter().any(|&s| s == 0.0) {
        return Err(LinalgError::Singular(0.0));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        // pick the row with the largest scaled pivot
        let (best, pivot) = (col..n)
            .map(|r| (r, a[perm[r]][col].norm() / scales[perm[r]]))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pivot < 1e-14 {
            return Err(LinalgError::Singular(pivot));
        }
        perm.swap(col, best);
        let p = perm[col];
        let inv_pivot = Complex64::new(1.0, 0.0) / a[p][col];
        for r in (col + 1)..n {
            let row = perm[r];
            let factor = a[row][col] * inv_pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[p][k];
                a[row][k] -= factor * v;
            }
            let bp = b[p];
            b[row] -= factor * bp;
        }
    }
    // back substitution
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for col in (0..n).rev() {
        let row = perm[col];
        let mut acc = b[row];
        for k in (col + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[col] = acc / a[row][col];
    }
    Ok(x)
}

/// 1-norm condition number estimate via the explicit inverse; fine at these
/// sizes.
pub fn condition_1norm(a: &[Vec<Complex64>]) -> Result<f64, LinalgError> {
    let n = a.len();
    let norm1 = |m: &dyn Fn(usize, usize) -> Complex64| -> f64 {
        (0..n)
            .map(|j| (0..n).map(|i| m(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mut inv_cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        inv_cols.push(solve(a.to_vec(), e)?);
    }
    let na = norm1(&|i, j| a[i][j]);
    let ninv = norm1(&|i, j| inv_cols[j][i]);
    Ok(na * ninv)
}
