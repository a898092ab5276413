//! Symmetric tridiagonal solves for the 1-D equilibrium problems.

/// Solves the symmetric tridiagonal system with diagonal `diag`, off-diagonal
/// `off` (length n − 1) and right-hand side `rhs` by Thomas elimination.
///
/// Returns `None` when a pivot is not safely positive, i.e. the matrix is not
/// positive definite to working precision.
pub fn solve_spd(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(off.len() + 1, n.max(1));
    debug_assert_eq!(rhs.len(), n);
    if n == 0 {
        return Some(Vec::new());
    }
    let scale = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let floor = scale * 1e-13;
    let mut pivots = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut p = diag[0];
    if !(p > floor) {
        return None;
    }
    pivots.push(p);
    y.push(rhs[0]);
    for i in 1..n {
        let l = off[i - 1] / pivots[i - 1];
        p = diag[i] - l * off[i - 1];
        if !(p > floor) {
            return None;
        }
        pivots.push(p);
        y.push(rhs[i] - l * y[i - 1]);
    }
    let mut x = vec![0.0; n];
    x[n - 1] = y[n - 1] / pivots[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (y[i] - off[i] * x[i + 1]) / pivots[i];
    }
    Some(x)
}
