//! Shared test oracles, independent of the library's linear-algebra
//! backend.

use nalgebra::DMatrix;

/// One-sided Jacobi SVD: returns `(U, sigma, V)` with `A = U S V^T`,
/// singular values unsorted. Plain textbook sweeps; used to cross-check
/// eigenvalue and least-squares paths.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let mut work = a.clone();
    let n = work.ncols();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let col_p = work.column(p).clone_owned();
                let col_q = work.column(q).clone_owned();
                let app = col_p.dot(&col_p);
                let aqq = col_q.dot(&col_q);
                let apq = col_p.dot(&col_q);
                off = off.max(apq.abs() / (app * aqq).sqrt().max(1e-300));
                if apq == 0.0 {
                    continue;
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for row in 0..work.nrows() {
                    let xp = work[(row, p)];
                    let xq = work[(row, q)];
                    work[(row, p)] = c * xp - s * xq;
                    work[(row, q)] = s * xp + c * xq;
                }
                for row in 0..n {
                    let xp = v[(row, p)];
                    let xq = v[(row, q)];
                    v[(row, p)] = c * xp - s * xq;
                    v[(row, q)] = s * xp + c * xq;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sigma = vec![0.0f64; n];
    let mut u = DMatrix::<f64>::zeros(work.nrows(), n);
    for c in 0..n {
        let norm = work.column(c).norm();
        sigma[c] = norm;
        if norm > 0.0 {
            for row in 0..work.nrows() {
                u[(row, c)] = work[(row, c)] / norm;
            }
        }
    }
    (u, sigma, v)
}

/// Unique scratch directory under the target-adjacent temp root.
pub fn scratch_dir(label: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir()
        .join("romlab_acceptance")
        .join(label);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
