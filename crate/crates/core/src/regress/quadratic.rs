//! Linear-quadratic closure fitted by truncated-SVD least squares.
//!
//! The ansatz `g_i(u) = sum_j A~_ij u_j + sum_jk B~_ijk u_j u_k` turns the
//! training MSE into one least-squares problem `min ||G x - f||` with
//! `G` of shape `(N_tr * r) x (r^2 + r^3)`; ill-conditioning is handled by
//! truncating the SVD of `G` at a chosen rank.
//!
//! Layout: row `j*r + i` covers sample j, component i; the unknowns are
//! `A~` row-major (i, j) in the first `r^2` columns, then `B~` row-major
//! (i, j, k).

use crate::closure::ClosureDataset;
use crate::error::{Error, Result};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};

/// Rank floor relative to the largest singular value.
const SV_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticClosure<T> {
    /// r x r.
    pub linear: DMatrix<T>,
    /// r^3 flattened, `quadratic[(i*r + j)*r + k] = B~_ijk`.
    pub quadratic: Vec<T>,
    pub svd_rank: usize,
}

impl<T: Real> QuadraticClosure<T> {
    pub fn output_dim(&self) -> usize {
        self.linear.nrows()
    }

    /// `r^2 + r^3`, the structural unknown count.
    pub fn parameter_count(&self) -> usize {
        let r = self.output_dim();
        r * r + r * r * r
    }

    pub fn predict(&self, input: &[T]) -> Vec<T> {
        let r = self.output_dim();
        let mut out = Vec::with_capacity(r);
        for i in 0..r {
            let mut acc = T::zero();
            for j in 0..r {
                acc += self.linear[(i, j)] * input[j];
                let base = (i * r + j) * r;
                for k in 0..r {
                    acc += self.quadratic[base + k] * input[j] * input[k];
                }
            }
            out.push(acc);
        }
        out
    }
}

/// Builds the block design matrix and target vector of the least-squares
/// problem.
fn build_system<T: Real>(dataset: &ClosureDataset<T>) -> (DMatrix<T>, DVector<T>) {
    let n = dataset.len();
    let r = dataset.resolved_dim;
    let cols = r * r + r * r * r;
    let mut g = DMatrix::<T>::zeros(n * r, cols);
    let mut f = DVector::<T>::zeros(n * r);
    for sample in 0..n {
        let u: Vec<T> = dataset.inputs.row(sample).iter().cloned().collect();
        for i in 0..r {
            let row = sample * r + i;
            f[row] = dataset.targets[(sample, i)];
            for j in 0..r {
                g[(row, i * r + j)] = u[j];
                for k in 0..r {
                    g[(row, r * r + (i * r + j) * r + k)] = u[j] * u[k];
                }
            }
        }
    }
    (g, f)
}

/// Number of singular values above the relative cutoff.
pub fn design_rank<T: Real>(dataset: &ClosureDataset<T>) -> usize {
    let (g, _) = build_system(dataset);
    let svd = g.svd(false, false);
    numerical_rank(svd.singular_values.as_slice())
}

fn numerical_rank<T: Real>(singular_values: &[T]) -> usize {
    let largest = singular_values
        .iter()
        .fold(T::zero(), |m, &s| m.max(s));
    if largest == T::zero() {
        return 0;
    }
    singular_values
        .iter()
        .filter(|&&s| s > T::of(SV_CUTOFF) * largest)
        .count()
}

/// Fits the quadratic ansatz with the SVD truncated at `svd_rank`.
pub fn fit_quadratic_tsvd<T: Real>(
    dataset: &ClosureDataset<T>,
    svd_rank: usize,
) -> Result<QuadraticClosure<T>> {
    let r = dataset.resolved_dim;
    let (g, f) = build_system(dataset);
    let columns = g.ncols();
    let svd = g.svd(true, true);
    let rank = numerical_rank(svd.singular_values.as_slice());
    if svd_rank == 0 || svd_rank > rank {
        return Err(Error::Argument(format!(
            "svd_rank must lie in 1..={rank} (numerical rank), got {svd_rank}"
        )));
    }

    let u = svd.u.as_ref().expect("left singular vectors requested");
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    // x = sum_{s < svd_rank} (u_s . f / sigma_s) v_s  (singular values are
    // sorted descending by nalgebra).
    let mut x = DVector::<T>::zeros(columns);
    for s in 0..svd_rank {
        let coefficient = u.column(s).dot(&f) / svd.singular_values[s];
        for c in 0..columns {
            x[c] += coefficient * vt[(s, c)];
        }
    }

    let mut linear = DMatrix::<T>::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            linear[(i, j)] = x[i * r + j];
        }
    }
    let quadratic: Vec<T> = (0..r * r * r).map(|q| x[r * r + q]).collect();
    Ok(QuadraticClosure {
        linear,
        quadratic,
        svd_rank,
    })
}

/// Training residual `||G x - f||` of a fitted model.
pub fn residual_norm<T: Real>(dataset: &ClosureDataset<T>, model: &QuadraticClosure<T>) -> T {
    let n = dataset.len();
    let r = dataset.resolved_dim;
    let mut acc = T::zero();
    for j in 0..n {
        let u: Vec<T> = dataset.inputs.row(j).iter().cloned().collect();
        let pred = model.predict(&u);
        for i in 0..r {
            let e = dataset.targets[(j, i)] - pred[i];
            acc += e * e;
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn planted(n: usize, r: usize, seed: u64) -> (ClosureDataset<f64>, DMatrix<f64>, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let linear = DMatrix::from_fn(r, r, |_, _| rng.gen_range(-1.0..1.0));
        let quadratic: Vec<f64> = (0..r * r * r).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let inputs = DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.0..1.0));
        let mut targets = DMatrix::zeros(n, r);
        for s in 0..n {
            let u: Vec<f64> = inputs.row(s).iter().cloned().collect();
            for i in 0..r {
                let mut acc = 0.0;
                for j in 0..r {
                    acc += linear[(i, j)] * u[j];
                    for k in 0..r {
                        acc += quadratic[(i * r + j) * r + k] * u[j] * u[k];
                    }
                }
                targets[(s, i)] = acc;
            }
        }
        (
            ClosureDataset {
                inputs,
                targets,
                times: (0..n).map(|j| j as f64).collect(),
                resolved_dim: r,
                unresolved_dim: r,
            },
            linear,
            quadratic,
        )
    }

    #[test]
    fn full_rank_recovers_planted_operators() {
        let (ds, linear, quadratic) = planted(200, 2, 1);
        let rank = design_rank(&ds);
        let model = fit_quadratic_tsvd(&ds, rank).unwrap();
        // The quadratic block is only identifiable up to symmetrization
        // (u_j u_k = u_k u_j), so compare predictions, not raw tensors.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let u: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut want = [0.0; 2];
            for i in 0..2 {
                for j in 0..2 {
                    want[i] += linear[(i, j)] * u[j];
                    for k in 0..2 {
                        want[i] += quadratic[(i * 2 + j) * 2 + k] * u[j] * u[k];
                    }
                }
            }
            let got = model.predict(&u);
            for i in 0..2 {
                assert!(
                    (got[i] - want[i]).abs() <= 1e-8,
                    "{} vs {}",
                    got[i],
                    want[i]
                );
            }
        }
    }

    #[test]
    fn truncation_residual_is_monotone() {
        let (ds, _, _) = planted(100, 2, 3);
        let rank = design_rank(&ds);
        let mut last = f64::INFINITY;
        for s in 1..=rank {
            let model = fit_quadratic_tsvd(&ds, s).unwrap();
            let res = residual_norm(&ds, &model);
            assert!(res <= last + 1e-9, "residual grew at rank {s}");
            last = res;
        }
        // Rank 1 is at least as bad as full rank.
        let low = residual_norm(&ds, &fit_quadratic_tsvd(&ds, 1).unwrap());
        let full = residual_norm(&ds, &fit_quadratic_tsvd(&ds, rank).unwrap());
        assert!(low >= full);
    }

    #[test]
    fn matches_pseudo_inverse_oracle() {
        // Independent oracle: one-sided Jacobi SVD plus explicit
        // pseudo-inverse application, truncated at the same rank. The
        // design is block-diagonal with two identical blocks, so singular
        // values come in pairs; an even rank keeps the truncation
        // subspace well defined.
        let (ds, _, _) = planted(100, 2, 4);
        let (g, f) = build_system(&ds);
        let subrank = 8;
        let model = fit_quadratic_tsvd(&ds, subrank).unwrap();

        let (u, s, v) = jacobi_svd(&g);
        let mut x = vec![0.0f64; g.ncols()];
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
        for &idx in order.iter().take(subrank) {
            let mut coeff = 0.0;
            for row in 0..g.nrows() {
                coeff += u[(row, idx)] * f[row];
            }
            coeff /= s[idx];
            for c in 0..g.ncols() {
                x[c] += coeff * v[(c, idx)];
            }
        }
        let r = 2;
        for i in 0..r {
            for j in 0..r {
                assert!(
                    (model.linear[(i, j)] - x[i * r + j]).abs() <= 1e-9,
                    "linear ({i},{j})"
                );
                for k in 0..r {
                    let q = (i * r + j) * r + k;
                    assert!(
                        (model.quadratic[q] - x[r * r + q]).abs() <= 1e-9,
                        "quadratic ({i},{j},{k})"
                    );
                }
            }
        }
    }

    #[test]
    fn out_of_range_rank_is_rejected() {
        let (ds, _, _) = planted(50, 2, 5);
        let rank = design_rank(&ds);
        assert!(matches!(
            fit_quadratic_tsvd(&ds, rank + 1),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            fit_quadratic_tsvd(&ds, 0),
            Err(Error::Argument(_))
        ));
    }

    /// One-sided Jacobi SVD (test oracle, independent of nalgebra's
    /// bidiagonalization path). Returns (U, sigma, V) with G = U S V^T.
    fn jacobi_svd(g: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
        let mut a = g.clone();
        let n = a.ncols();
        let mut v = DMatrix::<f64>::identity(n, n);
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    let ap = a.column(p).clone_owned();
                    let aq = a.column(q).clone_owned();
                    let app = ap.dot(&ap);
                    let aqq = aq.dot(&aq);
                    let apq = ap.dot(&aq);
                    off = off.max(apq.abs());
                    if apq.abs() <= 1e-30 {
                        continue;
                    }
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for row in 0..a.nrows() {
                        let xp = a[(row, p)];
                        let xq = a[(row, q)];
                        a[(row, p)] = c * xp - s * xq;
                        a[(row, q)] = s * xp + c * xq;
                    }
                    for row in 0..n {
                        let xp = v[(row, p)];
                        let xq = v[(row, q)];
                        v[(row, p)] = c * xp - s * xq;
                        v[(row, q)] = s * xp + c * xq;
                    }
                }
            }
            if off < 1e-14 {
                break;
            }
        }
        let mut sigma = vec![0.0f64; n];
        let mut u = DMatrix::<f64>::zeros(a.nrows(), n);
        for c in 0..n {
            let norm = a.column(c).norm();
            sigma[c] = norm;
            if norm > 0.0 {
                for row in 0..a.nrows() {
                    u[(row, c)] = a[(row, c)] / norm;
                }
            }
        }
        (u, sigma, v)
    }
}
