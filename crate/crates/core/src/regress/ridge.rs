//! Linear closure with L2-penalized weights (intercept unpenalized).

use crate::closure::ClosureDataset;
use crate::error::{Error, Result};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};

/// Per-component affine predictors `g_i(u) = beta_0 + sum_j beta_j u_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeClosure<T> {
    /// r x (r_in + 1); column 0 is the intercept.
    pub weights: DMatrix<T>,
    pub alpha: T,
}

impl<T: Real> RidgeClosure<T> {
    pub fn zero(outputs: usize, inputs: usize) -> Self {
        RidgeClosure {
            weights: DMatrix::zeros(outputs, inputs + 1),
            alpha: T::zero(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols() - 1
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len()
    }

    pub fn predict(&self, input: &[T]) -> Vec<T> {
        let r = self.output_dim();
        let mut out = Vec::with_capacity(r);
        for i in 0..r {
            let mut acc = self.weights[(i, 0)];
            for (j, &u) in input.iter().enumerate() {
                acc += self.weights[(i, j + 1)] * u;
            }
            out.push(acc);
        }
        out
    }
}

/// Solves the penalized normal equations
/// `(X^T X + alpha diag(0, 1, .., 1)) beta = X^T y` per target column,
/// with `X = [1 | U]`.
pub fn fit_ridge<T: Real>(dataset: &ClosureDataset<T>, alpha: T) -> Result<RidgeClosure<T>> {
    if alpha < T::zero() {
        return Err(Error::Argument("alpha must be nonnegative".into()));
    }
    let n = dataset.len();
    let r = dataset.resolved_dim;
    let p = r + 1;

    let mut design = DMatrix::<T>::zeros(n, p);
    for j in 0..n {
        design[(j, 0)] = T::one();
        for i in 0..r {
            design[(j, i + 1)] = dataset.inputs[(j, i)];
        }
    }
    let mut normal = design.transpose() * &design;
    for d in 1..p {
        normal[(d, d)] += alpha;
    }
    let chol = normal.cholesky().ok_or_else(|| {
        Error::Solver(
            "ridge normal equations are singular (alpha = 0 with rank-deficient inputs)".into(),
        )
    })?;

    let mut weights = DMatrix::<T>::zeros(r, p);
    for i in 0..r {
        let y = DVector::from_vec(dataset.target_column(i));
        let rhs = design.transpose() * y;
        let beta = chol.solve(&rhs);
        for d in 0..p {
            weights[(i, d)] = beta[d];
        }
    }
    Ok(RidgeClosure { weights, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn dataset(n: usize, r: usize, seed: u64, f: impl Fn(&[f64]) -> Vec<f64>) -> ClosureDataset<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let inputs = DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.5..1.5));
        let mut targets = DMatrix::zeros(n, r);
        for j in 0..n {
            let row: Vec<f64> = inputs.row(j).iter().cloned().collect();
            let y = f(&row);
            for i in 0..r {
                targets[(j, i)] = y[i];
            }
        }
        ClosureDataset {
            inputs,
            targets,
            times: (0..n).map(|j| j as f64).collect(),
            resolved_dim: r,
            unresolved_dim: r,
        }
    }

    #[test]
    fn zero_targets_give_zero_weights() {
        let ds = dataset(40, 3, 1, |row| vec![0.0; row.len()]);
        let model = fit_ridge(&ds, 0.5).unwrap();
        assert!(model.weights.iter().all(|&w| w.abs() <= 1e-12));
    }

    #[test]
    fn exact_linear_recovery_at_alpha_zero() {
        let truth = [[0.3, -1.2, 0.5], [2.0, 0.0, -0.7], [-0.1, 0.4, 1.1]];
        let intercepts = [0.25, -0.5, 1.5];
        let ds = dataset(60, 3, 2, |row| {
            (0..3)
                .map(|i| {
                    intercepts[i]
                        + truth[i]
                            .iter()
                            .zip(row)
                            .map(|(&a, &u)| a * u)
                            .sum::<f64>()
                })
                .collect()
        });
        let model = fit_ridge(&ds, 0.0).unwrap();
        for i in 0..3 {
            assert!((model.weights[(i, 0)] - intercepts[i]).abs() <= 1e-10);
            for j in 0..3 {
                assert!(
                    (model.weights[(i, j + 1)] - truth[i][j]).abs() <= 1e-10,
                    "weight ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn matches_normal_equations_oracle() {
        // Independent oracle: build the same penalized system and solve
        // it with plain Gaussian elimination.
        let ds = dataset(50, 3, 3, |row| {
            vec![
                row[0] * row[1] + 0.3,
                row[2].sin(),
                row[0] - row[2] * row[2],
            ]
        });
        let alpha = 1.0;
        let model = fit_ridge(&ds, alpha).unwrap();

        let n = ds.len();
        let p = 4;
        for i in 0..3 {
            let mut a = vec![vec![0.0f64; p]; p];
            let mut b = vec![0.0f64; p];
            let x = |j: usize, d: usize| if d == 0 { 1.0 } else { ds.inputs[(j, d - 1)] };
            for d1 in 0..p {
                for d2 in 0..p {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += x(j, d1) * x(j, d2);
                    }
                    a[d1][d2] = acc;
                }
                if d1 > 0 {
                    a[d1][d1] += alpha;
                }
                let mut acc = 0.0;
                for j in 0..n {
                    acc += x(j, d1) * ds.targets[(j, i)];
                }
                b[d1] = acc;
            }
            let beta = gaussian_solve(a, b);
            for d in 0..p {
                assert!(
                    (model.weights[(i, d)] - beta[d]).abs() <= 1e-10,
                    "component {i} weight {d}: {} vs {}",
                    model.weights[(i, d)],
                    beta[d]
                );
            }
        }
    }

    #[test]
    fn weight_norm_shrinks_with_alpha() {
        let ds = dataset(80, 3, 4, |row| {
            vec![row[0] + row[1], row[1] * row[2], row[2] - row[0]]
        });
        let mut last = f64::INFINITY;
        for k in 0..10 {
            let alpha = 10f64.powi(k - 4);
            let model = fit_ridge(&ds, alpha).unwrap();
            let norm: f64 = (0..3)
                .map(|i| {
                    (1..4)
                        .map(|d| model.weights[(i, d)] * model.weights[(i, d)])
                        .sum::<f64>()
                })
                .sum::<f64>()
                .sqrt();
            assert!(norm <= last + 1e-12, "norm grew at alpha = {alpha}");
            last = norm;
        }
    }

    #[test]
    fn rank_deficient_alpha_zero_is_a_solver_error() {
        // Duplicate a column so X^T X is singular.
        let mut ds = dataset(30, 2, 5, |row| vec![row[0], row[1]]);
        for j in 0..ds.len() {
            ds.inputs[(j, 1)] = ds.inputs[(j, 0)];
        }
        assert!(matches!(
            fit_ridge(&ds, 0.0),
            Err(Error::Solver(_))
        ));
    }

    /// Plain Gaussian elimination with partial pivoting (test oracle).
    fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
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
        x
    }
}
