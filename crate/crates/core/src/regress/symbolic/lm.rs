//! Levenberg-Marquardt refinement of the numeric constants of one tree.
//!
//! Damped normal equations with Marquardt diagonal scaling; a fixed
//! iteration count (rejected trials count as iterations). The tree's
//! analytic constant-partials supply the Jacobian.

use crate::regress::symbolic::expr::Expr;
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};

/// Optimizes the constants of `expr` against `target` and returns the
/// sum of squared errors at the optimum. Trees without constants are
/// evaluated as-is.
pub fn optimize_constants<T: Real>(
    expr: &mut Expr<T>,
    inputs: &DMatrix<T>,
    target: &[T],
    iterations: usize,
) -> T {
    let sse_of = |values: &[T]| -> T {
        let mut acc = T::zero();
        for (v, y) in values.iter().zip(target) {
            let e = *y - *v;
            acc += e * e;
        }
        acc
    };

    let slots = expr.constant_count();
    if slots == 0 || iterations == 0 {
        return sse_of(&expr.eval_batch(inputs));
    }

    let n = inputs.nrows();
    let mut constants = expr.constants();
    let (mut values, mut jac) = expr.eval_batch_with_partials(inputs);
    let mut sse = sse_of(&values);
    if !sse.is_finite() {
        return sse;
    }

    let mut lambda = T::of(1e-3);
    for _ in 0..iterations {
        // Normal equations J^T J and J^T e with e = y - f.
        let mut jtj = DMatrix::<T>::zeros(slots, slots);
        let mut jte = DVector::<T>::zeros(slots);
        for a in 0..slots {
            for b in a..slots {
                let mut acc = T::zero();
                for j in 0..n {
                    acc += jac[a][j] * jac[b][j];
                }
                jtj[(a, b)] = acc;
                jtj[(b, a)] = acc;
            }
            let mut acc = T::zero();
            for j in 0..n {
                acc += jac[a][j] * (target[j] - values[j]);
            }
            jte[a] = acc;
        }

        let mut damped = jtj.clone();
        for a in 0..slots {
            damped[(a, a)] += lambda * jtj[(a, a)] + T::of(1e-12);
        }
        let step = match damped.cholesky() {
            Some(chol) => chol.solve(&jte),
            None => {
                lambda = (lambda * T::of(4.0)).min(T::of(1e14));
                continue;
            }
        };

        let trial: Vec<T> = constants
            .iter()
            .zip(step.iter())
            .map(|(&c, &d)| c + d)
            .collect();
        let mut trial_expr = expr.clone();
        trial_expr.set_constants(&trial);
        let trial_values = trial_expr.eval_batch(inputs);
        let trial_sse = sse_of(&trial_values);

        if trial_sse.is_finite() && trial_sse < sse {
            constants = trial;
            expr.set_constants(&constants);
            sse = trial_sse;
            let refreshed = expr.eval_batch_with_partials(inputs);
            values = refreshed.0;
            jac = refreshed.1;
            lambda = (lambda * T::of(0.25)).max(T::of(1e-14));
        } else {
            lambda = (lambda * T::of(4.0)).min(T::of(1e14));
        }
    }
    sse
}
