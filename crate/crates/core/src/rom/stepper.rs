//! Semi-implicit BDFk/EXTk integration of the reduced system.
//!
//! The viscous term is implicit, the advection (and any closure) is
//! extrapolated. Each step solves
//! `((beta0/dt) B + (1/Re) A) u^{l+1} = sum_i alpha_i E(u^{l+1-i})
//!   - (1/dt) sum_i beta_i B u^{l+1-i} - (1/Re) a0`
//! with `E(u) = -[c0 + C1 u + C2 u + C(u) u] + g(u)`.
//!
//! Startup ramps the order: BDF1/EXT1 for the first step, BDF2/EXT2 for the
//! second, unless enough history is supplied to start at full order.

use crate::error::{Error, Result};
use crate::regress::ClosureModel;
use crate::rom::RomOperators;
use crate::scalar::Real;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Time-integration parameters of the reduced solve.
#[derive(Debug, Clone)]
pub struct StepperConfig<T> {
    pub dt: T,
    /// BDF/EXT order, 1 to 3.
    pub order: usize,
    pub steps: usize,
    pub reynolds: T,
    /// Time of the newest supplied state; defaults to zero.
    pub start_time: T,
}

impl<T: Real> StepperConfig<T> {
    pub fn new(dt: T, order: usize, steps: usize, reynolds: T) -> Self {
        StepperConfig {
            dt,
            order,
            steps,
            reynolds,
            start_time: T::zero(),
        }
    }
}

/// Reduced coefficient trajectory; `states.len() == steps + 1` with the
/// initial state first.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }
}

fn bdf_coefficients<T: Real>(order: usize) -> (T, Vec<T>) {
    match order {
        1 => (T::one(), vec![T::of(-1.0)]),
        2 => (T::of(1.5), vec![T::of(-2.0), T::of(0.5)]),
        3 => (
            T::of(11.0 / 6.0),
            vec![T::of(-3.0), T::of(1.5), T::of(-1.0 / 3.0)],
        ),
        _ => unreachable!("order validated at entry"),
    }
}

fn ext_coefficients<T: Real>(order: usize) -> Vec<T> {
    match order {
        1 => vec![T::one()],
        2 => vec![T::of(2.0), T::of(-1.0)],
        3 => vec![T::of(3.0), T::of(-3.0), T::one()],
        _ => unreachable!("order validated at entry"),
    }
}

/// Integrates the (optionally closed) reduced system.
///
/// `initial_history` holds one or more consecutive states, oldest first,
/// the newest at `config.start_time`. With a single state the scheme ramps
/// BDF1 -> BDF2 -> BDF3; with `order` states it starts at full order.
pub fn integrate<T: Real>(
    operators: &RomOperators<T>,
    initial_history: &[Vec<T>],
    config: &StepperConfig<T>,
    closure: Option<&ClosureModel<T>>,
) -> Result<Trajectory<T>> {
    let r = operators.dim;
    if initial_history.is_empty() {
        return Err(Error::Argument("initial history must not be empty".into()));
    }
    if !(1..=3).contains(&config.order) {
        return Err(Error::Argument(format!(
            "BDF order must be 1..=3, got {}",
            config.order
        )));
    }
    if !(config.dt > T::zero()) {
        return Err(Error::Argument("dt must be positive".into()));
    }
    if !(config.reynolds > T::zero()) {
        return Err(Error::Argument("Reynolds number must be positive".into()));
    }
    for state in initial_history {
        if state.len() != r {
            return Err(Error::Dimension {
                context: "initial state length",
                expected: r,
                actual: state.len(),
            });
        }
    }

    let inv_re = T::one() / config.reynolds;
    // One factorization per BDF order actually used; reused across steps.
    let mut factorizations: [Option<Cholesky<T, Dyn>>; 3] = [None, None, None];
    let mut factor = |order: usize| -> Result<Cholesky<T, Dyn>> {
        if factorizations[order - 1].is_none() {
            let (beta0, _) = bdf_coefficients::<T>(order);
            let mut m: DMatrix<T> = operators.stiffness.clone() * inv_re;
            m += operators.mass.clone() * (beta0 / config.dt);
            let chol = m.cholesky().ok_or_else(|| {
                Error::Solver("implicit reduced matrix is not positive definite".into())
            })?;
            factorizations[order - 1] = Some(chol);
        }
        Ok(factorizations[order - 1].clone().unwrap())
    };

    // Explicit side E(u) = -advection(u) + g(u); cached per history state.
    let explicit = |u: &[T], step: usize| -> Result<DVector<T>> {
        let adv = operators.advection_galerkin(u);
        let mut e = DVector::from_iterator(r, adv.into_iter().map(|v| -v));
        if let Some(model) = closure {
            let g = model.predict(u).map_err(|err| Error::Divergence {
                step,
                detail: format!("closure evaluation failed: {err}"),
            })?;
            for i in 0..r {
                e[i] += g[i];
            }
        }
        Ok(e)
    };

    // History, newest last: (state, explicit value).
    let mut history: Vec<(DVector<T>, DVector<T>)> = Vec::new();
    for state in initial_history {
        let u = DVector::from_vec(state.clone());
        let e = explicit(state, 0)?;
        history.push((u, e));
    }

    let a0 = DVector::from_vec(operators.zeroth_stiffness.clone());
    let newest = history.last().unwrap().0.clone();
    let mut trajectory = Trajectory {
        times: vec![config.start_time],
        states: vec![newest.iter().cloned().collect()],
    };

    for step in 1..=config.steps {
        let order = config.order.min(history.len());
        let (_, betas) = bdf_coefficients::<T>(order);
        let alphas = ext_coefficients::<T>(order);
        let chol = factor(order)?;

        let mut rhs = DVector::<T>::zeros(r);
        // History index: i = 1 is the newest stored state.
        for i in 1..=order {
            let (u_past, e_past) = &history[history.len() - i];
            rhs.axpy(alphas[i - 1], e_past, T::one());
            let bu = &operators.mass * u_past;
            rhs.axpy(-betas[i - 1] / config.dt, &bu, T::one());
        }
        rhs.axpy(-inv_re, &a0, T::one());

        let next = chol.solve(&rhs);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step,
                detail: "reduced state became non-finite".into(),
            });
        }
        let next_state: Vec<T> = next.iter().cloned().collect();
        let e_next = explicit(&next_state, step)?;
        history.push((next.clone(), e_next));
        if history.len() > 3 {
            history.remove(0);
        }

        trajectory
            .times
            .push(config.start_time + T::from_usize(step).unwrap() * config.dt);
        trajectory.states.push(next_state);
    }

    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    /// Scalar decay problem u' = -u: B = A = 1, C = 0, Re = 1.
    fn decay_operators() -> RomOperators<f64> {
        RomOperators {
            mass: DMatrix::identity(1, 1),
            stiffness: DMatrix::identity(1, 1),
            advection: vec![0.0],
            zeroth_advection: vec![0.0],
            zeroth_stiffness: vec![0.0],
            coupling_zeroth_carrier: DMatrix::zeros(1, 1),
            coupling_zeroth_carried: DMatrix::zeros(1, 1),
            reynolds: 1.0,
            dim: 1,
        }
    }

    #[test]
    fn no_dynamics_means_constant_trajectory() {
        let ops = RomOperators {
            stiffness: DMatrix::zeros(2, 2),
            mass: DMatrix::identity(2, 2),
            advection: vec![0.0; 8],
            zeroth_advection: vec![0.0; 2],
            zeroth_stiffness: vec![0.0; 2],
            coupling_zeroth_carrier: DMatrix::zeros(2, 2),
            coupling_zeroth_carried: DMatrix::zeros(2, 2),
            reynolds: 1.0,
            dim: 2,
        };
        let config = StepperConfig::new(0.1, 2, 20, 1.0);
        let traj = integrate(&ops, &[vec![0.5f64, -0.25]], &config, None).unwrap();
        assert_eq!(traj.states.len(), 21);
        for state in &traj.states {
            // Constant up to the solve round-trip (one ulp per step).
            assert!((state[0] - 0.5).abs() <= 1e-13);
            assert!((state[1] + 0.25).abs() <= 1e-13);
        }
    }

    #[test]
    fn implicit_euler_first_step_closed_form() {
        // BDF1, dt = 0.1, u0 = 1: u1 = 1 / 1.1.
        let ops = decay_operators();
        let config = StepperConfig::new(0.1, 1, 1, 1.0);
        let traj = integrate(&ops, &[vec![1.0]], &config, None).unwrap();
        assert!((traj.states[1][0] - 1.0 / 1.1).abs() <= 1e-15);
    }

    fn observed_order(order: usize, seed_exact_history: bool) -> f64 {
        let ops = decay_operators();
        let errors: Vec<f64> = [1e-2f64, 5e-3, 2.5e-3]
            .iter()
            .map(|&dt| {
                let steps = (1.0 / dt).round() as usize;
                let history: Vec<Vec<f64>> = if seed_exact_history {
                    // u(t) = e^{-t} at t = -(order-1) dt, ..., -dt, 0.
                    (0..order)
                        .map(|i| vec![((i as f64) * dt).exp()])
                        .rev()
                        .collect()
                } else {
                    vec![vec![1.0]]
                };
                let config = StepperConfig::new(dt, order, steps, 1.0);
                let traj = integrate(&ops, &history, &config, None).unwrap();
                (traj.states.last().unwrap()[0] - (-1.0f64).exp()).abs()
            })
            .collect();
        // Least-squares slope of log(err) vs log(dt) over the three runs.
        let rate01 = (errors[0] / errors[1]).log2();
        let rate12 = (errors[1] / errors[2]).log2();
        0.5 * (rate01 + rate12)
    }

    #[test]
    fn bdf1_converges_at_first_order() {
        let p = observed_order(1, false);
        assert!(p >= 0.95, "observed order {p}");
    }

    #[test]
    fn bdf3_converges_at_third_order() {
        let p = observed_order(3, true);
        assert!(p >= 2.7, "observed order {p}");
    }

    #[test]
    fn order_ramp_up_still_converges() {
        // Single-state history forces the BDF1 -> BDF2 -> BDF3 ramp; the
        // result stays at least second order accurate.
        let p = observed_order(3, false);
        assert!(p >= 1.9, "observed order {p}");
    }

    #[test]
    fn halving_dt_reduces_terminal_error() {
        for order in [1usize, 2, 3] {
            let ops = decay_operators();
            let run = |dt: f64| {
                let steps = (1.0 / dt).round() as usize;
                let history: Vec<Vec<f64>> = (0..order)
                    .map(|i| vec![((i as f64) * dt).exp()])
                    .rev()
                    .collect();
                let config = StepperConfig::new(dt, order, steps, 1.0);
                let traj = integrate(&ops, &history, &config, None).unwrap();
                (traj.states.last().unwrap()[0] - (-1.0f64).exp()).abs()
            };
            let coarse = run(1e-2);
            let fine = run(5e-3);
            let required = 2.0f64.powi(order as i32) / 1.5;
            assert!(
                coarse / fine >= required,
                "order {order}: ratio {} < {required}",
                coarse / fine
            );
        }
    }

    #[test]
    fn halving_dt_helps_a_smooth_closed_rom_too() {
        use crate::regress::{ClosureModel, RidgeClosure};
        // Closure g(u) = -0.5 u turns the decay problem into u' = -1.5 u;
        // the extrapolated closure term must not spoil the scheme order.
        let mut weights = nalgebra::DMatrix::zeros(1, 2);
        weights[(0, 1)] = -0.5;
        let closure = ClosureModel::Ridge(RidgeClosure {
            weights,
            alpha: 0.0,
        });
        let ops = decay_operators();
        for order in [2usize, 3] {
            let run = |dt: f64| {
                let steps = (1.0 / dt).round() as usize;
                let history: Vec<Vec<f64>> = (0..order)
                    .map(|i| vec![(1.5 * (i as f64) * dt).exp()])
                    .rev()
                    .collect();
                let config = StepperConfig::new(dt, order, steps, 1.0);
                let traj = integrate(&ops, &history, &config, Some(&closure)).unwrap();
                (traj.states.last().unwrap()[0] - (-1.5f64).exp()).abs()
            };
            let ratio = run(1e-2) / run(5e-3);
            let required = 2.0f64.powi(order as i32) / 1.5;
            assert!(
                ratio >= required,
                "order {order}: ratio {ratio} < {required}"
            );
        }
    }

    #[test]
    fn closure_evaluation_failure_becomes_a_divergence_report() {
        use crate::regress::symbolic::{Expr, SrConfig};
        use crate::regress::{ClosureModel, SymbolicClosure};
        // A closure whose constants overflow on any nonzero state.
        let huge = Expr::Binary(
            crate::regress::symbolic::BinaryOp::Mul,
            Box::new(Expr::Constant(1e308)),
            Box::new(Expr::Binary(
                crate::regress::symbolic::BinaryOp::Mul,
                Box::new(Expr::Constant(1e308)),
                Box::new(Expr::Variable(0)),
            )),
        );
        let model = ClosureModel::Symbolic(SymbolicClosure {
            components: vec![huge],
            fitness: vec![0.0],
            config: SrConfig::new(0),
            warnings: Vec::new(),
        });
        let ops = decay_operators();
        let config = StepperConfig::new(0.1, 1, 5, 1.0);
        let err = integrate(&ops, &[vec![1.0]], &config, Some(&model)).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err}");
    }

    #[test]
    fn divergence_reports_step_index() {
        // Negative-definite "stiffness" makes the solve blow up; the
        // Cholesky guard catches it immediately.
        let mut ops = decay_operators();
        ops.stiffness[(0, 0)] = -1e6;
        let config = StepperConfig::new(0.1, 1, 10, 1.0);
        let err = integrate(&ops, &[vec![1.0]], &config, None).unwrap_err();
        assert!(matches!(err, Error::Solver(_) | Error::Divergence { .. }));
    }
}
