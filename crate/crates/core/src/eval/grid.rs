//! Hold-out hyperparameter search.
//!
//! Every grid point is fitted on the training targets, integrated through
//! the closed reduced model over training plus validation, and scored by
//! the coefficient of determination of the validation kinetic energy.
//! The best score wins; exact ties prefer fewer parameters, then grid
//! order. Diverged points score negative infinity; the search fails only
//! when every point diverges.

use crate::closure::{ClosureDataset, Windows};
use crate::error::{Error, Result};
use crate::eval::energy::{EnergyForm, EnergyOps};
use crate::eval::metrics::r2_val;
use crate::regress::{
    fit_mlp, fit_quadratic_tsvd, fit_ridge, fit_symbolic, ClosureModel, NnConfig, SrConfig,
};
use crate::rom::{integrate, RomOperators, StepperConfig};
use crate::scalar::Real;
use rayon::prelude::*;

/// One candidate hyperparameter assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum HyperPoint {
    Ridge { alpha: f64 },
    Quadratic { svd_rank: usize },
    Symbolic(SrConfig),
    Mlp(NnConfig),
}

impl HyperPoint {
    pub fn describe(&self) -> String {
        match self {
            HyperPoint::Ridge { alpha } => format!("ridge alpha={alpha:e}"),
            HyperPoint::Quadratic { svd_rank } => format!("quadratic svd_rank={svd_rank}"),
            HyperPoint::Symbolic(cfg) => format!(
                "symbolic set={} max_length={} generations={} seed={}",
                cfg.primitive_set, cfg.max_length, cfg.generations, cfg.seed
            ),
            HyperPoint::Mlp(cfg) => format!(
                "mlp layers={:?} rate={:e} l2={:e} dropout={} seed={}",
                cfg.hidden, cfg.learning_rate, cfg.l2, cfg.dropout, cfg.seed
            ),
        }
    }

    /// Reseeded copy (stochastic families only; deterministic ones are
    /// returned unchanged).
    pub fn with_seed(&self, seed: u64) -> HyperPoint {
        match self {
            HyperPoint::Symbolic(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed = seed;
                HyperPoint::Symbolic(cfg)
            }
            HyperPoint::Mlp(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed = seed;
                HyperPoint::Mlp(cfg)
            }
            other => other.clone(),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, HyperPoint::Symbolic(_) | HyperPoint::Mlp(_))
    }

    pub fn fit<T: Real>(&self, dataset: &ClosureDataset<T>) -> Result<ClosureModel<T>> {
        match self {
            HyperPoint::Ridge { alpha } => {
                Ok(ClosureModel::Ridge(fit_ridge(dataset, T::of(*alpha))?))
            }
            HyperPoint::Quadratic { svd_rank } => Ok(ClosureModel::Quadratic(
                fit_quadratic_tsvd(dataset, *svd_rank)?,
            )),
            HyperPoint::Symbolic(cfg) => Ok(ClosureModel::Symbolic(fit_symbolic(dataset, cfg)?)),
            HyperPoint::Mlp(cfg) => Ok(ClosureModel::Mlp(fit_mlp(dataset, cfg)?)),
        }
    }
}

/// Everything needed to integrate a candidate closure and read off its
/// kinetic-energy series at the snapshot times.
#[derive(Debug, Clone)]
pub struct RomEvalContext<'a, T: Real> {
    pub operators: &'a RomOperators<T>,
    pub energy: &'a EnergyOps<T>,
    /// Initial reduced state(s), oldest first.
    pub initial_history: Vec<Vec<T>>,
    /// Integrator steps per snapshot interval.
    pub sample_every: usize,
    pub dt: T,
    pub order: usize,
    pub reynolds: T,
    pub start_time: T,
    pub energy_form: EnergyForm,
}

impl<T: Real> RomEvalContext<'_, T> {
    /// Runs the (closed) reduced model across `samples` snapshot indices
    /// and returns the kinetic energy at each.
    pub fn energy_series(
        &self,
        closure: Option<&ClosureModel<T>>,
        samples: usize,
    ) -> Result<Vec<T>> {
        let steps = (samples - 1) * self.sample_every;
        let mut config = StepperConfig::new(self.dt, self.order, steps, self.reynolds);
        config.start_time = self.start_time;
        let trajectory = integrate(self.operators, &self.initial_history, &config, closure)?;
        let mut energies = Vec::with_capacity(samples);
        for k in 0..samples {
            let state = &trajectory.states[k * self.sample_every];
            energies.push(self.energy.energy_in_form(state, self.energy_form)?);
        }
        Ok(energies)
    }
}

/// Outcome of one evaluated grid point.
#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub index: usize,
    pub description: String,
    /// Validation-window coefficient of determination; negative infinity
    /// for diverged or failed points.
    pub score: f64,
    pub parameter_count: usize,
    pub failure: Option<String>,
}

/// Selection rule: maximize the score; break exact ties by smaller
/// parameter count, then by grid order.
pub fn select_best(outcomes: &[GridOutcome]) -> Result<usize> {
    let mut best: Option<&GridOutcome> = None;
    for o in outcomes {
        if !o.score.is_finite() {
            continue;
        }
        best = Some(match best {
            None => o,
            Some(b) => {
                if o.score > b.score
                    || (o.score == b.score && o.parameter_count < b.parameter_count)
                {
                    o
                } else {
                    b
                }
            }
        });
    }
    match best {
        Some(b) => Ok(b.index),
        None => {
            let mut listing = String::new();
            for o in outcomes {
                listing.push_str(&format!(
                    "  [{}] {}: {}\n",
                    o.index,
                    o.description,
                    o.failure.as_deref().unwrap_or("diverged")
                ));
            }
            Err(Error::SearchFailure { outcomes: listing })
        }
    }
}

/// Report of a full search.
#[derive(Debug, Clone)]
pub struct GridReport {
    pub outcomes: Vec<GridOutcome>,
    pub selected: usize,
}

/// Fits and scores every grid point, returning the winning model and the
/// per-point report. `e_fom` must cover snapshot indices `0..windows.val.end`.
pub fn grid_search<T: Real>(
    grid: &[HyperPoint],
    dataset: &ClosureDataset<T>,
    ctx: &RomEvalContext<T>,
    windows: &Windows,
    e_fom: &[T],
) -> Result<(ClosureModel<T>, GridReport)> {
    if grid.is_empty() {
        return Err(Error::Argument("empty hyperparameter grid".into()));
    }
    if e_fom.len() < windows.val.end {
        return Err(Error::Dimension {
            context: "reference energy series vs validation window",
            expected: windows.val.end,
            actual: e_fom.len(),
        });
    }

    let evaluated: Vec<(GridOutcome, Option<ClosureModel<T>>)> = grid
        .par_iter()
        .enumerate()
        .map(|(index, point)| {
            let description = point.describe();
            match score_point(point, dataset, ctx, windows, e_fom) {
                Ok((score, model)) => (
                    GridOutcome {
                        index,
                        description,
                        score,
                        parameter_count: model.parameter_count(),
                        failure: None,
                    },
                    Some(model),
                ),
                Err(err) => (
                    GridOutcome {
                        index,
                        description,
                        score: f64::NEG_INFINITY,
                        parameter_count: usize::MAX,
                        failure: Some(err.to_string()),
                    },
                    None,
                ),
            }
        })
        .collect();

    let outcomes: Vec<GridOutcome> = evaluated.iter().map(|(o, _)| o.clone()).collect();
    let selected = select_best(&outcomes)?;
    let model = evaluated
        .into_iter()
        .nth(selected)
        .and_then(|(_, m)| m)
        .expect("selected point was evaluated");
    Ok((
        model,
        GridReport {
            outcomes,
            selected,
        },
    ))
}

fn score_point<T: Real>(
    point: &HyperPoint,
    dataset: &ClosureDataset<T>,
    ctx: &RomEvalContext<T>,
    windows: &Windows,
    e_fom: &[T],
) -> Result<(f64, ClosureModel<T>)> {
    let model = point.fit(dataset)?;
    let series = ctx.energy_series(Some(&model), windows.val.end)?;
    let score = r2_val(&e_fom[windows.val.clone()], &series[windows.val.clone()])?;
    Ok((score.as_f64(), model))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(index: usize, score: f64, params: usize) -> GridOutcome {
        GridOutcome {
            index,
            description: format!("point {index}"),
            score,
            parameter_count: params,
            failure: None,
        }
    }

    #[test]
    fn single_point_is_selected() {
        assert_eq!(select_best(&[outcome(0, 0.4, 10)]).unwrap(), 0);
    }

    #[test]
    fn best_score_wins() {
        let outcomes = [outcome(0, 0.3, 5), outcome(1, 0.9, 50), outcome(2, 0.5, 1)];
        assert_eq!(select_best(&outcomes).unwrap(), 1);
    }

    #[test]
    fn exact_tie_prefers_fewer_parameters_then_order() {
        let outcomes = [outcome(0, 0.7, 30), outcome(1, 0.7, 12), outcome(2, 0.7, 30)];
        assert_eq!(select_best(&outcomes).unwrap(), 1);
        let outcomes = [outcome(0, 0.7, 30), outcome(1, 0.7, 30)];
        assert_eq!(select_best(&outcomes).unwrap(), 0);
    }

    #[test]
    fn all_diverged_is_a_search_failure() {
        let outcomes = [
            outcome(0, f64::NEG_INFINITY, 5),
            outcome(1, f64::NAN, 5),
        ];
        let err = select_best(&outcomes).unwrap_err();
        match err {
            Error::SearchFailure { outcomes } => {
                assert!(outcomes.contains("[0]"));
                assert!(outcomes.contains("[1]"));
            }
            other => panic!("unexpected error {other}"),
        }
    }
}
