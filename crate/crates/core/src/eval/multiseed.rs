//! Multi-seed statistics of the test-window error.

use crate::closure::{ClosureDataset, Windows};
use crate::error::Result;
use crate::eval::grid::{HyperPoint, RomEvalContext};
use crate::eval::metrics::rmse_test;
use crate::regress::ClosureModel;
use crate::scalar::Real;
use rayon::prelude::*;

/// Per-seed test errors with their mean and sample standard deviation.
/// Diverged seeds are excluded from the statistics and listed.
#[derive(Debug, Clone)]
pub struct SeedStats {
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub excluded: Vec<(usize, String)>,
}

impl SeedStats {
    pub fn from_values(values: Vec<f64>, excluded: Vec<(usize, String)>) -> SeedStats {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let mean = if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        let std = if finite.len() < 2 {
            0.0
        } else {
            let ss: f64 = finite.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (finite.len() - 1) as f64).sqrt()
        };
        SeedStats {
            per_seed: values,
            mean,
            std,
            excluded,
        }
    }
}

/// Runs `n_seeds` full fit-integrate-score pipelines with seeds `0..n-1`
/// and reports the test-window relative MSE statistics. Deterministic
/// families bypass the loop (one run, zero deviation). Returns the fitted
/// models alongside the statistics, seed order preserved (diverged seeds
/// may still yield a model; scoring is what failed).
pub fn multi_seed<T: Real>(
    point: &HyperPoint,
    dataset: &ClosureDataset<T>,
    ctx: &RomEvalContext<T>,
    windows: &Windows,
    e_fom: &[T],
    n_seeds: usize,
) -> Result<(SeedStats, Vec<ClosureModel<T>>)> {
    let run = |point: &HyperPoint| -> Result<(f64, ClosureModel<T>)> {
        let model = point.fit(dataset)?;
        let series = ctx.energy_series(Some(&model), windows.test.end)?;
        let err = rmse_test(
            &e_fom[windows.test.clone()],
            &series[windows.test.clone()],
        )?;
        Ok((err.as_f64(), model))
    };

    if !point.is_stochastic() {
        let (value, model) = run(point)?;
        return Ok((SeedStats::from_values(vec![value], Vec::new()), vec![model]));
    }

    let outcomes: Vec<(usize, Result<(f64, ClosureModel<T>)>)> = (0..n_seeds)
        .into_par_iter()
        .map(|seed| (seed, run(&point.with_seed(seed as u64))))
        .collect();

    let mut values = Vec::with_capacity(n_seeds);
    let mut excluded = Vec::new();
    let mut models = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok((value, model)) => {
                values.push(value);
                models.push(model);
            }
            Err(err) => {
                values.push(f64::NAN);
                excluded.push((seed, err.to_string()));
            }
        }
    }
    Ok((SeedStats::from_values(values, excluded), models))
}
