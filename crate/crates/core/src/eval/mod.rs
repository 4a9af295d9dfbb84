//! Evaluation: kinetic energy, the error metrics, hyperparameter search,
//! multi-seed statistics, and report artifacts.

mod energy;
mod grid;
mod metrics;
mod multiseed;
mod report;

pub use energy::{kinetic_energy_field, EnergyForm, EnergyOps};
pub use grid::{grid_search, select_best, GridOutcome, GridReport, HyperPoint, RomEvalContext};
pub use metrics::{mean_mse_tr, mse_val, r2_val, rmse_test};
pub use multiseed::{multi_seed, SeedStats};
pub use report::{occurrence_statistics, write_energy_csv, write_metrics_csv, MetricRow};
