//! romlab: a reduced-order-modeling workbench.
//!
//! Builds POD/Galerkin reduced models from snapshot data, computes exact
//! variational-multiscale closure targets, fits four data-driven closure
//! families (linear ridge, quadratic truncated-SVD, genetic-programming
//! symbolic regression, multilayer perceptron), integrates the closed
//! reduced system with a semi-implicit BDF/EXT scheme, and evaluates
//! kinetic-energy accuracy across training, validation, and extrapolation
//! windows.
//!
//! The numerics are generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the pipeline, the file formats, and the aliases
//! below are pinned to double precision, which the validation tolerances
//! assume.
//!
//! ```
//! use romlab::fields::{generate_burgers, BurgersConfig, InitialProfile};
//! use romlab::pod::{compute_pod_max, FieldForm};
//! use romlab::closure::{compute_targets, split_windows};
//! use romlab::rom::{assemble_operators, integrate, StepperConfig};
//! use romlab::regress::{fit_ridge, ClosureModel};
//!
//! # fn main() -> romlab::Result<()> {
//! let ensemble = generate_burgers(&BurgersConfig {
//!     resolution: 64,
//!     viscosity: 0.01,
//!     end_time: 3.95,
//!     dt_sample: 0.05,
//!     profile: InitialProfile::Gentle,
//!     seed: 5,
//! })?;
//! let windows = split_windows(ensemble.snapshot_count(), (0.25, 0.25, 0.5))?;
//! let training = ensemble.window(windows.train.clone())?;
//! let basis = compute_pod_max(&training)?;
//!
//! let (r, big_r) = (2, 5);
//! let dataset = compute_targets(&training, &basis, r, big_r)?;
//! let closure = ClosureModel::Ridge(fit_ridge(&dataset, 1.0)?);
//!
//! let reynolds = 100.0;
//! let operators = assemble_operators(&basis, r, reynolds)?;
//! let initial = basis.project(&ensemble.snapshot(0), r, FieldForm::Centered)?;
//! let trajectory = integrate(
//!     &operators,
//!     &[initial],
//!     &StepperConfig::new(0.01, 3, 395, reynolds),
//!     Some(&closure),
//! )?;
//! assert_eq!(trajectory.states.len(), 396);
//! # Ok(())
//! # }
//! ```

// `!(x > 0)` instead of `x <= 0` so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closure;
pub mod error;
pub mod eval;
pub mod fields;
pub(crate) mod io;
pub mod pipeline;
pub mod pod;
pub mod regress;
pub mod rom;
mod scalar;

pub use error::{Error, ExitClass, Result};
pub use scalar::Real;

/// Pipeline scalar type: double precision throughout.
pub type Scalar = f64;

pub type Discretization = fields::Discretization<Scalar>;
pub type FieldEnsemble = fields::FieldEnsemble<Scalar>;
pub type BurgersConfig = fields::BurgersConfig<Scalar>;
pub type PodBasis = pod::PodBasis<Scalar>;
pub type RomOperators = rom::RomOperators<Scalar>;
pub type StepperConfig = rom::StepperConfig<Scalar>;
pub type Trajectory = rom::Trajectory<Scalar>;
pub type ClosureDataset = closure::ClosureDataset<Scalar>;
pub type ClosureModel = regress::ClosureModel<Scalar>;
pub type EnergyOps = eval::EnergyOps<Scalar>;
