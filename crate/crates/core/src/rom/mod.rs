//! Galerkin-reduced operators and the semi-implicit time integrator.

mod fio;
mod operators;
mod stepper;

pub use fio::{load_operators, save_operators, OPERATORS_MAGIC};
pub use operators::{assemble_operators, RomOperators};
pub use stepper::{integrate, StepperConfig, Trajectory};
