//! The four data-driven closure fitters behind one predictor interface.

mod mlp;
mod quadratic;
mod ridge;
pub mod symbolic;

pub use mlp::{fit_mlp, MlpClosure, NnConfig};
pub use quadratic::{design_rank, fit_quadratic_tsvd, residual_norm, QuadraticClosure};
pub use ridge::{fit_ridge, RidgeClosure};
pub use symbolic::{
    fit_symbolic, load_symbolic, save_symbolic, SrConfig, SymbolicClosure,
};

use crate::error::{Error, Result};
use crate::io::{ContainerReader, ContainerWriter};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use std::path::Path;

pub const MODEL_MAGIC: &str = "ROMMDL01\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ridge,
    QuadraticTsvd,
    Symbolic,
    Mlp,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Ridge => "ridge",
            ModelKind::QuadraticTsvd => "quadratic-tsvd",
            ModelKind::Symbolic => "symbolic",
            ModelKind::Mlp => "mlp",
        }
    }
}

/// A fitted closure: predicts the closure vector from the resolved
/// coefficients. Prediction is pure and deterministic.
#[derive(Debug, Clone)]
pub enum ClosureModel<T> {
    Ridge(RidgeClosure<T>),
    Quadratic(QuadraticClosure<T>),
    Symbolic(SymbolicClosure<T>),
    Mlp(MlpClosure<T>),
}

impl<T: Real> ClosureModel<T> {
    /// The identically-zero closure (a zero ridge model); closing with it
    /// reproduces the plain Galerkin dynamics.
    pub fn zero_ridge(dim: usize) -> Self {
        ClosureModel::Ridge(RidgeClosure::zero(dim, dim))
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ClosureModel::Ridge(_) => ModelKind::Ridge,
            ClosureModel::Quadratic(_) => ModelKind::QuadraticTsvd,
            ClosureModel::Symbolic(_) => ModelKind::Symbolic,
            ClosureModel::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            ClosureModel::Ridge(m) => m.output_dim(),
            ClosureModel::Quadratic(m) => m.output_dim(),
            ClosureModel::Symbolic(m) => m.output_dim(),
            ClosureModel::Mlp(m) => m.output_dim(),
        }
    }

    /// Learnable parameter count: ridge `r(r+1)`, quadratic `r^2 + r^3`,
    /// symbolic the number of numeric constants, network weights+biases.
    pub fn parameter_count(&self) -> usize {
        match self {
            ClosureModel::Ridge(m) => m.parameter_count(),
            ClosureModel::Quadratic(m) => m.parameter_count(),
            ClosureModel::Symbolic(m) => m.parameter_count(),
            ClosureModel::Mlp(m) => m.parameter_count(),
        }
    }

    pub fn predict(&self, input: &[T]) -> Result<Vec<T>> {
        let out = match self {
            ClosureModel::Ridge(m) => m.predict(input),
            ClosureModel::Quadratic(m) => m.predict(input),
            ClosureModel::Symbolic(m) => return m.predict(input),
            ClosureModel::Mlp(m) => return m.predict(input),
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "{} closure prediction",
                self.kind().as_str()
            )));
        }
        Ok(out)
    }
}

/// Saves a model. Symbolic models go to the plain-text grammar; the
/// other kinds go to the `ROMMDL01` binary container.
pub fn save_model(model: &ClosureModel<f64>, path: &Path, manifest: &str) -> Result<()> {
    match model {
        ClosureModel::Symbolic(m) => save_symbolic(m, path, manifest),
        ClosureModel::Ridge(m) => {
            let mut w = ContainerWriter::new(MODEL_MAGIC);
            if !manifest.is_empty() {
                w.field("manifest", manifest);
            }
            w.field("kind", "ridge");
            w.field("r", m.output_dim());
            w.field("inputs", m.input_dim());
            w.field_f64("alpha", m.alpha);
            w.begin_payload();
            w.floats(m.weights.iter().copied());
            w.finish(path)
        }
        ClosureModel::Quadratic(m) => {
            let mut w = ContainerWriter::new(MODEL_MAGIC);
            if !manifest.is_empty() {
                w.field("manifest", manifest);
            }
            w.field("kind", "quadratic-tsvd");
            w.field("r", m.output_dim());
            w.field("svd_rank", m.svd_rank);
            w.begin_payload();
            w.floats(m.linear.iter().copied());
            w.floats(m.quadratic.iter().copied());
            w.finish(path)
        }
        ClosureModel::Mlp(m) => {
            let mut w = ContainerWriter::new(MODEL_MAGIC);
            if !manifest.is_empty() {
                w.field("manifest", manifest);
            }
            w.field("kind", "mlp");
            w.field("inputs", m.input_dim());
            let dims: Vec<String> = m.weights.iter().map(|w| w.nrows().to_string()).collect();
            w.field("layers", dims.join(","));
            w.field_f64("leaky_slope", m.leaky_slope);
            w.field_f64("learning_rate", m.config.learning_rate);
            w.field_f64("l2", m.config.l2);
            w.field_f64("dropout", m.config.dropout);
            w.field("epochs", m.config.epochs);
            w.field("batch_size", m.config.batch_size);
            w.field("seed", m.config.seed);
            w.begin_payload();
            for layer in &m.weights {
                w.floats(layer.iter().copied());
            }
            for bias in &m.biases {
                w.floats(bias.iter().copied());
            }
            w.finish(path)
        }
    }
}

/// Loads a model saved by [`save_model`]. Symbolic text models are
/// distinguished by their leading `#` line.
pub fn load_model(path: &Path) -> Result<ClosureModel<f64>> {
    let display = path.display().to_string();
    let head = {
        let bytes = std::fs::read(path).map_err(|e| Error::io(&display, e))?;
        bytes.first().copied()
    };
    if head == Some(b'#') || head == Some(b'g') {
        return Ok(ClosureModel::Symbolic(load_symbolic(path)?));
    }

    let (mut rd, header) = ContainerReader::open(path, MODEL_MAGIC)?;
    match header.get(&display, "kind")? {
        "ridge" => {
            let r = header.get_usize(&display, "r")?;
            let inputs = header.get_usize(&display, "inputs")?;
            let alpha = header.get_f64(&display, "alpha")?;
            let weights = rd.floats(r * (inputs + 1))?;
            rd.finish()?;
            Ok(ClosureModel::Ridge(RidgeClosure {
                weights: DMatrix::from_vec(r, inputs + 1, weights),
                alpha,
            }))
        }
        "quadratic-tsvd" => {
            let r = header.get_usize(&display, "r")?;
            let svd_rank = header.get_usize(&display, "svd_rank")?;
            let linear = rd.floats(r * r)?;
            let quadratic = rd.floats(r * r * r)?;
            rd.finish()?;
            Ok(ClosureModel::Quadratic(QuadraticClosure {
                linear: DMatrix::from_vec(r, r, linear),
                quadratic,
                svd_rank,
            }))
        }
        "mlp" => {
            let inputs = header.get_usize(&display, "inputs")?;
            let layers: Vec<usize> = header
                .get(&display, "layers")?
                .split(',')
                .map(|v| v.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Header {
                    path: display.clone(),
                    detail: "bad layer list".into(),
                })?;
            let config = NnConfig {
                hidden: layers[..layers.len() - 1].to_vec(),
                learning_rate: header.get_f64(&display, "learning_rate")?,
                l2: header.get_f64(&display, "l2")?,
                dropout: header.get_f64(&display, "dropout")?,
                epochs: header.get_usize(&display, "epochs")?,
                batch_size: header.get_usize(&display, "batch_size")?,
                leaky_slope: header.get_f64(&display, "leaky_slope")?,
                seed: header.get_usize(&display, "seed")? as u64,
            };
            let mut weights = Vec::new();
            let mut in_dim = inputs;
            for &out_dim in &layers {
                let block = rd.floats(out_dim * in_dim)?;
                weights.push(DMatrix::from_vec(out_dim, in_dim, block));
                in_dim = out_dim;
            }
            let mut biases = Vec::new();
            for &out_dim in &layers {
                biases.push(DVector::from_vec(rd.floats(out_dim)?));
            }
            rd.finish()?;
            Ok(ClosureModel::Mlp(MlpClosure {
                weights,
                biases,
                leaky_slope: config.leaky_slope,
                config,
                loss_history: Vec::new(),
            }))
        }
        other => Err(Error::Header {
            path: display,
            detail: format!("unknown model kind `{other}`"),
        }),
    }
}
