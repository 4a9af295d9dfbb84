//! Symbolic-regression closure: per-component genetic programming with
//! Levenberg-Marquardt constant refinement.

mod expr;
mod gp;
mod lm;
mod parse;
mod simplify;

pub use expr::{BinaryOp, Expr, UnaryOp, EXP_CLAMP, LOG_GUARD};
pub use gp::{evolve, GpRun, PrimitiveSet, SrConfig};
pub use lm::optimize_constants;
pub use parse::{parse_expr, print_expr};
pub use simplify::simplify;

use crate::closure::ClosureDataset;
use crate::error::{Error, Result};
use crate::scalar::Real;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// A fitted symbolic closure: one expression per target component.
#[derive(Debug, Clone)]
pub struct SymbolicClosure<T> {
    pub components: Vec<Expr<T>>,
    /// Training fitness per component.
    pub fitness: Vec<f64>,
    pub config: SrConfig,
    pub warnings: Vec<String>,
}

impl<T: Real> SymbolicClosure<T> {
    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    /// Numeric constants across all components.
    pub fn parameter_count(&self) -> usize {
        self.components.iter().map(Expr::constant_count).sum()
    }

    pub fn predict(&self, input: &[T]) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.components.len());
        for (i, g) in self.components.iter().enumerate() {
            let v = g.eval(input);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "symbolic component g{} at the given state",
                    i + 1
                )));
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Simplified per-term occurrence counts summed over components.
    pub fn occurrence_counts(&self) -> BTreeMap<String, usize> {
        let mut total = BTreeMap::new();
        for g in &self.components {
            for (term, count) in simplify(g).occurrences() {
                *total.entry(term).or_insert(0) += count;
            }
        }
        total
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Per-component seed derived from the run seed.
pub fn component_seed(seed: u64, component: usize) -> u64 {
    splitmix64(seed ^ splitmix64(component as u64 + 1))
}

/// Fits one expression per target column; components run independently
/// (and in parallel) with seeds derived from `cfg.seed`.
pub fn fit_symbolic<T: Real>(
    dataset: &ClosureDataset<T>,
    cfg: &SrConfig,
) -> Result<SymbolicClosure<T>> {
    cfg.validate()?;
    let r = dataset.resolved_dim;
    let runs: Vec<GpRun<T>> = (0..r)
        .into_par_iter()
        .map(|i| {
            let target = dataset.target_column(i);
            evolve(
                &dataset.inputs,
                &target,
                cfg,
                component_seed(cfg.seed, i),
            )
        })
        .collect::<Result<_>>()?;

    let mut components = Vec::with_capacity(r);
    let mut fitness = Vec::with_capacity(r);
    let mut warnings = Vec::new();
    for (i, run) in runs.into_iter().enumerate() {
        if let Some(w) = run.warning {
            warnings.push(format!("g{}: {w}", i + 1));
        }
        components.push(run.expr);
        fitness.push(run.fitness);
    }
    Ok(SymbolicClosure {
        components,
        fitness,
        config: cfg.clone(),
        warnings,
    })
}

/// Writes the symbolic model as plain text: `#`-prefixed metadata, then
/// one `g<i> = <expression>` line per component.
pub fn save_symbolic(model: &SymbolicClosure<f64>, path: &Path, manifest: &str) -> Result<()> {
    let display = path.display().to_string();
    let mut out = String::new();
    if !manifest.is_empty() {
        out.push_str(&format!("# {manifest}\n"));
    }
    out.push_str(&format!("# kind symbolic\n# r {}\n", model.components.len()));
    out.push_str(&format!(
        "# primitive_set {} max_length {} generations {} population {} tournament {} lm_iterations {} max_depth {} seed {}\n",
        model.config.primitive_set,
        model.config.max_length,
        model.config.generations,
        model.config.population,
        model.config.tournament,
        model.config.lm_iterations,
        model.config.max_depth,
        model.config.seed,
    ));
    out.push_str(&format!(
        "# crossover {} mutation {} elitism {}\n",
        model.config.crossover_prob, model.config.mutation_prob, model.config.elitism
    ));
    for (i, f) in model.fitness.iter().enumerate() {
        out.push_str(&format!("# fitness g{} {:.16e}\n", i + 1, f));
    }
    for w in &model.warnings {
        out.push_str(&format!("# warning {w}\n"));
    }
    for (i, g) in model.components.iter().enumerate() {
        out.push_str(&format!("g{} = {}\n", i + 1, print_expr(g)));
    }
    let mut file =
        std::fs::File::create(path).map_err(|e| Error::io(display.clone(), e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(display, e))
}

/// Reads a symbolic model file; metadata lines are kept only as far as the
/// expressions need them (the expressions themselves are authoritative).
pub fn load_symbolic(path: &Path) -> Result<SymbolicClosure<f64>> {
    let display = path.display().to_string();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(display.clone(), e))?;
    let mut components = Vec::new();
    let mut fitness = Vec::new();
    let mut seed = 0u64;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let fields: Vec<&str> = meta.split_whitespace().collect();
            if fields.first() == Some(&"fitness") && fields.len() == 3 {
                if let Ok(f) = fields[2].parse::<f64>() {
                    fitness.push(f);
                }
            }
            if let Some(pos) = fields.iter().position(|&f| f == "seed") {
                if let Some(s) = fields.get(pos + 1).and_then(|v| v.parse().ok()) {
                    seed = s;
                }
            }
            continue;
        }
        let (_, rhs) = line.split_once('=').ok_or_else(|| Error::Header {
            path: display.clone(),
            detail: format!("expected `g<i> = <expression>`, got `{line}`"),
        })?;
        components.push(parse_expr(rhs.trim())?);
    }
    if components.is_empty() {
        return Err(Error::Header {
            path: display,
            detail: "no expressions in symbolic model file".into(),
        });
    }
    if fitness.len() != components.len() {
        fitness = vec![f64::NAN; components.len()];
    }
    Ok(SymbolicClosure {
        components,
        fitness,
        config: SrConfig::new(seed),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn planted_dataset(n: usize, seed: u64) -> ClosureDataset<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let inputs = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-2.0..2.0));
        let mut targets = DMatrix::zeros(n, 2);
        for j in 0..n {
            targets[(j, 0)] = 0.5 * inputs[(j, 0)] * inputs[(j, 1)];
            targets[(j, 1)] = inputs[(j, 1)] - 0.7;
        }
        ClosureDataset {
            inputs,
            targets,
            times: (0..n).map(|j| j as f64 * 0.1).collect(),
            resolved_dim: 2,
            unresolved_dim: 4,
        }
    }

    fn fast_config(seed: u64) -> SrConfig {
        let mut cfg = SrConfig::new(seed);
        cfg.population = 200;
        cfg.generations = 10;
        cfg
    }

    #[test]
    fn fits_each_component_independently() {
        let ds = planted_dataset(100, 1);
        let model = fit_symbolic(&ds, &fast_config(2)).unwrap();
        assert_eq!(model.output_dim(), 2);
        assert!(model.fitness.iter().all(|&f| f > 0.95), "{:?}", model.fitness);
    }

    #[test]
    fn prediction_is_pure_and_deterministic() {
        let ds = planted_dataset(60, 3);
        let model = fit_symbolic(&ds, &fast_config(4)).unwrap();
        let a = model.predict(&[0.4, -1.2]).unwrap();
        let b = model.predict(&[0.4, -1.2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_file_round_trips_expressions_bit_exactly() {
        let ds = planted_dataset(60, 5);
        let model = fit_symbolic(&ds, &fast_config(6)).unwrap();
        let dir = std::env::temp_dir().join("romlab_symbolic_io");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.srx");
        save_symbolic(&model, &path, "test").unwrap();
        let back = load_symbolic(&path).unwrap();
        assert_eq!(model.components, back.components);
    }

    #[test]
    fn occurrence_counts_aggregate_components() {
        let model = SymbolicClosure::<f64> {
            components: vec![
                parse_expr("u1 * u1 + sin(u2)").unwrap(),
                parse_expr("u1 - 0.5").unwrap(),
            ],
            fitness: vec![1.0, 1.0],
            config: SrConfig::new(0),
            warnings: Vec::new(),
        };
        let counts = model.occurrence_counts();
        assert_eq!(counts["u1"], 3);
        assert_eq!(counts["u2"], 1);
        assert_eq!(counts["sin"], 1);
    }
}
