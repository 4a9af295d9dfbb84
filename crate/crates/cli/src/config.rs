//! Flat sectioned key-value configuration files.
//!
//! ```text
//! [problem]
//! r = 3
//! big_r = 15
//!
//! [burgers]
//! viscosity = 0.005
//! ```
//!
//! `#` starts a comment. Values are plain strings until typed by the
//! accessor; lists are comma-separated; network architectures use
//! `64-128-64` and are separated by `;`.

use romlab::error::{Error, Result};
use romlab::eval::{EnergyForm, HyperPoint};
use romlab::fields::{BurgersConfig, InitialProfile};
use romlab::pipeline::{Family, PipelineConfig};
use romlab::regress::{NnConfig, SrConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::from("");
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(at) => &raw[..at],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Header {
                path: origin.to_string(),
                detail: format!("line {}: expected `key = value`", lineno + 1),
            })?;
            sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { sections })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(String::as_str)
    }

    pub fn set(&mut self, section: &str, key: &str, value: String) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value);
    }

    fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key).ok_or_else(|| {
            Error::Validation(format!("config is missing `[{section}] {key}`"))
        })
    }

    fn parse_value<T: std::str::FromStr>(section: &str, key: &str, raw: &str) -> Result<T> {
        raw.parse().map_err(|_| {
            Error::Validation(format!("config value `[{section}] {key} = {raw}` is invalid"))
        })
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            Some(raw) => Self::parse_value(section, key, raw),
            None => Ok(default),
        }
    }

    pub fn f64_of(&self, section: &str, key: &str) -> Result<f64> {
        Self::parse_value(section, key, self.require(section, key)?)
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            Some(raw) => Self::parse_value(section, key, raw),
            None => Ok(default),
        }
    }

    pub fn usize_of(&self, section: &str, key: &str) -> Result<usize> {
        Self::parse_value(section, key, self.require(section, key)?)
    }

    fn list<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => {
                let mut out = Vec::new();
                for piece in raw.split(',') {
                    out.push(Self::parse_value(section, key, piece.trim())?);
                }
                Ok(Some(out))
            }
        }
    }
}

/// Assembles the pipeline configuration from the file plus command-line
/// overrides already merged into it.
pub fn build_pipeline_config(cfg: &ConfigFile) -> Result<PipelineConfig> {
    let burgers = BurgersConfig {
        resolution: cfg.usize_of("burgers", "n")?,
        viscosity: cfg.f64_of("burgers", "viscosity")?,
        end_time: cfg.f64_of("burgers", "end_time")?,
        dt_sample: cfg.f64_of("burgers", "dt_sample")?,
        profile: InitialProfile::parse(cfg.get("burgers", "profile").unwrap_or("mixed"))?,
        seed: cfg.usize_or("burgers", "seed", 1)? as u64,
    };
    let family = Family::parse(cfg.get("train", "family").unwrap_or("sr"))?;
    let seed = cfg.usize_or("train", "seed", 0)? as u64;
    let seeds = cfg.usize_or("train", "seeds", if family.is_stochastic() { 5 } else { 1 })?;

    Ok(PipelineConfig {
        out_dir: PathBuf::from(cfg.get("paths", "out").unwrap_or("out")),
        burgers,
        reynolds: match cfg.get("problem", "re") {
            Some(raw) => Some(ConfigFile::parse_value("problem", "re", raw)?),
            None => None,
        },
        resolved_dim: cfg.usize_of("problem", "r")?,
        probe_dim: cfg.usize_of("problem", "big_r")?,
        window_fractions: (
            cfg.f64_or("windows", "train", 0.25)?,
            cfg.f64_or("windows", "val", 0.25)?,
            cfg.f64_or("windows", "test", 0.5)?,
        ),
        family,
        grid: Vec::new(), // built per stage; the quadratic default needs the dataset
        seeds,
        seed,
        stepper_order: cfg.usize_or("stepper", "order", 3)?,
        substeps: cfg.usize_or("stepper", "substeps", 5)?,
        energy_form: EnergyForm::parse(cfg.get("eval", "energy_form").unwrap_or("sqrt"))?,
    })
}

/// Builds the hyperparameter grid for the configured family. The
/// quadratic default rank range needs the design matrix, so callers pass
/// the dataset rank lazily.
pub fn build_grid(
    cfg: &ConfigFile,
    pipeline: &PipelineConfig,
    design_rank: impl FnOnce() -> Result<usize>,
) -> Result<Vec<HyperPoint>> {
    match pipeline.family {
        Family::Ridge => {
            let alphas = match cfg.list::<f64>("train", "alphas")? {
                Some(list) => list,
                None => {
                    // {1..9} x 10^{0..5}.
                    let mut out = Vec::new();
                    for exponent in 0..=5 {
                        for mantissa in 1..=9 {
                            out.push(mantissa as f64 * 10f64.powi(exponent));
                        }
                    }
                    out
                }
            };
            Ok(alphas.into_iter().map(|alpha| HyperPoint::Ridge { alpha }).collect())
        }
        Family::Quadratic => {
            let ranks = match cfg.list::<usize>("train", "svd_ranks")? {
                Some(list) => list,
                None => (1..=design_rank()?).collect(),
            };
            Ok(ranks
                .into_iter()
                .map(|svd_rank| HyperPoint::Quadratic { svd_rank })
                .collect())
        }
        Family::Symbolic => {
            let max_lengths = cfg
                .list::<usize>("train", "max_lengths")?
                .ok_or_else(|| Error::Validation(
                    "config needs `[train] max_lengths` for the sr family (grid {5,10,..,50})"
                        .into(),
                ))?;
            let generations = cfg
                .list::<usize>("train", "generations")?
                .ok_or_else(|| Error::Validation(
                    "config needs `[train] generations` for the sr family ({10,25,50,75,100})"
                        .into(),
                ))?;
            let sets = cfg
                .list::<u8>("train", "primitive_sets")?
                .ok_or_else(|| Error::Validation(
                    "config needs `[train] primitive_sets` for the sr family (1..=6)".into(),
                ))?;
            let mut base = SrConfig::new(pipeline.seed);
            base.population = cfg.usize_or("train", "population", base.population)?;
            base.tournament = cfg.usize_or("train", "tournament", base.tournament)?;
            base.lm_iterations = cfg.usize_or("train", "lm_iterations", base.lm_iterations)?;
            base.max_depth = cfg.usize_or("train", "max_depth", base.max_depth)?;
            base.crossover_prob = cfg.f64_or("train", "crossover", base.crossover_prob)?;
            base.mutation_prob = cfg.f64_or("train", "mutation", base.mutation_prob)?;
            if let Some(budget) = cfg.list::<usize>("train", "lm_budget")? {
                base.lm_budget = budget.first().copied();
            }
            let mut grid = Vec::new();
            for &max_length in &max_lengths {
                for &gens in &generations {
                    for &set in &sets {
                        let mut point = base.clone();
                        point.max_length = max_length;
                        point.generations = gens;
                        point.primitive_set = set;
                        point.validate()?;
                        grid.push(HyperPoint::Symbolic(point));
                    }
                }
            }
            Ok(grid)
        }
        Family::Mlp => {
            let rates = cfg
                .list::<f64>("train", "learning_rates")?
                .unwrap_or_else(|| vec![1e-4, 1e-3, 1e-2]);
            let l2s = cfg
                .list::<f64>("train", "l2s")?
                .unwrap_or_else(|| vec![1e-5, 1e-4, 1e-3]);
            let dropouts = cfg
                .list::<f64>("train", "dropouts")?
                .unwrap_or_else(|| vec![0.3, 0.4, 0.5]);
            let architectures: Vec<Vec<usize>> = match cfg.get("train", "architectures") {
                Some(raw) => {
                    let mut out = Vec::new();
                    for arch in raw.split(';') {
                        let mut widths = Vec::new();
                        for w in arch.trim().split('-') {
                            widths.push(ConfigFile::parse_value(
                                "train",
                                "architectures",
                                w.trim(),
                            )?);
                        }
                        out.push(widths);
                    }
                    out
                }
                None => vec![
                    vec![64, 128, 256, 512, 256, 128, 64],
                    vec![64, 128, 256, 128, 64],
                    vec![64, 128, 64],
                ],
            };
            let mut base = NnConfig::new(pipeline.seed);
            base.epochs = cfg.usize_or("train", "epochs", base.epochs)?;
            base.batch_size = cfg.usize_or("train", "batch_size", base.batch_size)?;
            base.leaky_slope = cfg.f64_or("train", "leaky_slope", base.leaky_slope)?;
            let mut grid = Vec::new();
            for arch in &architectures {
                for &rate in &rates {
                    for &l2 in &l2s {
                        for &dropout in &dropouts {
                            let mut point = base.clone();
                            point.hidden = arch.clone();
                            point.learning_rate = rate;
                            point.l2 = l2;
                            point.dropout = dropout;
                            point.validate()?;
                            grid.push(HyperPoint::Mlp(point));
                        }
                    }
                }
            }
            Ok(grid)
        }
    }
}
