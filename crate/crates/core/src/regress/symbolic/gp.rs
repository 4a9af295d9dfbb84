//! Genetic-programming search over expression trees.
//!
//! One run evolves a population of candidate expressions for a single
//! target column: ramped random initialization, per-generation constant
//! optimization (Levenberg-Marquardt), tournament selection, subtree
//! crossover, point/subtree mutation, single-individual elitism, early
//! stop at machine-level fitness. Fitness is `1 - SSE/SST` on the
//! training rows; individuals producing non-finite predictions score
//! negative infinity.

use crate::error::{Error, Result};
use crate::regress::symbolic::expr::{BinaryOp, Expr, UnaryOp};
use crate::regress::symbolic::lm::optimize_constants;
use crate::scalar::Real;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The six primitive pools. Every set carries `add sub mul` plus constant
/// and variable terminals; they differ in the unary functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveSet {
    pub id: u8,
    pub unaries: Vec<UnaryOp>,
}

impl PrimitiveSet {
    pub fn by_id(id: u8) -> Result<Self> {
        let unaries = match id {
            1 => vec![],
            2 => vec![UnaryOp::Sin],
            3 => vec![UnaryOp::Exp, UnaryOp::Sin],
            4 => vec![UnaryOp::Sin, UnaryOp::Cos],
            5 => vec![UnaryOp::Exp, UnaryOp::Sin, UnaryOp::Cos],
            6 => vec![
                UnaryOp::Exp,
                UnaryOp::Sin,
                UnaryOp::Cos,
                UnaryOp::Square,
                UnaryOp::Log,
            ],
            other => {
                return Err(Error::Argument(format!(
                    "primitive set id must be 1..=6, got {other}"
                )))
            }
        };
        Ok(PrimitiveSet { id, unaries })
    }
}

/// Search configuration. Population size, tournament size, constant
/// optimizer iterations and tree depth are fixed defaults; maximum length,
/// generation count and primitive set come from the tuning grids.
#[derive(Debug, Clone, PartialEq)]
pub struct SrConfig {
    pub primitive_set: u8,
    /// Node budget, from {5, 10, ..., 50}.
    pub max_length: usize,
    /// From {10, 25, 50, 75, 100}.
    pub generations: usize,
    pub population: usize,
    pub tournament: usize,
    pub lm_iterations: usize,
    pub max_depth: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elitism: usize,
    /// When set, at most this many individuals per generation get their
    /// constants optimized (the tournament winners, on demand); when
    /// unset the whole population is optimized every generation.
    pub lm_budget: Option<usize>,
    pub seed: u64,
}

impl SrConfig {
    pub fn new(seed: u64) -> Self {
        SrConfig {
            primitive_set: 2,
            max_length: 15,
            generations: 25,
            population: 1000,
            tournament: 5,
            lm_iterations: 10,
            max_depth: 5,
            crossover_prob: 0.9,
            mutation_prob: 0.25,
            elitism: 1,
            lm_budget: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        PrimitiveSet::by_id(self.primitive_set)?;
        if self.max_length % 5 != 0 || !(5..=50).contains(&self.max_length) {
            return Err(Error::Argument(format!(
                "max_length must come from {{5, 10, ..., 50}}, got {}",
                self.max_length
            )));
        }
        if ![10, 25, 50, 75, 100].contains(&self.generations) {
            return Err(Error::Argument(format!(
                "generations must come from {{10, 25, 50, 75, 100}}, got {}",
                self.generations
            )));
        }
        if self.population < 2 || self.tournament == 0 || self.max_depth < 2 {
            return Err(Error::Argument(
                "population >= 2, tournament >= 1, max_depth >= 2 required".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob)
            || !(0.0..=1.0).contains(&self.mutation_prob)
        {
            return Err(Error::Argument(
                "crossover and mutation probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one per-component run.
#[derive(Debug, Clone)]
pub struct GpRun<T> {
    pub expr: Expr<T>,
    pub fitness: f64,
    pub warning: Option<String>,
}

struct Individual<T> {
    expr: Expr<T>,
    fitness: Option<f64>,
    lm_done: bool,
}

const EARLY_STOP: f64 = 1.0 - 1e-12;
const SST_ZERO_SSE: f64 = 1e-24;

/// Evolves one expression for one target column.
pub fn evolve<T: Real>(
    inputs: &DMatrix<T>,
    target: &[T],
    cfg: &SrConfig,
    seed: u64,
) -> Result<GpRun<T>> {
    cfg.validate()?;
    let prims = PrimitiveSet::by_id(cfg.primitive_set)?;
    let vars = inputs.ncols();
    if vars == 0 || inputs.nrows() != target.len() || target.is_empty() {
        return Err(Error::Argument(
            "GP needs a nonempty dataset with at least one input column".into(),
        ));
    }

    let n = target.len();
    let mean = target.iter().fold(T::zero(), |a, &y| a + y) / T::from_usize(n).unwrap();
    let sst = target.iter().fold(T::zero(), |a, &y| {
        let d = y - mean;
        a + d * d
    });
    let sst_zero = sst == T::zero();
    let warning = sst_zero.then(|| {
        "target column is constant (SST = 0); fitness follows the degenerate rule".to_string()
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut population: Vec<Individual<T>> = (0..cfg.population)
        .map(|i| {
            // Ramped initialization: depth limits cycle 2..=max_depth,
            // alternating grow / full.
            let depth = 2 + i % (cfg.max_depth - 1);
            let full = i % 2 == 0;
            Individual {
                expr: random_tree(&mut rng, &prims, vars, depth, cfg.max_length, full),
                fitness: None,
                lm_done: false,
            }
        })
        .collect();

    let bulk_lm = cfg.lm_budget.is_none();
    let evaluate = |ind: &mut Individual<T>, with_lm: bool| {
        let sse = if with_lm {
            optimize_constants(&mut ind.expr, inputs, target, cfg.lm_iterations)
        } else {
            let values = ind.expr.eval_batch(inputs);
            let mut acc = T::zero();
            for (v, y) in values.iter().zip(target) {
                let e = *y - *v;
                acc += e * e;
            }
            acc
        };
        ind.lm_done = with_lm;
        ind.fitness = Some(fitness_of(sse, sst, sst_zero));
    };

    let mut best_snapshot: Option<(Expr<T>, f64)> = None;
    for generation in 0..cfg.generations {
        population
            .par_iter_mut()
            .filter(|ind| ind.fitness.is_none())
            .for_each(|ind| evaluate(ind, bulk_lm));

        let best = best_index(&population);
        let best_fitness = population[best].fitness.unwrap();
        let improved = best_snapshot
            .as_ref()
            .is_none_or(|(_, f)| best_fitness > *f);
        if improved {
            best_snapshot = Some((population[best].expr.clone(), best_fitness));
        }
        if best_fitness >= EARLY_STOP || generation + 1 == cfg.generations {
            break;
        }

        // Breeding. On-demand constant optimization when budgeted.
        let mut lm_spent = 0usize;
        let mut lm_on_demand = |pop: &mut Vec<Individual<T>>, index: usize| {
            if let Some(budget) = cfg.lm_budget {
                if !pop[index].lm_done && lm_spent < budget {
                    evaluate(&mut pop[index], true);
                    lm_spent += 1;
                }
            }
        };

        let mut next: Vec<Individual<T>> = Vec::with_capacity(cfg.population);
        for _ in 0..cfg.elitism.min(cfg.population) {
            let best = best_index(&population);
            next.push(Individual {
                expr: population[best].expr.clone(),
                fitness: None,
                lm_done: false,
            });
        }
        while next.len() < cfg.population {
            let first = tournament(&mut rng, &population, cfg.tournament);
            lm_on_demand(&mut population, first);
            let mut child = if rng.gen::<f64>() < cfg.crossover_prob {
                let second = tournament(&mut rng, &population, cfg.tournament);
                lm_on_demand(&mut population, second);
                crossover(
                    &mut rng,
                    &population[first].expr,
                    &population[second].expr,
                    cfg,
                )
            } else {
                population[first].expr.clone()
            };
            if rng.gen::<f64>() < cfg.mutation_prob {
                child = mutate(&mut rng, &child, &prims, vars, cfg);
            }
            debug_assert!(child.len() <= cfg.max_length && child.depth() <= cfg.max_depth);
            next.push(Individual {
                expr: child,
                fitness: None,
                lm_done: false,
            });
        }
        population = next;
    }

    let (expr, fitness) = best_snapshot.expect("at least one generation ran");
    Ok(GpRun {
        expr,
        fitness,
        warning,
    })
}

fn fitness_of<T: Real>(sse: T, sst: T, sst_zero: bool) -> f64 {
    if !sse.is_finite() {
        return f64::NEG_INFINITY;
    }
    if sst_zero {
        return if sse.as_f64() <= SST_ZERO_SSE {
            1.0
        } else {
            f64::NEG_INFINITY
        };
    }
    let f = (T::one() - sse / sst).as_f64();
    if f.is_finite() {
        f
    } else {
        f64::NEG_INFINITY
    }
}

fn best_index<T>(population: &[Individual<T>]) -> usize {
    let mut best = 0;
    let mut best_fitness = f64::NEG_INFINITY;
    for (i, ind) in population.iter().enumerate() {
        let f = ind.fitness.unwrap_or(f64::NEG_INFINITY);
        if f > best_fitness {
            best = i;
            best_fitness = f;
        }
    }
    best
}

fn tournament<T>(rng: &mut ChaCha8Rng, population: &[Individual<T>], size: usize) -> usize {
    let mut winner = rng.gen_range(0..population.len());
    for _ in 1..size {
        let challenger = rng.gen_range(0..population.len());
        let cf = population[challenger].fitness.unwrap_or(f64::NEG_INFINITY);
        let wf = population[winner].fitness.unwrap_or(f64::NEG_INFINITY);
        if cf > wf {
            winner = challenger;
        }
    }
    winner
}

/// Random tree within a depth limit and node budget. `full` expands every
/// branch to the depth limit where the budget allows; otherwise terminals
/// may appear early (grow initialization).
pub(crate) fn random_tree<T: Real>(
    rng: &mut ChaCha8Rng,
    prims: &PrimitiveSet,
    vars: usize,
    depth_budget: usize,
    length_budget: usize,
    full: bool,
) -> Expr<T> {
    debug_assert!(depth_budget >= 1 && length_budget >= 1);
    let can_binary = depth_budget >= 2 && length_budget >= 3;
    let can_unary = depth_budget >= 2 && length_budget >= 2 && !prims.unaries.is_empty();
    let make_leaf = !(can_binary || can_unary) || (!full && rng.gen::<f64>() < 0.3);
    if make_leaf {
        return random_leaf(rng, vars);
    }

    // Pick among the feasible operators, binaries weighted individually.
    let binary_choices = if can_binary { 3 } else { 0 };
    let unary_choices = if can_unary { prims.unaries.len() } else { 0 };
    let pick = rng.gen_range(0..binary_choices + unary_choices);
    if pick < binary_choices {
        let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul][pick];
        let remaining = length_budget - 1;
        let left_budget = 1 + rng.gen_range(0..remaining - 1);
        let left = random_tree(rng, prims, vars, depth_budget - 1, left_budget, full);
        let right_budget = remaining - left.len();
        let right = random_tree(rng, prims, vars, depth_budget - 1, right_budget, full);
        Expr::Binary(op, Box::new(left), Box::new(right))
    } else {
        let op = prims.unaries[pick - binary_choices];
        let inner = random_tree(rng, prims, vars, depth_budget - 1, length_budget - 1, full);
        Expr::Unary(op, Box::new(inner))
    }
}

fn random_leaf<T: Real>(rng: &mut ChaCha8Rng, vars: usize) -> Expr<T> {
    if rng.gen::<f64>() < 0.5 {
        Expr::Constant(T::of(rng.gen_range(-1.0..1.0)))
    } else {
        Expr::Variable(rng.gen_range(0..vars))
    }
}

/// Subtree exchange with retries until the caps hold; falls back to the
/// first parent if no admissible child appears.
fn crossover<T: Real>(
    rng: &mut ChaCha8Rng,
    first: &Expr<T>,
    second: &Expr<T>,
    cfg: &SrConfig,
) -> Expr<T> {
    for _ in 0..16 {
        let at = rng.gen_range(0..first.len());
        let from = rng.gen_range(0..second.len());
        let graft = subtree_at(second, from).clone();
        let child = replace_subtree(first, at, graft);
        if child.len() <= cfg.max_length && child.depth() <= cfg.max_depth {
            return child;
        }
    }
    first.clone()
}

/// Point mutation (same-arity symbol swap) or subtree regrowth, evenly.
fn mutate<T: Real>(
    rng: &mut ChaCha8Rng,
    expr: &Expr<T>,
    prims: &PrimitiveSet,
    vars: usize,
    cfg: &SrConfig,
) -> Expr<T> {
    let at = rng.gen_range(0..expr.len());
    let point = rng.gen::<f64>() < 0.5;
    if point {
        let replacement = match subtree_at(expr, at) {
            Expr::Constant(_) => Expr::Constant(T::of(rng.gen_range(-1.0..1.0))),
            Expr::Variable(_) => Expr::Variable(rng.gen_range(0..vars)),
            Expr::Unary(_, a) => {
                if prims.unaries.is_empty() {
                    return expr.clone();
                }
                let op = prims.unaries[rng.gen_range(0..prims.unaries.len())];
                Expr::Unary(op, a.clone())
            }
            Expr::Binary(_, a, b) => {
                let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul]
                    [rng.gen_range(0..3)];
                Expr::Binary(op, a.clone(), b.clone())
            }
        };
        replace_subtree(expr, at, replacement)
    } else {
        let level = level_of(expr, at);
        let old_len = subtree_at(expr, at).len();
        let depth_budget = (cfg.max_depth + 1).saturating_sub(level).max(1);
        let length_budget = (cfg.max_length - (expr.len() - old_len)).max(1);
        let graft = random_tree(rng, prims, vars, depth_budget, length_budget, false);
        let child = replace_subtree(expr, at, graft);
        if child.len() <= cfg.max_length && child.depth() <= cfg.max_depth {
            child
        } else {
            expr.clone()
        }
    }
}

/// Preorder node access.
fn subtree_at<T>(expr: &Expr<T>, index: usize) -> &Expr<T> {
    fn walk<'a, T>(expr: &'a Expr<T>, index: usize, cursor: &mut usize) -> Option<&'a Expr<T>> {
        if *cursor == index {
            return Some(expr);
        }
        *cursor += 1;
        match expr {
            Expr::Constant(_) | Expr::Variable(_) => None,
            Expr::Unary(_, a) => walk(a, index, cursor),
            Expr::Binary(_, a, b) => {
                walk(a, index, cursor).or_else(|| walk(b, index, cursor))
            }
        }
    }
    let mut cursor = 0;
    walk(expr, index, &mut cursor).expect("node index within tree")
}

/// Rebuilds the tree with the node at `index` (preorder) replaced.
fn replace_subtree<T: Clone>(expr: &Expr<T>, index: usize, graft: Expr<T>) -> Expr<T> {
    fn walk<T: Clone>(
        expr: &Expr<T>,
        index: usize,
        cursor: &mut usize,
        graft: &mut Option<Expr<T>>,
    ) -> Expr<T> {
        if *cursor == index {
            *cursor += 1;
            return graft.take().expect("graft consumed once");
        }
        *cursor += 1;
        match expr {
            Expr::Constant(_) | Expr::Variable(_) => expr.clone(),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(walk(a, index, cursor, graft))),
            Expr::Binary(op, a, b) => {
                let left = walk(a, index, cursor, graft);
                let right = walk(b, index, cursor, graft);
                Expr::Binary(*op, Box::new(left), Box::new(right))
            }
        }
    }
    let mut cursor = 0;
    let mut slot = Some(graft);
    walk(expr, index, &mut cursor, &mut slot)
}

/// Level (1-based from the root) of the node at a preorder index.
fn level_of<T>(expr: &Expr<T>, index: usize) -> usize {
    fn walk<T>(expr: &Expr<T>, index: usize, cursor: &mut usize, level: usize) -> Option<usize> {
        if *cursor == index {
            return Some(level);
        }
        *cursor += 1;
        match expr {
            Expr::Constant(_) | Expr::Variable(_) => None,
            Expr::Unary(_, a) => walk(a, index, cursor, level + 1),
            Expr::Binary(_, a, b) => walk(a, index, cursor, level + 1)
                .or_else(|| walk(b, index, cursor, level + 1)),
        }
    }
    let mut cursor = 0;
    walk(expr, index, &mut cursor, 1).expect("node index within tree")
}
