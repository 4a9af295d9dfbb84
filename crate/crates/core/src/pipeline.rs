//! End-to-end orchestration: generate, decompose, target, train, run,
//! evaluate. Every stage communicates through files under one output
//! directory, so running the stages one by one and running the bundled
//! pipeline produce identical artifacts. All randomness is seeded;
//! rerunning with the same configuration reproduces every output byte.

use crate::closure::{
    compute_targets, load_dataset, save_dataset, split_windows, Windows,
};
use crate::error::{Error, Result};
use crate::eval::{
    grid_search, kinetic_energy_field, mean_mse_tr, multi_seed, occurrence_statistics, r2_val,
    rmse_test, write_energy_csv, write_metrics_csv, EnergyForm, EnergyOps, HyperPoint,
    MetricRow, RomEvalContext, SeedStats,
};
use crate::fields::{generate_burgers, load_ensemble, save_ensemble, BurgersConfig, FieldEnsemble};
use crate::io::fnv1a;
use crate::pod::{compute_pod_max, load_basis, save_basis, FieldForm, PodBasis};
use crate::regress::{load_model, save_model, ClosureModel};
use crate::rom::{assemble_operators, load_operators, save_operators};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Closure family selector (command-line names in comments).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `lr`: linear ridge regression.
    Ridge,
    /// `d2`: quadratic ansatz with truncated-SVD least squares.
    Quadratic,
    /// `sr`: genetic-programming symbolic regression.
    Symbolic,
    /// `nn`: multilayer perceptron.
    Mlp,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Ridge => "lr",
            Family::Quadratic => "d2",
            Family::Symbolic => "sr",
            Family::Mlp => "nn",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lr" => Ok(Family::Ridge),
            "d2" => Ok(Family::Quadratic),
            "sr" => Ok(Family::Symbolic),
            "nn" => Ok(Family::Mlp),
            other => Err(Error::Argument(format!(
                "unknown family `{other}` (expected lr|d2|sr|nn)"
            ))),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Family::Symbolic | Family::Mlp)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub out_dir: PathBuf,
    pub burgers: BurgersConfig<f64>,
    /// Defaults to `1 / viscosity` when unset.
    pub reynolds: Option<f64>,
    pub resolved_dim: usize,
    pub probe_dim: usize,
    pub window_fractions: (f64, f64, f64),
    pub family: Family,
    /// Candidate hyperparameters for the hold-out search.
    pub grid: Vec<HyperPoint>,
    /// Seed count for stochastic families (seeds run 0..n-1).
    pub seeds: usize,
    pub seed: u64,
    pub stepper_order: usize,
    /// Integrator steps per sampling interval.
    pub substeps: usize,
    /// Kinetic-energy expression used throughout the run.
    pub energy_form: EnergyForm,
}

impl PipelineConfig {
    pub fn reynolds(&self) -> f64 {
        self.reynolds.unwrap_or(1.0 / self.burgers.viscosity)
    }

    pub fn ensemble_path(&self) -> PathBuf {
        self.out_dir.join("ensemble.snap")
    }
    pub fn basis_path(&self) -> PathBuf {
        self.out_dir.join("basis.bas")
    }
    pub fn operators_path(&self) -> PathBuf {
        self.out_dir.join("operators.ops")
    }
    pub fn dataset_path(&self) -> PathBuf {
        self.out_dir.join("dataset.csv")
    }
    pub fn model_path(&self, seed: u64) -> PathBuf {
        let ext = match self.family {
            Family::Symbolic => "srx",
            _ => "mdl",
        };
        self.out_dir.join(format!("model_seed{seed}.{ext}"))
    }
    pub fn grid_report_path(&self) -> PathBuf {
        self.out_dir.join("grid.csv")
    }
    pub fn grom_energy_path(&self) -> PathBuf {
        self.out_dir.join("energy_grom.csv")
    }
    pub fn energy_path(&self, seed: u64) -> PathBuf {
        self.out_dir.join(format!("energy_seed{seed}.csv"))
    }
    pub fn report_path(&self) -> PathBuf {
        self.out_dir.join("report.csv")
    }
    pub fn summary_path(&self) -> PathBuf {
        self.out_dir.join("summary.txt")
    }
    pub fn occurrences_path(&self) -> PathBuf {
        self.out_dir.join("occurrences.csv")
    }

    fn validate(&self) -> Result<()> {
        if self.resolved_dim == 0 || self.resolved_dim >= self.probe_dim {
            return Err(Error::Validation(format!(
                "resolved dimension must satisfy 1 <= r < R (r = {}, R = {})",
                self.resolved_dim, self.probe_dim
            )));
        }
        if self.seeds == 0 {
            return Err(Error::Validation("need at least one seed".into()));
        }
        if self.substeps == 0 {
            return Err(Error::Validation("substeps must be positive".into()));
        }
        if !(1..=3).contains(&self.stepper_order) {
            return Err(Error::Validation("stepper order must be 1..=3".into()));
        }
        Ok(())
    }

    fn seed_list(&self) -> Vec<u64> {
        if self.family.is_stochastic() {
            (0..self.seeds as u64).collect()
        } else {
            vec![self.seed]
        }
    }
}

/// `version seed input-hashes` provenance line stamped into output headers.
fn manifest_line(seed: u64, inputs: &[&Path]) -> String {
    let mut line = format!("romlab {} seed {}", env!("CARGO_PKG_VERSION"), seed);
    for path in inputs {
        let hash = std::fs::read(path).map(|bytes| fnv1a(&bytes)).unwrap_or(0);
        let _ = write!(
            line,
            " {}:{:016x}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("?"),
            hash
        );
    }
    line
}

fn ensure_out_dir(cfg: &PipelineConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::io(cfg.out_dir.display().to_string(), e))
}

/// Generates the snapshot ensemble.
pub fn stage_generate(cfg: &PipelineConfig) -> Result<String> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let ensemble = generate_burgers(&cfg.burgers)?;
    save_ensemble(
        &ensemble,
        &cfg.ensemble_path(),
        &manifest_line(cfg.burgers.seed, &[]),
    )?;
    Ok(format!(
        "generate: N = {}, K = {}, nu = {:e}, profile = {}",
        ensemble.node_count(),
        ensemble.snapshot_count(),
        cfg.burgers.viscosity,
        cfg.burgers.profile.as_str()
    ))
}

/// Builds the POD basis of the training window and the reduced operators.
pub fn stage_pod(cfg: &PipelineConfig) -> Result<String> {
    cfg.validate()?;
    let ensemble = load_ensemble(&cfg.ensemble_path())?;
    let windows = split_windows(ensemble.snapshot_count(), cfg.window_fractions)?;
    let training = ensemble.window(windows.train.clone())?;
    let basis = compute_pod_max(&training)?;
    if cfg.probe_dim > basis.rank() {
        return Err(Error::Validation(format!(
            "probe dimension R = {} exceeds the training-window rank {}",
            cfg.probe_dim,
            basis.rank()
        )));
    }
    let manifest = manifest_line(cfg.seed, &[&cfg.ensemble_path()]);
    save_basis(&basis, &cfg.basis_path(), &manifest)?;
    let operators = assemble_operators(&basis, cfg.resolved_dim, cfg.reynolds())?;
    save_operators(&operators, &cfg.operators_path(), &manifest)?;
    Ok(format!(
        "pod: training window {:?}, numerical rank {}, retained R = {}, r = {}",
        windows.train,
        basis.rank(),
        cfg.probe_dim,
        cfg.resolved_dim
    ))
}

/// Computes the exact closure targets over the training window.
pub fn stage_targets(cfg: &PipelineConfig) -> Result<String> {
    cfg.validate()?;
    let ensemble = load_ensemble(&cfg.ensemble_path())?;
    let basis = load_basis(&cfg.basis_path())?;
    let windows = split_windows(ensemble.snapshot_count(), cfg.window_fractions)?;
    let training = ensemble.window(windows.train.clone())?;
    let dataset = compute_targets(&training, &basis, cfg.resolved_dim, cfg.probe_dim)?;
    save_dataset(
        &dataset,
        &cfg.dataset_path(),
        &manifest_line(cfg.seed, &[&cfg.ensemble_path(), &cfg.basis_path()]),
    )?;
    Ok(format!(
        "targets: {} samples, r = {}, R = {}",
        dataset.len(),
        cfg.resolved_dim,
        cfg.probe_dim
    ))
}

/// Reference kinetic-energy series: full-rank projected coefficients over
/// the training and validation windows, raw generator fields over the
/// test window.
pub fn fom_energy_series(
    ensemble: &FieldEnsemble<f64>,
    basis: &PodBasis<f64>,
    energy: &EnergyOps<f64>,
    windows: &Windows,
) -> Result<Vec<f64>> {
    fom_energy_series_in_form(ensemble, basis, energy, windows, EnergyForm::SqrtHalf)
}

pub fn fom_energy_series_in_form(
    ensemble: &FieldEnsemble<f64>,
    basis: &PodBasis<f64>,
    energy: &EnergyOps<f64>,
    windows: &Windows,
    form: EnergyForm,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ensemble.snapshot_count());
    for k in 0..ensemble.snapshot_count() {
        if k < windows.val.end {
            let coeffs = basis.project(
                &ensemble.snapshot(k),
                basis.rank(),
                FieldForm::Centered,
            )?;
            out.push(energy.energy_in_form(&coeffs, form)?);
        } else {
            let field_energy = kinetic_energy_field(
                ensemble.discretization(),
                &ensemble.raw_snapshot(k),
            )?;
            out.push(match form {
                EnergyForm::SqrtHalf => field_energy,
                EnergyForm::Quadratic => 2.0 * field_energy * field_energy,
            });
        }
    }
    Ok(out)
}

struct EvalSetup {
    ensemble: FieldEnsemble<f64>,
    windows: Windows,
    energy: EnergyOps<f64>,
    e_fom: Vec<f64>,
    initial: Vec<f64>,
    pod_rank: usize,
}

fn load_eval_setup(cfg: &PipelineConfig) -> Result<EvalSetup> {
    let ensemble = load_ensemble(&cfg.ensemble_path())?;
    let basis = load_basis(&cfg.basis_path())?;
    let windows = split_windows(ensemble.snapshot_count(), cfg.window_fractions)?;
    let energy = EnergyOps::new(&basis)?;
    let e_fom =
        fom_energy_series_in_form(&ensemble, &basis, &energy, &windows, cfg.energy_form)?;
    let initial = basis.project(&ensemble.snapshot(0), cfg.resolved_dim, FieldForm::Centered)?;
    Ok(EvalSetup {
        ensemble,
        windows,
        energy,
        e_fom,
        initial,
        pod_rank: basis.rank(),
    })
}

fn eval_context<'a>(
    cfg: &PipelineConfig,
    setup: &'a EvalSetup,
    operators: &'a crate::rom::RomOperators<f64>,
) -> RomEvalContext<'a, f64> {
    RomEvalContext {
        operators,
        energy: &setup.energy,
        initial_history: vec![setup.initial.clone()],
        sample_every: cfg.substeps,
        dt: setup.ensemble.dt_sample() / cfg.substeps as f64,
        order: cfg.stepper_order,
        reynolds: cfg.reynolds(),
        start_time: setup.ensemble.times()[0],
        energy_form: cfg.energy_form,
    }
}

/// Hold-out grid search (seeded with the base seed) followed by per-seed
/// refits of the selected configuration.
pub fn stage_train(cfg: &PipelineConfig) -> Result<String> {
    cfg.validate()?;
    if cfg.grid.is_empty() {
        return Err(Error::Validation("empty hyperparameter grid".into()));
    }
    let setup = load_eval_setup(cfg)?;
    let dataset = load_dataset(&cfg.dataset_path())?;
    let operators = load_operators(&cfg.operators_path())?;
    let ctx = eval_context(cfg, &setup, &operators);

    let seeded_grid: Vec<HyperPoint> = cfg
        .grid
        .iter()
        .map(|p| p.with_seed(cfg.seed))
        .collect();
    let (_, report) = grid_search(
        &seeded_grid,
        &dataset,
        &ctx,
        &setup.windows,
        &setup.e_fom,
    )?;
    let selected_point = cfg.grid[report.selected].clone();

    // Grid report.
    let manifest = manifest_line(
        cfg.seed,
        &[&cfg.dataset_path(), &cfg.operators_path()],
    );
    let mut grid_csv = format!("# {manifest}\npoint,description,r2_val,parameter_count,selected\n");
    for o in &report.outcomes {
        let _ = writeln!(
            grid_csv,
            "{},{},{:.16e},{},{}",
            o.index,
            o.description.replace(',', ";"),
            o.score,
            o.parameter_count,
            (o.index == report.selected) as u8
        );
    }
    std::fs::write(cfg.grid_report_path(), grid_csv)
        .map_err(|e| Error::io(cfg.grid_report_path().display().to_string(), e))?;

    // Per-seed model fits of the selected configuration.
    for seed in cfg.seed_list() {
        let point = if cfg.family.is_stochastic() {
            selected_point.with_seed(seed)
        } else {
            selected_point.clone()
        };
        let model = point.fit(&dataset)?;
        save_model(&model, &cfg.model_path(seed), &manifest)?;
    }
    Ok(format!(
        "train: family {}, selected {} (R2_val = {:.6})",
        cfg.family.as_str(),
        report.outcomes[report.selected].description,
        report.outcomes[report.selected].score
    ))
}

/// Integrates the closed models and the no-closure baseline over the full
/// axis, writing one energy series per run. Returns the diverged-run count
/// with the summary; diverged runs still produce a (non-finite) series.
pub fn stage_rom_run(cfg: &PipelineConfig) -> Result<(usize, String)> {
    cfg.validate()?;
    let setup = load_eval_setup(cfg)?;
    let operators = load_operators(&cfg.operators_path())?;
    let ctx = eval_context(cfg, &setup, &operators);
    let samples = setup.ensemble.snapshot_count();
    let times = setup.ensemble.times();

    let baseline = ctx.energy_series(None, samples)?;
    write_energy_csv(
        times,
        &setup.e_fom,
        &baseline,
        &cfg.grom_energy_path(),
        &manifest_line(cfg.seed, &[&cfg.operators_path()]),
    )?;

    let mut diverged = 0usize;
    for seed in cfg.seed_list() {
        let model = load_model(&cfg.model_path(seed))?;
        match ctx.energy_series(Some(&model), samples) {
            Ok(series) => write_energy_csv(
                times,
                &setup.e_fom,
                &series,
                &cfg.energy_path(seed),
                &manifest_line(seed, &[&cfg.operators_path(), &cfg.model_path(seed)]),
            )?,
            Err(Error::Divergence { step, detail }) => {
                diverged += 1;
                let nan = vec![f64::NAN; samples];
                write_energy_csv(
                    times,
                    &setup.e_fom,
                    &nan,
                    &cfg.energy_path(seed),
                    &format!(
                        "{} diverged at step {step}: {detail}",
                        manifest_line(seed, &[&cfg.operators_path(), &cfg.model_path(seed)])
                    ),
                )?;
            }
            Err(other) => return Err(other),
        }
    }
    let summary = format!(
        "rom-run: {} closed run(s), {} diverged, baseline written",
        cfg.seed_list().len(),
        diverged
    );
    Ok((diverged, summary))
}

/// Outcome of the evaluation stage, also returned by [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub windows: Windows,
    pub rmse_closed: SeedStats,
    pub rmse_grom: f64,
    pub rows: Vec<MetricRow>,
}

/// Computes the metric report from the stored energy series and models.
pub fn stage_evaluate(cfg: &PipelineConfig) -> Result<(PipelineOutcome, String)> {
    cfg.validate()?;
    let setup = load_eval_setup(cfg)?;
    let dataset = load_dataset(&cfg.dataset_path())?;
    let windows = setup.windows.clone();
    let val = windows.val.clone();
    let test = windows.test.clone();

    let read_series = |path: &Path| -> Result<Vec<f64>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut out = Vec::new();
        for line in text.lines().skip_while(|l| l.starts_with('#')).skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                continue;
            }
            out.push(fields[2].parse::<f64>().map_err(|_| Error::Header {
                path: path.display().to_string(),
                detail: format!("bad energy value `{}`", fields[2]),
            })?);
        }
        Ok(out)
    };

    let mut rows: Vec<MetricRow> = Vec::new();
    rows.push(MetricRow::new(
        "pod_rank",
        "-",
        "-",
        setup.pod_rank as f64,
    ));
    let grom = read_series(&cfg.grom_energy_path())?;
    let rmse_grom = rmse_test(&setup.e_fom[test.clone()], &grom[test.clone()])?;
    rows.push(MetricRow::new("rmse_test_grom", "test", "-", rmse_grom));

    let mut per_seed = Vec::new();
    let mut excluded = Vec::new();
    let mut occurrence_runs = Vec::new();
    for seed in cfg.seed_list() {
        let series = read_series(&cfg.energy_path(seed))?;
        let finite = series.iter().all(|v| v.is_finite());
        let label = seed.to_string();
        if finite {
            let mse = crate::eval::mse_val(&setup.e_fom[val.clone()], &series[val.clone()])?;
            let r2 = r2_val(&setup.e_fom[val.clone()], &series[val.clone()])?;
            let rmse = rmse_test(&setup.e_fom[test.clone()], &series[test.clone()])?;
            rows.push(MetricRow::new("mse_val", "val", &label, mse));
            rows.push(MetricRow::new("r2_val", "val", &label, r2));
            rows.push(MetricRow::new("rmse_test", "test", &label, rmse));
            per_seed.push(rmse);
        } else {
            per_seed.push(f64::NAN);
            excluded.push((seed as usize, "diverged".to_string()));
            rows.push(MetricRow::new("rmse_test", "test", &label, f64::NAN));
        }

        let model = load_model(&cfg.model_path(seed))?;
        let mse_tr = mean_mse_tr(&model, &dataset)?;
        rows.push(MetricRow::new("mean_mse_tr", "train", &label, mse_tr));
        rows.push(MetricRow::new(
            "parameter_count",
            "-",
            &label,
            model.parameter_count() as f64,
        ));
        if let ClosureModel::Symbolic(sym) = &model {
            occurrence_runs.push(sym.occurrence_counts());
        }
    }

    let stats = SeedStats::from_values(per_seed, excluded);
    rows.push(MetricRow::new("rmse_test_mean", "test", "-", stats.mean));
    rows.push(MetricRow::new("rmse_test_std", "test", "-", stats.std));

    let manifest = manifest_line(cfg.seed, &[&cfg.grom_energy_path()]);
    write_metrics_csv(&rows, &cfg.report_path(), &manifest)?;

    if !occurrence_runs.is_empty() {
        let stats = occurrence_statistics(&occurrence_runs);
        let mut csv = format!("# {manifest}\nterm,mean,std\n");
        for (term, (mean, std)) in &stats {
            let _ = writeln!(csv, "{term},{mean:.16e},{std:.16e}");
        }
        std::fs::write(cfg.occurrences_path(), csv)
            .map_err(|e| Error::io(cfg.occurrences_path().display().to_string(), e))?;
    }

    let selected = std::fs::read_to_string(cfg.grid_report_path())
        .ok()
        .and_then(|text| {
            text.lines()
                .filter(|l| !l.starts_with('#'))
                .skip(1)
                .find(|l| l.ends_with(",1"))
                .and_then(|l| l.split(',').nth(1).map(str::to_string))
        });

    let mut summary = String::new();
    let _ = writeln!(summary, "family: {}", cfg.family.as_str());
    if let Some(selected) = &selected {
        let _ = writeln!(summary, "selected: {selected}");
    }
    let _ = writeln!(
        summary,
        "pod: numerical rank {} (training window), probe R = {}, resolved r = {}",
        setup.pod_rank, cfg.probe_dim, cfg.resolved_dim
    );
    let _ = writeln!(
        summary,
        "windows: train {:?} val {:?} test {:?}",
        windows.train, windows.val, windows.test
    );
    let _ = writeln!(summary, "rmse_test (G-ROM baseline): {rmse_grom:.6e}");
    let _ = writeln!(
        summary,
        "rmse_test (closed): mean {:.6e} std {:.6e} over {} seed(s)",
        stats.mean,
        stats.std,
        stats.per_seed.len()
    );
    for (seed, reason) in &stats.excluded {
        let _ = writeln!(summary, "  seed {seed} excluded: {reason}");
    }
    std::fs::write(cfg.summary_path(), &summary)
        .map_err(|e| Error::io(cfg.summary_path().display().to_string(), e))?;

    let line = format!(
        "evaluate: rmse_test closed mean {:.3e} vs G-ROM {:.3e}",
        stats.mean, rmse_grom
    );
    Ok((
        PipelineOutcome {
            windows,
            rmse_closed: stats,
            rmse_grom,
            rows,
        },
        line,
    ))
}

/// Runs every stage in order and returns the evaluation outcome plus the
/// per-stage one-line summaries.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<(PipelineOutcome, Vec<String>)> {
    let mut lines = vec![
        stage_generate(cfg)?,
        stage_pod(cfg)?,
        stage_targets(cfg)?,
        stage_train(cfg)?,
    ];
    let (_, line) = stage_rom_run(cfg)?;
    lines.push(line);
    let (outcome, line) = stage_evaluate(cfg)?;
    lines.push(line);
    Ok((outcome, lines))
}

/// Multi-seed statistics for a fixed hyperparameter point, sharing the
/// pipeline's evaluation context. Used by callers that want seed studies
/// without rerunning the search.
pub fn seed_study(
    cfg: &PipelineConfig,
    point: &HyperPoint,
) -> Result<(SeedStats, Vec<ClosureModel<f64>>)> {
    let setup = load_eval_setup(cfg)?;
    let dataset = load_dataset(&cfg.dataset_path())?;
    let operators = load_operators(&cfg.operators_path())?;
    let ctx = eval_context(cfg, &setup, &operators);
    multi_seed(
        point,
        &dataset,
        &ctx,
        &setup.windows,
        &setup.e_fom,
        cfg.seeds,
    )
}
