//! romlab command line: generate -> pod -> targets -> train -> rom-run ->
//! evaluate, individually or as one `pipeline` run.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical divergence,
//! 3 i/o error, 64 usage error.

mod config;

use config::{build_grid, build_pipeline_config, ConfigFile};
use romlab::error::{Error, ExitClass};
use romlab::pipeline::{self, PipelineConfig};
use romlab::regress::design_rank;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
romlab <subcommand> [flags]

Subcommands:
  generate    integrate the Burgers problem and write the snapshot ensemble
  pod         build the POD basis and the reduced operators
  targets     compute the exact closure targets (training dataset)
  train       hyperparameter search + per-seed model fits
  rom-run     integrate the closed reduced model and the baseline
  evaluate    compute the metric report and summary
  pipeline    run every stage in order

Flags:
  --config PATH   configuration file (required)
  --out DIR       output directory (overrides [paths] out)
  --family F      closure family: lr | d2 | sr | nn
  --r INT         resolved dimension r
  --big-r INT     probe dimension R
  --seed INT      base seed
  --seeds N       seed count for stochastic families
  --jobs N        worker threads (fallback: ROMLAB_JOBS)
  --help          this message
";

struct UsageError(String);

enum Outcome {
    Success,
    Diverged,
    HelpShown,
}

enum RunError {
    Usage(UsageError),
    Core(Error),
}

impl From<Error> for RunError {
    fn from(err: Error) -> Self {
        RunError::Core(err)
    }
}

impl From<UsageError> for RunError {
    fn from(err: UsageError) -> Self {
        RunError::Usage(err)
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match parse_and_run(&args) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::HelpShown) => {
            println!("{USAGE}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Diverged) => ExitCode::from(2),
        Err(RunError::Usage(UsageError(message))) => {
            eprintln!("{message}");
            eprintln!();
            eprintln!("{USAGE}");
            ExitCode::from(64)
        }
        Err(RunError::Core(err)) => {
            eprintln!("error: {err}");
            let code = match err.exit_class() {
                ExitClass::Validation => 1,
                ExitClass::Divergence => 2,
                ExitClass::Io => 3,
            };
            ExitCode::from(code)
        }
    }
}

enum Parsed {
    Run(CliArgs),
    Help,
}

struct CliArgs {
    subcommand: String,
    config_path: Option<PathBuf>,
    out: Option<String>,
    family: Option<String>,
    r: Option<String>,
    big_r: Option<String>,
    seed: Option<String>,
    seeds: Option<String>,
    jobs: Option<usize>,
}

fn parse_args(args: &[String]) -> Result<Parsed, UsageError> {
    let mut iter = args.iter();
    let subcommand = match iter.next() {
        Some(s) if s == "--help" || s == "-h" => return Ok(Parsed::Help),
        Some(s) if !s.starts_with('-') => s.clone(),
        Some(s) => return Err(UsageError(format!("expected a subcommand, got `{s}`"))),
        None => return Err(UsageError("missing subcommand".into())),
    };
    let known = [
        "generate", "pod", "targets", "train", "rom-run", "evaluate", "pipeline",
    ];
    if !known.contains(&subcommand.as_str()) {
        return Err(UsageError(format!("unknown subcommand `{subcommand}`")));
    }

    let mut parsed = CliArgs {
        subcommand,
        config_path: None,
        out: None,
        family: None,
        r: None,
        big_r: None,
        seed: None,
        seeds: None,
        jobs: None,
    };
    while let Some(flag) = iter.next() {
        let mut value_of = |name: &str| -> Result<String, UsageError> {
            iter.next()
                .cloned()
                .ok_or_else(|| UsageError(format!("flag `{name}` needs a value")))
        };
        match flag.as_str() {
            "--config" => parsed.config_path = Some(PathBuf::from(value_of("--config")?)),
            "--out" => parsed.out = Some(value_of("--out")?),
            "--family" => parsed.family = Some(value_of("--family")?),
            "--r" => parsed.r = Some(value_of("--r")?),
            "--big-r" => parsed.big_r = Some(value_of("--big-r")?),
            "--seed" => parsed.seed = Some(value_of("--seed")?),
            "--seeds" => parsed.seeds = Some(value_of("--seeds")?),
            "--jobs" => {
                let raw = value_of("--jobs")?;
                parsed.jobs = Some(raw.parse().map_err(|_| {
                    UsageError(format!("`--jobs {raw}` is not a thread count"))
                })?);
            }
            "--help" | "-h" => return Ok(Parsed::Help),
            other => return Err(UsageError(format!("unknown flag `{other}`"))),
        }
    }
    Ok(Parsed::Run(parsed))
}

fn parse_and_run(args: &[String]) -> Result<Outcome, RunError> {
    let cli = match parse_args(args)? {
        Parsed::Run(cli) => cli,
        Parsed::Help => return Ok(Outcome::HelpShown),
    };

    let jobs = cli.jobs.or_else(|| {
        std::env::var("ROMLAB_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(jobs) = jobs {
        // Ignore the error when a pool already exists (reentry).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    let config_path = cli
        .config_path
        .as_ref()
        .ok_or_else(|| UsageError("`--config PATH` is required".into()))?;
    let mut file = ConfigFile::load(config_path)?;

    // Command-line overrides.
    if let Some(out) = &cli.out {
        file.set("paths", "out", out.clone());
    }
    if let Some(family) = &cli.family {
        file.set("train", "family", family.clone());
    }
    if let Some(r) = &cli.r {
        file.set("problem", "r", r.clone());
    }
    if let Some(big_r) = &cli.big_r {
        file.set("problem", "big_r", big_r.clone());
    }
    if let Some(seed) = &cli.seed {
        file.set("train", "seed", seed.clone());
    }
    if let Some(seeds) = &cli.seeds {
        file.set("train", "seeds", seeds.clone());
    }

    let mut pipeline_cfg = build_pipeline_config(&file)?;

    fn run_train(
        file: &ConfigFile,
        pipeline_cfg: &mut PipelineConfig,
    ) -> Result<String, RunError> {
        let grid = build_grid(file, pipeline_cfg, || {
            let dataset = romlab::closure::load_dataset(&pipeline_cfg.dataset_path())?;
            Ok(design_rank(&dataset))
        })?;
        pipeline_cfg.grid = grid;
        Ok(pipeline::stage_train(pipeline_cfg)?)
    }

    match cli.subcommand.as_str() {
        "generate" => {
            println!("{}", pipeline::stage_generate(&pipeline_cfg)?);
        }
        "pod" => {
            println!("{}", pipeline::stage_pod(&pipeline_cfg)?);
        }
        "targets" => {
            println!("{}", pipeline::stage_targets(&pipeline_cfg)?);
        }
        "train" => {
            println!("{}", run_train(&file, &mut pipeline_cfg)?);
        }
        "rom-run" => {
            let (diverged, summary) = pipeline::stage_rom_run(&pipeline_cfg)?;
            println!("{summary}");
            if diverged > 0 {
                return Ok(Outcome::Diverged);
            }
        }
        "evaluate" => {
            let (_, summary) = pipeline::stage_evaluate(&pipeline_cfg)?;
            println!("{summary}");
        }
        "pipeline" => {
            println!("{}", pipeline::stage_generate(&pipeline_cfg)?);
            println!("{}", pipeline::stage_pod(&pipeline_cfg)?);
            println!("{}", pipeline::stage_targets(&pipeline_cfg)?);
            println!("{}", run_train(&file, &mut pipeline_cfg)?);
            let (_, summary) = pipeline::stage_rom_run(&pipeline_cfg)?;
            println!("{summary}");
            let (_, summary) = pipeline::stage_evaluate(&pipeline_cfg)?;
            println!("{summary}");
        }
        _ => unreachable!("subcommand validated"),
    }
    Ok(Outcome::Success)
}
