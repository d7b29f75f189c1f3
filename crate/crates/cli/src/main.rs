mod config;

use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use jumpqle::io::{read_path_csv, write_json_atomic, write_path_csv};
use jumpqle::{
    decide_test, estimate_adaptive, estimate_constrained, estimate_joint, estimate_joint_levy_ou, export_report,
    qlr_statistic, run_study, simulate_levy_ou, EstimateResult, EstimationConfig, EstimatorKind, PathConfig,
    QllContext, StudyConfig, StudyKind, TestResult,
};
use serde::Serialize;

use crate::config::RunConfig;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "jumpqle", version, about = "Threshold quasi-likelihood estimation for jump diffusions")]
struct Cli {
    /// TOML run configuration; built-in defaults are used when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a Lévy-OU path and write it as CSV plus a manifest.
    Simulate(SimulateArgs),
    /// Estimate parameters from a path CSV.
    Estimate(EstimateArgs),
    /// Quasi-likelihood ratio test of the [test].fix null on a path CSV.
    Test(TestArgs),
    /// Run the Monte Carlo study described by the [study] section.
    Study(StudyArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    /// Output CSV; defaults to <out_dir>/path.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThresholdOverrides {
    #[arg(long)]
    rho1: Option<f64>,
    #[arg(long)]
    rho2: Option<f64>,
    #[arg(long)]
    rho3: Option<f64>,
    #[arg(long)]
    rho1_bar: Option<f64>,
    #[arg(long)]
    rho2_bar: Option<f64>,
}

impl ThresholdOverrides {
    fn apply(&self, cfg: &mut RunConfig) {
        let t = &mut cfg.thresholds;
        let pairs = [
            (self.rho1, &mut t.rho1),
            (self.rho2, &mut t.rho2),
            (self.rho3, &mut t.rho3),
            (self.rho1_bar, &mut t.rho1_bar),
            (self.rho2_bar, &mut t.rho2_bar),
        ];
        for (value, slot) in pairs {
            if let Some(v) = value {
                *slot = v;
            }
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Path CSV with columns t,x[,jumps].
    input: PathBuf,
    /// Joint estimator using the rho1_bar/rho2_bar filters.
    #[arg(long)]
    joint: bool,
    #[command(flatten)]
    thresholds: ThresholdOverrides,
    /// Output JSON; defaults to <out_dir>/estimate.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TestArgs {
    input: PathBuf,
    /// Significance level; overrides [test].eps (default 0.05).
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    thresholds: ThresholdOverrides,
    /// Output JSON; defaults to <out_dir>/test.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StudyArgs {
    /// Replications per cell; overrides [study].replications.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads (0 = all cores); overrides [study].parallel.
    #[arg(long)]
    parallel: Option<usize>,
    /// Report directory; overrides out_dir.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct SimulationManifest<'a> {
    version: &'static str,
    output: &'a FsPath,
    model: &'a str,
    params: jumpqle::LevyOuParams,
    path: &'a PathConfig,
    jumps: usize,
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    version: &'static str,
    input: &'a FsPath,
    config: &'a RunConfig,
    result: &'a EstimateResult,
}

#[derive(Serialize)]
struct TestOutput<'a> {
    version: &'static str,
    input: &'a FsPath,
    config: &'a RunConfig,
    test: &'a TestResult,
    unconstrained: &'a EstimateResult,
    constrained: &'a EstimateResult,
}

fn load_config(path: Option<&FsPath>) -> Result<RunConfig> {
    let cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    jumpqle::model::model_by_name(&cfg.model)?;
    Ok(cfg)
}

fn estimation_config(cfg: &RunConfig) -> Result<EstimationConfig> {
    let mut est = EstimationConfig::new(cfg.thresholds()?, cfg.bounds()?);
    if let Some(opt) = cfg.optimizer {
        est.optimizer = opt;
    }
    Ok(est)
}

fn emit<T: Serialize>(value: &T, target: &FsPath) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    write_json_atomic(target, value)?;
    eprintln!("wrote {}", target.display());
    Ok(())
}

fn cmd_simulate(mut cfg: RunConfig, args: SimulateArgs) -> Result<()> {
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(h) = args.h {
        cfg.h = Some(h);
    }
    let h = cfg.step()?;
    let mut pc = PathConfig::new(cfg.n, h, cfg.seed);
    pc.burn_in_time = cfg.burn_in_time;
    let params = cfg.params.levy_ou();
    let path = simulate_levy_ou(&params.to_vector(), &pc)?;

    let out = args.out.unwrap_or_else(|| cfg.out_dir.join("path.csv"));
    write_path_csv(&out, &path)?;
    let manifest_path = out.with_extension("manifest.json");
    let jumps = path.jump_marks().map_or(0, |m| m.iter().map(|&k| k as usize).sum());
    write_json_atomic(
        &manifest_path,
        &SimulationManifest {
            version: VERSION,
            output: &out,
            model: &cfg.model,
            params,
            path: &pc,
            jumps,
        },
    )?;
    eprintln!("wrote {} ({} observations, {} jumps) and {}", out.display(), path.n(), jumps, manifest_path.display());
    Ok(())
}

fn cmd_estimate(mut cfg: RunConfig, args: EstimateArgs) -> Result<()> {
    args.thresholds.apply(&mut cfg);
    let est = estimation_config(&cfg)?;
    let path = read_path_csv(&args.input)?;
    let model = jumpqle::model::model_by_name(&cfg.model)?;
    let ctx = QllContext::new(&model, &path)?;
    let result = if !args.joint {
        estimate_adaptive(&ctx, &est)?
    } else if model.has_closed_form() {
        estimate_joint_levy_ou(&path, &est)?
    } else {
        estimate_joint(&ctx, &est)?
    };
    let out = args.out.unwrap_or_else(|| cfg.out_dir.join("estimate.json"));
    emit(
        &EstimateOutput {
            version: VERSION,
            input: &args.input,
            config: &cfg,
            result: &result,
        },
        &out,
    )
}

fn cmd_test(mut cfg: RunConfig, args: TestArgs) -> Result<()> {
    args.thresholds.apply(&mut cfg);
    if let Some(eps) = args.eps {
        cfg.test.eps = Some(eps);
    }
    let eps = cfg.test.eps.unwrap_or(0.05);
    let constraints = cfg.constraints()?;
    if constraints.is_empty() {
        bail!(UsageError("test requires constraints: set [test].fix, e.g. fix = { alpha = 2.0 }".into()));
    }
    let est = estimation_config(&cfg)?;
    let path = read_path_csv(&args.input)?;
    let model = jumpqle::model::model_by_name(&cfg.model)?;
    let ctx = QllContext::new(&model, &path)?;

    let unconstrained = estimate_adaptive(&ctx, &est)?;
    let null_cfg = est.clone().with_constraints(constraints.iter().copied());
    let constrained = estimate_constrained(&ctx, &null_cfg, EstimatorKind::Adaptive)?;
    let th = est.thresholds;
    let lambda_n = qlr_statistic(
        &ctx,
        &unconstrained.theta_hat,
        &constrained.theta_hat,
        &th.joint_continuous,
        &th.joint_jump,
    )?;
    let mut test = decide_test(lambda_n, constraints.len() as u32, eps)?;
    test.thresholds = Some(th);

    let out = args.out.unwrap_or_else(|| cfg.out_dir.join("test.json"));
    emit(
        &TestOutput {
            version: VERSION,
            input: &args.input,
            config: &cfg,
            test: &test,
            unconstrained: &unconstrained,
            constrained: &constrained,
        },
        &out,
    )
}

fn cmd_study(cfg: RunConfig, args: StudyArgs) -> Result<()> {
    let Some(study) = cfg.study.clone() else {
        bail!(UsageError("study requires a [study] section in the config".into()));
    };
    let reps = args.reps.unwrap_or(study.replications);
    let threads = args.parallel.unwrap_or(study.parallel);
    let mut sc = StudyConfig::new(cfg.params.levy_ou(), study.grid, reps, cfg.n, cfg.h_rule()?, cfg.seed)
        .with_parallelism(threads);
    sc.burn_in_time = cfg.burn_in_time;
    sc.bounds = cfg.bounds()?;
    if study.kind == StudyKind::Test {
        sc = sc.with_null(cfg.constraints()?, cfg.test.eps.unwrap_or(0.05));
    }

    let step = (reps / 100).max(1);
    let progress = move |done: usize, total: usize| {
        if done.is_multiple_of(step) || done == total {
            eprintln!("[{done}/{total}] replications finished");
        }
    };
    let report = run_study(&sc, study.kind, Some(&progress))?;
    let out_dir = args.out_dir.unwrap_or(cfg.out_dir);
    let files = export_report(&report, &out_dir)?;
    let failures = report.total_failures();
    if failures > 0 {
        eprintln!("{failures} replication(s) failed; see cells.csv and manifest.json");
    }
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

/// Marker for argument/config problems detected by the front end itself.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// 1 for failures caused by the data, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let statistical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<jumpqle::Error>())
        .any(jumpqle::Error::is_statistical);
    if statistical {
        1
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref()).context("configuration error")?;
    match cli.command {
        Command::Simulate(a) => cmd_simulate(cfg, a),
        Command::Estimate(a) => cmd_estimate(cfg, a),
        Command::Test(a) => cmd_test(cfg, a),
        Command::Study(a) => cmd_study(cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
