use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use htsim_core::harness::output::{emit_moment_report, limit_csv, write_file};
use htsim_core::harness::{
    emit_outputs, moment_report, run_condition_checks, run_limit_sample, run_scaling_experiment,
    ExperimentConfig,
};
use htsim_core::pathsim::{simulate_path, sup_statistic, ModelStream};
use htsim_core::rng::stream;
use htsim_core::{build_coeffs, Error};

#[derive(Parser)]
#[command(
    name = "htsim",
    version,
    about = "Heavy-traffic simulation of long-memory heavy-tailed processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model assumptions; exits with 3 if any check warns.
    Check(Common),
    /// Simulate one path at the first drift value of the grid.
    Simulate(Common),
    /// Sample the limit supremum and the moment oracles.
    Limit(Common),
    /// Run the heavy-traffic scaling experiment.
    Scaling(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (overrides the configuration).
    #[arg(long)]
    workers: Option<usize>,
}

type Action = fn(&ExperimentConfig) -> Result<(), Failure>;

enum Failure {
    Config(String),
    Run(String),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Construction(_) => Failure::Config(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

fn load(c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &c.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let report = run_condition_checks(cfg)?;
    print!("{report}");
    write_file(&cfg.output, "checks.txt", &report.to_string())?;
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let model = cfg.build_model()?;
    let a = cfg.a_grid[0];
    let n = cfg.horizon.horizon(a, &model.scaling)?;
    let coeffs = build_coeffs(&model.spec, n)?;
    let mut src = ModelStream::new(&model.innovations, stream(cfg.seed, 0, 0));
    let path = simulate_path(&coeffs, n, &mut src)?;
    let sup = sup_statistic(&path.values, &coeffs, a)?;
    let mut body = String::from("n,s,drifted\n");
    for (i, (s, g)) in path.values.iter().zip(coeffs.partial_sums()).enumerate() {
        body.push_str(&format!("{},{s},{}\n", i + 1, s - a * g));
    }
    write_file(&cfg.output, "path.csv", &body)?;
    let mut table = Vec::new();
    coeffs
        .write_csv(&mut table)
        .map_err(|e| Failure::Run(e.to_string()))?;
    write_file(&cfg.output, "coeffs.csv", &String::from_utf8_lossy(&table))?;
    println!(
        "a = {a}, n = {n}, sup = {}, argmax = {}",
        sup.sup, sup.argmax
    );
    Ok(())
}

fn limit(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let sample = run_limit_sample(cfg)?;
    write_file(&cfg.output, "limit.csv", &limit_csv(&sample))?;
    let boundary = sample.iter().filter(|s| s.near_boundary).count();
    if boundary > 0 {
        eprintln!(
            "warning: argmax in the last 10% of the grid for {boundary} of {} paths",
            sample.len()
        );
    }
    let m = &cfg.model;
    let report = moment_report(1.0, 4.0, m.gamma, m.alpha, 10_000, cfg.seed, cfg.workers)?;
    emit_moment_report(&report, &cfg.output)?;
    print!("{}", report.to_text());
    Ok(())
}

fn scaling(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let result = run_scaling_experiment(cfg)?;
    emit_outputs(&result, &cfg.output)?;
    println!(
        "{:>8} {:>12} {:>10} {:>10} {:>8}",
        "a", "median_raw", "median", "q90", "ks"
    );
    for r in &result.rows {
        let ks =
            r.ks.map_or("-".to_string(), |k| format!("{:.4}", k.statistic));
        println!(
            "{:>8} {:>12.5e} {:>10.4} {:>10.4} {:>8}",
            r.a, r.median_raw, r.median, r.q90, ks
        );
    }
    if let Some(f) = result.slope {
        println!(
            "slope {:.4} ± {:.4} (target {})",
            f.slope, f.slope_se, result.slope_target
        );
    }
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (common, action): (&Common, Action) = match &cli.command {
        Command::Check(c) => (c, check),
        Command::Simulate(c) => (c, simulate),
        Command::Limit(c) => (c, limit),
        Command::Scaling(c) => (c, scaling),
    };
    let cfg = load(common)?;
    action(&cfg)?;
    println!("outputs in {}", Path::new(&cfg.output).display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check) => {
            eprintln!("condition checks did not all pass");
            ExitCode::from(3)
        }
    }
}
