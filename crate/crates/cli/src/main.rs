//! `onewayrom` command-line driver.
//!
//! Exit codes: 0 on success, 2 for configuration or input errors, 3 for
//! numerical failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use onewayrom::experiment::{evaluate, run_offline_config, run_sweep, QueryReport, Reference};
use onewayrom::io::{columns_to_matrix, load_bundle, write_matrix, ExperimentConfig};
use onewayrom::{CoupledFom, RomError, RomSolver};

#[derive(Parser, Debug)]
#[command(name = "onewayrom", version, about = "Reduced-order models for one-way coupled PDE systems")]
struct Cli {
    /// Worker threads; falls back to ROM_THREADS, then to the core count.
    #[arg(long, global = true, env = "ROM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train and write one bundle per tolerance triple.
    Offline(ConfigArgs),
    /// Evaluate a trained bundle at one parameter pair.
    Online(OnlineArgs),
    /// Train a tolerance grid and tabulate errors and bounds as CSV.
    Sweep(SweepArgs),
    /// Full-order coupled solve, the baseline for comparisons.
    Fom(FomArgs),
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the training seed of the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    base: ConfigArgs,
    /// Skip the error estimator; `mean_bound` is then NaN.
    #[arg(long)]
    no_bound: bool,
}

#[derive(Args, Debug)]
struct OnlineArgs {
    #[arg(long)]
    bundle: PathBuf,
    /// Master parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu1: Vec<f64>,
    /// Slave parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu2: Vec<f64>,
    /// Also run the full-order model and report the actual error and the bound.
    #[arg(long)]
    compare_fom: bool,
    /// Directory for the solution matrices and diagnostics.
    #[arg(long, default_value = "online_out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FomArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu1: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu2: Vec<f64>,
    #[arg(long, default_value = "fom_out")]
    out: PathBuf,
}

fn load_config(args: &ConfigArgs) -> onewayrom::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.training.seed = seed;
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> onewayrom::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| RomError::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> onewayrom::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable diagnostics");
    std::fs::write(path, text + "\n").map_err(|e| RomError::io(path, e))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable diagnostics"));
}

#[derive(Serialize)]
struct BundleLine {
    dir: PathBuf,
    hash: String,
    n1: usize,
    m: usize,
    n2: usize,
}

fn offline(args: &ConfigArgs) -> onewayrom::Result<()> {
    let cfg = load_config(args)?;
    let bundles = run_offline_config(&cfg)?;
    let lines: Vec<BundleLine> = bundles
        .into_iter()
        .map(|b| BundleLine {
            n1: b.manifest.sizes.master,
            m: b.manifest.sizes.deim,
            n2: b.manifest.sizes.slave,
            dir: b.dir,
            hash: b.hash,
        })
        .collect();
    print_json(&lines);
    Ok(())
}

#[derive(Serialize)]
struct OnlineDiagnostics {
    bundle: PathBuf,
    bundle_hash: String,
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    n1: usize,
    m: usize,
    n2: usize,
    offline_s: f64,
    /// Reduced solve, excluding expansion to full order.
    online_s: f64,
    expansion_s: f64,
    full_order_ops: usize,
    /// Full-order assembly and solve, with `--compare-fom`.
    fom_s: Option<f64>,
    speedup: Option<f64>,
    relative_error: Option<f64>,
    relative_bound: Option<f64>,
    bound_valid: Option<bool>,
    comparison: Option<QueryReport>,
}

fn online(args: &OnlineArgs) -> onewayrom::Result<()> {
    let (art, hash) = load_bundle(&args.bundle)?;
    let offline_s = art.timings.total_s;
    let rom = RomSolver::new(art)?;
    for (side, space, mu) in [("mu1", &rom.master.space, &args.mu1), ("mu2", &rom.slave.space, &args.mu2)] {
        if mu.len() != space.dim() {
            return Err(RomError::config(format!("--{side} needs {} values, got {}", space.dim(), mu.len())));
        }
    }
    let mut sol = rom.solve(&args.mu1, &args.mu2)?;
    let expanded = rom.expand(&mut sol);
    create_dir(&args.out)?;
    write_matrix(args.out.join("slave.romb"), &columns_to_matrix(&expanded.slave))?;
    write_matrix(args.out.join("master.romb"), &columns_to_matrix(&expanded.master))?;
    let a = &rom.artifacts;
    let mut diag = OnlineDiagnostics {
        bundle: args.bundle.clone(),
        bundle_hash: hash,
        mu1: args.mu1.clone(),
        mu2: args.mu2.clone(),
        n1: a.n1(),
        m: a.num_deim_points(),
        n2: a.n2(),
        offline_s,
        online_s: sol.diagnostics.reduced_seconds,
        expansion_s: sol.diagnostics.expansion_seconds,
        full_order_ops: sol.diagnostics.full_order_ops,
        fom_s: None,
        speedup: None,
        relative_error: None,
        relative_bound: None,
        bound_valid: None,
        comparison: None,
    };
    if args.compare_fom {
        let t = Instant::now();
        let fom = CoupledFom::new(&a.problem)?;
        let solution = fom.solve(&args.mu1, &args.mu2)?;
        let r = Reference { mu1: args.mu1.clone(), mu2: args.mu2.clone(), solution, seconds: t.elapsed().as_secs_f64() };
        let mut report = evaluate(&rom, &fom, &r, true)?;
        // report the timing of the query above, not of the re-run inside `evaluate`
        report.online_s = diag.online_s;
        report.speedup = r.seconds / diag.online_s.max(f64::MIN_POSITIVE);
        diag.fom_s = Some(r.seconds);
        diag.speedup = Some(report.speedup);
        diag.relative_error = Some(report.relative_error);
        diag.relative_bound = report.relative_bound;
        diag.bound_valid = report.bound_valid;
        diag.comparison = Some(report);
    }
    write_json(&args.out.join("diagnostics.json"), &diag)?;
    print_json(&diag);
    Ok(())
}

fn sweep(args: &SweepArgs) -> onewayrom::Result<()> {
    let cfg = load_config(&args.base)?;
    let res = run_sweep(&cfg, !args.no_bound)?;
    write_json(&cfg.output.join("sweep_queries.json"), &res)?;
    print!("{}", onewayrom::io::sweep::to_csv(&res.rows));
    Ok(())
}

#[derive(Serialize)]
struct FomSummary {
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    master_dofs: usize,
    slave_dofs: usize,
    states: usize,
    conforming: bool,
    assembly_s: f64,
    solve_s: f64,
    fom_s: f64,
}

fn fom(args: &FomArgs) -> onewayrom::Result<()> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let t = Instant::now();
    let fom = CoupledFom::new(&cfg.problem)?;
    let assembly_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let sol = fom.solve(&args.mu1, &args.mu2)?;
    let solve_s = t.elapsed().as_secs_f64();
    create_dir(&args.out)?;
    write_matrix(args.out.join("master.romb"), &columns_to_matrix(&sol.master))?;
    write_matrix(args.out.join("slave.romb"), &columns_to_matrix(&sol.slave))?;
    let summary = FomSummary {
        mu1: args.mu1.clone(),
        mu2: args.mu2.clone(),
        master_dofs: fom.master.num_dofs(),
        slave_dofs: fom.slave.num_dofs(),
        states: sol.times.len(),
        conforming: fom.transfer.is_conforming(),
        assembly_s,
        solve_s,
        fom_s: assembly_s + solve_s,
    };
    write_json(&args.out.join("fom.json"), &summary)?;
    print_json(&summary);
    Ok(())
}

fn run(cli: &Cli) -> onewayrom::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(RomError::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RomError::config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Offline(a) => offline(a),
        Command::Online(a) => online(a),
        Command::Sweep(a) => sweep(a),
        Command::Fom(a) => fom(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
