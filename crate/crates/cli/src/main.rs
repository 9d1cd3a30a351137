use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rwave::cascade::{convergence_report, run_cascade};
use rwave::config::RunConfig;
use rwave::experiments::{for_each_seed, EnsembleStats};
use rwave::norms::ParameterPoint;
use rwave::output::{
    ensemble_rows, run_id, write_ensemble, write_fits, write_json, write_run, write_scaling, EnsembleRow, ScalingRow,
};
use rwave::param_lp::{gamma_grid, optimize, ParamsJson};
use rwave::spectral::write_snapshot;
use rwave::verify::{run_suite, strichartz_scaling, SuiteOptions, SCALING_TOLERANCE};
use rwave::Error;

#[derive(Parser)]
#[command(name = "rwave", version, about = "Randomized-data laboratory for u_tt - Δu = |∇u|²")]
struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize s over the exponent conditions on a γ grid.
    Params(ParamsArgs),
    /// Run one cascade and write a run directory.
    Simulate(SimulateArgs),
    /// Run the cascade for consecutive seeds and aggregate.
    Ensemble(EnsembleArgs),
    /// Probabilistic Strichartz ladder with a one-sided scaling fit.
    Scaling(ScalingArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long, default_value_t = 0.5)]
    gamma_min: f64,
    #[arg(long, default_value_t = 0.99)]
    gamma_max: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma_step: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Margin subtracted from every strict condition.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Also write the result to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "run")]
    out: PathBuf,
    /// Write the final field of the last level as a snapshot.
    #[arg(long)]
    snapshot: bool,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of consecutive seeds, starting at the configured seed.
    #[arg(long, default_value_t = 8)]
    seeds: u64,
    #[arg(long, default_value = "ensemble")]
    out: PathBuf,
}

#[derive(Args)]
struct ScalingArgs {
    /// Exponents are taken from this config if given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [8u32, 16, 32])]
    ns: Vec<u32>,
    #[arg(long, default_value_t = 32)]
    seeds: usize,
    #[arg(long, default_value_t = SCALING_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value = "scaling")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 32)]
    resolution: usize,
    /// Also write the results as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Config(_) => 2,
            Error::NonConvergence { .. } => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn config_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| config_error(e.to_string()))?;
    cfg.apply_env_seed().map_err(|e| config_error(e.to_string()))?;
    Ok(cfg)
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn params(args: &ParamsArgs) -> Result<(), Failure> {
    let gammas = gamma_grid(args.gamma_min, args.gamma_max, args.gamma_step);
    if gammas.is_empty() || args.gamma_min <= 0.0 || args.gamma_max >= 1.0 {
        return Err(config_error("the γ grid must be non-empty and inside (0, 1)".into()));
    }
    let outcome = optimize(&gammas, args.delta, args.eps);
    let (best, report) = outcome
        .best
        .ok_or_else(|| Failure { code: 1, message: "no γ on the grid admits a feasible point".into() })?;
    let body = json!({
        "optimum": ParamsJson::new(&best, args.delta, args.eps),
        "active": report.active,
        "table": outcome.table,
    });
    println!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
    if let Some(path) = &args.out {
        write_json(path, &body)?;
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let grid = cfg.grid()?;
    let (f0, f1) = cfg.data(&grid)?;
    let draw = cfg.draw(&grid, cfg.seed)?;
    let result = run_cascade(&f0, &f1, &draw, &cfg.cascade())?;
    let report = if result.levels.len() >= 2 {
        Some(convergence_report(&result, cfg.oversample)?)
    } else {
        None
    };
    write_run(&args.out, &cfg, &result, report.as_ref())?;
    if args.snapshot {
        let file = fs::File::create(args.out.join("u_final.rwav"))?;
        let u = result.last().u.u.last().expect("non-empty trace");
        write_snapshot(u, BufWriter::new(file))?;
    }
    println!(
        "run {} seed {}: levels 0..={}, T1 = {:.6}, T2 = {:.6}, T = {:.6} -> {}",
        run_id(&cfg),
        result.seed,
        cfg.n_max,
        result.times.t1,
        result.times.t2,
        result.times.t,
        args.out.display()
    );
    Ok(())
}

fn ensemble(args: &EnsembleArgs, jobs: usize) -> Result<(), Failure> {
    let base = load_config(&args.config)?;
    if args.seeds < 8 {
        return Err(config_error("an ensemble needs at least 8 seeds".into()));
    }
    fs::create_dir_all(&args.out)?;
    let grid = base.grid()?;
    let (f0, f1) = base.data(&grid)?;
    let seeds: Vec<u64> = (0..args.seeds).map(|i| base.seed.wrapping_add(i)).collect();
    let results = for_each_seed(&seeds, jobs, |seed| {
        let cfg = RunConfig { seed, ..base.clone() };
        let draw = cfg.draw(&grid, seed)?;
        let result = run_cascade(&f0, &f1, &draw, &cfg.cascade())?;
        write_run(&args.out.join(format!("seed-{seed}")), &cfg, &result, None)?;
        Ok(ensemble_rows(&result))
    })?;
    let mut rows: Vec<EnsembleRow> = Vec::new();
    let mut first_error = None;
    for (seed, r) in seeds.iter().zip(results) {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(e) => {
                eprintln!("seed {seed} failed: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    write_ensemble(&args.out.join("ensemble.csv"), &rows)?;
    let mut by_quantity: BTreeMap<&str, (Vec<u64>, Vec<f64>)> = BTreeMap::new();
    for r in &rows {
        let e = by_quantity.entry(&r.quantity).or_default();
        e.0.push(r.seed);
        e.1.push(r.value);
    }
    let summary: BTreeMap<&str, EnsembleStats> = by_quantity
        .into_iter()
        .map(|(q, (s, v))| (q, EnsembleStats::from_values(s, v)))
        .collect();
    write_json(
        &args.out.join("summary.json"),
        &json!({ "config": base.emit(), "seeds": seeds, "complete": first_error.is_none(), "quantities": summary }),
    )?;
    if let Some(e) = first_error {
        return Err(e.into());
    }
    for (q, s) in &summary {
        println!("{q:>16}  L²_ω {:.6e} ± {:.1e}", s.rms, s.se);
    }
    Ok(())
}

fn scaling(args: &ScalingArgs, jobs: usize) -> Result<(), Failure> {
    let params = match &args.config {
        Some(path) => load_config(path)?.params,
        None => ParameterPoint::reference(),
    };
    if args.seeds < 8 {
        return Err(config_error("the ensemble needs at least 8 seeds".into()));
    }
    fs::create_dir_all(&args.out)?;
    let (outcome, fit, ladder) = strichartz_scaling(&params, &args.ns, args.seeds, args.tolerance, jobs)?;
    let mut rows = Vec::new();
    for point in &ladder {
        for (&seed, &value) in point.stats.seeds.iter().zip(&point.stats.values) {
            rows.push(ScalingRow { quantity: "strichartz_F".into(), n: point.n, seed, value });
        }
    }
    write_scaling(&args.out.join("scaling.csv"), &rows)?;
    write_fits(&args.out.join("fits.json"), std::slice::from_ref(&fit))?;
    println!("{} {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.detail);
    if outcome.passed {
        Ok(())
    } else {
        Err(Failure { code: 1, message: "scaling fit exceeds the predicted bound".into() })
    }
}

fn verify(args: &VerifyArgs, jobs: usize) -> Result<(), Failure> {
    let opts = SuiteOptions { resolution: args.resolution, jobs };
    let checks = run_suite(&opts, |c| {
        println!(
            "{} {} ({:.1} s): {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.seconds,
            c.detail
        );
    });
    if let Some(path) = &args.out {
        write_json(path, &checks)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(Failure { code: 1, message: format!("{failed} of {} checks failed", checks.len()) });
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs.unwrap_or_else(default_jobs).max(1);
    let result = match &cli.command {
        Command::Params(a) => params(a),
        Command::Simulate(a) => simulate(a),
        Command::Ensemble(a) => ensemble(a, jobs),
        Command::Scaling(a) => scaling(a, jobs),
        Command::Verify(a) => verify(a, jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rwave: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
