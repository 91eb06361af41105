//! Command-line front end: configuration, run orchestration and output.

pub mod config;
pub mod output;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::coupling::{run_simulation, Method, RunOutcome};
use crate::discretization::{Discretization, Rect};
use crate::error::{Error, Result};
use crate::mms::{oracle::check_forcing, ManufacturedSolution};
pub use config::RunConfig;
use output::{FileSink, SweepRow};

/// Exit status of the binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const NON_CONVERGENCE: i32 = 1;
    pub const CONFIG: i32 = 2;
}

#[derive(Debug, Parser)]
#[command(name = "nsac", version, about = "Two-phase Navier-Stokes/Allen-Cahn solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation.
    Run(RunArgs),
    /// Repeat a run over a list of beta values.
    Sweep(SweepArgs),
    /// Compare the manufactured forcing against finite differences.
    VerifyMmsForcing {
        /// Number of random sample points.
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

/// Options shared by `run` and `sweep`. Defaults come from the preset or
/// the file; flags override both.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named base configuration (e.g. paper-table1-fin0, quiescent-drop).
    #[arg(long)]
    pub preset: Option<String>,
    /// fin, fip or sce.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    /// Time step; ratios such as 1/1300 are accepted.
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub mesh_n: Option<String>,
    #[arg(long)]
    pub t_final: Option<String>,
    /// Fixed-point tolerance.
    #[arg(long)]
    pub tol: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Any other key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated beta values.
    #[arg(long)]
    pub betas: Option<String>,
    /// Comma-separated methods.
    #[arg(long)]
    pub methods: Option<String>,
    /// Run the sweep points concurrently.
    #[arg(long)]
    pub parallel: bool,
}

impl CommonArgs {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for (key, value) in [
            ("method", &self.method),
            ("beta", &self.beta),
            ("dt", &self.dt),
            ("mesh_n", &self.mesh_n),
            ("t_final", &self.t_final),
            ("tol", &self.tol),
        ] {
            if let Some(v) = value {
                out.push((key.to_string(), v.clone()));
            }
        }
        if let Some(dir) = &self.out {
            out.push(("output_dir".into(), dir.display().to_string()));
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            out.push((k.trim().to_string(), v.to_string()));
        }
        Ok(out)
    }

    /// Resolve file, preset and flags into one configuration.
    pub fn resolve(&self, extra: &[(String, String)]) -> Result<RunConfig> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?,
            None => String::new(),
        };
        let mut overrides = self.overrides()?;
        overrides.extend_from_slice(extra);
        RunConfig::parse(&text, self.preset.as_deref(), &overrides)
    }
}

/// Result of [`run`].
pub struct RunSummary {
    pub outcome: RunOutcome,
    pub csv_path: PathBuf,
}

/// Run one configuration, writing `config.txt`, `steps.csv` and snapshots
/// under the output directory.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), config.to_config_string())?;
    let disc = Discretization::new(Rect::unit_square(), config.mesh_n)?;
    let initial = config.scenario.initial_state(&disc, &config.params)?;
    let mut sink = FileSink::new(dir, &disc, config.snapshot_every)?;
    if config.snapshot_every > 0 {
        sink.snapshot(&initial, 0)?;
    }
    let outcome = run_simulation(&disc, &config.params, &config.solver, initial, &mut sink)?;
    sink.csv.finish()?;
    Ok(RunSummary {
        outcome,
        csv_path: dir.join("steps.csv"),
    })
}

/// One quiet run per sweep point; no files.
fn sweep_point(config: &RunConfig, method: Method, beta: f64) -> SweepRow {
    let mut c = config.clone();
    c.solver.method = method;
    c.params.beta = beta;
    let result = Discretization::new(Rect::unit_square(), c.mesh_n).and_then(|disc| {
        let initial = c.scenario.initial_state(&disc, &c.params)?;
        run_simulation(&disc, &c.params, &c.solver, initial, &mut crate::coupling::NullSink)
    });
    match result {
        Ok(out) => {
            let status = match &out.failure {
                None => "ok".to_string(),
                Some(Error::NonConvergence { .. }) => {
                    format!("nonconvergence at step {}", out.reports.len() + 1)
                }
                Some(e) => format!("failed at step {}: {}", out.reports.len() + 1, e).replace(',', ";"),
            };
            SweepRow {
                method,
                beta,
                total_iters: out.total_iterations(),
                e_phi_h1: out.max_errors().map_or(f64::NAN, |e| e[2]),
                status,
            }
        }
        Err(e) => SweepRow {
            method,
            beta,
            total_iters: 0,
            e_phi_h1: f64::NAN,
            status: format!("failed: {e}").replace(',', ";"),
        },
    }
}

/// Run every (method, beta) pair; rows come back in method-major order
/// whether or not the points run concurrently.
pub fn run_beta_sweep(config: &RunConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let betas = config
        .beta_sweep
        .as_ref()
        .filter(|b| !b.is_empty())
        .ok_or_else(|| Error::InvalidArgument("beta_sweep is empty".into()))?;
    let points: Vec<(Method, f64)> = config
        .sweep_methods
        .iter()
        .flat_map(|&m| betas.iter().map(move |&b| (m, b)))
        .collect();
    let rows = if config.sweep_parallel {
        points.par_iter().map(|&(m, b)| sweep_point(config, m, b)).collect()
    } else {
        points.iter().map(|&(m, b)| sweep_point(config, m, b)).collect()
    };
    Ok(rows)
}

pub fn write_sweep_file(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let file = BufWriter::new(fs::File::create(path)?);
    output::write_sweep(file, rows)?;
    Ok(())
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::MissingKey(_) | Error::InvalidArgument(_) => exit::CONFIG,
        _ => exit::NON_CONVERGENCE,
    }
}

/// Execute a parsed command line; returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run(args) => execute_run(&args),
        Command::Sweep(args) => execute_sweep(&args),
        Command::VerifyMmsForcing { points, seed } => execute_verify(points, seed),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn execute_run(args: &RunArgs) -> Result<i32> {
    let config = args.common.resolve(&[])?;
    let adm = crate::coupling::admissibility_check(&config.params, config.solver.method);
    for w in &adm.warnings {
        eprintln!("warning: {w}");
    }
    let summary = run(&config)?;
    let out = &summary.outcome;
    println!(
        "{} steps, {} momentum solves, max |phi| = {}",
        out.reports.len(),
        out.total_ns_solves,
        output::fmt_float(out.max_abs_phi())
    );
    if let Some([e_u, e_phi, e_h1]) = out.max_errors() {
        println!(
            "E_u = {}, E_phi = {}, E_phi(H1) = {}",
            output::fmt_float(e_u),
            output::fmt_float(e_phi),
            output::fmt_float(e_h1)
        );
    }
    println!("report: {}", summary.csv_path.display());
    if let Some(e) = &out.failure {
        eprintln!("error: {e}");
        return Ok(exit_code_for(e));
    }
    if !out.monitors_passed() {
        eprintln!("warning: bound monitors reported violations (see monitors_passed column)");
    }
    Ok(exit::OK)
}

fn execute_sweep(args: &SweepArgs) -> Result<i32> {
    let mut extra = Vec::new();
    if let Some(b) = &args.betas {
        extra.push(("beta_sweep".to_string(), b.clone()));
    }
    if let Some(m) = &args.methods {
        extra.push(("sweep_methods".to_string(), m.clone()));
    }
    if args.parallel {
        extra.push(("sweep_parallel".to_string(), "true".to_string()));
    }
    let config = args.common.resolve(&extra)?;
    fs::create_dir_all(&config.output_dir)?;
    fs::write(config.output_dir.join("config.txt"), config.to_config_string())?;
    let rows = run_beta_sweep(&config)?;
    let path = config.output_dir.join("sweep.csv");
    write_sweep_file(&path, &rows)?;
    for r in &rows {
        println!("{} beta={} iters={} {}", r.method, r.beta, r.total_iters, r.status);
    }
    println!("sweep: {}", path.display());
    Ok(if rows.iter().all(|r| r.status == "ok") {
        exit::OK
    } else {
        exit::NON_CONVERGENCE
    })
}

fn execute_verify(points: usize, seed: u64) -> Result<i32> {
    let m = ManufacturedSolution::new(crate::fields::MixtureParams::benchmark());
    let check = check_forcing(&m, points, seed);
    let tol = 1e-5;
    println!(
        "{} points: max relative residual AC {:.3e}, NS {:.3e} (tolerance {tol:e})",
        check.n_points, check.max_rel_ac, check.max_rel_ns
    );
    Ok(if check.passes(tol, tol) {
        println!("PASS");
        exit::OK
    } else {
        println!("FAIL");
        exit::NON_CONVERGENCE
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "nsac", "run", "--preset", "quiescent-drop", "--beta", "2", "--method", "fip", "--set", "mesh_n=4",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else { panic!() };
        let c = args.common.resolve(&[]).unwrap();
        assert_eq!(c.params.beta, 2.0);
        assert_eq!(c.solver.method, Method::Fip);
        assert_eq!(c.mesh_n, 4);
    }

    #[test]
    fn config_errors_map_to_exit_two() {
        let cli = Cli::try_parse_from(["nsac", "run", "--set", "betta=1"]).unwrap();
        assert_eq!(execute(cli), exit::CONFIG);
        let cli = Cli::try_parse_from(["nsac", "run", "--set", "mesh_n=2"]).unwrap();
        assert_eq!(execute(cli), exit::CONFIG);
    }
}
