//! Command-line front end for the `dicke-battery` binary.
//!
//! Every command writes a CSV (comma separated, header row, LF endings,
//! 17 significant digits) and a `.meta` sidecar with the resolved
//! configuration, tool version, wall time and units. Flags override values
//! from `--config`.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use commands::CommandOutput;
pub use config::RunConfig;
pub use output::{fmt_f64, CsvTable};

use crate::model::Drive;
use crate::propagate::Protocol;
use crate::sweep::{GridSpec, SurfaceMode};
use crate::{Error, Result};

pub const UNITS: &str = "energies in units of Delta, times in units of 1/Delta";

#[derive(Debug, Parser)]
#[command(name = "dicke-battery", version, about = "Quantum battery charging simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stored energy against charging time.
    Trace(CommonArgs),
    /// Stored energy over amplitude and frequency, with the optimal-frequency ridge.
    Surface(CommonArgs),
    /// First-peak optimum against atom number.
    SweepN(CommonArgs),
    /// First-peak optimum against coupling strength.
    SweepLambda(CommonArgs),
    /// Ground-state polarization and gap against coupling strength.
    Ground(CommonArgs),
    /// Run the invariant suite.
    Selfcheck(SelfcheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Trace(_) => "trace",
            Command::Surface(_) => "surface",
            Command::SweepN(_) => "sweep-n",
            Command::SweepLambda(_) => "sweep-lambda",
            Command::Ground(_) => "ground",
            Command::Selfcheck(_) => "selfcheck",
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub amp: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// harmonic | static | off
    #[arg(long)]
    pub drive: Option<Drive>,
    /// locked | fixed
    #[arg(long)]
    pub protocol: Option<Protocol>,
    /// lo:hi:points
    #[arg(long, allow_hyphen_values = true)]
    pub t_range: Option<GridSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_range: Option<GridSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega_range: Option<GridSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_range: Option<GridSpec>,
    /// Comma-separated, ascending.
    #[arg(long, value_parser = config::parse_n_list)]
    pub n_list: Option<std::vec::Vec<usize>>,
    #[arg(long, env = "DICKE_BATTERY_WORKERS")]
    pub workers: Option<usize>,
    /// Defaults to `<command>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// analytic | numeric (surface only)
    #[arg(long)]
    pub mode: Option<SurfaceMode>,
}

#[derive(Debug, Args, Default)]
pub struct SelfcheckArgs {
    #[arg(long)]
    pub quick: bool,
    /// Offset added to Bessel values to exercise the oracle check.
    #[arg(long, default_value_t = 0.0)]
    pub perturb_bessel: f64,
}

impl CommonArgs {
    fn as_config(&self) -> RunConfig {
        RunConfig {
            delta: self.delta,
            amp: self.amp,
            omega: self.omega,
            lambda: self.lambda,
            n: self.n,
            drive: self.drive,
            protocol: self.protocol,
            t_range: self.t_range,
            a_range: self.a_range,
            omega_range: self.omega_range,
            lambda_range: self.lambda_range,
            n_list: self.n_list.clone(),
            workers: self.workers,
            out: self.out.clone(),
            mode: self.mode,
        }
    }

    /// Config file (if any) with flags laid over it.
    pub fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| output::io_error(path, e))?;
                RunConfig::parse(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.overlay(&self.as_config());
        Ok(cfg)
    }
}

/// Run a table-producing command and write its files.
pub fn execute(name: &str, cfg: &RunConfig) -> Result<(PathBuf, CommandOutput)> {
    let start = Instant::now();
    let out = match name {
        "trace" => commands::trace(cfg)?,
        "surface" => commands::surface(cfg)?,
        "sweep-n" => commands::sweep_n(cfg)?,
        "sweep-lambda" => commands::sweep_lambda_cmd(cfg)?,
        "ground" => commands::ground(cfg)?,
        other => return Err(Error::Invalid(format!("unknown command `{other}`"))),
    };
    let wall = start.elapsed().as_secs_f64();
    let path = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    output::write_file(&path, &out.table.render())?;
    for (suffix, table) in &out.extra {
        output::write_file(&output::sibling_path(&path, suffix), &table.render())?;
    }
    output::write_file(&output::meta_path(&path), &render_meta(name, &out, wall))?;
    Ok((path, out))
}

pub fn render_meta(name: &str, out: &CommandOutput, wall_seconds: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tool = {}", env!("CARGO_PKG_NAME"));
    let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "command = {name}");
    let _ = writeln!(s, "units = {UNITS}");
    let _ = writeln!(s, "wall_time_s = {wall_seconds:.3}");
    let _ = writeln!(s, "rows = {}", out.table.rows());
    let _ = writeln!(s, "columns = {}", out.table.columns().join(","));
    let _ = writeln!(s, "warnings = {}", out.warnings.len());
    for w in &out.warnings {
        let _ = writeln!(s, "warning = {w}");
    }
    s.push_str("\n[config]\n");
    s.push_str(&out.resolved.to_config_string());
    if !out.metadata.is_empty() {
        s.push_str("\n[result]\n");
        for (k, v) in &out.metadata {
            let _ = writeln!(s, "{k} = {v}");
        }
    }
    s
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let name = cli.command.name();
    let common = match &cli.command {
        Command::Selfcheck(a) => return run_selfcheck(a),
        Command::Trace(a)
        | Command::Surface(a)
        | Command::SweepN(a)
        | Command::SweepLambda(a)
        | Command::Ground(a) => a,
    };
    let result = common.load().and_then(|cfg| execute(name, &cfg));
    match result {
        Ok((path, out)) => {
            println!("wrote {} ({} rows)", path.display(), out.table.rows());
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            if !out.warnings.is_empty() {
                eprintln!("{} warnings", out.warnings.len());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn run_selfcheck(a: &SelfcheckArgs) -> i32 {
    let report = commands::selfcheck(a.quick, a.perturb_bessel);
    for c in &report {
        println!("{c}");
    }
    if report.iter().all(|c| c.passed) {
        0
    } else {
        1
    }
}

/// Read a CSV produced by this crate into its header and numeric rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| output::io_error(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Invalid(format!("{}: empty file", path.display())))?
        .split(',')
        .map(String::from)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Invalid(format!("bad cell `{v}`")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}
