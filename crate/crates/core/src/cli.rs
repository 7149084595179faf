//! Command-line front end: `eval`, `invert`, `check` and `diagnose`.
//!
//! Exit codes: 0 equal (or success), 1 not equal, 3 inconclusive, 2 errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::equality::{decide_equality, run_diagnostics, DecideConfig, DiagnosticResult, EqualityReport, Regularity, Route};
use crate::error::{Error, Result};
use crate::means::{MeanSpec, WeightFamily};
use crate::monotone_fn::{Expr, Interval, MonotoneFunction};

/// A mean as stored on disk.
///
/// ```json
/// {
///   "interval": [0, "inf"],
///   "generator": {"kind": "log"},
///   "weights": [{"kind": "const", "value": 1}, {"kind": "identity"}],
///   "regularity": {"distinct_pair": [0, 1]}
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub interval: Interval,
    pub generator: Expr,
    pub weights: Vec<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<Regularity>,
}

impl SpecFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_mean(&self) -> Result<MeanSpec> {
        let generator = MonotoneFunction::new(self.generator.clone(), self.interval)?;
        MeanSpec::new(generator, WeightFamily::new(self.weights.clone(), self.interval)?)
    }
}

#[derive(Debug, Parser)]
#[command(name = "bmeans", version, about = "Generalized Bajraktarevic means")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the mean at a tuple.
    Eval {
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated coordinates, e.g. `1,3`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Evaluate the generalized inverse of the generator.
    Invert {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        value: f64,
    },
    /// Decide whether two means are equal.
    Check(CompareArgs),
    /// Print every necessary-condition diagnostic for a pair of means.
    Diagnose(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Main,
    MainPlus,
    Auto,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Main => Route::Main,
            RouteArg::MainPlus => Route::MainPlus,
            RouteArg::Auto => Route::Auto,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    /// Tuple arity for the equality sweep; defaults to the means' arity.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of diagonal base points.
    #[arg(long, default_value_t = 12)]
    pub grid: usize,
    /// Perturbation radius; defaults to 5% of the interval's working window.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = crate::equality::EQUALITY_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    pub route: RouteArg,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random near-diagonal tuples added to the sweep.
    #[arg(long, default_value_t = 32)]
    pub probes: usize,
    /// Include the quadrature-based pairwise identity.
    #[arg(long)]
    pub extended: bool,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CompareArgs {
    fn load(&self) -> Result<(MeanSpec, MeanSpec, DecideConfig)> {
        let (ls, rs) = (SpecFile::load(&self.left)?, SpecFile::load(&self.right)?);
        let (left, right) = (ls.to_mean()?, rs.to_mean()?);
        let regularity = ls.regularity.or(rs.regularity).unwrap_or_default();
        let mut cfg = DecideConfig::new(self.n.unwrap_or(left.arity()), regularity);
        cfg.grid.grid = self.grid;
        cfg.grid.radius = self.radius;
        cfg.grid.tol = self.tol;
        cfg.grid.seed = self.seed;
        cfg.grid.probes = self.probes;
        cfg.route = self.route.into();
        cfg.extended = self.extended;
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("--tol must be positive, got {}", self.tol)));
        }
        if cfg.route == Route::MainPlus && cfg.grid.n < 3 {
            return Err(Error::Config("route main-plus needs n >= 3".into()));
        }
        Ok((left, right, cfg))
    }
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad coordinate {t:?}: {e}")))
        })
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn fmt_witness(w: &[f64]) -> String {
    let parts: Vec<String> = w.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(", "))
}

pub fn print_table(out: &mut dyn Write, rows: &[DiagnosticResult]) -> std::io::Result<()> {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    writeln!(out, "{:<width$}  {:>12}  {:>9}  {:<4}  witness", "name", "residual", "threshold", "pass")?;
    for r in rows {
        writeln!(
            out,
            "{:<width$}  {:>12.3e}  {:>9.0e}  {:<4}  {}",
            r.name,
            r.max_residual,
            r.threshold,
            if r.pass { "ok" } else { "FAIL" },
            fmt_witness(&r.witness)
        )?;
    }
    Ok(())
}

fn print_report(out: &mut dyn Write, report: &EqualityReport) -> std::io::Result<()> {
    let route = match report.route {
        Some(Route::Main) => "main",
        Some(Route::MainPlus) => "main-plus",
        _ => "-",
    };
    writeln!(out, "verdict: {:?} (route {route})", report.verdict)?;
    if let Some(p) = report.params {
        writeln!(out, "params: a = {}, b = {}, c = {}, d = {}", p.a, p.b, p.c, p.d)?;
    }
    if let Some(g) = report.gamma {
        writeln!(out, "gamma: {g}")?;
    }
    if let Some(w) = &report.witness {
        writeln!(out, "witness: {}", fmt_witness(w))?;
    }
    print_table(out, &report.diagnostics)
}

/// Runs a parsed command, writing human-readable output to `out`. Returns the
/// process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Eval { spec, point } => {
            let m = SpecFile::load(&spec)?.to_mean()?;
            let x = parse_point(&point)?;
            writeln!(out, "{}", m.mean_direct(&x)?)?;
            Ok(0)
        }
        Command::Invert { spec, value } => {
            let m = SpecFile::load(&spec)?.to_mean()?;
            writeln!(out, "{}", m.inverse().eval(value)?)?;
            Ok(0)
        }
        Command::Check(args) => {
            let (left, right, cfg) = args.load()?;
            let report = decide_equality(&left, &right, &cfg)?;
            print_report(out, &report)?;
            if let Some(path) = &args.out {
                write_json(path, &report)?;
            }
            Ok(report.verdict.exit_code())
        }
        Command::Diagnose(args) => {
            let (left, right, cfg) = args.load()?;
            let rows = run_diagnostics(&left, &right, &cfg)?;
            print_table(out, &rows)?;
            if let Some(path) = &args.out {
                write_json(path, &rows)?;
            }
            Ok(0)
        }
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
