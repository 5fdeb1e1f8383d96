//! Command-line front end for the entropy stable DG solver.

mod config;
mod output;

use std::fmt::Write as _;
use std::io::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use esdg::diagnostics::{cost_model, derivative_demo, flux_property_suite, CostScheme, FluxSuiteReport};
use esdg::experiments::{self, dissipation_name, Problem, RunConfig};
use esdg::operators_1d::{operator_residuals, OperatorResiduals};
use esdg::{EsdgError, Gas, NodeFamily, Operator1D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use config::{build_config, output_dir, parse_range, read_config_file, RunArgs};
use output::{create_csv, num, TimeseriesWriter};

/// `println!` that reports write failures instead of panicking.
macro_rules! say {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout(), $($arg)*)?
    };
}

const OPERATOR_TOL: f64 = 1e-13;
const SHUFFLE_TOL: f64 = 1e-11;
const CONSISTENCY_TOL: f64 = 1e-14;

#[derive(Debug, Parser)]
#[command(name = "esdg", version, about = "Entropy stable Gauss and GLL collocation DG for the compressible Euler equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// L2 errors of the GSBP and decoupled derivatives of exp(-4x^2) on Gauss nodes.
    DerivativeDemo {
        #[arg(long = "N", visible_alias = "degree", default_value = "1..15")]
        degrees: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator identity residuals and two-point flux property checks.
    OperatorCheck {
        #[arg(long = "N", visible_alias = "degree", default_value = "1..15")]
        degrees: String,
        /// gauss, gll or both.
        #[arg(long, default_value = "both")]
        families: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random state pairs per dimension for the flux checks.
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-element flux evaluation and matrix operation counts in three dimensions.
    CostModel {
        #[arg(long = "N", visible_alias = "degree", default_value = "1..7")]
        degrees: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Isentropic vortex on [0, 20] x [-5, 5].
    Vortex2d(RunCommand),
    /// Extruded isentropic vortex on [0, 15] x [0, 20] x [0, 5].
    Vortex3d(RunCommand),
    /// Shock-vortex interaction on [0, 2] x [0, 1].
    Shockvortex(RunCommand),
    /// Inviscid Taylor-Green vortex on [-pi, pi]^3.
    Tgv(RunCommand),
}

#[derive(Debug, Args)]
struct RunCommand {
    #[command(flatten)]
    run: RunArgs,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Invalid user input (exit status 1).
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// A property check exceeded its tolerance (exit status 3).
#[derive(Debug)]
struct PropertyFailure(String);

impl std::fmt::Display for PropertyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PropertyFailure {}

fn config_err(e: anyhow::Error) -> anyhow::Error {
    anyhow::Error::new(ConfigError(format!("{e:#}")))
}

fn exit_status(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 1;
        }
        if cause.is::<PropertyFailure>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<EsdgError>() {
            return match e {
                EsdgError::Config(_)
                | EsdgError::Dimension { .. }
                | EsdgError::Unsupported(_)
                | EsdgError::Jacobian { .. } => 1,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match configure_threads().and_then(|()| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .any(|c| c.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe))
}

/// Caps the worker pool from `ESDG_NUM_THREADS`.
fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("ESDG_NUM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_err(anyhow::anyhow!("ESDG_NUM_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::DerivativeDemo { degrees, out } => derivative(&degrees, &out),
        Command::OperatorCheck { degrees, families, seed, pairs, out } => operator_check(&degrees, &families, seed, pairs, &out),
        Command::CostModel { degrees, out } => cost(&degrees, &out),
        Command::Vortex2d(c) => simulate(Problem::Vortex2d, c),
        Command::Vortex3d(c) => simulate(Problem::Vortex3d, c),
        Command::Shockvortex(c) => simulate(Problem::ShockVortex, c),
        Command::Tgv(c) => simulate(Problem::TaylorGreen, c),
    }
}

fn degrees(s: &str) -> Result<RangeInclusive<usize>> {
    parse_range(s).map_err(config_err)
}

fn derivative(range: &str, out: &Option<PathBuf>) -> Result<()> {
    let range = degrees(range)?;
    if *range.start() == 0 {
        return Err(config_err(anyhow::anyhow!("derivative demo needs N >= 1")));
    }
    let dir = output_dir(out)?;
    let mut w = create_csv(&dir.join("derivative.csv"))?;
    w.write_record(["N", "gsbp", "decoupled"])?;
    say!("{:>3} {:>24} {:>24}", "N", "gsbp", "decoupled");
    for n in range {
        let e = derivative_demo(n)?;
        say!("{n:>3} {:>24} {:>24}", num(e.gsbp), num(e.decoupled));
        w.write_record([n.to_string(), num(e.gsbp), num(e.decoupled)])?;
    }
    w.flush()?;
    Ok(())
}

fn cost(range: &str, out: &Option<PathBuf>) -> Result<()> {
    let range = degrees(range)?;
    let dir = output_dir(out)?;
    let mut w = create_csv(&dir.join("cost.csv"))?;
    w.write_record(["N", "scheme", "flux_evals", "matrix_ops"])?;
    say!("{:>3} {:>10} {:>12} {:>12}", "N", "scheme", "flux_evals", "matrix_ops");
    for n in range {
        for scheme in CostScheme::ALL {
            let c = cost_model(n, scheme);
            say!("{n:>3} {:>10} {:>12} {:>12}", scheme.name(), c.flux_evals, c.matrix_ops);
            w.write_record([n.to_string(), scheme.name().into(), c.flux_evals.to_string(), c.matrix_ops.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_families(s: &str) -> Result<Vec<NodeFamily>> {
    match s.to_ascii_lowercase().as_str() {
        "both" => Ok(vec![NodeFamily::Gauss, NodeFamily::Gll]),
        other => Ok(vec![experiments::parse_family(other).map_err(|e| config_err(e.into()))?]),
    }
}

fn operator_check(range: &str, families: &str, seed: u64, pairs: usize, out: &Option<PathBuf>) -> Result<()> {
    let range = degrees(range)?;
    let families = parse_families(families)?;
    let dir = output_dir(out)?;
    let mut report = String::new();
    let mut failures = Vec::new();
    writeln!(report, "operator identities (tolerance {OPERATOR_TOL:e})")?;
    writeln!(report, "{:>6} {:>3} {:>10} {:>10} {:>10} {:>10} {:>10}", "family", "N", "gsbp", "skew", "decoupled", "Q1", "Vf1")?;
    for &family in &families {
        for n in range.clone().filter(|&n| n >= family.min_degree()) {
            let r: OperatorResiduals = operator_residuals(&Operator1D::new(n, family)?);
            writeln!(
                report,
                "{:>6} {n:>3} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
                family.name(),
                r.gsbp,
                r.skew,
                r.decoupled,
                r.row_sum,
                r.interp
            )?;
            let ok = r.max() <= OPERATOR_TOL;
            if !ok {
                failures.push(format!("{} N={n}: operator residual {:.3e}", family.name(), r.max()));
            }
        }
    }
    let gas = Gas::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = move || rng.gen::<f64>();
    let suites: [FluxSuiteReport; 3] = [
        flux_property_suite::<1, _>(&gas, pairs, &mut uniform)?,
        flux_property_suite::<2, _>(&gas, pairs, &mut uniform)?,
        flux_property_suite::<3, _>(&gas, pairs, &mut uniform)?,
    ];
    writeln!(report)?;
    writeln!(report, "two-point flux, seed {seed}, {pairs} pairs per dimension (shuffle tolerance {SHUFFLE_TOL:e})")?;
    writeln!(report, "{:>3} {:>10} {:>10} {:>10}", "d", "symmetry", "consist", "shuffle")?;
    for s in &suites {
        writeln!(report, "{:>3} {:>10.3e} {:>10.3e} {:>10.3e}", s.dim, s.symmetry, s.consistency, s.shuffle)?;
        let ok = s.symmetry == 0.0 && s.consistency <= CONSISTENCY_TOL && s.shuffle <= SHUFFLE_TOL;
        if !ok {
            failures.push(format!("flux check failed in {}D", s.dim));
        }
    }
    writeln!(report)?;
    writeln!(report, "{}", if failures.is_empty() { "PASS" } else { "FAIL" })?;
    std::fs::write(dir.join("operator_report.txt"), &report).context("writing operator_report.txt")?;
    std::io::stdout().write_all(report.as_bytes())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(PropertyFailure(failures.join("; ")).into())
    }
}

/// Mesh size reported next to the errors: the element edge length, divided by ten for
/// the 2D vortex.
fn nominal_h(cfg: &RunConfig) -> f64 {
    let width = match cfg.problem {
        Problem::Vortex2d => 20.0,
        Problem::Vortex3d => 15.0,
        Problem::ShockVortex => 2.0,
        Problem::TaylorGreen => 2.0 * std::f64::consts::PI,
    };
    let edge = width / cfg.elems[0] as f64;
    if cfg.problem == Problem::Vortex2d {
        edge / 10.0
    } else {
        edge
    }
}

fn simulate(problem: Problem, cmd: RunCommand) -> Result<()> {
    let file = match &cmd.config {
        Some(p) => read_config_file(p).map_err(config_err)?,
        None => Default::default(),
    };
    let cfg = build_config(problem, &cmd.run, &file).map_err(config_err)?;
    let dir = output_dir(&cmd.out)?;
    say!(
        "{problem}: N={} {} mesh {} flux {} cfl {} T={}",
        cfg.degree,
        cfg.family.name(),
        cfg.elems.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("x"),
        dissipation_name(cfg.dissipation),
        cfg.cfl,
        cfg.t_final
    );
    let mut ts = TimeseriesWriter::create(&dir.join("timeseries.csv"), problem.dim())?;
    let mut write_err = None;
    let result = experiments::run(&cfg, |rec| {
        let _ = writeln!(std::io::stdout(), "t = {:.6} entropy = {}", rec.time, num(rec.entropy));
        if write_err.is_none() {
            write_err = ts.push(rec).err();
        }
    });
    ts.finish()?;
    if let Some(e) = write_err {
        return Err(e);
    }
    let result = result?;
    say!("steps {}", result.steps);
    if result.max_wall_entropy_production > f64::NEG_INFINITY {
        say!("max wall entropy production {:.3e}", result.max_wall_entropy_production);
    }
    if let Some(err) = &result.error {
        write_errors(&dir.join("errors.csv"), &cfg, &err.per_field, err.combined)?;
        say!("L2 error {}", num(err.combined));
    }
    Ok(())
}

fn write_errors(path: &Path, cfg: &RunConfig, per_field: &[f64], combined: f64) -> Result<()> {
    let mut w = create_csv(path)?;
    let mut header = vec!["h".to_string(), "N".into(), "family".into(), "rho".into()];
    header.extend(["rho_u", "rho_v", "rho_w"].iter().take(cfg.problem.dim()).map(|s| s.to_string()));
    header.extend(["E".into(), "combined".into()]);
    w.write_record(&header)?;
    let mut row = vec![num(nominal_h(cfg)), cfg.degree.to_string(), cfg.family.name().to_string()];
    row.extend(per_field.iter().map(|&e| num(e)));
    row.push(num(combined));
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}
