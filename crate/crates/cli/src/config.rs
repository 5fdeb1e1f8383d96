//! Run configuration from flags and an optional `key = value` file.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use esdg::experiments::{parse_dissipation, parse_family, GeometryDegree, Problem, RunConfig, Warp};

/// Flags shared by the time-dependent experiments. Every flag overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Polynomial degree.
    #[arg(long = "N", visible_alias = "degree")]
    pub degree: Option<String>,
    /// Node family: gauss or gll.
    #[arg(long)]
    pub family: Option<String>,
    /// Elements per direction, e.g. 16x8 or 4x4x4.
    #[arg(long)]
    pub mesh: Option<String>,
    /// Mesh warping: none, light, moderate, heavy or a numeric amplitude.
    #[arg(long)]
    pub warp: Option<String>,
    /// Geometry degree policy: isoparametric or subparametric.
    #[arg(long)]
    pub geometry: Option<String>,
    /// Interface flux: ec, lax-friedrichs or matrix.
    #[arg(long)]
    pub flux: Option<String>,
    #[arg(long)]
    pub cfl: Option<String>,
    #[arg(long)]
    pub tfinal: Option<String>,
    /// Diagnostic output interval in time units.
    #[arg(long)]
    pub output_interval: Option<String>,
    /// Keep the initial timestep for the whole run.
    #[arg(long)]
    pub fixed_dt: bool,
    #[arg(long)]
    pub gamma: Option<String>,
    /// Full-resolution Taylor-Green settings (N=7, 8^3 elements).
    #[arg(long)]
    pub full: bool,
}

/// Parsed `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key = value, got '{raw}'", lineno + 1);
        };
        map.insert(k.trim().replace('_', "-").to_ascii_lowercase(), v.trim().to_string());
    }
    Ok(map)
}

const KEYS: [&str; 12] = [
    "n", "family", "mesh", "warp", "geometry", "flux", "cfl", "tfinal", "output-interval", "fixed-dt", "gamma", "full",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| anyhow::anyhow!("invalid value '{v}' for {key}"))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => bail!("invalid boolean '{v}' for {key}"),
    }
}

pub fn parse_mesh(s: &str) -> Result<Vec<usize>> {
    s.split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| anyhow::anyhow!("invalid mesh '{s}', expected e.g. 16x8")))
        .collect()
}

/// `a..b`, `a..=b` (both inclusive) or a single value.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| anyhow::anyhow!("invalid degree range '{s}'"));
    let r = if let Some((a, b)) = s.split_once("..") {
        parse(a)?..=parse(b.trim_start_matches('='))?
    } else {
        let n = parse(s)?;
        n..=n
    };
    if r.is_empty() {
        bail!("empty degree range '{s}'");
    }
    Ok(r)
}

/// Builds the run configuration: problem preset, then file values, then flags.
pub fn build_config(problem: Problem, args: &RunArgs, file: &BTreeMap<String, String>) -> Result<RunConfig> {
    if let Some(k) = file.keys().find(|k| !KEYS.contains(&k.as_str())) {
        bail!("unknown config key '{k}'");
    }
    let pick = |flag: &Option<String>, key: &str| flag.clone().or_else(|| file.get(key).cloned());
    let full = args.full || file.get("full").map(|v| parse_bool("full", v)).transpose()?.unwrap_or(false);
    let mut cfg = if full {
        if problem != Problem::TaylorGreen {
            bail!("--full applies to the Taylor-Green problem only");
        }
        RunConfig::taylor_green_full()
    } else {
        RunConfig::preset(problem)
    };
    if let Some(v) = pick(&args.degree, "n") {
        cfg.degree = parse_num("N", &v)?;
    }
    if let Some(v) = pick(&args.family, "family") {
        cfg.family = parse_family(&v)?;
    }
    if let Some(v) = pick(&args.mesh, "mesh") {
        cfg.elems = parse_mesh(&v)?;
    }
    if let Some(v) = pick(&args.warp, "warp") {
        cfg.warp = v.parse::<Warp>()?;
    }
    if let Some(v) = pick(&args.geometry, "geometry") {
        cfg.geometry = v.parse::<GeometryDegree>()?;
    }
    if let Some(v) = pick(&args.flux, "flux") {
        cfg.dissipation = parse_dissipation(&v)?;
    }
    if let Some(v) = pick(&args.cfl, "cfl") {
        cfg.cfl = parse_num("cfl", &v)?;
    }
    if let Some(v) = pick(&args.tfinal, "tfinal") {
        cfg.t_final = parse_num("tfinal", &v)?;
    }
    if let Some(v) = pick(&args.output_interval, "output-interval") {
        cfg.output_interval = Some(parse_num("output-interval", &v)?);
    }
    if args.fixed_dt {
        cfg.fixed_dt = true;
    } else if let Some(v) = file.get("fixed-dt") {
        cfg.fixed_dt = parse_bool("fixed-dt", v)?;
    }
    if let Some(v) = pick(&args.gamma, "gamma") {
        cfg.gamma = parse_num("gamma", &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn output_dir(out: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}
