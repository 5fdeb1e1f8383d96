//! Configured runs of the test problems shared by the command-line front end, the
//! benchmarks and the acceptance suite.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::diagnostics::{kinetic_energy, l2_error, L2Error};
use crate::error::{EsdgError, Result};
use crate::euler::{Conserved, Gas};
use crate::geometry::{Geometry, MetricMethod};
use crate::initial::{IsentropicVortex2d, IsentropicVortex3d, ShockVortex, TaylorGreen};
use crate::mesh::{warp_2d, warp_3d, warp_tgv, BoundaryKind, Mesh};
use crate::operators_1d::NodeFamily;
use crate::operators_nd::TensorOperators;
use crate::solver::{Dissipation, Solver};
use crate::time::{estimate_dt, trace_constant, Integrator};

/// Time-dependent test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Vortex2d,
    Vortex3d,
    ShockVortex,
    TaylorGreen,
}

impl Problem {
    pub fn dim(self) -> usize {
        match self {
            Problem::Vortex2d | Problem::ShockVortex => 2,
            Problem::Vortex3d | Problem::TaylorGreen => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::Vortex2d => "vortex2d",
            Problem::Vortex3d => "vortex3d",
            Problem::ShockVortex => "shockvortex",
            Problem::TaylorGreen => "tgv",
        }
    }

    fn domain(self) -> ([f64; 3], [f64; 3]) {
        match self {
            Problem::Vortex2d => ([0.0, -5.0, 0.0], [20.0, 5.0, 0.0]),
            Problem::Vortex3d => ([0.0; 3], [15.0, 20.0, 5.0]),
            Problem::ShockVortex => ([0.0; 3], [2.0, 1.0, 0.0]),
            Problem::TaylorGreen => ([-PI; 3], [PI; 3]),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = EsdgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vortex2d" => Ok(Problem::Vortex2d),
            "vortex3d" => Ok(Problem::Vortex3d),
            "shockvortex" | "shock-vortex" => Ok(Problem::ShockVortex),
            "tgv" | "taylor-green" => Ok(Problem::TaylorGreen),
            _ => Err(EsdgError::Config(format!("unknown problem '{s}'"))),
        }
    }
}

/// Curvilinear warping of the Cartesian mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warp {
    None,
    Light,
    Moderate,
    Heavy,
    /// Problem-specific warp with an explicit amplitude (2D `alpha` or Taylor-Green
    /// amplitude; ignored by the 3D vortex warp, which has a fixed shape).
    Custom(f64),
}

impl Warp {
    fn amplitude(self, problem: Problem) -> Option<f64> {
        match (self, problem) {
            (Warp::None, _) => None,
            (Warp::Custom(a), _) => Some(a),
            (_, Problem::TaylorGreen) => Some(0.5),
            (Warp::Light, _) => Some(1.0 / 64.0),
            (Warp::Moderate, _) => Some(1.0 / 16.0),
            (Warp::Heavy, _) => Some(1.0 / 8.0),
        }
    }
}

impl FromStr for Warp {
    type Err = EsdgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Warp::None),
            "light" => Ok(Warp::Light),
            "moderate" => Ok(Warp::Moderate),
            "heavy" => Ok(Warp::Heavy),
            other => other
                .parse::<f64>()
                .map(Warp::Custom)
                .map_err(|_| EsdgError::Config(format!("unknown warp '{s}'"))),
        }
    }
}

/// Degree of the geometry approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryDegree {
    /// `N_geo = N`.
    Isoparametric,
    /// `N_geo = floor(N/2) + 1`.
    Subparametric,
}

impl GeometryDegree {
    pub fn degree(self, n: usize) -> usize {
        match self {
            GeometryDegree::Isoparametric => n.max(1),
            GeometryDegree::Subparametric => n / 2 + 1,
        }
    }
}

impl FromStr for GeometryDegree {
    type Err = EsdgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isoparametric" | "iso" => Ok(GeometryDegree::Isoparametric),
            "subparametric" | "sub" => Ok(GeometryDegree::Subparametric),
            _ => Err(EsdgError::Config(format!("unknown geometry degree policy '{s}'"))),
        }
    }
}

pub fn parse_family(s: &str) -> Result<NodeFamily> {
    match s.to_ascii_lowercase().as_str() {
        "gauss" => Ok(NodeFamily::Gauss),
        "gll" | "lobatto" => Ok(NodeFamily::Gll),
        _ => Err(EsdgError::Config(format!("unknown node family '{s}'"))),
    }
}

pub fn parse_dissipation(s: &str) -> Result<Dissipation> {
    match s {
        "ec" | "none" => Ok(Dissipation::None),
        "lax-friedrichs" | "lf" => Ok(Dissipation::LaxFriedrichs),
        "matrix" => Ok(Dissipation::Matrix),
        _ => Err(EsdgError::Config(format!("unknown flux '{s}'"))),
    }
}

pub fn dissipation_name(d: Dissipation) -> &'static str {
    match d {
        Dissipation::None => "ec",
        Dissipation::LaxFriedrichs => "lax-friedrichs",
        Dissipation::Matrix => "matrix",
    }
}

/// Complete description of one time-dependent run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub degree: usize,
    pub family: NodeFamily,
    /// Elements per direction.
    pub elems: Vec<usize>,
    pub warp: Warp,
    pub geometry: GeometryDegree,
    pub dissipation: Dissipation,
    pub cfl: f64,
    pub t_final: f64,
    /// Diagnostic cadence (`None`: initial and final state only).
    pub output_interval: Option<f64>,
    /// Keep the initial timestep instead of recomputing it every step.
    pub fixed_dt: bool,
    pub gamma: f64,
}

impl RunConfig {
    /// Default settings of each problem.
    pub fn preset(problem: Problem) -> Self {
        let base = RunConfig {
            problem,
            degree: 2,
            family: NodeFamily::Gauss,
            elems: vec![16, 8],
            warp: Warp::None,
            geometry: GeometryDegree::Isoparametric,
            dissipation: Dissipation::LaxFriedrichs,
            cfl: 0.5,
            t_final: 5.0,
            output_interval: None,
            fixed_dt: false,
            gamma: 1.4,
        };
        match problem {
            Problem::Vortex2d => base,
            Problem::Vortex3d => RunConfig { elems: vec![6, 8, 2], cfl: 0.75, ..base },
            Problem::ShockVortex => RunConfig {
                degree: 4,
                elems: vec![100, 50],
                dissipation: Dissipation::Matrix,
                cfl: 1.0,
                t_final: 0.7,
                output_interval: Some(0.05),
                ..base
            },
            Problem::TaylorGreen => RunConfig {
                degree: 3,
                elems: vec![4, 4, 4],
                cfl: 0.25,
                t_final: 20.0,
                output_interval: Some(0.1),
                ..base
            },
        }
    }

    /// Full-resolution Taylor-Green settings (`N = 7`, `h = pi/8`).
    pub fn taylor_green_full() -> Self {
        RunConfig { degree: 7, elems: vec![8, 8, 8], ..Self::preset(Problem::TaylorGreen) }
    }

    /// Number of elements per direction for a 2D vortex mesh size `h = edge / 10`.
    pub fn vortex2d_elems(h: f64) -> Vec<usize> {
        let nx = (2.0 / h).round() as usize;
        vec![nx, nx / 2]
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.problem.dim();
        if self.elems.len() != d {
            return Err(EsdgError::Config(format!(
                "{} needs {d} element counts, got {}",
                self.problem,
                self.elems.len()
            )));
        }
        if self.elems.contains(&0) {
            return Err(EsdgError::Config("element counts must be positive".into()));
        }
        if self.degree < self.family.min_degree() {
            return Err(EsdgError::Config(format!("degree {} is too low for {} nodes", self.degree, self.family)));
        }
        if self.dissipation == Dissipation::Matrix && d != 2 {
            return Err(EsdgError::Config("matrix dissipation requires a two-dimensional problem".into()));
        }
        if !(self.cfl > 0.0) || !(self.t_final >= 0.0) || !(self.gamma > 1.0) {
            return Err(EsdgError::Config("cfl and gamma - 1 must be positive and t_final nonnegative".into()));
        }
        if let Some(iv) = self.output_interval {
            if !(iv > 0.0) {
                return Err(EsdgError::Config("output interval must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Monitored quantities at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeRecord {
    pub time: f64,
    pub entropy: f64,
    /// Integrals of `rho`, the momentum components and `E`.
    pub totals: Vec<f64>,
    pub kinetic_energy: f64,
    /// Cumulative two-point flux evaluations.
    pub flux_calls: u64,
}

/// Outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub records: Vec<TimeRecord>,
    /// Error against the exact solution at the final time, when one exists.
    pub error: Option<L2Error>,
    pub steps: usize,
    /// Mesh size estimate used in the timestep.
    pub h: f64,
    /// Largest wall entropy production `psi_n - v^T f*` over all evaluations.
    pub max_wall_entropy_production: f64,
    pub num_elems: usize,
}

/// Exact solution `u(x, t)`.
pub type ExactFn<const D: usize> = Box<dyn Fn(&[f64; D], f64) -> Conserved<D> + Send + Sync>;

/// A discretized problem ready to be integrated.
pub struct Setup<const D: usize> {
    pub mesh: Mesh<D>,
    pub solver: Solver<D>,
    pub u: Vec<Conserved<D>>,
    pub exact: Option<ExactFn<D>>,
}

fn to_array<const D: usize>(v: [f64; 3]) -> [f64; D] {
    std::array::from_fn(|k| v[k])
}

/// Builds mesh, geometry, solver and initial state for a configuration of dimension `D`.
pub fn setup<const D: usize>(cfg: &RunConfig) -> Result<Setup<D>> {
    cfg.validate()?;
    if cfg.problem.dim() != D {
        return Err(EsdgError::Dimension { expected: cfg.problem.dim(), got: D });
    }
    let gas = Gas::new(cfg.gamma);
    let (lo3, hi3) = cfg.problem.domain();
    let (lo, hi): ([f64; D], [f64; D]) = (to_array(lo3), to_array(hi3));
    let elems: [usize; D] = std::array::from_fn(|k| cfg.elems[k]);
    let p = BoundaryKind::Periodic;
    let mut boundary = [[p; 2]; D];
    if cfg.problem == Problem::ShockVortex {
        boundary[1] = [BoundaryKind::Wall; 2];
    }
    let amplitude = cfg.warp.amplitude(cfg.problem);
    let geo_degree = if amplitude.is_some() { cfg.geometry.degree(cfg.degree) } else { 1 };
    let mut mesh = Mesh::<D>::cartesian(lo, hi, elems, boundary, geo_degree)?;
    if let Some(a) = amplitude {
        warp_mesh(&mut mesh, cfg.problem, lo3, hi3, a)?;
    }
    let ops = TensorOperators::new(D, cfg.degree, cfg.family)?;
    let geo = Geometry::new(&mesh, &ops, MetricMethod::Auto)?;
    let solver = Solver::new(ops, geo, gas, cfg.dissipation)?;
    let (u, exact) = initial_state::<D>(cfg, &solver, gas)?;
    Ok(Setup { mesh, solver, u, exact })
}

fn warp_mesh<const D: usize>(mesh: &mut Mesh<D>, problem: Problem, lo: [f64; 3], hi: [f64; 3], a: f64) -> Result<()> {
    // the meshes have matching dimension by construction; the warp closures act on
    // fixed-size arrays, so route through three components
    let map: Box<dyn Fn([f64; 3]) -> [f64; 3]> = match problem {
        Problem::Vortex2d | Problem::ShockVortex => {
            let w = warp_2d([lo[0], lo[1]], [hi[0], hi[1]], a);
            Box::new(move |x| {
                let y = w([x[0], x[1]]);
                [y[0], y[1], 0.0]
            })
        }
        Problem::Vortex3d => Box::new(warp_3d(lo, hi)),
        Problem::TaylorGreen => Box::new(warp_tgv(a)),
    };
    mesh.warp(|x: [f64; D]| {
        let mut x3 = [0.0; 3];
        x3[..D].copy_from_slice(&x);
        to_array(map(x3))
    });
    Ok(())
}

fn initial_state<const D: usize>(cfg: &RunConfig, solver: &Solver<D>, gas: Gas) -> Result<(Vec<Conserved<D>>, Option<ExactFn<D>>)> {
    let exact: ExactFn<D> = match cfg.problem {
        Problem::Vortex2d => {
            let v = IsentropicVortex2d { gas, ..Default::default() };
            Box::new(move |x, t| lift(&v.state(&[x[0], x[1]], t)))
        }
        Problem::Vortex3d => {
            let v = IsentropicVortex3d { gas, p0: 1.0 / gas.gamma, ..Default::default() };
            Box::new(move |x, t| lift(&v.state(&[x[0], x[1], x[2]], t)))
        }
        Problem::ShockVortex => {
            let sv = ShockVortex {
                gas,
                left: crate::euler::Primitive { rho: 1.0, vel: [gas.gamma.sqrt(), 0.0], p: 1.0 },
                ..Default::default()
            };
            Box::new(move |x, _| lift(&sv.state(&[x[0], x[1]])))
        }
        Problem::TaylorGreen => {
            let tg = TaylorGreen { gas };
            Box::new(move |x, _| lift(&tg.state(&[x[0], x[1], x[2]])))
        }
    };
    let u = solver.project(|x| exact(x, 0.0));
    let has_exact = matches!(cfg.problem, Problem::Vortex2d | Problem::Vortex3d);
    Ok((u, if has_exact { Some(exact) } else { None }))
}

/// Reinterprets a state of a known dimension as `Conserved<D>` (dimensions agree by
/// construction of the caller).
fn lift<const A: usize, const D: usize>(u: &Conserved<A>) -> Conserved<D> {
    assert_eq!(A, D, "state dimension mismatch");
    Conserved { rho: u.rho, mom: std::array::from_fn(|k| u.mom[k]), energy: u.energy }
}

impl<const D: usize> Setup<D> {
    /// Timestep from the current state: `C_CFL h / (a C_N)` with the Gauss trace constant
    /// for both node families.
    pub fn dt(&self, cfl: f64, u: &[Conserved<D>]) -> Result<f64> {
        let ops = &self.solver.ops;
        let c_n = trace_constant(D, ops.degree(), NodeFamily::Gauss);
        estimate_dt(cfl, self.solver.geo.length_scale(), self.solver.max_wave_speed(u)?, c_n)
    }

    /// Integrates to `cfg.t_final`, calling `on_record` at every output time.
    /// `on_state` additionally receives the solver and state at every output time.
    pub fn run_with<F, G>(&mut self, cfg: &RunConfig, mut on_record: F, mut on_state: G) -> Result<RunResult>
    where
        F: FnMut(&TimeRecord),
        G: FnMut(&mut Solver<D>, f64, &[Conserved<D>]) -> Result<()>,
    {
        let mut integrator = Integrator::new(0.0, cfg.t_final);
        if let Some(iv) = cfg.output_interval {
            integrator = integrator.with_output_interval(iv);
        }
        let fixed = if cfg.fixed_dt { Some(self.dt(cfg.cfl, &self.u)?) } else { None };
        let mut u = std::mem::take(&mut self.u);
        let solver = RefCell::new(&mut self.solver);
        let flux_calls = RefCell::new(0u64);
        let wall = RefCell::new(f64::NEG_INFINITY);
        let records = RefCell::new(Vec::new());
        let this_mesh = &self.mesh;
        let c_n = trace_constant(D, cfg.degree, NodeFamily::Gauss);
        let h = solver.borrow().geo.length_scale();
        let summary = integrator.run(
            &mut u,
            |t, x, out| {
                let stats = solver.borrow_mut().rhs(t, x, out)?;
                *flux_calls.borrow_mut() += stats.flux_calls;
                let mut w = wall.borrow_mut();
                *w = w.max(stats.max_wall_entropy_production);
                Ok(())
            },
            |x| match fixed {
                Some(dt) => Ok(dt),
                None => estimate_dt(cfg.cfl, h, solver.borrow().max_wave_speed(x)?, c_n),
            },
            |t, x| {
                let rec = record(this_mesh, &solver.borrow(), t, x, *flux_calls.borrow())?;
                on_record(&rec);
                records.borrow_mut().push(rec);
                on_state(&mut solver.borrow_mut(), t, x)
            },
        );
        self.u = u;
        let summary = summary?;
        let error = match &self.exact {
            Some(f) => Some(l2_error(&self.mesh, &self.solver.ops, &self.u, |x| f(x, summary.time))?),
            None => None,
        };
        Ok(RunResult {
            records: records.into_inner(),
            error,
            steps: summary.steps,
            h,
            max_wall_entropy_production: wall.into_inner(),
            num_elems: self.mesh.num_elems(),
        })
    }

    pub fn run(&mut self, cfg: &RunConfig) -> Result<RunResult> {
        self.run_with(cfg, |_| {}, |_, _, _| Ok(()))
    }

    /// Monitors of the current state without integrating.
    pub fn snapshot(&self, t: f64) -> Result<TimeRecord> {
        record(&self.mesh, &self.solver, t, &self.u, 0)
    }
}

fn record<const D: usize>(
    mesh: &Mesh<D>,
    solver: &Solver<D>,
    t: f64,
    u: &[Conserved<D>],
    flux_calls: u64,
) -> Result<TimeRecord> {
    let totals = solver.conserved_totals(u);
    Ok(TimeRecord {
        time: t,
        entropy: solver.entropy_total(u)?,
        totals: (0..D + 2).map(|c| totals.component(c)).collect(),
        kinetic_energy: kinetic_energy(mesh, &solver.ops, u)?,
        flux_calls,
    })
}

/// Runs a configuration of any dimension.
pub fn run<F: FnMut(&TimeRecord)>(cfg: &RunConfig, on_record: F) -> Result<RunResult> {
    match cfg.problem.dim() {
        2 => setup::<2>(cfg)?.run_with(cfg, on_record, |_, _, _| Ok(())),
        3 => setup::<3>(cfg)?.run_with(cfg, on_record, |_, _, _| Ok(())),
        d => Err(EsdgError::Unsupported(format!("dimension {d}"))),
    }
}

/// Instantaneous entropy balance residuals at `samples` equally spaced times of a run
/// (including the initial state).
pub fn entropy_residual_samples(cfg: &RunConfig, samples: usize) -> Result<Vec<f64>> {
    if cfg.problem.dim() != 2 {
        return Err(EsdgError::Unsupported("entropy residual sampling is provided for 2D problems".into()));
    }
    let mut run_cfg = cfg.clone();
    run_cfg.output_interval = Some(cfg.t_final / (samples.max(2) - 1) as f64);
    let mut s = setup::<2>(&run_cfg)?;
    let mut out = Vec::new();
    s.run_with(&run_cfg, |_| {}, |solver, t, u| {
        out.push(solver.entropy_residual(t, u)?);
        Ok(())
    })?;
    Ok(out)
}
