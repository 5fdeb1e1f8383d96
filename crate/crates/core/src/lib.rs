//! Entropy-stable Gauss and GLL collocation discontinuous Galerkin methods for the
//! compressible Euler equations, built on decoupled summation-by-parts operators.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod diagnostics;
pub mod euler;
pub mod experiments;
pub mod geometry;
pub mod initial;
pub mod mesh;
pub mod operators_1d;
pub mod operators_nd;
pub mod solver;
pub mod time;

pub use error::{EsdgError, Result};
pub use euler::{Conserved, EntropyVars, FluxResiduals, FluxState, Gas, Primitive};
pub use geometry::{Geometry, MetricMethod};
pub use mesh::{BoundaryKind, FaceLink, Mesh};
pub use operators_1d::{NodeFamily, Operator1D};
pub use operators_nd::{GeneralQuadratureOps, TensorOperators};
pub use solver::{BoundaryState, Dissipation, RhsStats, Solver};
pub use time::{estimate_dt, trace_constant, IntegrationSummary, Integrator, StateVector};
