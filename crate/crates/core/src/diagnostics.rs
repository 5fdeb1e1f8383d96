//! Error norms, integral monitors, kinetic energy and the operation-count model.

use rayon::prelude::*;

use crate::error::{EsdgError, Result};
use crate::euler::{Conserved, Gas, Primitive};
use crate::geometry::cofactor;
use crate::mesh::Mesh;
use crate::operators_1d::{build_nodes, interpolation_matrix, NodeFamily, Operator1D};
use crate::operators_nd::TensorOperators;

/// Tensor-product Gauss rule on the reference element with interpolation from the
/// solution nodes.
#[derive(Debug, Clone)]
pub struct ElementQuadrature {
    pub dim: usize,
    /// Points per direction.
    pub nq: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `nq x (N+1)` interpolation from the solution nodes.
    interp: Vec<f64>,
    n1: usize,
}

impl ElementQuadrature {
    pub fn new(ops: &TensorOperators, nq: usize) -> Result<Self> {
        if nq == 0 {
            return Err(EsdgError::Config("quadrature needs at least one point".into()));
        }
        let (points, weights) = build_nodes(nq - 1, NodeFamily::Gauss)?;
        let op = &ops.op1d;
        let m = interpolation_matrix(&op.nodes, &op.bary, &points);
        let n1 = ops.n1;
        let interp = (0..nq).flat_map(|i| (0..n1).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
        Ok(Self { dim: ops.dim, nq, points, weights, interp, n1 })
    }

    pub fn num_points(&self) -> usize {
        self.nq.pow(self.dim as u32)
    }

    fn multi_index(&self, q: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut r = q;
        for slot in idx.iter_mut().take(self.dim) {
            *slot = r % self.nq;
            r /= self.nq;
        }
        idx
    }

    /// Reference coordinates and weight of point `q` (first direction fastest).
    pub fn point<const D: usize>(&self, q: usize) -> ([f64; D], f64) {
        let idx = self.multi_index(q);
        let xi = std::array::from_fn(|k| self.points[idx[k]]);
        let w = (0..D).map(|k| self.weights[idx[k]]).product();
        (xi, w)
    }

    /// Interpolates one element's nodal values to the quadrature points by sum
    /// factorization.
    pub fn interpolate<const D: usize>(&self, nodal: &[Conserved<D>]) -> Vec<Conserved<D>> {
        let mut cur: Vec<Conserved<D>> = nodal.to_vec();
        // shape of `cur` per direction, first direction fastest
        let mut shape = [self.n1; 3];
        for dir in 0..D {
            let before: usize = shape[..dir].iter().product();
            let after: usize = shape[dir + 1..D].iter().product();
            let mut next = vec![Conserved::zero(); before * self.nq * after];
            for a in 0..after {
                for i in 0..self.nq {
                    let row = &self.interp[i * self.n1..(i + 1) * self.n1];
                    for b in 0..before {
                        let mut acc = Conserved::zero();
                        for (j, r) in row.iter().enumerate() {
                            acc.axpy(*r, &cur[b + before * (j + self.n1 * a)]);
                        }
                        next[b + before * (i + self.nq * a)] = acc;
                    }
                }
            }
            shape[dir] = self.nq;
            cur = next;
        }
        cur
    }

    /// `sum_k int_{D_k} f(x, u(x)) dx`, with the physical position and Jacobian taken
    /// from the exact element map. Sums are reduced in element order.
    pub fn integrate<const D: usize, F>(&self, mesh: &Mesh<D>, u: &[Conserved<D>], f: F) -> f64
    where
        F: Fn(&[f64; D], &Conserved<D>) -> f64 + Sync,
    {
        let nv = self.n1.pow(D as u32);
        let per_elem: Vec<f64> = (0..mesh.num_elems())
            .into_par_iter()
            .map(|e| {
                let uq = self.interpolate(&u[e * nv..(e + 1) * nv]);
                let mut acc = 0.0;
                for (q, uqq) in uq.iter().enumerate() {
                    let (xi, w) = self.point::<D>(q);
                    let (x, a) = mesh.map_point(e, &xi);
                    let (_, jac) = cofactor(&a);
                    acc += w * jac * f(&x, uqq);
                }
                acc
            })
            .collect();
        per_elem.iter().sum()
    }
}

/// Per-field L2 errors and their root sum of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Error {
    pub per_field: Vec<f64>,
    pub combined: f64,
}

/// L2 error against `exact` with an `(N+2)`-point Gauss rule per direction.
pub fn l2_error<const D: usize, F>(mesh: &Mesh<D>, ops: &TensorOperators, u: &[Conserved<D>], exact: F) -> Result<L2Error>
where
    F: Fn(&[f64; D]) -> Conserved<D> + Sync,
{
    let quad = ElementQuadrature::new(ops, ops.degree() + 2)?;
    let per_field: Vec<f64> = (0..D + 2)
        .map(|c| {
            quad.integrate(mesh, u, |x, uq| {
                let d = uq.component(c) - exact(x).component(c);
                d * d
            })
            .sqrt()
        })
        .collect();
    let combined = per_field.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(L2Error { per_field, combined })
}

/// `(1/|Omega|) int rho |u|^2 dx` with an `(N+1)`-point Gauss rule per direction.
pub fn kinetic_energy<const D: usize>(mesh: &Mesh<D>, ops: &TensorOperators, u: &[Conserved<D>]) -> Result<f64> {
    let quad = ElementQuadrature::new(ops, ops.degree() + 1)?;
    let volume = quad.integrate(mesh, u, |_, _| 1.0);
    let ke = quad.integrate(mesh, u, |_, uq| uq.mom.iter().map(|m| m * m).sum::<f64>() / uq.rho);
    Ok(ke / volume)
}

/// `-d kappa/dt` by centered differences; the result has two fewer entries.
pub fn dissipation_rate(times: &[f64], kappa: &[f64]) -> Vec<f64> {
    (1..kappa.len().saturating_sub(1))
        .map(|i| -(kappa[i + 1] - kappa[i - 1]) / (times[i + 1] - times[i - 1]))
        .collect()
}

/// Discretization family of the operation-count model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostScheme {
    Gll,
    Gauss,
    Staggered,
}

impl CostScheme {
    pub const ALL: [CostScheme; 3] = [CostScheme::Gll, CostScheme::Staggered, CostScheme::Gauss];

    pub fn name(self) -> &'static str {
        match self {
            CostScheme::Gll => "GLL",
            CostScheme::Gauss => "Gauss",
            CostScheme::Staggered => "Staggered",
        }
    }
}

/// Two-point flux evaluations and matrix operations per element in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cost {
    pub flux_evals: u64,
    pub matrix_ops: u64,
}

pub fn cost_model(degree: usize, scheme: CostScheme) -> Cost {
    let n1 = degree as u64 + 1;
    let n2 = n1 + 1;
    match scheme {
        CostScheme::Gll => Cost { flux_evals: 3 * n1.pow(4), matrix_ops: 3 * n1.pow(4) },
        CostScheme::Gauss => {
            let c = 3 * n1.pow(4) + 12 * n1.pow(3);
            Cost { flux_evals: c, matrix_ops: c }
        }
        CostScheme::Staggered => Cost {
            flux_evals: 3 * n2.pow(4),
            matrix_ops: 3 * n2.pow(4) + 6 * n2 * n1.pow(3),
        },
    }
}

/// L2 errors on `[-1, 1]` of the GSBP derivative `D g` and the decoupled derivative of a
/// function `g`, as polynomials interpolating the nodal values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeErrors {
    pub degree: usize,
    pub gsbp: f64,
    pub decoupled: f64,
}

/// Derivative errors for `g(x) = exp(-4 x^2)` on Gauss nodes, measured with an
/// `(N+5)`-point Gauss rule.
pub fn derivative_demo(degree: usize) -> Result<DerivativeErrors> {
    let g = |x: f64| (-4.0 * x * x).exp();
    let dg = |x: f64| -8.0 * x * (-4.0 * x * x).exp();
    derivative_errors(degree, NodeFamily::Gauss, degree + 5, g, dg)
}

pub fn derivative_errors<G, DG>(degree: usize, family: NodeFamily, nq: usize, g: G, dg: DG) -> Result<DerivativeErrors>
where
    G: Fn(f64) -> f64,
    DG: Fn(f64) -> f64,
{
    let op = Operator1D::new(degree, family)?;
    let gs = op.sample_with_endpoints(&g);
    let np = op.num_nodes();
    let gsbp: Vec<f64> = (0..np).map(|i| (0..np).map(|j| op.d[(i, j)] * gs[j]).sum()).collect();
    let decoupled = op.decoupled_derivative(&vec![1.0; np + 2], &gs)?;
    let (xq, wq) = build_nodes(nq - 1, NodeFamily::Gauss)?;
    let err = |vals: &[f64]| {
        xq.iter()
            .zip(&wq)
            .map(|(x, w)| {
                let l = op.basis_at(*x);
                let p: f64 = l.iter().zip(vals).map(|(a, b)| a * b).sum();
                w * (p - dg(*x)).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    };
    Ok(DerivativeErrors { degree, gsbp: err(&gsbp), decoupled: err(&decoupled) })
}

/// Worst two-point flux identity residuals over a set of random state pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSuiteReport {
    pub dim: usize,
    pub pairs: usize,
    pub symmetry: f64,
    pub consistency: f64,
    pub shuffle: f64,
}

/// Admissible state with `rho, p` in `[0.1, 3)` and velocity components in `[-2, 2)`,
/// drawn from a source of uniform samples in `[0, 1)`.
pub fn sample_state<const D: usize, U: FnMut() -> f64>(gas: &Gas, uniform: &mut U) -> Conserved<D> {
    let rho = 0.1 + 2.9 * uniform();
    let mut vel = [0.0; D];
    for v in vel.iter_mut() {
        *v = -2.0 + 4.0 * uniform();
    }
    let p = 0.1 + 2.9 * uniform();
    gas.conserved(&Primitive { rho, vel, p })
}

/// Checks symmetry, consistency and the shuffle condition of the entropy conservative
/// flux for `pairs` random pairs in every direction.
pub fn flux_property_suite<const D: usize, U: FnMut() -> f64>(gas: &Gas, pairs: usize, mut uniform: U) -> Result<FluxSuiteReport> {
    let mut rep = FluxSuiteReport { dim: D, pairs, symmetry: 0.0, consistency: 0.0, shuffle: 0.0 };
    for _ in 0..pairs {
        let ul: Conserved<D> = sample_state(gas, &mut uniform);
        let ur: Conserved<D> = sample_state(gas, &mut uniform);
        for dir in 0..D {
            let r = gas.flux_residuals(&ul, &ur, dir)?;
            rep.symmetry = rep.symmetry.max(r.symmetry);
            rep.consistency = rep.consistency.max(r.consistency);
            rep.shuffle = rep.shuffle.max(r.shuffle);
        }
    }
    Ok(rep)
}

/// Total entropy and conserved totals from nodal quadrature.
pub fn entropy_and_totals<const D: usize>(
    gas: &Gas,
    ops: &TensorOperators,
    jac: &[f64],
    u: &[Conserved<D>],
) -> Result<(f64, Conserved<D>)> {
    let nv = ops.num_vol;
    let mut s = 0.0;
    let mut totals = Conserved::zero();
    for (k, uk) in u.iter().enumerate() {
        let w = ops.vol_weights[k % nv] * jac[k];
        s += w * gas.entropy(uk)?;
        totals.axpy(w, uk);
    }
    Ok((s, totals))
}
