//! One-dimensional nodes, weights and (generalized) summation-by-parts operators.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{EsdgError, Result};

/// Quadrature node family used for collocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeFamily {
    Gauss,
    Gll,
}

impl NodeFamily {
    pub fn name(self) -> &'static str {
        match self {
            NodeFamily::Gauss => "gauss",
            NodeFamily::Gll => "gll",
        }
    }

    /// Smallest admissible degree for this family.
    pub fn min_degree(self) -> usize {
        match self {
            NodeFamily::Gauss => 0,
            NodeFamily::Gll => 1,
        }
    }
}

impl fmt::Display for NodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

fn newton<F: Fn(f64) -> (f64, f64)>(mut x: f64, f: F) -> f64 {
    for _ in 0..NEWTON_MAX_ITER {
        let (val, der) = f(x);
        let dx = val / der;
        x -= dx;
        if dx.abs() <= NEWTON_TOL {
            break;
        }
    }
    x
}

/// Enforce exact mirror symmetry of a symmetric rule.
fn symmetrize(x: &mut [f64], w: &mut [f64]) {
    let n = x.len();
    for k in 0..n / 2 {
        let a = 0.5 * (x[n - 1 - k] - x[k]);
        x[k] = -a;
        x[n - 1 - k] = a;
        let wk = 0.5 * (w[k] + w[n - 1 - k]);
        w[k] = wk;
        w[n - 1 - k] = wk;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
}

/// Nodes (strictly increasing) and weights of the (N+1)-point rule of the given family.
pub fn build_nodes(degree: usize, family: NodeFamily) -> Result<(Vec<f64>, Vec<f64>)> {
    if degree < family.min_degree() {
        return Err(EsdgError::Config(format!(
            "degree {degree} is not valid for {family} nodes"
        )));
    }
    let np = degree + 1;
    let mut x = vec![0.0; np];
    let mut w = vec![0.0; np];
    match family {
        NodeFamily::Gauss => {
            for k in 0..np {
                let guess = -(PI * (4.0 * k as f64 + 3.0) / (4.0 * np as f64 + 2.0)).cos();
                let root = newton(guess, |t| legendre(np, t));
                let (_, dp) = legendre(np, root);
                x[k] = root;
                w[k] = 2.0 / ((1.0 - root * root) * dp * dp);
            }
        }
        NodeFamily::Gll => {
            let n = degree;
            let nn = (n * (n + 1)) as f64;
            x[0] = -1.0;
            x[n] = 1.0;
            for k in 1..n {
                let guess = -(PI * k as f64 / n as f64).cos();
                // roots of P_N' via the Legendre ODE for P_N''
                x[k] = newton(guess, |t| {
                    let (p, dp) = legendre(n, t);
                    let ddp = (2.0 * t * dp - nn * p) / (1.0 - t * t);
                    (dp, ddp)
                });
            }
            for k in 0..np {
                let (p, _) = legendre(n, x[k]);
                w[k] = 2.0 / (nn * p * p);
            }
        }
    }
    symmetrize(&mut x, &mut w);
    Ok((x, w))
}

/// Barycentric weights `1 / prod_{m != j} (x_j - x_m)`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .map(|(_, &xm)| xj - xm)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Values of all Lagrange basis polynomials at `x`.
pub fn lagrange_values(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(i) = nodes.iter().position(|&xi| xi == x) {
        let mut out = vec![0.0; nodes.len()];
        out[i] = 1.0;
        return out;
    }
    let terms: Vec<f64> = nodes
        .iter()
        .zip(bary)
        .map(|(&xj, &lj)| lj / (x - xj))
        .collect();
    let denom: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / denom).collect()
}

/// Nodal differentiation matrix `D_ij = l_j'(x_i)`.
pub fn differentiation_matrix(nodes: &[f64], bary: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Matrix evaluating the nodal interpolant at `points`.
pub fn interpolation_matrix(nodes: &[f64], bary: &[f64], points: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(points.len(), nodes.len());
    for (r, &p) in points.iter().enumerate() {
        for (c, v) in lagrange_values(nodes, bary, p).into_iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    m
}

/// All one-dimensional operators for one family and degree.
#[derive(Debug, Clone)]
pub struct Operator1D {
    pub degree: usize,
    pub family: NodeFamily,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub bary: Vec<f64>,
    /// Nodal differentiation matrix.
    pub d: DMatrix<f64>,
    /// Endpoint interpolation, rows `t_L^T`, `t_R^T`.
    pub vf: DMatrix<f64>,
    /// `Q = W D`.
    pub q: DMatrix<f64>,
    /// `S = Q - 1/2 Vf^T B Vf`, skew-symmetric.
    pub s: DMatrix<f64>,
    /// Decoupled SBP operator acting on (volume, left, right) values.
    pub qn: DMatrix<f64>,
}

impl Operator1D {
    pub fn new(degree: usize, family: NodeFamily) -> Result<Self> {
        let (nodes, weights) = build_nodes(degree, family)?;
        let bary = barycentric_weights(&nodes);
        let np = degree + 1;
        let d = differentiation_matrix(&nodes, &bary);
        let vf = interpolation_matrix(&nodes, &bary, &[-1.0, 1.0]);
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(&weights));
        let q = &w * &d;
        let b = Self::boundary_matrix();
        let vtbv = vf.transpose() * &b * &vf;
        let s = &q - &vtbv * 0.5;

        let mut qn = DMatrix::zeros(np + 2, np + 2);
        qn.view_mut((0, 0), (np, np)).copy_from(&s);
        let bvf = &b * &vf;
        qn.view_mut((0, np), (np, 2))
            .copy_from(&(bvf.transpose() * 0.5));
        qn.view_mut((np, 0), (2, np)).copy_from(&(&bvf * -0.5));
        qn.view_mut((np, np), (2, 2)).copy_from(&(&b * 0.5));

        Ok(Self { degree, family, nodes, weights, bary, d, vf, q, s, qn })
    }

    pub fn num_nodes(&self) -> usize {
        self.degree + 1
    }

    /// `B = diag(-1, +1)`.
    pub fn boundary_matrix() -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&[-1.0, 1.0]))
    }

    /// True when each row of `Vf` has a single unit entry (endpoints are nodes).
    pub fn vf_is_selection(&self) -> bool {
        self.vf
            .row_iter()
            .all(|row| row.iter().filter(|&&v| v == 1.0).count() == 1 && row.iter().all(|&v| v == 0.0 || v == 1.0))
    }

    /// Values of the basis at `x`.
    pub fn basis_at(&self, x: f64) -> Vec<f64> {
        lagrange_values(&self.nodes, &self.bary, x)
    }

    /// Derivatives of the basis at `x` (exact since `l_j'` lies in the span of the basis).
    pub fn basis_deriv_at(&self, x: f64) -> Vec<f64> {
        let l = self.basis_at(x);
        let np = self.num_nodes();
        (0..np)
            .map(|j| (0..np).map(|k| l[k] * self.d[(k, j)]).sum())
            .collect()
    }

    /// Approximates `f dg/dx` at the nodes from volume + endpoint samples:
    /// solves `W u = [I; Vf]^T diag(f) QN g`.
    pub fn decoupled_derivative(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        let np = self.num_nodes();
        for len in [f.len(), g.len()] {
            if len != np + 2 {
                return Err(EsdgError::Dimension { expected: np + 2, got: len });
            }
        }
        let qg = &self.qn * DVector::from_column_slice(g);
        let fq: Vec<f64> = f.iter().zip(qg.iter()).map(|(a, b)| a * b).collect();
        let mut u: Vec<f64> = fq[..np].to_vec();
        for (i, ui) in u.iter_mut().enumerate() {
            *ui += self.vf[(0, i)] * fq[np] + self.vf[(1, i)] * fq[np + 1];
            *ui /= self.weights[i];
        }
        Ok(u)
    }

    /// Samples of `func` ordered as (volume nodes, -1, +1).
    pub fn sample_with_endpoints<F: Fn(f64) -> f64>(&self, func: F) -> Vec<f64> {
        self.nodes
            .iter()
            .copied()
            .chain([-1.0, 1.0])
            .map(func)
            .collect()
    }
}

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Residuals of the algebraic identities of a 1D operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorResiduals {
    /// `Q + Q^T - Vf^T B Vf`.
    pub gsbp: f64,
    /// `S + S^T`.
    pub skew: f64,
    /// `QN + QN^T - blockdiag(0, B)`.
    pub decoupled: f64,
    /// `Q 1`.
    pub row_sum: f64,
    /// `Vf 1 - 1`.
    pub interp: f64,
}

impl OperatorResiduals {
    pub fn max(&self) -> f64 {
        [self.gsbp, self.skew, self.decoupled, self.row_sum, self.interp]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn operator_residuals(op: &Operator1D) -> OperatorResiduals {
    let np = op.num_nodes();
    let b = Operator1D::boundary_matrix();
    let gsbp = max_abs(&(&op.q + op.q.transpose() - op.vf.transpose() * &b * &op.vf));
    let skew = max_abs(&(&op.s + op.s.transpose()));
    let mut target = DMatrix::zeros(np + 2, np + 2);
    target.view_mut((np, np), (2, 2)).copy_from(&b);
    let decoupled = max_abs(&(&op.qn + op.qn.transpose() - target));
    let ones = DVector::from_element(np, 1.0);
    let row_sum = (&op.q * &ones).amax();
    let interp = (&op.vf * &ones).add_scalar(-1.0).amax();
    OperatorResiduals { gsbp, skew, decoupled, row_sum, interp }
}
