//! Semi-discrete right-hand side: entropy projection, line-wise flux differencing with
//! decoupled SBP operators on curved elements, interface coupling and boundary conditions.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{EsdgError, Result};
use crate::euler::{Conserved, EntropyVars, FluxState, Gas};
use crate::geometry::Geometry;
use crate::mesh::BoundaryKind;
use crate::operators_nd::TensorOperators;

/// Interface dissipation added to the entropy conservative flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dissipation {
    None,
    LaxFriedrichs,
    /// Matrix dissipation in entropy variables (two dimensions only).
    Matrix,
}

/// Exterior state on `Prescribed` boundaries as a function of position and time.
pub type BoundaryState<const D: usize> = Arc<dyn Fn(&[f64; D], f64) -> Conserved<D> + Send + Sync>;

/// Quantities gathered during one right-hand-side evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RhsStats {
    /// Logical two-point flux evaluations in volume and face-correction terms, with
    /// symmetric pairs counted twice (interface fluxes are not included).
    pub flux_calls: u64,
    /// `sum over boundary face nodes of w_f (v_f^T f*_n - psi_n)`.
    pub boundary_entropy_flux: f64,
    /// Largest `(psi_n - v_f^T f*_n) / J_f` over wall face nodes (`-inf` without walls).
    pub max_wall_entropy_production: f64,
}

impl RhsStats {
    fn merge(&mut self, other: &RhsStats) {
        self.flux_calls += other.flux_calls;
        self.boundary_entropy_flux += other.boundary_entropy_flux;
        self.max_wall_entropy_production = self.max_wall_entropy_production.max(other.max_wall_entropy_production);
    }

    fn empty() -> Self {
        Self { max_wall_entropy_production: f64::NEG_INFINITY, ..Default::default() }
    }
}

/// Decoupled SBP discretization of the Euler equations on one mesh.
pub struct Solver<const D: usize> {
    pub ops: TensorOperators,
    pub geo: Geometry<D>,
    pub gas: Gas,
    pub dissipation: Dissipation,
    pub prescribed: Option<BoundaryState<D>>,
    /// Perpendicular quadrature weight of each volume node for each line direction.
    line_weight: Vec<[f64; D]>,
    vol_states: Vec<FluxState<D>>,
    face_u: Vec<Conserved<D>>,
    face_v: Vec<EntropyVars<D>>,
    face_states: Vec<FluxState<D>>,
}

impl<const D: usize> Solver<D> {
    pub fn new(ops: TensorOperators, geo: Geometry<D>, gas: Gas, dissipation: Dissipation) -> Result<Self> {
        if ops.dim != D {
            return Err(EsdgError::Dimension { expected: D, got: ops.dim });
        }
        if dissipation == Dissipation::Matrix && D != 2 {
            return Err(EsdgError::Unsupported(format!(
                "matrix dissipation is defined in two dimensions, not {D}"
            )));
        }
        let line_weight = (0..ops.num_vol)
            .map(|n| {
                let idx = ops.vol_multi_index(n);
                std::array::from_fn(|j| ops.vol_weights[n] / ops.op1d.weights[idx[j]])
            })
            .collect();
        let nvol = geo.num_elems * ops.num_vol;
        let nface = geo.num_elems * ops.num_face_total();
        let dummy = FluxState { rho: 1.0, vel: [0.0; D], p: 1.0, beta: 0.5, log_rho: 0.0, log_beta: 0.5f64.ln(), vel_sq: 0.0 };
        Ok(Self {
            line_weight,
            vol_states: vec![dummy; nvol],
            face_u: vec![Conserved::zero(); nface],
            face_v: vec![EntropyVars::zero(); nface],
            face_states: vec![dummy; nface],
            ops,
            geo,
            gas,
            dissipation,
            prescribed: None,
        })
    }

    pub fn with_prescribed(mut self, state: BoundaryState<D>) -> Self {
        self.prescribed = Some(state);
        self
    }

    pub fn num_elems(&self) -> usize {
        self.geo.num_elems
    }

    /// Total number of volume nodes.
    pub fn num_nodes(&self) -> usize {
        self.geo.num_elems * self.ops.num_vol
    }

    /// Samples a function at all volume nodes.
    pub fn project<F: Fn(&[f64; D]) -> Conserved<D> + Sync>(&self, f: F) -> Vec<Conserved<D>> {
        self.geo.x_vol.par_iter().map(&f).collect()
    }

    /// Entropy-projected face states `u(Vf v(u))`, entropy variables `Vf v(u)` at all face
    /// nodes.
    pub fn entropy_project_faces(&mut self, u: &[Conserved<D>]) -> Result<(&[Conserved<D>], &[EntropyVars<D>])> {
        self.prepare(u)?;
        Ok((&self.face_u, &self.face_v))
    }

    fn prepare(&mut self, u: &[Conserved<D>]) -> Result<()> {
        let nv = self.ops.num_vol;
        let nft = self.ops.num_face_total();
        if u.len() != self.num_nodes() {
            return Err(EsdgError::Dimension { expected: self.num_nodes(), got: u.len() });
        }
        let ops = &self.ops;
        let gas = self.gas;
        self.vol_states
            .par_chunks_mut(nv)
            .zip(self.face_u.par_chunks_mut(nft))
            .zip(self.face_v.par_chunks_mut(nft))
            .zip(self.face_states.par_chunks_mut(nft))
            .enumerate()
            .try_for_each(|(e, (((vs, fu), fv), fs))| -> Result<()> {
                let ue = &u[e * nv..(e + 1) * nv];
                let mut v = Vec::with_capacity(nv);
                for (n, un) in ue.iter().enumerate() {
                    vs[n] = gas.flux_state(un)?;
                    v.push(gas.entropy_vars_from_state(&vs[n]));
                }
                for f in 0..ops.num_faces() {
                    let side = f % 2;
                    for q in 0..ops.num_face_nodes {
                        let g = f * ops.num_face_nodes + q;
                        let (base, stride) = ops.face_line(f, q);
                        if let Some(sel) = ops.vf_select {
                            let m = base + sel[side] * stride;
                            fu[g] = ue[m];
                            fv[g] = v[m];
                            fs[g] = vs[m];
                        } else {
                            let mut vf = EntropyVars::zero();
                            for (a, t) in ops.vf1[side].iter().enumerate() {
                                vf.axpy(*t, &v[base + a * stride]);
                            }
                            let (uf, sf) = gas
                                .states_from_entropy(&vf)
                                .map_err(|_| EsdgError::FaceState { element: e, face: f, node: q })?;
                            fu[g] = uf;
                            fv[g] = vf;
                            fs[g] = sf;
                        }
                    }
                }
                Ok(())
            })
    }

    /// Evaluates `du/dt` at time `t`.
    pub fn rhs(&mut self, t: f64, u: &[Conserved<D>], dudt: &mut [Conserved<D>]) -> Result<RhsStats> {
        self.prepare(u)?;
        let nv = self.ops.num_vol;
        let this = &*self;
        let stats: Vec<RhsStats> = dudt
            .par_chunks_mut(nv)
            .enumerate()
            .map(|(e, out)| this.element_rhs(e, t, out))
            .collect::<Result<_>>()?;
        let mut total = RhsStats::empty();
        for s in &stats {
            total.merge(s);
        }
        Ok(total)
    }

    /// Exterior state, its flux data and entropy variables at global face node `g`.
    fn exterior(
        &self,
        g: usize,
        kind: Option<BoundaryKind>,
        n_unit: &[f64; D],
        t: f64,
    ) -> Result<(Conserved<D>, FluxState<D>, EntropyVars<D>)> {
        if let Some(ext) = self.geo.exterior[g] {
            return Ok((self.face_u[ext], self.face_states[ext], self.face_v[ext]));
        }
        let gas = &self.gas;
        let up = match kind {
            Some(BoundaryKind::Wall) => gas.wall_mirror_state(&self.face_u[g], n_unit),
            Some(BoundaryKind::Prescribed) => {
                let bc = self.prescribed.as_ref().ok_or_else(|| {
                    EsdgError::Config("prescribed boundary without a boundary state".into())
                })?;
                bc(&self.geo.x_face[g], t)
            }
            _ => return Err(EsdgError::Config("unresolved periodic face".into())),
        };
        Ok((up, gas.flux_state(&up)?, gas.entropy_vars(&up)?))
    }

    fn element_rhs(&self, e: usize, t: f64, out: &mut [Conserved<D>]) -> Result<RhsStats> {
        let ops = &self.ops;
        let geo = &self.geo;
        let gas = &self.gas;
        let nv = ops.num_vol;
        let n1 = ops.n1;
        let nf = ops.num_face_nodes;
        let nft = ops.num_face_total();
        let v0 = e * nv;
        let f0 = e * nft;
        let st = &self.vol_states[v0..v0 + nv];
        let gv = &geo.g_vol[v0..v0 + nv];
        let mut stats = RhsStats::empty();
        let mut r = vec![Conserved::<D>::zero(); nv];
        let mut corr = vec![Conserved::<D>::zero(); n1];

        // volume: skew-symmetric line sweeps, one flux per unordered pair
        for j in 0..D {
            let stride = ops.stride(j);
            for base in (0..nv).filter(|n| (n / stride).is_multiple_of(n1)) {
                let wp = self.line_weight[base][j];
                for a in 0..n1 {
                    let ma = base + a * stride;
                    for b in a + 1..n1 {
                        let mb = base + b * stride;
                        let navg: [f64; D] = std::array::from_fn(|i| 0.5 * (gv[ma][i][j] + gv[mb][i][j]));
                        let fs = gas.ec_flux_n(&st[ma], &st[mb], &navg);
                        let coef = 2.0 * ops.s1[a * n1 + b] * wp;
                        r[ma].axpy(coef, &fs);
                        r[mb].axpy(-coef, &fs);
                    }
                }
            }
            stats.flux_calls += (nv / n1 * n1 * n1) as u64;
        }

        for f in 0..ops.num_faces() {
            let (j, sign) = ops.face_dir(f);
            let side = f % 2;
            let kind = geo.face_boundary[e * 2 * D + f];
            let t_side = &ops.vf1[side];
            for q in 0..nf {
                let gl = f * nf + q;
                let g = f0 + gl;
                let wf = ops.face_weights[q];
                let njf = geo.njf[g];
                let jf = geo.jf[g];
                let n_unit: [f64; D] = std::array::from_fn(|i| njf[i] / jf);
                let (up, sp, vp) = self.exterior(g, kind, &n_unit, t)?;
                let su = &self.face_states[g];
                let mut fstar = gas.ec_flux_n(su, &sp, &njf);
                match self.dissipation {
                    Dissipation::None => {}
                    Dissipation::LaxFriedrichs => {
                        let pen = gas.lax_friedrichs_penalty(&self.face_u[g], &up, su, &sp, &n_unit);
                        fstar.axpy(-jf, &pen);
                    }
                    Dissipation::Matrix => {
                        let jump = vp - self.face_v[g];
                        let pen = gas.matrix_penalty(su, &sp, &jump, &n_unit)?;
                        fstar.axpy(-jf, &pen);
                    }
                }
                if kind.is_some() {
                    let vf = &self.face_v[g];
                    let uf = &self.face_u[g];
                    let psi: f64 = (0..D).map(|i| uf.mom[i] * njf[i]).sum();
                    let prod = vf.dot(&fstar);
                    stats.boundary_entropy_flux += wf * (prod - psi);
                    if kind == Some(BoundaryKind::Wall) {
                        stats.max_wall_entropy_production =
                            stats.max_wall_entropy_production.max((psi - prod) / jf);
                    }
                }

                let (base, stride) = ops.face_line(f, q);
                if let Some(sel) = ops.vf_select {
                    r[base + sel[side] * stride].axpy(wf, &fstar);
                    continue;
                }
                // face row of the decoupled operator, then lifted back with Vf^T
                let gf = &geo.g_face[g];
                let mut face_row = fstar * wf;
                        for a in 0..n1 {
                    let m = base + a * stride;
                    let navg: [f64; D] = std::array::from_fn(|i| 0.5 * (gv[m][i][j] + gf[i][j]));
                    let fs = gas.ec_flux_n(&st[m], su, &navg);
                    let c = sign * wf * t_side[a];
                    face_row.axpy(-c, &fs);
                    corr[a] = fs * c;
                }
                for a in 0..n1 {
                    let m = base + a * stride;
                    r[m] += corr[a];
                    r[m].axpy(t_side[a], &face_row);
                }
                stats.flux_calls += 2 * n1 as u64;
            }
        }

        for n in 0..nv {
            let scale = -1.0 / (ops.vol_weights[n] * geo.jac[v0 + n]);
            out[n] = r[n] * scale;
        }
        Ok(stats)
    }

    /// `sum_k 1^T W_k u` for each conserved component.
    pub fn conserved_totals(&self, u: &[Conserved<D>]) -> Conserved<D> {
        let nv = self.ops.num_vol;
        let mut total = Conserved::zero();
        for (k, uk) in u.iter().enumerate() {
            total.axpy(self.ops.vol_weights[k % nv] * self.geo.jac[k], uk);
        }
        total
    }

    /// `sum_k 1^T W_k S(u)`.
    pub fn entropy_total(&self, u: &[Conserved<D>]) -> Result<f64> {
        let nv = self.ops.num_vol;
        let mut total = 0.0;
        for (k, uk) in u.iter().enumerate() {
            total += self.ops.vol_weights[k % nv] * self.geo.jac[k] * self.gas.entropy(uk)?;
        }
        Ok(total)
    }

    /// `sum_k v^T W_k du/dt` plus the boundary entropy flux: zero for the entropy
    /// conservative scheme, nonpositive with interface dissipation.
    pub fn entropy_residual(&mut self, t: f64, u: &[Conserved<D>]) -> Result<f64> {
        let mut dudt = vec![Conserved::zero(); u.len()];
        let stats = self.rhs(t, u, &mut dudt)?;
        let nv = self.ops.num_vol;
        let mut total = stats.boundary_entropy_flux;
        for (k, (uk, dk)) in u.iter().zip(&dudt).enumerate() {
            let w = self.ops.vol_weights[k % nv] * self.geo.jac[k];
            total += w * self.gas.entropy_vars(uk)?.dot(dk);
        }
        Ok(total)
    }

    /// Largest `|u| + c` over all volume nodes.
    pub fn max_wave_speed(&self, u: &[Conserved<D>]) -> Result<f64> {
        u.par_iter()
            .map(|uk| self.gas.max_wave_speed(uk))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    }
}

/// Reference one-dimensional scheme with dense GSBP interface couplings:
/// `W_h du/dt + 2 (Q_h o F_S) 1 = 0` without entropy projection. Non-periodic ends carry
/// the `1/2 B_h` blocks and no boundary flux.
pub fn rhs_dense_gsbp_1d(
    ops: &TensorOperators,
    geo: &Geometry<1>,
    gas: &Gas,
    u: &[Conserved<1>],
    dudt: &mut [Conserved<1>],
) -> Result<()> {
    let (qh, states) = dense_setup(ops, geo, gas, u)?;
    let n = u.len();
    for i in 0..n {
        let mut acc = Conserved::zero();
        for &(j, q) in &qh[i] {
            acc.axpy(2.0 * q, &gas.ec_flux_n(&states[i], &states[j], &[1.0]));
        }
        dudt[i] = acc * (-1.0 / (ops.vol_weights[i % ops.num_vol] * geo.jac[i]));
    }
    Ok(())
}

/// Sparse rows of the global `Q_h` (periodic couplings wrap) and the node flux data.
type SparseRows = Vec<Vec<(usize, f64)>>;

fn dense_setup(
    ops: &TensorOperators,
    geo: &Geometry<1>,
    gas: &Gas,
    u: &[Conserved<1>],
) -> Result<(SparseRows, Vec<FluxState<1>>)> {
    if ops.dim != 1 {
        return Err(EsdgError::Unsupported("dense GSBP coupling is one-dimensional".into()));
    }
    let np = ops.num_vol;
    let k = geo.num_elems;
    let (tl, tr) = (&ops.vf1[0], &ops.vf1[1]);
    let mut rows: SparseRows = vec![Vec::new(); k * np];
    for e in 0..k {
        for i in 0..np {
            let row = &mut rows[e * np + i];
            for j in 0..np {
                row.push((e * np + j, ops.s1[i * np + j]));
            }
            // right neighbor: 1/2 t_R t_L^T, left neighbor: -1/2 t_L t_R^T
            for (face, t_own, t_nb, s) in [(1, tr, tl, 0.5), (0, tl, tr, -0.5)] {
                let g = e * 2 + face;
                match geo.exterior[g] {
                    Some(ext) => {
                        let nb = ext / 2;
                        for j in 0..np {
                            row.push((nb * np + j, s * t_own[i] * t_nb[j]));
                        }
                    }
                    None => {
                        for j in 0..np {
                            row.push((e * np + j, s * t_own[i] * t_own[j]));
                        }
                    }
                }
            }
        }
    }
    let states = u.iter().map(|x| gas.flux_state(x)).collect::<Result<_>>()?;
    Ok((rows, states))
}

/// `v^T W_h du/dt + v^T (B_h o F_S) 1 - 1^T B_h psi` for the dense scheme.
pub fn dense_gsbp_entropy_residual(
    ops: &TensorOperators,
    geo: &Geometry<1>,
    gas: &Gas,
    u: &[Conserved<1>],
) -> Result<f64> {
    let mut dudt = vec![Conserved::zero(); u.len()];
    rhs_dense_gsbp_1d(ops, geo, gas, u, &mut dudt)?;
    let np = ops.num_vol;
    let states: Vec<FluxState<1>> = u.iter().map(|x| gas.flux_state(x)).collect::<Result<_>>()?;
    let v: Vec<EntropyVars<1>> = u.iter().map(|x| gas.entropy_vars(x)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for i in 0..u.len() {
        total += ops.vol_weights[i % np] * geo.jac[i] * v[i].dot(&dudt[i]);
    }
    for e in 0..geo.num_elems {
        for (face, sgn) in [(0usize, -1.0), (1, 1.0)] {
            if geo.exterior[e * 2 + face].is_some() {
                continue;
            }
            let t = &ops.vf1[face];
            for i in 0..np {
                for j in 0..np {
                    let b = sgn * t[i] * t[j];
                    let (gi, gj) = (e * np + i, e * np + j);
                    total += b * v[gi].dot(&gas.ec_flux_n(&states[gi], &states[gj], &[1.0]));
                    total -= b * u[gj].mom[0];
                }
            }
        }
    }
    Ok(total)
}
