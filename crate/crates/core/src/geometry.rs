//! Metric terms, Jacobians and scaled normals at volume and face collocation points.

use rayon::prelude::*;

use crate::error::{EsdgError, Result};
use crate::mesh::{BoundaryKind, FaceLink, LatticeBasis, Mesh};
use crate::operators_nd::TensorOperators;

/// How metric terms are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMethod {
    /// Cofactors of the mapping derivatives.
    Direct,
    /// Reference curl of interpolated auxiliary products (three dimensions only).
    Curl,
    /// `Curl` in three dimensions, `Direct` otherwise.
    Auto,
}

/// Geometric data of all elements, flattened element by element.
#[derive(Debug, Clone)]
pub struct Geometry<const D: usize> {
    pub num_elems: usize,
    /// Volume nodes per element.
    pub nv: usize,
    /// Face nodes per face.
    pub nf: usize,
    pub x_vol: Vec<[f64; D]>,
    pub jac: Vec<f64>,
    /// `g[i][j] = G_ij = J d xi_j / d x_i` at volume nodes.
    pub g_vol: Vec<[[f64; D]; D]>,
    pub x_face: Vec<[f64; D]>,
    pub g_face: Vec<[[f64; D]; D]>,
    /// Scaled outward normals `n_i J_f`.
    pub njf: Vec<[f64; D]>,
    /// Face Jacobian `|n J_f|`.
    pub jf: Vec<f64>,
    /// For each face node, the matching node of the neighbor (global face index), or
    /// `None` on a domain boundary.
    pub exterior: Vec<Option<usize>>,
    /// Boundary kind of each face (`None` for interior faces).
    pub face_boundary: Vec<Option<BoundaryKind>>,
}

pub(crate) fn cofactor<const D: usize>(a: &[[f64; D]; D]) -> ([[f64; D]; D], f64) {
    let mut g = [[0.0; D]; D];
    match D {
        1 => {
            g[0][0] = 1.0;
            (g, a[0][0])
        }
        2 => {
            g[0][0] = a[1][1];
            g[0][1] = -a[1][0];
            g[1][0] = -a[0][1];
            g[1][1] = a[0][0];
            (g, a[0][0] * a[1][1] - a[0][1] * a[1][0])
        }
        _ => {
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                    let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                    g[i][j] = a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1];
                }
            }
            let det = (0..3).map(|j| a[0][j] * g[0][j]).sum();
            (g, det)
        }
    }
}

/// Auxiliary vector fields on the GLL lattice whose reference curls give the metric rows.
struct CurlData<const D: usize> {
    basis: LatticeBasis,
    /// `aux[row][m][j]`, lattice node `m`, component `j`.
    aux: [Vec<[f64; 3]>; 3],
}

impl<const D: usize> CurlData<D> {
    fn new(mesh: &Mesh<D>, e: usize, degree: usize) -> Result<Self> {
        let basis = LatticeBasis::new(degree.max(1))?;
        let n = basis.len();
        let total = n * n * n;
        let mut aux = [vec![[0.0; 3]; total], vec![[0.0; 3]; total], vec![[0.0; 3]; total]];
        // the curl of c grad(y) vanishes for constant c, so coordinates are taken relative to
        // the element's first lattice node to keep the auxiliary products small
        let origin = mesh.elem_coords(e)[0];
        for m in 0..total {
            let xi: [f64; D] = std::array::from_fn(|k| basis.nodes[(m / n.pow(k as u32)) % n]);
            let (mut x, a) = mesh.map_point(e, &xi);
            for k in 0..D {
                x[k] -= origin[k];
            }
            for j in 0..3 {
                // rows: -(z grad y), (z grad x), (x grad y); the sign of row 0 is applied later
                aux[0][m][j] = x[2] * a[1][j];
                aux[1][m][j] = x[2] * a[0][j];
                aux[2][m][j] = x[0] * a[1][j];
            }
        }
        Ok(Self { basis, aux })
    }

    fn metrics(&self, xi: &[f64; D]) -> [[f64; D]; D] {
        let w = self.basis.tensor_weights(xi);
        let mut g = [[0.0; D]; D];
        for row in 0..3 {
            // grad[k][c] = d/dxi_k of component c
            let mut grad = [[0.0; 3]; 3];
            for (m, v) in self.aux[row].iter().enumerate() {
                for k in 0..3 {
                    for c in 0..3 {
                        grad[k][c] += w[1 + k][m] * v[c];
                    }
                }
            }
            let curl = [
                grad[1][2] - grad[2][1],
                grad[2][0] - grad[0][2],
                grad[0][1] - grad[1][0],
            ];
            let sign = if row == 0 { -1.0 } else { 1.0 };
            for j in 0..3 {
                g[row][j] = sign * curl[j];
            }
        }
        g
    }
}

struct ElementData<const D: usize> {
    x_vol: Vec<[f64; D]>,
    jac: Vec<f64>,
    g_vol: Vec<[[f64; D]; D]>,
    x_face: Vec<[f64; D]>,
    g_face: Vec<[[f64; D]; D]>,
}

impl<const D: usize> Geometry<D> {
    pub fn new(mesh: &Mesh<D>, ops: &TensorOperators, method: MetricMethod) -> Result<Self> {
        if ops.dim != D {
            return Err(EsdgError::Dimension { expected: D, got: ops.dim });
        }
        let use_curl = match method {
            MetricMethod::Direct => false,
            MetricMethod::Curl => {
                if D != 3 {
                    return Err(EsdgError::Unsupported("curl metrics require three dimensions".into()));
                }
                true
            }
            MetricMethod::Auto => D == 3,
        };
        let nv = ops.num_vol;
        let nf = ops.num_face_nodes;
        let nft = ops.num_face_total();
        let num_elems = mesh.num_elems();

        let vol_xi: Vec<[f64; D]> = (0..nv).map(|n| take::<D>(ops.vol_point(n))).collect();
        let face_xi: Vec<[f64; D]> = (0..nft).map(|g| take::<D>(ops.face_point(g / nf, g % nf))).collect();
        let vol_w: Vec<Vec<Vec<f64>>> = vol_xi.iter().map(|xi| mesh.basis.tensor_weights(xi)).collect();
        let face_w: Vec<Vec<Vec<f64>>> = face_xi.iter().map(|xi| mesh.basis.tensor_weights(xi)).collect();

        let per_elem: Vec<ElementData<D>> = (0..num_elems)
            .into_par_iter()
            .map(|e| -> Result<ElementData<D>> {
                let curl = if use_curl { Some(CurlData::new(mesh, e, ops.degree())?) } else { None };
                let mut data = ElementData {
                    x_vol: Vec::with_capacity(nv),
                    jac: Vec::with_capacity(nv),
                    g_vol: Vec::with_capacity(nv),
                    x_face: Vec::with_capacity(nft),
                    g_face: Vec::with_capacity(nft),
                };
                for n in 0..nv {
                    let (x, a) = mesh.map_with_weights(e, &vol_w[n]);
                    let (mut g, jac) = cofactor(&a);
                    if !(jac > 0.0) {
                        return Err(EsdgError::Jacobian { element: e, point: n, jac });
                    }
                    if let Some(c) = &curl {
                        g = c.metrics(&vol_xi[n]);
                    }
                    data.x_vol.push(x);
                    data.jac.push(jac);
                    data.g_vol.push(g);
                }
                for q in 0..nft {
                    let (x, a) = mesh.map_with_weights(e, &face_w[q]);
                    let (mut g, _) = cofactor(&a);
                    if let Some(c) = &curl {
                        g = c.metrics(&face_xi[q]);
                    }
                    data.x_face.push(x);
                    data.g_face.push(g);
                }
                Ok(data)
            })
            .collect::<Result<_>>()?;

        let mut geo = Self {
            num_elems,
            nv,
            nf,
            x_vol: Vec::with_capacity(num_elems * nv),
            jac: Vec::with_capacity(num_elems * nv),
            g_vol: Vec::with_capacity(num_elems * nv),
            x_face: Vec::with_capacity(num_elems * nft),
            g_face: Vec::with_capacity(num_elems * nft),
            njf: Vec::with_capacity(num_elems * nft),
            jf: Vec::with_capacity(num_elems * nft),
            exterior: vec![None; num_elems * nft],
            face_boundary: Vec::with_capacity(num_elems * 2 * D),
        };
        for d in per_elem {
            geo.x_vol.extend(d.x_vol);
            geo.jac.extend(d.jac);
            geo.g_vol.extend(d.g_vol);
            geo.x_face.extend(d.x_face);
            geo.g_face.extend(d.g_face);
        }
        for (k, g) in geo.g_face.iter().enumerate() {
            let (dir, sign) = ops.face_dir((k % nft) / nf);
            let n: [f64; D] = std::array::from_fn(|i| sign * g[i][dir]);
            geo.jf.push(n.iter().map(|v| v * v).sum::<f64>().sqrt());
            geo.njf.push(n);
        }
        geo.connect(mesh, ops)?;
        Ok(geo)
    }

    /// Matches face nodes with their neighbors by physical position.
    fn connect(&mut self, mesh: &Mesh<D>, ops: &TensorOperators) -> Result<()> {
        let nf = self.nf;
        let nft = ops.num_face_total();
        let scale = (0..D).map(|k| mesh.hi[k] - mesh.lo[k]).fold(0.0, f64::max);
        let tol = 1e-9 * scale;
        for e in 0..self.num_elems {
            for f in 0..2 * D {
                match *mesh.link(e, f) {
                    FaceLink::Boundary(kind) => self.face_boundary.push(Some(kind)),
                    FaceLink::Interior { elem, face, offset } => {
                        self.face_boundary.push(None);
                        for q in 0..nf {
                            let own = e * nft + f * nf + q;
                            let x = self.x_face[own];
                            let found = (0..nf).map(|p| elem * nft + face * nf + p).find(|&other| {
                                let y = self.x_face[other];
                                (0..D).all(|k| (x[k] - y[k] - offset[k]).abs() <= tol)
                            });
                            match found {
                                Some(other) => self.exterior[own] = Some(other),
                                None => {
                                    return Err(EsdgError::Config(format!(
                                        "face {f} of element {e} does not match its neighbor"
                                    )))
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn face_total(&self) -> usize {
        2 * D * self.nf
    }

    /// Largest coordinate mismatch between matched face nodes.
    pub fn watertight_residual(&self, mesh: &Mesh<D>) -> f64 {
        let nft = self.face_total();
        let mut worst: f64 = 0.0;
        for (own, ext) in self.exterior.iter().enumerate() {
            if let Some(other) = ext {
                let e = own / nft;
                let f = (own % nft) / self.nf;
                if let FaceLink::Interior { offset, .. } = mesh.link(e, f) {
                    for k in 0..D {
                        worst = worst.max((self.x_face[own][k] - self.x_face[*other][k] - offset[k]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest `|nJf + nJf_neighbor|` over interior face nodes.
    pub fn normal_mismatch(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (own, ext) in self.exterior.iter().enumerate() {
            if let Some(other) = ext {
                for k in 0..D {
                    worst = worst.max((self.njf[own][k] + self.njf[*other][k]).abs());
                }
            }
        }
        worst
    }

    /// Mesh scale `1 / (max(1/J) max(J_f))`.
    pub fn length_scale(&self) -> f64 {
        let inv_j = self.jac.iter().fold(0.0_f64, |m, j| m.max(1.0 / j));
        let jf = self.jf.iter().fold(0.0_f64, |m, v| m.max(*v));
        1.0 / (inv_j * jf)
    }
}

fn take<const D: usize>(p: [f64; 3]) -> [f64; D] {
    std::array::from_fn(|k| p[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{warp_2d, warp_3d};
    use crate::operators_1d::NodeFamily;
    use approx::assert_abs_diff_eq;

    const P: BoundaryKind = BoundaryKind::Periodic;

    #[test]
    fn affine_2d_jacobian() {
        let mesh = Mesh::<2>::cartesian([0.0, -5.0], [20.0, 5.0], [8, 4], [[P; 2]; 2], 2).unwrap();
        let ops = TensorOperators::new(2, 2, NodeFamily::Gauss).unwrap();
        let geo = Geometry::new(&mesh, &ops, MetricMethod::Auto).unwrap();
        for &j in &geo.jac {
            assert_abs_diff_eq!(j, 1.5625, epsilon = 1e-13);
        }
        for g in &geo.g_vol {
            assert_abs_diff_eq!(g[0][0], 1.25, epsilon = 1e-13);
            assert_abs_diff_eq!(g[0][1], 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!(g[1][1], 1.25, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(geo.length_scale(), 1.25, epsilon = 1e-13);
    }

    #[test]
    fn one_dimensional_element() {
        let mesh = Mesh::<1>::cartesian([0.0], [2.5], [1], [[P; 2]], 1).unwrap();
        let ops = TensorOperators::new(1, 3, NodeFamily::Gauss).unwrap();
        let geo = Geometry::new(&mesh, &ops, MetricMethod::Direct).unwrap();
        assert!(geo.jac.iter().all(|&j| (j - 1.25).abs() < 1e-14));
        assert_eq!(geo.njf, vec![[-1.0], [1.0]]);
        assert_abs_diff_eq!(geo.length_scale(), 1.25, epsilon = 1e-14);
    }

    #[test]
    fn warped_2d_watertight_and_normals() {
        for family in [NodeFamily::Gauss, NodeFamily::Gll] {
            for alpha in [1.0 / 16.0, 1.0 / 8.0] {
                let lo = [0.0, -5.0];
                let hi = [20.0, 5.0];
                let mut mesh = Mesh::<2>::cartesian(lo, hi, [8, 4], [[P; 2]; 2], 3).unwrap();
                mesh.warp(warp_2d(lo, hi, alpha));
                let ops = TensorOperators::new(2, 3, family).unwrap();
                let geo = Geometry::new(&mesh, &ops, MetricMethod::Direct).unwrap();
                assert!(geo.watertight_residual(&mesh) <= 1e-12);
                assert!(geo.normal_mismatch() <= 1e-12, "{}", geo.normal_mismatch());
            }
        }
    }

    #[test]
    fn normals_from_face_metrics() {
        let lo = [0.0, -5.0];
        let hi = [20.0, 5.0];
        let mut mesh = Mesh::<2>::cartesian(lo, hi, [4, 2], [[P; 2]; 2], 2).unwrap();
        mesh.warp(warp_2d(lo, hi, 0.1));
        let ops = TensorOperators::new(2, 2, NodeFamily::Gauss).unwrap();
        let geo = Geometry::new(&mesh, &ops, MetricMethod::Direct).unwrap();
        let nft = geo.face_total();
        for (k, n) in geo.njf.iter().enumerate() {
            let (dir, sign) = ops.face_dir((k % nft) / geo.nf);
            for i in 0..2 {
                assert_eq!(n[i], sign * geo.g_face[k][i][dir]);
            }
        }
    }

    fn warped_3d(ngeo: usize, elems: [usize; 3]) -> Mesh<3> {
        let lo = [0.0; 3];
        let hi = [15.0, 20.0, 5.0];
        let mut mesh = Mesh::<3>::cartesian(lo, hi, elems, [[P; 2]; 3], ngeo).unwrap();
        mesh.warp(warp_3d(lo, hi));
        mesh
    }

    #[test]
    fn curl_matches_direct_for_affine() {
        let mesh = Mesh::<3>::cartesian([0.0; 3], [15.0, 20.0, 5.0], [2, 2, 1], [[P; 2]; 3], 2).unwrap();
        let ops = TensorOperators::new(3, 2, NodeFamily::Gauss).unwrap();
        let a = Geometry::new(&mesh, &ops, MetricMethod::Direct).unwrap();
        let b = Geometry::new(&mesh, &ops, MetricMethod::Curl).unwrap();
        for (x, y) in a.g_vol.iter().chain(&a.g_face).zip(b.g_vol.iter().chain(&b.g_face)) {
            for i in 0..3 {
                for j in 0..3 {
                    assert_abs_diff_eq!(x[i][j], y[i][j], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn curl_matches_direct_for_low_degree_maps() {
        // quadratic maps of this warp invert at h = 2.5 but not at h = 1.25
        for n in [4] {
            let mesh = warped_3d(n / 2, [12, 16, 4]);
            for family in [NodeFamily::Gauss, NodeFamily::Gll] {
                let ops = TensorOperators::new(3, n, family).unwrap();
                let a = Geometry::new(&mesh, &ops, MetricMethod::Direct).unwrap();
                let b = Geometry::new(&mesh, &ops, MetricMethod::Curl).unwrap();
                for (x, y) in a.g_vol.iter().chain(&a.g_face).zip(b.g_vol.iter().chain(&b.g_face)) {
                    for i in 0..3 {
                        for j in 0..3 {
                            assert_abs_diff_eq!(x[i][j], y[i][j], epsilon = 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn curl_normals_continuous_on_warped_mesh() {
        for n in [2, 3] {
            let mesh = warped_3d(n, [6, 8, 2]);
            let ops = TensorOperators::new(3, n, NodeFamily::Gauss).unwrap();
            let geo = Geometry::new(&mesh, &ops, MetricMethod::Curl).unwrap();
            assert!(geo.watertight_residual(&mesh) <= 1e-12);
            assert!(geo.normal_mismatch() <= 1e-12, "{}", geo.normal_mismatch());
        }
    }

    #[test]
    fn gauss_and_gll_agree_with_exact_polynomial_metrics() {
        // 2D maps of degree 2 have metrics of degree <= 2 <= N in each variable
        let lo = [0.0, 0.0];
        let hi = [1.0, 1.0];
        let w = BoundaryKind::Wall;
        let mut mesh = Mesh::<2>::cartesian(lo, hi, [1, 1], [[w; 2]; 2], 2).unwrap();
        mesh.warp(|[x, y]| [x + 0.1 * y * y, y + 0.05 * x * x]);
        for family in [NodeFamily::Gauss, NodeFamily::Gll] {
            let ops = TensorOperators::new(2, 3, family).unwrap();
            let geo = Geometry::new(&mesh, &ops, MetricMethod::Direct).unwrap();
            let nft = geo.face_total();
            for k in 0..nft {
                let (dir, _) = ops.face_dir(k / geo.nf);
                let p = ops.face_point(k / geo.nf, k % geo.nf);
                let (x0, y0) = (0.5 * (p[0] + 1.0), 0.5 * (p[1] + 1.0));
                // A = [[1/2, 0.1 y0], [0.05 x0, 1/2]]
                let a = [[0.5, 0.1 * y0], [0.05 * x0, 0.5]];
                let exact = [[a[1][1], -a[1][0]], [-a[0][1], a[0][0]]];
                for i in 0..2 {
                    assert_abs_diff_eq!(geo.g_face[k][i][dir], exact[i][dir], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverted_element_is_rejected() {
        let mut mesh = Mesh::<2>::cartesian([0.0; 2], [1.0; 2], [1, 1], [[P; 2]; 2], 1).unwrap();
        mesh.warp(|[x, y]| [-x, y]);
        let ops = TensorOperators::new(2, 1, NodeFamily::Gauss).unwrap();
        assert!(matches!(
            Geometry::new(&mesh, &ops, MetricMethod::Direct),
            Err(EsdgError::Jacobian { element: 0, .. })
        ));
    }
}
