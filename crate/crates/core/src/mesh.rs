//! Structured quadrilateral/hexahedral meshes with polynomial element mappings.

use crate::error::{EsdgError, Result};
use crate::operators_1d::{barycentric_weights, build_nodes, differentiation_matrix, lagrange_values, NodeFamily};

/// Condition imposed on a domain boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Periodic,
    Wall,
    /// Exterior state given by an analytic function of position and time.
    Prescribed,
}

/// What lies across one element face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceLink<const D: usize> {
    /// Neighboring element and its face; `offset` is added to neighbor coordinates to
    /// obtain the coordinates on this side (nonzero across periodic boundaries).
    Interior { elem: usize, face: usize, offset: [f64; D] },
    Boundary(BoundaryKind),
}

/// Lagrange basis on the GLL lattice of an element mapping.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    pub degree: usize,
    pub nodes: Vec<f64>,
    bary: Vec<f64>,
    d: nalgebra::DMatrix<f64>,
}

impl LatticeBasis {
    pub fn new(degree: usize) -> Result<Self> {
        let (nodes, _) = build_nodes(degree, NodeFamily::Gll)?;
        let bary = barycentric_weights(&nodes);
        let d = differentiation_matrix(&nodes, &bary);
        Ok(Self { degree, nodes, bary, d })
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Values and derivatives of the 1D basis at `x`.
    pub fn eval(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let l = lagrange_values(&self.nodes, &self.bary, x);
        let n = self.len();
        let dl = (0..n).map(|j| (0..n).map(|k| l[k] * self.d[(k, j)]).sum()).collect();
        (l, dl)
    }

    /// Tensor-product weights for the value and each reference derivative at `xi`:
    /// `out[0][m]` value weight of lattice node `m`, `out[1 + k][m]` derivative along `k`.
    pub fn tensor_weights<const D: usize>(&self, xi: &[f64; D]) -> Vec<Vec<f64>> {
        let n = self.len();
        let tables: Vec<(Vec<f64>, Vec<f64>)> = xi.iter().map(|&x| self.eval(x)).collect();
        let total = n.pow(D as u32);
        let mut out = vec![vec![0.0; total]; D + 1];
        for m in 0..total {
            let mut idx = [0usize; D];
            let mut r = m;
            for slot in idx.iter_mut() {
                *slot = r % n;
                r /= n;
            }
            out[0][m] = (0..D).map(|k| tables[k].0[idx[k]]).product();
            for dir in 0..D {
                out[1 + dir][m] = (0..D)
                    .map(|k| if k == dir { tables[k].1[idx[k]] } else { tables[k].0[idx[k]] })
                    .product();
            }
        }
        out
    }
}

/// Structured mesh of `K_1 x ... x K_D` elements on a box, each mapped by a degree
/// `N_geo` tensor polynomial through a GLL lattice of coordinates.
#[derive(Debug, Clone)]
pub struct Mesh<const D: usize> {
    pub elems: [usize; D],
    pub lo: [f64; D],
    pub hi: [f64; D],
    pub basis: LatticeBasis,
    /// Lattice coordinates, `(N_geo + 1)^D` per element, direction 1 fastest.
    pub coords: Vec<[f64; D]>,
    /// Face links, `2 D` per element ordered `(-x, +x, -y, +y, -z, +z)`.
    pub links: Vec<FaceLink<D>>,
    pub boundary: [[BoundaryKind; 2]; D],
}

impl<const D: usize> Mesh<D> {
    /// Uniform Cartesian mesh. `boundary[dir] = [low side, high side]`; periodic must be
    /// set on both sides of a direction.
    pub fn cartesian(
        lo: [f64; D],
        hi: [f64; D],
        elems: [usize; D],
        boundary: [[BoundaryKind; 2]; D],
        geo_degree: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&D) {
            return Err(EsdgError::Unsupported(format!("dimension {D}")));
        }
        for k in 0..D {
            if elems[k] == 0 {
                return Err(EsdgError::Config("element count must be positive".into()));
            }
            if !(hi[k] > lo[k]) {
                return Err(EsdgError::Config("degenerate domain box".into()));
            }
            let periodic = boundary[k].map(|b| b == BoundaryKind::Periodic);
            if periodic[0] != periodic[1] {
                return Err(EsdgError::Config(format!("direction {k} is periodic on one side only")));
            }
        }
        let basis = LatticeBasis::new(geo_degree.max(1))?;
        let ng = basis.len();
        let npe = ng.pow(D as u32);
        let num_elems: usize = elems.iter().product();
        let width: [f64; D] = std::array::from_fn(|k| (hi[k] - lo[k]) / elems[k] as f64);

        let mut coords = Vec::with_capacity(num_elems * npe);
        let mut links = Vec::with_capacity(num_elems * 2 * D);
        for e in 0..num_elems {
            let idx = Self::split_index(&elems, e);
            for m in 0..npe {
                let mut r = m;
                let mut x = [0.0; D];
                for k in 0..D {
                    let a = r % ng;
                    r /= ng;
                    // identical arithmetic on both sides of a shared face
                    let t = idx[k] as f64 + 0.5 * (basis.nodes[a] + 1.0);
                    x[k] = lo[k] + width[k] * t;
                }
                coords.push(x);
            }
            for f in 0..2 * D {
                let dir = f / 2;
                let high = f % 2 == 1;
                let at_edge = if high { idx[dir] + 1 == elems[dir] } else { idx[dir] == 0 };
                let kind = boundary[dir][usize::from(high)];
                if at_edge && kind != BoundaryKind::Periodic {
                    links.push(FaceLink::Boundary(kind));
                    continue;
                }
                let mut nidx = idx;
                let mut offset = [0.0; D];
                if high {
                    if at_edge {
                        nidx[dir] = 0;
                        offset[dir] = hi[dir] - lo[dir];
                    } else {
                        nidx[dir] += 1;
                    }
                } else if at_edge {
                    nidx[dir] = elems[dir] - 1;
                    offset[dir] = lo[dir] - hi[dir];
                } else {
                    nidx[dir] -= 1;
                }
                links.push(FaceLink::Interior {
                    elem: Self::join_index(&elems, &nidx),
                    face: f ^ 1,
                    offset,
                });
            }
        }
        Ok(Self { elems, lo, hi, basis, coords, links, boundary })
    }

    fn split_index(elems: &[usize; D], mut e: usize) -> [usize; D] {
        let mut idx = [0; D];
        for k in 0..D {
            idx[k] = e % elems[k];
            e /= elems[k];
        }
        idx
    }

    fn join_index(elems: &[usize; D], idx: &[usize; D]) -> usize {
        (0..D).rev().fold(0, |acc, k| acc * elems[k] + idx[k])
    }

    pub fn num_elems(&self) -> usize {
        self.elems.iter().product()
    }

    pub fn geo_degree(&self) -> usize {
        self.basis.degree
    }

    pub fn nodes_per_elem(&self) -> usize {
        self.basis.len().pow(D as u32)
    }

    pub fn elem_coords(&self, e: usize) -> &[[f64; D]] {
        let npe = self.nodes_per_elem();
        &self.coords[e * npe..(e + 1) * npe]
    }

    pub fn link(&self, e: usize, f: usize) -> &FaceLink<D> {
        &self.links[e * 2 * D + f]
    }

    pub fn volume(&self) -> f64 {
        (0..D).map(|k| self.hi[k] - self.lo[k]).product()
    }

    /// Applies `map` to every lattice coordinate.
    pub fn warp<F: Fn([f64; D]) -> [f64; D]>(&mut self, map: F) {
        for x in self.coords.iter_mut() {
            *x = map(*x);
        }
    }

    /// Physical position and `A_ij = dx_i / dxi_j` at reference point `xi` of element `e`.
    pub fn map_point(&self, e: usize, xi: &[f64; D]) -> ([f64; D], [[f64; D]; D]) {
        let w = self.basis.tensor_weights(xi);
        self.map_with_weights(e, &w)
    }

    pub fn map_with_weights(&self, e: usize, w: &[Vec<f64>]) -> ([f64; D], [[f64; D]; D]) {
        let mut x = [0.0; D];
        let mut a = [[0.0; D]; D];
        for (m, c) in self.elem_coords(e).iter().enumerate() {
            for i in 0..D {
                x[i] += w[0][m] * c[i];
                for j in 0..D {
                    a[i][j] += w[1 + j][m] * c[i];
                }
            }
        }
        (x, a)
    }

    /// Plain-text dump, one line per element listing its lattice coordinates.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in 0..self.num_elems() {
            let line: Vec<String> = self
                .elem_coords(e)
                .iter()
                .flat_map(|c| c.iter().map(|v| format!("{v:.17e}")))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Two-dimensional warp with amplitude `alpha`, relative to the box center.
pub fn warp_2d(lo: [f64; 2], hi: [f64; 2], alpha: f64) -> impl Fn([f64; 2]) -> [f64; 2] {
    use std::f64::consts::PI;
    let (lx, ly) = (hi[0] - lo[0], hi[1] - lo[1]);
    let (cx, cy) = (0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]));
    move |[x, y]| {
        let xt = x + lx * alpha * (PI / lx * (x - cx)).cos() * (3.0 * PI / ly * (y - cy)).cos();
        let yt = y + ly * alpha * (4.0 * PI / lx * (xt - cx)).sin() * (PI / ly * (y - cy)).cos();
        [xt, yt]
    }
}

/// Three-dimensional sequential warp with amplitudes `L/8`, relative to the box center.
pub fn warp_3d(lo: [f64; 3], hi: [f64; 3]) -> impl Fn([f64; 3]) -> [f64; 3] {
    use std::f64::consts::PI;
    let l: [f64; 3] = std::array::from_fn(|k| hi[k] - lo[k]);
    let c: [f64; 3] = std::array::from_fn(|k| 0.5 * (lo[k] + hi[k]));
    move |[x, y, z]| {
        let (dx, dz) = (x - c[0], z - c[2]);
        let yt = y + l[1] / 8.0 * (3.0 * PI / l[0] * dx).cos() * (PI / l[1] * (y - c[1])).cos() * (PI / l[2] * dz).cos();
        let xt = x + l[0] / 8.0 * (PI / l[0] * dx).cos() * (4.0 * PI / l[1] * (yt - c[1])).sin() * (PI / l[2] * dz).cos();
        let zt = z + l[2] / 8.0 * (PI / l[0] * (xt - c[0])).cos() * (2.0 * PI / l[1] * (yt - c[1])).cos() * (PI / l[2] * dz).cos();
        [xt, yt, zt]
    }
}

/// Curvilinear perturbation used for the Taylor-Green box `[-pi, pi]^3`.
pub fn warp_tgv(amplitude: f64) -> impl Fn([f64; 3]) -> [f64; 3] {
    move |[x, y, z]| {
        let s = amplitude * x.sin() * y.sin() * z.sin();
        [x + s, y + s, z + s]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const P: BoundaryKind = BoundaryKind::Periodic;

    #[test]
    fn cartesian_2d_counts_and_sizes() {
        let m = Mesh::<2>::cartesian([0.0, -5.0], [20.0, 5.0], [8, 4], [[P; 2]; 2], 1).unwrap();
        assert_eq!(m.num_elems(), 32);
        for e in 0..32 {
            let c = m.elem_coords(e);
            assert_abs_diff_eq!(c[1][0] - c[0][0], 2.5, epsilon = 1e-14);
            assert_abs_diff_eq!(c[2][1] - c[0][1], 2.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn cartesian_1d_periodic_links() {
        let m = Mesh::<1>::cartesian([-1.0], [1.0], [2], [[P; 2]], 1).unwrap();
        assert_eq!(*m.link(0, 1), FaceLink::Interior { elem: 1, face: 0, offset: [0.0] });
        assert_eq!(*m.link(1, 0), FaceLink::Interior { elem: 0, face: 1, offset: [0.0] });
        assert_eq!(*m.link(1, 1), FaceLink::Interior { elem: 0, face: 0, offset: [2.0] });
        assert_eq!(*m.link(0, 0), FaceLink::Interior { elem: 1, face: 1, offset: [-2.0] });
    }

    #[test]
    fn single_element_periodic_couples_to_itself() {
        let m = Mesh::<2>::cartesian([0.0; 2], [1.0; 2], [1, 1], [[P; 2]; 2], 1).unwrap();
        for f in 0..4 {
            match m.link(0, f) {
                FaceLink::Interior { elem, face, .. } => assert_eq!((*elem, *face), (0, f ^ 1)),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn cartesian_3d_counts() {
        let m = Mesh::<3>::cartesian([0.0; 3], [15.0, 20.0, 5.0], [6, 8, 2], [[P; 2]; 3], 1).unwrap();
        assert_eq!(m.num_elems(), 96);
        let (_, a) = m.map_point(17, &[0.3, -0.2, 0.9]);
        for i in 0..3 {
            assert_abs_diff_eq!(a[i][i], 1.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn wall_and_mixed_boundaries() {
        let w = BoundaryKind::Wall;
        let m = Mesh::<2>::cartesian([0.0; 2], [2.0, 1.0], [4, 2], [[P, P], [w, w]], 1).unwrap();
        assert_eq!(*m.link(0, 2), FaceLink::Boundary(w));
        assert_eq!(*m.link(7, 3), FaceLink::Boundary(w));
        assert!(matches!(m.link(0, 0), FaceLink::Interior { elem: 3, .. }));
        assert!(Mesh::<2>::cartesian([0.0; 2], [1.0; 2], [1, 1], [[P, w], [P, P]], 1).is_err());
    }

    #[test]
    fn warp_2d_values() {
        let id = warp_2d([0.0, -5.0], [20.0, 5.0], 0.0);
        assert_eq!(id([3.0, 1.5]), [3.0, 1.5]);
        let w = warp_2d([0.0, -5.0], [20.0, 5.0], 0.125);
        let [x, _] = w([10.0, 0.0]);
        assert_abs_diff_eq!(x, 12.5, epsilon = 1e-14);
    }

    #[test]
    fn warp_3d_values() {
        let w = warp_3d([0.0; 3], [15.0, 20.0, 5.0]);
        let p = w([7.5, 10.0, 2.5]);
        assert_abs_diff_eq!(p[1], 12.5, epsilon = 1e-14);
        // a vanishing cosine factor in y leaves the y coordinate unchanged
        let q = w([7.5, 0.0, 2.5]);
        assert_abs_diff_eq!(q[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn warps_are_periodic_on_the_box() {
        let w2 = warp_2d([0.0, -5.0], [20.0, 5.0], 0.125);
        for t in [-4.0, -1.3, 0.2, 3.7] {
            let a = w2([0.0, t]);
            let b = w2([20.0, t]);
            assert_abs_diff_eq!(b[0] - a[0], 20.0, epsilon = 1e-12);
            assert_abs_diff_eq!(b[1], a[1], epsilon = 1e-12);
            let a = w2([2.0 * t + 10.0, -5.0]);
            let b = w2([2.0 * t + 10.0, 5.0]);
            assert_abs_diff_eq!(b[1] - a[1], 10.0, epsilon = 1e-12);
            assert_abs_diff_eq!(b[0], a[0], epsilon = 1e-12);
        }
        let w3 = warp_3d([0.0; 3], [15.0, 20.0, 5.0]);
        let l = [15.0, 20.0, 5.0];
        for (s, t) in [(0.3, 0.7), (0.9, 0.1), (0.5, 0.5)] {
            for dir in 0..3 {
                let mut p = [s * l[0], t * l[1], s * l[2]];
                p[dir] = 0.0;
                let mut q = p;
                q[dir] = l[dir];
                let (a, b) = (w3(p), w3(q));
                for k in 0..3 {
                    let shift = if k == dir { l[dir] } else { 0.0 };
                    assert_abs_diff_eq!(b[k] - a[k], shift, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn map_reproduces_lattice_nodes() {
        let mut m = Mesh::<2>::cartesian([0.0; 2], [1.0; 2], [2, 2], [[P; 2]; 2], 3).unwrap();
        m.warp(warp_2d([0.0; 2], [1.0; 2], 0.1));
        let nodes = m.basis.nodes.clone();
        for e in 0..4 {
            for (k, c) in m.elem_coords(e).to_vec().iter().enumerate() {
                let xi = [nodes[k % 4], nodes[k / 4]];
                let (x, _) = m.map_point(e, &xi);
                assert_abs_diff_eq!(x[0], c[0], epsilon = 1e-14);
                assert_abs_diff_eq!(x[1], c[1], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn dump_has_one_line_per_element() {
        let m = Mesh::<1>::cartesian([0.0], [1.0], [3], [[P; 2]], 2).unwrap();
        let dump = m.dump();
        assert_eq!(dump.lines().count(), 3);
        assert_eq!(dump.lines().next().unwrap().split_whitespace().count(), 3);
    }
}
