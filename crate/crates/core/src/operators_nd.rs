//! Tensor-product reference operators in one to three dimensions, applied along lines,
//! and the general quadrature/basis decoupled operator builder.

use nalgebra::{DMatrix, DVector};

use crate::error::{EsdgError, Result};
use crate::operators_1d::{differentiation_matrix, barycentric_weights, legendre, lagrange_values, NodeFamily, Operator1D};

/// Reference operators on `[-1,1]^d`.
///
/// Volume nodes are ordered lexicographically with direction 1 fastest. Faces are ordered
/// `(-x, +x, -y, +y, -z, +z)`; nodes within a face follow the lexicographic order of the
/// remaining coordinates.
#[derive(Debug, Clone)]
pub struct TensorOperators {
    pub dim: usize,
    pub op1d: Operator1D,
    /// Nodes per direction, `N + 1`.
    pub n1: usize,
    pub num_vol: usize,
    /// Nodes on one face, `(N+1)^(d-1)`.
    pub num_face_nodes: usize,
    pub vol_weights: Vec<f64>,
    /// Quadrature weights of the nodes on one face (identical for every face).
    pub face_weights: Vec<f64>,
    /// Row-major 1D differentiation matrix.
    pub d1: Vec<f64>,
    /// Row-major 1D skew-symmetric `S`.
    pub s1: Vec<f64>,
    /// 1D endpoint interpolation rows (left, right).
    pub vf1: [Vec<f64>; 2],
    /// Node index hit by each endpoint when `Vf` is a selection (GLL).
    pub vf_select: Option<[usize; 2]>,
    /// For each face node (all faces), the volume index where its normal line starts.
    face_line_base: Vec<usize>,
    /// Stride of volume indices along each direction.
    strides: [usize; 3],
}

impl TensorOperators {
    pub fn new(dim: usize, degree: usize, family: NodeFamily) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(EsdgError::Unsupported(format!("dimension {dim}")));
        }
        let op1d = Operator1D::new(degree, family)?;
        let n1 = degree + 1;
        let num_vol = n1.pow(dim as u32);
        let num_face_nodes = n1.pow(dim as u32 - 1);
        let strides = [1, n1, n1 * n1];

        let vol_weights = (0..num_vol)
            .map(|n| (0..dim).map(|k| op1d.weights[(n / strides[k]) % n1]).product())
            .collect();
        let face_weights = (0..num_face_nodes)
            .map(|q| (0..dim - 1).map(|k| op1d.weights[(q / strides[k]) % n1]).product())
            .collect();

        let row_major = |m: &DMatrix<f64>| -> Vec<f64> {
            (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
        };
        let d1 = row_major(&op1d.d);
        let s1 = row_major(&op1d.s);
        let vf1 = [
            (0..n1).map(|j| op1d.vf[(0, j)]).collect(),
            (0..n1).map(|j| op1d.vf[(1, j)]).collect(),
        ];
        let vf_select = op1d.vf_is_selection().then_some([0, n1 - 1]);

        let mut ops = Self {
            dim,
            op1d,
            n1,
            num_vol,
            num_face_nodes,
            vol_weights,
            face_weights,
            d1,
            s1,
            vf1,
            vf_select,
            face_line_base: Vec::new(),
            strides,
        };
        ops.face_line_base = (0..ops.num_faces())
            .flat_map(|f| (0..num_face_nodes).map(move |q| (f, q)))
            .map(|(f, q)| {
                let (dir, _) = ops.face_dir(f);
                let idx = ops.face_node_multi_index(dir, q);
                (0..dim).map(|k| idx[k] * strides[k]).sum()
            })
            .collect();
        Ok(ops)
    }

    pub fn degree(&self) -> usize {
        self.op1d.degree
    }

    pub fn family(&self) -> NodeFamily {
        self.op1d.family
    }

    pub fn num_faces(&self) -> usize {
        2 * self.dim
    }

    pub fn num_face_total(&self) -> usize {
        self.num_faces() * self.num_face_nodes
    }

    pub fn stride(&self, dir: usize) -> usize {
        self.strides[dir]
    }

    /// Reference direction and outward sign of face `f`.
    pub fn face_dir(&self, f: usize) -> (usize, f64) {
        (f / 2, if f.is_multiple_of(2) { -1.0 } else { 1.0 })
    }

    /// Multi-index of a volume node.
    pub fn vol_multi_index(&self, n: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for k in 0..self.dim {
            idx[k] = (n / self.strides[k]) % self.n1;
        }
        idx
    }

    /// Volume multi-index of face node `q` on a face normal to `dir`, with the normal index 0.
    pub fn face_node_multi_index(&self, dir: usize, q: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut slot = 0;
        for k in 0..self.dim {
            if k != dir {
                idx[k] = (q / self.strides[slot]) % self.n1;
                slot += 1;
            }
        }
        idx
    }

    /// Start index and stride of the volume line normal to face `f` through face node `q`.
    pub fn face_line(&self, f: usize, q: usize) -> (usize, usize) {
        let (dir, _) = self.face_dir(f);
        (self.face_line_base[f * self.num_face_nodes + q], self.strides[dir])
    }

    /// Reference coordinates of volume node `n`.
    pub fn vol_point(&self, n: usize) -> [f64; 3] {
        let idx = self.vol_multi_index(n);
        let mut p = [0.0; 3];
        for k in 0..self.dim {
            p[k] = self.op1d.nodes[idx[k]];
        }
        p
    }

    /// Reference coordinates of node `q` on face `f`.
    pub fn face_point(&self, f: usize, q: usize) -> [f64; 3] {
        let (dir, sign) = self.face_dir(f);
        let idx = self.face_node_multi_index(dir, q);
        let mut p = [0.0; 3];
        for k in 0..self.dim {
            p[k] = if k == dir { sign } else { self.op1d.nodes[idx[k]] };
        }
        p
    }

    /// Applies the 1D differentiation factor along direction `dir`.
    pub fn apply_derivative(&self, dir: usize, input: &[f64], out: &mut [f64]) {
        let n1 = self.n1;
        let stride = self.strides[dir];
        for n in 0..self.num_vol {
            let a = (n / stride) % n1;
            let base = n - a * stride;
            let row = &self.d1[a * n1..(a + 1) * n1];
            out[n] = row.iter().enumerate().map(|(b, d)| d * input[base + b * stride]).sum();
        }
    }

    /// Interpolates volume values to all face nodes (faces concatenated).
    pub fn interp_to_faces(&self, input: &[f64], out: &mut [f64]) {
        for f in 0..self.num_faces() {
            let side = f % 2;
            for q in 0..self.num_face_nodes {
                let (base, stride) = self.face_line(f, q);
                out[f * self.num_face_nodes + q] = self.vf1[side]
                    .iter()
                    .enumerate()
                    .map(|(b, v)| v * input[base + b * stride])
                    .sum();
            }
        }
    }

    fn kron_with(&self, dir: usize, factor: &DMatrix<f64>) -> DMatrix<f64> {
        let eye = DMatrix::<f64>::identity(self.n1, self.n1);
        let mut out = DMatrix::from_element(1, 1, 1.0);
        for k in (0..self.dim).rev() {
            out = out.kronecker(if k == dir { factor } else { &eye });
        }
        out
    }

    /// Explicit Kronecker form of the derivative in direction `dir` (verification only).
    pub fn dense_derivative(&self, dir: usize) -> DMatrix<f64> {
        self.kron_with(dir, &self.op1d.d)
    }

    /// Explicit face interpolation matrix, faces stacked in order (verification only).
    pub fn dense_face_interp(&self) -> DMatrix<f64> {
        let nf = self.num_face_nodes;
        let mut out = DMatrix::zeros(self.num_face_total(), self.num_vol);
        for f in 0..self.num_faces() {
            let (dir, _) = self.face_dir(f);
            let row = self.op1d.vf.rows(f % 2, 1).into_owned();
            let block = self.kron_with(dir, &row);
            out.view_mut((f * nf, 0), (nf, self.num_vol)).copy_from(&block);
        }
        out
    }

    /// Diagonal of the reference boundary matrix `B^i` (face weights times normal component).
    pub fn boundary_diag(&self, dir: usize) -> Vec<f64> {
        (0..self.num_faces())
            .flat_map(|f| {
                let (fdir, sign) = self.face_dir(f);
                let s = if fdir == dir { sign } else { 0.0 };
                self.face_weights.iter().map(move |w| w * s)
            })
            .collect()
    }

    /// Explicit decoupled operator `QN^i` (verification only).
    pub fn dense_qn(&self, dir: usize) -> DMatrix<f64> {
        let nv = self.num_vol;
        let nf = self.num_face_total();
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(&self.vol_weights));
        let q = &w * self.dense_derivative(dir);
        let b = DMatrix::from_diagonal(&DVector::from_vec(self.boundary_diag(dir)));
        let vf = self.dense_face_interp();
        let mut qn = DMatrix::zeros(nv + nf, nv + nf);
        qn.view_mut((0, 0), (nv, nv))
            .copy_from(&(&q - vf.transpose() * &b * &vf * 0.5));
        qn.view_mut((0, nv), (nv, nf)).copy_from(&(vf.transpose() * &b * 0.5));
        qn.view_mut((nv, 0), (nf, nv)).copy_from(&(&b * &vf * -0.5));
        qn.view_mut((nv, nv), (nf, nf)).copy_from(&(&b * 0.5));
        qn
    }
}

/// One-dimensional basis used by [`GeneralQuadratureOps`] (tensorized in higher dimensions).
#[derive(Debug, Clone)]
pub enum BasisSpec {
    /// Legendre polynomials up to the given degree.
    Legendre { degree: usize },
    /// Lagrange polynomials through the given nodes.
    Lagrange { nodes: Vec<f64> },
}

impl BasisSpec {
    fn len(&self) -> usize {
        match self {
            BasisSpec::Legendre { degree } => degree + 1,
            BasisSpec::Lagrange { nodes } => nodes.len(),
        }
    }

    /// Values and derivatives of all 1D basis functions at `x`.
    fn eval(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            BasisSpec::Legendre { degree } => (0..=*degree)
                .map(|k| {
                    let (p, dp) = legendre(k, x);
                    let s = ((2 * k + 1) as f64 / 2.0).sqrt();
                    (s * p, s * dp)
                })
                .unzip(),
            BasisSpec::Lagrange { nodes } => {
                let bary = barycentric_weights(nodes);
                let d = differentiation_matrix(nodes, &bary);
                let l = lagrange_values(nodes, &bary, x);
                let n = nodes.len();
                let dl = (0..n).map(|j| (0..n).map(|k| l[k] * d[(k, j)]).sum()).collect();
                (l, dl)
            }
        }
    }
}

/// Decoupled SBP operators for a general basis and quadrature (non-collocated).
#[derive(Debug, Clone)]
pub struct GeneralQuadratureOps {
    pub dim: usize,
    pub vq: DMatrix<f64>,
    pub vf: DMatrix<f64>,
    pub w: DVector<f64>,
    pub wf: DVector<f64>,
    /// Reference normals at face quadrature points, one column per direction.
    pub normals: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub pq: DMatrix<f64>,
    /// Modal differentiation matrices.
    pub d_modal: Vec<DMatrix<f64>>,
    pub qn: Vec<DMatrix<f64>>,
}

impl GeneralQuadratureOps {
    /// `rule` is a 1D quadrature (points, weights) tensorized for the volume and for each face.
    pub fn new(dim: usize, basis: &BasisSpec, rule: (&[f64], &[f64])) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(EsdgError::Unsupported(format!("dimension {dim}")));
        }
        let (pts, wts) = rule;
        let nb = basis.len();
        let np = nb.pow(dim as u32);
        let nq1 = pts.len();
        let nq = nq1.pow(dim as u32);

        let multi = |n: usize, base: usize, d: usize| -> Vec<usize> {
            (0..d).map(|k| (n / base.pow(k as u32)) % base).collect()
        };
        // value, and derivative along `deriv` if given, of tensor basis function j at x
        let eval_point = |x: &[f64]| -> (Vec<f64>, Vec<Vec<f64>>) {
            let tables: Vec<(Vec<f64>, Vec<f64>)> = x.iter().map(|&xk| basis.eval(xk)).collect();
            let mut vals = vec![0.0; np];
            let mut ders = vec![vec![0.0; np]; dim];
            for j in 0..np {
                let jm = multi(j, nb, dim);
                vals[j] = (0..dim).map(|k| tables[k].0[jm[k]]).product();
                for (i, der) in ders.iter_mut().enumerate() {
                    der[j] = (0..dim)
                        .map(|k| if k == i { tables[k].1[jm[k]] } else { tables[k].0[jm[k]] })
                        .product();
                }
            }
            (vals, ders)
        };

        let mut vq = DMatrix::zeros(nq, np);
        let mut vq_der = vec![DMatrix::zeros(nq, np); dim];
        let mut w = DVector::zeros(nq);
        for n in 0..nq {
            let m = multi(n, nq1, dim);
            let x: Vec<f64> = m.iter().map(|&a| pts[a]).collect();
            w[n] = m.iter().map(|&a| wts[a]).product();
            let (vals, ders) = eval_point(&x);
            for j in 0..np {
                vq[(n, j)] = vals[j];
                for i in 0..dim {
                    vq_der[i][(n, j)] = ders[i][j];
                }
            }
        }

        let nfq = nq1.pow(dim as u32 - 1);
        let nf = 2 * dim * nfq;
        let mut vf = DMatrix::zeros(nf, np);
        let mut wf = DVector::zeros(nf);
        let mut normals = DMatrix::zeros(nf, dim);
        for f in 0..2 * dim {
            let dir = f / 2;
            let sign = if f.is_multiple_of(2) { -1.0 } else { 1.0 };
            for q in 0..nfq {
                let m = multi(q, nq1, dim - 1);
                let mut x = Vec::with_capacity(dim);
                let mut slot = 0;
                let mut wt = 1.0;
                for k in 0..dim {
                    if k == dir {
                        x.push(sign);
                    } else {
                        x.push(pts[m[slot]]);
                        wt *= wts[m[slot]];
                        slot += 1;
                    }
                }
                let row = f * nfq + q;
                wf[row] = wt;
                normals[(row, dir)] = sign;
                let (vals, _) = eval_point(&x);
                for j in 0..np {
                    vf[(row, j)] = vals[j];
                }
            }
        }

        let wmat = DMatrix::from_diagonal(&w);
        let mass = vq.transpose() * &wmat * &vq;
        let chol = mass
            .clone()
            .cholesky()
            .ok_or_else(|| EsdgError::Singular("mass matrix is not positive definite".into()))?;
        let ldiag = chol.l_dirty().diagonal();
        if ldiag.min() <= 1e-8 * ldiag.max() {
            return Err(EsdgError::Singular("mass matrix is numerically singular".into()));
        }
        let minv = chol.inverse();
        let pq = &minv * vq.transpose() * &wmat;
        let d_modal: Vec<DMatrix<f64>> = vq_der.iter().map(|vd| &pq * vd).collect();

        let vfpq = &vf * &pq;
        let qn = (0..dim)
            .map(|i| {
                let q = &wmat * &vq * &d_modal[i] * &pq;
                let bn = DMatrix::from_diagonal(&wf.component_mul(&normals.column(i)));
                let mut out = DMatrix::zeros(nq + nf, nq + nf);
                out.view_mut((0, 0), (nq, nq))
                    .copy_from(&(q - vfpq.transpose() * &bn * &vfpq * 0.5));
                out.view_mut((0, nq), (nq, nf)).copy_from(&(vfpq.transpose() * &bn * 0.5));
                out.view_mut((nq, 0), (nf, nq)).copy_from(&(&bn * &vfpq * -0.5));
                out.view_mut((nq, nq), (nf, nf)).copy_from(&(&bn * 0.5));
                out
            })
            .collect();

        Ok(Self { dim, vq, vf, w, wf, normals, mass, pq, d_modal, qn })
    }

    /// Largest entry of `QN^i + QN^i^T - blockdiag(0, Wf diag(n_i))` over all directions.
    pub fn sbp_residual(&self) -> f64 {
        let nq = self.vq.nrows();
        let nf = self.vf.nrows();
        (0..self.dim)
            .map(|i| {
                let mut target = DMatrix::zeros(nq + nf, nq + nf);
                let bn = DMatrix::from_diagonal(&self.wf.component_mul(&self.normals.column(i)));
                target.view_mut((nq, nq), (nf, nf)).copy_from(&bn);
                crate::operators_1d::max_abs(&(&self.qn[i] + self.qn[i].transpose() - target))
            })
            .fold(0.0, f64::max)
    }
}
