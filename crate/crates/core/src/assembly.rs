//! Taylor–Hood assembly of the saddle-point system
//!
//! ```text
//! nu (grad u, grad w) - (p, div w) - (q, div u) = RHS(w)
//! ```
//!
//! over periodic, Dirichlet-constrained test pairs `(w, q)`, with
//! `RHS(w) = (f, w) - <h, w>_out` for vector forcing and
//! `RHS(w) = -(F, grad w) - <h, w>_out` for tensor forcing. The outflow term
//! comes from integrating by parts with the traction
//! `-nu du/dn + p n (- F n) = h`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dofs::{DofMap, P2Topology};
use crate::element::{p2_gradients, p2_values, AffineTriangle};
use crate::geometry::BoundaryTag;
use crate::mesh::Mesh;
use crate::quadrature::{GaussRule, TriangleRule};
use crate::sparse::{CsrMatrix, Triplets};
use crate::{Error, Mat2, Point, Result};

pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
/// Tensor field evaluated on a given triangle (allows piecewise fields).
pub type TensorFn = Arc<dyn Fn(usize, Point) -> Mat2 + Send + Sync>;

#[derive(Clone)]
pub enum Forcing {
    Vector(VectorFn),
    /// Row-wise divergence form: `f_i = sum_j d_j F_ij`.
    Tensor(TensorFn),
}

impl Forcing {
    pub fn zero() -> Self {
        Forcing::Vector(Arc::new(|_| [0.0; 2]))
    }

    pub fn vector(f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Forcing::Vector(Arc::new(f))
    }

    pub fn tensor(f: impl Fn(usize, Point) -> Mat2 + Send + Sync + 'static) -> Self {
        Forcing::Tensor(Arc::new(f))
    }

    pub fn is_tensor(&self) -> bool {
        matches!(self, Forcing::Tensor(_))
    }
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.is_tensor() { "Forcing::Tensor" } else { "Forcing::Vector" })
    }
}

pub fn vector_fn(f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> VectorFn {
    Arc::new(f)
}

#[derive(Clone)]
pub struct StokesProblem {
    pub nu: f64,
    pub forcing: Forcing,
    pub inflow_g: VectorFn,
    pub outflow_h: VectorFn,
}

impl std::fmt::Debug for StokesProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StokesProblem").field("nu", &self.nu).field("forcing", &self.forcing).finish_non_exhaustive()
    }
}

impl StokesProblem {
    pub fn new(nu: f64, forcing: Forcing, inflow_g: VectorFn, outflow_h: VectorFn) -> Self {
        Self { nu, forcing, inflow_g, outflow_h }
    }

    /// All data zero.
    pub fn homogeneous(nu: f64) -> Self {
        Self::new(nu, Forcing::zero(), vector_fn(|_| [0.0; 2]), vector_fn(|_| [0.0; 2]))
    }

    /// Checks `g(A-) = g(A+)` at the inflow corners of `mesh`.
    pub fn check_corners(&self, mesh: &Mesh) -> Result<()> {
        let [lo, hi] = inflow_corners(mesh)?;
        let (a, b) = ((self.inflow_g)(lo), (self.inflow_g)(hi));
        let scale = 1f64.max(a[0].abs()).max(a[1].abs());
        if (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) > 1e-12 * scale {
            return Err(Error::IncompatibleCorners { lower: a, upper: b });
        }
        Ok(())
    }

    /// Values of the essential data at constrained nodes: `g` on the inflow,
    /// zero on the blade.
    pub fn dirichlet_values(&self, dofmap: &DofMap) -> Result<Vec<[f64; 2]>> {
        let g = self.inflow_g.clone();
        dofmap.dirichlet_values(move |_, x, tags| {
            if tags & BoundaryTag::Inflow.bit() != 0 {
                g(x)
            } else {
                [0.0; 2]
            }
        })
    }
}

/// Inflow corner points `A-`, `A+` of a mesh.
pub fn inflow_corners(mesh: &Mesh) -> Result<[Point; 2]> {
    let on = |tag: BoundaryTag| -> Vec<usize> { mesh.edges_with_tag(tag).flat_map(|e| e.vertices).collect() };
    let inflow = on(BoundaryTag::Inflow);
    let find = |tag| {
        let side = on(tag);
        inflow
            .iter()
            .copied()
            .find(|v| side.contains(v))
            .map(|v| mesh.vertices[v])
            .ok_or_else(|| Error::InvariantViolation(format!("no inflow corner on the {tag} curve")))
    };
    Ok([find(BoundaryTag::Lower)?, find(BoundaryTag::Upper)?])
}

/// Reduced linear system plus the data needed to expand its solution.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Known velocity per node: Dirichlet values on constrained nodes,
    /// an optional offset field elsewhere.
    pub known: Vec<[f64; 2]>,
}

impl SparseSystem {
    /// Full nodal velocity and vertex pressure from a reduced solution.
    pub fn expand(&self, dofmap: &DofMap, x: &[f64]) -> (Vec<[f64; 2]>, Vec<f64>) {
        let zero = vec![[0.0; 2]; self.known.len()];
        let v = dofmap.expand_velocity(x, &zero);
        let u = (0..v.len())
            .map(|i| {
                if dofmap.is_dirichlet(i) {
                    self.known[i]
                } else {
                    [v[i][0] + self.known[i][0], v[i][1] + self.known[i][1]]
                }
            })
            .collect();
        (u, dofmap.expand_pressure(x))
    }
}

/// Local element data: 12 velocity rows (node-major, component-minor) and
/// 3 pressure rows.
struct Local {
    k: [[f64; 6]; 6],
    b: [[[f64; 6]; 2]; 3],
    f: [[f64; 2]; 6],
}

fn local_element(
    mesh: &Mesh,
    t: usize,
    nu: f64,
    forcing: Option<&Forcing>,
    stiff: &TriangleRule,
    load: &TriangleRule,
) -> Local {
    let tri = mesh.affine(t);
    let area = tri.area();
    let mut k = [[0.0; 6]; 6];
    let mut b = [[[0.0; 6]; 2]; 3];
    for (l, w) in stiff.points.iter().zip(&stiff.weights) {
        let g = p2_gradients(&tri, l);
        let wa = w * area;
        for i in 0..6 {
            for j in 0..6 {
                k[i][j] += wa * nu * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
            for (q, lq) in l.iter().enumerate() {
                for c in 0..2 {
                    b[q][c][i] -= wa * lq * g[i][c];
                }
            }
        }
    }
    let mut f = [[0.0; 2]; 6];
    match forcing {
        None => {}
        Some(Forcing::Vector(func)) => {
            for (l, w) in load.points.iter().zip(&load.weights) {
                let v = func(tri.point(l));
                let phi = p2_values(l);
                for i in 0..6 {
                    f[i][0] += w * area * v[0] * phi[i];
                    f[i][1] += w * area * v[1] * phi[i];
                }
            }
        }
        Some(Forcing::Tensor(func)) => {
            for (l, w) in load.points.iter().zip(&load.weights) {
                let m = func(t, tri.point(l));
                let g = p2_gradients(&tri, l);
                for i in 0..6 {
                    for c in 0..2 {
                        f[i][c] -= w * area * (m[c][0] * g[i][0] + m[c][1] * g[i][1]);
                    }
                }
            }
        }
    }
    Local { k, b, f }
}

/// One-dimensional quadratic basis on an edge: endpoint `a`, endpoint `b`, midpoint.
pub(crate) fn edge_p2(s: f64) -> [f64; 3] {
    [(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)]
}

/// Assembles the system for an arbitrary known velocity (Dirichlet values on
/// constrained nodes, offset on free ones). `outflow_h` adds `-<h, w>` on the
/// outflow boundary.
pub fn assemble_system(
    mesh: &Mesh,
    dofmap: &DofMap,
    nu: f64,
    forcing: Option<&Forcing>,
    outflow_h: Option<&VectorFn>,
    known: Vec<[f64; 2]>,
) -> Result<SparseSystem> {
    let topo: &P2Topology = &dofmap.topo;
    let stiff = TriangleRule::new(4)?;
    let load = TriangleRule::new(6)?;
    let locals: Vec<Local> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| local_element(mesh, t, nu, forcing, &stiff, &load))
        .collect();

    let n = dofmap.n_dofs();
    let mut trip = Triplets::new(n, n);
    let mut rhs = vec![0.0; n];
    for (t, loc) in locals.iter().enumerate() {
        let nodes = topo.tri_nodes[t];
        let verts = &mesh.triangles[t];
        for i in 0..6 {
            for ci in 0..2 {
                let Some(row) = dofmap.velocity_dof(nodes[i], ci) else { continue };
                rhs[row] += loc.f[i][ci];
                for j in 0..6 {
                    let z = known[nodes[j]][ci];
                    rhs[row] -= loc.k[i][j] * z;
                    if let Some(col) = dofmap.velocity_dof(nodes[j], ci) {
                        trip.push(row, col, loc.k[i][j]);
                    }
                }
                for q in 0..3 {
                    if let Some(col) = dofmap.pressure_dof(verts[q]) {
                        trip.push(row, col, loc.b[q][ci][i]);
                    }
                }
            }
        }
        for q in 0..3 {
            let Some(row) = dofmap.pressure_dof(verts[q]) else { continue };
            for j in 0..6 {
                for c in 0..2 {
                    rhs[row] -= loc.b[q][c][j] * known[nodes[j]][c];
                    if let Some(col) = dofmap.velocity_dof(nodes[j], c) {
                        trip.push(row, col, loc.b[q][c][j]);
                    }
                }
            }
        }
    }

    if let Some(h) = outflow_h {
        let gauss = GaussRule::new(5);
        for e in mesh.edges_with_tag(BoundaryTag::Outflow) {
            let [a, b] = e.vertices;
            let nodes = [a, b, topo.midpoint_node(a, b)];
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let len = crate::geometry::dist(pa, pb);
            for (s, w) in gauss.points.iter().zip(&gauss.weights) {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let hv = h(x);
                let phi = edge_p2(*s);
                for (k, node) in nodes.iter().enumerate() {
                    for c in 0..2 {
                        if let Some(row) = dofmap.velocity_dof(*node, c) {
                            rhs[row] -= w * len * hv[c] * phi[k];
                        }
                    }
                }
            }
        }
    }
    Ok(SparseSystem { matrix: trip.to_csr(), rhs, known })
}

/// Assembles the discrete problem with Dirichlet data from `problem`
/// (`g` on the inflow, zero on the blade).
pub fn assemble(mesh: &Mesh, problem: &StokesProblem, dofmap: &DofMap) -> Result<SparseSystem> {
    let known = problem.dirichlet_values(dofmap)?;
    assemble_system(mesh, dofmap, problem.nu, Some(&problem.forcing), Some(&problem.outflow_h), known)
}

/// Lumped P1 mass per free pressure unknown.
pub fn lumped_pressure_mass(mesh: &Mesh, dofmap: &DofMap) -> Vec<f64> {
    let mut m = vec![0.0; dofmap.n_pressure()];
    let off = dofmap.n_velocity();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let a = mesh.triangle_area(t) / 3.0;
        for &v in tri {
            if let Some(k) = dofmap.pressure_dof(v) {
                m[k - off] += a;
            }
        }
    }
    m
}

/// Values of a nodal P2 vector field on triangle `t` at barycentric `l`.
pub fn eval_p2(topo: &P2Topology, field: &[[f64; 2]], t: usize, l: &[f64; 3]) -> [f64; 2] {
    let phi = p2_values(l);
    let nodes = topo.tri_nodes[t];
    let mut out = [0.0; 2];
    for i in 0..6 {
        out[0] += phi[i] * field[nodes[i]][0];
        out[1] += phi[i] * field[nodes[i]][1];
    }
    out
}

/// Gradient `out[c][j] = d_j u_c` of a nodal P2 field on triangle `t`.
pub fn grad_p2(topo: &P2Topology, tri: &AffineTriangle, field: &[[f64; 2]], t: usize, l: &[f64; 3]) -> Mat2 {
    let g = p2_gradients(tri, l);
    let nodes = topo.tri_nodes[t];
    let mut out = [[0.0; 2]; 2];
    for i in 0..6 {
        for c in 0..2 {
            out[c][0] += field[nodes[i]][c] * g[i][0];
            out[c][1] += field[nodes[i]][c] * g[i][1];
        }
    }
    out
}

/// Value of a P1 vertex field.
pub fn eval_p1(mesh: &Mesh, field: &[f64], t: usize, l: &[f64; 3]) -> f64 {
    let tri = mesh.triangles[t];
    l[0] * field[tri[0]] + l[1] * field[tri[1]] + l[2] * field[tri[2]]
}

/// `(q, div u)` for every P1 hat function `q` of the mesh vertices, with
/// periodic classes folded onto their masters.
pub fn weak_divergence(mesh: &Mesh, topo: &P2Topology, u: &[[f64; 2]]) -> Result<Vec<f64>> {
    let rule = TriangleRule::new(4)?;
    let mut out = vec![0.0; mesh.vertices.len()];
    for t in 0..mesh.triangles.len() {
        let tri = mesh.affine(t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let g = grad_p2(topo, &tri, u, t, l);
            let div = g[0][0] + g[1][1];
            for (k, &v) in mesh.triangles[t].iter().enumerate() {
                out[topo.master[v]] += w * tri.area() * l[k] * div;
            }
        }
    }
    for v in 0..mesh.vertices.len() {
        if topo.master[v] != v {
            out[v] = out[topo.master[v]];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, ShapeParams};
    use crate::mesh::generate_structured;

    fn setup() -> (Mesh, DofMap) {
        let geom = build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap();
        let mesh = generate_structured(&geom, 4, 2).unwrap();
        let dm = DofMap::new(&mesh, &[BoundaryTag::Inflow, BoundaryTag::Profile], false);
        (mesh, dm)
    }

    #[test]
    fn zero_data_gives_zero_rhs() {
        let (mesh, dm) = setup();
        let sys = assemble(&mesh, &StokesProblem::homogeneous(1.0), &dm).unwrap();
        assert!(sys.rhs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matrix_is_symmetric_with_expected_size() {
        let (mesh, dm) = setup();
        let sys = assemble(&mesh, &StokesProblem::homogeneous(0.7), &dm).unwrap();
        assert!(sys.matrix.is_symmetric(1e-12));
        // 45 nodes, 9 periodic slaves, 4 inflow classes; 15 vertices, 5 slaves.
        assert_eq!(sys.matrix.n_rows, 2 * 32 + 10);
    }

    #[test]
    fn constant_tensor_forcing_annihilates_interior_tests() {
        let (mesh, _) = setup();
        // Every boundary constrained: tests vanish on the whole boundary.
        let all = [
            BoundaryTag::Inflow,
            BoundaryTag::Outflow,
            BoundaryTag::Lower,
            BoundaryTag::Upper,
            BoundaryTag::Profile,
        ];
        let dm = DofMap::new(&mesh, &all, false);
        let forcing = Forcing::tensor(|_, _| [[1.3, -0.4], [2.0, 0.25]]);
        let sys = assemble_system(&mesh, &dm, 1.0, Some(&forcing), None, vec![[0.0; 2]; dm.topo.n_nodes()]).unwrap();
        for v in &sys.rhs[..dm.n_velocity()] {
            assert!(v.abs() < 1e-14, "{v}");
        }
    }

    #[test]
    fn inflow_corner_mismatch_detected() {
        let (mesh, _) = setup();
        let mut p = StokesProblem::homogeneous(1.0);
        p.inflow_g = vector_fn(|x| [x[1], 0.0]);
        assert!(matches!(p.check_corners(&mesh), Err(Error::IncompatibleCorners { .. })));
    }
}
