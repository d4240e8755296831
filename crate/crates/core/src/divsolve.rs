//! Tensor fields with prescribed row-wise divergence.
//!
//! Each row `F_i` is built on the filled strip (domain plus blade interior,
//! `f` extended by zero) from a mixed Neumann problem: `sigma = grad phi`,
//! `div sigma = s_i`, `sigma · n = 0` on the inflow and outflow, periodic in
//! `x2`. `sigma` is Raviart–Thomas of index 1, `phi` discontinuous P1, so
//! `div sigma` is the elementwise L2 projection of `s_i`.
//!
//! * Outflow-free kind: `s_i = f_i + k_i d zeta'`, `F_i = sigma_i - k_i d zeta e1`
//!   with `k = mean(f)` and a cutoff `zeta` (1 at the inflow, 0 beyond `delta`),
//!   so `F_i · n = 0` on the outflow.
//! * Plain kind: `s_i = f_i - k_i`, `F_i = sigma_i + k_i x1 e1`.
//!
//! `zeta` enters through its P2 interpolant, whose `x1` derivative integrates
//! to `-tau` exactly, keeping the Neumann data compatible.

use std::collections::HashMap;
use std::sync::Arc;

use crate::assembly::Forcing;
use crate::dofs::P2Topology;
use crate::element::{p2_gradients, p2_values, rt_edge_points, rt_physical, LOCAL_EDGES};
use crate::geometry::{BoundaryTag, CascadeGeometry};
use crate::linsolve::{direct_solve_many, SolveStats};
use crate::mesh::{filled_mesh, sorted, Mesh};
use crate::quadrature::{GaussRule, TriangleRule};
use crate::sparse::Triplets;
use crate::verify::norms::{outward_normal, BoundaryEdges};
use crate::{Error, Mat2, Point, Result};

/// `zeta(x1) = 1 - S(x1 / delta)` with the quintic smoothstep `S`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProfile {
    pub delta: f64,
    pub d: f64,
}

impl CutoffProfile {
    pub fn new(delta: f64, d: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= d) {
            return Err(Error::InvalidArgument(format!("cutoff support must satisfy 0 < delta <= d, got {delta}")));
        }
        Ok(Self { delta, d })
    }

    /// Support ending one mesh cell before the blade (or before the outflow
    /// margin on a blade-free domain).
    pub fn for_geometry(geometry: &CascadeGeometry, h: f64) -> Result<Self> {
        Self::new(geometry.cutoff_delta(h)?, geometry.d())
    }

    pub fn zeta(&self, x1: f64) -> f64 {
        let t = (x1 / self.delta).clamp(0.0, 1.0);
        1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }

    pub fn zeta_prime(&self, x1: f64) -> f64 {
        if x1 <= 0.0 || x1 >= self.delta {
            return 0.0;
        }
        let t = x1 / self.delta;
        -30.0 * t * t * (1.0 - t) * (1.0 - t) / self.delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialKind {
    /// Vanishing normal trace on the outflow.
    OutflowFree,
    Plain,
}

impl PotentialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::OutflowFree => "outflow-free",
            Self::Plain => "plain",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TensorPotential {
    pub kind: PotentialKind,
    /// Mean of `f` over the filled strip.
    pub mean: [f64; 2],
    /// `|sum of Neumann data| / sum |data|` per row before the mean is removed.
    pub mean_defect: [f64; 2],
    pub stats: SolveStats,
    filled: Arc<Mesh>,
    topo: P2Topology,
    /// Per filled triangle and row: local RT1 coefficients.
    coef: Vec<[[f64; 8]; 2]>,
    cutoff: Option<CutoffProfile>,
    /// Cutoff values on the P2 nodes of the filled mesh.
    zeta_nodes: Vec<f64>,
}

/// Global unknown and sign of a local RT1 coefficient, `None` if fixed to zero.
type DofRef = Option<(usize, f64)>;

struct RtNumbering {
    local: Vec<[DofRef; 8]>,
    n_sigma: usize,
}

fn number_rt(mesh: &Mesh, topo: &P2Topology) -> RtNumbering {
    let nv = topo.n_vertices;
    let ne = topo.edges.len();
    let essential = |e: usize| {
        topo.has_tag(nv + e, BoundaryTag::Inflow) || topo.has_tag(nv + e, BoundaryTag::Outflow)
    };
    let mut edge_dof = vec![None; ne];
    let mut n = 0;
    for e in 0..ne {
        if topo.master[nv + e] == nv + e && !essential(e) {
            edge_dof[e] = Some(n);
            n += 2;
        }
    }
    // Global edge dof (edge, j) -> (unknown, sign), periodic slaves folded.
    let global = |e: usize, j: usize| -> DofRef {
        let m = topo.master[nv + e] - nv;
        if m == e {
            return edge_dof[e].map(|k| (k + j, 1.0));
        }
        let [u0, u1] = topo.edges[e];
        let same = topo.master[u0] < topo.master[u1];
        let (jj, sign) = if same { (j, 1.0) } else { (1 - j, -1.0) };
        edge_dof[m].map(|k| (k + jj, sign))
    };
    let mut local = Vec::with_capacity(mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let mut refs = [None; 8];
        for (k, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            let e = topo.tri_nodes[t][3 + k] - nv;
            let forward = tri[*a] < tri[*b];
            for j in 0..2 {
                refs[2 * k + j] = if forward {
                    global(e, j)
                } else {
                    global(e, 1 - j).map(|(u, s)| (u, -s))
                };
            }
        }
        refs[6] = Some((n, 1.0));
        refs[7] = Some((n + 1, 1.0));
        n += 2;
        local.push(refs);
    }
    RtNumbering { local, n_sigma: n }
}

/// Divergence-free-at-the-outflow potential: `div F = f`, `F · n = 0` on the outflow.
pub fn build_outflow_free_potential<F>(mesh: &Mesh, f: F, cutoff: &CutoffProfile) -> Result<TensorPotential>
where
    F: Fn(Point) -> [f64; 2] + Sync,
{
    build(mesh, &f, PotentialKind::OutflowFree, Some(*cutoff))
}

/// Potential with `div F = f` and no outflow trace condition.
pub fn build_tensor_potential<F>(mesh: &Mesh, f: F) -> Result<TensorPotential>
where
    F: Fn(Point) -> [f64; 2] + Sync,
{
    build(mesh, &f, PotentialKind::Plain, None)
}

fn build(
    mesh: &Mesh,
    f: &(dyn Fn(Point) -> [f64; 2] + Sync),
    kind: PotentialKind,
    cutoff: Option<CutoffProfile>,
) -> Result<TensorPotential> {
    let filled = filled_mesh(mesh)?;
    let nt_domain = mesh.triangles.len();
    let topo = P2Topology::new(&filled);
    let numbering = number_rt(&filled, &topo);
    let nt = filled.triangles.len();
    let n_sigma = numbering.n_sigma;
    // phi: 3 per triangle, the first one pinned.
    let phi_dof = |t: usize, k: usize| -> Option<usize> {
        let i = 3 * t + k;
        (i > 0).then(|| n_sigma + i - 1)
    };
    let n = n_sigma + 3 * nt - 1;

    let zeta_nodes: Vec<f64> = match cutoff {
        Some(c) => topo.coords.iter().map(|x| c.zeta(x[0])).collect(),
        None => vec![0.0; topo.n_nodes()],
    };

    let mass_rule = TriangleRule::new(4)?;
    let div_rule = TriangleRule::new(2)?;
    let load_rule = TriangleRule::new(6)?;
    let mut trip = Triplets::new(n, n);
    let mut load = vec![[[0.0; 2]; 3]; nt];
    let mut zeta_load = vec![[0.0; 3]; nt];
    let mut integral_f = [0.0; 2];
    for t in 0..nt {
        let tri = filled.affine(t);
        let area = tri.area();
        let refs = &numbering.local[t];
        let mut m = [[0.0; 8]; 8];
        for (l, w) in mass_rule.points.iter().zip(&mass_rule.weights) {
            let (v, _) = rt_physical(&tri, l);
            for i in 0..8 {
                for j in 0..8 {
                    m[i][j] += w * area * (v[i][0] * v[j][0] + v[i][1] * v[j][1]);
                }
            }
        }
        let mut b = [[0.0; 8]; 3];
        for (l, w) in div_rule.points.iter().zip(&div_rule.weights) {
            let (_, dv) = rt_physical(&tri, l);
            for (q, lq) in l.iter().enumerate() {
                for j in 0..8 {
                    b[q][j] += w * area * lq * dv[j];
                }
            }
        }
        for i in 0..8 {
            let Some((ri, si)) = refs[i] else { continue };
            for j in 0..8 {
                if let Some((cj, sj)) = refs[j] {
                    trip.push(ri, cj, si * sj * m[i][j]);
                }
            }
            for q in 0..3 {
                if let Some(p) = phi_dof(t, q) {
                    trip.push(ri, p, si * b[q][i]);
                    trip.push(p, ri, si * b[q][i]);
                }
            }
        }
        let nodes = topo.tri_nodes[t];
        for (l, w) in load_rule.points.iter().zip(&load_rule.weights) {
            let x = tri.point(l);
            let fx = if t < nt_domain { f(x) } else { [0.0; 2] };
            let dz: f64 = p2_gradients(&tri, l).iter().zip(&nodes).map(|(g, &nd)| g[0] * zeta_nodes[nd]).sum();
            for q in 0..3 {
                for c in 0..2 {
                    load[t][q][c] += w * area * l[q] * fx[c];
                }
                zeta_load[t][q] += w * area * l[q] * dz;
            }
            integral_f[0] += w * area * fx[0];
            integral_f[1] += w * area * fx[1];
        }
    }
    let matrix = trip.to_csr();
    let total_area = filled.area();
    let mean = [integral_f[0] / total_area, integral_f[1] / total_area];
    let d = cutoff.map_or(0.0, |c| c.d);

    let mut rhs_rows = Vec::with_capacity(2);
    let mut mean_defect = [0.0; 2];
    for c in 0..2 {
        let mut data = vec![0.0; 3 * nt];
        for t in 0..nt {
            let area = filled.triangle_area(t);
            for q in 0..3 {
                data[3 * t + q] = load[t][q][c]
                    + match kind {
                        PotentialKind::OutflowFree => mean[c] * d * zeta_load[t][q],
                        PotentialKind::Plain => -mean[c] * area / 3.0,
                    };
            }
        }
        let sum: f64 = data.iter().sum();
        let scale: f64 = data.iter().map(|v| v.abs()).sum();
        mean_defect[c] = if scale > 0.0 { sum.abs() / scale } else { 0.0 };
        for t in 0..nt {
            let share = filled.triangle_area(t) / (3.0 * total_area);
            for q in 0..3 {
                data[3 * t + q] -= sum * share;
            }
        }
        let after: f64 = data.iter().sum();
        if scale > 0.0 && !(after.abs() <= 1e-10 * scale) {
            return Err(Error::CompatibilityFailure(after.abs() / scale));
        }
        let mut rhs = vec![0.0; n];
        for (i, v) in data.iter().enumerate().skip(1) {
            rhs[n_sigma + i - 1] = *v;
        }
        rhs_rows.push(rhs);
    }
    let sols = direct_solve_many(&matrix, &[&rhs_rows[0], &rhs_rows[1]]).map_err(|e| match e {
        Error::SingularSystem(m) => Error::SolveFailure(m),
        other => other,
    })?;
    let stats = sols[0].1.clone();
    let coef = (0..nt)
        .map(|t| {
            let mut out = [[0.0; 8]; 2];
            for (c, (x, _)) in sols.iter().enumerate() {
                for (k, r) in numbering.local[t].iter().enumerate() {
                    out[c][k] = r.map_or(0.0, |(u, s)| s * x[u]);
                }
            }
            out
        })
        .collect();
    Ok(TensorPotential { kind, mean, mean_defect, stats, filled: Arc::new(filled), topo, coef, cutoff, zeta_nodes })
}

impl TensorPotential {
    fn zeta_h(&self, t: usize, l: &[f64; 3]) -> f64 {
        let phi = p2_values(l);
        self.topo.tri_nodes[t].iter().zip(&phi).map(|(&nd, p)| self.zeta_nodes[nd] * p).sum()
    }

    /// `F` on triangle `t` (of the domain mesh) at `x`; rows are `F_1`, `F_2`.
    pub fn eval(&self, t: usize, x: Point) -> Mat2 {
        let tri = self.filled.affine(t);
        let l = tri.barycentric(x);
        let (v, _) = rt_physical(&tri, &l);
        let mut out = [[0.0; 2]; 2];
        for c in 0..2 {
            for k in 0..8 {
                out[c][0] += self.coef[t][c][k] * v[k][0];
                out[c][1] += self.coef[t][c][k] * v[k][1];
            }
        }
        let shift = match (self.kind, self.cutoff) {
            (PotentialKind::OutflowFree, Some(cut)) => -cut.d * self.zeta_h(t, &l),
            _ => x[0],
        };
        for c in 0..2 {
            out[c][0] += self.mean[c] * shift;
        }
        out
    }

    /// The potential as divergence-form forcing.
    pub fn forcing(self: &Arc<Self>) -> Forcing {
        let me = Arc::clone(self);
        Forcing::tensor(move |t, x| me.eval(t, x))
    }

    /// Per row, the largest `|(F_i, grad q) + (f_i, q) - ∫_{∂Ω} (F_i · n) q|`
    /// over the P1 hat functions `q` of `mesh`.
    pub fn weak_divergence_residual<F>(&self, mesh: &Mesh, f: F) -> Result<[f64; 2]>
    where
        F: Fn(Point) -> [f64; 2],
    {
        let rule = TriangleRule::new(6)?;
        let mut r = vec![[0.0; 2]; mesh.vertices.len()];
        for t in 0..mesh.triangles.len() {
            let tri = mesh.affine(t);
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let x = tri.point(l);
                let ff = self.eval(t, x);
                let fx = f(x);
                for (k, &v) in mesh.triangles[t].iter().enumerate() {
                    let g = tri.grad_lambda[k];
                    for c in 0..2 {
                        r[v][c] += w * tri.area() * (ff[c][0] * g[0] + ff[c][1] * g[1] + fx[c] * l[k]);
                    }
                }
            }
        }
        let gauss = GaussRule::new(4);
        let owners = mesh.edge_triangles();
        for e in &mesh.boundary_edges {
            let [a, b] = e.vertices;
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let t = owners
                .get(&sorted(a, b))
                .and_then(|v| v.first())
                .map(|&(t, _)| t)
                .ok_or_else(|| Error::InvariantViolation(format!("boundary edge ({a}, {b}) has no triangle")))?;
            let normal = outward_normal(mesh, t, pa, pb);
            let len = crate::geometry::dist(pa, pb);
            for (s, w) in gauss.points.iter().zip(&gauss.weights) {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let ff = self.eval(t, x);
                for c in 0..2 {
                    let fn_ = ff[c][0] * normal[0] + ff[c][1] * normal[1];
                    r[a][c] -= w * len * fn_ * (1.0 - s);
                    r[b][c] -= w * len * fn_ * s;
                }
            }
        }
        Ok(r.iter().fold([0.0f64; 2], |m, v| [m[0].max(v[0].abs()), m[1].max(v[1].abs())]))
    }

    /// Largest `|F_i · n|` over the outflow trace degrees of freedom (normal
    /// fluxes at the two edge Gauss points): stored coefficients plus the
    /// correction term.
    pub fn outflow_trace_dofs(&self, mesh: &Mesh) -> f64 {
        let edges = BoundaryEdges::new(mesh, BoundaryTag::Outflow);
        let mut worst: f64 = 0.0;
        for &(a, b, t, ia, ib) in &edges.edges {
            let tri = mesh.triangles[t];
            let k = LOCAL_EDGES.iter().position(|e| sorted(tri[e[0]], tri[e[1]]) == sorted(a, b)).unwrap();
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            for (j, s) in rt_edge_points().iter().enumerate() {
                let l = BoundaryEdges::bary(ia, ib, *s);
                let correction = match (self.kind, self.cutoff) {
                    (PotentialKind::OutflowFree, Some(cut)) => -cut.d * self.zeta_h(t, &l),
                    _ => {
                        let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                        x[0]
                    }
                };
                // n1 of the unnormalised outward normal (t_y, -t_x) of the local edge.
                let [la, lb] = LOCAL_EDGES[k];
                let n1 = mesh.vertices[tri[lb]][1] - mesh.vertices[tri[la]][1];
                for c in 0..2 {
                    let v = self.coef[t][c][2 * k + j] + self.mean[c] * correction * n1;
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// Largest `|F_i · n|` at 5 Gauss points per outflow edge.
    pub fn outflow_trace_pointwise(&self, mesh: &Mesh) -> f64 {
        let edges = BoundaryEdges::new(mesh, BoundaryTag::Outflow);
        let rule = GaussRule::new(5);
        let mut worst: f64 = 0.0;
        for &(a, b, t, _, _) in &edges.edges {
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let n = outward_normal(mesh, t, pa, pb);
            for s in &rule.points {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let ff = self.eval(t, x);
                for row in ff {
                    worst = worst.max((row[0] * n[0] + row[1] * n[1]).abs());
                }
            }
        }
        worst
    }

    /// Largest jump of `F_i · n` between matching points of the lower and upper curves.
    pub fn periodicity_defect(&self, mesh: &Mesh) -> f64 {
        let upper: HashMap<[usize; 2], (usize, usize, usize)> = BoundaryEdges::new(mesh, BoundaryTag::Upper)
            .edges
            .iter()
            .map(|&(a, b, t, _, _)| (sorted(a, b), (a, b, t)))
            .collect();
        let partner: HashMap<usize, usize> = mesh.periodic_pairs.iter().copied().collect();
        let rule = GaussRule::new(3);
        let mut worst: f64 = 0.0;
        for &(a, b, t, _, _) in &BoundaryEdges::new(mesh, BoundaryTag::Lower).edges {
            let Some(&(_, _, tu)) = upper.get(&sorted(partner[&a], partner[&b])) else { continue };
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let n = outward_normal(mesh, t, pa, pb);
            for s in &rule.points {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let (lo, up) = (self.eval(t, x), self.eval(tu, [x[0], x[1] + mesh.tau]));
                for c in 0..2 {
                    let jump = (lo[c][0] - up[c][0]) * n[0] + (lo[c][1] - up[c][1]) * n[1];
                    worst = worst.max(jump.abs());
                }
            }
        }
        worst
    }

    /// `(∫_Ω |F|^r)^(1/r)` with the Frobenius norm.
    pub fn lr_norm(&self, mesh: &Mesh, r: f64) -> Result<f64> {
        let rule = TriangleRule::new(6)?;
        let mut total = 0.0;
        for t in 0..mesh.triangles.len() {
            let tri = mesh.affine(t);
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let m = self.eval(t, tri.point(l));
                let v = (m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2)).sqrt();
                total += w * tri.area() * v.powf(r);
            }
        }
        Ok(total.powf(1.0 / r))
    }

    /// Integral of the cutoff derivative over the filled strip (should be `-tau`).
    pub fn cutoff_derivative_integral(&self) -> Result<f64> {
        let rule = TriangleRule::new(2)?;
        let mut total = 0.0;
        for t in 0..self.filled.triangles.len() {
            let tri = self.filled.affine(t);
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let g = p2_gradients(&tri, l);
                let dz: f64 = g.iter().zip(&self.topo.tri_nodes[t]).map(|(g, &nd)| g[0] * self.zeta_nodes[nd]).sum();
                total += w * tri.area() * dz;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, ProfileSpec, ShapeParams};
    use crate::mesh::{generate_mesh, generate_structured, MeshKind};

    fn strip_mesh(n1: usize, n2: usize) -> (CascadeGeometry, Mesh) {
        let g = build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap();
        let m = generate_structured(&g, n1, n2).unwrap();
        (g, m)
    }

    #[test]
    fn cutoff_shape() {
        let c = CutoffProfile::new(0.5, 2.0).unwrap();
        assert_eq!(c.zeta(0.0), 1.0);
        assert_eq!(c.zeta(0.5), 0.0);
        assert_eq!(c.zeta(2.0), 0.0);
        let h = 1e-6;
        let fd = (c.zeta(0.2 + h) - c.zeta(0.2 - h)) / (2.0 * h);
        assert!((fd - c.zeta_prime(0.2)).abs() < 1e-7);
    }

    #[test]
    fn zero_forcing_gives_zero_potential() {
        let (g, m) = strip_mesh(4, 2);
        let cut = CutoffProfile::for_geometry(&g, m.h).unwrap();
        let p = build_outflow_free_potential(&m, |_| [0.0; 2], &cut).unwrap();
        assert_eq!(p.mean, [0.0, 0.0]);
        let v = p.eval(3, [0.9, 0.4]);
        assert!(v.iter().flatten().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn unit_forcing_first_row() {
        let (g, m) = strip_mesh(8, 4);
        let cut = CutoffProfile::for_geometry(&g, m.h).unwrap();
        let p = build_outflow_free_potential(&m, |_| [1.0, 0.0], &cut).unwrap();
        assert!((p.mean[0] - 1.0).abs() < 1e-14 && p.mean[1] == 0.0);
        assert!((p.cutoff_derivative_integral().unwrap() + 1.0).abs() < 1e-12);
        let r = p.weak_divergence_residual(&m, |_| [1.0, 0.0]).unwrap();
        assert!(r[0] < 1e-9 && r[1] < 1e-9, "{r:?}");
        assert_eq!(p.outflow_trace_dofs(&m), 0.0);
        assert!(p.outflow_trace_pointwise(&m) < 1e-12);
        assert!(p.mean_defect[0] < 1e-12);
    }

    #[test]
    fn gradient_forcing_plain_kind() {
        use std::f64::consts::PI;
        let (_, m) = strip_mesh(8, 4);
        // f = grad chi, chi = cos(2 pi x2) sin(pi x1 / 2).
        let f = |x: Point| {
            [
                0.5 * PI * (2.0 * PI * x[1]).cos() * (0.5 * PI * x[0]).cos(),
                -2.0 * PI * (2.0 * PI * x[1]).sin() * (0.5 * PI * x[0]).sin(),
            ]
        };
        let p = build_tensor_potential(&m, f).unwrap();
        let r = p.weak_divergence_residual(&m, f).unwrap();
        assert!(r[0] < 1e-8 && r[1] < 1e-8, "{r:?}");
        assert!(p.periodicity_defect(&m) < 1e-10);
    }

    #[test]
    fn bladed_potential() {
        let geom = build_geometry(
            &ShapeParams::strip(1.0, 2.0)
                .with_profile(ProfileSpec::Ellipse { center: [1.2, 0.5], semi_axes: [0.3, 0.12], angle: 0.3 }),
        )
        .unwrap();
        let m = generate_mesh(&geom, 0.2, MeshKind::Auto).unwrap();
        let cut = CutoffProfile::for_geometry(&geom, m.h).unwrap();
        let f = |x: Point| [x[0] * x[1], 1.0 + x[1].sin()];
        let p = build_outflow_free_potential(&m, f, &cut).unwrap();
        let r = p.weak_divergence_residual(&m, f).unwrap();
        assert!(r[0] < 1e-9 && r[1] < 1e-9, "{r:?}");
        assert_eq!(p.outflow_trace_dofs(&m), 0.0);
        assert!(p.periodicity_defect(&m) < 1e-10);
    }
}
