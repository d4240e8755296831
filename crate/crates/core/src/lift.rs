//! Divergence-free extension of the inflow data.
//!
//! The extension is the velocity of an auxiliary discrete Stokes problem
//! (unit viscosity, no forcing) with essential data on every non-periodic
//! boundary: `g` on the inflow, zero on the blade and the uniform profile
//! `(flux / tau, 0)` on the outflow. The outflow condition is imposed on the
//! outflow segment itself, which is all the weak form sees.

use crate::assembly::{assemble_system, inflow_corners, weak_divergence};
use crate::dofs::DofMap;
use crate::geometry::{dist, BoundaryTag};
use crate::linsolve::{direct_solve, SolveStats};
use crate::mesh::Mesh;
use crate::quadrature::GaussRule;
use crate::verify::norms::{error_norm, BoundaryEdges, ExactField, NormKind, NormSpec, P2Field};
use crate::{Error, Point, Result};

/// Inflow data as a plain function of position.
pub type InflowData<'a> = &'a (dyn Fn(Point) -> [f64; 2] + Sync);

#[derive(Clone, Debug)]
pub struct LiftField {
    /// Nodal values on the P2 nodes of the mesh (vertices, then edge midpoints).
    pub velocity: Vec<[f64; 2]>,
    /// Flux of the P2 interpolant of `g` through the inflow; the outflow
    /// profile carries exactly this flux.
    pub flux: f64,
    /// Flux of `g` itself by 5-point Gauss quadrature.
    pub flux_data: f64,
    pub mode: &'static str,
    pub stats: SolveStats,
}

/// Residuals of the defining properties of a lift.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftInvariants {
    /// Max `|g~ - g|` over inflow nodes.
    pub inflow_trace: f64,
    /// Max `|g~|` over blade nodes.
    pub wall_trace: f64,
    /// Max difference over periodic node pairs.
    pub periodicity: f64,
    /// Max `|g~ - (flux / tau, 0)|` over outflow nodes.
    pub outflow_trace: f64,
    /// Max `|(div g~, q)|` over P1 hat functions.
    pub weak_divergence: f64,
    /// `|∫_out g~ · n - flux|`.
    pub outflow_flux_defect: f64,
    /// `||g~||_{1,r}`.
    pub lift_norm: f64,
    /// `||g~||_{1,r} / (||g||_{r, inflow} + <<g>>_{1-1/r, r})`; zero for zero data.
    pub stability_constant: f64,
}

impl LiftInvariants {
    /// All trace and divergence residuals within the given tolerance
    /// (divergence relative to the lift norm).
    pub fn passes(&self, tol: f64) -> bool {
        let scale = self.lift_norm.max(1.0);
        self.inflow_trace <= tol
            && self.wall_trace <= tol
            && self.periodicity == 0.0
            && self.outflow_trace <= tol
            && self.weak_divergence <= 1e-9 * scale
            && self.outflow_flux_defect <= tol * scale
    }
}

/// `-∫_in g · n = ∫_in g1` with 5-point Gauss per inflow edge.
pub fn compute_flux(mesh: &Mesh, g: InflowData) -> f64 {
    let rule = GaussRule::new(5);
    let mut total = 0.0;
    for e in mesh.edges_with_tag(BoundaryTag::Inflow) {
        let (pa, pb) = (mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
        let len = dist(pa, pb);
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            total += w * len * g(x)[0];
        }
    }
    total
}

/// Flux of the quadratic interpolant of `g` (Simpson's rule per edge).
fn interpolant_flux(mesh: &Mesh, g: InflowData) -> f64 {
    mesh.edges_with_tag(BoundaryTag::Inflow)
        .map(|e| {
            let (pa, pb) = (mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
            let m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            dist(pa, pb) / 6.0 * (g(pa)[0] + 4.0 * g(m)[0] + g(pb)[0])
        })
        .sum()
}

pub fn build_lift(mesh: &Mesh, g: InflowData) -> Result<LiftField> {
    let [lo, hi] = inflow_corners(mesh)?;
    let (a, b) = (g(lo), g(hi));
    let scale = 1f64.max(a[0].abs()).max(a[1].abs());
    if (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) > 1e-12 * scale {
        return Err(Error::IncompatibleCorners { lower: a, upper: b });
    }
    let flux = interpolant_flux(mesh, g);
    let outflow = [flux / mesh.tau, 0.0];
    let dofmap = DofMap::new(mesh, &[BoundaryTag::Inflow, BoundaryTag::Outflow, BoundaryTag::Profile], true);
    let known = dofmap.dirichlet_values(|_, x, tags| {
        if tags & BoundaryTag::Inflow.bit() != 0 {
            g(x)
        } else if tags & BoundaryTag::Outflow.bit() != 0 {
            outflow
        } else {
            [0.0; 2]
        }
    })?;
    let system = assemble_system(mesh, &dofmap, 1.0, None, None, known)?;
    let (x, stats) = direct_solve(&system.matrix, &system.rhs)?;
    let (velocity, _) = system.expand(&dofmap, &x);
    Ok(LiftField { velocity, flux, flux_data: compute_flux(mesh, g), mode: "auxiliary-stokes", stats })
}

impl LiftField {
    /// Evaluates the defining properties against the data `g`, with norms in
    /// exponent `r`.
    pub fn invariants(&self, mesh: &Mesh, g: InflowData, r: f64) -> Result<LiftInvariants> {
        let topo = crate::dofs::P2Topology::new(mesh);
        let gap = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
        let mut inv = LiftInvariants {
            inflow_trace: 0.0,
            wall_trace: 0.0,
            periodicity: 0.0,
            outflow_trace: 0.0,
            weak_divergence: 0.0,
            outflow_flux_defect: 0.0,
            lift_norm: 0.0,
            stability_constant: 0.0,
        };
        let outflow = [self.flux / mesh.tau, 0.0];
        for (i, v) in self.velocity.iter().enumerate() {
            let x = topo.coords[i];
            if topo.has_tag(i, BoundaryTag::Inflow) {
                inv.inflow_trace = inv.inflow_trace.max(gap(*v, g(x)));
            }
            if topo.has_tag(i, BoundaryTag::Profile) {
                inv.wall_trace = inv.wall_trace.max(gap(*v, [0.0; 2]));
            }
            if topo.has_tag(i, BoundaryTag::Outflow) {
                inv.outflow_trace = inv.outflow_trace.max(gap(*v, outflow));
            }
            inv.periodicity = inv.periodicity.max(gap(*v, self.velocity[topo.master[i]]));
        }
        inv.weak_divergence =
            weak_divergence(mesh, &topo, &self.velocity)?.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let field = P2Field { mesh, topo: &topo, values: &self.velocity };
        let out = BoundaryEdges::new(mesh, BoundaryTag::Outflow).integrate(mesh, 5, |t, l, x, n| {
            let u = crate::verify::norms::Field::value(&field, t, l, x);
            u[0] * n[0] + u[1] * n[1]
        });
        inv.outflow_flux_defect = (out - self.flux).abs();
        inv.lift_norm = error_norm(&field, &NormSpec::new(r, NormKind::W1rVolume)?, mesh)?;
        let data = ExactField { value: |x: Point| g(x), gradient: |_: Point| [[0.0; 2]; 2] };
        let data_norm = error_norm(&data, &NormSpec::new(r, NormKind::LrBoundary(BoundaryTag::Inflow))?, mesh)?
            + error_norm(&data, &NormSpec::new(r, NormKind::Gagliardo(BoundaryTag::Inflow))?, mesh)?;
        inv.stability_constant = if data_norm > 0.0 { inv.lift_norm / data_norm } else { 0.0 };
        Ok(inv)
    }
}
