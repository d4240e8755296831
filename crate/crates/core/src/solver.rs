//! End-to-end solve, pressure normalization check and a posteriori diagnostics.
//!
//! The outflow traction is `T(u, p) = -nu du/dn + p n (- F n)`. The reports
//! also carry the residual with the opposite pressure sign so either reading
//! of the traction can be compared against the data.

use std::collections::HashMap;
use std::sync::Arc;

use crate::assembly::{assemble, assemble_system, lumped_pressure_mass, Forcing, StokesProblem};
use crate::dofs::DofMap;
use crate::geometry::BoundaryTag;
use crate::lift::{build_lift, compute_flux};
use crate::linsolve::{direct_solve, minres_solve, SolveStats};
use crate::mesh::{sorted, Mesh};
use crate::quadrature::GaussRule;
use crate::verify::norms::{error_norm, BoundaryEdges, Field, NormKind, NormSpec, P1Field, P2Field};
use crate::{Error, Mat2, Point, Result};

pub use crate::linsolve::LinearSolver;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Inflow data imposed as essential values in one solve.
    #[default]
    Direct,
    /// Solve for `u - g~` with the divergence-free lift `g~`.
    Lifted,
}

impl SolveMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Some(Self::Direct),
            "lifted" => Some(Self::Lifted),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Lifted => "lifted",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub mode: SolveMode,
    pub linear_solver: LinearSolver,
    /// Relative residual target of the iterative solver.
    pub tol: f64,
    pub max_iter: usize,
    /// Exponents for the reported solution norms.
    pub r_values: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { mode: SolveMode::Direct, linear_solver: LinearSolver::Direct, tol: 1e-10, max_iter: 10_000, r_values: vec![2.0] }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("solver tolerance must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        for &r in &self.r_values {
            NormSpec::new(r, NormKind::LrVolume)?;
        }
        Ok(())
    }
}

/// Velocity on P2 nodes and pressure on vertices.
#[derive(Clone, Debug)]
pub struct MixedField {
    pub mesh: Arc<Mesh>,
    pub dofmap: Arc<DofMap>,
    pub velocity: Vec<[f64; 2]>,
    pub pressure: Vec<f64>,
}

impl MixedField {
    pub fn velocity_field(&self) -> P2Field<'_> {
        P2Field { mesh: &self.mesh, topo: &self.dofmap.topo, values: &self.velocity }
    }

    pub fn pressure_field(&self) -> P1Field<'_> {
        P1Field { mesh: &self.mesh, values: &self.pressure }
    }

    /// Copy with `c` added to the pressure.
    pub fn with_pressure_shift(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.pressure.iter_mut().for_each(|p| *p += c);
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEntry {
    pub r: f64,
    pub velocity_w1r: f64,
    pub pressure_lr: f64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: MixedField,
    pub mode: SolveMode,
    /// Flux of the discrete inflow trace, `-∫_in u_h · n`.
    pub flux_in: f64,
    /// Flux of the data `g` by Gauss quadrature.
    pub flux_in_data: f64,
    pub flux_out: f64,
    /// `(1/tau) ∫_out (T(u, p) - h) · n`.
    pub pressure_constant: f64,
    /// `||T(u, p) - h||` in L2 on the outflow.
    pub traction_residual: f64,
    /// Same with the pressure entering as `-p n`.
    pub traction_residual_alt: f64,
    pub periodicity_residual_p: f64,
    pub periodicity_residual_u: f64,
    /// `||(grad u(x) - grad u(x + tau e2)) n||` in L2 on the lower curve.
    pub normal_derivative_periodicity: f64,
    pub norms: Vec<NormEntry>,
    pub stats: SolveStats,
}

impl SolveReport {
    /// `|flux_out - flux_in| / max(1, |flux_in|)`.
    pub fn flux_defect(&self) -> f64 {
        (self.flux_out - self.flux_in).abs() / self.flux_in.abs().max(1.0)
    }
}

/// Solves the discrete problem on `mesh`.
pub fn solve(mesh: &Mesh, problem: &StokesProblem, config: &SolverConfig) -> Result<SolveReport> {
    if !(problem.nu > 0.0) {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {}", problem.nu)));
    }
    config.validate()?;
    problem.check_corners(mesh)?;
    let dofmap = DofMap::new(mesh, &[BoundaryTag::Inflow, BoundaryTag::Profile], false);
    let system = match config.mode {
        SolveMode::Direct => assemble(mesh, problem, &dofmap)?,
        SolveMode::Lifted => {
            let lift = build_lift(mesh, &*problem.inflow_g)?;
            assemble_system(mesh, &dofmap, problem.nu, Some(&problem.forcing), Some(&problem.outflow_h), lift.velocity)?
        }
    };
    let (x, stats) = match config.linear_solver {
        LinearSolver::Direct => direct_solve(&system.matrix, &system.rhs)?,
        LinearSolver::Minres => {
            let weights: Vec<f64> = lumped_pressure_mass(mesh, &dofmap).iter().map(|m| m / problem.nu).collect();
            minres_solve(&system.matrix, &system.rhs, dofmap.n_velocity(), &weights, config.tol, config.max_iter)?
        }
    };
    let (velocity, pressure) = system.expand(&dofmap, &x);
    let solution = MixedField { mesh: Arc::new(mesh.clone()), dofmap: Arc::new(dofmap), velocity, pressure };
    diagnostics(solution, problem, config, stats)
}

/// Outflow traction `-nu du/dn + sign p n - F n` at a point of triangle `t`.
fn traction(solution: &MixedField, problem: &StokesProblem, t: usize, l: &[f64; 3], x: Point, n: Point, sign: f64) -> [f64; 2] {
    let g: Mat2 = solution.velocity_field().gradient(t, l, x);
    let p = solution.pressure_field().value(t, l, x)[0];
    let mut out = [0.0; 2];
    for c in 0..2 {
        out[c] = -problem.nu * (g[c][0] * n[0] + g[c][1] * n[1]) + sign * p * n[c];
    }
    if let Forcing::Tensor(f) = &problem.forcing {
        let m = f(t, x);
        for c in 0..2 {
            out[c] -= m[c][0] * n[0] + m[c][1] * n[1];
        }
    }
    out
}

/// `(1/tau) ∫_out (T(u, p) - h) · n`: the constant to subtract from the
/// pressure to restore the outflow normalization.
pub fn recover_pressure_constant(solution: &MixedField, problem: &StokesProblem) -> f64 {
    let mesh = &solution.mesh;
    let total = BoundaryEdges::new(mesh, BoundaryTag::Outflow).integrate(mesh, 5, |t, l, x, n| {
        let tr = traction(solution, problem, t, l, x, n, 1.0);
        let h = (problem.outflow_h)(x);
        (tr[0] - h[0]) * n[0] + (tr[1] - h[1]) * n[1]
    });
    total / mesh.tau
}

/// Fills every report field from a computed solution.
pub fn diagnostics(solution: MixedField, problem: &StokesProblem, config: &SolverConfig, stats: SolveStats) -> Result<SolveReport> {
    let mesh = Arc::clone(&solution.mesh);
    let topo = &solution.dofmap.topo;
    let vel = solution.velocity_field();
    let normal_flux = |tag| {
        BoundaryEdges::new(&mesh, tag).integrate(&mesh, 5, |t, l, x, n| {
            let u = vel.value(t, l, x);
            u[0] * n[0] + u[1] * n[1]
        })
    };
    let flux_in = -normal_flux(BoundaryTag::Inflow);
    let flux_out = normal_flux(BoundaryTag::Outflow);
    let flux_in_data = compute_flux(&mesh, &*problem.inflow_g);

    let outflow = BoundaryEdges::new(&mesh, BoundaryTag::Outflow);
    let residual = |sign: f64| {
        outflow
            .integrate(&mesh, 5, |t, l, x, n| {
                let tr = traction(&solution, problem, t, l, x, n, sign);
                let h = (problem.outflow_h)(x);
                (tr[0] - h[0]).powi(2) + (tr[1] - h[1]).powi(2)
            })
            .sqrt()
    };
    let traction_residual = residual(1.0);
    let traction_residual_alt = residual(-1.0);
    let pressure_constant = recover_pressure_constant(&solution, problem);

    let periodicity_residual_p = mesh
        .periodic_pairs
        .iter()
        .map(|&(lo, up)| (solution.pressure[lo] - solution.pressure[up]).abs())
        .fold(0.0, f64::max);
    let periodicity_residual_u = (0..topo.n_nodes())
        .map(|i| {
            let (a, b) = (solution.velocity[i], solution.velocity[topo.master[i]]);
            (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
        })
        .fold(0.0, f64::max);
    let normal_derivative_periodicity = normal_derivative_jump(&solution)?;

    let mut norms = Vec::with_capacity(config.r_values.len());
    for &r in &config.r_values {
        norms.push(NormEntry {
            r,
            velocity_w1r: error_norm(&vel, &NormSpec::new(r, NormKind::W1rVolume)?, &mesh)?,
            pressure_lr: error_norm(&solution.pressure_field(), &NormSpec::new(r, NormKind::LrVolume)?, &mesh)?,
        });
    }
    Ok(SolveReport {
        solution,
        mode: config.mode,
        flux_in,
        flux_in_data,
        flux_out,
        pressure_constant,
        traction_residual,
        traction_residual_alt,
        periodicity_residual_p,
        periodicity_residual_u,
        normal_derivative_periodicity,
        norms,
        stats,
    })
}

fn normal_derivative_jump(solution: &MixedField) -> Result<f64> {
    let mesh = &solution.mesh;
    let vel = solution.velocity_field();
    let upper: HashMap<[usize; 2], usize> = BoundaryEdges::new(mesh, BoundaryTag::Upper)
        .edges
        .iter()
        .map(|&(a, b, t, _, _)| (sorted(a, b), t))
        .collect();
    let partner: HashMap<usize, usize> = mesh.periodic_pairs.iter().copied().collect();
    let rule = GaussRule::new(5);
    let mut total = 0.0;
    for &(a, b, t, ia, ib) in &BoundaryEdges::new(mesh, BoundaryTag::Lower).edges {
        let key = sorted(partner[&a], partner[&b]);
        let tu = *upper
            .get(&key)
            .ok_or_else(|| Error::InvariantViolation(format!("lower edge ({a}, {b}) has no upper partner")))?;
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let n = crate::verify::norms::outward_normal(mesh, t, pa, pb);
        let len = crate::geometry::dist(pa, pb);
        let tri_u = mesh.affine(tu);
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let xu = [x[0], x[1] + mesh.tau];
            let g_lo = vel.gradient(t, &BoundaryEdges::bary(ia, ib, *s), x);
            let g_up = vel.gradient(tu, &tri_u.barycentric(xu), xu);
            for c in 0..2 {
                let j = (g_lo[c][0] - g_up[c][0]) * n[0] + (g_lo[c][1] - g_up[c][1]) * n[1];
                total += w * len * j * j;
            }
        }
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::vector_fn;
    use crate::geometry::{build_geometry, ShapeParams};
    use crate::mesh::generate_structured;

    fn strip(n1: usize, n2: usize) -> Mesh {
        generate_structured(&build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap(), n1, n2).unwrap()
    }

    fn uniform() -> StokesProblem {
        let mut p = StokesProblem::homogeneous(1.0);
        p.inflow_g = vector_fn(|_| [1.0, 0.0]);
        p
    }

    #[test]
    fn zero_data_zero_solution() {
        let r = solve(&strip(4, 2), &StokesProblem::homogeneous(1.0), &SolverConfig::default()).unwrap();
        assert!(r.solution.velocity.iter().all(|v| v[0].abs() < 1e-14 && v[1].abs() < 1e-14));
        assert!(r.solution.pressure.iter().all(|p| p.abs() < 1e-14));
    }

    #[test]
    fn constant_flow_is_exact() {
        let m = strip(4, 2);
        let r = solve(&m, &uniform(), &SolverConfig::default()).unwrap();
        for v in &r.solution.velocity {
            assert!((v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12);
        }
        assert!(r.solution.pressure.iter().all(|p| p.abs() < 1e-12));
        assert!((r.flux_in - 1.0).abs() < 1e-12 && (r.flux_out - 1.0).abs() < 1e-12);
        assert!(r.traction_residual < 1e-12 && r.pressure_constant.abs() < 1e-12);
        let shifted = r.solution.with_pressure_shift(3.0);
        assert!((recover_pressure_constant(&shifted, &uniform()) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lifted_and_minres_agree_with_direct() {
        let m = strip(6, 4);
        let mut p = StokesProblem::homogeneous(0.5);
        p.inflow_g = vector_fn(|x| [1.0 + (2.0 * std::f64::consts::PI * x[1]).cos(), 0.3]);
        p.outflow_h = vector_fn(|x| [x[1], -0.2]);
        p.forcing = Forcing::vector(|x| [x[0], x[1] * x[1]]);
        let base = solve(&m, &p, &SolverConfig::default()).unwrap();
        for cfg in [
            SolverConfig { mode: SolveMode::Lifted, ..Default::default() },
            SolverConfig { linear_solver: LinearSolver::Minres, tol: 1e-12, ..Default::default() },
        ] {
            let r = solve(&m, &p, &cfg).unwrap();
            for (a, b) in r.solution.velocity.iter().zip(&base.solution.velocity) {
                assert!((a[0] - b[0]).abs() < 1e-8 && (a[1] - b[1]).abs() < 1e-8);
            }
        }
        assert!(base.flux_defect() < 1e-9, "{}", base.flux_defect());
    }
}
