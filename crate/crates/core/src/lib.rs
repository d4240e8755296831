//! Steady Stokes flow through one spatial period of a planar profile cascade.
//!
//! The domain is bounded by an inflow segment (`x1 = 0`), an outflow segment
//! (`x1 = d`), a lower curve and its translate by the period `tau` in `x2`,
//! and optionally one blade profile. Boundary conditions are Dirichlet data on
//! the inflow, no-slip on the blade, periodicity between the lower and upper
//! curves and the natural "do nothing" traction condition on the outflow.
//!
//! The discretization is Taylor–Hood (P2 velocity, P1 pressure). Around the
//! main solver sit the constructive pieces of the theory: the divergence-free
//! inflow lift ([`lift`]), tensor potentials with prescribed divergence
//! ([`divsolve`]) and a verification toolkit ([`verify`]).

pub mod assembly;
pub mod divsolve;
pub mod dofs;
pub mod element;
pub mod error;
pub mod geometry;
pub mod lift;
pub mod linsolve;
pub mod mesh;
mod mesher;
pub mod output;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};

/// A point or vector in the plane.
pub type Point = [f64; 2];

/// A 2×2 matrix stored row-major, `m[i][j]`.
pub type Mat2 = [[f64; 2]; 2];

pub mod prelude {
    pub use crate::assembly::{assemble, Forcing, StokesProblem};
    pub use crate::divsolve::{build_outflow_free_potential, build_tensor_potential, CutoffProfile, TensorPotential};
    pub use crate::dofs::DofMap;
    pub use crate::error::{Error, Result};
    pub use crate::geometry::{build_geometry, BoundaryTag, CascadeGeometry, ProfileSpec, ShapeParams};
    pub use crate::lift::{build_lift, compute_flux, LiftField};
    pub use crate::mesh::{generate_mesh, read_mesh, write_mesh, Mesh, MeshKind};
    pub use crate::solver::{recover_pressure_constant, solve, LinearSolver, MixedField, SolveMode, SolveReport, SolverConfig};
    pub use crate::verify::{make_case, ManufacturedCase, NormKind, NormSpec};
    pub use crate::{Mat2, Point};
}
