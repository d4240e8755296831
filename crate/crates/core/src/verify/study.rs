//! Refinement studies and the empirical stability probe.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::geometry::{BoundaryTag, CascadeGeometry};
use crate::mesh::{generate_mesh, generate_structured, Mesh, MeshKind};
use crate::output::fmt_f64;
use crate::solver::{solve, SolverConfig};
use crate::verify::cases::{ManufacturedCase, RandomData};
use crate::verify::norms::{error_norm, Difference, ExactField, NormKind, NormSpec};
use crate::{Error, Point, Result};

/// Structured strip meshes with `n2` cells across the period and square-ish cells.
pub fn strip_levels(geometry: &CascadeGeometry, n2_values: &[usize]) -> Result<Vec<Mesh>> {
    if geometry.profile().is_some() {
        return Err(Error::InvalidArgument("structured levels need a blade-free geometry".into()));
    }
    n2_values
        .iter()
        .map(|&n2| {
            let n1 = ((n2 as f64) * geometry.d() / geometry.tau()).round().max(1.0) as usize;
            generate_structured(geometry, n1, n2)
        })
        .collect()
}

/// Meshes for a list of target sizes.
pub fn size_levels(geometry: &CascadeGeometry, h_values: &[f64], kind: MeshKind) -> Result<Vec<Mesh>> {
    h_values.iter().map(|&h| generate_mesh(geometry, h, kind)).collect()
}

/// Errors of one level for one exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub h: f64,
    pub triangles: usize,
    pub r: f64,
    pub velocity_lr: f64,
    pub velocity_w1r: f64,
    pub pressure_lr: f64,
    /// L2 outflow traction residual (independent of `r`).
    pub traction_residual: f64,
    pub pressure_constant: f64,
    pub flux_defect: f64,
}

#[derive(Clone, Debug)]
pub struct StudyTable {
    pub case: String,
    pub rows: Vec<StudyRow>,
}

/// `log(e_a / e_b) / log(h_a / h_b)`.
pub fn rate(e_a: f64, e_b: f64, h_a: f64, h_b: f64) -> f64 {
    (e_a / e_b).ln() / (h_a / h_b).ln()
}

impl StudyTable {
    pub fn rows_for(&self, r: f64) -> Vec<&StudyRow> {
        self.rows.iter().filter(|row| row.r == r).collect()
    }

    /// Rates between consecutive levels for one quantity.
    pub fn rates(&self, r: f64, quantity: impl Fn(&StudyRow) -> f64) -> Vec<f64> {
        self.rows_for(r).windows(2).map(|w| rate(quantity(w[0]), quantity(w[1]), w[0].h, w[1].h)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "case,level,h,triangles,r,velocity_lr,velocity_w1r,pressure_lr,traction_residual,pressure_constant,flux_defect,\
             rate_velocity_lr,rate_velocity_w1r,rate_pressure_lr,rate_traction\n",
        );
        let mut prev: Option<&StudyRow> = None;
        for row in &self.rows {
            let rates = match prev.filter(|p| p.r == row.r) {
                Some(p) => [
                    rate(p.velocity_lr, row.velocity_lr, p.h, row.h),
                    rate(p.velocity_w1r, row.velocity_w1r, p.h, row.h),
                    rate(p.pressure_lr, row.pressure_lr, p.h, row.h),
                    rate(p.traction_residual, row.traction_residual, p.h, row.h),
                ]
                .map(fmt_f64)
                .join(","),
                None => ",,,".to_string(),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                self.case,
                row.level,
                fmt_f64(row.h),
                row.triangles,
                row.r,
                fmt_f64(row.velocity_lr),
                fmt_f64(row.velocity_w1r),
                fmt_f64(row.pressure_lr),
                fmt_f64(row.traction_residual),
                fmt_f64(row.pressure_constant),
                fmt_f64(row.flux_defect),
                rates
            );
            prev = Some(row);
        }
        s
    }

    /// Two-column `h error` data for plotting.
    pub fn gnuplot(&self, r: f64, quantity: impl Fn(&StudyRow) -> f64) -> String {
        let mut s = String::from("# h error\n");
        for row in self.rows_for(r) {
            let _ = writeln!(s, "{} {}", fmt_f64(row.h), fmt_f64(quantity(row)));
        }
        s
    }
}

/// Solves `case` on every mesh and measures errors for every `r`.
/// Requires at least three levels.
pub fn convergence_study(
    case: &ManufacturedCase,
    meshes: &[Mesh],
    r_values: &[f64],
    config: &SolverConfig,
) -> Result<StudyTable> {
    if meshes.len() < 3 {
        return Err(Error::InvalidArgument(format!("a study needs at least 3 levels, got {}", meshes.len())));
    }
    let specs: Vec<(NormSpec, NormSpec)> = r_values
        .iter()
        .map(|&r| Ok((NormSpec::new(r, NormKind::LrVolume)?, NormSpec::new(r, NormKind::W1rVolume)?)))
        .collect::<Result<_>>()?;
    case.oracle_check(0x5eed, 20)?;
    let problem = case.problem();
    let per_level: Vec<Result<Vec<StudyRow>>> = meshes
        .par_iter()
        .enumerate()
        .map(|(level, mesh)| {
            let report = solve(mesh, &problem, config)?;
            let (uh, ph) = (report.solution.velocity_field(), report.solution.pressure_field());
            let (ue, pe) = (case.velocity_field(), case.pressure_field());
            let (du, dp) = (Difference(&uh, &ue), Difference(&ph, &pe));
            specs
                .iter()
                .map(|(lr, w1r)| {
                    Ok(StudyRow {
                        level,
                        h: mesh.h,
                        triangles: mesh.triangles.len(),
                        r: lr.r,
                        velocity_lr: error_norm(&du, lr, mesh)?,
                        velocity_w1r: error_norm(&du, w1r, mesh)?,
                        pressure_lr: error_norm(&dp, lr, mesh)?,
                        traction_residual: report.traction_residual,
                        pressure_constant: report.pressure_constant,
                        flux_defect: report.flux_defect(),
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for level in per_level {
        rows.extend(level?);
    }
    rows.sort_by(|a, b| a.r.total_cmp(&b.r).then(a.level.cmp(&b.level)));
    Ok(StudyTable { case: case.id.clone(), rows })
}

/// Solution-to-data ratio for one sample, level and exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRow {
    pub level: usize,
    pub h: f64,
    pub seed: u64,
    pub r: f64,
    pub solution_norm: f64,
    pub data_norm: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct StabilityTable {
    pub rows: Vec<StabilityRow>,
}

impl StabilityTable {
    /// Largest ratio over samples on `level` for exponent `r`.
    pub fn max_ratio(&self, level: usize, r: f64) -> f64 {
        self.rows.iter().filter(|x| x.level == level && x.r == r).map(|x| x.ratio).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,seed,r,solution_norm,data_norm,ratio\n");
        for x in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                x.level,
                fmt_f64(x.h),
                x.seed,
                x.r,
                fmt_f64(x.solution_norm),
                fmt_f64(x.data_norm),
                fmt_f64(x.ratio)
            );
        }
        s
    }
}

/// `||f||_r + ||g||_{r, inflow} + <<g>>_{1-1/r, r} + ||h||_{r, outflow}`.
pub fn data_norm(data: &RandomData, mesh: &Mesh, r: f64) -> Result<f64> {
    let zero = |_: Point| [[0.0; 2]; 2];
    let f = ExactField { value: |x: Point| data.f(x), gradient: zero };
    let g = ExactField { value: |x: Point| data.g(x), gradient: zero };
    let h = ExactField { value: |x: Point| data.h(x), gradient: zero };
    Ok(error_norm(&f, &NormSpec::new(r, NormKind::LrVolume)?, mesh)?
        + error_norm(&g, &NormSpec::new(r, NormKind::LrBoundary(BoundaryTag::Inflow))?, mesh)?
        + error_norm(&g, &NormSpec::new(r, NormKind::Gagliardo(BoundaryTag::Inflow))?, mesh)?
        + error_norm(&h, &NormSpec::new(r, NormKind::LrBoundary(BoundaryTag::Outflow))?, mesh)?)
}

/// Ratios `(||u||_{1,r} + ||p||_r) / data norm` for `samples` seeded random
/// data triples on every mesh.
pub fn stability_probe(
    meshes: &[Mesh],
    nu: f64,
    samples: usize,
    seed: u64,
    r_values: &[f64],
    config: &SolverConfig,
) -> Result<StabilityTable> {
    let tasks: Vec<(usize, u64)> =
        (0..meshes.len()).flat_map(|l| (0..samples as u64).map(move |k| (l, seed.wrapping_add(k)))).collect();
    let results: Vec<Result<Vec<StabilityRow>>> = tasks
        .par_iter()
        .map(|&(level, s)| {
            let mesh = &meshes[level];
            let d = mesh.vertices.iter().map(|v| v[0]).fold(0.0, f64::max);
            let data = RandomData::new(s, mesh.tau, d);
            let report = solve(mesh, &data.problem(nu), config)?;
            r_values
                .iter()
                .map(|&r| {
                    let u = error_norm(&report.solution.velocity_field(), &NormSpec::new(r, NormKind::W1rVolume)?, mesh)?;
                    let p = error_norm(&report.solution.pressure_field(), &NormSpec::new(r, NormKind::LrVolume)?, mesh)?;
                    let dn = data_norm(&data, mesh, r)?;
                    Ok(StabilityRow { level, h: mesh.h, seed: s, r, solution_norm: u + p, data_norm: dn, ratio: (u + p) / dn })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(StabilityTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, ShapeParams};
    use crate::verify::cases::make_case;

    #[test]
    fn uniform_case_is_reproduced_on_every_level() {
        let g = build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap();
        let meshes = strip_levels(&g, &[2, 4, 6]).unwrap();
        let case = make_case("uniform", 1.0, &g).unwrap();
        let t = convergence_study(&case, &meshes, &[2.0], &SolverConfig::default()).unwrap();
        for row in &t.rows {
            assert!(row.velocity_w1r < 1e-10 && row.pressure_lr < 1e-10, "{row:?}");
        }
        assert_eq!(t.to_csv().lines().count(), 4);
    }

    #[test]
    fn too_few_levels_rejected() {
        let g = build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap();
        let meshes = strip_levels(&g, &[2, 4]).unwrap();
        let case = make_case("sine", 1.0, &g).unwrap();
        assert!(convergence_study(&case, &meshes, &[2.0], &SolverConfig::default()).is_err());
    }

    #[test]
    fn rate_of_halving() {
        assert!((rate(4.0, 1.0, 0.2, 0.1) - 2.0).abs() < 1e-14);
    }
}
