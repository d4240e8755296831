//! Text artifacts: report blocks, CSV rows and legacy VTK fields.

use std::fmt::Write as _;
use std::path::Path;

use crate::solver::{MixedField, SolveReport};
use crate::Result;

/// Full-precision float formatting shared by every artifact.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

/// Flat `key=value` block, one entry per line.
pub fn report_key_values(report: &SolveReport) -> String {
    let mut s = String::new();
    for (k, v) in report_entries(report) {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

fn report_entries(r: &SolveReport) -> Vec<(String, String)> {
    let mesh = &r.solution.mesh;
    let mut out = vec![
        ("mode".to_string(), r.mode.as_str().to_string()),
        ("linear_solver".into(), r.stats.method.as_str().to_string()),
        ("iterations".into(), r.stats.iterations.to_string()),
        ("relative_residual".into(), fmt_f64(r.stats.relative_residual)),
        ("vertices".into(), mesh.vertices.len().to_string()),
        ("triangles".into(), mesh.triangles.len().to_string()),
        ("h".into(), fmt_f64(mesh.h)),
        ("flux_in".into(), fmt_f64(r.flux_in)),
        ("flux_in_data".into(), fmt_f64(r.flux_in_data)),
        ("flux_out".into(), fmt_f64(r.flux_out)),
        ("flux_defect".into(), fmt_f64(r.flux_defect())),
        ("pressure_constant".into(), fmt_f64(r.pressure_constant)),
        ("traction_residual".into(), fmt_f64(r.traction_residual)),
        ("traction_residual_opposite_sign".into(), fmt_f64(r.traction_residual_alt)),
        ("periodicity_residual_p".into(), fmt_f64(r.periodicity_residual_p)),
        ("periodicity_residual_u".into(), fmt_f64(r.periodicity_residual_u)),
        ("normal_derivative_periodicity".into(), fmt_f64(r.normal_derivative_periodicity)),
    ];
    for n in &r.norms {
        out.push((format!("velocity_w1r[r={}]", n.r), fmt_f64(n.velocity_w1r)));
        out.push((format!("pressure_lr[r={}]", n.r), fmt_f64(n.pressure_lr)));
    }
    out
}

/// CSV header and row with the same columns as [`report_key_values`].
pub fn report_csv(report: &SolveReport) -> (String, String) {
    let entries = report_entries(report);
    let header = entries.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(",");
    let row = entries.iter().map(|(_, v)| v.as_str()).collect::<Vec<_>>().join(",");
    (header, row)
}

/// Legacy ASCII VTK unstructured grid with vertex velocity and pressure.
pub fn vtk_string(field: &MixedField) -> String {
    let mesh = &field.mesh;
    let mut s = String::from("# vtk DataFile Version 3.0\nstokes solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} 0", fmt_f64(v[0]), fmt_f64(v[1]));
    }
    let nt = mesh.triangles.len();
    let _ = writeln!(s, "CELLS {} {}", nt, 4 * nt);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}", mesh.vertices.len());
    s.push_str("VECTORS velocity double\n");
    for u in &field.velocity[..mesh.vertices.len()] {
        let _ = writeln!(s, "{} {} 0", fmt_f64(u[0]), fmt_f64(u[1]));
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for p in &field.pressure {
        let _ = writeln!(s, "{}", fmt_f64(*p));
    }
    s
}

/// All coefficients: `kind,index,x1,x2,value1,value2` for velocity nodes and
/// pressure vertices.
pub fn coefficients_csv(field: &MixedField) -> String {
    let mut s = String::from("kind,index,x1,x2,value1,value2\n");
    for (i, (x, u)) in field.dofmap.topo.coords.iter().zip(&field.velocity).enumerate() {
        let _ = writeln!(s, "velocity,{i},{},{},{},{}", fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(u[0]), fmt_f64(u[1]));
    }
    for (i, (x, p)) in field.mesh.vertices.iter().zip(&field.pressure).enumerate() {
        let _ = writeln!(s, "pressure,{i},{},{},{},0", fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(*p));
    }
    s
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}
