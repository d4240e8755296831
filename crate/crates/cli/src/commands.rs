//! Subcommand bodies. Every command computes its artifacts in memory and only
//! writes them once everything succeeded.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use cascade_stokes::assembly::StokesProblem;
use cascade_stokes::divsolve::{build_outflow_free_potential, build_tensor_potential, CutoffProfile, PotentialKind};
use cascade_stokes::geometry::{build_geometry, BoundaryTag, CascadeGeometry};
use cascade_stokes::lift::build_lift;
use cascade_stokes::mesh::{generate_mesh, generate_structured, read_mesh, Mesh};
use cascade_stokes::output::{coefficients_csv, fmt_f64, report_csv, report_key_values, vtk_string};
use cascade_stokes::solver::{solve, SolveReport};
use cascade_stokes::verify::cases::{make_case, ManufacturedCase, RandomData};
use cascade_stokes::verify::norms::{error_norm, Difference, ExactField, Field, NormKind, NormSpec};
use cascade_stokes::verify::study::{convergence_study, size_levels, stability_probe, strip_levels, StudyRow};
use cascade_stokes::{Error, Mat2, Point};

use crate::config::{DataSpec, ForcingMode, Levels, MeshSource, RunConfig};

/// Failure with its exit code: 1 for invalid input, 2 for numerical trouble.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

fn classify(context: &str, e: Error) -> Failure {
    let msg = format!("{context}: {e}");
    match e {
        Error::MeshFailure(_)
        | Error::QuadratureFailure(_)
        | Error::CompatibilityFailure(_)
        | Error::SolveFailure(_)
        | Error::SingularSystem(_)
        | Error::NonConvergence { .. } => Failure::Numerical(msg),
        _ => Failure::Validation(msg),
    }
}

trait Context<T> {
    fn ctx(self, context: &str) -> Result<T, Failure>;
}

impl<T> Context<T> for cascade_stokes::Result<T> {
    fn ctx(self, context: &str) -> Result<T, Failure> {
        self.map_err(|e| classify(context, e))
    }
}

/// Files to write plus the one-line summary.
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub summary: String,
    /// Set when a check ran to completion but its invariants failed.
    pub check_failure: Option<String>,
}

impl Outcome {
    fn new(summary: String) -> Self {
        Self { files: Vec::new(), summary, check_failure: None }
    }

    fn file(&mut self, name: impl Into<String>, text: String) {
        self.files.push((name.into(), text));
    }
}

/// Data triple selected by `problem.case`.
enum Data {
    Manufactured(ManufacturedCase),
    Random(RandomData),
    Zero,
}

impl Data {
    fn new(cfg: &RunConfig, geom: &CascadeGeometry) -> Result<Self, Failure> {
        Ok(match &cfg.data {
            DataSpec::Manufactured(id) => Data::Manufactured(make_case(id, cfg.nu, geom).ctx("problem.case")?),
            DataSpec::Random(seed) => Data::Random(RandomData::new(*seed, geom.tau(), geom.d())),
            DataSpec::Zero => Data::Zero,
        })
    }

    fn name(&self) -> String {
        match self {
            Data::Manufactured(c) => c.id.clone(),
            Data::Random(_) => "random".into(),
            Data::Zero => "zero".into(),
        }
    }

    fn f(&self, x: Point) -> [f64; 2] {
        match self {
            Data::Manufactured(c) => c.f(x),
            Data::Random(r) => r.f(x),
            Data::Zero => [0.0; 2],
        }
    }

    fn g(&self, x: Point) -> [f64; 2] {
        match self {
            Data::Manufactured(c) => c.g(x),
            Data::Random(r) => r.g(x),
            Data::Zero => [0.0; 2],
        }
    }

    fn problem(&self, nu: f64) -> StokesProblem {
        match self {
            Data::Manufactured(c) => c.problem(),
            Data::Random(r) => r.problem(nu),
            Data::Zero => StokesProblem::homogeneous(nu),
        }
    }
}

fn data_field<'a>(f: impl Fn(Point) -> [f64; 2] + Sync + 'a) -> impl Field + 'a {
    ExactField { value: f, gradient: |_: Point| -> Mat2 { [[0.0; 2]; 2] } }
}

fn geometry(cfg: &RunConfig) -> Result<CascadeGeometry, Failure> {
    build_geometry(&cfg.shape).ctx("geometry")
}

fn mesh(cfg: &RunConfig, geom: &CascadeGeometry) -> Result<Mesh, Failure> {
    match &cfg.mesh {
        MeshSource::File(path) => {
            let m = read_mesh(path).ctx("mesh.file")?;
            m.validate().ctx("mesh.file")?;
            m.check_tags(geom, 1e-9 * geom.d().max(geom.tau())).ctx("mesh.file")?;
            Ok(m)
        }
        MeshSource::Structured { n1, n2 } => generate_structured(geom, *n1, *n2).ctx("mesh.n1/mesh.n2"),
        MeshSource::Sized { h, kind } => generate_mesh(geom, *h, *kind).ctx("mesh.h"),
    }
}

fn levels(cfg: &RunConfig, geom: &CascadeGeometry) -> Result<Vec<Mesh>, Failure> {
    match &cfg.levels {
        Levels::Strip(n2) => strip_levels(geom, n2).ctx("study.n2"),
        Levels::Sizes(h, kind) => size_levels(geom, h, *kind).ctx("study.h"),
    }
}

fn fixed_problem(cfg: &RunConfig, data: &Data, geom: &CascadeGeometry, m: &Mesh) -> Result<StokesProblem, Failure> {
    let mut problem = data.problem(cfg.nu);
    if cfg.forcing == ForcingMode::Tensor {
        let cutoff = CutoffProfile::for_geometry(geom, m.h).ctx("problem.forcing")?;
        let pot = build_outflow_free_potential(m, |x| data.f(x), &cutoff).ctx("problem.forcing")?;
        problem.forcing = Arc::new(pot).forcing();
    }
    Ok(problem)
}

fn solve_configured(cfg: &RunConfig) -> Result<(Data, Mesh, SolveReport), Failure> {
    let geom = geometry(cfg)?;
    let data = Data::new(cfg, &geom)?;
    let m = mesh(cfg, &geom)?;
    let problem = fixed_problem(cfg, &data, &geom, &m)?;
    let report = solve(&m, &problem, &cfg.solver).ctx("solve")?;
    Ok((data, m, report))
}

pub fn mesh_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let geom = geometry(cfg)?;
    let m = mesh(cfg, &geom)?;
    let mut out = Outcome::new(format!(
        "mesh: {} vertices, {} triangles, h = {:.4e}, area = {:.6e}, curve smoothness {:?}",
        m.vertices.len(),
        m.triangles.len(),
        m.h,
        m.area(),
        geom.curve_smoothness()
    ));
    out.file("mesh.txt", m.to_text());
    Ok(out)
}

pub fn solve_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (data, _, report) = solve_configured(cfg)?;
    let mut out = Outcome::new(format!(
        "solve: case {}, {} triangles, flux_in = {:.12e}, flux_out = {:.12e}, traction residual = {:.3e}",
        data.name(),
        report.solution.mesh.triangles.len(),
        report.flux_in,
        report.flux_out,
        report.traction_residual
    ));
    let (header, row) = report_csv(&report);
    out.file("report.txt", report_key_values(&report));
    out.file("report.csv", format!("{header}\n{row}\n"));
    out.file("solution.vtk", vtk_string(&report.solution));
    out.file("coefficients.csv", coefficients_csv(&report.solution));
    Ok(out)
}

pub fn mms_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let geom = geometry(cfg)?;
    let Data::Manufactured(case) = Data::new(cfg, &geom)? else {
        return Err(Failure::Validation("config key `problem.case`: mms needs a manufactured case".into()));
    };
    let meshes = levels(cfg, &geom)?;
    let table = convergence_study(&case, &meshes, &cfg.study_r, &cfg.solver).ctx("mms")?;
    let mut summary = format!("mms: case {}, {} levels", case.id, meshes.len());
    let mut out = Outcome::new(String::new());
    let mut script = String::from("set logscale xy\nset xlabel 'h'\nset ylabel 'error'\nset key left top\nplot \\\n");
    let quantities: [(&str, fn(&StudyRow) -> f64); 4] = [
        ("velocity_lr", |r| r.velocity_lr),
        ("velocity_w1r", |r| r.velocity_w1r),
        ("pressure_lr", |r| r.pressure_lr),
        ("traction_residual", |r| r.traction_residual),
    ];
    let mut plots = Vec::new();
    for &r in &cfg.study_r {
        for (name, q) in quantities {
            let file = format!("{name}_r{r}.dat");
            out.file(file.clone(), table.gnuplot(r, q));
            plots.push(format!("  '{file}' using 1:2 with linespoints title '{name} r={r}'"));
        }
        let w = table.rates(r, |x| x.velocity_w1r).last().copied().unwrap_or(f64::NAN);
        let p = table.rates(r, |x| x.pressure_lr).last().copied().unwrap_or(f64::NAN);
        let _ = write!(summary, ", r={r}: W1,r rate {w:.3}, pressure L^r rate {p:.3}");
    }
    script.push_str(&plots.join(", \\\n"));
    script.push('\n');
    out.summary = summary;
    out.file("study.csv", table.to_csv());
    out.file("convergence.gp", script);
    Ok(out)
}

pub fn lift_check_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let geom = geometry(cfg)?;
    let data = Data::new(cfg, &geom)?;
    let m = mesh(cfg, &geom)?;
    let g = |x: Point| data.g(x);
    let lift = build_lift(&m, &g).ctx("lift")?;
    let mut csv = String::from(
        "r,inflow_trace,wall_trace,periodicity,outflow_trace,weak_divergence,outflow_flux_defect,lift_norm,\
         stability_constant,flux,flux_data\n",
    );
    let mut failed = Vec::new();
    let mut constants = Vec::new();
    for &r in &cfg.solver.r_values {
        let inv = lift.invariants(&m, &g, r).ctx("lift")?;
        if !inv.passes(1e-10) {
            failed.push(r);
        }
        constants.push(format!("C(r={r}) = {:.4}", inv.stability_constant));
        let _ = writeln!(
            csv,
            "{r},{}",
            [
                inv.inflow_trace,
                inv.wall_trace,
                inv.periodicity,
                inv.outflow_trace,
                inv.weak_divergence,
                inv.outflow_flux_defect,
                inv.lift_norm,
                inv.stability_constant,
                lift.flux,
                lift.flux_data
            ]
            .map(fmt_f64)
            .join(",")
        );
    }
    let mut out = Outcome::new(format!(
        "lift-check: case {}, flux = {:.12e}, {}, invariants {}",
        data.name(),
        lift.flux,
        constants.join(", "),
        if failed.is_empty() { "pass" } else { "FAIL" }
    ));
    if !failed.is_empty() {
        out.check_failure = Some(format!("lift invariants exceed tolerance for r = {failed:?}"));
    }
    out.file("lift_check.csv", csv);
    Ok(out)
}

pub fn divsolve_check_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let geom = geometry(cfg)?;
    let data = Data::new(cfg, &geom)?;
    let m = mesh(cfg, &geom)?;
    let f = |x: Point| data.f(x);
    let pot = match cfg.potential {
        PotentialKind::OutflowFree => {
            let cutoff = CutoffProfile::for_geometry(&geom, m.h).ctx("geometry.delta_margin")?;
            build_outflow_free_potential(&m, f, &cutoff)
        }
        PotentialKind::Plain => build_tensor_potential(&m, f),
    }
    .ctx("divsolve")?;
    let residual = pot.weak_divergence_residual(&m, f).ctx("divsolve")?;
    let (trace_dofs, trace_max) = (pot.outflow_trace_dofs(&m), pot.outflow_trace_pointwise(&m));
    let mut csv = String::from(
        "kind,r,residual_row1,residual_row2,outflow_trace_dofs,outflow_trace_max,periodicity_defect,mean_defect_row1,\
         mean_defect_row2,potential_lr,forcing_lr,norm_ratio\n",
    );
    let mut ratios = Vec::new();
    for &r in &cfg.solver.r_values {
        let pn = pot.lr_norm(&m, r).ctx("divsolve")?;
        let fn_ = error_norm(&data_field(f), &NormSpec::new(r, NormKind::LrVolume).ctx("solver.r")?, &m).ctx("divsolve")?;
        let ratio = if fn_ > 0.0 { pn / fn_ } else { 0.0 };
        ratios.push(format!("ratio(r={r}) = {ratio:.4}"));
        let _ = writeln!(
            csv,
            "{},{r},{}",
            pot.kind.as_str(),
            [
                residual[0],
                residual[1],
                trace_dofs,
                trace_max,
                pot.periodicity_defect(&m),
                pot.mean_defect[0],
                pot.mean_defect[1],
                pn,
                fn_,
                ratio
            ]
            .map(fmt_f64)
            .join(",")
        );
    }
    let mut out = Outcome::new(format!(
        "divsolve-check: {} potential, residual = {:.3e}, outflow trace = {:.3e}, {}",
        pot.kind.as_str(),
        residual[0].max(residual[1]),
        trace_max,
        ratios.join(", ")
    ));
    if residual[0].max(residual[1]) > 1e-9 {
        out.check_failure = Some(format!("weak divergence residual {:e} exceeds 1e-9", residual[0].max(residual[1])));
    }
    out.file("divsolve_check.csv", csv);
    Ok(out)
}

pub fn norms_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (data, m, report) = solve_configured(cfg)?;
    let (uh, ph) = (report.solution.velocity_field(), report.solution.pressure_field());
    let g = data_field(|x| data.g(x));
    let mut csv = String::from(
        "r,velocity_lr,velocity_w1r,pressure_lr,inflow_lr,inflow_seminorm,error_velocity_lr,error_velocity_w1r,\
         error_pressure_lr\n",
    );
    for &r in &cfg.study_r {
        let spec = |kind| NormSpec::new(r, kind).ctx("study.r");
        let (lr, w1r) = (spec(NormKind::LrVolume)?, spec(NormKind::W1rVolume)?);
        let mut row = vec![
            error_norm(&uh, &lr, &m),
            error_norm(&uh, &w1r, &m),
            error_norm(&ph, &lr, &m),
            error_norm(&g, &spec(NormKind::LrBoundary(BoundaryTag::Inflow))?, &m),
            error_norm(&g, &spec(NormKind::Gagliardo(BoundaryTag::Inflow))?, &m),
        ]
        .into_iter()
        .collect::<cascade_stokes::Result<Vec<f64>>>()
        .ctx("norms")?;
        let errors = match &data {
            Data::Manufactured(c) => {
                let (ue, pe) = (c.velocity_field(), c.pressure_field());
                let (du, dp) = (Difference(&uh, &ue), Difference(&ph, &pe));
                [error_norm(&du, &lr, &m), error_norm(&du, &w1r, &m), error_norm(&dp, &lr, &m)]
                    .into_iter()
                    .collect::<cascade_stokes::Result<Vec<f64>>>()
                    .ctx("norms")?
                    .into_iter()
                    .map(fmt_f64)
                    .collect()
            }
            _ => vec![String::new(); 3],
        };
        let mut cells: Vec<String> = row.drain(..).map(fmt_f64).collect();
        cells.extend(errors);
        let _ = writeln!(csv, "{r},{}", cells.join(","));
    }
    let mut out = Outcome::new(format!(
        "norms: case {}, {} triangles, exponents {:?}",
        data.name(),
        m.triangles.len(),
        cfg.study_r
    ));
    out.file("norms.csv", csv);
    Ok(out)
}

pub fn stability_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let geom = geometry(cfg)?;
    let meshes = levels(cfg, &geom)?;
    let table = stability_probe(&meshes, cfg.nu, cfg.samples, cfg.seed, &cfg.study_r, &cfg.solver).ctx("stability-probe")?;
    let mut summary_csv = String::from("level,h,r,max_ratio\n");
    let mut parts = Vec::new();
    for &r in &cfg.study_r {
        let first = table.max_ratio(0, r);
        let last = table.max_ratio(meshes.len() - 1, r);
        for (l, m) in meshes.iter().enumerate() {
            let _ = writeln!(summary_csv, "{l},{},{r},{}", fmt_f64(m.h), fmt_f64(table.max_ratio(l, r)));
        }
        parts.push(format!("r={r}: {first:.4} -> {last:.4}"));
    }
    let mut out = Outcome::new(format!(
        "stability-probe: {} samples on {} levels, max ratio {}",
        cfg.samples,
        meshes.len(),
        parts.join(", ")
    ));
    out.file("stability.csv", table.to_csv());
    out.file("stability_summary.csv", summary_csv);
    Ok(out)
}

/// Writes the artifacts and the effective config into the output directory.
pub fn write_outcome(cfg: &RunConfig, out: &Outcome) -> Result<PathBuf, Failure> {
    let dir = &cfg.output_dir;
    let io = |e: std::io::Error| Failure::Validation(format!("output.dir {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("config.ini"), cfg.effective.to_text()).map_err(io)?;
    for (name, text) in &out.files {
        std::fs::write(dir.join(name), text).map_err(io)?;
    }
    Ok(dir.clone())
}
