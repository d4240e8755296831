//! Acceptance suite. Runs every criterion, prints one line each and fails the
//! process if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use cascade_stokes::assembly::{vector_fn, Forcing, StokesProblem};
use cascade_stokes::divsolve::{build_outflow_free_potential, CutoffProfile};
use cascade_stokes::geometry::{build_geometry, CascadeGeometry, ProfileSpec, ShapeParams};
use cascade_stokes::lift::build_lift;
use cascade_stokes::mesh::{generate_mesh, generate_structured, Mesh, MeshKind};
use cascade_stokes::output::{coefficients_csv, report_key_values};
use cascade_stokes::solver::{recover_pressure_constant, solve, SolveReport, SolverConfig};
use cascade_stokes::verify::cases::{make_case, RandomData};
use cascade_stokes::verify::gagliardo::periodic_extension_check;
use cascade_stokes::verify::norms::{error_norm, Difference, NormKind, NormSpec};
use cascade_stokes::verify::study::{convergence_study, stability_probe, strip_levels};
use cascade_stokes::{Point, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn strip() -> CascadeGeometry {
    build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap()
}

fn curved() -> CascadeGeometry {
    build_geometry(&ShapeParams::strip(1.0, 2.0).with_lower_lift(0.2)).unwrap()
}

fn bladed() -> CascadeGeometry {
    build_geometry(
        &ShapeParams::strip(1.0, 2.0)
            .with_profile(ProfileSpec::Ellipse { center: [1.0, 0.5], semi_axes: [0.3, 0.1], angle: 0.0 }),
    )
    .unwrap()
}

fn meshes() -> Vec<(&'static str, Mesh)> {
    vec![
        ("strip 8x4", generate_structured(&strip(), 8, 4).unwrap()),
        ("curved 8x4", generate_structured(&curved(), 8, 4).unwrap()),
        ("bladed h=0.1", generate_mesh(&bladed(), 0.1, MeshKind::Auto).unwrap()),
    ]
}

fn solution_norm(r: &SolveReport) -> Result<f64> {
    let m = &r.solution.mesh;
    Ok(error_norm(&r.solution.velocity_field(), &NormSpec::new(2.0, NormKind::W1rVolume)?, m)?
        + error_norm(&r.solution.pressure_field(), &NormSpec::new(2.0, NormKind::LrVolume)?, m)?)
}

fn uniform_flow(nu: f64) -> StokesProblem {
    let mut p = StokesProblem::homogeneous(nu);
    p.inflow_g = vector_fn(|_| [1.0, 0.0]);
    p
}

fn zero_data() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (_, m) in meshes() {
        let r = solve(&m, &StokesProblem::homogeneous(1.0), &SolverConfig::default())?;
        worst = worst.max(solution_norm(&r)?);
    }
    outcome(worst <= 1e-10, format!("max ||u||+||p|| = {worst:.2e} over 3 meshes"))
}

fn constant_flow() -> Result<Outcome> {
    let (mut du, mut dp, mut tr): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for m in [generate_structured(&strip(), 8, 4)?, generate_structured(&curved(), 6, 3)?] {
        let r = solve(&m, &uniform_flow(0.7), &SolverConfig::default())?;
        for v in &r.solution.velocity {
            du = du.max((v[0] - 1.0).abs()).max(v[1].abs());
        }
        dp = r.solution.pressure.iter().fold(dp, |a, p| a.max(p.abs()));
        tr = tr.max(r.traction_residual);
    }
    outcome(
        du <= 1e-10 && dp <= 1e-10 && tr <= 1e-10,
        format!("max |u-(1,0)| = {du:.2e}, max |p| = {dp:.2e}, traction residual = {tr:.2e}"),
    )
}

fn sine_study() -> Result<cascade_stokes::verify::StudyTable> {
    let g = strip();
    let case = make_case("sine", 1.0, &g)?;
    convergence_study(&case, &strip_levels(&g, &[6, 12, 24, 48])?, &[2.0], &SolverConfig::default())
}

fn mms_rates(table: &cascade_stokes::verify::StudyTable) -> Result<Outcome> {
    let ru = *table.rates(2.0, |r| r.velocity_w1r).last().unwrap();
    let rp = *table.rates(2.0, |r| r.pressure_lr).last().unwrap();
    let finest = table.rows_for(2.0).last().unwrap().triangles;
    outcome(
        (1.8..=2.2).contains(&ru) && (1.7..=2.3).contains(&rp),
        format!("W1,2 velocity rate {ru:.3}, L2 pressure rate {rp:.3}, finest {finest} triangles"),
    )
}

fn flux_identity() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut solves = 0;
    let mut check = |m: &Mesh, p: &StokesProblem| -> Result<()> {
        let r = solve(m, p, &SolverConfig::default())?;
        worst = worst.max(r.flux_defect());
        solves += 1;
        Ok(())
    };
    let reverse = {
        let mut p = StokesProblem::homogeneous(0.5);
        // Net inflow 0.2 with strong backflow over half the period.
        p.inflow_g = vector_fn(|x: Point| [0.2 + 1.5 * (2.0 * PI * x[1]).cos(), 0.3 * (2.0 * PI * x[1]).sin()]);
        p.outflow_h = vector_fn(|x: Point| [-0.4 + x[1], 0.1]);
        p.forcing = Forcing::vector(|x: Point| [-(x[0] * x[1]), 0.5]);
        p
    };
    for (_, m) in meshes() {
        check(&m, &uniform_flow(1.0))?;
        check(&m, &reverse)?;
        check(&m, &RandomData::new(11, 1.0, 2.0).problem(0.8))?;
    }
    let g = strip();
    check(&generate_structured(&g, 12, 6)?, &make_case("sine", 1.0, &g)?.problem())?;
    outcome(worst <= 1e-9, format!("max |flux_out - flux_in| / max(1, |flux_in|) = {worst:.2e} over {solves} solves"))
}

fn lift_invariants() -> Result<Outcome> {
    let data: Vec<(&str, Box<dyn Fn(Point) -> [f64; 2] + Sync>)> = vec![
        ("constant", Box::new(|_| [1.0, 0.5])),
        ("sine", Box::new(|x: Point| [(2.0 * PI * x[1]).sin(), 0.0])),
        ("random", {
            let r = RandomData::new(3, 1.0, 2.0);
            Box::new(move |x| r.g(x))
        }),
    ];
    let mut all = true;
    let mut worst_div: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    for (_, m) in meshes() {
        for (_, g) in &data {
            let inv = build_lift(&m, g.as_ref())?.invariants(&m, g.as_ref(), 2.0)?;
            all &= inv.passes(1e-10);
            worst_div = worst_div.max(inv.weak_divergence);
            worst_trace = worst_trace.max(inv.inflow_trace).max(inv.wall_trace).max(inv.outflow_trace);
        }
    }
    // Linearity.
    let m = generate_mesh(&bladed(), 0.1, MeshKind::Auto)?;
    let (a, b) = (0.7, -1.3);
    let (g1, g2) = (&data[1].1, &data[2].1);
    let l1 = build_lift(&m, g1.as_ref())?;
    let l2 = build_lift(&m, g2.as_ref())?;
    let combo = |x: Point| {
        let (u, v) = (g1(x), g2(x));
        [a * u[0] + b * v[0], a * u[1] + b * v[1]]
    };
    let l12 = build_lift(&m, &combo)?;
    let lin = l12
        .velocity
        .iter()
        .zip(l1.velocity.iter().zip(&l2.velocity))
        .map(|(w, (u, v))| (w[0] - a * u[0] - b * v[0]).abs().max((w[1] - a * u[1] - b * v[1]).abs()))
        .fold(0.0, f64::max);
    outcome(
        all && lin <= 1e-8,
        format!("9 lifts pass: {all}; max trace residual {worst_trace:.2e}, max weak div {worst_div:.2e}, linearity {lin:.2e}"),
    )
}

fn divsolve_invariants() -> Result<Outcome> {
    let data = RandomData::new(5, 1.0, 2.0);
    let f = |x: Point| data.f(x);
    let (mut res, mut trace, mut mean): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (geom, m) in [(strip(), generate_structured(&strip(), 8, 4)?), (bladed(), generate_mesh(&bladed(), 0.1, MeshKind::Auto)?)] {
        let cut = CutoffProfile::for_geometry(&geom, m.h)?;
        let pot = build_outflow_free_potential(&m, f, &cut)?;
        let r = pot.weak_divergence_residual(&m, f)?;
        res = res.max(r[0]).max(r[1]);
        trace = trace.max(pot.outflow_trace_dofs(&m));
        mean = mean.max(pot.mean_defect[0]).max(pot.mean_defect[1]);
    }
    // Forcing-mode equivalence on the manufactured sine data.
    let g = strip();
    let case = make_case("sine", 1.0, &g)?;
    let mut gaps = Vec::new();
    for n2 in [4, 8, 16] {
        let m = generate_structured(&g, 2 * n2, n2)?;
        let vector = solve(&m, &case.problem(), &SolverConfig::default())?;
        let cut = CutoffProfile::for_geometry(&g, m.h)?;
        let pot = Arc::new(build_outflow_free_potential(&m, |x| case.f(x), &cut)?);
        let mut tensor_problem = case.problem();
        tensor_problem.forcing = pot.forcing();
        let tensor = solve(&m, &tensor_problem, &SolverConfig::default())?;
        let (a, b) = (vector.solution.velocity_field(), tensor.solution.velocity_field());
        gaps.push(error_norm(&Difference(&a, &b), &NormSpec::new(2.0, NormKind::W1rVolume)?, &m)?);
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    outcome(
        res <= 1e-9 && trace == 0.0 && mean <= 1e-12 && decreasing,
        format!(
            "weak div residual {res:.2e}, outflow trace {trace:e}, mean defect {mean:.2e}, mode gap {}",
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>().join(" > ")
        ),
    )
}

fn pressure_constant() -> Result<Outcome> {
    let m = generate_structured(&strip(), 8, 4)?;
    let p = uniform_flow(1.0);
    let r = solve(&m, &p, &SolverConfig::default())?;
    let c = recover_pressure_constant(&r.solution.with_pressure_shift(3.0), &p);
    outcome((c - 3.0).abs() <= 1e-9, format!("recovered constant {c:.12} (unshifted {:.2e})", r.pressure_constant))
}

fn traction_convergence(table: &cascade_stokes::verify::StudyTable) -> Result<Outcome> {
    let res: Vec<f64> = table.rows_for(2.0).iter().map(|r| r.traction_residual).collect();
    let monotone = res.windows(2).all(|w| w[1] < w[0]);
    let rate = *table.rates(2.0, |r| r.traction_residual).last().unwrap();
    outcome(
        monotone && rate >= 0.5,
        format!("residuals {}, final rate {rate:.3}", res.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(" > ")),
    )
}

fn stability() -> Result<Outcome> {
    let meshes = strip_levels(&strip(), &[4, 8, 16])?;
    let rs = [1.5, 2.0, 4.0];
    let table = stability_probe(&meshes, 1.0, 10, 2024, &rs, &SolverConfig::default())?;
    let mut pass = true;
    let mut parts = Vec::new();
    for r in rs {
        let (c0, c2) = (table.max_ratio(0, r), table.max_ratio(2, r));
        pass &= c2.is_finite() && c2 <= 2.0 * c0;
        parts.push(format!("r={r}: {c0:.3} -> {c2:.3}"));
    }
    outcome(pass, parts.join(", "))
}

fn seminorm_extension() -> Result<Outcome> {
    let w = |s: f64| (2.0 * PI * s).sin();
    let coarse = periodic_extension_check(&w, 1.0, 2.0, 16)?;
    let fine = periodic_extension_check(&w, 1.0, 2.0, 32)?;
    let rel = (coarse.ratio - fine.ratio).abs() / fine.ratio;
    outcome(fine.ratio.is_finite() && rel <= 0.01, format!("ratio {:.6} vs {:.6} (relative gap {rel:.2e})", coarse.ratio, fine.ratio))
}

fn linearity() -> Result<Outcome> {
    let m = generate_mesh(&bladed(), 0.12, MeshKind::Auto)?;
    let (d1, d2) = (RandomData::new(101, 1.0, 2.0), RandomData::new(202, 1.0, 2.0));
    let (a, b) = (0.7, -1.3);
    let nu = 0.9;
    let mix = move |u: [f64; 2], v: [f64; 2]| [a * u[0] + b * v[0], a * u[1] + b * v[1]];
    let (p1, p2) = (d1.problem(nu), d2.problem(nu));
    let combined = {
        let (f1, f2, g1, g2, h1, h2) = (d1.clone(), d2.clone(), d1.clone(), d2.clone(), d1, d2);
        StokesProblem::new(
            nu,
            Forcing::vector(move |p| mix(f1.f(p), f2.f(p))),
            vector_fn(move |p| mix(g1.g(p), g2.g(p))),
            vector_fn(move |p| mix(h1.h(p), h2.h(p))),
        )
    };
    let cfg = SolverConfig::default();
    let (r1, r2, r12) = (solve(&m, &p1, &cfg)?, solve(&m, &p2, &cfg)?, solve(&m, &combined, &cfg)?);
    let mut worst: f64 = 0.0;
    for i in 0..r12.solution.velocity.len() {
        let e = mix(r1.solution.velocity[i], r2.solution.velocity[i]);
        worst = worst.max((r12.solution.velocity[i][0] - e[0]).abs()).max((r12.solution.velocity[i][1] - e[1]).abs());
    }
    for i in 0..r12.solution.pressure.len() {
        worst = worst.max((r12.solution.pressure[i] - a * r1.solution.pressure[i] - b * r2.solution.pressure[i]).abs());
    }
    outcome(worst <= 1e-8, format!("max superposition error {worst:.2e}"))
}

fn determinism() -> Result<Outcome> {
    let m = generate_mesh(&bladed(), 0.12, MeshKind::Auto)?;
    let p = RandomData::new(7, 1.0, 2.0).problem(1.0);
    let run = || -> Result<String> {
        let r = solve(&m, &p, &SolverConfig::default())?;
        Ok(report_key_values(&r) + &coefficients_csv(&r.solution))
    };
    let (a, b, c) = (run()?, run()?, run()?);
    let remesh = generate_mesh(&bladed(), 0.12, MeshKind::Auto)? == m;
    outcome(a == b && b == c && remesh, format!("3 runs byte-identical: {}, mesh regeneration identical: {remesh}", a == b && b == c))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let table = sine_study();
    let study = |f: fn(&cascade_stokes::verify::StudyTable) -> Result<Outcome>| -> Result<Outcome> {
        match &table {
            Ok(t) => f(t),
            Err(e) => Err(cascade_stokes::Error::InvalidArgument(format!("sine study failed: {e}"))),
        }
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Outcome>>)> = vec![
        ("zero-data uniqueness", Box::new(zero_data)),
        ("constant-flow exactness", Box::new(constant_flow)),
        ("manufactured convergence", Box::new(move || study(mms_rates))),
        ("flux identity", Box::new(flux_identity)),
        ("lift invariants", Box::new(lift_invariants)),
        ("tensor potential invariants", Box::new(divsolve_invariants)),
        ("pressure constant", Box::new(pressure_constant)),
        ("traction residual convergence", Box::new(move || study(traction_convergence))),
        ("empirical stability", Box::new(stability)),
        ("periodic-extension seminorm", Box::new(seminorm_extension)),
        ("linearity", Box::new(linearity)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {}  {detail}  [{:.1}s]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
