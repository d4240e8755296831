use std::f64::consts::PI;
use std::path::Path;

use proptest::prelude::*;

use cascade_stokes::geometry::{build_geometry, ShapeParams};
use cascade_stokes::lift::build_lift;
use cascade_stokes::mesh::{generate_mesh, generate_structured, Mesh, MeshKind};
use cascade_stokes::solver::{solve, SolverConfig};
use cascade_stokes::verify::cases::RandomData;
use cascade_stokes::verify::gagliardo::{gagliardo_seminorm, uniform_breaks};
use cascade_stokes::verify::norms::{error_norm, ExactField, NormKind, NormSpec, Scaled};
use cascade_stokes::Point;

fn strip_mesh(n1: usize, n2: usize) -> Mesh {
    generate_structured(&build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap(), n1, n2).unwrap()
}

fn max_diff(a: &[[f64; 2]], b: &[[f64; 2]], c: &[[f64; 2]], (s, t): (f64, f64)) -> f64 {
    a.iter()
        .zip(b.iter().zip(c))
        .map(|(w, (u, v))| (w[0] - s * u[0] - t * v[0]).abs().max((w[1] - s * u[1] - t * v[1]).abs()))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_are_homogeneous(
        lambda in -5.0f64..5.0,
        r in 1.2f64..5.0,
        k in 1usize..4,
    ) {
        let mesh = strip_mesh(4, 3);
        let kk = k as f64;
        let u = ExactField {
            value: move |x: Point| [(2.0 * PI * kk * x[1]).sin() + x[0], x[0] * x[1]],
            gradient: move |x: Point| [[1.0, 2.0 * PI * kk * (2.0 * PI * kk * x[1]).cos()], [x[1], x[0]]],
        };
        for kind in [NormKind::LrVolume, NormKind::W1rVolume] {
            let spec = NormSpec::new(r, kind).unwrap();
            let base = error_norm(&u, &spec, &mesh).unwrap();
            let scaled = error_norm(&Scaled(lambda, &u), &spec, &mesh).unwrap();
            prop_assert!((scaled - lambda.abs() * base).abs() <= 1e-12 * (1.0 + base));
        }
    }

    #[test]
    fn mesh_text_round_trip(n1 in 1usize..6, n2 in 1usize..6, lift in -0.2f64..0.2) {
        let g = build_geometry(&ShapeParams::strip(1.0, 2.0).with_lower_lift(lift)).unwrap();
        let m = generate_structured(&g, n1, n2).unwrap();
        let back = Mesh::from_text(&m.to_text(), Path::new("mem")).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_text(), m.to_text());
    }

    #[test]
    fn seminorm_vanishes_exactly_on_constants(c in -3.0f64..3.0, amp in 0.01f64..2.0, r in 1.3f64..4.0) {
        let breaks = uniform_breaks(0.0, 1.0, 8);
        let flat = gagliardo_seminorm(&|_| [c, -c], &breaks, r, 6).unwrap();
        prop_assert_eq!(flat, 0.0);
        let wave = gagliardo_seminorm(&|s: f64| [c + amp * (2.0 * PI * s).cos(), 0.0], &breaks, r, 6).unwrap();
        prop_assert!(wave > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn lift_is_linear(seed in 0u64..1000, s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let mesh = strip_mesh(6, 4);
        let (a, b) = (RandomData::new(seed, 1.0, 2.0), RandomData::new(seed + 1, 1.0, 2.0));
        let la = build_lift(&mesh, &|x| a.g(x)).unwrap();
        let lb = build_lift(&mesh, &|x| b.g(x)).unwrap();
        let combo = |x: Point| {
            let (u, v) = (a.g(x), b.g(x));
            [s * u[0] + t * v[0], s * u[1] + t * v[1]]
        };
        let lab = build_lift(&mesh, &combo).unwrap();
        prop_assert!(max_diff(&lab.velocity, &la.velocity, &lb.velocity, (s, t)) <= 1e-10);
        prop_assert!((lab.flux - s * la.flux - t * lb.flux).abs() <= 1e-12);
    }

    #[test]
    fn solution_scales_with_data(seed in 0u64..1000, s in -3.0f64..3.0) {
        let mesh = generate_mesh(
            &build_geometry(&ShapeParams::strip(1.0, 2.0).with_lower_lift(0.1)).unwrap(),
            0.25,
            MeshKind::Unstructured,
        )
        .unwrap();
        let data = RandomData::new(seed, 1.0, 2.0);
        let base = data.problem(1.3);
        let (f, g, h) = (data.clone(), data.clone(), data);
        let scaled = cascade_stokes::assembly::StokesProblem::new(
            1.3,
            cascade_stokes::assembly::Forcing::vector(move |x| f.f(x).map(|v| s * v)),
            cascade_stokes::assembly::vector_fn(move |x| g.g(x).map(|v| s * v)),
            cascade_stokes::assembly::vector_fn(move |x| h.h(x).map(|v| s * v)),
        );
        let cfg = SolverConfig::default();
        let (r1, rs) = (solve(&mesh, &base, &cfg).unwrap(), solve(&mesh, &scaled, &cfg).unwrap());
        let zero = vec![[0.0; 2]; r1.solution.velocity.len()];
        prop_assert!(max_diff(&rs.solution.velocity, &r1.solution.velocity, &zero, (s, 0.0)) <= 1e-9);
        for (p, q) in rs.solution.pressure.iter().zip(&r1.solution.pressure) {
            prop_assert!((p - s * q).abs() <= 1e-9);
        }
    }
}
