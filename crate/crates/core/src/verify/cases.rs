//! Manufactured solutions built from a separable stream function
//! `psi = a(x1) b(x2)`, so `u = (-d2 psi, d1 psi)` is divergence free by
//! construction. The pressure is separable as well: `p = c(x1) e(x2)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{vector_fn, Forcing, StokesProblem};
use crate::geometry::CascadeGeometry;
use crate::verify::norms::ExactField;
use crate::{Error, Mat2, Point, Result};

/// Value and first three derivatives of a function of one variable.
pub type Jet = Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>;

pub const CASE_IDS: [&str; 3] = ["uniform", "sine", "corner-compatible"];

fn constant(c: f64) -> Jet {
    Arc::new(move |_| [c, 0.0, 0.0, 0.0])
}

fn linear(slope: f64) -> Jet {
    Arc::new(move |x| [slope * x, slope, 0.0, 0.0])
}

/// `amp * cos(w (x - shift))`.
fn cosine(amp: f64, w: f64, shift: f64) -> Jet {
    Arc::new(move |x| {
        let (s, c) = (w * (x - shift)).sin_cos();
        [amp * c, -amp * w * s, -amp * w * w * c, amp * w * w * w * s]
    })
}

/// `(1 - cos(w (x - shift)))^2`: vanishes to third order at the shift.
fn cosine_bump(w: f64, shift: f64) -> Jet {
    Arc::new(move |x| {
        let (s, c) = (w * (x - shift)).sin_cos();
        [
            (1.0 - c) * (1.0 - c),
            2.0 * w * (1.0 - c) * s,
            2.0 * w * w * (s * s + c - c * c),
            2.0 * w * w * w * s * (4.0 * c - 1.0),
        ]
    })
}

fn binomial(n: u64, k: u64) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
}

/// Coefficients of the C^n smoothstep of degree `2n + 1`.
fn smoothstep_coefficients(n: u64) -> Vec<f64> {
    let mut c = vec![0.0; (2 * n + 2) as usize];
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[(n + 1 + k) as usize] = sign * binomial(n + k, k) * binomial(2 * n + 1, n - k);
    }
    c
}

fn poly_jet(coef: &[f64], t: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (d, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, c) in coef.iter().enumerate().skip(d) {
            let falling: f64 = (0..d).map(|j| (k - j) as f64).product();
            s += c * falling * t.powi((k - d) as i32);
        }
        *o = s;
    }
    out
}

/// 1 outside `[0.1 d, 0.9 d]`, 0 on `[0.3 d, 0.7 d]`, C^4 transitions.
fn blade_window(d: f64) -> Jet {
    let coef = smoothstep_coefficients(4);
    Arc::new(move |x| {
        let w = 0.2 * d;
        let scale = |j: [f64; 4], sign: f64| {
            [j[0], sign * j[1] / w, j[2] / (w * w), sign * j[3] / (w * w * w)]
        };
        if x <= 0.1 * d || x >= 0.9 * d {
            [1.0, 0.0, 0.0, 0.0]
        } else if x < 0.3 * d {
            // Mirrored transition: back to 1 toward the inflow.
            let j = scale(poly_jet(&coef, (0.3 * d - x) / w), -1.0);
            [j[0], j[1], j[2], j[3]]
        } else if x > 0.7 * d {
            scale(poly_jet(&coef, (x - 0.7 * d) / w), 1.0)
        } else {
            [0.0; 4]
        }
    })
}

/// Closed-form Stokes solution with its data.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub id: String,
    pub nu: f64,
    pub tau: f64,
    pub d: f64,
    /// `g` vanishes near the inflow corners and `u` vanishes near the blade.
    pub corner_compatible: bool,
    psi_1: Jet,
    psi_2: Jet,
    p_1: Jet,
    p_2: Jet,
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase").field("id", &self.id).field("nu", &self.nu).finish_non_exhaustive()
    }
}

/// Builds one of [`CASE_IDS`] on `geometry` with viscosity `nu`.
pub fn make_case(id: &str, nu: f64, geometry: &CascadeGeometry) -> Result<ManufacturedCase> {
    let (tau, d) = (geometry.tau(), geometry.d());
    let w = 2.0 * PI / tau;
    let y0 = geometry.corners()[0][1];
    let (psi_1, psi_2, p_1, p_2, corner) = match id {
        "uniform" => (constant(1.0), linear(-1.0), constant(0.0), constant(0.0), false),
        "sine" => (constant(1.0), cosine(1.0 / w, w, 0.0), constant(1.0), cosine(1.0, w, 0.0), false),
        "corner-compatible" => (blade_window(d), cosine_bump(w, y0), constant(1.0), cosine(0.5, w, y0), true),
        other => return Err(Error::UnknownCase(other.to_string())),
    };
    Ok(ManufacturedCase { id: id.to_string(), nu, tau, d, corner_compatible: corner, psi_1, psi_2, p_1, p_2 })
}

impl ManufacturedCase {
    pub fn u(&self, x: Point) -> [f64; 2] {
        let (a, b) = ((self.psi_1)(x[0]), (self.psi_2)(x[1]));
        [-a[0] * b[1], a[1] * b[0]]
    }

    /// `g[c][j] = d_j u_c`.
    pub fn grad_u(&self, x: Point) -> Mat2 {
        let (a, b) = ((self.psi_1)(x[0]), (self.psi_2)(x[1]));
        [[-a[1] * b[1], -a[0] * b[2]], [a[2] * b[0], a[1] * b[1]]]
    }

    pub fn laplace_u(&self, x: Point) -> [f64; 2] {
        let (a, b) = ((self.psi_1)(x[0]), (self.psi_2)(x[1]));
        [-(a[2] * b[1] + a[0] * b[3]), a[3] * b[0] + a[1] * b[2]]
    }

    pub fn p(&self, x: Point) -> f64 {
        (self.p_1)(x[0])[0] * (self.p_2)(x[1])[0]
    }

    pub fn grad_p(&self, x: Point) -> [f64; 2] {
        let (a, b) = ((self.p_1)(x[0]), (self.p_2)(x[1]));
        [a[1] * b[0], a[0] * b[1]]
    }

    /// `f = -nu Δu + ∇p`.
    pub fn f(&self, x: Point) -> [f64; 2] {
        let (l, g) = (self.laplace_u(x), self.grad_p(x));
        [-self.nu * l[0] + g[0], -self.nu * l[1] + g[1]]
    }

    /// Inflow data `u` on `x1 = 0`.
    pub fn g(&self, x: Point) -> [f64; 2] {
        self.u(x)
    }

    /// Outflow traction `-nu du/dn + p n` with `n = e1`.
    pub fn h(&self, x: Point) -> [f64; 2] {
        let gu = self.grad_u(x);
        let p = self.p(x);
        [-self.nu * gu[0][0] + p, -self.nu * gu[1][0]]
    }

    pub fn problem(&self) -> StokesProblem {
        let (c1, c2, c3) = (self.clone(), self.clone(), self.clone());
        StokesProblem::new(
            self.nu,
            Forcing::vector(move |x| c1.f(x)),
            vector_fn(move |x| c2.g(x)),
            vector_fn(move |x| c3.h(x)),
        )
    }

    pub fn velocity_field(&self) -> ExactField<impl Fn(Point) -> [f64; 2] + Sync + '_, impl Fn(Point) -> Mat2 + Sync + '_> {
        ExactField { value: move |x| self.u(x), gradient: move |x| self.grad_u(x) }
    }

    pub fn pressure_field(&self) -> ExactField<impl Fn(Point) -> [f64; 2] + Sync + '_, impl Fn(Point) -> Mat2 + Sync + '_> {
        ExactField {
            value: move |x| [self.p(x), 0.0],
            gradient: move |x| {
                let g = self.grad_p(x);
                [[g[0], g[1]], [0.0, 0.0]]
            },
        }
    }

    /// Compares `f`, `h` and `div u` with central finite differences of the
    /// closed-form `u` and `p` at `n` seeded random points. Returns the largest
    /// relative discrepancy; fails above `1e-6`.
    pub fn oracle_check(&self, seed: u64, n: usize) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = 1e-4;
        let sh = |x: Point, j: usize, k: f64| if j == 0 { [x[0] + k * e, x[1]] } else { [x[0], x[1] + k * e] };
        // Fourth-order central differences.
        let d1 = |g: &dyn Fn(Point) -> f64, x: Point, j: usize| {
            (-g(sh(x, j, 2.0)) + 8.0 * g(sh(x, j, 1.0)) - 8.0 * g(sh(x, j, -1.0)) + g(sh(x, j, -2.0))) / (12.0 * e)
        };
        let d2 = |g: &dyn Fn(Point) -> f64, x: Point, j: usize| {
            (-g(sh(x, j, 2.0)) + 16.0 * g(sh(x, j, 1.0)) - 30.0 * g(x) + 16.0 * g(sh(x, j, -1.0)) - g(sh(x, j, -2.0)))
                / (12.0 * e * e)
        };
        let mut worst: f64 = 0.0;
        for _ in 0..n {
            let x = [rng.gen_range(0.0..self.d), rng.gen_range(0.0..self.tau)];
            let uc = |c: usize| move |y: Point| self.u(y)[c];
            let du = |c: usize, j: usize| d1(&uc(c), x, j);
            let lap = |c: usize| d2(&uc(c), x, 0) + d2(&uc(c), x, 1);
            let dp = |j: usize| d1(&|y| self.p(y), x, j);
            let f_fd = [-self.nu * lap(0) + dp(0), -self.nu * lap(1) + dp(1)];
            let h_fd = [-self.nu * du(0, 0) + self.p(x), -self.nu * du(1, 0)];
            let div = du(0, 0) + du(1, 1);
            let (f, h) = (self.f(x), self.h(x));
            let scale = 1.0 + f[0].abs().max(f[1].abs());
            for c in 0..2 {
                worst = worst.max((f[c] - f_fd[c]).abs() / scale);
                worst = worst.max((h[c] - h_fd[c]).abs() / (1.0 + h[c].abs()));
            }
            worst = worst.max(div.abs());
            let periodic = self.u([x[0], x[1] + self.tau]);
            let u = self.u(x);
            worst = worst.max((periodic[0] - u[0]).abs()).max((periodic[1] - u[1]).abs());
            worst = worst.max((self.p([x[0], x[1] + self.tau]) - self.p(x)).abs());
        }
        if worst > 1e-6 {
            return Err(Error::InvariantViolation(format!(
                "manufactured case `{}` fails the finite-difference check: {worst:e}",
                self.id
            )));
        }
        Ok(worst)
    }
}

/// Seeded smooth data triple `(f, g, h)`: low-order trigonometric polynomials,
/// `tau`-periodic in `x2`, so the inflow corners always match.
#[derive(Clone, Debug)]
pub struct RandomData {
    f_modes: Vec<([f64; 2], f64, f64, f64)>,
    g_modes: Vec<([f64; 2], f64, f64)>,
    h_modes: Vec<([f64; 2], f64, f64)>,
    tau: f64,
    d: f64,
}

impl RandomData {
    pub fn new(seed: u64, tau: f64, d: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp = |rng: &mut ChaCha8Rng| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let f_modes = (0..4)
            .map(|_| {
                let a = amp(&mut rng);
                (a, rng.gen_range(0..3) as f64, rng.gen_range(0..3) as f64, rng.gen_range(0.0..2.0 * PI))
            })
            .collect();
        let g_modes = (0..3).map(|_| (amp(&mut rng), rng.gen_range(0..3) as f64, rng.gen_range(0.0..2.0 * PI))).collect();
        let h_modes = (0..3).map(|_| (amp(&mut rng), rng.gen_range(0..3) as f64, rng.gen_range(0.0..2.0 * PI))).collect();
        Self { f_modes, g_modes, h_modes, tau, d }
    }

    pub fn f(&self, x: Point) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (a, m, n, ph) in &self.f_modes {
            let v = (2.0 * PI * m * x[1] / self.tau + PI * n * x[0] / self.d + ph).cos();
            out[0] += a[0] * v;
            out[1] += a[1] * v;
        }
        out
    }

    fn trig(modes: &[([f64; 2], f64, f64)], tau: f64, y: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (a, m, ph) in modes {
            let v = (2.0 * PI * m * y / tau + ph).cos();
            out[0] += a[0] * v;
            out[1] += a[1] * v;
        }
        out
    }

    pub fn g(&self, x: Point) -> [f64; 2] {
        Self::trig(&self.g_modes, self.tau, x[1])
    }

    pub fn h(&self, x: Point) -> [f64; 2] {
        Self::trig(&self.h_modes, self.tau, x[1])
    }

    pub fn problem(&self, nu: f64) -> StokesProblem {
        let (a, b, c) = (self.clone(), self.clone(), self.clone());
        StokesProblem::new(
            nu,
            Forcing::vector(move |x| a.f(x)),
            vector_fn(move |x| b.g(x)),
            vector_fn(move |x| c.h(x)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, ShapeParams};

    fn strip() -> CascadeGeometry {
        build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap()
    }

    #[test]
    fn smoothstep_degree_nine() {
        let c = smoothstep_coefficients(4);
        assert_eq!(c, vec![0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0]);
    }

    #[test]
    fn all_cases_pass_the_oracle() {
        let g = build_geometry(&ShapeParams::strip(1.0, 2.0).with_lower_lift(0.2)).unwrap();
        for id in CASE_IDS {
            for nu in [1.0, 0.3] {
                make_case(id, nu, &g).unwrap().oracle_check(7, 20).unwrap();
            }
        }
    }

    #[test]
    fn uniform_case_data() {
        let c = make_case("uniform", 1.0, &strip()).unwrap();
        assert_eq!(c.u([0.3, 0.7]), [1.0, 0.0]);
        assert_eq!(c.f([0.3, 0.7]), [0.0, 0.0]);
        assert_eq!(c.h([2.0, 0.7]), [0.0, 0.0]);
    }

    #[test]
    fn unknown_case_rejected() {
        assert!(matches!(make_case("vortex", 1.0, &strip()), Err(Error::UnknownCase(_))));
    }

    #[test]
    fn corner_case_vanishes_on_blade_band_and_corners() {
        let c = make_case("corner-compatible", 1.0, &strip()).unwrap();
        assert_eq!(c.u([1.0, 0.4]), [0.0, 0.0]);
        let g = c.g([0.0, 1e-4]);
        assert!(g[0].abs() < 1e-6 && g[1].abs() < 1e-6);
    }

    #[test]
    fn blade_window_is_continuous() {
        let w = blade_window(2.0);
        for x in [0.2, 0.6, 1.4, 1.8] {
            let (a, b) = (w(x - 1e-9), w(x + 1e-9));
            for k in 0..4 {
                assert!((a[k] - b[k]).abs() < 1e-4, "x={x} k={k}: {a:?} {b:?}");
            }
        }
    }
}
