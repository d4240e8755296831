//! Fractional boundary seminorm
//!
//! ```text
//! <<w>>^r = ∫∫ |w(y) - w(z)|^r / |y - z|^r dy dz
//! ```
//!
//! over an interval, i.e. the `W^{1-1/r, r}` seminorm in one dimension.
//!
//! The interval is cut into panels at user breakpoints (mesh vertices for
//! discrete traces, so the integrand is smooth on every panel pair):
//! * distant pairs: tensor Gauss rule;
//! * a panel with itself: `2 ∫_0^L ∫_a^{b-s} F(z, z + s) dz ds`, which never
//!   touches the diagonal;
//! * neighbouring panels: geometric grading toward the shared point.

use crate::quadrature::GaussRule;
use crate::{Error, Result};

const GRADING_LEVELS: usize = 12;
const GRADING_RATIO: f64 = 0.25;

fn kernel(wy: [f64; 2], wz: [f64; 2], y: f64, z: f64, r: f64) -> f64 {
    let num = ((wy[0] - wz[0]).powi(2) + (wy[1] - wz[1]).powi(2)).sqrt();
    if num == 0.0 {
        return 0.0;
    }
    (num / (y - z).abs()).powf(r)
}

fn map(rule: &GaussRule, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    rule.points.iter().zip(&rule.weights).map(move |(x, w)| (a + (b - a) * x, w * (b - a)))
}

fn tensor<F: Fn(f64) -> [f64; 2]>(w: &F, rule: &GaussRule, p: (f64, f64), q: (f64, f64), r: f64) -> f64 {
    let mut s = 0.0;
    for (y, wy) in map(rule, p.0, p.1) {
        let vy = w(y);
        for (z, wz) in map(rule, q.0, q.1) {
            s += wy * wz * kernel(vy, w(z), y, z, r);
        }
    }
    s
}

fn self_pair<F: Fn(f64) -> [f64; 2]>(w: &F, rule: &GaussRule, a: f64, b: f64, r: f64) -> f64 {
    let len = b - a;
    let mut s = 0.0;
    for (h, wh) in map(rule, 0.0, len) {
        for (z, wz) in map(rule, a, b - h) {
            s += wh * wz * kernel(w(z), w(z + h), z, z + h, r);
        }
    }
    2.0 * s
}

/// Panels `[a, c]` and `[c, b]` sharing the point `c`; counted once.
fn neighbour_pair<F: Fn(f64) -> [f64; 2]>(w: &F, rule: &GaussRule, a: f64, c: f64, b: f64, r: f64) -> f64 {
    let left = graded(a, c, true);
    let right = graded(c, b, false);
    let mut s = 0.0;
    for p in &left {
        for q in &right {
            s += tensor(w, rule, *p, *q, r);
        }
    }
    s
}

/// Geometric subdivision of `[a, b]` refined toward `b` (`toward_end`) or `a`.
fn graded(a: f64, b: f64, toward_end: bool) -> Vec<(f64, f64)> {
    let len = b - a;
    let mut cuts = vec![0.0];
    let mut t = 1.0;
    for _ in 0..GRADING_LEVELS {
        t *= GRADING_RATIO;
        cuts.push(t);
    }
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|c| {
            if toward_end {
                (b - c[1] * len, b - c[0] * len)
            } else {
                (a + c[0] * len, a + c[1] * len)
            }
        })
        .collect()
}

/// `<<w>>^r` over `[breaks[0], breaks[last]]` (the seminorm raised to `r`).
pub fn gagliardo_integral<F: Fn(f64) -> [f64; 2]>(w: &F, breaks: &[f64], r: f64, n_gauss: usize) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::InvalidArgument(format!("seminorm exponent must exceed 1, got {r}")));
    }
    if breaks.len() < 2 || breaks.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::InvalidArgument("panel breakpoints must be strictly increasing".into()));
    }
    let rule = GaussRule::new(n_gauss);
    let n = breaks.len() - 1;
    let panel = |i: usize| (breaks[i], breaks[i + 1]);
    let mut total = 0.0;
    for i in 0..n {
        let (a, b) = panel(i);
        total += self_pair(w, &rule, a, b, r);
        if i + 1 < n {
            total += 2.0 * neighbour_pair(w, &rule, a, b, breaks[i + 2], r);
        }
        for j in i + 2..n {
            total += 2.0 * tensor(w, &rule, panel(i), panel(j), r);
        }
    }
    Ok(total)
}

/// `<<w>>` (r-th root of [`gagliardo_integral`]).
pub fn gagliardo_seminorm<F: Fn(f64) -> [f64; 2]>(w: &F, breaks: &[f64], r: f64, n_gauss: usize) -> Result<f64> {
    Ok(gagliardo_integral(w, breaks, r, n_gauss)?.powf(1.0 / r))
}

pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

/// Result of the periodic-extension check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtensionRatio {
    /// `<<w>>^r` of the periodic extension over two periods.
    pub lhs: f64,
    /// `<<w>>^r` over one period.
    pub rhs: f64,
    /// `lhs / rhs`, defined as 1 when both vanish.
    pub ratio: f64,
}

/// Compares the seminorm of the periodic extension of `w` over `[0, 2 tau]`
/// with the seminorm over `[0, tau]`. `panels` per period.
pub fn periodic_extension_check<F: Fn(f64) -> f64>(
    w: &F,
    tau: f64,
    r: f64,
    panels: usize,
) -> Result<ExtensionRatio> {
    let (w0, w1) = (w(0.0), w(tau));
    if (w0 - w1).abs() > 1e-10 * (1.0 + w0.abs()) {
        return Err(Error::PeriodMismatch(w0, w1));
    }
    let ext = |s: f64| [w(s.rem_euclid(tau)), 0.0];
    let one = |s: f64| [w(s), 0.0];
    let lhs = gagliardo_integral(&ext, &uniform_breaks(0.0, 2.0 * tau, 2 * panels), r, 8)?;
    let rhs = gagliardo_integral(&one, &uniform_breaks(0.0, tau, panels), r, 8)?;
    let ratio = if lhs == 0.0 && rhs == 0.0 { 1.0 } else { lhs / rhs };
    Ok(ExtensionRatio { lhs, rhs, ratio })
}

/// Same check from equally spaced samples `w(k tau / n)`, `k = 0..=n`,
/// interpolated linearly.
pub fn periodic_extension_from_samples(samples: &[f64], tau: f64, r: f64) -> Result<ExtensionRatio> {
    let n = samples.len().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidArgument("need at least two samples".into())
    })?;
    let w = |s: f64| {
        let x = (s / tau * n as f64).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let t = x - k as f64;
        (1.0 - t) * samples[k] + t * samples[k + 1]
    };
    periodic_extension_check(&w, tau, r, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_has_unit_integrand() {
        let v = gagliardo_integral(&|s| [s, 0.0], &uniform_breaks(0.0, 1.0, 5), 2.0, 6).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn constant_function_vanishes() {
        let v = gagliardo_seminorm(&|_| [3.0, -1.0], &uniform_breaks(0.0, 2.0, 4), 3.0, 4).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn quadratic_matches_closed_form() {
        // w = s^2 on [0, 1], r = 2: integrand (y + z)^2, integral 7/6.
        let v = gagliardo_integral(&|s| [s * s, 0.0], &uniform_breaks(0.0, 1.0, 3), 2.0, 6).unwrap();
        assert!((v - 7.0 / 6.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn extension_of_constant_has_unit_ratio() {
        let e = periodic_extension_check(&|_| 2.0, 1.0, 2.0, 4).unwrap();
        assert_eq!(e.ratio, 1.0);
    }

    #[test]
    fn period_mismatch_detected() {
        assert!(matches!(
            periodic_extension_check(&|s| s, 1.0, 2.0, 4),
            Err(Error::PeriodMismatch(_, _))
        ));
    }
}
