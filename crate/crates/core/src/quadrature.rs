//! Quadrature on triangles and intervals.

use crate::mesh::Mesh;
use crate::{Error, Point, Result};

/// Quadrature rule on the reference triangle: barycentric points and weights
/// summing to one (multiply by the element area).
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

fn orbit3(a: f64, w: f64, pts: &mut Vec<[f64; 3]>, ws: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[b, a, a], [a, b, a], [a, a, b]] {
        pts.push(p);
        ws.push(w);
    }
}

fn orbit6(a: f64, b: f64, w: f64, pts: &mut Vec<[f64; 3]>, ws: &mut Vec<f64>) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        pts.push(p);
        ws.push(w);
    }
}

impl TriangleRule {
    /// Symmetric rule exact for polynomials of total degree `order`
    /// (2, 4 or 6; Strang–Fix / Dunavant).
    pub fn new(order: usize) -> Result<Self> {
        let (mut pts, mut ws) = (Vec::new(), Vec::new());
        match order {
            2 => orbit3(1.0 / 6.0, 1.0 / 3.0, &mut pts, &mut ws),
            4 => {
                orbit3(0.445_948_490_915_965, 0.223_381_589_678_011, &mut pts, &mut ws);
                orbit3(0.091_576_213_509_771, 0.109_951_743_655_322, &mut pts, &mut ws);
            }
            6 => {
                orbit3(0.249_286_745_170_910, 0.116_786_275_726_379, &mut pts, &mut ws);
                orbit3(0.063_089_014_491_502, 0.050_844_906_370_207, &mut pts, &mut ws);
                orbit6(0.053_145_049_844_817, 0.310_352_451_033_784, 0.082_851_075_618_374, &mut pts, &mut ws);
            }
            _ => return Err(Error::QuadratureFailure(format!("no triangle rule of order {order}"))),
        }
        // Tabulated weights carry 15 digits; renormalise so constants integrate exactly.
        let s: f64 = ws.iter().sum();
        ws.iter_mut().for_each(|w| *w /= s);
        Ok(Self { points: pts, weights: ws })
    }
}

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule, exact for degree `2n - 1`. Nodes by Newton iteration on
    /// the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = 0.5 * (1.0 - x);
            points[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { points, weights }
    }
}

/// Integrates `integrand` over the mesh with a triangle rule of the given
/// order, summing per-triangle contributions in triangle order.
pub fn quadrature_integrate<F>(mesh: &Mesh, integrand: F, order: usize) -> Result<f64>
where
    F: Fn(Point) -> f64,
{
    let rule = TriangleRule::new(order)?;
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle_points(t);
        let area = mesh.triangle_area(t);
        let mut s = 0.0;
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let x = [l[0] * a[0] + l[1] * b[0] + l[2] * c[0], l[0] * a[1] + l[1] * b[1] + l[2] * c[1]];
            s += w * integrand(x);
        }
        total += area * s;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // Exact moments on the reference triangle: a! b! / (a + b + 2)!.
    fn exact_moment(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn triangle_rules_exact_to_their_order() {
        for order in [2usize, 4, 6] {
            let rule = TriangleRule::new(order).unwrap();
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(l, w)| w * 0.5 * l[1].powi(a as i32) * l[2].powi(b as i32))
                        .sum();
                    let e = exact_moment(a, b);
                    assert!((q - e).abs() < 1e-14, "order {order}: x^{a} y^{b}: {q} vs {e}");
                }
            }
        }
    }

    #[test]
    fn triangle_rule_rejects_unknown_order() {
        assert!(TriangleRule::new(5).is_err());
    }

    #[test]
    fn gauss_rule_exact() {
        for n in 1..12 {
            let g = GaussRule::new(n);
            for k in 0..(2 * n) as i32 {
                let q: f64 = g.points.iter().zip(&g.weights).map(|(x, w)| w * x.powi(k)).sum();
                assert!((q - 1.0 / (k + 1) as f64).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }
}
