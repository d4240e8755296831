//! Reference elements: affine triangle map, P1/P2 Lagrange bases and the
//! degree-1 Raviart–Thomas element.
//!
//! Local P2 node order: vertices 0, 1, 2, then midpoints of edges
//! (0,1), (1,2), (2,0).

use std::sync::OnceLock;

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use crate::Point;

/// Local vertex pairs of the three triangle edges, in counter-clockwise order.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

/// Affine map of a positively oriented triangle.
#[derive(Clone, Copy, Debug)]
pub struct AffineTriangle {
    pub vertices: [Point; 3],
    /// Twice the signed area.
    pub det: f64,
    /// Physical gradients of the barycentric coordinates.
    pub grad_lambda: [Point; 3],
}

impl AffineTriangle {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let grad_lambda = [
            [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
            [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
            [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
        ];
        Self { vertices, det, grad_lambda }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    pub fn point(&self, l: &[f64; 3]) -> Point {
        let v = &self.vertices;
        [
            l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
            l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
        ]
    }

    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let p0 = self.vertices[0];
        let g = &self.grad_lambda;
        let dx = [x[0] - p0[0], x[1] - p0[1]];
        let l1 = g[1][0] * dx[0] + g[1][1] * dx[1];
        let l2 = g[2][0] * dx[0] + g[2][1] * dx[1];
        [1.0 - l1 - l2, l1, l2]
    }

    /// Jacobian `[p1 - p0, p2 - p0]` (columns), row-major.
    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        let [p0, p1, p2] = self.vertices;
        [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]]
    }
}

/// P2 basis values at barycentric point `l`.
pub fn p2_values(l: &[f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Physical P2 basis gradients at barycentric point `l`.
pub fn p2_gradients(tri: &AffineTriangle, l: &[f64; 3]) -> [Point; 6] {
    let g = &tri.grad_lambda;
    let lin = |a: f64, u: Point, b: f64, v: Point| [a * u[0] + b * v[0], a * u[1] + b * v[1]];
    [
        lin(4.0 * l[0] - 1.0, g[0], 0.0, g[0]),
        lin(4.0 * l[1] - 1.0, g[1], 0.0, g[1]),
        lin(4.0 * l[2] - 1.0, g[2], 0.0, g[2]),
        lin(4.0 * l[0], g[1], 4.0 * l[1], g[0]),
        lin(4.0 * l[1], g[2], 4.0 * l[2], g[1]),
        lin(4.0 * l[2], g[0], 4.0 * l[0], g[2]),
    ]
}

/// Barycentric coordinates of the six P2 nodes.
pub const P2_NODES: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];

/// Gauss abscissae (on `[0, 1]`) of the two normal-flux degrees of freedom per edge.
pub fn rt_edge_points() -> [f64; 2] {
    let s = 3.0_f64.sqrt() / 6.0;
    [0.5 - s, 0.5 + s]
}

const RT_MONOMIALS: usize = 8;

// Monomial spanning set of RT1 on the reference triangle:
// P1^2 plus x * {x, y}.
fn rt_monomial(k: usize, x: f64, y: f64) -> Point {
    match k {
        0 => [1.0, 0.0],
        1 => [x, 0.0],
        2 => [y, 0.0],
        3 => [0.0, 1.0],
        4 => [0.0, x],
        5 => [0.0, y],
        6 => [x * x, x * y],
        7 => [x * y, y * y],
        _ => unreachable!(),
    }
}

fn rt_monomial_div(k: usize, x: f64, y: f64) -> f64 {
    match k {
        1 | 5 => 1.0,
        6 => 3.0 * x,
        7 => 3.0 * y,
        _ => 0.0,
    }
}

/// Reference vertices.
const REF_VERTICES: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Coefficients of the nodal RT1 basis in the monomial set, `coef[k][j]`.
///
/// Degrees of freedom: for each local edge (counter-clockwise, from vertex `a`
/// to `b`), the normal component against the unnormalised outward normal at
/// the two Gauss points; then the two interior moments `∫ v_x`, `∫ v_y`.
fn rt_coefficients() -> &'static [[f64; RT_MONOMIALS]; RT_MONOMIALS] {
    static COEF: OnceLock<[[f64; RT_MONOMIALS]; RT_MONOMIALS]> = OnceLock::new();
    COEF.get_or_init(|| {
        let mut v = Mat::<f64>::zeros(RT_MONOMIALS, RT_MONOMIALS);
        let s = rt_edge_points();
        for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            let (pa, pb) = (REF_VERTICES[*a], REF_VERTICES[*b]);
            let t = [pb[0] - pa[0], pb[1] - pa[1]];
            let n = [t[1], -t[0]];
            for (j, sj) in s.iter().enumerate() {
                let x = [pa[0] + sj * t[0], pa[1] + sj * t[1]];
                for k in 0..RT_MONOMIALS {
                    let m = rt_monomial(k, x[0], x[1]);
                    v[(2 * e + j, k)] = m[0] * n[0] + m[1] * n[1];
                }
            }
        }
        // Interior moments, integrated exactly with a degree-2 rule.
        let rule = crate::quadrature::TriangleRule::new(2).unwrap();
        for k in 0..RT_MONOMIALS {
            let (mut ix, mut iy) = (0.0, 0.0);
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let m = rt_monomial(k, l[1], l[2]);
                ix += 0.5 * w * m[0];
                iy += 0.5 * w * m[1];
            }
            v[(6, k)] = ix;
            v[(7, k)] = iy;
        }
        let inv = v.partial_piv_lu().inverse();
        let mut coef = [[0.0; RT_MONOMIALS]; RT_MONOMIALS];
        for (k, row) in coef.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = inv[(k, j)];
            }
        }
        coef
    })
}

/// Reference RT1 basis values and divergences at reference point `(x, y)`.
pub fn rt_reference(x: f64, y: f64) -> ([Point; 8], [f64; 8]) {
    let coef = rt_coefficients();
    let mut vals = [[0.0; 2]; 8];
    let mut divs = [0.0; 8];
    for k in 0..RT_MONOMIALS {
        let m = rt_monomial(k, x, y);
        let dm = rt_monomial_div(k, x, y);
        for j in 0..8 {
            vals[j][0] += coef[k][j] * m[0];
            vals[j][1] += coef[k][j] * m[1];
            divs[j] += coef[k][j] * dm;
        }
    }
    (vals, divs)
}

/// Physical RT1 basis values (contravariant Piola map) and divergences at
/// barycentric point `l`.
pub fn rt_physical(tri: &AffineTriangle, l: &[f64; 3]) -> ([Point; 8], [f64; 8]) {
    let (vals, divs) = rt_reference(l[1], l[2]);
    let j = tri.jacobian();
    let mut out = [[0.0; 2]; 8];
    for (o, v) in out.iter_mut().zip(vals.iter()) {
        o[0] = (j[0][0] * v[0] + j[0][1] * v[1]) / tri.det;
        o[1] = (j[1][0] * v[0] + j[1][1] * v[1]) / tri.det;
    }
    let mut d = [0.0; 8];
    for (o, v) in d.iter_mut().zip(divs.iter()) {
        *o = v / tri.det;
    }
    (out, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_partition_of_unity_and_nodality() {
        for (i, node) in P2_NODES.iter().enumerate() {
            let v = p2_values(node);
            for (j, vj) in v.iter().enumerate() {
                assert!((vj - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        let l = [0.2, 0.3, 0.5];
        assert!((p2_values(&l).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let tri = AffineTriangle::new([[0.0, 0.0], [2.0, 0.1], [0.3, 1.5]]);
        let g = p2_gradients(&tri, &l);
        let s = g.iter().fold([0.0, 0.0], |a, b| [a[0] + b[0], a[1] + b[1]]);
        assert!(s[0].abs() < 1e-14 && s[1].abs() < 1e-14);
    }

    #[test]
    fn p2_gradients_match_finite_differences() {
        let tri = AffineTriangle::new([[0.1, 0.0], [1.0, 0.2], [0.4, 0.9]]);
        let x = [0.45, 0.35];
        let h = 1e-6;
        let g = p2_gradients(&tri, &tri.barycentric(x));
        for dir in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[dir] += h;
            xm[dir] -= h;
            let vp = p2_values(&tri.barycentric(xp));
            let vm = p2_values(&tri.barycentric(xm));
            for i in 0..6 {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((fd - g[i][dir]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rt_basis_is_dual_to_dofs() {
        let s = rt_edge_points();
        let (_, _) = rt_reference(0.1, 0.1);
        for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            let (pa, pb) = (REF_VERTICES[*a], REF_VERTICES[*b]);
            let t = [pb[0] - pa[0], pb[1] - pa[1]];
            let n = [t[1], -t[0]];
            for (j, sj) in s.iter().enumerate() {
                let (vals, _) = rt_reference(pa[0] + sj * t[0], pa[1] + sj * t[1]);
                for (k, v) in vals.iter().enumerate() {
                    let dof = v[0] * n[0] + v[1] * n[1];
                    let expect = if k == 2 * e + j { 1.0 } else { 0.0 };
                    assert!((dof - expect).abs() < 1e-13, "edge {e} point {j} basis {k}: {dof}");
                }
            }
        }
    }

    #[test]
    fn rt_divergence_matches_flux() {
        // ∫_T div v = ∮ v·n for every basis function.
        let tri = AffineTriangle::new([[0.0, 0.0], [1.3, 0.2], [0.2, 0.8]]);
        let rule = crate::quadrature::TriangleRule::new(4).unwrap();
        let g = crate::quadrature::GaussRule::new(4);
        for k in 0..8 {
            let mut vol = 0.0;
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                vol += w * tri.area() * rt_physical(&tri, l).1[k];
            }
            let mut flux = 0.0;
            for [a, b] in LOCAL_EDGES {
                let (pa, pb) = (tri.vertices[a], tri.vertices[b]);
                let n = [pb[1] - pa[1], -(pb[0] - pa[0])];
                for (s, w) in g.points.iter().zip(&g.weights) {
                    let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                    let v = rt_physical(&tri, &tri.barycentric(x)).0[k];
                    flux += w * (v[0] * n[0] + v[1] * n[1]);
                }
            }
            assert!((vol - flux).abs() < 1e-12, "basis {k}: {vol} vs {flux}");
        }
    }
}
