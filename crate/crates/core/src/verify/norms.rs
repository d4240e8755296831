//! Volume and boundary norms of discrete, exact and difference fields.

use std::collections::HashMap;

use crate::assembly::{eval_p2, grad_p2};
use crate::dofs::P2Topology;
use crate::element::LOCAL_EDGES;
use crate::geometry::{dist, BoundaryTag};
use crate::mesh::{sorted, Mesh};
use crate::quadrature::{GaussRule, TriangleRule};
use crate::verify::gagliardo::gagliardo_integral;
use crate::{Error, Mat2, Point, Result};

/// A (possibly vector-valued) field that can be sampled inside triangles.
/// Scalar fields use the first component.
pub trait Field: Sync {
    fn value(&self, t: usize, l: &[f64; 3], x: Point) -> [f64; 2];
    fn gradient(&self, t: usize, l: &[f64; 3], x: Point) -> Mat2;
}

/// Nodal P2 vector field.
pub struct P2Field<'a> {
    pub mesh: &'a Mesh,
    pub topo: &'a P2Topology,
    pub values: &'a [[f64; 2]],
}

impl Field for P2Field<'_> {
    fn value(&self, t: usize, l: &[f64; 3], _: Point) -> [f64; 2] {
        eval_p2(self.topo, self.values, t, l)
    }
    fn gradient(&self, t: usize, l: &[f64; 3], _: Point) -> Mat2 {
        grad_p2(self.topo, &self.mesh.affine(t), self.values, t, l)
    }
}

/// Vertex-based P1 scalar field.
pub struct P1Field<'a> {
    pub mesh: &'a Mesh,
    pub values: &'a [f64],
}

impl Field for P1Field<'_> {
    fn value(&self, t: usize, l: &[f64; 3], _: Point) -> [f64; 2] {
        let tri = self.mesh.triangles[t];
        [l[0] * self.values[tri[0]] + l[1] * self.values[tri[1]] + l[2] * self.values[tri[2]], 0.0]
    }
    fn gradient(&self, t: usize, _: &[f64; 3], _: Point) -> Mat2 {
        let g = self.mesh.affine(t).grad_lambda;
        let tri = self.mesh.triangles[t];
        let mut out = [[0.0; 2]; 2];
        for k in 0..3 {
            out[0][0] += self.values[tri[k]] * g[k][0];
            out[0][1] += self.values[tri[k]] * g[k][1];
        }
        out
    }
}

/// Closed-form field.
pub struct ExactField<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> Field for ExactField<V, G>
where
    V: Fn(Point) -> [f64; 2] + Sync,
    G: Fn(Point) -> Mat2 + Sync,
{
    fn value(&self, _: usize, _: &[f64; 3], x: Point) -> [f64; 2] {
        (self.value)(x)
    }
    fn gradient(&self, _: usize, _: &[f64; 3], x: Point) -> Mat2 {
        (self.gradient)(x)
    }
}

/// `a - b`.
pub struct Difference<'a>(pub &'a dyn Field, pub &'a dyn Field);

impl Field for Difference<'_> {
    fn value(&self, t: usize, l: &[f64; 3], x: Point) -> [f64; 2] {
        let (a, b) = (self.0.value(t, l, x), self.1.value(t, l, x));
        [a[0] - b[0], a[1] - b[1]]
    }
    fn gradient(&self, t: usize, l: &[f64; 3], x: Point) -> Mat2 {
        let (a, b) = (self.0.gradient(t, l, x), self.1.gradient(t, l, x));
        [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
    }
}

/// `alpha * a`.
pub struct Scaled<'a>(pub f64, pub &'a dyn Field);

impl Field for Scaled<'_> {
    fn value(&self, t: usize, l: &[f64; 3], x: Point) -> [f64; 2] {
        let a = self.1.value(t, l, x);
        [self.0 * a[0], self.0 * a[1]]
    }
    fn gradient(&self, t: usize, l: &[f64; 3], x: Point) -> Mat2 {
        let a = self.1.gradient(t, l, x);
        [[self.0 * a[0][0], self.0 * a[0][1]], [self.0 * a[1][0], self.0 * a[1][1]]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    LrVolume,
    W1rVolume,
    LrBoundary(BoundaryTag),
    /// Seminorm of order `1 - 1/r` on the inflow or outflow segment.
    Gagliardo(BoundaryTag),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    pub r: f64,
    pub kind: NormKind,
}

impl NormSpec {
    pub fn new(r: f64, kind: NormKind) -> Result<Self> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("norm exponent must be in (1, inf), got {r}")));
        }
        Ok(Self { r, kind })
    }

    /// Conjugate exponent `r / (r - 1)`.
    pub fn conjugate(&self) -> f64 {
        self.r / (self.r - 1.0)
    }
}

fn vnorm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn mnorm(m: Mat2) -> f64 {
    (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt()
}

/// Boundary edges of one tag with their triangle and local vertex positions.
pub struct BoundaryEdges {
    /// `(a, b, triangle, local index of a, local index of b)`.
    pub edges: Vec<(usize, usize, usize, usize, usize)>,
}

impl BoundaryEdges {
    pub fn new(mesh: &Mesh, tag: BoundaryTag) -> Self {
        let wanted: HashMap<[usize; 2], [usize; 2]> = mesh
            .edges_with_tag(tag)
            .map(|e| (sorted(e.vertices[0], e.vertices[1]), e.vertices))
            .collect();
        let mut found: HashMap<[usize; 2], (usize, usize, usize, usize, usize)> = HashMap::new();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for [i, j] in LOCAL_EDGES {
                if let Some(&[a, b]) = wanted.get(&sorted(tri[i], tri[j])) {
                    let (ia, ib) = if tri[i] == a { (i, j) } else { (j, i) };
                    found.insert(sorted(a, b), (a, b, t, ia, ib));
                }
            }
        }
        let edges = mesh
            .edges_with_tag(tag)
            .map(|e| found[&sorted(e.vertices[0], e.vertices[1])])
            .collect();
        Self { edges }
    }

    /// Barycentric coordinates of the point at fraction `s` from `a` to `b`.
    pub fn bary(ia: usize, ib: usize, s: f64) -> [f64; 3] {
        let mut l = [0.0; 3];
        l[ia] = 1.0 - s;
        l[ib] = s;
        l
    }

    /// `∫ integrand` over the edges with an `n`-point Gauss rule per edge.
    /// The integrand receives `(triangle, barycentric, point, unit outward normal)`.
    pub fn integrate<F>(&self, mesh: &Mesh, n: usize, mut integrand: F) -> f64
    where
        F: FnMut(usize, &[f64; 3], Point, Point) -> f64,
    {
        let rule = GaussRule::new(n);
        let mut total = 0.0;
        for &(a, b, t, ia, ib) in &self.edges {
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let normal = outward_normal(mesh, t, pa, pb);
            let len = dist(pa, pb);
            for (s, w) in rule.points.iter().zip(&rule.weights) {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                total += w * len * integrand(t, &Self::bary(ia, ib, *s), x, normal);
            }
        }
        total
    }
}

/// Unit normal of edge `pa pb` pointing away from triangle `t`.
pub fn outward_normal(mesh: &Mesh, t: usize, pa: Point, pb: Point) -> Point {
    let len = dist(pa, pb);
    let mut n = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
    let [p, q, r] = mesh.triangle_points(t);
    let c = [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0];
    if (c[0] - pa[0]) * n[0] + (c[1] - pa[1]) * n[1] > 0.0 {
        n = [-n[0], -n[1]];
    }
    n
}

/// Trace of a field along the inflow or outflow segment, parametrized by
/// `s = x2 - x2(lower corner)` in `[0, tau]`, with the mesh vertices as breakpoints.
pub struct SegmentTrace<'a> {
    mesh: &'a Mesh,
    field: &'a dyn Field,
    /// `(s_start, s_end, triangle, a, b)` sorted by `s_start`.
    pieces: Vec<(f64, f64, usize, Point, Point)>,
    origin: f64,
}

impl<'a> SegmentTrace<'a> {
    pub fn new(mesh: &'a Mesh, field: &'a dyn Field, tag: BoundaryTag) -> Result<Self> {
        if !matches!(tag, BoundaryTag::Inflow | BoundaryTag::Outflow) {
            return Err(Error::UnsupportedSegment(format!(
                "the seminorm is defined on the inflow or outflow segment, not on {tag}"
            )));
        }
        let edges = BoundaryEdges::new(mesh, tag);
        if edges.edges.is_empty() {
            return Err(Error::UnsupportedSegment(format!("mesh has no {tag} edges")));
        }
        let origin = edges
            .edges
            .iter()
            .flat_map(|e| [mesh.vertices[e.0][1], mesh.vertices[e.1][1]])
            .fold(f64::INFINITY, f64::min);
        let mut pieces: Vec<_> = edges
            .edges
            .iter()
            .map(|&(a, b, t, _, _)| {
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                let (lo, hi) = if pa[1] < pb[1] { (pa, pb) } else { (pb, pa) };
                (lo[1] - origin, hi[1] - origin, t, lo, hi)
            })
            .collect();
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(Self { mesh, field, pieces, origin })
    }

    pub fn breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().map(|p| p.0).collect();
        b.push(self.pieces.last().unwrap().1);
        b
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn eval(&self, s: f64) -> [f64; 2] {
        let k = self.pieces.partition_point(|p| p.1 < s).min(self.pieces.len() - 1);
        let (s0, s1, t, lo, hi) = self.pieces[k];
        let f = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        let x = [lo[0] + f * (hi[0] - lo[0]), lo[1] + f * (hi[1] - lo[1])];
        let l = self.mesh.affine(t).barycentric(x);
        self.field.value(t, &l, x)
    }
}

/// Norm of `field` on `mesh` according to `spec`.
pub fn error_norm(field: &dyn Field, spec: &NormSpec, mesh: &Mesh) -> Result<f64> {
    let r = spec.r;
    match spec.kind {
        NormKind::LrVolume | NormKind::W1rVolume => {
            let rule = TriangleRule::new(6)?;
            let grad = spec.kind == NormKind::W1rVolume;
            let mut total = 0.0;
            for t in 0..mesh.triangles.len() {
                let tri = mesh.affine(t);
                for (l, w) in rule.points.iter().zip(&rule.weights) {
                    let x = tri.point(l);
                    let mut v = vnorm(field.value(t, l, x)).powf(r);
                    if grad {
                        v += mnorm(field.gradient(t, l, x)).powf(r);
                    }
                    total += w * tri.area() * v;
                }
            }
            Ok(total.powf(1.0 / r))
        }
        NormKind::LrBoundary(tag) => {
            let edges = BoundaryEdges::new(mesh, tag);
            let total = edges.integrate(mesh, 5, |t, l, x, _| vnorm(field.value(t, l, x)).powf(r));
            Ok(total.powf(1.0 / r))
        }
        NormKind::Gagliardo(tag) => {
            let trace = SegmentTrace::new(mesh, field, tag)?;
            let v = gagliardo_integral(&|s| trace.eval(s), &trace.breaks(), r, 5)?;
            Ok(v.powf(1.0 / r))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, ShapeParams};
    use crate::mesh::generate_structured;

    fn mesh() -> Mesh {
        generate_structured(&build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap(), 6, 4).unwrap()
    }

    fn exact(v: impl Fn(Point) -> [f64; 2] + Sync) -> ExactField<impl Fn(Point) -> [f64; 2] + Sync, impl Fn(Point) -> Mat2 + Sync> {
        ExactField { value: v, gradient: |_| [[0.0; 2]; 2] }
    }

    #[test]
    fn constant_l2_volume() {
        let m = mesh();
        let f = exact(|_| [3.0, 4.0]);
        let v = error_norm(&f, &NormSpec::new(2.0, NormKind::LrVolume).unwrap(), &m).unwrap();
        assert!((v - 5.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn boundary_norm_of_outflow_constant() {
        let m = mesh();
        let f = exact(|_| [2.0, 0.0]);
        let v = error_norm(&f, &NormSpec::new(3.0, NormKind::LrBoundary(BoundaryTag::Outflow)).unwrap(), &m).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inflow_seminorm_of_linear_trace() {
        let m = mesh();
        let f = exact(|x| [x[1], 0.0]);
        let v = error_norm(&f, &NormSpec::new(2.0, NormKind::Gagliardo(BoundaryTag::Inflow)).unwrap(), &m).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn seminorm_rejects_curved_sides() {
        let m = mesh();
        let f = exact(|_| [1.0, 0.0]);
        let spec = NormSpec::new(2.0, NormKind::Gagliardo(BoundaryTag::Lower)).unwrap();
        assert!(matches!(error_norm(&f, &spec, &m), Err(Error::UnsupportedSegment(_))));
    }

    #[test]
    fn outward_normals_on_strip() {
        let m = mesh();
        let e = BoundaryEdges::new(&m, BoundaryTag::Inflow);
        let len = e.integrate(&m, 2, |_, _, _, n| -n[0]);
        assert!((len - 1.0).abs() < 1e-14);
    }
}
