//! Periodic-conforming triangulations of the period domain.
//!
//! The lower curve is discretized first and its vertices are translated by
//! `(0, tau)` to obtain the upper curve, so both boundary meshes are exact
//! translates and every lower vertex has an upper partner.
//!
//! # File format
//!
//! Line oriented, whitespace separated, `#` starts a comment:
//!
//! ```text
//! cascade-mesh 1
//! tau <tau>
//! counts <vertices> <triangles> <boundary edges> <periodic pairs>
//! v <x1> <x2>
//! t <i> <j> <k>
//! b <i> <j> <TAG>
//! p <i_lower> <i_upper>
//! ```
//!
//! Coordinates are written with 17 significant digits.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::element::AffineTriangle;
use crate::geometry::{dist, BoundaryTag, CascadeGeometry};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// `(lower, upper)` vertex pairs with `upper = lower + (0, tau)`.
    pub periodic_pairs: Vec<(usize, usize)>,
    pub tau: f64,
    /// Longest edge.
    pub h: f64,
}

/// How [`generate_mesh`] triangulates the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MeshKind {
    /// Structured for blade-free strips, unstructured otherwise.
    #[default]
    Auto,
    Structured,
    Unstructured,
}

impl Mesh {
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        periodic_pairs: Vec<(usize, usize)>,
        tau: f64,
    ) -> Result<Self> {
        let mut mesh = Self { vertices, triangles, boundary_edges, periodic_pairs, tau, h: 0.0 };
        mesh.h = mesh.max_edge_length();
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn affine(&self, t: usize) -> AffineTriangle {
        AffineTriangle::new(self.triangle_points(t))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
            .map(|[a, b]| dist(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    pub fn edges_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Map from sorted edge to the triangles containing it, with the local edge index.
    pub(crate) fn edge_triangles(&self) -> HashMap<[usize; 2], Vec<(usize, usize)>> {
        let mut map: HashMap<[usize; 2], Vec<(usize, usize)>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for (k, [a, b]) in crate::element::LOCAL_EDGES.iter().enumerate() {
                map.entry(sorted(tri[*a], tri[*b])).or_default().push((t, k));
            }
        }
        map
    }

    /// Checks orientation, periodic pairing, pairing bijectivity and boundary
    /// tag completeness.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        let bad = |m: String| Err(Error::InvariantViolation(m));
        if !(self.tau > 0.0) {
            return bad(format!("period must be positive, got {}", self.tau));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return bad(format!("triangle {t} references a missing vertex"));
            }
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return bad(format!("triangle {t} has non-positive signed area {area:e}"));
            }
        }
        let tol = 1e-12 * self.tau;
        for &(lo, up) in &self.periodic_pairs {
            if lo >= nv || up >= nv {
                return bad(format!("periodic pair ({lo}, {up}) references a missing vertex"));
            }
            let (a, b) = (self.vertices[lo], self.vertices[up]);
            if (b[0] - a[0]).abs() > tol || (b[1] - a[1] - self.tau).abs() > tol {
                return bad(format!(
                    "periodic pair ({lo}, {up}) is offset by ({}, {}), expected (0, {})",
                    b[0] - a[0],
                    b[1] - a[1],
                    self.tau
                ));
            }
        }

        let mut topo: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for tri in &self.triangles {
            for [a, b] in crate::element::LOCAL_EDGES {
                *topo.entry(sorted(tri[a], tri[b])).or_default() += 1;
            }
        }
        if let Some((e, _)) = topo.iter().find(|(_, &c)| c > 2) {
            return bad(format!("edge {e:?} is shared by more than two triangles"));
        }
        let mut tagged: BTreeMap<[usize; 2], BoundaryTag> = BTreeMap::new();
        for be in &self.boundary_edges {
            let key = sorted(be.vertices[0], be.vertices[1]);
            if topo.get(&key) != Some(&1) {
                return bad(format!("tagged edge {key:?} is not a boundary edge of the triangulation"));
            }
            if tagged.insert(key, be.tag).is_some() {
                return bad(format!("boundary edge {key:?} is tagged twice"));
            }
        }
        if let Some((e, _)) = topo.iter().find(|(e, &c)| c == 1 && !tagged.contains_key(*e)) {
            return bad(format!("boundary edge {e:?} carries no tag"));
        }

        let vertices_with = |tag: BoundaryTag| {
            let mut v: Vec<usize> = self.edges_with_tag(tag).flat_map(|e| e.vertices).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let lower = vertices_with(BoundaryTag::Lower);
        let upper = vertices_with(BoundaryTag::Upper);
        let mut up_of = HashMap::new();
        let mut lo_of = HashMap::new();
        for &(lo, up) in &self.periodic_pairs {
            if up_of.insert(lo, up).is_some() || lo_of.insert(up, lo).is_some() {
                return bad(format!("vertex appears in more than one periodic pair ({lo}, {up})"));
            }
        }
        let mut paired_lower: Vec<usize> = up_of.keys().copied().collect();
        paired_lower.sort_unstable();
        let mut paired_upper: Vec<usize> = lo_of.keys().copied().collect();
        paired_upper.sort_unstable();
        if paired_lower != lower || paired_upper != upper {
            return bad("periodic pairing is not a bijection between lower and upper boundary vertices".into());
        }
        let upper_edges: std::collections::HashSet<[usize; 2]> =
            self.edges_with_tag(BoundaryTag::Upper).map(|e| sorted(e.vertices[0], e.vertices[1])).collect();
        for e in self.edges_with_tag(BoundaryTag::Lower) {
            let image = sorted(up_of[&e.vertices[0]], up_of[&e.vertices[1]]);
            if !upper_edges.contains(&image) {
                return bad(format!("lower edge {:?} has no translated upper edge", e.vertices));
            }
        }
        Ok(())
    }

    /// Checks boundary tags against the geometry at edge midpoints.
    pub fn check_tags(&self, geometry: &CascadeGeometry, tol: f64) -> Result<()> {
        for e in &self.boundary_edges {
            let (a, b) = (self.vertices[e.vertices[0]], self.vertices[e.vertices[1]]);
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let tag = geometry.classify_boundary(mid, tol)?;
            if tag != e.tag {
                return Err(Error::InvariantViolation(format!(
                    "edge {:?} tagged {} but its midpoint lies on {}",
                    e.vertices, e.tag, tag
                )));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cascade-mesh 1");
        let _ = writeln!(s, "tau {:.16e}", self.tau);
        let _ = writeln!(
            s,
            "counts {} {} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len(),
            self.periodic_pairs.len()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "v {:.16e} {:.16e}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "t {} {} {}", t[0], t[1], t[2]);
        }
        for b in &self.boundary_edges {
            let _ = writeln!(s, "b {} {} {}", b.vertices[0], b.vertices[1], b.tag);
        }
        for (lo, up) in &self.periodic_pairs {
            let _ = writeln!(s, "p {lo} {up}");
        }
        s
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
        let mut tau = None;
        let mut counts: Option<[usize; 4]> = None;
        let (mut vs, mut ts, mut bs, mut ps) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut header = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let key = it.next().unwrap();
            let rest: Vec<&str> = it.collect();
            let floats = |n: usize| -> Result<Vec<f64>> {
                if rest.len() != n {
                    return Err(err(line_no, format!("`{key}` expects {n} values, got {}", rest.len())));
                }
                rest.iter()
                    .map(|s| s.parse::<f64>().map_err(|e| err(line_no, format!("bad number `{s}`: {e}"))))
                    .collect()
            };
            let ints = |n: usize| -> Result<Vec<usize>> {
                if rest.len() < n {
                    return Err(err(line_no, format!("`{key}` expects {n} indices, got {}", rest.len())));
                }
                rest[..n]
                    .iter()
                    .map(|s| s.parse::<usize>().map_err(|e| err(line_no, format!("bad index `{s}`: {e}"))))
                    .collect()
            };
            match key {
                "cascade-mesh" => {
                    if rest != ["1"] {
                        return Err(err(line_no, "unsupported mesh format version".into()));
                    }
                    header = true;
                }
                "tau" => tau = Some(floats(1)?[0]),
                "counts" => {
                    let c = ints(4)?;
                    counts = Some([c[0], c[1], c[2], c[3]]);
                }
                "v" => {
                    let c = floats(2)?;
                    vs.push([c[0], c[1]]);
                }
                "t" => {
                    let c = ints(3)?;
                    ts.push([c[0], c[1], c[2]]);
                }
                "b" => {
                    if rest.len() != 3 {
                        return Err(err(line_no, "`b` expects two indices and a tag".into()));
                    }
                    let c = ints(2)?;
                    let tag = BoundaryTag::parse(rest[2])
                        .ok_or_else(|| err(line_no, format!("unknown boundary tag `{}`", rest[2])))?;
                    bs.push(BoundaryEdge { vertices: [c[0], c[1]], tag });
                }
                "p" => {
                    let c = ints(2)?;
                    ps.push((c[0], c[1]));
                }
                other => return Err(err(line_no, format!("unknown record `{other}`"))),
            }
        }
        let last = text.lines().count();
        if !header {
            return Err(err(1, "missing `cascade-mesh 1` header".into()));
        }
        let tau = tau.ok_or_else(|| err(last, "missing `tau` record".into()))?;
        let counts = counts.ok_or_else(|| err(last, "missing `counts` record".into()))?;
        if counts != [vs.len(), ts.len(), bs.len(), ps.len()] {
            return Err(err(
                last,
                format!(
                    "counts header {:?} does not match records {:?}",
                    counts,
                    [vs.len(), ts.len(), bs.len(), ps.len()]
                ),
            ));
        }
        Self::new(vs, ts, bs, ps, tau)
    }
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, mesh.to_text())?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Mesh::from_text(&text, path)
}

pub(crate) fn sorted(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Arc-length parameters of `n + 1` equidistributed points on the lower curve.
pub(crate) fn arc_length_parameters(geometry: &CascadeGeometry, n: usize) -> Vec<f64> {
    const FINE: usize = 8192;
    let pts = geometry.lower().sample(FINE);
    let mut acc = vec![0.0; FINE + 1];
    for i in 1..=FINE {
        acc[i] = acc[i - 1] + dist(pts[i - 1], pts[i]);
    }
    let total = acc[FINE];
    (0..=n)
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            if i == n {
                return 1.0;
            }
            let target = total * i as f64 / n as f64;
            let k = acc.partition_point(|&a| a < target).clamp(1, FINE);
            let frac = (target - acc[k - 1]) / (acc[k] - acc[k - 1]);
            ((k - 1) as f64 + frac) / FINE as f64
        })
        .collect()
}

pub(crate) fn lower_curve_length(geometry: &CascadeGeometry) -> f64 {
    let pts = geometry.lower().sample(8192);
    pts.windows(2).map(|w| dist(w[0], w[1])).sum()
}

/// Structured triangulation of a blade-free strip: `n1` cells along the
/// lower curve, `n2` cells across the period.
pub fn generate_structured(geometry: &CascadeGeometry, n1: usize, n2: usize) -> Result<Mesh> {
    if geometry.profile().is_some() {
        return Err(Error::MeshFailure("structured meshes are only available for blade-free strips".into()));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::MeshFailure("structured mesh needs at least one cell per direction".into()));
    }
    let tau = geometry.tau();
    let params = arc_length_parameters(geometry, n1);
    let base: Vec<Point> = params.iter().map(|&t| geometry.lower().point(t)).collect();
    let idx = |i: usize, j: usize| j * (n1 + 1) + i;
    let mut vertices = Vec::with_capacity((n1 + 1) * (n2 + 1));
    for j in 0..=n2 {
        for p in &base {
            let y = if j == n2 { p[1] + tau } else { p[1] + tau * j as f64 / n2 as f64 };
            vertices.push([p[0], y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n1 * n2);
    for j in 0..n2 {
        for i in 0..n1 {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut boundary_edges = Vec::new();
    for i in 0..n1 {
        boundary_edges.push(BoundaryEdge { vertices: [idx(i, 0), idx(i + 1, 0)], tag: BoundaryTag::Lower });
    }
    for j in 0..n2 {
        boundary_edges.push(BoundaryEdge { vertices: [idx(n1, j), idx(n1, j + 1)], tag: BoundaryTag::Outflow });
    }
    for i in (0..n1).rev() {
        boundary_edges.push(BoundaryEdge { vertices: [idx(i + 1, n2), idx(i, n2)], tag: BoundaryTag::Upper });
    }
    for j in (0..n2).rev() {
        boundary_edges.push(BoundaryEdge { vertices: [idx(0, j + 1), idx(0, j)], tag: BoundaryTag::Inflow });
    }
    let periodic_pairs = (0..=n1).map(|i| (idx(i, 0), idx(i, n2))).collect();
    Mesh::new(vertices, triangles, boundary_edges, periodic_pairs, tau)
}

/// Generates a periodic-conforming mesh with longest edge at most
/// `1.5 * h_target`.
pub fn generate_mesh(geometry: &CascadeGeometry, h_target: f64, kind: MeshKind) -> Result<Mesh> {
    if !(h_target > 0.0 && h_target.is_finite()) {
        return Err(Error::MeshFailure(format!("target mesh size must be positive, got {h_target}")));
    }
    let structured = match kind {
        MeshKind::Structured => true,
        MeshKind::Unstructured => false,
        MeshKind::Auto => geometry.profile().is_none(),
    };
    let mesh = if structured {
        let n1 = (lower_curve_length(geometry) / h_target).ceil().max(1.0) as usize;
        let n2 = (geometry.tau() / h_target).ceil().max(1.0) as usize;
        generate_structured(geometry, n1, n2)?
    } else {
        crate::mesher::generate_unstructured(geometry, h_target)?
    };
    if mesh.h > 1.5 * h_target {
        return Err(Error::MeshFailure(format!(
            "longest edge {} exceeds 1.5 x target {}",
            mesh.h, h_target
        )));
    }
    Ok(mesh)
}

/// Triangulation of the filled strip (domain plus blade interior). The first
/// `nv` vertices and `nt` triangles coincide with `mesh`; blade vertices and
/// triangles are appended. Profile edges become interior edges.
pub fn filled_mesh(mesh: &Mesh) -> Result<Mesh> {
    let profile: Vec<[usize; 2]> = mesh.edges_with_tag(BoundaryTag::Profile).map(|e| e.vertices).collect();
    if profile.is_empty() {
        return Ok(mesh.clone());
    }
    let (extra, blade_triangles) = crate::mesher::triangulate_hole(mesh, &profile)?;
    let mut vertices = mesh.vertices.clone();
    vertices.extend(extra);
    let mut triangles = mesh.triangles.clone();
    triangles.extend(blade_triangles);
    let boundary_edges = mesh.boundary_edges.iter().filter(|e| e.tag != BoundaryTag::Profile).copied().collect();
    Mesh::new(vertices, triangles, boundary_edges, mesh.periodic_pairs.clone(), mesh.tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, ProfileSpec, ShapeParams};

    fn strip() -> CascadeGeometry {
        build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap()
    }

    #[test]
    fn structured_counts() {
        let m = generate_structured(&strip(), 4, 2).unwrap();
        assert_eq!(m.vertices.len(), 15);
        assert_eq!(m.triangles.len(), 16);
        assert_eq!(m.periodic_pairs.len(), 5);
        assert!((m.area() - 2.0).abs() < 1e-14);
        m.check_tags(&strip(), 1e-12).unwrap();
    }

    #[test]
    fn round_trip() {
        let geom = build_geometry(&ShapeParams::strip(1.0, 2.0).with_lower_lift(0.2)).unwrap();
        let m = generate_structured(&geom, 4, 2).unwrap();
        let back = Mesh::from_text(&m.to_text(), Path::new("mem")).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn negative_area_is_rejected() {
        let m = generate_structured(&strip(), 4, 2).unwrap();
        let mut text = m.to_text();
        let t = m.triangles[3];
        text = text.replace(
            &format!("t {} {} {}\n", t[0], t[1], t[2]),
            &format!("t {} {} {}\n", t[0], t[2], t[1]),
        );
        let err = Mesh::from_text(&text, Path::new("neg")).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(_)), "{err}");
    }

    #[test]
    fn wrong_pair_offset_is_rejected() {
        let m = generate_structured(&strip(), 4, 2).unwrap();
        let mut bad = m.clone();
        let up = bad.periodic_pairs[2].1;
        bad.vertices[up][0] += 1e-6;
        let err = Mesh::from_text(&bad.to_text(), Path::new("pair")).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(_)), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "cascade-mesh 1\ntau 1\ncounts 1 0 0 0\nv 0.0 zero\n";
        match Mesh::from_text(text, Path::new("x")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unstructured_mesh_with_blade() {
        let p = ShapeParams::strip(1.0, 2.0).with_profile(ProfileSpec::Ellipse {
            center: [1.0, 0.5],
            semi_axes: [0.3, 0.1],
            angle: 0.0,
        });
        let geom = build_geometry(&p).unwrap();
        let m = generate_mesh(&geom, 0.1, MeshKind::Auto).unwrap();
        assert!(m.h <= 0.15);
        m.check_tags(&geom, 0.01).unwrap();
        let filled = filled_mesh(&m).unwrap();
        assert!((filled.area() - 2.0).abs() < 1e-12);
        assert_eq!(&filled.vertices[..m.vertices.len()], &m.vertices[..]);
    }
}
