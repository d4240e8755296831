//! Unstructured meshing backed by spade's constrained Delaunay refinement.
//!
//! Boundary polylines are discretized up front and kept as unsplittable
//! constraint edges, so the upper curve stays an exact translate of the lower
//! one.

use std::collections::{BTreeMap, HashMap};

use spade::handles::FixedVertexHandle;
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::geometry::{dist, BoundaryTag, CascadeGeometry};
use crate::mesh::{arc_length_parameters, lower_curve_length, sorted, BoundaryEdge, Mesh};
use crate::{Error, Point, Result};

type Cdt = ConstrainedDelaunayTriangulation<Point2<f64>>;

struct Refined {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
}

/// Triangulates the region enclosed by closed constraint loops. The first
/// `points.len()` output vertices are `points` in order; interior Steiner
/// points follow.
fn refine_loops(points: &[Point], edges: &[[usize; 2]], max_area: f64) -> Result<Refined> {
    let fail = |m: String| Error::MeshFailure(m);
    let mut cdt = Cdt::new();
    let mut handles = Vec::with_capacity(points.len());
    for p in points {
        let h = cdt.insert(Point2::new(p[0], p[1])).map_err(|e| fail(format!("vertex insertion: {e:?}")))?;
        handles.push(h);
    }
    if cdt.num_vertices() != points.len() {
        return Err(fail("duplicate boundary vertices".into()));
    }
    for &[a, b] in edges {
        if !cdt.can_add_constraint(handles[a], handles[b]) {
            return Err(fail(format!("boundary segment {a}-{b} intersects another segment")));
        }
        cdt.add_constraint(handles[a], handles[b]);
    }
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(25.0))
        .with_max_allowed_area(max_area)
        .with_max_additional_vertices(2_000_000)
        .keep_constraint_edges()
        .exclude_outer_faces(true);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(fail("refinement ran out of Steiner points".into()));
    }
    let excluded: std::collections::HashSet<_> = result.excluded_faces.iter().copied().collect();

    let index_of: HashMap<usize, usize> = handles.iter().enumerate().map(|(i, h)| (h.index(), i)).collect();
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut raw = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        raw.push(face.vertices().map(|v| v.fix().index()));
    }
    let mut vertices: Vec<Point> = points.to_vec();
    for tri in &raw {
        for &v in tri {
            if !index_of.contains_key(&v) {
                remap.entry(v).or_insert(0);
            }
        }
    }
    for (k, slot) in remap.iter_mut() {
        let p = cdt.vertex(FixedVertexHandle::from_index(*k)).position();
        *slot = vertices.len();
        vertices.push([p.x, p.y]);
    }
    let local = |v: usize| index_of.get(&v).copied().unwrap_or_else(|| remap[&v]);
    let triangles = raw
        .into_iter()
        .map(|t| {
            let mut t = t.map(local);
            let [a, b, c] = t.map(|i| vertices[i]);
            if (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]) < 0.0 {
                t.swap(1, 2);
            }
            t
        })
        .collect();
    Ok(Refined { vertices, triangles })
}

fn equilateral_area(h: f64) -> f64 {
    0.6 * 3f64.sqrt() / 4.0 * h * h
}

fn longest_edge(r: &Refined) -> f64 {
    r.triangles
        .iter()
        .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
        .map(|[a, b]| dist(r.vertices[a], r.vertices[b]))
        .fold(0.0, f64::max)
}

fn refine_to_size(points: &[Point], edges: &[[usize; 2]], h: f64) -> Result<Refined> {
    let mut area = equilateral_area(h);
    for _ in 0..12 {
        let r = refine_loops(points, edges, area)?;
        if longest_edge(&r) <= 1.5 * h {
            return Ok(r);
        }
        area *= 0.7;
    }
    Err(Error::MeshFailure(format!("could not reach longest edge 1.5 x {h}")))
}

/// Unstructured mesh of the period domain with the blade as a hole.
pub(crate) fn generate_unstructured(geometry: &CascadeGeometry, h: f64) -> Result<Mesh> {
    let tau = geometry.tau();
    let n1 = (lower_curve_length(geometry) / h).ceil().max(1.0) as usize;
    let n2 = (tau / h).ceil().max(1.0) as usize;
    let params = arc_length_parameters(geometry, n1);
    let lower: Vec<Point> = params.iter().map(|&t| geometry.lower().point(t)).collect();
    let [_, _, b_lo, _] = geometry.corners();

    // Lower curve, outflow interior points, upper curve (reversed), inflow interior points.
    let mut points: Vec<Point> = lower.clone();
    for j in 1..n2 {
        points.push([b_lo[0], b_lo[1] + tau * j as f64 / n2 as f64]);
    }
    let upper_start = points.len();
    for p in lower.iter().rev() {
        points.push([p[0], p[1] + tau]);
    }
    let a_lo = lower[0];
    for j in (1..n2).rev() {
        points.push([a_lo[0], a_lo[1] + tau * j as f64 / n2 as f64]);
    }
    let outer = points.len();
    let mut edges: Vec<[usize; 2]> = (0..outer).map(|i| [i, (i + 1) % outer]).collect();
    let mut tags = Vec::with_capacity(outer);
    tags.extend(std::iter::repeat(BoundaryTag::Lower).take(n1));
    tags.extend(std::iter::repeat(BoundaryTag::Outflow).take(n2));
    tags.extend(std::iter::repeat(BoundaryTag::Upper).take(n1));
    tags.extend(std::iter::repeat(BoundaryTag::Inflow).take(n2));

    if let Some(profile) = geometry.profile() {
        let n = ((1.2 * profile.perimeter() / h).ceil() as usize).max(8);
        let start = points.len();
        points.extend(profile.polygon(n));
        for i in 0..n {
            edges.push([start + i, start + (i + 1) % n]);
            tags.push(BoundaryTag::Profile);
        }
    }

    let refined = refine_to_size(&points, &edges, h)?;
    let boundary_edges = edges.iter().zip(&tags).map(|(&v, &tag)| BoundaryEdge { vertices: v, tag }).collect();
    let periodic_pairs = (0..=n1).map(|i| (i, upper_start + n1 - i)).collect();
    Mesh::new(refined.vertices, refined.triangles, boundary_edges, periodic_pairs, tau)
}

/// Triangulates the blade interior bounded by `profile_edges` of `mesh`.
/// Returns new interior vertices and triangles in `mesh` numbering.
pub(crate) fn triangulate_hole(mesh: &Mesh, profile_edges: &[[usize; 2]]) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    let mut loop_vertices: Vec<usize> = profile_edges.iter().flatten().copied().collect();
    loop_vertices.sort_unstable();
    loop_vertices.dedup();
    let local: HashMap<usize, usize> = loop_vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let points: Vec<Point> = loop_vertices.iter().map(|&v| mesh.vertices[v]).collect();
    let edges: Vec<[usize; 2]> = profile_edges.iter().map(|e| [local[&e[0]], local[&e[1]]]).collect();
    let h = profile_edges
        .iter()
        .map(|e| dist(mesh.vertices[e[0]], mesh.vertices[e[1]]))
        .fold(0.0, f64::max);
    let refined = refine_to_size(&points, &edges, h)?;
    let nb = points.len();
    let base = mesh.vertices.len();
    let global = |i: usize| if i < nb { loop_vertices[i] } else { base + i - nb };
    let triangles = refined.triangles.iter().map(|t| t.map(global)).collect();
    // Sanity: blade triangles must not reuse a domain edge.
    let domain: std::collections::HashSet<[usize; 2]> = mesh
        .triangles
        .iter()
        .flat_map(|t| [sorted(t[0], t[1]), sorted(t[1], t[2]), sorted(t[2], t[0])])
        .collect();
    let profile: std::collections::HashSet<[usize; 2]> =
        profile_edges.iter().map(|e| sorted(e[0], e[1])).collect();
    for t in &triangles {
        let t: &[usize; 3] = t;
        for e in [sorted(t[0], t[1]), sorted(t[1], t[2]), sorted(t[2], t[0])] {
            if domain.contains(&e) && !profile.contains(&e) {
                return Err(Error::MeshFailure("blade triangulation overlaps the fluid mesh".into()));
            }
        }
    }
    Ok((refined.vertices[nb..].to_vec(), triangles))
}
