//! P2/P1 node numbering, periodic folding and Dirichlet bookkeeping.
//!
//! Velocity lives on P2 nodes (vertices, then edge midpoints), pressure on
//! vertices. Nodes on the upper curve are slaves of their lower partner; a
//! periodic class is Dirichlet if any member carries a Dirichlet tag.

use std::collections::HashMap;

use crate::element::LOCAL_EDGES;
use crate::geometry::BoundaryTag;
use crate::mesh::{sorted, Mesh};
use crate::{Error, Point, Result};

/// Quadratic node layout of a mesh.
#[derive(Clone, Debug)]
pub struct P2Topology {
    pub n_vertices: usize,
    /// Edges in first-encounter order over triangles.
    pub edges: Vec<[usize; 2]>,
    pub edge_index: HashMap<[usize; 2], usize>,
    /// Local nodes per triangle: vertices, then midpoints of edges 01, 12, 20.
    pub tri_nodes: Vec<[usize; 6]>,
    pub coords: Vec<Point>,
    /// Bitmask of boundary tags per node.
    pub tags: Vec<u8>,
    /// Periodic master per node (itself unless on the upper curve).
    pub master: Vec<usize>,
}

impl P2Topology {
    pub fn new(mesh: &Mesh) -> Self {
        let nv = mesh.vertices.len();
        let mut edges = Vec::new();
        let mut edge_index = HashMap::new();
        let mut tri_nodes = Vec::with_capacity(mesh.triangles.len());
        for tri in &mesh.triangles {
            let mut nodes = [tri[0], tri[1], tri[2], 0, 0, 0];
            for (k, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                let key = sorted(tri[*a], tri[*b]);
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
                nodes[3 + k] = nv + id;
            }
            tri_nodes.push(nodes);
        }
        let mut coords = mesh.vertices.clone();
        coords.extend(edges.iter().map(|[a, b]| {
            let (p, q) = (mesh.vertices[*a], mesh.vertices[*b]);
            [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
        }));
        let n = nv + edges.len();
        let mut tags = vec![0u8; n];
        for be in &mesh.boundary_edges {
            let bit = be.tag.bit();
            tags[be.vertices[0]] |= bit;
            tags[be.vertices[1]] |= bit;
            tags[nv + edge_index[&sorted(be.vertices[0], be.vertices[1])]] |= bit;
        }
        let mut master: Vec<usize> = (0..n).collect();
        let mut up_of = HashMap::new();
        for &(lo, up) in &mesh.periodic_pairs {
            master[up] = lo;
            up_of.insert(lo, up);
        }
        for be in mesh.edges_with_tag(BoundaryTag::Lower) {
            let [a, b] = be.vertices;
            let lower = nv + edge_index[&sorted(a, b)];
            let upper = nv + edge_index[&sorted(up_of[&a], up_of[&b])];
            master[upper] = lower;
        }
        Self { n_vertices: nv, edges, edge_index, tri_nodes, coords, tags, master }
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn has_tag(&self, node: usize, tag: BoundaryTag) -> bool {
        self.tags[node] & tag.bit() != 0
    }

    /// P2 node of the midpoint of mesh edge `(a, b)`.
    pub fn midpoint_node(&self, a: usize, b: usize) -> usize {
        self.n_vertices + self.edge_index[&sorted(a, b)]
    }
}

/// Unknown numbering for the mixed velocity/pressure system.
///
/// Layout: first velocity component, second velocity component, pressure.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub topo: P2Topology,
    dirichlet_mask: u8,
    vel: Vec<Option<usize>>,
    n_vel: usize,
    pres: Vec<Option<usize>>,
    n_pres: usize,
    pinned: Option<usize>,
}

impl DofMap {
    /// `dirichlet` lists the tags carrying essential velocity conditions.
    /// With `pin_pressure`, the pressure at the first master vertex is fixed
    /// to zero.
    pub fn new(mesh: &Mesh, dirichlet: &[BoundaryTag], pin_pressure: bool) -> Self {
        let topo = P2Topology::new(mesh);
        let mask = dirichlet.iter().fold(0u8, |m, t| m | t.bit());
        let n = topo.n_nodes();
        let mut class_tags = vec![0u8; n];
        for i in 0..n {
            class_tags[topo.master[i]] |= topo.tags[i];
        }
        let mut vel = vec![None; n];
        let mut n_vel = 0;
        for i in 0..n {
            if topo.master[i] == i && class_tags[i] & mask == 0 {
                vel[i] = Some(n_vel);
                n_vel += 1;
            }
        }
        for i in 0..n {
            vel[i] = vel[topo.master[i]];
        }
        let nv = topo.n_vertices;
        let pinned = if pin_pressure { (0..nv).find(|&v| topo.master[v] == v) } else { None };
        let mut pres = vec![None; nv];
        let mut n_pres = 0;
        for v in 0..nv {
            if topo.master[v] == v && Some(v) != pinned {
                pres[v] = Some(n_pres);
                n_pres += 1;
            }
        }
        for v in 0..nv {
            pres[v] = pres[topo.master[v]];
        }
        Self { topo, dirichlet_mask: mask, vel, n_vel, pres, n_pres, pinned }
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_vel
    }

    pub fn n_pressure(&self) -> usize {
        self.n_pres
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_vel + self.n_pres
    }

    pub fn pinned_vertex(&self) -> Option<usize> {
        self.pinned
    }

    /// Global unknown of velocity component `comp` at `node`.
    pub fn velocity_dof(&self, node: usize, comp: usize) -> Option<usize> {
        self.vel[node].map(|k| comp * self.n_vel + k)
    }

    pub fn pressure_dof(&self, vertex: usize) -> Option<usize> {
        self.pres[vertex].map(|k| 2 * self.n_vel + k)
    }

    pub fn is_dirichlet(&self, node: usize) -> bool {
        self.vel[node].is_none()
    }

    pub fn dirichlet_mask(&self) -> u8 {
        self.dirichlet_mask
    }

    /// Evaluates Dirichlet data at every constrained node, slaves included.
    /// Members of one periodic class must agree to 1e-10; slaves then take the
    /// master value.
    pub fn dirichlet_values<F>(&self, value: F) -> Result<Vec<[f64; 2]>>
    where
        F: Fn(usize, Point, u8) -> [f64; 2],
    {
        let n = self.topo.n_nodes();
        let mut out = vec![[0.0; 2]; n];
        for i in 0..n {
            if self.is_dirichlet(i) {
                out[i] = value(i, self.topo.coords[i], self.topo.tags[i]);
            }
        }
        for i in 0..n {
            let m = self.topo.master[i];
            if m != i && self.is_dirichlet(i) {
                let (a, b) = (out[m], out[i]);
                if (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) > 1e-10 {
                    return Err(Error::ConstraintConflict { node: i, first: a, second: b });
                }
                out[i] = a;
            }
        }
        Ok(out)
    }

    /// Per-node velocity from unknowns plus Dirichlet values.
    pub fn expand_velocity(&self, x: &[f64], dirichlet: &[[f64; 2]]) -> Vec<[f64; 2]> {
        (0..self.topo.n_nodes())
            .map(|i| match self.vel[i] {
                Some(k) => [x[k], x[self.n_vel + k]],
                None => dirichlet[i],
            })
            .collect()
    }

    /// Per-vertex pressure from unknowns; the pinned class is zero.
    pub fn expand_pressure(&self, x: &[f64]) -> Vec<f64> {
        (0..self.topo.n_vertices).map(|v| self.pressure_dof(v).map_or(0.0, |k| x[k])).collect()
    }

    /// Inverse of the expansions: unknown vector of a full field (masters read).
    pub fn restrict(&self, velocity: &[[f64; 2]], pressure: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dofs()];
        for i in 0..self.topo.n_nodes() {
            if let Some(k) = self.vel[i] {
                if self.topo.master[i] == i {
                    x[k] = velocity[i][0];
                    x[self.n_vel + k] = velocity[i][1];
                }
            }
        }
        for v in 0..self.topo.n_vertices {
            if self.topo.master[v] == v {
                if let Some(k) = self.pressure_dof(v) {
                    x[k] = pressure[v];
                }
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, ShapeParams};
    use crate::mesh::generate_structured;

    fn mesh() -> Mesh {
        generate_structured(&build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap(), 4, 2).unwrap()
    }

    #[test]
    fn node_counts() {
        let m = mesh();
        let t = P2Topology::new(&m);
        // Euler: edges = vertices + triangles - 1 for a disc.
        assert_eq!(t.edges.len(), 15 + 16 - 1);
        assert_eq!(t.n_nodes(), 45);
    }

    #[test]
    fn periodic_masters_are_translates() {
        let m = mesh();
        let t = P2Topology::new(&m);
        for i in 0..t.n_nodes() {
            let j = t.master[i];
            if j != i {
                assert!(t.has_tag(i, BoundaryTag::Upper));
                assert!((t.coords[i][0] - t.coords[j][0]).abs() < 1e-14);
                assert!((t.coords[i][1] - t.coords[j][1] - 1.0).abs() < 1e-14);
            }
        }
        // 5 vertex pairs and 4 midpoint pairs.
        assert_eq!((0..t.n_nodes()).filter(|&i| t.master[i] != i).count(), 9);
    }

    #[test]
    fn dof_counts() {
        let m = mesh();
        let d = DofMap::new(&m, &[BoundaryTag::Inflow, BoundaryTag::Profile], false);
        // 36 periodic classes, 4 of them on the inflow column (the corners fold).
        assert_eq!(d.n_velocity(), 2 * (36 - 4));
        assert_eq!(d.n_pressure(), 15 - 5);
        let p = DofMap::new(&m, &[BoundaryTag::Inflow], true);
        assert_eq!(p.n_pressure(), 9);
    }

    #[test]
    fn conflicting_dirichlet_data_detected() {
        let m = mesh();
        let d = DofMap::new(&m, &[BoundaryTag::Inflow], false);
        assert!(d.dirichlet_values(|_, x, _| [x[1], 0.0]).is_err());
        assert!(d.dirichlet_values(|_, x, _| [(2.0 * std::f64::consts::PI * x[1]).cos(), 0.0]).is_ok());
    }
}
