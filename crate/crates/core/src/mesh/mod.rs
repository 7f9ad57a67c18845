//! Corner-graded conforming triangulations of convex domains.

mod generate;
mod io;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Domain, Vec2};

pub use generate::generate;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh generation failed: {0}")]
    MeshFailure(String),
    #[error("bad mesh parameters: {0}")]
    BadParameters(String),
    #[error("mesh file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Radial size field around corners: at distance d from the nearest corner
/// the target edge length is h·min(1, d/radius)^(1−1/exponent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub corner_exponent: f64,
    pub corner_radius: f64,
}

impl Grading {
    pub const NONE: Grading = Grading { corner_exponent: 1.0, corner_radius: 1.0 };
}

impl Default for Grading {
    fn default() -> Self {
        Grading::NONE
    }
}

/// A mesh edge on the boundary, oriented with the domain on its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub v: [u32; 2],
    pub arc: u32,
    /// Arc parameters of the two endpoints (t[1] = 1 at the arc's end).
    pub t: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub domain: Domain,
    pub vertices: Vec<Vec2>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[u32; 3]>,
    /// Closed boundary cycle in traversal order.
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Vertex index of each domain corner, in corner order.
    pub corner_vertices: Vec<u32>,
    /// Longest edge.
    pub h_mesh: f64,
}

/// Unique undirected edges and, per triangle, the edge opposite each vertex.
#[derive(Debug, Clone)]
pub struct EdgeTable {
    pub edges: Vec<[u32; 2]>,
    pub tri_edges: Vec<[u32; 3]>,
}

impl TriMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn edge_table(&self) -> EdgeTable {
        let mut map: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut tri_edges = Vec::with_capacity(self.triangles.len());
        for tri in &self.triangles {
            let mut te = [0u32; 3];
            for (k, e) in te.iter_mut().enumerate() {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                let next = map.len() as u32;
                *e = *map.entry(key).or_insert(next);
            }
            tri_edges.push(te);
        }
        let mut edges = vec![[0u32; 2]; map.len()];
        for ((a, b), i) in map {
            edges[i as usize] = [a, b];
        }
        EdgeTable { edges, tri_edges }
    }

    pub fn max_edge(&self) -> f64 {
        let mut m: f64 = 0.0;
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.corners(t);
            m = m.max(a.dist(b)).max(b.dist(c)).max(c.dist(a));
        }
        m
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        (0..self.triangles.len()).map(|t| min_angle(self.corners(t))).fold(180.0, f64::min)
    }

    pub fn boundary_vertices(&self) -> Vec<u32> {
        self.boundary_edges.iter().map(|e| e.v[0]).collect()
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn validate(&self) -> Result<(), String> {
        let nv = self.vertices.len() as u32;
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(format!("triangle {t} has an out-of-range vertex"));
            }
            if self.signed_area(t) <= 0.0 {
                return Err(format!("triangle {t} is not positively oriented"));
            }
        }
        let mut count: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary: BTreeMap<(u32, u32), ()> = BTreeMap::new();
        for e in &self.boundary_edges {
            boundary.insert((e.v[0].min(e.v[1]), e.v[0].max(e.v[1])), ());
        }
        for (&(a, b), &n) in &count {
            let on_boundary = boundary.contains_key(&(a, b));
            if (on_boundary && n != 1) || (!on_boundary && n != 2) {
                return Err(format!("edge ({a}, {b}) is shared by {n} triangles"));
            }
        }
        if boundary.len() != self.boundary_edges.len() {
            return Err("repeated boundary edge".into());
        }
        let m = self.boundary_edges.len();
        for k in 0..m {
            if self.boundary_edges[k].v[1] != self.boundary_edges[(k + 1) % m].v[0] {
                return Err(format!("boundary cycle broken after edge {k}"));
            }
        }
        for (i, c) in self.domain.corners.iter().enumerate() {
            let v = self.corner_vertices.get(i).ok_or("missing corner vertex")?;
            if self.vertices[*v as usize].dist(c.location) > 1e-12 {
                return Err(format!("corner {i} is not a mesh vertex"));
            }
        }
        let edges = count.len() as i64;
        if nv as i64 - edges + self.triangles.len() as i64 != 1 {
            return Err("Euler characteristic is not 1".into());
        }
        Ok(())
    }

    /// Uniform red refinement: every triangle is split into four and the new
    /// boundary midpoints are moved onto the true boundary.
    pub fn refine(&self) -> TriMesh {
        let table = self.edge_table();
        let nv = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        for e in &table.edges {
            vertices.push((self.vertices[e[0] as usize] + self.vertices[e[1] as usize]) * 0.5);
        }
        let edge_index: BTreeMap<(u32, u32), u32> =
            table.edges.iter().enumerate().map(|(i, e)| ((e[0], e[1]), i as u32)).collect();
        let mid = |a: u32, b: u32| nv + edge_index[&(a.min(b), a.max(b))];
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let m = mid(e.v[0], e.v[1]);
            let tm = 0.5 * (e.t[0] + e.t[1]);
            vertices[m as usize] = self.domain.arcs[e.arc as usize].point(tm);
            boundary_edges.push(BoundaryEdge { v: [e.v[0], m], arc: e.arc, t: [e.t[0], tm] });
            boundary_edges.push(BoundaryEdge { v: [m, e.v[1]], arc: e.arc, t: [tm, e.t[1]] });
        }
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (tri, te) in self.triangles.iter().zip(&table.tri_edges) {
            let [a, b, c] = *tri;
            let [ma, mb, mc] = te.map(|e| nv + e);
            triangles.push([a, mc, mb]);
            triangles.push([mc, b, ma]);
            triangles.push([mb, ma, c]);
            triangles.push([ma, mb, mc]);
        }
        let mut out = TriMesh {
            domain: self.domain.clone(),
            vertices,
            triangles,
            boundary_edges,
            corner_vertices: self.corner_vertices.clone(),
            h_mesh: 0.0,
        };
        out.h_mesh = out.max_edge();
        out
    }

    /// Piecewise-linear interpolant values at the vertices.
    pub fn interpolate(&self, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
        self.vertices.iter().map(|&p| f(p)).collect()
    }
}

pub(crate) fn min_angle(p: [Vec2; 3]) -> f64 {
    let mut m: f64 = 180.0;
    for k in 0..3 {
        let a = p[(k + 1) % 3] - p[k];
        let b = p[(k + 2) % 3] - p[k];
        m = m.min(a.cross(b).abs().atan2(a.dot(b)).to_degrees());
    }
    m
}

/// Uniform-grid point location over a mesh.
#[derive(Debug, Clone)]
pub struct Locator {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl Locator {
    pub fn new(mesh: &TriMesh) -> Self {
        let (lo, hi) = mesh.domain.bbox();
        let n = mesh.triangles.len().max(1) as f64;
        let ext = hi - lo;
        let cell = ((ext.x * ext.y) / n).sqrt().max(1e-12) * 2.0;
        let nx = ((ext.x / cell).ceil() as usize).max(1);
        let ny = ((ext.y / cell).ceil() as usize).max(1);
        let mut loc = Locator { origin: lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for t in 0..mesh.triangles.len() {
            let c = mesh.corners(t);
            let (mut a, mut b) = (c[0], c[0]);
            for p in &c[1..] {
                a = Vec2::new(a.x.min(p.x), a.y.min(p.y));
                b = Vec2::new(b.x.max(p.x), b.y.max(p.y));
            }
            let (i0, j0) = loc.cell_of(a);
            let (i1, j1) = loc.cell_of(b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * nx + i].push(t as u32);
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let i = ((p.x - self.origin.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p.y - self.origin.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    /// Containing triangle of `mesh` (the mesh this locator was built for) and
    /// barycentric coordinates.
    pub fn locate(&self, mesh: &TriMesh, p: Vec2) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.cell_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[j * self.nx + i] {
            let bc = barycentric(mesh.corners(t as usize), p);
            let worst = bc.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((t as usize, bc, worst));
            }
        }
        match best {
            Some((t, bc, worst)) if worst >= -1e-10 => Some((t, bc)),
            _ => None,
        }
    }
}

/// Barycentric coordinates of p with respect to a triangle (affine extension outside).
pub fn barycentric(c: [Vec2; 3], p: Vec2) -> [f64; 3] {
    let [a, b, cc] = c;
    let det = (b - a).cross(cc - a);
    let l1 = (p - a).cross(cc - a) / det;
    let l2 = (b - a).cross(p - a) / det;
    [1.0 - l1 - l2, l1, l2]
}

#[cfg(test)]
mod tests;
