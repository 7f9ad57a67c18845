//! Plain-text mesh format.
//!
//! ```text
//! vertices N / triangles M
//! x y            (N rows)
//! i j k          (M rows)
//! boundary_edges B
//! i j arc t0 t1  (B rows)
//! corners C
//! i              (C rows)
//! domain {json}
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryEdge, MeshError, TriMesh};
use crate::geometry::{Domain, Vec2};
use crate::text::hex_digest;

impl TriMesh {
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(64 * (self.vertices.len() + self.triangles.len()));
        let _ = writeln!(s, "vertices {} / triangles {}", self.vertices.len(), self.triangles.len());
        for p in &self.vertices {
            let _ = writeln!(s, "{} {}", p.x, p.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "boundary_edges {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {} {} {}", e.v[0], e.v[1], e.arc, e.t[0], e.t[1]);
        }
        let _ = writeln!(s, "corners {}", self.corner_vertices.len());
        for c in &self.corner_vertices {
            let _ = writeln!(s, "{c}");
        }
        let _ = writeln!(s, "domain {}", serde_json::to_string(&self.domain).unwrap_or_default());
        s
    }

    pub fn from_text(text: &str) -> Result<TriMesh, MeshError> {
        let bad = |m: &str| MeshError::Parse(m.to_string());
        let mut lines = text.lines();
        let mut next = || lines.next().ok_or_else(|| bad("unexpected end of file"));
        let header: Vec<&str> = next()?.split_whitespace().collect();
        let (nv, nt) = match header.as_slice() {
            ["vertices", n, "/", "triangles", m] => {
                (n.parse::<usize>().map_err(|_| bad("vertex count"))?, m.parse::<usize>().map_err(|_| bad("triangle count"))?)
            }
            _ => return Err(bad("header")),
        };
        fn nums<T: std::str::FromStr>(line: &str, n: usize) -> Option<Vec<T>> {
            let v: Vec<T> = line.split_whitespace().map(|x| x.parse().ok()).collect::<Option<_>>()?;
            (v.len() == n).then_some(v)
        }
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let v: Vec<f64> = nums(next()?, 2).ok_or_else(|| bad("vertex row"))?;
            vertices.push(Vec2::new(v[0], v[1]));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let v: Vec<u32> = nums(next()?, 3).ok_or_else(|| bad("triangle row"))?;
            triangles.push([v[0], v[1], v[2]]);
        }
        let count = |line: &str, key: &str| -> Result<usize, MeshError> {
            line.strip_prefix(key).and_then(|r| r.trim().parse().ok()).ok_or_else(|| bad(key))
        };
        let nb = count(next()?, "boundary_edges")?;
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let parts: Vec<&str> = next()?.split_whitespace().collect();
            if parts.len() != 5 {
                return Err(bad("boundary row"));
            }
            let u = |i: usize| parts[i].parse::<u32>().map_err(|_| bad("boundary row"));
            let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad("boundary row"));
            boundary_edges.push(BoundaryEdge { v: [u(0)?, u(1)?], arc: u(2)?, t: [f(3)?, f(4)?] });
        }
        let nc = count(next()?, "corners")?;
        let mut corner_vertices = Vec::with_capacity(nc);
        for _ in 0..nc {
            corner_vertices.push(next()?.trim().parse().map_err(|_| bad("corner row"))?);
        }
        let json = next()?.strip_prefix("domain ").ok_or_else(|| bad("domain line"))?;
        let domain: Domain = serde_json::from_str(json).map_err(|e| MeshError::Parse(e.to_string()))?;
        let mut mesh = TriMesh { domain, vertices, triangles, boundary_edges, corner_vertices, h_mesh: 0.0 };
        mesh.h_mesh = mesh.max_edge();
        mesh.validate().map_err(MeshError::Parse)?;
        Ok(mesh)
    }

    /// SHA-256 of the text form, hex encoded.
    pub fn content_hash(&self) -> String {
        hex_digest(self.to_text().as_bytes())
    }

    pub fn save(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TriMesh, MeshError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

