//! Delaunay refinement with a corner-graded size field.
//!
//! Boundary vertices are placed along each arc by equidistributing the size
//! field. Interior vertices are circumcenters of bad triangles (too large for
//! the size field, or with radius/shortest-edge ratio above √2). A
//! circumcenter inside the diametral circle of a boundary segment splits that
//! segment at its arc-parameter midpoint instead. Boundary segments are
//! constraint edges of the triangulation.

use std::collections::BTreeSet;

use spade::handles::FixedVertexHandle;
use spade::{ConstrainedDelaunayTriangulation, HasPosition, HierarchyHintGenerator, Point2, Triangulation};

use super::{min_angle, BoundaryEdge, Grading, MeshError, TriMesh};
use crate::geometry::{BoundaryArc, Domain, Vec2};

const QUALITY_RATIO: f64 = std::f64::consts::SQRT_2;
const MIN_ANGLE_DEG: f64 = 20.0;
const SMOOTHING_PASSES: usize = 5;
const MAX_ROUNDS: usize = 10;
const MAX_PASSES: usize = 400;
const MAX_VERTICES: usize = 3_000_000;

#[derive(Debug, Clone, Copy)]
struct Node {
    pos: Point2<f64>,
    tag: Option<(u32, f64)>,
}

impl HasPosition for Node {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

type Dt = ConstrainedDelaunayTriangulation<Node, (), (), (), HierarchyHintGenerator<f64>>;

fn v2(p: Point2<f64>) -> Vec2 {
    Vec2::new(p.x, p.y)
}

fn p2(v: Vec2) -> Point2<f64> {
    Point2::new(v.x, v.y)
}

struct SizeField {
    h: f64,
    corners: Vec<Vec2>,
    radius: f64,
    power: f64,
}

impl SizeField {
    fn at(&self, p: Vec2) -> f64 {
        if self.power <= 0.0 || self.corners.is_empty() {
            return self.h;
        }
        let d = self.corners.iter().map(|c| c.dist(p)).fold(f64::INFINITY, f64::min);
        (self.h * (d / self.radius).min(1.0).powf(self.power)).max(self.h / 100.0)
    }
}

/// Parameters in [0, 1) equidistributing ∫ |X′| / s dt along the arc.
fn place_on_arc(arc: &BoundaryArc, size: &SizeField, min_segments: usize) -> Vec<f64> {
    let density = |t: f64| arc.jet(t).d1.norm() / size.at(arc.point(t));
    let mut table = vec![(0.0, 0.0)];
    let (mut t, mut f) = (0.0f64, 0.0f64);
    while t < 1.0 {
        let dt = (0.05 / density(t)).min(0.01);
        let t1 = (t + dt).min(1.0);
        f += (t1 - t) * density(0.5 * (t + t1));
        t = t1;
        table.push((t, f));
    }
    let n = (f.round() as usize).max(min_segments).max(1);
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let target = f * k as f64 / n as f64;
        while j + 1 < table.len() - 1 && table[j + 1].1 < target {
            j += 1;
        }
        let (ta, fa) = table[j];
        let (tb, fb) = table[j + 1];
        let s = if fb > fa { ((target - fa) / (fb - fa)).clamp(0.0, 1.0) } else { 0.0 };
        out.push(if k == 0 { 0.0 } else { ta + s * (tb - ta) });
    }
    out
}

fn circumcircle(a: Vec2, b: Vec2, c: Vec2) -> (Vec2, f64) {
    let (ba, ca) = (b - a, c - a);
    let d = 2.0 * ba.cross(ca);
    let (b2, c2) = (ba.norm_sq(), ca.norm_sq());
    let u = Vec2::new(ca.y * b2 - ba.y * c2, ba.x * c2 - ca.x * b2) * (1.0 / d);
    (a + u, u.norm())
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: Vec2,
    b: Vec2,
    arc: u32,
    t: [f64; 2],
    v: [usize; 2],
}

/// Boundary cycle read off the tagged vertices, in traversal order.
fn boundary_cycle(tags: impl Iterator<Item = (usize, Option<(u32, f64)>)>) -> Vec<(u32, [f64; 2], [usize; 2])> {
    let mut tagged: Vec<(u32, f64, usize)> = tags.filter_map(|(i, t)| t.map(|(arc, t)| (arc, t, i))).collect();
    tagged.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let n = tagged.len();
    (0..n)
        .map(|k| {
            let (arc, t0, u) = tagged[k];
            let (arc1, t1, w) = tagged[(k + 1) % n];
            let t_end = if arc1 == arc && t1 > t0 { t1 } else { 1.0 };
            (arc, [t0, t_end], [u, w])
        })
        .collect()
}

fn segments(dt: &Dt) -> Vec<Segment> {
    let positions: Vec<Vec2> = dt.vertices().map(|v| v2(v.position())).collect();
    boundary_cycle(dt.vertices().map(|v| (v.fix().index(), v.data().tag)))
        .into_iter()
        .map(|(arc, t, v)| Segment { a: positions[v[0]], b: positions[v[1]], arc, t, v })
        .collect()
}

fn build(nodes: Vec<Node>) -> Result<Dt, MeshError> {
    let edges = boundary_cycle(nodes.iter().map(|n| n.tag).enumerate()).into_iter().map(|(_, _, v)| v).collect();
    let n = nodes.len();
    let dt = Dt::bulk_load_cdt(nodes, edges).map_err(|e| MeshError::MeshFailure(format!("{e:?}")))?;
    if dt.num_vertices() != n {
        return Err(MeshError::MeshFailure("duplicate vertices".into()));
    }
    Ok(dt)
}

/// Inner faces enclosed by the boundary constraints (indexed by face index).
/// Faces between the hull and nearly collinear boundary vertices are outside.
fn inside_faces(dt: &Dt) -> Vec<bool> {
    let mut outside = vec![false; dt.num_all_faces()];
    let mut stack = Vec::new();
    for e in dt.convex_hull() {
        if e.as_undirected().data().is_constraint_edge() {
            continue;
        }
        for f in [e.face(), e.rev().face()] {
            if let Some(f) = f.as_inner() {
                if !outside[f.fix().index()] {
                    outside[f.fix().index()] = true;
                    stack.push(f.fix());
                }
            }
        }
    }
    while let Some(f) = stack.pop() {
        for e in dt.face(f).adjacent_edges() {
            if e.as_undirected().data().is_constraint_edge() {
                continue;
            }
            if let Some(nb) = e.rev().face().as_inner() {
                if !outside[nb.fix().index()] {
                    outside[nb.fix().index()] = true;
                    stack.push(nb.fix());
                }
            }
        }
    }
    let mut inside: Vec<bool> = outside.iter().map(|o| !o).collect();
    inside[dt.outer_face().fix().index()] = false;
    inside
}

/// Buckets of boundary segments by the bounding box of their diametral circle.
struct SegmentGrid {
    lo: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl SegmentGrid {
    fn new(domain: &Domain, segs: &[Segment], cell: f64) -> Self {
        let (lo, hi) = domain.bbox();
        let lo = lo - Vec2::new(cell, cell);
        let hi = hi + Vec2::new(cell, cell);
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).clamp(1, 4096);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).clamp(1, 4096);
        let cell = ((hi.x - lo.x) / nx as f64).max((hi.y - lo.y) / ny as f64);
        let mut grid = SegmentGrid { lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for (i, s) in segs.iter().enumerate() {
            let m = (s.a + s.b) * 0.5;
            let r = 0.5 * s.a.dist(s.b);
            let (i0, j0) = grid.cell_of(m - Vec2::new(r, r));
            let (i1, j1) = grid.cell_of(m + Vec2::new(r, r));
            for j in j0..=j1 {
                for k in i0..=i1 {
                    grid.buckets[j * nx + k].push(i);
                }
            }
        }
        grid
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let i = ((p.x - self.lo.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p.y - self.lo.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    fn encroached(&self, segs: &[Segment], p: Vec2) -> Option<usize> {
        let (i, j) = self.cell_of(p);
        self.buckets[j * self.nx + i].iter().copied().find(|&k| {
            let s = &segs[k];
            let m = (s.a + s.b) * 0.5;
            p.dist(m) < 0.5 * s.a.dist(s.b) * (1.0 - 1e-12)
        })
    }
}

struct Mesher<'a> {
    domain: &'a Domain,
    size: SizeField,
    corner_vertices: Vec<Vec2>,
    small_corners: Vec<Vec2>,
}

impl Mesher<'_> {
    fn boundary_nodes(&self) -> Vec<Node> {
        let mut nodes = Vec::new();
        let scale = self.domain.diameter();
        for (i, arc) in self.domain.arcs.iter().enumerate() {
            let min_segments = if arc.is_straight() { 1 } else { 4 };
            for t in place_on_arc(arc, &self.size, min_segments) {
                let mut p = arc.point(t);
                if t == 0.0 {
                    if let Some(c) = self.corner_vertices.iter().find(|c| c.dist(p) <= 1e-10 * scale) {
                        p = *c;
                    }
                }
                nodes.push(Node { pos: p2(p), tag: Some((i as u32, t)) });
            }
        }
        nodes
    }

    /// Triangles whose smallest angle sits at a corner sharper than 60° are
    /// exempt from the shape test: their angle cannot be improved by insertion.
    fn shape_exempt(&self, p: [Vec2; 3], shortest: f64) -> bool {
        if shortest < self.size.h / 200.0 {
            return true;
        }
        if self.small_corners.is_empty() {
            return false;
        }
        let mut best = (180.0, 0);
        for k in 0..3 {
            let a = p[(k + 1) % 3] - p[k];
            let b = p[(k + 2) % 3] - p[k];
            let ang = a.cross(b).abs().atan2(a.dot(b)).to_degrees();
            if ang < best.0 {
                best = (ang, k);
            }
        }
        self.small_corners.iter().any(|c| c.dist(p[best.1]) <= 1e-12 * self.size.h)
    }

    /// One sweep over all bad triangles. Returns the number of changes.
    fn refine_pass(&self, dt: &mut Dt) -> Result<usize, MeshError> {
        let segs = segments(dt);
        let cell = segs.iter().map(|s| s.a.dist(s.b)).fold(0.0, f64::max).max(self.size.h / 4.0);
        let grid = SegmentGrid::new(self.domain, &segs, cell);
        let inside = inside_faces(dt);
        let nearest_segment = |p: Vec2| -> usize {
            let dist = |s: &Segment| {
                let d = s.b - s.a;
                let u = ((p - s.a).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
                p.dist(s.a + d * u)
            };
            (0..segs.len()).min_by(|&i, &j| dist(&segs[i]).total_cmp(&dist(&segs[j]))).unwrap_or(0)
        };
        let mut splits: BTreeSet<usize> = BTreeSet::new();
        for (i, s) in segs.iter().enumerate() {
            if s.a.dist(s.b) > 1.5 * self.size.at((s.a + s.b) * 0.5) {
                splits.insert(i);
            }
        }
        let mut candidates = Vec::new();
        for f in dt.inner_faces() {
            if !inside[f.fix().index()] {
                continue;
            }
            let p = f.vertices().map(|v| v2(v.position()));
            let (cc, r) = circumcircle(p[0], p[1], p[2]);
            let shortest = p[0].dist(p[1]).min(p[1].dist(p[2])).min(p[2].dist(p[0]));
            let centroid = (p[0] + p[1] + p[2]) * (1.0 / 3.0);
            let too_big = r > self.size.at(centroid) / 3f64.sqrt();
            let bad_shape = r / shortest > QUALITY_RATIO && !self.shape_exempt(p, shortest);
            if too_big || bad_shape {
                candidates.push((r, cc, f.vertices().map(|v| v.fix())));
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.x.total_cmp(&b.1.x)).then(a.1.y.total_cmp(&b.1.y)));
        let mut changes = 0;
        for (_, cc, [a, b, c]) in candidates {
            // Skip triangles already destroyed by earlier insertions in this pass.
            let alive = dt
                .get_edge_from_neighbors(a, b)
                .and_then(|e| e.opposite_vertex())
                .is_some_and(|v| v.fix() == c);
            if !alive {
                continue;
            }
            if let Some(k) = grid.encroached(&segs, cc) {
                splits.insert(k);
                continue;
            }
            // Outside the encroachment discs the chord polygon and the domain agree.
            let in_domain = self.domain.contains(cc);
            if !in_domain {
                splits.insert(nearest_segment(cc));
                continue;
            }
            dt.insert(Node { pos: p2(cc), tag: None }).map_err(|e| MeshError::MeshFailure(format!("{e:?}")))?;
            changes += 1;
        }
        for k in splits {
            let s = segs[k];
            let [u, w] = s.v.map(FixedVertexHandle::from_index);
            let edge = dt
                .get_edge_from_neighbors(u, w)
                .map(|e| e.fix().as_undirected())
                .ok_or_else(|| MeshError::MeshFailure("boundary edge lost".into()))?;
            dt.remove_constraint_edge(edge);
            let tm = 0.5 * (s.t[0] + s.t[1]);
            let p = self.domain.arcs[s.arc as usize].point(tm);
            let m = dt
                .insert(Node { pos: p2(p), tag: Some((s.arc, tm)) })
                .map_err(|e| MeshError::MeshFailure(format!("{e:?}")))?;
            dt.add_constraint(u, m);
            dt.add_constraint(m, w);
            changes += 1;
        }
        if dt.num_vertices() > MAX_VERTICES {
            return Err(MeshError::MeshFailure(format!("more than {MAX_VERTICES} vertices")));
        }
        Ok(changes)
    }

    fn refine(&self, dt: &mut Dt) -> Result<(), MeshError> {
        for _ in 0..MAX_PASSES {
            if self.refine_pass(dt)? == 0 {
                return Ok(());
            }
        }
        Err(MeshError::MeshFailure(format!("Delaunay refinement did not settle in {MAX_PASSES} passes")))
    }
}

fn extract(dt: &Dt) -> (Vec<Vec2>, Vec<Option<(u32, f64)>>, Vec<[u32; 3]>) {
    let pos = dt.vertices().map(|v| v2(v.position())).collect();
    let tags = dt.vertices().map(|v| v.data().tag).collect();
    let inside = inside_faces(dt);
    let tris = dt
        .inner_faces()
        .filter(|f| inside[f.fix().index()])
        .map(|f| f.vertices().map(|v| v.fix().index() as u32))
        .collect();
    (pos, tags, tris)
}

/// Smart Laplacian smoothing: an interior vertex moves to the centroid of its
/// neighbours when that does not lower the smallest angle of its star.
fn smooth(pos: &mut [Vec2], tags: &[Option<(u32, f64)>], tris: &[[u32; 3]], passes: usize) {
    let n = pos.len();
    let mut star: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (t, tri) in tris.iter().enumerate() {
        for &v in tri {
            star[v as usize].push(t as u32);
        }
    }
    let star_quality = |pos: &[Vec2], v: usize| -> f64 {
        star[v]
            .iter()
            .map(|&t| {
                let p = tris[t as usize].map(|i| pos[i as usize]);
                if (p[1] - p[0]).cross(p[2] - p[0]) <= 0.0 {
                    -1.0
                } else {
                    min_angle(p)
                }
            })
            .fold(180.0, f64::min)
    };
    for _ in 0..passes {
        for v in 0..n {
            if tags[v].is_some() || star[v].is_empty() {
                continue;
            }
            let mut sum = Vec2::ZERO;
            let mut cnt = 0.0;
            for &t in &star[v] {
                for &u in &tris[t as usize] {
                    if u as usize != v {
                        sum = sum + pos[u as usize];
                        cnt += 1.0;
                    }
                }
            }
            let old = pos[v];
            let before = star_quality(pos, v);
            pos[v] = sum * (1.0 / cnt);
            if star_quality(pos, v) < before {
                pos[v] = old;
            }
        }
    }
}

/// Builds a conforming triangulation of `domain` with target edge length
/// `h_mesh`, graded towards the corners.
pub fn generate(domain: &Domain, h_mesh: f64, grading: Grading) -> Result<TriMesh, MeshError> {
    if !(h_mesh > 0.0 && h_mesh.is_finite()) {
        return Err(MeshError::BadParameters(format!("h_mesh = {h_mesh}")));
    }
    if !(grading.corner_exponent >= 1.0) || !(grading.corner_radius > 0.0) {
        return Err(MeshError::BadParameters(format!(
            "grading exponent {} (needs ≥ 1), radius {} (needs > 0)",
            grading.corner_exponent, grading.corner_radius
        )));
    }
    let corners: Vec<Vec2> = domain.corners.iter().map(|c| c.location).collect();
    let min_corner = domain.corners.iter().map(|c| c.angle.to_degrees()).fold(180.0, f64::min);
    let mesher = Mesher {
        domain,
        size: SizeField {
            h: h_mesh,
            corners: corners.clone(),
            radius: grading.corner_radius,
            power: 1.0 - 1.0 / grading.corner_exponent,
        },
        corner_vertices: corners.clone(),
        small_corners: domain.corners.iter().filter(|c| c.angle.to_degrees() < 60.0).map(|c| c.location).collect(),
    };
    let floor = MIN_ANGLE_DEG.min(0.5 * min_corner);
    let mut dt = build(mesher.boundary_nodes())?;
    let mut last_angle = 0.0;
    for _ in 0..MAX_ROUNDS {
        mesher.refine(&mut dt)?;
        let (mut pos, tags, tris) = extract(&dt);
        smooth(&mut pos, &tags, &tris, SMOOTHING_PASSES);
        let nodes: Vec<Node> = pos.iter().zip(&tags).map(|(&p, &tag)| Node { pos: p2(p), tag }).collect();
        dt = build(nodes)?;
        let (pos, tags, tris) = extract(&dt);
        last_angle = tris.iter().map(|t| min_angle(t.map(|i| pos[i as usize]))).fold(180.0, f64::min);
        if last_angle >= floor {
            return assemble(domain, pos, tags, tris);
        }
    }
    Err(MeshError::MeshFailure(format!(
        "minimum angle {last_angle:.2}° below {floor:.1}° after {MAX_ROUNDS} rounds"
    )))
}

fn assemble(
    domain: &Domain,
    vertices: Vec<Vec2>,
    tags: Vec<Option<(u32, f64)>>,
    triangles: Vec<[u32; 3]>,
) -> Result<TriMesh, MeshError> {
    let mut tagged: Vec<(u32, f64, u32)> =
        tags.iter().enumerate().filter_map(|(i, t)| t.map(|(a, s)| (a, s, i as u32))).collect();
    tagged.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let n = tagged.len();
    let mut boundary_edges = Vec::with_capacity(n);
    for k in 0..n {
        let (arc, t0, u) = tagged[k];
        let (arc1, t1, w) = tagged[(k + 1) % n];
        let t_end = if arc1 == arc && t1 > t0 { t1 } else { 1.0 };
        boundary_edges.push(BoundaryEdge { v: [u, w], arc, t: [t0, t_end] });
    }
    let mut corner_vertices = Vec::with_capacity(domain.corners.len());
    for c in &domain.corners {
        let v = tagged
            .iter()
            .find(|&&(arc, t, _)| arc as usize == c.outgoing_arc && t == 0.0)
            .ok_or_else(|| MeshError::MeshFailure("corner vertex missing".into()))?;
        corner_vertices.push(v.2);
    }
    let mut mesh = TriMesh { domain: domain.clone(), vertices, triangles, boundary_edges, corner_vertices, h_mesh: 0.0 };
    mesh.h_mesh = mesh.max_edge();
    mesh.validate().map_err(MeshError::MeshFailure)?;
    Ok(mesh)
}
