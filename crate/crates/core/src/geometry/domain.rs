use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{BoundaryArc, GeometryError, Vec2};

/// Tangent discontinuities above this many radians are corners.
pub const CORNER_TURN_TOL: f64 = 1e-6;
/// Points this close to the boundary are classified as inside.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub location: Vec2,
    /// Interior angle in (0, π).
    pub angle: f64,
    pub incoming_arc: usize,
    pub outgoing_arc: usize,
}

/// Convex planar domain bounded by arcs traversed counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub arcs: Vec<BoundaryArc>,
    pub corners: Vec<Corner>,
    pub area: f64,
}

/// Closest boundary point to a query point.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryHit {
    pub arc: usize,
    pub t: f64,
    pub point: Vec2,
    pub distance: f64,
}

impl Domain {
    pub fn new(name: impl Into<String>, arcs: Vec<BoundaryArc>) -> Result<Self, GeometryError> {
        if arcs.is_empty() {
            return Err(GeometryError::InvalidDomain("no boundary arcs".into()));
        }
        let scale = arcs.iter().map(|a| a.start().norm().max(a.end().norm())).fold(1.0, f64::max);
        let n = arcs.len();
        let mut corners = Vec::new();
        for i in 0..n {
            let a = &arcs[i];
            let b = &arcs[(i + 1) % n];
            let gap = a.end().dist(b.start());
            if gap > 1e-12 * scale {
                return Err(GeometryError::InvalidDomain(format!("arc {i} does not meet arc {} (gap {gap:e})", (i + 1) % n)));
            }
            for k in 0..=16 {
                if a.jet(k as f64 / 16.0).d1.norm() <= 0.0 {
                    return Err(GeometryError::InvalidDomain(format!("arc {i} is not regular")));
                }
            }
            let tin = a.tangent(1.0);
            let tout = b.tangent(0.0);
            let turn = tin.cross(tout).atan2(tin.dot(tout));
            if turn.abs() > CORNER_TURN_TOL {
                if turn <= 0.0 || turn >= PI {
                    return Err(GeometryError::NotConvex(format!("reflex or cusp vertex at {:?}", a.end())));
                }
                corners.push(Corner { location: a.end(), angle: PI - turn, incoming_arc: i, outgoing_arc: (i + 1) % n });
            }
        }
        let area: f64 = arcs.iter().map(BoundaryArc::area_contribution).sum();
        if area <= 0.0 {
            return Err(GeometryError::InvalidDomain("boundary is not counterclockwise".into()));
        }
        let domain = Domain { name: name.into(), arcs, corners, area };
        if !domain.is_convex() {
            return Err(GeometryError::NotConvex(domain.name));
        }
        Ok(domain)
    }

    pub fn unit_square() -> Self {
        Self::rectangle(1.0, 1.0).expect("valid rectangle")
    }

    /// `[0, a] × [0, b]`.
    pub fn rectangle(a: f64, b: f64) -> Result<Self, GeometryError> {
        let v = [Vec2::new(0.0, 0.0), Vec2::new(a, 0.0), Vec2::new(a, b), Vec2::new(0.0, b)];
        let mut d = Self::polygon(&v)?;
        d.name = if a == 1.0 && b == 1.0 { "unit_square".into() } else { format!("rectangle {a} {b}") };
        Ok(d)
    }

    pub fn polygon(vertices: &[Vec2]) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidDomain("polygon needs at least 3 vertices".into()));
        }
        let n = vertices.len();
        let arcs = (0..n).map(|i| BoundaryArc::segment(vertices[i], vertices[(i + 1) % n])).collect();
        Self::new("polygon", arcs)
    }

    /// Upper half of the ellipse x²/a² + y²/b² < 1.
    pub fn half_ellipse(a: f64, b: f64) -> Result<Self, GeometryError> {
        let arcs = vec![
            BoundaryArc::segment(Vec2::new(-a, 0.0), Vec2::new(a, 0.0)),
            BoundaryArc::Elliptic { center: Vec2::ZERO, rx: a, ry: b, theta0: 0.0, theta1: PI },
        ];
        Self::new(if a == 1.0 && b == 1.0 { "half_disc".to_string() } else { format!("half_ellipse {a} {b}") }, arcs)
    }

    pub fn half_disc() -> Self {
        Self::half_ellipse(1.0, 1.0).expect("valid half disc")
    }

    pub fn disc(r: f64) -> Result<Self, GeometryError> {
        let arcs = vec![BoundaryArc::circle_arc(Vec2::ZERO, r, 0.0, 2.0 * PI)];
        Self::new(format!("disc {r}"), arcs)
    }

    pub fn regular_polygon(n: usize, r: f64) -> Result<Self, GeometryError> {
        let v: Vec<Vec2> = (0..n).map(|k| Vec2::from_angle(2.0 * PI * k as f64 / n as f64) * r).collect();
        let mut d = Self::polygon(&v)?;
        d.name = format!("regular_polygon {n} {r}");
        Ok(d)
    }

    /// Circular sector of opening `angle` and radius `r` with apex at the origin.
    pub fn wedge(angle: f64, r: f64) -> Result<Self, GeometryError> {
        if !(angle > 0.0 && angle < PI) {
            return Err(GeometryError::InvalidDomain(format!("wedge angle {angle} outside (0, π)")));
        }
        let arcs = vec![
            BoundaryArc::segment(Vec2::ZERO, Vec2::new(r, 0.0)),
            BoundaryArc::circle_arc(Vec2::ZERO, r, 0.0, angle),
            BoundaryArc::segment(Vec2::from_angle(angle) * r, Vec2::ZERO),
        ];
        Self::new(format!("wedge {angle} {r}"), arcs)
    }

    /// Fine boundary polyline (closed implicitly), `per_arc` points per curved arc.
    pub fn polyline(&self, per_arc: usize) -> Vec<Vec2> {
        let mut pts = Vec::new();
        for arc in &self.arcs {
            let n = if arc.is_straight() { 1 } else { per_arc.max(2) };
            for k in 0..n {
                pts.push(arc.point(k as f64 / n as f64));
            }
        }
        pts
    }

    /// Every vertex of a fine boundary polyline is a strict left turn or
    /// collinear, i.e. lies on the boundary of its convex hull.
    pub fn is_convex(&self) -> bool {
        let pts = self.polyline(256);
        let n = pts.len();
        if n < 3 {
            return false;
        }
        let scale = self.bbox().1.dist(self.bbox().0);
        let mut winding = 0.0;
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let c = pts[(i + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            if e1.cross(e2) < -1e-12 * scale * scale {
                return false;
            }
            winding += e1.cross(e2).atan2(e1.dot(e2));
        }
        (winding - 2.0 * PI).abs() < 1e-6
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.polyline(512) {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        lo.dist(hi)
    }

    pub fn closest_boundary_point(&self, p: Vec2) -> BoundaryHit {
        let mut best = BoundaryHit { arc: 0, t: 0.0, point: self.arcs[0].start(), distance: f64::INFINITY };
        for (i, arc) in self.arcs.iter().enumerate() {
            let (t, d) = arc.project(p);
            if d < best.distance {
                best = BoundaryHit { arc: i, t, point: arc.point(t), distance: d };
            }
        }
        best
    }

    /// Membership in the closure of Ω: crossing-number test against the
    /// chord polygon, refined on the lune between a curved arc and its chord.
    pub fn contains(&self, p: Vec2) -> bool {
        let hit = self.closest_boundary_point(p);
        if hit.distance <= BOUNDARY_TOL {
            return true;
        }
        // Chord polygon through arc endpoints (plus midpoints for curved arcs).
        let mut poly = Vec::new();
        for arc in &self.arcs {
            poly.push(arc.start());
            if !arc.is_straight() {
                for k in 1..8 {
                    poly.push(arc.point(k as f64 / 8.0));
                }
            }
        }
        let inside_poly = crossing_number(&poly, p);
        // Within a lune: sign of the curved arc decides.
        for arc in self.arcs.iter().filter(|a| !a.is_straight()) {
            for k in 0..8 {
                let (t0, t1) = (k as f64 / 8.0, (k + 1) as f64 / 8.0);
                let (a, b) = (arc.point(t0), arc.point(t1));
                if in_lune(arc, t0, t1, a, b, p) {
                    // between chord and convex arc: always inside Ω
                    return true;
                }
            }
        }
        inside_poly
    }

    /// Outward normal and counterclockwise unit tangent at a smooth boundary point.
    pub fn normal_tangent(&self, p: Vec2) -> Result<(Vec2, Vec2), GeometryError> {
        let hit = self.closest_boundary_point(p);
        if hit.distance > 1e-10 {
            return Err(GeometryError::NotOnBoundary(hit.distance));
        }
        if let Some(i) = self.corner_near(p, BOUNDARY_TOL) {
            return Err(GeometryError::PointIsCorner(i));
        }
        let tau = self.arcs[hit.arc].tangent(hit.t);
        Ok((-tau.perp(), tau))
    }

    pub fn corner_near(&self, p: Vec2, tol: f64) -> Option<usize> {
        self.corners.iter().position(|c| c.location.dist(p) <= tol)
    }

    /// Maximum absolute curvature over all arcs (sampled).
    pub fn max_curvature(&self) -> f64 {
        let mut k: f64 = 0.0;
        for arc in self.arcs.iter().filter(|a| !a.is_straight()) {
            for i in 0..=256 {
                k = k.max(arc.curvature(i as f64 / 256.0).abs());
            }
        }
        k
    }

    /// Resolves a point anchor: `corner:i`, `x,y`, or `boundary:i:t`
    /// (arc index and parameter).
    pub fn anchor(&self, spec: &str) -> Result<Vec2, GeometryError> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("corner:") {
            let i: usize = rest.trim().parse().map_err(|_| GeometryError::BadAnchor(spec.into()))?;
            return self.corners.get(i).map(|c| c.location).ok_or_else(|| GeometryError::BadAnchor(spec.into()));
        }
        if let Some(rest) = spec.strip_prefix("boundary:") {
            let mut parts = rest.split(':');
            let i: usize = parts.next().and_then(|s| s.trim().parse().ok()).ok_or_else(|| GeometryError::BadAnchor(spec.into()))?;
            let t: f64 = parts.next().and_then(|s| s.trim().parse().ok()).ok_or_else(|| GeometryError::BadAnchor(spec.into()))?;
            return self.arcs.get(i).map(|a| a.point(t)).ok_or_else(|| GeometryError::BadAnchor(spec.into()));
        }
        let coords: Vec<f64> = spec.split(',').filter_map(|s| s.trim().parse().ok()).collect();
        if coords.len() == 2 {
            let p = Vec2::new(coords[0], coords[1]);
            if !self.contains(p) {
                return Err(GeometryError::BadAnchor(format!("{spec} lies outside the domain")));
            }
            return Ok(self.snap(p));
        }
        Err(GeometryError::BadAnchor(spec.into()))
    }

    /// Moves points within 1e-9 of the boundary exactly onto it (corners first).
    pub fn snap(&self, p: Vec2) -> Vec2 {
        if let Some(i) = self.corner_near(p, 1e-9) {
            return self.corners[i].location;
        }
        let hit = self.closest_boundary_point(p);
        if hit.distance <= 1e-9 {
            hit.point
        } else {
            p
        }
    }
}

fn crossing_number(poly: &[Vec2], p: Vec2) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Whether `p` lies strictly between chord `ab` and the arc piece over [t0, t1].
fn in_lune(arc: &BoundaryArc, t0: f64, t1: f64, a: Vec2, b: Vec2, p: Vec2) -> bool {
    let chord = b - a;
    // outside the chord (to the right of a→b, i.e. on the arc side)
    if chord.cross(p - a) >= 0.0 {
        return false;
    }
    let s = (p - a).dot(chord) / chord.norm_sq();
    if !(0.0..=1.0).contains(&s) {
        return false;
    }
    // The arc bulges to the right of the chord; p is inside if it is left of
    // the arc tangent at its projection.
    let (t, _) = arc.project(p);
    let t = t.clamp(t0, t1);
    let j = arc.jet(t);
    j.d1.cross(p - j.p) >= 0.0
}
