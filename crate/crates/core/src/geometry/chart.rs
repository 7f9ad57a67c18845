//! Graph coordinates near boundary points and corners.
//!
//! A chart is a rigid motion `q = R (p − p0)` under which the nearby boundary
//! becomes a graph `y = α(x)`. The graph functions are evaluated by Newton
//! inversion of the rotated arc parametrization.

use serde::Serialize;

use super::{BoundaryArc, Domain, GeometryError, Rotation, Vec2};

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 50;

/// Value and first three derivatives of a scalar function.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Jet3 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Boundary curve traced by the global parameter s: arc `floor(s) mod n`
/// at local parameter `s − floor(s)`, or a single arc with linear/elliptic
/// continuation beyond its ends.
#[derive(Debug, Clone)]
enum Track {
    Periodic(Vec<BoundaryArc>),
    Single(BoundaryArc),
}

impl Track {
    fn jet(&self, s: f64) -> super::arc::ArcJet {
        match self {
            Track::Periodic(arcs) => {
                let n = arcs.len() as f64;
                let fl = s.floor();
                let idx = fl.rem_euclid(n) as usize;
                arcs[idx].jet(s - fl)
            }
            Track::Single(arc) => arc.jet(s),
        }
    }
}

/// One boundary piece as a graph `y = α(x)` in rotated coordinates.
#[derive(Debug, Clone)]
pub struct Graph {
    track: Track,
    origin: Vec2,
    rotation: Rotation,
    s0: f64,
    /// |x| (or x ≥ 0 for corner edges) up to which evaluation is trusted.
    pub valid_radius: f64,
}

impl Graph {
    fn local(&self, s: f64) -> (Vec2, Vec2, Vec2, Vec2) {
        let j = self.track.jet(s);
        let r = &self.rotation;
        (r.apply(j.p - self.origin), r.apply(j.d1), r.apply(j.d2), r.apply(j.d3))
    }

    /// Solves component `comp` (0 = x, 1 = y) of the rotated curve equal to `target`.
    fn solve(&self, comp: usize, target: f64) -> Result<f64, GeometryError> {
        let pick = |v: Vec2| if comp == 0 { v.x } else { v.y };
        let (_, d1, _, _) = self.local(self.s0);
        let mut s = self.s0 + target / pick(d1);
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d1, _, _) = self.local(s);
            let f = pick(p) - target;
            if f.abs() <= NEWTON_TOL * (1.0 + target.abs()) {
                return Ok(s);
            }
            let df = pick(d1);
            if df == 0.0 || !df.is_finite() {
                break;
            }
            s -= f / df;
        }
        let (p, _, _, _) = self.local(s);
        if (pick(p) - target).abs() <= 1e-11 * (1.0 + target.abs()) {
            return Ok(s);
        }
        Err(GeometryError::ChartRangeExceeded(target))
    }

    fn alpha_at(&self, s: f64) -> Jet3 {
        let (p, d1, d2, d3) = self.local(s);
        let (x1, y1, x2, y2, x3, y3) = (d1.x, d1.y, d2.x, d2.y, d3.x, d3.y);
        let w = y2 * x1 - y1 * x2;
        Jet3 {
            v: p.y,
            d1: y1 / x1,
            d2: w / x1.powi(3),
            d3: (y3 * x1 - y1 * x3) / x1.powi(4) - 3.0 * x2 * w / x1.powi(5),
        }
    }

    /// α and its derivatives at x.
    pub fn alpha(&self, x: f64) -> Result<Jet3, GeometryError> {
        let s = self.solve(0, x)?;
        Ok(self.alpha_at(s))
    }

    /// β = α⁻¹ and its derivatives at y.
    pub fn beta(&self, y: f64) -> Result<Jet3, GeometryError> {
        let s = self.solve(1, y)?;
        let a = self.alpha_at(s);
        let (p, _, _, _) = self.local(s);
        Ok(Jet3 {
            v: p.x,
            d1: 1.0 / a.d1,
            d2: -a.d2 / a.d1.powi(3),
            d3: (3.0 * a.d2 * a.d2 - a.d1 * a.d3) / a.d1.powi(5),
        })
    }

    /// Maps world to chart coordinates.
    pub fn to_chart(&self, p: Vec2) -> Vec2 {
        self.rotation.apply(p - self.origin)
    }

    pub fn to_world(&self, q: Vec2) -> Vec2 {
        self.rotation.apply_inverse(q) + self.origin
    }
}

/// Chart at a smooth boundary point: Ω lies below y = α(x), α(0) = 0, α′(0) = 1.
#[derive(Debug, Clone)]
pub struct LocalChart {
    pub origin: Vec2,
    pub rotation: Rotation,
    pub graph: Graph,
    pub valid_radius: f64,
}

/// Chart at a corner: the interior bisector is +x, Ω = {x > 0, α₂ < y < α₁} locally.
#[derive(Debug, Clone)]
pub struct CornerChart {
    pub origin: Vec2,
    pub rotation: Rotation,
    pub corner: usize,
    pub angle: f64,
    /// α₁ (upper edge, the incoming arc) and α₂ (lower edge, the outgoing arc).
    pub edges: [Graph; 2],
    pub valid_radius: f64,
}

/// Either kind of chart.
#[derive(Debug, Clone)]
pub enum Chart {
    Smooth(LocalChart),
    Corner(CornerChart),
}

impl Chart {
    pub fn origin(&self) -> Vec2 {
        match self {
            Chart::Smooth(c) => c.origin,
            Chart::Corner(c) => c.origin,
        }
    }
    pub fn rotation(&self) -> Rotation {
        match self {
            Chart::Smooth(c) => c.rotation,
            Chart::Corner(c) => c.rotation,
        }
    }
    pub fn valid_radius(&self) -> f64 {
        match self {
            Chart::Smooth(c) => c.valid_radius,
            Chart::Corner(c) => c.valid_radius,
        }
    }
    pub fn to_chart(&self, p: Vec2) -> Vec2 {
        self.rotation().apply(p - self.origin())
    }
    pub fn to_world(&self, q: Vec2) -> Vec2 {
        self.rotation().apply_inverse(q) + self.origin()
    }
}

impl LocalChart {
    pub fn alpha(&self, x: f64) -> Result<Jet3, GeometryError> {
        self.check(x)?;
        self.graph.alpha(x)
    }

    /// β accepts the image of the valid x-range, which reaches past `valid_radius`.
    pub fn beta(&self, y: f64) -> Result<Jet3, GeometryError> {
        self.check(0.5 * y)?;
        self.graph.beta(y)
    }

    fn check(&self, x: f64) -> Result<(), GeometryError> {
        if x.abs() > self.valid_radius * (1.0 + 1e-12) {
            Err(GeometryError::ChartRangeExceeded(x))
        } else {
            Ok(())
        }
    }

    /// Chart-coordinate outward normal κ⁻¹(−α′, 1) and tangent κ⁻¹(1, α′) at (x, α(x)).
    pub fn normal_tangent(&self, x: f64) -> Result<(Vec2, Vec2), GeometryError> {
        let a = self.alpha(x)?;
        let k = (1.0 + a.d1 * a.d1).sqrt();
        Ok((Vec2::new(-a.d1, 1.0) * (1.0 / k), Vec2::new(1.0, a.d1) * (1.0 / k)))
    }

    pub fn to_chart(&self, p: Vec2) -> Vec2 {
        self.graph.to_chart(p)
    }

    pub fn to_world(&self, q: Vec2) -> Vec2 {
        self.graph.to_world(q)
    }
}

impl CornerChart {
    /// α_j for j ∈ {1, 2}.
    pub fn alpha(&self, j: usize, x: f64) -> Result<Jet3, GeometryError> {
        self.check(x)?;
        self.edges[j - 1].alpha(x)
    }

    pub fn beta(&self, j: usize, y: f64) -> Result<Jet3, GeometryError> {
        self.check(0.5 * y)?;
        self.edges[j - 1].beta(y)
    }

    fn check(&self, x: f64) -> Result<(), GeometryError> {
        if x.abs() > self.valid_radius * (1.0 + 1e-12) {
            Err(GeometryError::ChartRangeExceeded(x))
        } else {
            Ok(())
        }
    }

    pub fn to_chart(&self, p: Vec2) -> Vec2 {
        self.rotation.apply(p - self.origin)
    }

    pub fn to_world(&self, q: Vec2) -> Vec2 {
        self.rotation.apply_inverse(q) + self.origin
    }
}

pub fn local_chart(domain: &Domain, p0: Vec2) -> Result<LocalChart, GeometryError> {
    let hit = domain.closest_boundary_point(p0);
    if let Some(i) = domain.corner_near(p0, 1e-12) {
        return Err(GeometryError::PointIsCorner(i));
    }
    if hit.distance > 1e-10 {
        return Err(GeometryError::NotOnBoundary(hit.distance));
    }
    let origin = hit.point;
    let arc = &domain.arcs[hit.arc];
    let tau = arc.tangent(hit.t);
    let nu = -tau.perp();
    let rotation = Rotation::aligning(nu, Vec2::new(-1.0, 1.0).normalized());
    let d_corner = domain.corners.iter().map(|c| c.location.dist(origin)).fold(f64::INFINITY, f64::min);
    // Starting from slope 1, a curve of curvature κ turns vertical within
    // horizontal distance (1 − 1/√2)/κ, where β stops existing. Curvature is
    // taken over the boundary near p0, shrinking the radius until consistent.
    let mut valid_radius = 0.5 * d_corner.min(domain.diameter());
    for _ in 0..20 {
        let k = local_max_curvature(domain, origin, 2.0 * valid_radius);
        let d_curv = if k > 0.0 { (1.0 - std::f64::consts::FRAC_1_SQRT_2) / k } else { f64::INFINITY };
        let r = 0.5 * d_corner.min(d_curv).min(domain.diameter());
        if r >= valid_radius * (1.0 - 1e-12) {
            break;
        }
        valid_radius = r;
    }
    let graph = Graph {
        track: Track::Periodic(domain.arcs.clone()),
        origin,
        rotation,
        s0: hit.arc as f64 + hit.t,
        valid_radius,
    };
    Ok(LocalChart { origin, rotation, graph, valid_radius })
}

fn local_max_curvature(domain: &Domain, p0: Vec2, radius: f64) -> f64 {
    let mut k: f64 = 0.0;
    for arc in domain.arcs.iter().filter(|a| !a.is_straight()) {
        for i in 0..=2048 {
            let t = i as f64 / 2048.0;
            if arc.point(t).dist(p0) <= radius {
                k = k.max(arc.curvature(t).abs());
            }
        }
    }
    k
}

pub fn corner_chart(domain: &Domain, corner: usize) -> Result<CornerChart, GeometryError> {
    let c = domain.corners.get(corner).ok_or(GeometryError::NoSuchCorner(corner))?;
    let arc_in = &domain.arcs[c.incoming_arc];
    let arc_out = &domain.arcs[c.outgoing_arc];
    let t_in = arc_in.tangent(1.0);
    let t_out = arc_out.tangent(0.0);
    let bisector = (t_out - t_in).normalized();
    let rotation = Rotation::aligning(bisector, Vec2::new(1.0, 0.0));
    let origin = c.location;

    let d_corner = domain
        .corners
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != corner)
        .map(|(_, k)| k.location.dist(origin))
        .fold(f64::INFINITY, f64::min);
    let d_ends = arc_in.start().dist(origin).min(arc_out.end().dist(origin));
    let kmax = [arc_in, arc_out]
        .iter()
        .flat_map(|a| (0..=128).map(move |i| a.curvature(i as f64 / 128.0).abs()))
        .fold(0.0, f64::max);
    let d_curv = if kmax > 0.0 { 0.5 * c.angle / kmax } else { f64::INFINITY };
    let valid_radius = 0.5 * d_corner.min(d_ends).min(d_curv);
    let edges = [
        Graph { track: Track::Single(arc_in.clone()), origin, rotation, s0: 1.0, valid_radius },
        Graph { track: Track::Single(arc_out.clone()), origin, rotation, s0: 0.0, valid_radius },
    ];
    Ok(CornerChart { origin, rotation, corner, angle: c.angle, edges, valid_radius })
}

/// Corner chart at a corner, local chart elsewhere on the boundary.
pub fn chart_at(domain: &Domain, p0: Vec2) -> Result<Chart, GeometryError> {
    match domain.corner_near(p0, 1e-12) {
        Some(i) => Ok(Chart::Corner(corner_chart(domain, i)?)),
        None => Ok(Chart::Smooth(local_chart(domain, p0)?)),
    }
}
