use serde::{Deserialize, Serialize};

use super::Vec2;

/// A smooth boundary piece parametrized over t ∈ [0, 1], traversed with the
/// domain on its left. Evaluation outside [0, 1] continues the underlying
/// line or ellipse, which the chart Newton solves rely on near corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryArc {
    Segment { a: Vec2, b: Vec2 },
    /// Axis-aligned elliptic arc `center + (rx cos θ, ry sin θ)` for
    /// θ = θ0 + t (θ1 − θ0), with θ1 > θ0.
    Elliptic { center: Vec2, rx: f64, ry: f64, theta0: f64, theta1: f64 },
}

/// Position and first three parameter derivatives.
#[derive(Debug, Clone, Copy)]
pub struct ArcJet {
    pub p: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
    pub d3: Vec2,
}

impl BoundaryArc {
    pub fn segment(a: Vec2, b: Vec2) -> Self {
        BoundaryArc::Segment { a, b }
    }

    pub fn circle_arc(center: Vec2, r: f64, theta0: f64, theta1: f64) -> Self {
        BoundaryArc::Elliptic { center, rx: r, ry: r, theta0, theta1 }
    }

    pub fn jet(&self, t: f64) -> ArcJet {
        match *self {
            BoundaryArc::Segment { a, b } => {
                let d = b - a;
                ArcJet { p: a + d * t, d1: d, d2: Vec2::ZERO, d3: Vec2::ZERO }
            }
            BoundaryArc::Elliptic { center, rx, ry, theta0, theta1 } => {
                let w = theta1 - theta0;
                let th = theta0 + w * t;
                let (s, c) = th.sin_cos();
                ArcJet {
                    p: center + Vec2::new(rx * c, ry * s),
                    d1: Vec2::new(-rx * s, ry * c) * w,
                    d2: Vec2::new(-rx * c, -ry * s) * (w * w),
                    d3: Vec2::new(rx * s, -ry * c) * (w * w * w),
                }
            }
        }
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.jet(t).p
    }

    pub fn start(&self) -> Vec2 {
        self.point(0.0)
    }

    pub fn end(&self) -> Vec2 {
        self.point(1.0)
    }

    /// Unit tangent in traversal direction.
    pub fn tangent(&self, t: f64) -> Vec2 {
        self.jet(t).d1.normalized()
    }

    /// Signed curvature; positive when turning left (towards the domain).
    pub fn curvature(&self, t: f64) -> f64 {
        let j = self.jet(t);
        j.d1.cross(j.d2) / j.d1.norm().powi(3)
    }

    pub fn is_straight(&self) -> bool {
        matches!(self, BoundaryArc::Segment { .. })
    }

    pub fn length(&self) -> f64 {
        match *self {
            BoundaryArc::Segment { a, b } => a.dist(b),
            BoundaryArc::Elliptic { .. } => {
                let (x, w) = crate::quad::gl(32);
                let n = 16;
                let mut total = 0.0;
                for k in 0..n {
                    let a = k as f64 / n as f64;
                    let h = 1.0 / n as f64;
                    for (xi, wi) in x.iter().zip(w) {
                        let t = a + 0.5 * h * (xi + 1.0);
                        total += 0.5 * h * wi * self.jet(t).d1.norm();
                    }
                }
                total
            }
        }
    }

    /// Contribution of this arc to ∮ x dy (the enclosed area for a closed CCW curve).
    pub fn area_contribution(&self) -> f64 {
        match *self {
            BoundaryArc::Segment { a, b } => 0.5 * (a.x + b.x) * (b.y - a.y),
            BoundaryArc::Elliptic { center, rx, ry, theta0, theta1 } => {
                // ∫ (cx + rx cos θ) ry cos θ dθ
                let int_cos = theta1.sin() - theta0.sin();
                let int_cos2 = 0.5 * (theta1 - theta0) + 0.25 * ((2.0 * theta1).sin() - (2.0 * theta0).sin());
                center.x * ry * int_cos + rx * ry * int_cos2
            }
        }
    }

    /// Parameters t ∈ [0, 1] where the arc meets the ray `origin + s·dir`,
    /// returned with the ray distance `s`.
    pub fn ray_hits(&self, origin: Vec2, dir: Vec2) -> Vec<(f64, f64)> {
        const TOL: f64 = 1e-12;
        match *self {
            BoundaryArc::Segment { a, b } => {
                let e = b - a;
                let denom = dir.cross(e);
                if denom.abs() < 1e-300 {
                    return Vec::new();
                }
                let w = a - origin;
                let s = w.cross(e) / denom;
                let t = w.cross(dir) / denom;
                if (-TOL..=1.0 + TOL).contains(&t) {
                    vec![(t.clamp(0.0, 1.0), s)]
                } else {
                    Vec::new()
                }
            }
            BoundaryArc::Elliptic { center, rx, ry, theta0, theta1 } => {
                // ((o + s d - c)_x / rx)^2 + ((o + s d - c)_y / ry)^2 = 1
                let q = origin - center;
                let (qx, qy) = (q.x / rx, q.y / ry);
                let (dx, dy) = (dir.x / rx, dir.y / ry);
                let a = dx * dx + dy * dy;
                let b = 2.0 * (qx * dx + qy * dy);
                let c = qx * qx + qy * qy - 1.0;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return Vec::new();
                }
                let sq = disc.sqrt();
                // numerically stable pair of roots
                let qq = -0.5 * (b + b.signum() * sq);
                let mut roots = Vec::with_capacity(2);
                if qq != 0.0 {
                    roots.push(qq / a);
                    roots.push(c / qq);
                } else {
                    roots.push(0.0);
                }
                let mut out = Vec::new();
                for s in roots {
                    let p = q + dir * s;
                    let th = (p.y / ry).atan2(p.x / rx);
                    if let Some(t) = angle_param(th, theta0, theta1, 1e-10) {
                        out.push((t, s));
                    }
                }
                out
            }
        }
    }

    /// Parameters where |c(t) − p0| = r, found by sampling and bisection.
    pub fn circle_crossings(&self, p0: Vec2, r: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if let BoundaryArc::Segment { a, b } = *self {
            // exact: |a + t e - p0|^2 = r^2
            {
                let e = b - a;
                let w = a - p0;
                let qa = e.norm_sq();
                let qb = 2.0 * w.dot(e);
                let qc = w.norm_sq() - r * r;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
                        if (0.0..=1.0).contains(&t) {
                            out.push(t);
                        }
                    }
                }
            }
            return out;
        }
        let g = |t: f64| self.point(t).dist(p0) - r;
        let n = 256;
        let mut t_prev = 0.0;
        let mut g_prev = g(0.0);
        for i in 1..=n {
            let t = i as f64 / n as f64;
            let gt = g(t);
            if g_prev == 0.0 {
                out.push(t_prev);
            } else if g_prev * gt < 0.0 {
                let (mut lo, mut hi) = (t_prev, t);
                let mut glo = g_prev;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let gm = g(mid);
                    if (gm < 0.0) == (glo < 0.0) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
            t_prev = t;
            g_prev = gt;
        }
        if g_prev == 0.0 {
            out.push(1.0);
        }
        out
    }

    /// Closest point parameter on [0, 1] and its distance.
    pub fn project(&self, p: Vec2) -> (f64, f64) {
        match *self {
            BoundaryArc::Segment { a, b } => {
                let e = b - a;
                let t = ((p - a).dot(e) / e.norm_sq()).clamp(0.0, 1.0);
                (t, self.point(t).dist(p))
            }
            BoundaryArc::Elliptic { .. } => {
                let n = 64;
                let mut best = (0.0, f64::INFINITY);
                for i in 0..=n {
                    let t = i as f64 / n as f64;
                    let d = self.point(t).dist(p);
                    if d < best.1 {
                        best = (t, d);
                    }
                }
                // Newton on f(t) = (c(t) - p)·c'(t)
                let mut t = best.0;
                for _ in 0..50 {
                    let j = self.jet(t);
                    let r = j.p - p;
                    let f = r.dot(j.d1);
                    let df = j.d1.norm_sq() + r.dot(j.d2);
                    if df <= 0.0 {
                        break;
                    }
                    let step = f / df;
                    let tn = (t - step).clamp(0.0, 1.0);
                    let done = (tn - t).abs() < 1e-15;
                    t = tn;
                    if done {
                        break;
                    }
                }
                let d = self.point(t).dist(p);
                if d < best.1 {
                    (t, d)
                } else {
                    best
                }
            }
        }
    }
}

/// Maps an angle onto the arc parameter, if it lies within [θ0, θ1] up to `tol`.
fn angle_param(th: f64, theta0: f64, theta1: f64, tol: f64) -> Option<f64> {
    let two_pi = std::f64::consts::TAU;
    let w = theta1 - theta0;
    let mut d = (th - theta0).rem_euclid(two_pi);
    if d > w + tol && d > two_pi - tol {
        d -= two_pi;
    }
    if d >= -tol && d <= w + tol {
        Some((d / w).clamp(0.0, 1.0))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn elliptic_derivatives_match_finite_differences() {
        let arc = BoundaryArc::Elliptic { center: Vec2::new(0.3, -0.1), rx: 2.0, ry: 1.0, theta0: 0.2, theta1: 2.9 };
        let eps = 1e-5;
        for t in [0.1, 0.5, 0.93] {
            let j = arc.jet(t);
            let fd1 = (arc.point(t + eps) - arc.point(t - eps)) * (0.5 / eps);
            let fd2 = (arc.jet(t + eps).d1 - arc.jet(t - eps).d1) * (0.5 / eps);
            let fd3 = (arc.jet(t + eps).d2 - arc.jet(t - eps).d2) * (0.5 / eps);
            assert!((fd1 - j.d1).norm() < 1e-8);
            assert!((fd2 - j.d2).norm() < 1e-7);
            assert!((fd3 - j.d3).norm() < 1e-6);
        }
    }

    #[test]
    fn circle_length_and_area() {
        let arc = BoundaryArc::circle_arc(Vec2::ZERO, 1.0, 0.0, PI);
        assert!((arc.length() - PI).abs() < 1e-13);
        assert!((arc.area_contribution() - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn ray_hits_circle_from_boundary_point() {
        let arc = BoundaryArc::circle_arc(Vec2::ZERO, 1.0, 0.0, PI);
        let hits = arc.ray_hits(Vec2::new(1.0, 0.0), Vec2::new(-1.0, 1.0).normalized());
        let far = hits.iter().map(|h| h.1).fold(0.0, f64::max);
        assert!((far - 2f64.sqrt()).abs() < 1e-14, "{hits:?}");
    }

    #[test]
    fn angle_param_wraps() {
        assert!(angle_param(-0.5 * PI, 0.0, 2.0 * PI, 1e-12).is_some());
        assert!(angle_param(-0.5 * PI, 0.0, PI, 1e-12).is_none());
        let t = angle_param(PI, 0.0, PI, 1e-12).unwrap();
        assert!((t - 1.0).abs() < 1e-15);
    }
}
