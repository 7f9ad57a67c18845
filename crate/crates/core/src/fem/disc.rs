//! Exact integration of u² over a triangle clipped by a disc or a strip.
//!
//! With G(x, y) = ∫_{x0}^{x} u²(s, y) ds the integral over a region R is the
//! boundary integral ∮_{∂R} G dy. The triangle's polynomial is integrated in
//! closed form along straight pieces (Gauss rules of sufficient degree) and
//! to rounding along circular arcs.

use std::f64::consts::{PI, TAU};

use super::FemField;
use crate::geometry::Vec2;
use crate::mesh::barycentric;
use crate::quad::gl;

struct Local<'a> {
    field: &'a FemField,
    t: usize,
    corners: [Vec2; 3],
    x0: f64,
}

impl Local<'_> {
    fn density(&self, p: Vec2) -> f64 {
        let v = self.field.eval_local(self.t, barycentric(self.corners, p)).0;
        v * v
    }

    /// G(p) with base line x = x0 (exact: u² has degree ≤ 4).
    fn g(&self, p: Vec2) -> f64 {
        let (x, w) = gl(3);
        let half = 0.5 * (p.x - self.x0);
        let mid = 0.5 * (p.x + self.x0);
        x.iter().zip(w).map(|(s, wi)| wi * half * self.density(Vec2::new(mid + half * s, p.y))).sum()
    }

    fn segment(&self, a: Vec2, b: Vec2) -> f64 {
        let dy = b.y - a.y;
        if dy == 0.0 {
            return 0.0;
        }
        let (x, w) = gl(3);
        x.iter().zip(w).map(|(s, wi)| 0.5 * wi * self.g(a + (b - a) * (0.5 * (1.0 + s)))).sum::<f64>() * dy
    }

    fn arc(&self, c: Vec2, r: f64, phi0: f64, phi1: f64) -> f64 {
        let (x, w) = gl(12);
        let n = ((phi1 - phi0) / (PI / 8.0)).ceil().max(1.0) as usize;
        let step = (phi1 - phi0) / n as f64;
        let mut total = 0.0;
        for k in 0..n {
            let a = phi0 + k as f64 * step;
            for (s, wi) in x.iter().zip(w) {
                let phi = a + 0.5 * step * (1.0 + s);
                let p = c + Vec2::new(phi.cos(), phi.sin()) * r;
                total += 0.5 * step * wi * self.g(p) * r * phi.cos();
            }
        }
        total
    }
}

fn inside_triangle(c: &[Vec2; 3], p: Vec2) -> bool {
    barycentric(*c, p).iter().all(|&l| l >= -1e-14)
}

fn segment_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let d = b - a;
    let u = ((p - a).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
    p.dist(a + d * u)
}

pub(super) fn ball_mass(field: &FemField, p0: Vec2, r: f64) -> f64 {
    let mesh = &field.space.mesh;
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let c = mesh.corners(t);
        let lo = Vec2::new(c[0].x.min(c[1].x).min(c[2].x), c[0].y.min(c[1].y).min(c[2].y));
        let hi = Vec2::new(c[0].x.max(c[1].x).max(c[2].x), c[0].y.max(c[1].y).max(c[2].y));
        if p0.x + r < lo.x || p0.x - r > hi.x || p0.y + r < lo.y || p0.y - r > hi.y {
            continue;
        }
        if c.iter().all(|v| v.dist(p0) <= r) {
            total += field.element_mass(t);
            continue;
        }
        let edge_dist = (0..3).map(|k| segment_distance(c[k], c[(k + 1) % 3], p0)).fold(f64::INFINITY, f64::min);
        let p_in = inside_triangle(&c, p0);
        if !p_in && edge_dist >= r {
            continue;
        }
        let local = Local { field, t, corners: c, x0: p0.x };
        if p_in && edge_dist >= r {
            total += local.arc(p0, r, 0.0, TAU);
            continue;
        }
        let mut angles = Vec::new();
        let mut sum = 0.0;
        for k in 0..3 {
            let (a, b) = (c[k], c[(k + 1) % 3]);
            let d = b - a;
            let f = a - p0;
            let qa = d.norm_sq();
            let qb = 2.0 * f.dot(d);
            let qc = f.norm_sq() - r * r;
            let disc = qb * qb - 4.0 * qa * qc;
            let mut params = vec![0.0];
            if disc > 0.0 {
                let sq = disc.sqrt();
                let q = -0.5 * (qb + qb.signum() * sq);
                let mut roots = [q / qa, if q != 0.0 { qc / q } else { -qb / (2.0 * qa) }];
                roots.sort_by(f64::total_cmp);
                for s in roots {
                    // Crossings at a vertex (to rounding) still bound an arc.
                    if (-1e-12..=1.0 + 1e-12).contains(&s) {
                        let s = s.clamp(0.0, 1.0);
                        if s > 0.0 && s < 1.0 {
                            params.push(s);
                        }
                        angles.push((a + d * s - p0).angle().rem_euclid(TAU));
                    }
                }
            }
            params.push(1.0);
            for w in params.windows(2) {
                let mid = a + d * (0.5 * (w[0] + w[1]));
                if mid.dist(p0) < r {
                    sum += local.segment(a + d * w[0], a + d * w[1]);
                }
            }
        }
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|b, a| *b - *a < 1e-12);
        if angles.len() > 1 && angles[0] + TAU - angles[angles.len() - 1] < 1e-12 {
            angles.pop();
        }
        let m = angles.len();
        for i in 0..m {
            let a0 = angles[i];
            let a1 = if i + 1 < m { angles[i + 1] } else { angles[0] + TAU };
            if a1 - a0 <= 0.0 {
                continue;
            }
            let mid = 0.5 * (a0 + a1);
            if inside_triangle(&c, p0 + Vec2::new(mid.cos(), mid.sin()) * r) {
                sum += local.arc(p0, r, a0, a1);
            }
        }
        total += sum;
    }
    total
}

/// Clips a polygon to the half-plane sign·(y − level) ≤ 0.
fn clip(poly: &[Vec2], level: f64, sign: f64) -> Vec<Vec2> {
    let inside = |p: &Vec2| sign * (p.y - level) <= 0.0;
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (ia, ib) = (inside(&a), inside(&b));
        if ia {
            out.push(a);
        }
        if ia != ib {
            let s = (level - a.y) / (b.y - a.y);
            out.push(a + (b - a) * s);
        }
    }
    out
}

pub(super) fn strip_mass(field: &FemField, y0: f64, y1: f64) -> f64 {
    let mesh = &field.space.mesh;
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let c = mesh.corners(t);
        let (lo, hi) = (c[0].y.min(c[1].y).min(c[2].y), c[0].y.max(c[1].y).max(c[2].y));
        if hi <= y0 || lo >= y1 {
            continue;
        }
        if lo >= y0 && hi <= y1 {
            total += field.element_mass(t);
            continue;
        }
        let poly = clip(&clip(&c, y0, -1.0), y1, 1.0);
        if poly.len() < 3 {
            continue;
        }
        let local = Local { field, t, corners: c, x0: poly[0].x };
        total += (0..poly.len()).map(|i| local.segment(poly[i], poly[(i + 1) % poly.len()])).sum::<f64>();
    }
    total
}
