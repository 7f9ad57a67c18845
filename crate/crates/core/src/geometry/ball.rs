//! Integration over B(p0, r) ∩ Ω in polar coordinates about p0.
//!
//! For a convex domain and p0 in its closure every ray leaves Ω once, so the
//! region is `{ρ < R(θ)}` with `R(θ) = min(r, exit(θ))`. R is smooth between
//! the breakpoint directions collected below, and the θ-integral is adaptive.

use std::f64::consts::{PI, TAU};

use super::{Domain, Vec2};
use crate::quad::{self, Estimate, QuadValue};

#[derive(Debug, Clone, Copy)]
pub struct BallQuadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Longest radial panel (resolution of the integrand, e.g. a wavelength).
    pub max_dr: f64,
    /// Longest initial angular panel.
    pub max_dtheta: f64,
    pub max_panels: usize,
}

impl Default for BallQuadrature {
    fn default() -> Self {
        BallQuadrature { abs_tol: 1e-14, rel_tol: 1e-10, max_dr: f64::INFINITY, max_dtheta: PI / 8.0, max_panels: 20_000 }
    }
}

/// Distance from p0 along `dir` to where the ray leaves Ω (0 if it leaves at once).
pub fn exit_distance(domain: &Domain, p0: Vec2, dir: Vec2) -> f64 {
    let mut best: f64 = 0.0;
    for arc in &domain.arcs {
        for (_, s) in arc.ray_hits(p0, dir) {
            if s > best {
                best = s;
            }
        }
    }
    let scale = domain.diameter();
    if best < 1e-12 * scale {
        0.0
    } else {
        best
    }
}

/// Directions at which R(θ) may fail to be smooth.
pub fn breakpoint_angles(domain: &Domain, p0: Vec2, r: f64) -> Vec<f64> {
    let mut angles = Vec::new();
    let tiny = 1e-13 * (1.0 + p0.norm());
    for c in &domain.corners {
        let d = c.location - p0;
        if d.norm() > tiny {
            angles.push(d.angle());
        }
    }
    for arc in &domain.arcs {
        for t in arc.circle_crossings(p0, r) {
            angles.push((arc.point(t) - p0).angle());
        }
    }
    let hit = domain.closest_boundary_point(p0);
    if hit.distance <= 1e-10 {
        if let Some(i) = domain.corner_near(p0, 1e-10) {
            let c = &domain.corners[i];
            angles.push((-domain.arcs[c.incoming_arc].tangent(1.0)).angle());
            angles.push(domain.arcs[c.outgoing_arc].tangent(0.0).angle());
        } else {
            let tau = domain.arcs[hit.arc].tangent(hit.t);
            angles.push(tau.angle());
            angles.push((-tau).angle());
        }
    }
    let mut out: Vec<f64> = angles.into_iter().map(|a| a.rem_euclid(TAU)).collect();
    out.push(0.0);
    out.push(TAU);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    out
}

/// ∫_{B(p0,r)∩Ω} f dA.
pub fn integrate_ball<V: QuadValue>(
    domain: &Domain,
    p0: Vec2,
    r: f64,
    f: impl Fn(Vec2) -> V,
    opts: &BallQuadrature,
) -> Estimate<V> {
    let breaks = breakpoint_angles(domain, p0, r);
    let breaks = quad::subdivide(&breaks, opts.max_dtheta);
    let (gx, gw) = quad::gl(20);
    let radial = |theta: f64| -> V {
        let dir = Vec2::from_angle(theta);
        let rmax = r.min(exit_distance(domain, p0, dir));
        if rmax <= 0.0 {
            return V::zero();
        }
        let n = if opts.max_dr.is_finite() { (rmax / opts.max_dr).ceil().max(1.0) as usize } else { 1 };
        let hw = 0.5 * rmax / n as f64;
        let mut acc = V::zero();
        for k in 0..n {
            let c = (2 * k + 1) as f64 * hw;
            for (x, w) in gx.iter().zip(gw) {
                let rho = c + hw * x;
                acc = acc + f(p0 + dir * rho) * (w * hw * rho);
            }
        }
        acc
    };
    quad::integrate_adaptive(radial, &breaks, opts.abs_tol, opts.rel_tol, opts.max_panels)
}

/// Area of B(p0, r) ∩ Ω.
pub fn ball_domain_area(domain: &Domain, p0: Vec2, r: f64) -> f64 {
    let opts = BallQuadrature { rel_tol: 1e-12, ..Default::default() };
    integrate_ball(domain, p0, r, |_| 1.0, &opts).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_and_corner_balls() {
        let sq = Domain::unit_square();
        let a = ball_domain_area(&sq, Vec2::new(0.5, 0.5), 0.1);
        assert!((a - PI * 0.01).abs() < 1e-14);
        let a = ball_domain_area(&sq, Vec2::new(0.0, 0.0), 0.1);
        assert!((a - PI * 0.01 / 4.0).abs() < 1e-14);
        // ball larger than the domain
        let a = ball_domain_area(&sq, Vec2::new(0.5, 0.5), 5.0);
        assert!((a - 1.0).abs() < 1e-13);
    }

    #[test]
    fn edge_ball_is_half_disc() {
        let sq = Domain::unit_square();
        let a = ball_domain_area(&sq, Vec2::new(0.5, 1.0), 0.2);
        assert!((a - PI * 0.02).abs() < 1e-13);
    }

    #[test]
    fn half_disc_corner_quarter() {
        let hd = Domain::half_disc();
        let r = 0.05;
        // Closed form: lens of the unit disc and B((1,0), r), halved by symmetry.
        let d: f64 = 1.0;
        let lens = r * r * ((d * d + r * r - 1.0) / (2.0 * d * r)).acos() + ((d * d + 1.0 - r * r) / (2.0 * d)).acos()
            - 0.5 * ((-d + r + 1.0) * (d + r - 1.0) * (d - r + 1.0) * (d + r + 1.0)).sqrt();
        let a = ball_domain_area(&hd, Vec2::new(1.0, 0.0), r);
        assert!((a - 0.5 * lens).abs() < 1e-12 * lens, "{a} {}", 0.5 * lens);
        // quarter-disc up to the arc's curvature
        assert!((a - PI * r * r / 4.0).abs() < 0.05 * a);
    }

    #[test]
    fn full_domain_areas() {
        let he = Domain::half_ellipse(2.0, 1.0).unwrap();
        let a = ball_domain_area(&he, Vec2::new(0.3, 0.2), 10.0);
        assert!((a - PI).abs() < 1e-11);
        let a = ball_domain_area(&he, Vec2::new(2.0, 0.0), 10.0);
        assert!((a - PI).abs() < 1e-11);
    }
}
