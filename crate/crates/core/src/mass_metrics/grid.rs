use rayon::prelude::*;

use crate::geometry::Vec2;

/// Brute-force reference for ∫_{B(p0,r)∩R} f over the rectangle R = [lo, hi]:
/// midpoint rule on an n×n grid of R, with cells cut by the circle
/// resampled on a `sub`×`sub` subgrid.
pub fn grid_sum_mass(f: impl Fn(Vec2) -> f64 + Sync, lo: Vec2, hi: Vec2, p0: Vec2, r: f64, n: usize, sub: usize) -> f64 {
    let (dx, dy) = ((hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64);
    let half_diag = 0.5 * dx.hypot(dy);
    let range = |c: f64, o: f64, d: f64| {
        let a = (((c - r - o) / d).floor().max(0.0) as usize).min(n);
        let b = (((c + r - o) / d).ceil().max(0.0) as usize).min(n);
        a..b
    };
    let (ix, iy) = (range(p0.x, lo.x, dx), range(p0.y, lo.y, dy));
    let rows: Vec<f64> = iy
        .into_par_iter()
        .map(|j| {
            let mut acc = 0.0;
            for i in ix.clone() {
                let c = Vec2::new(lo.x + (i as f64 + 0.5) * dx, lo.y + (j as f64 + 0.5) * dy);
                let d = c.dist(p0);
                if d + half_diag <= r {
                    acc += f(c) * dx * dy;
                } else if d - half_diag < r {
                    let (sx, sy) = (dx / sub as f64, dy / sub as f64);
                    for b in 0..sub {
                        for a in 0..sub {
                            let q = Vec2::new(
                                lo.x + i as f64 * dx + (a as f64 + 0.5) * sx,
                                lo.y + j as f64 * dy + (b as f64 + 0.5) * sy,
                            );
                            if q.dist(p0) < r {
                                acc += f(q) * sx * sy;
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    rows.iter().sum()
}
