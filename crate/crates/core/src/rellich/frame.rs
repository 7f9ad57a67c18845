//! Chart-coordinate evaluation of analytic modes and integration over
//! Ω ∩ [−s, s]² and along the charted boundary.

use std::cell::RefCell;

use num_complex::Complex64;

use super::RellichError;
use crate::cutoff::ScaleSet;
use crate::geometry::{Chart, GeometryError};
use crate::oracles::{AnalyticMode, ModeJet};
use crate::quad::{breakpoints, gk15_rule, integrate_adaptive, subdivide, CTerms, Estimate};

pub(super) const REL_TOL: f64 = 1e-9;
pub(super) const ABS_TOL: f64 = 1e-14;
pub(super) const MAX_PANELS: usize = 40_000;

/// Mode jets in the coordinates of a chart.
pub(super) struct Frame<'a> {
    pub mode: &'a AnalyticMode,
    pub chart: &'a Chart,
}

impl Frame<'_> {
    pub fn jet(&self, x: f64, y: f64) -> ModeJet {
        let r = self.chart.rotation();
        let p = self.chart.to_world(crate::geometry::Vec2::new(x, y));
        self.mode.eval(p).rotated(r.cos, r.sin)
    }
}

/// Largest admissible quadrature cell: an eighth of the inner scale and one
/// oscillation scale of the mode.
pub(super) fn max_cell(mode: &AnalyticMode, inner: f64, h: f64) -> f64 {
    (inner / 8.0).min(mode.resolution()).min(h)
}

/// Break points of every cutoff built on `s`, mirrored.
pub(super) fn scale_breaks(s: &ScaleSet) -> Vec<f64> {
    let mut out = Vec::new();
    for v in [s.inner, 3.0 * s.inner, s.outer, 2.0 * s.outer] {
        out.push(v);
        out.push(-v);
    }
    out
}

/// Ω ∩ [−half, half]² written as {x0 ≤ x ≤ x1, lo(x) ≤ y ≤ hi(x)}.
pub(super) struct Slab<'a> {
    chart: &'a Chart,
    half: f64,
}

impl<'a> Slab<'a> {
    pub fn new(chart: &'a Chart, half: f64) -> Result<Self, RellichError> {
        if half > chart.valid_radius() * (1.0 + 1e-12) {
            return Err(RellichError::ChartRangeExceeded(format!(
                "support half-width {half:.4e} exceeds chart radius {:.4e}",
                chart.valid_radius()
            )));
        }
        Ok(Slab { chart, half })
    }

    pub fn x_range(&self) -> (f64, f64) {
        match self.chart {
            Chart::Smooth(_) => (-self.half, self.half),
            Chart::Corner(_) => (0.0, self.half),
        }
    }

    pub fn limits(&self, x: f64) -> Result<(f64, f64), GeometryError> {
        let s = self.half;
        Ok(match self.chart {
            Chart::Smooth(c) => (-s, c.alpha(x)?.v.min(s)),
            Chart::Corner(c) => (c.alpha(2, x)?.v.max(-s), c.alpha(1, x)?.v.min(s)),
        })
    }

    /// x where a bounding graph crosses the box edges.
    pub fn kinks(&self) -> Vec<f64> {
        let s = self.half;
        let v: Vec<Option<f64>> = match self.chart {
            Chart::Smooth(c) => vec![c.beta(s).ok().map(|b| b.v), c.beta(-s).ok().map(|b| b.v)],
            Chart::Corner(c) => vec![c.beta(1, s).ok().map(|b| b.v), c.beta(2, -s).ok().map(|b| b.v)],
        };
        v.into_iter().flatten().filter(|x| x.is_finite()).collect()
    }
}

/// Nested quadrature over a slab: adaptive GK15 in x, composite GK15 in y
/// with cells no longer than `cell`.
pub(super) fn integrate_slab_terms<const N: usize>(
    slab: &Slab,
    x_breaks: &[f64],
    y_breaks: &[f64],
    cell: f64,
    identity: &str,
    f: impl Fn(f64, f64) -> Result<CTerms<N>, RellichError>,
) -> Result<Estimate<CTerms<N>>, RellichError> {
    let failure: RefCell<Option<RellichError>> = RefCell::new(None);
    let rule = gk15_rule();
    let fiber = |x: f64| -> CTerms<N> {
        let (lo, hi) = match slab.limits(x) {
            Ok(l) => l,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e.into());
                return CTerms([Complex64::new(0.0, 0.0); N]);
            }
        };
        let mut acc = CTerms([Complex64::new(0.0, 0.0); N]);
        if hi <= lo {
            return acc;
        }
        let ys = subdivide(&breakpoints(lo, hi, y_breaks.iter().copied()), cell);
        for w in ys.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let hw = 0.5 * (w[1] - w[0]);
            for &(s, wk, _) in rule {
                match f(x, c + hw * s) {
                    Ok(v) => acc = acc + v * (wk * hw),
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                    }
                }
            }
        }
        acc
    };
    let (x0, x1) = slab.x_range();
    let xb = subdivide(&breakpoints(x0, x1, x_breaks.iter().copied().chain(slab.kinks())), cell);
    let est = integrate_adaptive(fiber, &xb, ABS_TOL, REL_TOL, MAX_PANELS);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    check(est, identity)
}

/// Adaptive 1D integral over [x0, x1] with initial cells no longer than `cell`.
pub(super) fn integrate_line<const N: usize>(
    x0: f64,
    x1: f64,
    breaks: &[f64],
    cell: f64,
    identity: &str,
    f: impl Fn(f64) -> Result<CTerms<N>, RellichError>,
) -> Result<Estimate<CTerms<N>>, RellichError> {
    let failure: RefCell<Option<RellichError>> = RefCell::new(None);
    let g = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            CTerms([Complex64::new(0.0, 0.0); N])
        }
    };
    let xb = subdivide(&breakpoints(x0, x1, breaks.iter().copied()), cell);
    let est = integrate_adaptive(g, &xb, ABS_TOL, REL_TOL, MAX_PANELS);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    check(est, identity)
}

fn check<const N: usize>(est: Estimate<CTerms<N>>, identity: &str) -> Result<Estimate<CTerms<N>>, RellichError> {
    if est.converged {
        Ok(est)
    } else {
        Err(RellichError::QuadratureBudgetExceeded { identity: identity.to_string(), error: est.error })
    }
}
