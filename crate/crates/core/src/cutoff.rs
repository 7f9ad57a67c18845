//! Smooth cutoffs χ̃, γ = χ̃′, ψ̃ and the scaled chart fields χ, ρ, ρ_j.
//!
//! All derivatives are exact (chain rule through the profile g), so the
//! Rellich terms can use second derivatives without finite differencing.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CornerChart, GeometryError, Jet3, LocalChart};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutoffError {
    #[error("inner scale {inner} is not below outer scale {outer}")]
    ScaleOrderViolation { inner: f64, outer: f64 },
    #[error("outer support {support} exceeds chart radius {radius}")]
    SupportExceedsChart { support: f64, radius: f64 },
    #[error("bad cutoff parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Chart(#[from] GeometryError),
}

/// Profile g(t) = f(t)/(f(t)+f(1−t)), f(t) = e^{−1/t}, with derivatives 0..=3.
///
/// Written as the logistic L(z) = 1/(1+e^z) of z = 1/t − 1/(1−t).
pub fn profile(t: f64) -> [f64; 4] {
    if t <= 1e-3 {
        return [0.0; 4];
    }
    if t >= 1.0 - 1e-3 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let u = 1.0 - t;
    let z = 1.0 / t - 1.0 / u;
    let l = if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    };
    let c = (0.5 * z).cosh();
    let q = 1.0 / (4.0 * c * c); // L(1−L)
    let l1 = -q;
    let l2 = q * (1.0 - 2.0 * l);
    let l3 = -q * ((1.0 - 2.0 * l).powi(2) - 2.0 * q);
    let z1 = -1.0 / (t * t) - 1.0 / (u * u);
    let z2 = 2.0 / t.powi(3) - 2.0 / u.powi(3);
    let z3 = -6.0 / t.powi(4) - 6.0 / u.powi(4);
    [l, l1 * z1, l2 * z1 * z1 + l1 * z2, l3 * z1.powi(3) + 3.0 * l2 * z1 * z2 + l1 * z3]
}

const G_NODES: usize = 10_000;

/// G(v) = ∫₀^v g on [0, 1], tabulated for cubic Hermite interpolation.
fn g_integral_table() -> &'static Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (x, w) = crate::quad::gl(16);
        let dv = 1.0 / G_NODES as f64;
        let mut out = Vec::with_capacity(G_NODES + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..G_NODES {
            let a = i as f64 * dv;
            let mut s = 0.0;
            for (xi, wi) in x.iter().zip(w) {
                s += wi * profile(a + 0.5 * dv * (xi + 1.0))[0];
            }
            acc += 0.5 * dv * s;
            out.push(acc);
        }
        out
    })
}

/// G(v) = ∫₀^v g for v ∈ [0, 1] (clamped outside).
pub fn profile_integral(v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v >= 1.0 {
        return 0.5 + (v - 1.0);
    }
    let table = g_integral_table();
    let dv = 1.0 / G_NODES as f64;
    let i = ((v / dv) as usize).min(G_NODES - 1);
    let a = i as f64 * dv;
    let s = (v - a) / dv;
    let (y0, y1) = (table[i], table[i + 1]);
    let (m0, m1) = (profile(a)[0] * dv, profile(a + dv)[0] * dv);
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
}

/// γ and its first three derivatives. Even, ½ on [−1, 1], zero beyond |s| = 3.
pub fn gamma_jet(s: f64) -> [f64; 4] {
    let a = s.abs();
    if a <= 1.0 {
        return [0.5, 0.0, 0.0, 0.0];
    }
    if a >= 3.0 {
        return [0.0; 4];
    }
    let g = profile(0.5 * (a - 1.0));
    let sg = s.signum();
    [0.5 * (1.0 - g[0]), -0.25 * g[1] * sg, -0.125 * g[2], -0.0625 * g[3] * sg]
}

pub fn gamma(s: f64) -> f64 {
    gamma_jet(s)[0]
}

/// χ̃ and its first three derivatives (χ̃′ = γ).
pub fn tchi_jet(s: f64) -> [f64; 4] {
    let g = gamma_jet(s);
    let a = s.abs();
    let v = if a <= 1.0 {
        0.5 * s
    } else if a >= 3.0 {
        s.signum()
    } else {
        s.signum() * (0.5 * a - profile_integral(0.5 * (a - 1.0)))
    };
    [v, g[0], g[1], g[2]]
}

pub fn tchi(s: f64) -> f64 {
    tchi_jet(s)[0]
}

/// ψ̃ and its first three derivatives. Even, 1 on [−1, 1], zero for |s| ≥ 2.
pub fn tpsi_jet(s: f64) -> [f64; 4] {
    let a = s.abs();
    if a <= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    if a >= 2.0 {
        return [0.0; 4];
    }
    let g = profile(a - 1.0);
    let sg = s.signum();
    [1.0 - g[0], -g[1] * sg, -g[2], -g[3] * sg]
}

pub fn tpsi(s: f64) -> f64 {
    tpsi_jet(s)[0]
}

/// Induction index η_k = 1 − 1/(3k).
pub fn eta(k: u32) -> f64 {
    assert!(k >= 1, "induction index starts at 1");
    1.0 - 1.0 / (3.0 * k as f64)
}

/// f(u/a) with derivatives 0..=2 in u, for a 1D jet f.
fn scaled(jet: [f64; 4], a: f64) -> [f64; 3] {
    [jet[0], jet[1] / a, jet[2] / (a * a)]
}

/// Inner/outer scales of a cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Scales {
    /// Inner scale h^δ, outer plateau ψ̃(·/ε).
    Fixed { delta: f64, epsilon: f64 },
    /// Inner scale h^{η_{k+1}}, outer plateau ψ̃²(·/h^{η_k}).
    Induction { k: u32 },
}

/// Resolved scales for one h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleSet {
    pub h: f64,
    pub inner: f64,
    pub outer: f64,
    /// Exponent on the ψ̃ factors (1 or 2).
    pub power: u32,
}

impl Scales {
    pub fn resolve(&self, h: f64) -> Result<ScaleSet, CutoffError> {
        if !(h > 0.0 && h < 1.0) {
            return Err(CutoffError::BadParameters(format!("h = {h} outside (0, 1)")));
        }
        let set = match *self {
            Scales::Fixed { delta, epsilon } => {
                if !(0.0..1.0).contains(&delta) || epsilon <= 0.0 {
                    return Err(CutoffError::BadParameters(format!("δ = {delta}, ε = {epsilon}")));
                }
                ScaleSet { h, inner: h.powf(delta), outer: epsilon, power: 1 }
            }
            Scales::Induction { k } => {
                if k == 0 {
                    return Err(CutoffError::BadParameters("induction index k must be ≥ 1".into()));
                }
                ScaleSet { h, inner: h.powf(eta(k + 1)), outer: h.powf(eta(k)), power: 2 }
            }
        };
        if set.inner >= set.outer {
            return Err(CutoffError::ScaleOrderViolation { inner: set.inner, outer: set.outer });
        }
        Ok(set)
    }
}

impl ScaleSet {
    /// W(u) = ψ̃(u/outer)^power with two derivatives.
    pub fn plateau(&self, u: f64) -> [f64; 3] {
        let p = scaled(tpsi_jet(u / self.outer), self.outer);
        if self.power == 1 {
            p
        } else {
            [p[0] * p[0], 2.0 * p[0] * p[1], 2.0 * (p[1] * p[1] + p[0] * p[2])]
        }
    }

    /// χ̃(u/inner) with two derivatives.
    pub fn ramp(&self, u: f64) -> [f64; 3] {
        scaled(tchi_jet(u / self.inner), self.inner)
    }

    /// Half-width of the support of every field built on these scales.
    pub fn support(&self) -> f64 {
        2.0 * self.outer
    }
}

/// Value, gradient and Hessian of a scalar field in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Field2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Field2 {
    /// Product a(x)·b(y) of two 1D jets.
    pub fn separable(a: [f64; 3], b: [f64; 3]) -> Self {
        Field2 { v: a[0] * b[0], dx: a[1] * b[0], dy: a[0] * b[1], dxx: a[2] * b[0], dxy: a[1] * b[1], dyy: a[0] * b[2] }
    }

    pub fn mul(&self, o: &Field2) -> Field2 {
        Field2 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

fn product3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] * b[0], a[1] * b[0] + a[0] * b[1], a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2]]
}

fn is_zero(j: &[f64; 3]) -> bool {
    j.iter().all(|&v| v == 0.0)
}

/// χ(x, y) = χ̃(x/inner)·W(x)·W(y).
pub fn chi(s: &ScaleSet, x: f64, y: f64) -> Field2 {
    let wx = s.plateau(x);
    let wy = s.plateau(y);
    if is_zero(&wx) || is_zero(&wy) {
        return Field2::default();
    }
    Field2::separable(product3(s.ramp(x), wx), wy)
}

/// The comparison weight inner⁻¹·γ(x/inner)·γ(y/inner).
pub fn gamma_weight(s: &ScaleSet, x: f64, y: f64) -> f64 {
    gamma(x / s.inner) * gamma(y / s.inner) / s.inner
}

/// χ̃(β(y)/inner) with two derivatives in y.
fn ramp_of_beta(s: &ScaleSet, b: Jet3) -> [f64; 3] {
    let f = s.ramp(b.v);
    [f[0], f[1] * b.d1, f[2] * b.d1 * b.d1 + f[1] * b.d2]
}

/// ρ(x, y) = α′(x)·χ̃(β(y)/inner)·W(x)·W(y) on a smooth-side chart.
pub fn rho(chart: &LocalChart, s: &ScaleSet, x: f64, y: f64) -> Result<Field2, CutoffError> {
    let wx = s.plateau(x);
    let wy = s.plateau(y);
    if is_zero(&wx) || is_zero(&wy) {
        return Ok(Field2::default());
    }
    let a = chart.alpha(x)?;
    let b = chart.beta(y)?;
    let p = product3([a.d1, a.d2, a.d3], wx);
    let q = product3(ramp_of_beta(s, b), wy);
    Ok(Field2::separable(p, q))
}

/// w(x) = x/α_j(x) with two derivatives, continued by 1/α_j′(0) at x = 0.
pub fn x_over_alpha(chart: &CornerChart, j: usize, x: f64) -> Result<[f64; 3], CutoffError> {
    if x.abs() >= 0.05 * chart.valid_radius {
        let a = chart.alpha(j, x)?;
        let w = x / a.v;
        let w1 = (a.v - x * a.d1) / (a.v * a.v);
        let w2 = -x * a.d2 / (a.v * a.v) - 2.0 * a.d1 * (a.v - x * a.d1) / a.v.powi(3);
        return Ok([w, w1, w2]);
    }
    // α(x) = x·G(x) with G(x) = ∫₀¹ α′(sx) ds
    let (nodes, weights) = crate::quad::gl(12);
    let (mut g0, mut g1, mut g2) = (0.0, 0.0, 0.0);
    for (t, wt) in nodes.iter().zip(weights) {
        let sfrac = 0.5 * (t + 1.0);
        let a = chart.alpha(j, sfrac * x)?;
        let w = 0.5 * wt;
        g0 += w * a.d1;
        g1 += w * sfrac * a.d2;
        g2 += w * sfrac * sfrac * a.d3;
    }
    Ok([1.0 / g0, -g1 / (g0 * g0), -g2 / (g0 * g0) + 2.0 * g1 * g1 / g0.powi(3)])
}

/// S(x, y) = α_j′(y·w(x)) and the derivatives needed by ρ_j and A_j.
fn slope_field(chart: &CornerChart, j: usize, x: f64, y: f64) -> Result<(Field2, f64, [f64; 3], Jet3), CutoffError> {
    let w = x_over_alpha(chart, j, x)?;
    let u = y * w[0];
    let a = chart.alpha(j, u)?;
    let (a2, a3) = (a.d2, a.d3);
    let ux = y * w[1];
    let f = Field2 {
        v: a.d1,
        dx: a2 * ux,
        dy: a2 * w[0],
        dxx: a3 * ux * ux + a2 * y * w[2],
        dxy: a3 * w[0] * ux + a2 * w[1],
        dyy: a3 * w[0] * w[0],
    };
    Ok((f, u, w, a))
}

/// ρ_j(x, y) = α_j′(xy/α_j(x))·χ̃(β_j(y)/inner)·W(x)·W(y) on a corner chart.
pub fn rho_j(chart: &CornerChart, j: usize, s: &ScaleSet, x: f64, y: f64) -> Result<Field2, CutoffError> {
    let wx = s.plateau(x);
    let wy = s.plateau(y);
    if is_zero(&wx) || is_zero(&wy) {
        return Ok(Field2::default());
    }
    let (slope, _, _, _) = slope_field(chart, j, x, y)?;
    let b = chart.beta(j, y)?;
    let t = Field2::separable(wx, product3(ramp_of_beta(s, b), wy));
    Ok(slope.mul(&t))
}

/// A_j = (x/α_j(x))·α_j″(xy/α_j(x))·χ̃(β_j(y)/inner)·W(x)·W(y): the part of
/// ∂_yρ_j where the derivative falls on the slope factor.
pub fn a_j(chart: &CornerChart, j: usize, s: &ScaleSet, x: f64, y: f64) -> Result<f64, CutoffError> {
    let wx = s.plateau(x)[0];
    let wy = s.plateau(y)[0];
    if wx == 0.0 || wy == 0.0 {
        return Ok(0.0);
    }
    let w = x_over_alpha(chart, j, x)?;
    let a = chart.alpha(j, y * w[0])?;
    let b = chart.beta(j, y)?;
    Ok(w[0] * a.d2 * s.ramp(b.v)[0] * wx * wy)
}

/// A_j restricted to the edge y = α_j(x), with its x-derivative.
pub fn a_j_on_edge(chart: &CornerChart, j: usize, s: &ScaleSet, x: f64) -> Result<[f64; 2], CutoffError> {
    let a = chart.alpha(j, x)?;
    let wx = s.plateau(x);
    let wy = s.plateau(a.v);
    let wy = [wy[0], wy[1] * a.d1];
    if wx[0] == 0.0 && wx[1] == 0.0 || wy[0] == 0.0 && wy[1] == 0.0 {
        return Ok([0.0, 0.0]);
    }
    let w = x_over_alpha(chart, j, x)?;
    let r = s.ramp(x);
    let f = [w[0] * a.d2, w[1] * a.d2 + w[0] * a.d3];
    let g = [r[0] * wx[0], r[1] * wx[0] + r[0] * wx[1]];
    let fg = [f[0] * g[0], f[1] * g[0] + f[0] * g[1]];
    Ok([fg[0] * wy[0], fg[1] * wy[0] + fg[0] * wy[1]])
}
