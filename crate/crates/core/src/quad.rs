//! Quadrature building blocks: Gauss–Legendre rules, Gauss–Kronrod (7,15)
//! panels, global adaptive 1D integration and composite 2D slab integration.
//!
//! Integrands may return any [`QuadValue`], so several related integrals
//! (or complex ones) can be accumulated from a single pass over the nodes.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    /// Magnitude used for error control (max-norm over components).
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Fixed-size bundle of real integrals evaluated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terms<const N: usize>(pub [f64; N]);

impl<const N: usize> Add for Terms<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Terms<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul<f64> for Terms<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<const N: usize> QuadValue for Terms<N> {
    fn zero() -> Self {
        Terms([0.0; N])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Fixed-size bundle of complex integrals evaluated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CTerms<const N: usize>(pub [Complex64; N]);

impl<const N: usize> Add for CTerms<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for CTerms<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul<f64> for CTerms<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<const N: usize> QuadValue for CTerms<N> {
    fn zero() -> Self {
        CTerms([Complex64::new(0.0, 0.0); N])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Result of a quadrature with an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<V> {
    pub value: V,
    pub error: f64,
    /// False when the evaluation budget ran out before the tolerance was met.
    pub converged: bool,
}

/// Gauss–Legendre rule on [-1, 1] with `n` nodes (Newton on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached Gauss–Legendre rule.
pub fn gl(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let table = CACHE.get_or_init(|| (1..=64).map(gauss_legendre).collect());
    assert!((1..=64).contains(&n), "Gauss-Legendre order {n} not tabulated");
    &table[n - 1]
}

/// Kronrod nodes (non-negative half) of the 15-point rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The 15 Kronrod nodes on [-1,1] in increasing order, with Kronrod and
/// embedded Gauss weights (zero where the node is not a Gauss node).
pub fn gk15_rule() -> &'static [(f64, f64, f64); 15] {
    static RULE: OnceLock<[(f64, f64, f64); 15]> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut out = [(0.0, 0.0, 0.0); 15];
        for i in 0..8 {
            let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
            out[i] = (-XGK[i], WGK[i], wg);
            out[14 - i] = (XGK[i], WGK[i], wg);
        }
        out
    })
}

/// One GK15 panel on [a, b]: (Kronrod value, |Kronrod − Gauss|).
pub fn gk15<V: QuadValue>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut k = V::zero();
    let mut g = V::zero();
    for &(x, wk, wg) in gk15_rule() {
        let v = f(c + hw * x);
        k = k + v * wk;
        if wg != 0.0 {
            g = g + v * wg;
        }
    }
    let k = k * hw;
    let g = g * hw;
    (k, (k - g).magnitude())
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Global adaptive GK15 integration over the intervals delimited by
/// `breaks` (sorted). Stops when the summed error is below
/// `max(abs_tol, rel_tol·|value|)` or after `max_panels` panels.
pub fn integrate_adaptive<V: QuadValue>(
    mut f: impl FnMut(f64) -> V,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Estimate<V> {
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&mut f, w[0], w[1]);
            heap.push(Panel { a: w[0], b: w[1], value, error });
        }
    }
    loop {
        let (total, err) = heap.iter().fold((V::zero(), 0.0), |(t, e), p| (t + p.value, e + p.error));
        if err <= abs_tol.max(rel_tol * total.magnitude()) {
            return Estimate { value: total, error: err, converged: true };
        }
        if heap.len() >= max_panels {
            return Estimate { value: total, error: err, converged: false };
        }
        let Some(worst) = heap.pop() else {
            return Estimate { value: V::zero(), error: 0.0, converged: true };
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval collapsed to machine resolution; keep it and give up refining.
            heap.push(worst);
            let (total, err) = heap.iter().fold((V::zero(), 0.0), |(t, e), p| (t + p.value, e + p.error));
            return Estimate { value: total, error: err, converged: false };
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Splits every interval of `breaks` so no piece is longer than `max_len`.
pub fn subdivide(breaks: &[f64], max_len: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        let n = if max_len > 0.0 { (len / max_len).ceil().max(1.0) as usize } else { 1 };
        for i in 0..n {
            out.push(w[0] + len * i as f64 / n as f64);
        }
    }
    if let Some(&last) = breaks.last() {
        out.push(last);
    }
    out
}

/// Sorted, deduplicated breakpoints clipped to [a, b].
pub fn breakpoints(a: f64, b: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(extra.into_iter().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + y.abs()));
    pts
}

/// Composite tensor GK15 over the region
/// `{ x ∈ [xb_0, xb_last], lo(x) ≤ y ≤ hi(x) }`.
///
/// `x_breaks` are the outer panel boundaries; in y each fiber is split into
/// `ceil((hi-lo)/max_dy)` panels, further split at the supplied `y_breaks`.
/// The error estimate is the tensor Kronrod–Gauss difference.
pub fn integrate_slab<V: QuadValue>(
    mut f: impl FnMut(f64, f64) -> V,
    x_breaks: &[f64],
    lo: impl Fn(f64) -> f64,
    hi: impl Fn(f64) -> f64,
    max_dy: f64,
    y_breaks: &[f64],
) -> Estimate<V> {
    let rule = gk15_rule();
    let mut total_k = V::zero();
    let mut total_g = V::zero();
    for w in x_breaks.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        if xb <= xa {
            continue;
        }
        let cx = 0.5 * (xa + xb);
        let hx = 0.5 * (xb - xa);
        for &(sx, wkx, wgx) in rule {
            let x = cx + hx * sx;
            let (ylo, yhi) = (lo(x), hi(x));
            if yhi <= ylo {
                continue;
            }
            let ys = breakpoints(ylo, yhi, y_breaks.iter().copied());
            let ys = subdivide(&ys, max_dy);
            let mut fk = V::zero();
            let mut fg = V::zero();
            for yw in ys.windows(2) {
                let cy = 0.5 * (yw[0] + yw[1]);
                let hy = 0.5 * (yw[1] - yw[0]);
                let mut k = V::zero();
                let mut g = V::zero();
                for &(sy, wky, wgy) in rule {
                    let v = f(x, cy + hy * sy);
                    k = k + v * wky;
                    if wgy != 0.0 {
                        g = g + v * wgy;
                    }
                }
                fk = fk + k * hy;
                fg = fg + g * hy;
            }
            total_k = total_k + fk * (wkx * hx);
            if wgx != 0.0 {
                total_g = total_g + fg * (wgx * hx);
            }
        }
    }
    let error = (total_k - total_g).magnitude();
    Estimate { value: total_k, error, converged: true }
}
