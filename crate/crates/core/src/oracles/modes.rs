use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{bessel_j_jet, bessel_jp_zero, OracleError};
use crate::geometry::{Domain, Vec2};

/// Value, gradient and Hessian of a (possibly complex) field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeJet {
    pub v: Complex64,
    pub dx: Complex64,
    pub dy: Complex64,
    pub dxx: Complex64,
    pub dxy: Complex64,
    pub dyy: Complex64,
}

impl ModeJet {
    fn real(v: f64, dx: f64, dy: f64, dxx: f64, dxy: f64, dyy: f64) -> Self {
        let c = |x| Complex64::new(x, 0.0);
        ModeJet { v: c(v), dx: c(dx), dy: c(dy), dxx: c(dxx), dxy: c(dxy), dyy: c(dyy) }
    }

    /// Jet of p ↦ f(Rᵀp) where R is the rotation with the given cos/sin.
    pub fn rotated(&self, cos: f64, sin: f64) -> Self {
        let (c, s) = (cos, sin);
        ModeJet {
            v: self.v,
            dx: self.dx * c - self.dy * s,
            dy: self.dx * s + self.dy * c,
            dxx: self.dxx * (c * c) - self.dxy * (2.0 * c * s) + self.dyy * (s * s),
            dxy: self.dxx * (c * s) + self.dxy * (c * c - s * s) - self.dyy * (c * s),
            dyy: self.dxx * (s * s) + self.dxy * (2.0 * c * s) + self.dyy * (c * c),
        }
    }

    pub fn laplacian(&self) -> Complex64 {
        self.dxx + self.dyy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeKind {
    /// c·cos(mπx/a)·cos(nπy/b) on [0, a] × [0, b].
    Rectangle { a: f64, b: f64, m: u32, n: u32 },
    /// c·J_m(j′_{m,k} r)·cos(mθ) on the unit disc (or its upper half).
    Disc { m: u32, k: u32, root: f64, half: bool },
    /// Constant mode on an arbitrary domain.
    Constant { area: f64 },
    /// (2πh)^{−1/4} e^{−n²/h} e^{i t/h} in beam coordinates (t, n) about `center`
    /// with axis direction `angle`. A model field, not an eigenfunction.
    GaussianBeam { h: f64, center: Vec2, angle: f64, tube: f64 },
}

/// A closed-form field with exact derivatives up to second order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMode {
    pub kind: ModeKind,
    /// Eigenvalue λ² of −Δ (for the beam: 1/h², the model's semiclassical scale).
    pub lambda_sq: f64,
    /// Normalization constant multiplying the unnormalized profile.
    pub norm: f64,
    pub label: String,
}

impl AnalyticMode {
    pub fn rectangle(a: f64, b: f64, m: u32, n: u32) -> Self {
        let p = m as f64 * PI / a;
        let q = n as f64 * PI / b;
        let fm = if m == 0 { 1.0 } else { 2.0 };
        let fn_ = if n == 0 { 1.0 } else { 2.0 };
        AnalyticMode {
            kind: ModeKind::Rectangle { a, b, m, n },
            lambda_sq: p * p + q * q,
            norm: (fm * fn_ / (a * b)).sqrt(),
            label: format!("rect({a},{b})[{m},{n}]"),
        }
    }

    pub fn disc(m: u32, k: u32) -> Result<Self, OracleError> {
        Self::disc_like(m, k, false)
    }

    pub fn half_disc(m: u32, k: u32) -> Result<Self, OracleError> {
        Self::disc_like(m, k, true)
    }

    fn disc_like(m: u32, k: u32, half: bool) -> Result<Self, OracleError> {
        let root = bessel_jp_zero(m as usize, k as usize)?;
        let jm = bessel_j_jet(m as usize, root)[0];
        let radial = 0.5 * (1.0 - (m as f64 / root).powi(2)) * jm * jm;
        let angular = match (m == 0, half) {
            (true, false) => 2.0 * PI,
            (false, false) => PI,
            (true, true) => PI,
            (false, true) => PI / 2.0,
        };
        let name = if half { "halfdisc" } else { "disc" };
        Ok(AnalyticMode {
            kind: ModeKind::Disc { m, k, root, half },
            lambda_sq: root * root,
            norm: 1.0 / (radial * angular).sqrt(),
            label: format!("{name}[{m},{k}]"),
        })
    }

    pub fn constant(domain: &Domain) -> Self {
        AnalyticMode {
            kind: ModeKind::Constant { area: domain.area },
            lambda_sq: 0.0,
            norm: 1.0 / domain.area.sqrt(),
            label: format!("const[{}]", domain.name),
        }
    }

    /// Beam along the line through `center` with direction `angle`, living in
    /// the tube {|n| < tube}.
    pub fn gaussian_beam(h: f64, center: Vec2, angle: f64, tube: f64) -> Result<Self, OracleError> {
        if !(h > 0.0 && h < 1.0) {
            return Err(OracleError::BadParameters(format!("beam h = {h} outside (0, 1)")));
        }
        if !(tube > 0.0) {
            return Err(OracleError::BadParameters(format!("tube half-width {tube} must be positive")));
        }
        Ok(AnalyticMode {
            kind: ModeKind::GaussianBeam { h, center, angle, tube },
            lambda_sq: 1.0 / (h * h),
            norm: (2.0 * PI * h).powf(-0.25),
            label: format!("beam[h={h:e}]"),
        })
    }

    /// The rectangle {|t| ≤ half_length, |n| ≤ tube} of a beam, as a domain.
    pub fn beam_tube(&self, half_length: f64) -> Option<Domain> {
        let ModeKind::GaussianBeam { center, angle, tube, .. } = self.kind else {
            return None;
        };
        let t = Vec2::from_angle(angle);
        let n = t.perp();
        let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
            .map(|(a, b)| center + t * (a * half_length) + n * (b * tube));
        let mut d = Domain::polygon(&corners).ok()?;
        d.name = "beam_tube".into();
        Some(d)
    }

    /// False for the Gaussian-beam model field.
    pub fn is_eigenmode(&self) -> bool {
        !matches!(self.kind, ModeKind::GaussianBeam { .. })
    }

    pub fn is_real(&self) -> bool {
        self.is_eigenmode()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_sq.sqrt()
    }

    /// Semiclassical parameter h = 1/λ (infinite for the constant mode).
    pub fn h(&self) -> f64 {
        1.0 / self.lambda()
    }

    /// Wavelength-like resolution scale for quadrature panels.
    pub fn resolution(&self) -> f64 {
        if self.lambda_sq > 0.0 {
            1.0 / self.lambda()
        } else {
            f64::INFINITY
        }
    }

    pub fn value(&self, p: Vec2) -> Complex64 {
        self.eval(p).v
    }

    pub fn density(&self, p: Vec2) -> f64 {
        self.value(p).norm_sqr()
    }

    pub fn eval(&self, p: Vec2) -> ModeJet {
        let c = self.norm;
        match self.kind {
            ModeKind::Constant { .. } => ModeJet::real(c, 0.0, 0.0, 0.0, 0.0, 0.0),
            ModeKind::Rectangle { a, b, m, n } => {
                let kp = m as f64 * PI / a;
                let kq = n as f64 * PI / b;
                let (sx, cx) = (kp * p.x).sin_cos();
                let (sy, cy) = (kq * p.y).sin_cos();
                ModeJet::real(
                    c * cx * cy,
                    -c * kp * sx * cy,
                    -c * kq * cx * sy,
                    -c * kp * kp * cx * cy,
                    c * kp * kq * sx * sy,
                    -c * kq * kq * cx * cy,
                )
            }
            ModeKind::Disc { m, root, .. } => {
                let r = p.norm().max(1e-7);
                let th = p.y.atan2(p.x);
                let jr = bessel_j_jet(m as usize, root * r);
                let rf = [c * jr[0], c * root * jr[1], c * root * root * jr[2]];
                let mf = m as f64;
                let (sm, cm) = (mf * th).sin_cos();
                let (f, fr, frr) = (rf[0] * cm, rf[1] * cm, rf[2] * cm);
                let (ft, frt, ftt) = (-mf * rf[0] * sm, -mf * rf[1] * sm, -mf * mf * rf[0] * cm);
                let (st, ct) = th.sin_cos();
                let a = fr / r + ftt / (r * r);
                let b = frt / r - ft / (r * r);
                ModeJet::real(
                    f,
                    ct * fr - st * ft / r,
                    st * fr + ct * ft / r,
                    ct * ct * frr + st * st * a - 2.0 * st * ct * b,
                    st * ct * (frr - a) + (ct * ct - st * st) * b,
                    st * st * frr + ct * ct * a + 2.0 * st * ct * b,
                )
            }
            ModeKind::GaussianBeam { h, center, angle, .. } => {
                let (sa, ca) = angle.sin_cos();
                let d = p - center;
                let t = ca * d.x + sa * d.y;
                let n = -sa * d.x + ca * d.y;
                let phase = Complex64::new(0.0, t / h).exp();
                let v = phase * (c * (-n * n / h).exp());
                let i_h = Complex64::new(0.0, 1.0 / h);
                let gn = -2.0 * n / h;
                let local = ModeJet {
                    v,
                    dx: v * i_h,
                    dy: v * gn,
                    dxx: v * (i_h * i_h),
                    dxy: v * i_h * gn,
                    dyy: v * (gn * gn - 2.0 / h),
                };
                local.rotated(ca, sa)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{integrate_ball, BallQuadrature};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_check(mode: &AnalyticMode, pts: &[Vec2]) {
        let e = 1e-4 / mode.lambda().max(1.0);
        for &p in pts {
            let j = mode.eval(p);
            let jx = (mode.eval(p + Vec2::new(e, 0.0)).dx - mode.eval(p - Vec2::new(e, 0.0)).dx) / (2.0 * e);
            let jy = (mode.eval(p + Vec2::new(0.0, e)).dy - mode.eval(p - Vec2::new(0.0, e)).dy) / (2.0 * e);
            let jxy = (mode.eval(p + Vec2::new(0.0, e)).dx - mode.eval(p - Vec2::new(0.0, e)).dx) / (2.0 * e);
            let vx = (mode.eval(p + Vec2::new(e, 0.0)).v - mode.eval(p - Vec2::new(e, 0.0)).v) / (2.0 * e);
            let scale = mode.lambda_sq.max(1.0) * mode.norm * mode.norm.max(1.0);
            assert!((jx - j.dxx).norm() < 1e-5 * scale, "{} dxx at {p:?}", mode.label);
            assert!((jy - j.dyy).norm() < 1e-5 * scale, "{} dyy", mode.label);
            assert!((jxy - j.dxy).norm() < 1e-5 * scale, "{} dxy", mode.label);
            assert!((vx - j.dx).norm() < 1e-5 * scale, "{} dx", mode.label);
        }
    }

    #[test]
    fn hessians_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Vec2> = (0..500)
            .map(|_| {
                let r = rng.gen_range(0.05..0.95f64).sqrt();
                Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::PI)) * r
            })
            .collect();
        fd_check(&AnalyticMode::rectangle(1.0, 1.0, 7, 4), &pts);
        fd_check(&AnalyticMode::half_disc(3, 2).unwrap(), &pts);
        fd_check(&AnalyticMode::disc(0, 1).unwrap(), &pts);
        fd_check(&AnalyticMode::disc(12, 3).unwrap(), &pts);
        fd_check(&AnalyticMode::gaussian_beam(0.05, Vec2::new(0.1, 0.2), 0.3, 0.5).unwrap(), &pts);
    }

    #[test]
    fn eigen_equation_and_neumann() {
        for mode in [AnalyticMode::half_disc(5, 1).unwrap(), AnalyticMode::disc(2, 3).unwrap()] {
            for k in 0..50 {
                let t = k as f64 / 50.0;
                let p = Vec2::new(0.8 * (t * 3.0).cos() * t, 0.7 * (t * 2.0).sin().abs() + 0.05);
                let j = mode.eval(p);
                let res = (j.laplacian() + j.v * mode.lambda_sq).norm();
                assert!(res <= 1e-8 * mode.lambda_sq * j.v.norm() + 1e-10, "{res}");
            }
            for k in 0..200 {
                let th = PI * (k as f64 + 0.5) / 200.0;
                let n = Vec2::from_angle(th);
                let j = mode.eval(n);
                let dn = j.dx * n.x + j.dy * n.y;
                assert!(dn.norm() < 1e-8 * mode.lambda(), "{}", dn.norm());
            }
        }
        let hd = AnalyticMode::half_disc(4, 2).unwrap();
        for x in [-0.9, -0.3, 0.2, 0.77] {
            assert!(hd.eval(Vec2::new(x, 0.0)).dy.norm() < 1e-14);
        }
    }

    #[test]
    fn normalizations() {
        let sq = Domain::unit_square();
        let m = AnalyticMode::rectangle(1.0, 1.0, 7, 4);
        let opts = BallQuadrature { max_dr: 0.02, max_dtheta: 0.05, rel_tol: 1e-12, ..Default::default() };
        let est = integrate_ball(&sq, Vec2::new(0.5, 0.5), 2.0, |p| m.density(p), &opts);
        assert!((est.value - 1.0).abs() < 1e-10, "{}", est.value);
        let hd = Domain::half_disc();
        let m = AnalyticMode::half_disc(6, 2).unwrap();
        let est = integrate_ball(&hd, Vec2::new(0.0, 0.0), 1.0 + 1e-9, |p| m.density(p), &opts);
        assert!((est.value - 1.0).abs() < 1e-8, "{}", est.value);
        let m = AnalyticMode::rectangle(1.0, 1.0, 1, 0);
        assert!((m.norm - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.lambda_sq - PI * PI).abs() < 1e-14);
    }

    #[test]
    fn beam_peak_and_width() {
        let h = 1e-3;
        let b = AnalyticMode::gaussian_beam(h, Vec2::ZERO, 0.0, 0.5).unwrap();
        assert!((b.beam_tube(1.0).unwrap().area - 2.0).abs() < 1e-14);
        assert!((b.density(Vec2::new(0.4, 0.0)) - (2.0 * PI * h).powf(-0.5)).abs() < 1e-12);
        // transverse line integral: (2πh)^{-1/2} · √(πh/2) = 1/2
        let s = crate::quad::integrate_adaptive(|y| b.density(Vec2::new(0.0, y)), &[-0.5, 0.0, 0.5], 1e-15, 1e-13, 1000).value;
        assert!((s - 0.5).abs() < 1e-12, "{s}");
    }
}
