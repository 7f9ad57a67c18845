//! L² mass of eigenmodes in small balls B(p0, h^δ) ∩ Ω and envelope fits of
//! its scaling in h.

mod grid;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigensolve::{EigenMode, ModeField};
use crate::geometry::{integrate_ball, BallQuadrature, Domain, Vec2};
use crate::text::sig17;

pub use grid::grid_sum_mass;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MassError {
    #[error("h spans only a factor {ratio:.3} (need at least 4)")]
    InsufficientSpread { ratio: f64 },
    #[error("{0} samples given, at least 5 needed")]
    TooFewSamples(usize),
    #[error("delta {0} outside [0, 1)")]
    BadDelta(f64),
    #[error("radius {0} must be positive")]
    BadRadius(f64),
    #[error("mode {0} has no finite h (zero eigenvalue)")]
    ZeroMode(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSample {
    pub mode_id: String,
    pub lambda: f64,
    pub h: f64,
    pub p0: Vec2,
    pub delta: f64,
    pub r: f64,
    pub mass: f64,
    pub err_est: f64,
    /// False if the quadrature budget ran out; `mass` is then the best estimate.
    pub converged: bool,
}

/// ∫_{B(p0,r)∩Ω} |φ|². FEM modes integrate the piecewise polynomial exactly
/// over the clipped elements; analytic modes use adaptive polar quadrature.
pub fn ball_mass(mode: &EigenMode, domain: &Domain, p0: Vec2, r: f64) -> Result<MassSample, MassError> {
    if !(r > 0.0) {
        return Err(MassError::BadRadius(r));
    }
    let (mass, err_est, converged) = match &mode.field {
        ModeField::Fem(f) => {
            let m = f.ball_mass(p0, r);
            (m, 1e-13 * m.max(1e-300) + 1e-16, true)
        }
        ModeField::Analytic(a) => {
            let opts = BallQuadrature {
                abs_tol: 1e-15,
                rel_tol: 1e-8,
                max_dr: 0.5 * a.resolution().min(r),
                max_panels: 4000,
                ..Default::default()
            };
            let e = integrate_ball(domain, p0, r, |p| a.density(p), &opts);
            (e.value, e.error, e.converged)
        }
    };
    Ok(MassSample {
        mode_id: mode.source.clone(),
        lambda: mode.lambda(),
        h: mode.h,
        p0,
        delta: f64::NAN,
        r,
        mass,
        err_est,
        converged,
    })
}

/// Per-dyadic-bin summary used by the envelope fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadBin {
    pub h_lo: f64,
    pub h_hi: f64,
    pub count: usize,
    /// Sample with the largest mass in the bin.
    pub h_at_max: f64,
    pub max_mass: f64,
    /// Largest m/h^δ in the bin.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// max m/h^δ over all samples.
    pub constant: f64,
    pub bins: Vec<DyadBin>,
    /// max/min over bins of the per-bin maximum of m/h^δ.
    pub dyad_spread: f64,
}

/// Least-squares slope of log m against log h through the per-dyadic-bin
/// maxima of m; the constant is max m/h^δ.
pub fn fit_envelope(samples: &[(f64, f64)], delta: f64) -> Result<EnvelopeFit, MassError> {
    if samples.len() < 5 {
        return Err(MassError::TooFewSamples(samples.len()));
    }
    let h_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let h_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if !(h_max >= 4.0 * h_min) {
        return Err(MassError::InsufficientSpread { ratio: h_max / h_min });
    }
    let nbins = ((h_max / h_min).log2().floor() as usize + 1).max(1);
    let mut bins: Vec<DyadBin> = (0..nbins)
        .map(|k| DyadBin {
            h_lo: h_min * 2f64.powi(k as i32),
            h_hi: h_min * 2f64.powi(k as i32 + 1),
            count: 0,
            h_at_max: f64::NAN,
            max_mass: f64::NEG_INFINITY,
            max_ratio: f64::NEG_INFINITY,
        })
        .collect();
    let mut constant: f64 = 0.0;
    for &(h, m) in samples {
        let k = ((h / h_min).log2().floor() as usize).min(nbins - 1);
        let b = &mut bins[k];
        b.count += 1;
        let ratio = m / h.powf(delta);
        constant = constant.max(ratio);
        b.max_ratio = b.max_ratio.max(ratio);
        if m > b.max_mass {
            b.max_mass = m;
            b.h_at_max = h;
        }
    }
    bins.retain(|b| b.count > 0);
    let pts: Vec<(f64, f64)> =
        bins.iter().filter(|b| b.max_mass > 0.0).map(|b| (b.h_at_max.ln(), b.max_mass.ln())).collect();
    let (slope, intercept) = if pts.len() >= 2 { least_squares(&pts) } else { (f64::NAN, f64::NAN) };
    let ratios = bins.iter().map(|b| b.max_ratio);
    let hi = ratios.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.fold(f64::INFINITY, f64::min);
    let dyad_spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Ok(EnvelopeFit { slope, intercept, constant, bins, dyad_spread })
}

pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub domain: String,
    pub p0: Vec2,
    pub delta: f64,
    /// Sorted by increasing h.
    pub samples: Vec<MassSample>,
    pub envelope_slope: f64,
    pub envelope_constant: f64,
    pub fit: EnvelopeFit,
}

impl ScalingReport {
    /// Per-dyad maxima of m/h^δ vary by at most `factor`.
    pub fn bounded(&self, factor: f64) -> bool {
        self.fit.dyad_spread <= factor
    }

    pub fn all_converged(&self) -> bool {
        self.samples.iter().all(|s| s.converged)
    }

    /// CSV with columns domain, mode_id, lambda, h, p0x, p0y, delta, r, mass, err_est.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["domain", "mode_id", "lambda", "h", "p0x", "p0y", "delta", "r", "mass", "err_est"])
            .expect("in-memory write");
        for s in &self.samples {
            w.write_record([
                self.domain.clone(),
                s.mode_id.clone(),
                sig17(s.lambda),
                sig17(s.h),
                sig17(s.p0.x),
                sig17(s.p0.y),
                sig17(s.delta),
                sig17(s.r),
                sig17(s.mass),
                sig17(s.err_est),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }
}

/// One report per δ: every mode's mass in B(p0, h^δ), samples computed in
/// parallel and gathered in input order.
pub fn scaling_experiment(
    modes: &[EigenMode],
    domain: &Domain,
    p0: Vec2,
    deltas: &[f64],
) -> Result<Vec<ScalingReport>, MassError> {
    for &d in deltas {
        if !(0.0..1.0).contains(&d) {
            return Err(MassError::BadDelta(d));
        }
    }
    if let Some(m) = modes.iter().find(|m| !m.h.is_finite()) {
        return Err(MassError::ZeroMode(m.source.clone()));
    }
    if modes.len() < 5 {
        return Err(MassError::TooFewSamples(modes.len()));
    }
    let p0 = domain.snap(p0);
    deltas
        .iter()
        .map(|&delta| {
            let mut samples = modes
                .par_iter()
                .map(|m| {
                    let mut s = ball_mass(m, domain, p0, m.h.powf(delta))?;
                    s.delta = delta;
                    Ok(s)
                })
                .collect::<Result<Vec<_>, MassError>>()?;
            samples.sort_by(|a, b| a.h.total_cmp(&b.h).then(a.mode_id.cmp(&b.mode_id)));
            let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.h, s.mass)).collect();
            let fit = fit_envelope(&pts, delta)?;
            Ok(ScalingReport {
                domain: domain.name.clone(),
                p0,
                delta,
                envelope_slope: fit.slope,
                envelope_constant: fit.constant,
                fit,
                samples,
            })
        })
        .collect()
}
