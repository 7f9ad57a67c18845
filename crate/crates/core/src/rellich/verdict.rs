//! Sweep verdicts, recomputed from the stored per-h values of a report.

use serde::{Deserialize, Serialize};

use super::{Identity, IdentityReport};
use crate::mass_metrics::least_squares;

/// Per-dyad maxima of an O(1) quantity may vary by at most this factor.
pub const BOUNDED_FACTOR: f64 = 10.0;
/// Per-dyad maxima below this are treated as this value when forming spreads,
/// so a quantity that decays to zero still counts as bounded.
pub const VERDICT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub metric: f64,
    pub threshold: f64,
    pub rule: String,
}

fn verdict(name: &str, metric: f64, threshold: f64, at_most: bool, rule: &str) -> Verdict {
    let passed = if at_most { metric <= threshold } else { metric >= threshold };
    Verdict { name: name.into(), passed, metric, threshold, rule: rule.into() }
}

/// Maximum of |v| in each dyadic h-bin [h_min·2^k, h_min·2^{k+1}), as
/// (h at the maximum, maximum), ordered by increasing h. Empty bins are skipped.
pub fn dyad_maxima(h: &[f64], v: &[f64]) -> Vec<(f64, f64)> {
    let h_min = h.iter().copied().fold(f64::INFINITY, f64::min);
    let mut bins: Vec<(i64, f64, f64)> = Vec::new();
    for (&hh, &vv) in h.iter().zip(v) {
        let k = (hh / h_min).log2().floor() as i64;
        match bins.iter_mut().find(|b| b.0 == k) {
            Some(b) => {
                if vv.abs() > b.2 {
                    b.1 = hh;
                    b.2 = vv.abs();
                }
            }
            None => bins.push((k, hh, vv.abs())),
        }
    }
    bins.sort_by_key(|b| b.0);
    bins.into_iter().map(|b| (b.1, b.2)).collect()
}

/// max/min of the per-dyad maxima, each raised to at least `floor`.
pub fn dyad_spread(h: &[f64], v: &[f64], floor: f64) -> f64 {
    let m = dyad_maxima(h, v);
    let hi = m.iter().map(|b| b.1.max(floor)).fold(0.0, f64::max);
    let lo = m.iter().map(|b| b.1.max(floor)).fold(f64::INFINITY, f64::min);
    if m.is_empty() {
        1.0
    } else {
        hi / lo
    }
}

/// Per-dyad maximum at the smallest-h bin over that at the largest-h bin.
pub fn growth(h: &[f64], v: &[f64]) -> f64 {
    let m = dyad_maxima(h, v);
    match (m.first(), m.last()) {
        (Some(a), Some(b)) if b.1 > 0.0 => a.1 / b.1,
        _ => f64::NAN,
    }
}

/// Least-squares slope of log(per-dyad max |v|) against log h.
pub fn log_slope(h: &[f64], v: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        dyad_maxima(h, v).into_iter().filter(|b| b.1 > 0.0).map(|(h, m)| (h.ln(), m.ln())).collect();
    if pts.len() < 2 {
        f64::NAN
    } else {
        least_squares(&pts).0
    }
}

fn abs_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn bounded(r: &IdentityReport, term: &str) -> Verdict {
    let s = dyad_spread(&r.h, r.term(term), VERDICT_FLOOR);
    verdict(&format!("bounded:{term}"), s, BOUNDED_FACTOR, true, "per-dyad maxima of |term| vary by at most the threshold")
}

fn set(r: &mut IdentityReport, name: &str, values: Vec<f64>, errors: Vec<f64>) {
    r.terms.insert(name.into(), values);
    r.errors.insert(name.into(), errors);
}

pub(super) fn finalize(r: &mut IdentityReport) {
    let n = r.h.len();
    let bins = dyad_maxima(&r.h, &vec![1.0; n]).len();
    let mut out = Vec::new();
    match r.identity {
        Identity::CommutatorVolume { .. } => {
            for t in super::COMMUTATOR_TERMS {
                out.push(bounded(r, t));
            }
        }
        Identity::BoundaryI1I2 { .. } => {
            out.push(bounded(r, "sum"));
            let (i1, i2, a1, a2) = (r.term("I1"), r.term("I2"), r.term("I1_arclength"), r.term("I2_arclength"));
            let (e, ea) = (r.error("I1"), r.error("I1_arclength"));
            let worst = (0..n)
                .map(|i| {
                    let scale = 1e-6 * i1[i].abs().max(i2[i].abs()) + e[i] + ea[i] + 1e-300;
                    ((i1[i] - a1[i]).abs().max((i2[i] - a2[i]).abs())) / scale
                })
                .fold(0.0, f64::max);
            out.push(verdict("coordinates_agree", worst, 1.0, true, "chart and arclength forms agree within 1e-6 relative plus error estimates"));
            let big: Vec<f64> = (0..n).map(|i| i1[i].abs().max(i2[i].abs())).collect();
            let sum = r.term("sum");
            if n > 0 {
                let ratio = if big[0] > 0.0 { sum[0].abs() / big[0] } else { 0.0 };
                out.push(verdict("cancellation_ratio", ratio, 0.3, true, "|I1+I2|/max(|I1|,|I2|) at the smallest h"));
            }
            if bins >= 2 {
                out.push(verdict("grows", growth(&r.h, &big), 3.0, false, "max(|I1|,|I2|) grows by the threshold factor toward small h"));
            }
        }
        Identity::TotalCancellation { .. } => {
            let names = super::CANCELLATION_TERMS;
            let worst = (0..n)
                .map(|i| {
                    let m = names.iter().map(|t| r.term(t)[i].abs()).fold(0.0, f64::max);
                    r.term("sum")[i].abs() / (0.05 * m + r.error("sum")[i] + 1e-300)
                })
                .fold(0.0, f64::max);
            out.push(verdict("cancels", worst, 1.0, true, "|sum| ≤ 0.05·max|term| + quadrature error at every h"));
            out.push(bounded(r, "sum"));
        }
        Identity::LowerBound { .. } => {
            let c0 = r.term("c0").iter().copied().fold(f64::INFINITY, f64::min);
            let c1 = if c0.is_finite() { 0.5 * c0.min(1.0) } else { 0.5 };
            let lhs = r.term("lhs").to_vec();
            let gm = r.term("gamma_mass").to_vec();
            let (el, eg) = (r.error("lhs").to_vec(), r.error("gamma_mass").to_vec());
            let rhs: Vec<f64> = gm.iter().map(|g| c1 * g).collect();
            let slack: Vec<f64> = (0..n).map(|i| (rhs[i] - lhs[i]).max(0.0)).collect();
            let margin: Vec<f64> = (0..n).map(|i| lhs[i] - rhs[i] + slack[i]).collect();
            let err: Vec<f64> = (0..n).map(|i| el[i] + c1 * eg[i]).collect();
            set(r, "c1", vec![c1; n], vec![0.0; n]);
            set(r, "rhs", rhs, eg.iter().map(|e| c1 * e).collect());
            set(r, "c_slack", slack, err.clone());
            set(r, "lhs_minus_rhs_plus_slack", margin, err);
            let s = dyad_spread(&r.h, r.term("c_slack"), VERDICT_FLOOR);
            out.push(verdict("holds", s, BOUNDED_FACTOR, true, "C_slack per-dyad maxima vary by at most the threshold with c1 = min(1, c0)/2"));
            // inner·∫inner⁻¹γγ|φ|² ≥ ¼ mass on B(p0, inner)
            let inner: Vec<f64> = r.h.iter().map(|&h| inner_scale(&r.identity, h)).collect();
            let worst = (0..n)
                .map(|i| {
                    let lhs = inner[i] * gm[i] + inner[i] * eg[i] + r.error("ball_mass")[i];
                    let need = 0.25 * r.term("ball_mass")[i];
                    if need > 0.0 {
                        need / lhs.max(1e-300)
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max);
            out.push(verdict("gamma_mass_quarter", worst, 1.0, true, "¼·mass on B(p0, h^δ) over the γγ-weighted mass"));
        }
        Identity::SobolevTrace { .. } | Identity::InductionClaim { .. } => {
            let s = dyad_spread(&r.h, r.term("ratio"), VERDICT_FLOOR);
            out.push(verdict("holds", s, BOUNDED_FACTOR, true, "per-dyad maxima of |ratio| vary by at most the threshold"));
        }
        Identity::CornerAj { .. } => {
            let (d, p) = (r.term("direct"), r.term("ibp"));
            let (ed, ep) = (r.error("direct"), r.error("ibp"));
            let worst = (0..n)
                .map(|i| (d[i] - p[i]).abs() / (1e-6 * d[i].abs().max(p[i].abs()) + ed[i] + ep[i] + 1e-15))
                .fold(0.0, f64::max);
            out.push(verdict("forms_agree", worst, 1.0, true, "direct and integrated-by-parts forms agree within 1e-6 relative plus error estimates"));
            if bins >= 2 && abs_max(d) > 0.0 {
                out.push(verdict("decays", log_slope(&r.h, d), 0.35, false, "fitted log-log slope of per-dyad max |direct| against h"));
            }
        }
    }
    r.verdicts = out;
}

fn inner_scale(identity: &Identity, h: f64) -> f64 {
    match identity {
        Identity::LowerBound { scales } => scales.resolve(h).map_or(f64::NAN, |s| s.inner),
        _ => f64::NAN,
    }
}
