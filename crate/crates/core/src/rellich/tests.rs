use super::*;
use crate::geometry::chart_at;

fn arc_chart(d: &Domain) -> Chart {
    chart_at(d, Vec2::new(0.5f64.sqrt(), 0.5f64.sqrt())).unwrap()
}

fn top_chart(d: &Domain) -> Chart {
    chart_at(d, Vec2::new(0.4, 1.0)).unwrap()
}

fn half() -> Scales {
    Scales::Fixed { delta: 0.5, epsilon: 0.1 }
}

fn all_terms_zero(r: &IdentityReport, tol: f64) {
    for (name, v) in &r.terms {
        if name == "c0" || name == "c1" || name == "eta" {
            continue;
        }
        assert!(v.iter().all(|x| x.abs() <= tol), "{name}: {v:?}");
    }
}

#[test]
fn constant_mode_gives_zero_terms() {
    let sq = Domain::unit_square();
    let chart = top_chart(&sq);
    let mode = AnalyticMode::constant(&sq);
    let h = 0.005;
    all_terms_zero(&commutator_volume_terms(&mode, &chart, half(), h).unwrap(), 0.0);
    let Chart::Smooth(lc) = &chart else { unreachable!() };
    assert_eq!(boundary_terms_i1_i2(&mode, &sq, lc, half(), h).unwrap(), (0.0, 0.0, 0.0));
    all_terms_zero(&total_cancellation_check(&mode, &chart, half(), h).unwrap(), 0.0);
    let lb = lower_bound_check(&mode, &sq, &chart, half(), h).unwrap();
    assert_eq!(lb.term("lhs"), &[0.0]);
    // γγ-weighted mass is positive for a constant, so the slack absorbs it.
    assert!(lb.term("gamma_mass")[0] > 0.0);
    assert_eq!(lb.term("lhs_minus_rhs_plus_slack"), &[0.0]);
    all_terms_zero(&induction_claim_check(&mode, &chart, 1, h).unwrap(), 0.0);
    let corner = chart_at(&sq, Vec2::new(0.0, 0.0)).unwrap();
    all_terms_zero(&corner_aj_check(&mode, &corner, half(), h).unwrap(), 0.0);
}

#[test]
fn straight_corner_has_no_aj_term() {
    let sq = Domain::unit_square();
    let corner = chart_at(&sq, Vec2::new(1.0, 1.0)).unwrap();
    let mode = AnalyticMode::rectangle(1.0, 1.0, 30, 17);
    let r = corner_aj_check(&mode, &corner, half(), mode.h()).unwrap();
    all_terms_zero(&r, 0.0);
}

#[test]
fn sobolev_trace_on_constant_matches_closed_form() {
    let hd = Domain::half_disc();
    // Flat side of the half-disc: Ω is the half-box below the chart diagonal.
    let chart = chart_at(&hd, Vec2::new(0.0, 0.0)).unwrap();
    let mode = AnalyticMode::constant(&hd);
    let (eta, h) = (0.04, 0.01);
    let r = sobolev_trace_check(&mode, &chart, eta, h).unwrap();
    let c2 = 1.0 / hd.area;
    // ∫ψ̃ = 3, so T = c²·(3η/2); V = c²·18η²/h.
    assert!((r.term("trace")[0] - c2 * 1.5 * eta).abs() < 1e-9 * c2, "{}", r.term("trace")[0]);
    assert!((r.term("volume")[0] - c2 * 18.0 * eta * eta / h).abs() < 1e-9 * c2);
    assert!((r.term("ratio")[0] - h / (12.0 * eta)).abs() < 1e-9);
    assert!(r.passed());
    assert!(matches!(sobolev_trace_check(&mode, &chart, h / 2.0, h), Err(RellichError::PreconditionViolation(_))));
    assert!(matches!(sobolev_trace_check(&mode, &chart, 0.2, h), Err(RellichError::ChartRangeExceeded(_))));
}

#[test]
fn flat_side_terms_cancel_pairwise() {
    let sq = Domain::unit_square();
    let chart = top_chart(&sq);
    let mode = AnalyticMode::rectangle(1.0, 1.0, 8, 3);
    let r = total_cancellation_check(&mode, &chart, Scales::Fixed { delta: 0.75, epsilon: 0.1 }, mode.h()).unwrap();
    let t = |n: &str| r.term(n)[0];
    let scale = t("chi_dnn").abs().max(t("chi_x_dtau").abs());
    assert!(scale > 1e-4, "{:?}", r.terms);
    assert!((t("chi_dnn") + t("rho_dnn")).abs() < 1e-10 * scale);
    assert!((t("chi_x_dtau") + t("rho_y_dtau")).abs() < 1e-10 * scale);
    assert!(r.verdict("cancels").unwrap().passed);
    assert_eq!(r.max_imag, 0.0);
}

#[test]
fn boundary_terms_agree_in_both_parametrizations() {
    let hd = Domain::half_disc();
    let chart = arc_chart(&hd);
    let scales = Scales::Fixed { delta: 0.5, epsilon: 0.07 };
    for m in [250, 400] {
        let mode = AnalyticMode::half_disc(m, 2).unwrap();
        let r = boundary_terms_report(&mode, &hd, &chart, scales, mode.h()).unwrap();
        assert!(r.verdict("coordinates_agree").unwrap().passed, "{:?}", r.verdicts);
        assert!(r.term("I1")[0] != 0.0);
    }
    let sq = Domain::unit_square();
    let mode = AnalyticMode::rectangle(1.0, 1.0, 40, 9);
    let r = boundary_terms_report(&mode, &sq, &top_chart(&sq), half(), mode.h()).unwrap();
    assert!(r.verdict("coordinates_agree").unwrap().passed, "{:?}", r.verdicts);
    // Flat side: χ_x = ρ_y on the boundary and the Neumann relation makes I₂ = −I₁.
    // Both are tiny here: |φ|² along a flat side is a pure cosine.
    let (i1, i2) = (r.term("I1")[0], r.term("I2")[0]);
    assert!((i1 + i2).abs() < 1e-10 * i1.abs() + 1e-15, "{i1} {i2}");
}

#[test]
fn arc_sweep_sum_bounded_while_normal_terms_grow() {
    let hd = Domain::half_disc();
    let chart = arc_chart(&hd);
    let scales = Scales::Fixed { delta: 0.5, epsilon: 0.07 };
    let modes: Vec<AnalyticMode> = [220, 330, 480, 720, 1080].iter().map(|&m| AnalyticMode::half_disc(m, 2).unwrap()).collect();
    let r = sweep(&Identity::TotalCancellation { scales }, &modes, &hd, &chart).unwrap();
    assert!(r.verdict("bounded:sum").unwrap().passed, "{:?}", r.verdicts);
    assert!(growth(&r.h, r.term("chi_dnn")) > 2.0, "{:?}", r.term("chi_dnn"));
    assert_eq!(r.h.len(), 5);
    assert!(r.h.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn commutator_terms_on_flat_side_and_corner() {
    let sq = Domain::unit_square();
    let chart = top_chart(&sq);
    let modes: Vec<AnalyticMode> = [40, 60, 90, 135, 200, 300].iter().map(|&m| AnalyticMode::rectangle(1.0, 1.0, m, 0)).collect();
    let r = sweep(&Identity::CommutatorVolume { scales: half() }, &modes, &sq, &chart).unwrap();
    assert!(r.verdict("bounded:chi_xx_dx").unwrap().passed, "{:?}", r.verdicts);
    let hd = Domain::half_disc();
    let corner = chart_at(&hd, Vec2::new(1.0, 0.0)).unwrap();
    let mode = AnalyticMode::half_disc(10, 1).unwrap();
    let r = commutator_volume_terms(&mode, &corner, Scales::Fixed { delta: 0.75, epsilon: 0.19 }, mode.h()).unwrap();
    assert!(r.terms.values().all(|v| v[0].is_finite()));
    assert!(r.term("chi_x_dxx")[0] != 0.0);
}

#[test]
fn corner_aj_forms_agree_and_decay() {
    let hd = Domain::half_disc();
    let corner = chart_at(&hd, Vec2::new(1.0, 0.0)).unwrap();
    let scales = Scales::Fixed { delta: 0.5, epsilon: 0.19 };
    let mode = AnalyticMode::half_disc(30, 2).unwrap();
    let r = corner_aj_check(&mode, &corner, scales, mode.h()).unwrap();
    let (d, p) = (r.term("direct")[0], r.term("ibp")[0]);
    assert!((d - p).abs() <= 1e-6 * d.abs(), "{d} {p}");
    // The flat edge carries no curvature term.
    assert_eq!(r.term("direct_2")[0].abs() + r.term("direct_1")[0].abs() > 0.0, true);
    let modes: Vec<AnalyticMode> = [28, 40, 56, 80, 112, 160, 224].iter().map(|&m| AnalyticMode::half_disc(m, 1).unwrap()).collect();
    let r = sweep(&Identity::CornerAj { scales }, &modes, &hd, &corner).unwrap();
    assert!(r.passed(), "{:?}", r.verdicts);
}

#[test]
fn lower_bound_holds_on_rectangle_sweep() {
    let sq = Domain::unit_square();
    let chart = top_chart(&sq);
    let modes: Vec<AnalyticMode> = [(40, 7), (60, 11), (90, 20), (135, 31), (200, 45)]
        .iter()
        .map(|&(m, n)| AnalyticMode::rectangle(1.0, 1.0, m, n))
        .collect();
    let r = sweep(&Identity::LowerBound { scales: half() }, &modes, &sq, &chart).unwrap();
    assert!(r.passed(), "{:?} {:?}", r.verdicts, r.terms);
    let c1 = r.term("c1")[0];
    assert!(c1 > 0.0 && c1 <= 0.5);
    assert!(r.term("lhs_minus_rhs_plus_slack").iter().all(|&m| m >= 0.0));
}

#[test]
fn sobolev_and_claim_sweeps_hold() {
    let hd = Domain::half_disc();
    let chart = arc_chart(&hd);
    let modes: Vec<AnalyticMode> = [64, 128, 256, 512].iter().map(|&m| AnalyticMode::half_disc(m, 1).unwrap()).collect();
    let r = sweep(&Identity::SobolevTrace { eta: EtaRule::Multiple { factor: 1.0 } }, &modes, &hd, &chart).unwrap();
    assert!(r.passed(), "{:?} {:?}", r.verdicts, r.term("ratio"));
    for k in [1, 2] {
        let r = sweep(&Identity::InductionClaim { k }, &modes, &hd, &chart).unwrap();
        assert!(r.passed(), "k={k} {:?} {:?}", r.verdicts, r.term("ratio"));
    }
    assert!(matches!(
        sweep(&Identity::InductionClaim { k: 4 }, &modes, &hd, &chart),
        Err(RellichError::PreconditionViolation(_))
    ));
}

#[test]
fn beam_claim_is_bounded_near_its_maximum() {
    let mut ratios = Vec::new();
    let mut hs = Vec::new();
    for h in [1e-2, 3e-3, 1e-3, 3e-4, 1e-4] {
        let beam = AnalyticMode::gaussian_beam(h, Vec2::ZERO, 0.0, 0.5).unwrap();
        let tube = beam.beam_tube(1.0).unwrap();
        let chart = chart_at(&tube, Vec2::new(1.0, 0.0)).unwrap();
        let r = induction_claim_check(&beam, &chart, 1, h).unwrap();
        hs.push(h);
        ratios.push(r.term("ratio")[0]);
    }
    let spread = dyad_spread(&hs, &ratios, VERDICT_FLOOR);
    assert!(spread <= BOUNDED_FACTOR, "{ratios:?}");
}

#[test]
fn report_json_round_trip_and_recompute() {
    let sq = Domain::unit_square();
    let chart = top_chart(&sq);
    let modes: Vec<AnalyticMode> = [40, 80, 160].iter().map(|&m| AnalyticMode::rectangle(1.0, 1.0, m, 5)).collect();
    let r = sweep(&Identity::SobolevTrace { eta: EtaRule::Multiple { factor: 2.0 } }, &modes, &sq, &chart).unwrap();
    let back: IdentityReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
    let mut again = back.clone();
    again.verdicts.clear();
    again.recompute_verdicts();
    assert_eq!(again, r);
    assert!(r.terms.keys().all(|k| r.errors.contains_key(k)));
}

#[test]
fn spread_helpers() {
    let h = [0.001, 0.0015, 0.002, 0.004, 0.008, 0.016];
    let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    assert_eq!(dyad_maxima(&h, &v), vec![(0.0015, 2.0), (0.002, 3.0), (0.004, 4.0), (0.008, 5.0), (0.016, 6.0)]);
    assert_eq!(dyad_spread(&h, &v, 0.0), 3.0);
    assert_eq!(growth(&h, &v), 2.0 / 6.0);
    let lin: Vec<f64> = h.iter().map(|x| 3.0 * x).collect();
    assert!((log_slope(&h, &lin) - 1.0).abs() < 1e-12);
    assert_eq!(dyad_spread(&h, &[1e-9; 6], VERDICT_FLOOR), 1.0);
}
