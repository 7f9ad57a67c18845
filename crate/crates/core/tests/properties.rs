use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use neumann_lab::cutoff::{gamma, gamma_jet, tchi, tchi_jet, tpsi};
use neumann_lab::eigensolve::EigenMode;
use neumann_lab::fem::{FemField, FemSpace};
use neumann_lab::geometry::{ball_domain_area, chart_at, Domain, Vec2};
use neumann_lab::mass_metrics::{ball_mass, fit_envelope};
use neumann_lab::mesh::{generate, Grading, TriMesh};
use neumann_lab::oracles::{bessel_j_jet, bessel_jp_zero, AnalyticMode};
use neumann_lab::rellich::{dyad_spread, VERDICT_FLOOR};
use neumann_lab::text::sig17;
use proptest::prelude::*;

fn square_mesh() -> &'static TriMesh {
    static MESH: OnceLock<TriMesh> = OnceLock::new();
    MESH.get_or_init(|| generate(&Domain::unit_square(), 0.1, Grading::NONE).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn sig17_round_trips(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(sig17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn cutoff_symmetries(s in -4.0f64..4.0) {
        prop_assert_eq!(tchi(-s), -tchi(s));
        prop_assert_eq!(gamma(-s), gamma(s));
        prop_assert_eq!(tpsi(-s), tpsi(s));
        prop_assert!((0.0..=0.5).contains(&gamma(s)));
        prop_assert!((0.0..=1.0).contains(&tpsi(s)));
        prop_assert!(tchi(s).abs() <= 1.0 + 1e-12);
        // χ̃′ = γ, checked against a central difference.
        let d = 1e-5;
        let fd = (tchi(s + d) - tchi(s - d)) / (2.0 * d);
        prop_assert!((fd - gamma(s)).abs() < 1e-6, "{} vs {}", fd, gamma(s));
        prop_assert_eq!(tchi_jet(s)[1], gamma_jet(s)[0]);
    }

    #[test]
    fn ball_mass_is_monotone_in_radius(
        m in 0u32..6, n in 0u32..6, x in 0.0f64..1.0, y in 0.0f64..1.0, r1 in 0.01f64..0.8, grow in 1.0f64..2.0,
    ) {
        prop_assume!(m + n > 0);
        let d = Domain::unit_square();
        let mode = EigenMode::from_analytic(AnalyticMode::rectangle(1.0, 1.0, m, n));
        let p0 = Vec2::new(x, y);
        let a = ball_mass(&mode, &d, p0, r1).unwrap();
        let b = ball_mass(&mode, &d, p0, r1 * grow).unwrap();
        prop_assert!(a.mass >= 0.0);
        prop_assert!(b.mass + b.err_est + a.err_est >= a.mass, "{} < {}", b.mass, a.mass);
        prop_assert!(b.mass <= 1.0 + b.err_est);
    }

    #[test]
    fn ball_area_is_bounded_by_disc_and_domain(x in 0.0f64..=1.0, y in 0.0f64..=1.0, r in 0.001f64..2.0) {
        let d = Domain::unit_square();
        let p0 = Vec2::new(x, y);
        let a = ball_domain_area(&d, p0, r);
        prop_assert!(a >= -1e-14 && a <= PI * r * r * (1.0 + 1e-12) && a <= 1.0 + 1e-12);
        let inner = x.min(1.0 - x).min(y).min(1.0 - y);
        if inner > r {
            prop_assert!((a - PI * r * r).abs() < 1e-12 * PI * r * r);
        }
    }

    #[test]
    fn fem_constant_ball_mass_matches_area(x in 0.0f64..1.0, y in 0.0f64..1.0, r in 0.01f64..1.2) {
        let space = Arc::new(FemSpace::new(Arc::new(square_mesh().clone()), 1).unwrap());
        let one = FemField::new(space.clone(), vec![1.0; space.ndof]).unwrap();
        let p0 = Vec2::new(x, y);
        let got = one.ball_mass(p0, r);
        let want = ball_domain_area(&Domain::unit_square(), p0, r);
        prop_assert!((got - want).abs() < 1e-11, "{} vs {}", got, want);
    }

    #[test]
    fn envelope_fit_recovers_power_laws(slope in 0.0f64..1.5, c in 0.01f64..10.0, delta in 0.0f64..0.99) {
        let pts: Vec<(f64, f64)> = (0..20).map(|k| {
            let h = 10f64.powf(-4.0 + 3.0 * k as f64 / 19.0);
            (h, c * h.powf(slope))
        }).collect();
        let fit = fit_envelope(&pts, delta).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        let expected = pts.iter().map(|&(h, m)| m / h.powf(delta)).fold(0.0, f64::max);
        prop_assert!((fit.constant / expected - 1.0).abs() < 1e-12);
        prop_assert!(fit.dyad_spread >= 1.0);
    }

    #[test]
    fn dyad_spread_is_scale_free(vals in prop::collection::vec(0.01f64..10.0, 6..30), c in 0.1f64..100.0) {
        let h: Vec<f64> = (0..vals.len()).map(|k| 1e-3 * 1.5f64.powi(k as i32)).collect();
        let s = dyad_spread(&h, &vals, 0.0);
        let scaled: Vec<f64> = vals.iter().map(|v| v * c).collect();
        prop_assert!(s >= 1.0);
        prop_assert!((dyad_spread(&h, &scaled, 0.0) / s - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = vals.iter().map(|v| -v).collect();
        prop_assert_eq!(dyad_spread(&h, &neg, 0.0), s);
        prop_assert!(dyad_spread(&h, &vals, VERDICT_FLOOR) <= s * (1.0 + 1e-12));
    }

    #[test]
    fn charts_invert(t in 0.05f64..3.09, u in -0.05f64..0.05, v in -0.05f64..0.05) {
        let d = Domain::half_disc();
        let p0 = Vec2::new(t.cos(), t.sin());
        let chart = chart_at(&d, p0).unwrap();
        let q = Vec2::new(u, v);
        let back = chart.to_chart(chart.to_world(q));
        prop_assert!((back - q).norm() < 1e-14);
        prop_assert!((chart.to_world(Vec2::ZERO) - p0).norm() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn bessel_prime_zeros_are_zeros(m in 0usize..8, k in 1usize..6) {
        let z = bessel_jp_zero(m, k).unwrap();
        prop_assert!(bessel_j_jet(m, z)[1].abs() < 1e-12);
        if k > 1 {
            prop_assert!(bessel_jp_zero(m, k - 1).unwrap() < z);
        }
    }

    #[test]
    fn mesh_text_round_trips(a in 0.5f64..2.0, b in 0.5f64..2.0, h in 0.08f64..0.3) {
        let mesh = generate(&Domain::rectangle(a, b).unwrap(), h, Grading::NONE).unwrap();
        prop_assert!(mesh.validate().is_ok());
        prop_assert!((mesh.area() - a * b).abs() < 1e-12 * a * b);
        let back = TriMesh::from_text(&mesh.to_text()).unwrap();
        prop_assert_eq!(&back.vertices, &mesh.vertices);
        prop_assert_eq!(&back.triangles, &mesh.triangles);
        prop_assert_eq!(back.content_hash(), mesh.content_hash());
    }
}
