use std::f64::consts::PI;
use std::path::PathBuf;

use super::*;
use crate::mass_metrics::{fit_envelope, MassSample};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("neumann-lab-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn with_out(text: &str, out: &std::path::Path) -> RunConfig {
    let mut c = RunConfig::parse(text).unwrap();
    c.out = out.to_path_buf();
    c
}

const SQUARE_EIGENS: &str = r#"
kind = "eigens"

[domain]
builtin = "unit_square"

[mesh]
h = 0.08
order = 2

[eigen]
window = [3.0, 10.0]
"#;

#[test]
fn parses_example_config() {
    let c = RunConfig::parse(
        r#"
kind = "mass_scaling"
points = ["corner:0", [0.3, 0.4], "boundary:1:0.25"]
deltas = [0.3, 0.5, 0.7]
seed = 7

[domain]
builtin = "half_disc"

[mesh]
h = 0.03
order = 2
corner_exponent = 2.0
corner_radius = 0.3

[eigen]
window = [20.0, 120.0]
sample = 12
per_shift = 5
"#,
    )
    .unwrap();
    assert_eq!(c.kind, ExperimentKind::MassScaling);
    assert_eq!(c.points[1], PointSpec::Coords([0.3, 0.4]));
    assert_eq!(c.eigen.as_ref().unwrap().sample, Some(12));
    assert!(c.cache && c.out == PathBuf::from("runs"));
    let d = c.build_domain().unwrap();
    let p = c.resolve_points(&d).unwrap();
    assert_eq!(p[0], Vec2::new(1.0, 0.0));
    // Output root and cache flag do not change the hash.
    let mut other = c.clone();
    other.out = "elsewhere".into();
    other.cache = false;
    assert_eq!(c.hash(), other.hash());
    other.seed = 8;
    assert_ne!(c.hash(), other.hash());
}

#[test]
fn config_errors_name_line_and_field() {
    let e = RunConfig::parse("kind = \"eigens\"\n[domain]\nbuiltin = \"unit_square\"\n[mesh]\nh = \"fine\"\n").unwrap_err();
    match e {
        LabError::ConfigParse { line, field, .. } => {
            assert_eq!(line, 5);
            assert_eq!(field, "mesh.h");
        }
        other => panic!("{other}"),
    }
    let e = RunConfig::parse("kind = \"eigens\"\ncolour = 3\n").unwrap_err();
    assert!(matches!(e, LabError::ConfigParse { line: 2, .. }), "{e}");
    let e = RunConfig::parse("kind = \"wobble\"\n").unwrap_err();
    assert!(e.to_string().contains("line 1"), "{e}");

    let base = "kind = \"mass_scaling\"\n[domain]\nbuiltin = \"half_disc\"\n[eigen]\nwindow = [20.0, 120.0]\n";
    let with = |head: &str| RunConfig::parse(&format!("{head}\n{base}")).unwrap_err();
    let field = |e: LabError| match e {
        LabError::ConfigField { field, .. } => field,
        other => panic!("{other}"),
    };
    assert_eq!(field(with("points = [\"corner:0\"]\ndeltas = [0.5, 1.0]")), "deltas[1]");
    assert_eq!(field(with("points = [\"corner:0\"]\ndeltas = [-0.1]")), "deltas[0]");
    assert_eq!(field(with("points = [\"corner:0\", \"corner:7\"]\ndeltas = [0.5]")), "points[1]");
    assert_eq!(field(with("points = [[0.5, -0.5]]\ndeltas = [0.5]")), "points[0]");
    assert_eq!(field(with("deltas = [0.5]")), "points");
    let e = RunConfig::parse("kind = \"eigens\"\n[domain]\nbuiltin = \"unit_square\"\n").unwrap_err();
    assert_eq!(field(e), "eigen");
    let e = RunConfig::parse("kind = \"eigens\"\n[domain]\nbuiltin = \"unit_square\"\n[mesh]\norder = 3\n[eigen]\nwindow = [1.0, 2.0]\n")
        .unwrap_err();
    assert_eq!(field(e), "mesh.order");
}

#[test]
fn eigens_run_writes_table() {
    let out = scratch("eigens");
    let c = with_out(SQUARE_EIGENS, &out);
    let m = run(&c).unwrap();
    assert!(m.complete && m.mesh_hash.is_some() && m.eigen_hash.is_some());
    let dir = run_dir(&c);
    let table = std::fs::read_to_string(dir.join("eigen.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("index,mu,lambda,residual"));
    let lambdas: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    let mut exact: Vec<f64> = (0..4u32)
        .flat_map(|m| (0..4u32).map(move |n| PI * ((m * m + n * n) as f64).sqrt()))
        .filter(|&l| (3.0..10.0).contains(&l))
        .collect();
    exact.sort_by(f64::total_cmp);
    assert_eq!(lambdas.len(), exact.len());
    for (l, e) in lambdas.iter().zip(&exact) {
        assert!((l / e - 1.0).abs() < 1e-3, "{l} vs {e}");
    }
    let saved = load_manifest(&dir).unwrap();
    assert_eq!(saved.files, m.files);
    assert_eq!(saved.files[0].name, "eigen.csv");
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn cached_and_uncached_runs_are_byte_identical() {
    let out = scratch("determinism");
    let text = r#"
kind = "mass_scaling"
points = ["corner:2", [0.3, 0.6]]
deltas = [0.0, 0.5]

[domain]
builtin = "unit_square"

[mesh]
h = 0.06
order = 2

[eigen]
window = [3.0, 22.0]
"#;
    let c = with_out(text, &out);
    let first = run(&c).unwrap();
    let second = run(&c).unwrap();
    let mut nc = c.clone();
    nc.cache = false;
    let third = run(&nc).unwrap();
    let cached = |m: &RunManifest, s: &str| m.timings.iter().find(|t| t.stage == s).unwrap().cached;
    assert!(!cached(&first, "mesh") && !cached(&first, "solve"));
    assert!(cached(&second, "mesh") && cached(&second, "solve"));
    assert!(!cached(&third, "solve"));
    assert_eq!(first.files, second.files);
    assert_eq!(first.files, third.files);
    assert_eq!(first.eigen_hash, third.eigen_hash);
    let names: Vec<&str> = first.files.iter().map(|f| f.name.as_str()).collect();
    for want in ["eigen.csv", "mass_0.csv", "mass_0.json", "mass_0.svg", "mass_1.csv", "mass_summary.csv"] {
        assert!(names.contains(&want), "{names:?}");
    }
    let csv = std::fs::read_to_string(run_dir(&c).join("mass_0.csv")).unwrap();
    assert!(csv.starts_with("domain,mode_id,lambda,h,p0x,p0y,delta,r,mass,err_est\n"));
    assert!(csv.contains("unit_square:p2#0000"));
    assert_eq!(first.verdicts.len(), 4);
    assert!(first.passed(), "{:?}", first.verdicts);
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn too_few_modes_is_a_measure_stage_error() {
    let out = scratch("stage");
    let text = "kind = \"mass_scaling\"\npoints = [\"corner:0\"]\ndeltas = [0.5]\n[domain]\nbuiltin = \"unit_square\"\n[mesh]\nh = 0.1\n[eigen]\nwindow = [3.0, 5.0]\n";
    let e = run(&with_out(text, &out)).unwrap_err();
    assert!(matches!(e, LabError::Stage { stage: Stage::Measure, .. }), "{e}");
    assert!(e.to_string().starts_with("measure stage"));
    let _ = std::fs::remove_dir_all(&out);
}

fn synthetic(delta: f64, f: impl Fn(f64) -> f64) -> ScalingReport {
    let samples: Vec<MassSample> = (0..12)
        .map(|k| {
            let h = 10f64.powf(-3.0 + 2.0 * k as f64 / 11.0);
            MassSample {
                mode_id: format!("s{k}"),
                lambda: 1.0 / h,
                h,
                p0: Vec2::ZERO,
                delta,
                r: h.powf(delta),
                mass: f(h),
                err_est: 0.0,
                converged: true,
            }
        })
        .collect();
    let fit = fit_envelope(&samples.iter().map(|s| (s.h, s.mass)).collect::<Vec<_>>(), delta).unwrap();
    ScalingReport {
        domain: "synthetic".into(),
        p0: Vec2::ZERO,
        delta,
        samples,
        envelope_slope: fit.slope,
        envelope_constant: fit.constant,
        fit,
    }
}

#[test]
fn plot_draws_fit_and_reference_lines() {
    let svg = plot(&[synthetic(0.5, |h| h)]).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("slope 1.000"), "{svg}");
    assert_eq!(svg.matches("<circle").count(), 12);
    assert!(svg.contains("stroke-dasharray"));
    assert!(svg.contains(">1e-3<") && svg.contains(">1e-1<"));
    let two = plot(&[synthetic(0.5, |h| h.sqrt()), synthetic(0.3, |h| 2.0 * h.powf(0.3))]).unwrap();
    assert!(two.contains("slope 0.500") && two.contains("slope 0.300"));
    assert!(matches!(plot(&[]), Err(LabError::EmptyReport)));
    let mut empty = synthetic(0.5, |h| h);
    empty.samples.clear();
    assert!(matches!(plot(&[empty]), Err(LabError::EmptyReport)));
}

#[test]
fn reports_round_trip_through_files() {
    let out = scratch("plotfiles");
    std::fs::create_dir_all(&out).unwrap();
    let reps = vec![synthetic(0.5, |h| h), synthetic(0.7, |h| h)];
    let (a, b) = (out.join("a.json"), out.join("b.json"));
    std::fs::write(&a, serde_json::to_string(&reps).unwrap()).unwrap();
    std::fs::write(&b, serde_json::to_string(&reps[0]).unwrap()).unwrap();
    let back = read_reports(&[a, b]).unwrap();
    assert_eq!(back.len(), 3);
    assert_eq!(back[2], reps[0]);
    std::fs::write(out.join("c.json"), "{}").unwrap();
    assert!(matches!(read_reports(&[out.join("c.json")]), Err(LabError::BadReport(_))));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn rellich_run_reports_verdicts() {
    let out = scratch("rellich");
    let text = r#"
kind = "rellich"
points = [[0.4, 1.0]]

[domain]
builtin = "unit_square"

[rellich]
family = "rectangle"
indices = [[40, 9], [60, 13], [90, 20], [135, 31], [200, 45]]
identities = [
  { identity = "sobolev_trace", eta = { rule = "multiple", factor = 1.0 } },
  { identity = "induction_claim", k = 1 },
]
"#;
    let c = with_out(text, &out);
    let m = run(&c).unwrap();
    assert_eq!(m.verdicts.len(), 2);
    assert!(m.passed(), "{:?}", m.verdicts);
    assert_eq!(m.verdicts[0].name, "sobolev_trace@0.4,1:holds");
    let dir = run_dir(&c);
    let json = std::fs::read_to_string(dir.join("rellich_0_1_induction_claim.json")).unwrap();
    let rep: IdentityReport = serde_json::from_str(&json).unwrap();
    assert_eq!(rep.h.len(), 5);
    let csv = std::fs::read_to_string(dir.join("rellich_0_0_sobolev_trace.csv")).unwrap();
    assert!(csv.starts_with("mode_id,h,eta,ratio,trace,volume\n"), "{csv}");

    let mut wrong = c.clone();
    wrong.rellich.as_mut().unwrap().family = ModeFamily::HalfDisc;
    assert!(matches!(run(&wrong), Err(LabError::ConfigField { .. })));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn beam_sharpness_run_passes() {
    let out = scratch("beam");
    let c = with_out("kind = \"sharpness\"\n[sharpness]\nmodel = \"beam\"\n", &out);
    let m = run(&c).unwrap();
    let get = |n: &str| m.verdicts.iter().find(|v| v.name == n).unwrap();
    assert_eq!(get("slope").status, Status::Pass, "{:?}", m.verdicts);
    assert!((get("slope").metric - 0.5).abs() < 0.05);
    assert_eq!(get("ratio_stable").status, Status::Pass, "{:?}", m.verdicts);
    let svg = std::fs::read_to_string(run_dir(&c).join("sharpness.svg")).unwrap();
    assert!(svg.contains("slope 0.5"));
    let _ = std::fs::remove_dir_all(&out);
}
