//! Run orchestration: config → mesh → assembly → eigensolve → measurements,
//! with CSV/JSON/SVG artifacts, a manifest per run and a content-hash cache.
//!
//! Layout under the output root:
//! ```text
//! cache/mesh/<key>.mesh
//! cache/eigen/<key>.txt
//! <config hash>/manifest.json
//! <config hash>/...data files
//! ```

mod config;
mod plot;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    EigenConfig, ExperimentKind, MeshConfig, ModeFamily, PointSpec, RellichConfig, RunConfig, SharpnessConfig,
    SharpnessModel,
};
pub use plot::{plot, read_reports};

use crate::eigensolve::{count_below, eigenpairs, EigenArchive, EigenMode, Eigenpair, SolveOptions};
use crate::fem::{assemble_mesh, SparseSymMatrix};
use crate::geometry::{chart_at, Domain, Vec2};
use crate::mass_metrics::{scaling_experiment, ScalingReport};
use crate::mesh::{generate, TriMesh};
use crate::oracles::AnalyticMode;
use crate::rellich::{sweep, IdentityReport, BOUNDED_FACTOR};
use crate::text::{hex_digest, sig17};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Mesh,
    Assemble,
    Solve,
    Measure,
    Verify,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Mesh => "mesh",
            Stage::Assemble => "assemble",
            Stage::Solve => "solve",
            Stage::Measure => "measure",
            Stage::Verify => "verify",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config line {line}, column {column}, field `{field}`: {message}")]
    ConfigParse { line: usize, column: usize, field: String, message: String },
    #[error("config field `{field}`: {message}")]
    ConfigField { field: String, message: String },
    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("nothing to plot")]
    EmptyReport,
    #[error("unreadable report: {0}")]
    BadReport(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn stage<E: std::error::Error + Send + Sync + 'static>(stage: Stage) -> impl FnOnce(E) -> LabError {
    move |e| LabError::Stage { stage, source: Box::new(e) }
}

fn stage_msg(s: Stage, msg: String) -> LabError {
    LabError::Stage { stage: s, source: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// Outcome of one check made by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub name: String,
    pub status: Status,
    pub metric: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
    #[serde(default)]
    pub cached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub config_hash: String,
    pub version: String,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen_hash: Option<String>,
    pub timings: Vec<StageTime>,
    pub files: Vec<FileRecord>,
    pub verdicts: Vec<RunVerdict>,
}

impl RunManifest {
    pub fn failed(&self) -> impl Iterator<Item = &RunVerdict> {
        self.verdicts.iter().filter(|v| v.status == Status::Fail)
    }

    pub fn passed(&self) -> bool {
        self.failed().next().is_none()
    }
}

/// Directory a config writes to.
pub fn run_dir(config: &RunConfig) -> PathBuf {
    config.out.join(&config.hash()[..16])
}

struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn time<T>(&mut self, name: &str, cached: bool, f: impl FnOnce(&mut Self) -> Result<T, LabError>) -> Result<T, LabError> {
        let t = Instant::now();
        let v = f(self)?;
        self.manifest.timings.push(StageTime { stage: name.into(), seconds: t.elapsed().as_secs_f64(), cached });
        Ok(v)
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), LabError> {
        std::fs::write(self.dir.join(name), contents).map_err(stage(Stage::Write))?;
        self.manifest.files.push(FileRecord { name: name.into(), bytes: contents.len() as u64, sha256: hex_digest(contents) });
        Ok(())
    }

    fn save_manifest(&self) -> Result<(), LabError> {
        let json = serde_json::to_string_pretty(&self.manifest).map_err(stage(Stage::Write))?;
        std::fs::write(self.dir.join("manifest.json"), json).map_err(stage(Stage::Write))
    }

    fn verdict(&mut self, name: String, status: Status, metric: f64, threshold: f64, detail: impl Into<String>) {
        self.manifest.verdicts.push(RunVerdict { name, status, metric, threshold, detail: detail.into() });
    }
}

/// Executes a validated config. The manifest is written before any data file
/// and rewritten with the inventory when the run completes.
pub fn run(config: &RunConfig) -> Result<RunManifest, LabError> {
    config.validate()?;
    let hash = config.hash();
    let dir = run_dir(config);
    std::fs::create_dir_all(&dir).map_err(stage(Stage::Write))?;
    let manifest = RunManifest {
        config: config.clone(),
        config_hash: hash,
        version: env!("CARGO_PKG_VERSION").into(),
        complete: false,
        mesh_hash: None,
        eigen_hash: None,
        timings: Vec::new(),
        files: Vec::new(),
        verdicts: Vec::new(),
    };
    let mut r = Run { dir, manifest };
    r.save_manifest()?;
    match config.kind {
        ExperimentKind::Eigens => run_eigens(config, &mut r)?,
        ExperimentKind::MassScaling => run_mass(config, &mut r)?,
        ExperimentKind::Rellich => run_rellich(config, &mut r)?,
        ExperimentKind::Sharpness => run_sharpness(config, &mut r)?,
    }
    r.manifest.complete = true;
    r.save_manifest()?;
    Ok(r.manifest)
}

fn cache_dir(config: &RunConfig, kind: &str) -> PathBuf {
    config.out.join("cache").join(kind)
}

/// Mesh for a config, from the cache when allowed. Returns the mesh and
/// whether it came from the cache.
pub fn build_mesh(config: &RunConfig) -> Result<(TriMesh, bool), LabError> {
    let domain = config.build_domain()?;
    let key = hex_digest(
        serde_json::to_string(&(&config.domain, config.mesh.h, config.mesh.grading()))
            .expect("mesh key serializes")
            .as_bytes(),
    );
    let path = cache_dir(config, "mesh").join(format!("{}.mesh", &key[..32]));
    if config.cache {
        if let Ok(mesh) = TriMesh::load(&path) {
            return Ok((mesh, true));
        }
    }
    let mesh = generate(&domain, config.mesh.h, config.mesh.grading()).map_err(stage(Stage::Mesh))?;
    if config.cache {
        std::fs::create_dir_all(path.parent().expect("cache path has a parent")).map_err(stage(Stage::Write))?;
        mesh.save(&path).map_err(stage(Stage::Write))?;
    }
    Ok((mesh, false))
}

/// At most this many eigenvalues are computed per shift when slicing a window.
const SLICE: usize = 12;

/// Every eigenpair with μ in [lo, hi), found by bisecting the window with
/// inertia counts until each slice holds at most `SLICE` values.
fn slice_window(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    lo: f64,
    hi: f64,
    max_modes: usize,
    opts: &SolveOptions,
) -> Result<Vec<Eigenpair>, LabError> {
    let count = |s: f64| count_below(k, m, s).map_err(stage(Stage::Solve));
    // Nothing lies below a negative shift; this avoids factoring K at σ = 0.
    let c_lo = if lo > 0.0 { count(lo)? } else { 0 };
    let lo = if lo > 0.0 { lo } else { -1.0 };
    let c_hi = count(hi)?;
    let total = c_hi.saturating_sub(c_lo);
    if total > max_modes {
        return Err(stage_msg(
            Stage::Solve,
            format!("window holds {total} modes, above eigen.max_modes = {max_modes}; set eigen.sample"),
        ));
    }
    let mut todo = vec![(lo, hi, c_lo, c_hi)];
    let mut out = Vec::with_capacity(total);
    while let Some((a, b, ca, cb)) = todo.pop() {
        let n = cb - ca;
        if n == 0 {
            continue;
        }
        if n > SLICE && b - a > 1e-9 * b.abs() {
            let mid = 0.5 * (a + b);
            let cm = count(mid)?;
            todo.push((mid, b, cm, cb));
            todo.push((a, mid, ca, cm));
            continue;
        }
        let target = (0.5 * (a + b)).max(0.0);
        let pairs = eigenpairs(k, m, target, n, opts).map_err(stage(Stage::Solve))?;
        let inside: Vec<Eigenpair> = pairs.into_iter().filter(|p| p.mu >= a && p.mu < b).collect();
        if inside.len() != n {
            return Err(stage_msg(
                Stage::Solve,
                format!("slice [{a}, {b}) should hold {n} eigenvalues, found {}", inside.len()),
            ));
        }
        out.extend(inside);
    }
    out.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    Ok(out)
}

/// `per_shift` pairs nearest each of `sample` equally spaced λ in the window,
/// restricted to the window; repeats are recognised by M-overlap.
fn sample_window(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    e: &EigenConfig,
    sample: usize,
    opts: &SolveOptions,
) -> Result<Vec<Eigenpair>, LabError> {
    let [a, b] = e.window;
    let mut all: Vec<Eigenpair> = Vec::new();
    for i in 0..sample {
        let lam = if sample == 1 { 0.5 * (a + b) } else { a + (b - a) * i as f64 / (sample - 1) as f64 };
        let pairs = eigenpairs(k, m, lam * lam, e.per_shift, opts).map_err(stage(Stage::Solve))?;
        for p in pairs {
            let lam = p.mu.max(0.0).sqrt();
            if lam < a || lam > b {
                continue;
            }
            let seen = all.iter().any(|q| (q.mu - p.mu).abs() <= 1e-6 * p.mu.abs().max(1.0) && m.quad_form(&q.coeffs, &p.coeffs).abs() > 0.5);
            if !seen {
                all.push(p);
            }
        }
    }
    all.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    Ok(all)
}

struct FemModes {
    domain: Domain,
    pairs: Vec<Eigenpair>,
    modes: Vec<EigenMode>,
}

fn fem_modes(config: &RunConfig, r: &mut Run) -> Result<FemModes, LabError> {
    let domain = config.build_domain()?;
    let t = Instant::now();
    let (mesh, mesh_hit) = build_mesh(config)?;
    r.manifest.timings.push(StageTime { stage: "mesh".into(), seconds: t.elapsed().as_secs_f64(), cached: mesh_hit });
    let mesh_hash = mesh.content_hash();
    r.manifest.mesh_hash = Some(mesh_hash.clone());
    let order = config.mesh.order;
    let (space, k, m) =
        r.time("assemble", false, |_| assemble_mesh(Arc::new(mesh), order).map_err(stage(Stage::Assemble)))?;

    let e = config.eigen.as_ref().expect("validated: eigen section present");
    let key = hex_digest(
        serde_json::to_string(&(&mesh_hash, order, e, config.seed)).expect("eigen key serializes").as_bytes(),
    );
    let path = cache_dir(config, "eigen").join(format!("{}.txt", &key[..32]));
    let cached = if config.cache {
        EigenArchive::load(&path).ok().filter(|a| a.mesh_hash == mesh_hash && a.order == order)
    } else {
        None
    };
    let hit = cached.is_some();
    let pairs = r.time("solve", hit, |_| match cached {
        Some(a) => Ok(a.pairs),
        None => {
            let opts = SolveOptions { tol: e.tol, seed: config.seed, ..SolveOptions::default() };
            let [a, b] = e.window;
            match e.sample {
                Some(n) => sample_window(&k, &m, e, n, &opts),
                None => slice_window(&k, &m, a * a, b * b, e.max_modes, &opts),
            }
        }
    })?;
    let archive = EigenArchive { mesh_hash, order, pairs };
    let text = archive.to_text();
    r.manifest.eigen_hash = Some(hex_digest(text.as_bytes()));
    if config.cache && !hit {
        std::fs::create_dir_all(path.parent().expect("cache path has a parent")).map_err(stage(Stage::Write))?;
        std::fs::write(&path, &text).map_err(stage(Stage::Write))?;
    }
    let tag = format!("{}:p{order}", domain.name.replace(' ', "_"));
    let modes = archive
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| EigenMode::from_fem(space.clone(), p.clone(), format!("{tag}#{i:04}")))
        .collect::<Result<Vec<_>, _>>()
        .map_err(stage(Stage::Solve))?;
    Ok(FemModes { domain, pairs: archive.pairs, modes })
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, LabError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(stage(Stage::Write))?;
    for row in rows {
        w.write_record(&row).map_err(stage(Stage::Write))?;
    }
    w.into_inner().map_err(|e| stage_msg(Stage::Write, e.to_string()))
}

/// Eigenvalue table with columns index, mu, lambda, residual.
pub fn eigen_table(pairs: &[Eigenpair]) -> Result<Vec<u8>, LabError> {
    csv_bytes(
        &["index", "mu", "lambda", "residual"],
        pairs.iter().enumerate().map(|(i, p)| vec![i.to_string(), sig17(p.mu), sig17(p.mu.max(0.0).sqrt()), sig17(p.residual)]),
    )
}

fn run_eigens(config: &RunConfig, r: &mut Run) -> Result<(), LabError> {
    let fm = fem_modes(config, r)?;
    let table = eigen_table(&fm.pairs)?;
    r.write("eigen.csv", &table)?;
    Ok(())
}

fn reports_csv(reports: &[ScalingReport]) -> Vec<u8> {
    let mut out = String::new();
    for (i, rep) in reports.iter().enumerate() {
        let csv = rep.to_csv();
        let body = if i == 0 { csv.as_str() } else { csv.split_once('\n').map_or("", |x| x.1) };
        out.push_str(body);
    }
    out.into_bytes()
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, LabError> {
    serde_json::to_vec_pretty(v).map_err(stage(Stage::Write))
}

/// Writes mass CSV/JSON/SVG for one point and returns a summary row per δ.
fn write_reports(r: &mut Run, stem: &str, label: &str, reports: &[ScalingReport]) -> Result<Vec<Vec<String>>, LabError> {
    r.write(&format!("{stem}.csv"), &reports_csv(reports))?;
    r.write(&format!("{stem}.json"), &json_bytes(&reports)?)?;
    r.write(&format!("{stem}.svg"), plot(reports)?.as_bytes())?;
    Ok(reports
        .iter()
        .map(|rep| {
            vec![
                label.to_string(),
                sig17(rep.p0.x),
                sig17(rep.p0.y),
                sig17(rep.delta),
                rep.samples.len().to_string(),
                sig17(rep.envelope_slope),
                sig17(rep.envelope_constant),
                sig17(rep.fit.dyad_spread),
            ]
        })
        .collect())
}

const SUMMARY_HEADER: [&str; 8] = ["point", "p0x", "p0y", "delta", "samples", "envelope_slope", "envelope_constant", "dyad_spread"];

fn run_mass(config: &RunConfig, r: &mut Run) -> Result<(), LabError> {
    let fm = fem_modes(config, r)?;
    r.write("eigen.csv", &eigen_table(&fm.pairs)?)?;
    let points = config.resolve_points(&fm.domain)?;
    let mut summary = Vec::new();
    for (i, (spec, &p0)) in config.points.iter().zip(&points).enumerate() {
        let reports = r.time(&format!("mass:{i}"), false, |_| {
            scaling_experiment(&fm.modes, &fm.domain, p0, &config.deltas).map_err(stage(Stage::Measure))
        })?;
        let label = spec.label();
        summary.extend(write_reports(r, &format!("mass_{i}"), &label, &reports)?);
        for rep in &reports {
            let ok = rep.bounded(BOUNDED_FACTOR);
            r.verdict(
                format!("bounded:{label}:delta={}", rep.delta),
                if ok { Status::Pass } else { Status::Fail },
                rep.fit.dyad_spread,
                BOUNDED_FACTOR,
                "per-dyad maxima of mass/h^δ vary by at most the threshold",
            );
        }
    }
    r.write("mass_summary.csv", &csv_bytes(&SUMMARY_HEADER, summary)?)?;
    Ok(())
}

/// Analytic modes of a family on `domain`.
pub fn family_modes(family: ModeFamily, indices: &[[u32; 2]], domain: &Domain) -> Result<Vec<AnalyticMode>, LabError> {
    let bad = |m: String| LabError::ConfigField { field: "rellich.family".into(), message: m };
    let name = domain.name.as_str();
    match family {
        ModeFamily::Rectangle => {
            if !(name == "unit_square" || name.starts_with("rectangle")) {
                return Err(bad(format!("rectangle modes need a rectangle domain, not `{name}`")));
            }
            let (_, hi) = domain.bbox();
            Ok(indices.iter().map(|&[m, n]| AnalyticMode::rectangle(hi.x, hi.y, m, n)).collect())
        }
        ModeFamily::HalfDisc | ModeFamily::Disc => {
            let want = if family == ModeFamily::HalfDisc { "half_disc" } else { "disc" };
            let (lo, hi) = domain.bbox();
            let unit = (hi.x - 1.0).abs() < 1e-12 && (lo.x + 1.0).abs() < 1e-12;
            if !name.starts_with(want) || !unit {
                return Err(bad(format!("{want} modes need the unit {want} domain, not `{name}`")));
            }
            indices
                .iter()
                .map(|&[m, k]| {
                    if family == ModeFamily::HalfDisc {
                        AnalyticMode::half_disc(m, k)
                    } else {
                        AnalyticMode::disc(m, k)
                    }
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(stage(Stage::Verify))
        }
    }
}

/// CSV of an identity report: mode_id, h, then one column per term.
pub fn identity_csv(rep: &IdentityReport) -> Result<Vec<u8>, LabError> {
    let names: Vec<&String> = rep.terms.keys().collect();
    let mut header = vec!["mode_id", "h"];
    header.extend(names.iter().map(|s| s.as_str()));
    let rows = (0..rep.h.len()).map(|i| {
        let mut row = vec![rep.mode_ids[i].clone(), sig17(rep.h[i])];
        row.extend(names.iter().map(|n| sig17(rep.terms[*n][i])));
        row
    });
    csv_bytes(&header, rows)
}

fn run_rellich(config: &RunConfig, r: &mut Run) -> Result<(), LabError> {
    let domain = config.build_domain()?;
    let rc = config.rellich.as_ref().expect("validated: rellich section present");
    let modes = family_modes(rc.family, &rc.indices, &domain)?;
    let points = config.resolve_points(&domain)?;
    for (pi, (spec, &p0)) in config.points.iter().zip(&points).enumerate() {
        let chart = chart_at(&domain, p0).map_err(stage(Stage::Verify))?;
        for (ii, id) in rc.identities.iter().enumerate() {
            let rep = r.time(&format!("rellich:{pi}:{ii}"), false, |_| {
                sweep(id, &modes, &domain, &chart).map_err(stage(Stage::Verify))
            })?;
            let stem = format!("rellich_{pi}_{ii}_{}", id.tag());
            r.write(&format!("{stem}.json"), rep.to_json().as_bytes())?;
            r.write(&format!("{stem}.csv"), &identity_csv(&rep)?)?;
            for v in &rep.verdicts {
                r.verdict(
                    format!("{}@{}:{}", id.tag(), spec.label(), v.name),
                    if v.passed { Status::Pass } else { Status::Fail },
                    v.metric,
                    v.threshold,
                    v.rule.clone(),
                );
            }
        }
    }
    Ok(())
}

/// Largest relative deviation of m/h^s from its mean.
fn ratio_deviation(rep: &ScalingReport, s: f64) -> f64 {
    let ratios: Vec<f64> = rep.samples.iter().map(|x| x.mass / x.h.powf(s)).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    ratios.iter().map(|q| (q / mean - 1.0).abs()).fold(0.0, f64::max)
}

fn slope_verdict(r: &mut Run, rep: &ScalingReport, sc: &SharpnessConfig) {
    let want = sc.expected_slope();
    let dev = (rep.envelope_slope - want).abs();
    r.verdict(
        "slope".into(),
        if dev <= sc.slope_tolerance() { Status::Pass } else { Status::Fail },
        rep.envelope_slope,
        want,
        format!("fitted envelope slope within ±{} of the threshold", sc.slope_tolerance()),
    );
}

fn run_sharpness(config: &RunConfig, r: &mut Run) -> Result<(), LabError> {
    let sc = config.sharpness.as_ref().expect("validated: sharpness section present");
    match sc.model {
        SharpnessModel::Beam => {
            let beams = sc
                .h
                .iter()
                .map(|&h| AnalyticMode::gaussian_beam(h, Vec2::ZERO, 0.0, sc.tube).map(EigenMode::from_analytic))
                .collect::<Result<Vec<_>, _>>()
                .map_err(stage(Stage::Measure))?;
            let tube = match &beams[0].field {
                crate::eigensolve::ModeField::Analytic(a) => a.beam_tube(1.0),
                _ => None,
            }
            .ok_or_else(|| stage_msg(Stage::Measure, "beam tube could not be built".into()))?;
            let reports = r.time("mass", false, |_| {
                scaling_experiment(&beams, &tube, Vec2::ZERO, &[sc.delta]).map_err(stage(Stage::Measure))
            })?;
            let summary = write_reports(r, "sharpness", "beam_center", &reports)?;
            r.write("sharpness_summary.csv", &csv_bytes(&SUMMARY_HEADER, summary)?)?;
            let rep = &reports[0];
            slope_verdict(r, rep, sc);
            let dev = ratio_deviation(rep, sc.expected_slope());
            r.verdict(
                "ratio_stable".into(),
                if dev <= sc.ratio_tol { Status::Pass } else { Status::Fail },
                dev,
                sc.ratio_tol,
                "largest relative deviation of m/h^s from its mean, s the expected slope",
            );
        }
        SharpnessModel::Modes => {
            let fm = fem_modes(config, r)?;
            r.write("eigen.csv", &eigen_table(&fm.pairs)?)?;
            let p0 = config.resolve_points(&fm.domain)?[0];
            let (lo, hi) = fm.domain.bbox();
            let half_width = sc.strip * (hi.y - lo.y);
            let fractions: Vec<f64> = fm
                .modes
                .iter()
                .map(|m| {
                    let f = m.fem().expect("FEM modes");
                    f.strip_mass(-half_width, half_width) / f.l2_norm_sq()
                })
                .collect();
            let selected: Vec<EigenMode> = fm
                .modes
                .iter()
                .zip(&fractions)
                .filter(|(_, &f)| f >= sc.threshold)
                .map(|(m, _)| m.clone())
                .collect();
            let rows = fm.modes.iter().zip(&fractions).map(|(m, &f)| {
                vec![m.source.clone(), sig17(m.lambda()), sig17(f), (f >= sc.threshold).to_string()]
            });
            r.write("tube.csv", &csv_bytes(&["mode_id", "lambda", "tube_fraction", "selected"], rows)?)?;
            let n = selected.len();
            if n < sc.min_modes {
                r.verdict(
                    "tube_modes".into(),
                    Status::Inconclusive,
                    n as f64,
                    sc.min_modes as f64,
                    "too few strip-concentrated modes in the window",
                );
                return Ok(());
            }
            r.verdict("tube_modes".into(), Status::Pass, n as f64, sc.min_modes as f64, "strip-concentrated modes found");
            match scaling_experiment(&selected, &fm.domain, p0, &[sc.delta]) {
                Ok(reports) => {
                    let summary = write_reports(r, "sharpness", &config.points[0].label(), &reports)?;
                    r.write("sharpness_summary.csv", &csv_bytes(&SUMMARY_HEADER, summary)?)?;
                    slope_verdict(r, &reports[0], sc);
                }
                Err(e) => r.verdict("slope".into(), Status::Inconclusive, 0.0, sc.expected_slope(), e.to_string()),
            }
        }
    }
    Ok(())
}

/// Loads the manifest of a finished or interrupted run.
pub fn load_manifest(dir: &Path) -> Result<RunManifest, LabError> {
    let text = std::fs::read_to_string(dir.join("manifest.json"))?;
    serde_json::from_str(&text).map_err(|e| LabError::BadReport(e.to_string()))
}

#[cfg(test)]
mod tests;
