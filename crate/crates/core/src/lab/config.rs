//! Run configuration files.
//!
//! ```toml
//! kind = "mass_scaling"
//! points = ["corner:0", [0.3, 0.4]]
//! deltas = [0.3, 0.5, 0.7]
//! seed = 7
//!
//! [domain]
//! builtin = "half_disc"
//!
//! [mesh]
//! h = 0.03
//! order = 2
//!
//! [eigen]
//! window = [20.0, 120.0]
//! sample = 12
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::LabError;
use crate::geometry::{Domain, DomainSpec, Vec2};
use crate::mesh::Grading;
use crate::rellich::Identity;
use crate::text::hex_digest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Eigens,
    MassScaling,
    Rellich,
    Sharpness,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Eigens => "eigens",
            ExperimentKind::MassScaling => "mass_scaling",
            ExperimentKind::Rellich => "rellich",
            ExperimentKind::Sharpness => "sharpness",
        }
    }
}

/// A point given as a named anchor ("corner:0", "boundary:1:0.25", "0.3, 0.4")
/// or as coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Anchor(String),
    Coords([f64; 2]),
}

impl PointSpec {
    pub fn resolve(&self, domain: &Domain) -> Result<Vec2, crate::geometry::GeometryError> {
        match self {
            PointSpec::Anchor(s) => domain.anchor(s),
            PointSpec::Coords([x, y]) => domain.anchor(&format!("{x}, {y}")),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PointSpec::Anchor(s) => s.trim().to_string(),
            PointSpec::Coords([x, y]) => format!("{x},{y}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "default_mesh_h")]
    pub h: f64,
    #[serde(default = "default_order")]
    pub order: u8,
    #[serde(default = "one")]
    pub corner_exponent: f64,
    #[serde(default = "one")]
    pub corner_radius: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { h: default_mesh_h(), order: default_order(), corner_exponent: 1.0, corner_radius: 1.0 }
    }
}

impl MeshConfig {
    pub fn grading(&self) -> Grading {
        Grading { corner_exponent: self.corner_exponent, corner_radius: self.corner_radius }
    }
}

/// Which modes to compute. `window` is a range of λ (μ = λ²). Without
/// `sample` every mode in the window is computed; with it, `per_shift` modes
/// nearest each of `sample` equally spaced λ values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    pub window: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<usize>,
    #[serde(default = "default_per_shift")]
    pub per_shift: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_modes")]
    pub max_modes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeFamily {
    /// cos(mπx/a)cos(nπy/b) on the configured rectangle; indices (m, n).
    Rectangle,
    /// Even disc modes on the unit half-disc; indices (m, k).
    HalfDisc,
    /// Unit disc; indices (m, k).
    Disc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RellichConfig {
    pub family: ModeFamily,
    pub indices: Vec<[u32; 2]>,
    pub identities: Vec<Identity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpnessModel {
    /// Gaussian-beam model field in its own tube, one field per h.
    Beam,
    /// FEM modes of the configured domain whose mass concentrates in the strip |y| < strip·height.
    Modes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessConfig {
    pub model: SharpnessModel,
    #[serde(default = "half")]
    pub delta: f64,
    /// Beam semiclassical parameters; default seven values log-spaced over [1e-5, 1e-2].
    #[serde(default = "default_beam_h")]
    pub h: Vec<f64>,
    /// Beam tube half-width.
    #[serde(default = "half")]
    pub tube: f64,
    /// Allowed deviation of the fitted slope; 0.05 for the beam, 0.15 for modes by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_tol: Option<f64>,
    /// Allowed relative deviation of m/h^s from its mean (beam only).
    #[serde(default = "default_ratio_tol")]
    pub ratio_tol: f64,
    #[serde(default = "default_strip")]
    pub strip: f64,
    #[serde(default = "half")]
    pub threshold: f64,
    #[serde(default = "default_min_modes")]
    pub min_modes: usize,
}

impl SharpnessConfig {
    /// Slope of the beam mass in B(center, h^δ): the ball is narrower than the
    /// beam for δ > 1/2.
    pub fn expected_slope(&self) -> f64 {
        if self.delta <= 0.5 {
            self.delta
        } else {
            2.0 * self.delta - 0.5
        }
    }

    pub fn slope_tolerance(&self) -> f64 {
        self.slope_tol.unwrap_or(match self.model {
            SharpnessModel::Beam => 0.05,
            SharpnessModel::Modes => 0.15,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub points: Vec<PointSpec>,
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output root; each run writes to a subdirectory named by the config hash.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Reuse cached meshes and eigen archives under `<out>/cache`.
    #[serde(default = "yes")]
    pub cache: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rellich: Option<RellichConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharpness: Option<SharpnessConfig>,
}

fn default_mesh_h() -> f64 {
    0.05
}
fn default_order() -> u8 {
    1
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}
fn default_per_shift() -> usize {
    6
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_modes() -> usize {
    2000
}
fn default_seed() -> u64 {
    1
}
fn default_out() -> PathBuf {
    PathBuf::from("runs")
}
fn default_ratio_tol() -> f64 {
    0.1
}
fn default_strip() -> f64 {
    0.2
}
fn default_min_modes() -> usize {
    5
}
fn default_beam_h() -> Vec<f64> {
    (0..7).map(|k| 10f64.powf(-5.0 + 0.5 * k as f64)).collect()
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> LabError {
    LabError::ConfigField { field: field.into(), message: message.into() }
}

/// Dotted key of the line holding byte `offset`: the nearest table header
/// above it joined with the key on that line.
fn key_at(text: &str, offset: usize) -> String {
    let offset = offset.min(text.len());
    let start = text[..offset].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next().unwrap_or("");
    let key = line.split_once('=').map(|(k, _)| k.trim().trim_matches('"').to_string());
    let table = text[..start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('[') && !l.starts_with("[["))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
    match (table, key) {
        (Some(t), Some(k)) => format!("{t}.{k}"),
        (Some(t), None) => t,
        (None, Some(k)) => k,
        (None, None) => String::new(),
    }
}

impl RunConfig {
    /// Parses and validates a configuration file.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column, field) = match e.span() {
                Some(span) => {
                    let before = &text[..span.start.min(text.len())];
                    let line = before.matches('\n').count() + 1;
                    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                    (line, column, key_at(text, span.start))
                }
                None => (0, 0, String::new()),
            };
            LabError::ConfigParse { line, column, field, message: e.message().trim().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, LabError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn build_domain(&self) -> Result<Domain, LabError> {
        let spec = self.domain.as_ref().ok_or_else(|| field_err("domain", "missing [domain] section"))?;
        spec.build().map_err(|e| field_err("domain", e.to_string()))
    }

    pub fn resolve_points(&self, domain: &Domain) -> Result<Vec<Vec2>, LabError> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| p.resolve(domain).map_err(|e| field_err(format!("points[{i}]"), e.to_string())))
            .collect()
    }

    fn needs_fem(&self) -> bool {
        match self.kind {
            ExperimentKind::Eigens | ExperimentKind::MassScaling => true,
            ExperimentKind::Rellich => false,
            ExperimentKind::Sharpness => self.sharpness.as_ref().is_some_and(|s| s.model == SharpnessModel::Modes),
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        for (i, &d) in self.deltas.iter().enumerate() {
            if !(0.0..1.0).contains(&d) {
                return Err(field_err(format!("deltas[{i}]"), format!("{d} outside [0, 1)")));
            }
        }
        let beam = self.kind == ExperimentKind::Sharpness
            && self.sharpness.as_ref().is_some_and(|s| s.model == SharpnessModel::Beam);
        if !beam {
            let domain = self.build_domain()?;
            self.resolve_points(&domain)?;
        }
        let m = &self.mesh;
        if !(m.h > 0.0) {
            return Err(field_err("mesh.h", format!("{} must be positive", m.h)));
        }
        if !matches!(m.order, 1 | 2) {
            return Err(field_err("mesh.order", format!("{} is not 1 or 2", m.order)));
        }
        if !(m.corner_exponent >= 1.0 && m.corner_radius > 0.0) {
            return Err(field_err("mesh", "corner_exponent ≥ 1 and corner_radius > 0 required"));
        }
        if self.needs_fem() {
            let e = self.eigen.as_ref().ok_or_else(|| field_err("eigen", "missing [eigen] section"))?;
            let [a, b] = e.window;
            if !(a >= 0.0 && b > a) {
                return Err(field_err("eigen.window", format!("[{a}, {b}] is not a range 0 ≤ a < b")));
            }
            if e.sample == Some(0) || e.per_shift == 0 {
                return Err(field_err("eigen", "sample and per_shift must be positive"));
            }
            if !(e.tol > 0.0 && e.tol < 1.0) {
                return Err(field_err("eigen.tol", format!("{} outside (0, 1)", e.tol)));
            }
        }
        match self.kind {
            ExperimentKind::Eigens => {}
            ExperimentKind::MassScaling => {
                if self.points.is_empty() {
                    return Err(field_err("points", "at least one point is required"));
                }
                if self.deltas.is_empty() {
                    return Err(field_err("deltas", "at least one delta is required"));
                }
            }
            ExperimentKind::Rellich => {
                let r = self.rellich.as_ref().ok_or_else(|| field_err("rellich", "missing [rellich] section"))?;
                if self.points.is_empty() {
                    return Err(field_err("points", "at least one chart point is required"));
                }
                if r.indices.is_empty() || r.identities.is_empty() {
                    return Err(field_err("rellich", "indices and identities must be non-empty"));
                }
                if let Some((i, _)) = r.indices.iter().enumerate().find(|(_, ix)| ix[0] == 0 && ix[1] == 0) {
                    return Err(field_err(format!("rellich.indices[{i}]"), "the constant mode has no h"));
                }
            }
            ExperimentKind::Sharpness => {
                let s = self.sharpness.as_ref().ok_or_else(|| field_err("sharpness", "missing [sharpness] section"))?;
                if !(0.0..1.0).contains(&s.delta) {
                    return Err(field_err("sharpness.delta", format!("{} outside [0, 1)", s.delta)));
                }
                match s.model {
                    SharpnessModel::Beam => {
                        if let Some((i, h)) = s.h.iter().enumerate().find(|(_, &h)| !(h > 0.0 && h < 1.0)) {
                            return Err(field_err(format!("sharpness.h[{i}]"), format!("{h} outside (0, 1)")));
                        }
                        if !(s.tube > 0.0) {
                            return Err(field_err("sharpness.tube", "must be positive"));
                        }
                    }
                    SharpnessModel::Modes => {
                        if self.points.len() != 1 {
                            return Err(field_err("points", "exactly one point is required"));
                        }
                        if !(s.strip > 0.0 && (0.0..=1.0).contains(&s.threshold)) {
                            return Err(field_err("sharpness", "strip > 0 and threshold in [0, 1] required"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring the output root and the cache flag.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.cache = true;
        hex_digest(serde_json::to_string(&c).expect("config serializes").as_bytes())
    }
}
