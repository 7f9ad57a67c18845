//! Convex piecewise-smooth planar domains, boundary charts and ball integration.

mod arc;
mod ball;
mod chart;
mod domain;
mod spec;
mod vec2;

pub use arc::{ArcJet, BoundaryArc};
pub use ball::{ball_domain_area, breakpoint_angles, exit_distance, integrate_ball, BallQuadrature};
pub use chart::{chart_at, corner_chart, local_chart, Chart, CornerChart, Graph, Jet3, LocalChart};
pub use domain::{BoundaryHit, Corner, Domain, BOUNDARY_TOL, CORNER_TURN_TOL};
pub use spec::DomainSpec;
pub use vec2::{Rotation, Vec2};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("domain is not convex: {0}")]
    NotConvex(String),
    #[error("point is corner {0}")]
    PointIsCorner(usize),
    #[error("point is {0:e} away from the boundary")]
    NotOnBoundary(f64),
    #[error("no corner with index {0}")]
    NoSuchCorner(usize),
    #[error("chart evaluated outside its valid range at {0}")]
    ChartRangeExceeded(f64),
    #[error("bad point anchor `{0}`")]
    BadAnchor(String),
    #[error("domain spec: {0}")]
    Spec(String),
}
