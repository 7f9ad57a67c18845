//! Numerical laboratory for Neumann Laplace eigenfunctions on convex planar
//! domains: meshing, finite elements, shift-invert eigensolves, analytic
//! oracle modes, small-ball mass scaling and Rellich-identity checks.

pub mod cutoff;
pub mod eigensolve;
pub mod fem;
pub mod geometry;
pub mod lab;
pub mod mass_metrics;
pub mod mesh;
pub mod oracles;
pub mod quad;
pub mod rellich;
pub mod text;
