//! Sparse generalized eigenproblem K u = μ M u by shift-invert Lanczos.

mod archive;
mod lanczos;
mod ldl;
mod order;

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::fem::{FemField, FemSpace, SparseSymMatrix};
use crate::geometry::Vec2;
use crate::oracles::AnalyticMode;

pub use archive::EigenArchive;
pub use ldl::{Ldl, Symbolic};
pub use order::nested_dissection;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("factorization of K - σM failed at shifts {shifts:?}")]
    FactorizationFailure { shifts: Vec<f64> },
    #[error("no convergence after {restarts} restarts: {locked} of {wanted} pairs locked, best pending residual {residual:e}")]
    ConvergenceFailure { restarts: usize, locked: usize, wanted: usize, residual: f64 },
    #[error("zero coefficient vector")]
    ZeroVector,
    #[error("bad solver parameters: {0}")]
    BadParameters(String),
    #[error("eigen archive: {0}")]
    Archive(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryCondition {
    #[default]
    Neumann,
    /// Homogeneous Dirichlet: boundary dofs are eliminated.
    Dirichlet,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Relative residual bound for every returned pair.
    pub tol: f64,
    pub max_restarts: usize,
    /// Lanczos steps per run; default max(2·count + 20, 40).
    pub basis: Option<usize>,
    pub seed: u64,
    pub boundary: BoundaryCondition,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-8, max_restarts: 40, basis: None, seed: 0x5eed, boundary: BoundaryCondition::Neumann }
    }
}

/// A raw eigenpair: M-normalized coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub mu: f64,
    pub coeffs: Vec<f64>,
    pub residual: f64,
}

/// ‖Ku − μMu‖ / max(‖Ku‖, ‖Mu‖) in the Euclidean norm. The second term only
/// matters for μ < 1, where ‖Ku‖ alone vanishes with the constant mode.
pub fn relative_residual(k: &SparseSymMatrix, m: &SparseSymMatrix, u: &[f64], mu: f64) -> f64 {
    let ku = k.mul(u);
    let mu_v = m.mul(u);
    let num = ku.iter().zip(&mu_v).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt();
    let den = ku.iter().map(|a| a * a).sum::<f64>().sqrt().max(mu_v.iter().map(|a| a * a).sum::<f64>().sqrt());
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Shifts tried in order when K − σM cannot be factored.
fn shifts(target: f64) -> [f64; 4] {
    let s = 1e-6 * target.abs().max(1.0);
    [target, target - s, target + 2.3 * s, target - 4.7 * s]
}

/// The `count` eigenpairs of K u = μ M u nearest `target`, sorted by μ and
/// M-orthonormal.
pub fn eigenpairs(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    target: f64,
    count: usize,
    opts: &SolveOptions,
) -> Result<Vec<Eigenpair>, EigenError> {
    if k.n != m.n || k.row_ptr != m.row_ptr || k.col != m.col {
        return Err(EigenError::BadParameters("K and M must share a sparsity pattern".into()));
    }
    if !(target >= 0.0) || count == 0 || count > k.n {
        return Err(EigenError::BadParameters(format!("target {target}, count {count}, dimension {}", k.n)));
    }
    if opts.boundary == BoundaryCondition::Dirichlet {
        return Err(EigenError::BadParameters("Dirichlet needs the FE space; use solve_window".into()));
    }
    let symbolic = Symbolic::new(k);
    let mut tried = Vec::new();
    for sigma in shifts(target) {
        tried.push(sigma);
        let a = k.combine(1.0, m, -sigma);
        if let Ok(ldl) = symbolic.factor(&a, 1e-13) {
            let problem = lanczos::ShiftInvert { k, m, ldl, sigma, target };
            let pairs = problem.solve(count, opts)?;
            if let Some(p) = pairs.iter().find(|p| !(p.residual <= opts.tol)) {
                return Err(EigenError::ConvergenceFailure { restarts: opts.max_restarts, locked: pairs.len(), wanted: count, residual: p.residual });
            }
            return Ok(pairs);
        }
    }
    Err(EigenError::FactorizationFailure { shifts: tried })
}

/// Number of eigenvalues of (K, M) below σ, from the inertia of K − σM.
pub fn count_below(k: &SparseSymMatrix, m: &SparseSymMatrix, sigma: f64) -> Result<usize, EigenError> {
    let symbolic = Symbolic::new(k);
    let ldl = symbolic
        .factor(&k.combine(1.0, m, -sigma), 1e-13)
        .map_err(|_| EigenError::FactorizationFailure { shifts: vec![sigma] })?;
    Ok(ldl.negative_pivots())
}

/// The field carried by an eigenmode.
#[derive(Debug, Clone)]
pub enum ModeField {
    Fem(FemField),
    Analytic(AnalyticMode),
}

impl ModeField {
    pub fn value(&self, p: Vec2) -> Option<Complex64> {
        match self {
            ModeField::Fem(f) => f.eval(p).ok().map(|(v, _)| Complex64::new(v, 0.0)),
            ModeField::Analytic(a) => Some(a.value(p)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenMode {
    pub mu: f64,
    /// μ^{-1/2}; infinite for μ = 0.
    pub h: f64,
    pub field: ModeField,
    pub residual: f64,
    pub source: String,
}

impl EigenMode {
    pub fn from_fem(space: Arc<FemSpace>, pair: Eigenpair, source: impl Into<String>) -> Result<Self, EigenError> {
        let field = FemField::new(space, pair.coeffs).map_err(|e| EigenError::BadParameters(e.to_string()))?;
        Ok(EigenMode { mu: pair.mu, h: h_of(pair.mu), field: ModeField::Fem(field), residual: pair.residual, source: source.into() })
    }

    pub fn from_analytic(mode: AnalyticMode) -> Self {
        let mu = mode.lambda_sq;
        let source = mode.label.clone();
        EigenMode { mu, h: h_of(mu), field: ModeField::Analytic(mode), residual: 0.0, source }
    }

    pub fn lambda(&self) -> f64 {
        self.mu.max(0.0).sqrt()
    }

    pub fn fem(&self) -> Option<&FemField> {
        match &self.field {
            ModeField::Fem(f) => Some(f),
            ModeField::Analytic(_) => None,
        }
    }
}

fn h_of(mu: f64) -> f64 {
    if mu > 0.0 {
        mu.sqrt().recip()
    } else {
        f64::INFINITY
    }
}

/// Rescales a FEM mode to uᵀMu = 1; analytic modes are already normalized.
pub fn normalize(mode: &EigenMode, m: &SparseSymMatrix) -> Result<EigenMode, EigenError> {
    let mut out = mode.clone();
    if let ModeField::Fem(f) = &mut out.field {
        let nrm = m.quad_form(&f.coeffs, &f.coeffs);
        if !(nrm > 0.0) {
            return Err(EigenError::ZeroVector);
        }
        let s = nrm.sqrt().recip();
        f.coeffs.iter_mut().for_each(|c| *c *= s);
    }
    Ok(out)
}

/// FEM eigenmodes nearest `target` on a space with matrices (K, M).
pub fn solve_window(
    space: &Arc<FemSpace>,
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    target: f64,
    count: usize,
    opts: &SolveOptions,
) -> Result<Vec<EigenMode>, EigenError> {
    let pairs = match opts.boundary {
        BoundaryCondition::Neumann => eigenpairs(k, m, target, count, opts)?,
        BoundaryCondition::Dirichlet => {
            let boundary = space.boundary_dofs();
            let mut on = vec![false; space.ndof];
            boundary.iter().for_each(|&i| on[i] = true);
            let keep: Vec<usize> = (0..space.ndof).filter(|&i| !on[i]).collect();
            let inner = SolveOptions { boundary: BoundaryCondition::Neumann, ..opts.clone() };
            eigenpairs(&k.restrict(&keep), &m.restrict(&keep), target, count, &inner)?
                .into_iter()
                .map(|p| {
                    let mut coeffs = vec![0.0; space.ndof];
                    for (&i, c) in keep.iter().zip(p.coeffs) {
                        coeffs[i] = c;
                    }
                    Eigenpair { coeffs, ..p }
                })
                .collect()
        }
    };
    let tag = format!("fem:p{}:{}", space.order, space.mesh.domain.name);
    pairs.into_iter().map(|p| EigenMode::from_fem(space.clone(), p, tag.clone())).collect()
}

#[cfg(test)]
mod tests;
