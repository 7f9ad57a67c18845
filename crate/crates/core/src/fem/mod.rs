//! P1/P2 Lagrange elements for the Neumann Laplacian.

mod disc;
mod reference;
mod sparse;

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::Vec2;
use crate::mesh::{barycentric, Locator, TriMesh};

pub use reference::Reference;
pub use sparse::SparseSymMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("element {0} has non-positive Jacobian determinant")]
    DegenerateElement(usize),
    #[error("point ({0}, {1}) is outside the mesh")]
    PointOutsideMesh(f64, f64),
    #[error("unsupported element order {0}")]
    BadOrder(u8),
    #[error("coefficient vector has length {got}, space dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Degrees of freedom of a Lagrange space on a mesh: vertices first, then
/// (for P2) one per edge.
#[derive(Debug)]
pub struct FemSpace {
    pub mesh: Arc<TriMesh>,
    pub order: u8,
    pub ndof: usize,
    /// Global dofs per triangle in reference-basis order.
    pub tri_dofs: Vec<[u32; 6]>,
    /// Interpolation node of each dof.
    pub nodes: Vec<Vec2>,
    locator: Locator,
}

impl FemSpace {
    pub fn new(mesh: Arc<TriMesh>, order: u8) -> Result<Self, FemError> {
        if order != 1 && order != 2 {
            return Err(FemError::BadOrder(order));
        }
        for t in 0..mesh.num_triangles() {
            if mesh.signed_area(t) <= 0.0 {
                return Err(FemError::DegenerateElement(t));
            }
        }
        let nv = mesh.num_vertices();
        let mut nodes = mesh.vertices.clone();
        let tri_dofs: Vec<[u32; 6]> = if order == 1 {
            mesh.triangles.iter().map(|t| [t[0], t[1], t[2], 0, 0, 0]).collect()
        } else {
            let table = mesh.edge_table();
            for e in &table.edges {
                nodes.push((mesh.vertices[e[0] as usize] + mesh.vertices[e[1] as usize]) * 0.5);
            }
            mesh.triangles
                .iter()
                .zip(&table.tri_edges)
                .map(|(t, e)| {
                    let n = nv as u32;
                    [t[0], t[1], t[2], n + e[0], n + e[1], n + e[2]]
                })
                .collect()
        };
        let locator = Locator::new(&mesh);
        Ok(FemSpace { ndof: nodes.len(), mesh, order, tri_dofs, nodes, locator })
    }

    pub fn reference(&self) -> &'static Reference {
        Reference::get(self.order)
    }

    pub fn local_dofs(&self, t: usize) -> &[u32] {
        &self.tri_dofs[t][..self.reference().ndof]
    }

    /// ∇λ_k of triangle t and its area.
    pub fn lambda_gradients(&self, t: usize) -> ([Vec2; 3], f64) {
        let p = self.mesh.corners(t);
        let two_a = (p[1] - p[0]).cross(p[2] - p[0]);
        let g = std::array::from_fn(|k| {
            let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
            Vec2::new(a.y - b.y, b.x - a.x) * (1.0 / two_a)
        });
        (g, 0.5 * two_a)
    }

    /// Element stiffness and mass matrices (row-major, ndof × ndof).
    pub fn element_matrices(&self, t: usize) -> (Vec<f64>, Vec<f64>) {
        let r = self.reference();
        let n = r.ndof;
        let (g, area) = self.lambda_gradients(t);
        let mut k = vec![0.0; n * n];
        let mut m = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let mut s = 0.0;
                for (kk, gk) in g.iter().enumerate() {
                    for (ll, gl) in g.iter().enumerate() {
                        s += gk.dot(*gl) * r.stiffness[kk][ll][a][b];
                    }
                }
                k[a * n + b] = area * s;
                k[b * n + a] = area * s;
                m[a * n + b] = area * r.mass[a][b];
                m[b * n + a] = area * r.mass[a][b];
            }
        }
        (k, m)
    }

    pub fn interpolate(&self, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&p| f(p)).collect()
    }

    /// Dofs whose node lies on the mesh boundary.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        let mesh = &self.mesh;
        let mut on = vec![false; self.ndof];
        let table = (self.order == 2).then(|| mesh.edge_table());
        for e in &mesh.boundary_edges {
            on[e.v[0] as usize] = true;
            on[e.v[1] as usize] = true;
        }
        if let Some(table) = table {
            let nv = mesh.num_vertices();
            let boundary: std::collections::BTreeSet<(u32, u32)> =
                mesh.boundary_edges.iter().map(|b| (b.v[0].min(b.v[1]), b.v[0].max(b.v[1]))).collect();
            for (i, ed) in table.edges.iter().enumerate() {
                if boundary.contains(&(ed[0], ed[1])) {
                    on[nv + i] = true;
                }
            }
        }
        (0..self.ndof).filter(|&i| on[i]).collect()
    }

    pub fn locate(&self, p: Vec2) -> Option<(usize, [f64; 3])> {
        self.locator.locate(&self.mesh, p)
    }
}

/// Stiffness K and mass M on a shared sparsity pattern.
pub fn assemble(space: &FemSpace) -> (SparseSymMatrix, SparseSymMatrix) {
    let n = space.reference().ndof;
    let (kt, mt): (Vec<_>, Vec<_>) = (0..space.mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let (k, m) = space.element_matrices(t);
            let dofs = space.local_dofs(t);
            let mut kt = Vec::with_capacity(n * (n + 1) / 2);
            let mut mt = Vec::with_capacity(n * (n + 1) / 2);
            for a in 0..n {
                for b in 0..n {
                    let (i, j) = (dofs[a], dofs[b]);
                    if i <= j {
                        kt.push((i, j, k[a * n + b]));
                        mt.push((i, j, m[a * n + b]));
                    }
                }
            }
            (kt, mt)
        })
        .unzip();
    let kt: Vec<_> = kt.into_iter().flatten().collect();
    let mt: Vec<_> = mt.into_iter().flatten().collect();
    let k = SparseSymMatrix::from_upper_triplets(space.ndof, kt);
    let m = SparseSymMatrix::from_upper_triplets(space.ndof, mt);
    debug_assert!(k.row_ptr == m.row_ptr && k.col == m.col);
    (k, m)
}

/// Builds the space and assembles K and M.
pub fn assemble_mesh(mesh: Arc<TriMesh>, order: u8) -> Result<(Arc<FemSpace>, SparseSymMatrix, SparseSymMatrix), FemError> {
    let space = Arc::new(FemSpace::new(mesh, order)?);
    let (k, m) = assemble(&space);
    Ok((space, k, m))
}

/// A finite-element function.
#[derive(Debug, Clone)]
pub struct FemField {
    pub space: Arc<FemSpace>,
    pub coeffs: Vec<f64>,
}

impl FemField {
    pub fn new(space: Arc<FemSpace>, coeffs: Vec<f64>) -> Result<Self, FemError> {
        if coeffs.len() != space.ndof {
            return Err(FemError::DimensionMismatch { expected: space.ndof, got: coeffs.len() });
        }
        Ok(FemField { space, coeffs })
    }

    pub fn order(&self) -> u8 {
        self.space.order
    }

    /// Value and gradient inside triangle t at barycentric point l (the
    /// polynomial extension when l lies outside the triangle).
    pub fn eval_local(&self, t: usize, l: [f64; 3]) -> (f64, Vec2) {
        let r = self.space.reference();
        let dofs = self.space.local_dofs(t);
        let (g, _) = self.space.lambda_gradients(t);
        let mut phi = [0.0; 6];
        let mut dphi = [[0.0; 3]; 6];
        r.values(l, &mut phi);
        r.lambda_grads(l, &mut dphi);
        let mut v = 0.0;
        let mut grad = Vec2::ZERO;
        for (a, &d) in dofs.iter().enumerate() {
            let c = self.coeffs[d as usize];
            v += c * phi[a];
            grad = grad + (g[0] * dphi[a][0] + g[1] * dphi[a][1] + g[2] * dphi[a][2]) * c;
        }
        (v, grad)
    }

    pub fn eval(&self, p: Vec2) -> Result<(f64, Vec2), FemError> {
        let (t, l) = self.space.locate(p).ok_or(FemError::PointOutsideMesh(p.x, p.y))?;
        Ok(self.eval_local(t, l))
    }

    pub fn value_at(&self, t: usize, p: Vec2) -> f64 {
        self.eval_local(t, barycentric(self.space.mesh.corners(t), p)).0
    }

    /// ∫ u² over triangle t (exact).
    pub fn element_mass(&self, t: usize) -> f64 {
        let r = self.space.reference();
        let dofs = self.space.local_dofs(t);
        let area = self.space.mesh.signed_area(t);
        let mut s = 0.0;
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                s += self.coeffs[i as usize] * r.mass[a][b] * self.coeffs[j as usize];
            }
        }
        area * s
    }

    /// ∫ u² over the mesh.
    pub fn l2_norm_sq(&self) -> f64 {
        (0..self.space.mesh.num_triangles()).map(|t| self.element_mass(t)).sum()
    }

    /// ∫ u² over B(p0, r) ∩ mesh, exact up to rounding.
    pub fn ball_mass(&self, p0: Vec2, r: f64) -> f64 {
        disc::ball_mass(self, p0, r)
    }

    /// ∫ u² over the part of the mesh with y0 ≤ y ≤ y1.
    pub fn strip_mass(&self, y0: f64, y1: f64) -> f64 {
        disc::strip_mass(self, y0, y1)
    }
}

#[cfg(test)]
mod tests;
