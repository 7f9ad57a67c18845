//! Reference-element data in barycentric coordinates.
//!
//! Basis functions are polynomials in (λ0, λ1, λ2). With g_k = ∇λ_k the element
//! matrices are K = A Σ_kl (g_k·g_l) S_kl and M = A M_ref, where S_kl and
//! M_ref are area-normalized exact integrals of barycentric monomials.

use std::sync::OnceLock;

/// Sparse polynomial in barycentric coordinates: (exponents, coefficient).
type Poly = Vec<([u8; 3], f64)>;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// ∫_T λ^a dA / |T|.
fn monomial_integral(a: [u8; 3]) -> f64 {
    let n: u32 = a.iter().map(|&x| x as u32).sum();
    2.0 * a.iter().map(|&x| factorial(x as u32)).product::<f64>() / factorial(n + 2)
}

fn mul(p: &Poly, q: &Poly) -> Poly {
    let mut out = Vec::with_capacity(p.len() * q.len());
    for (a, c) in p {
        for (b, d) in q {
            out.push(([a[0] + b[0], a[1] + b[1], a[2] + b[2]], c * d));
        }
    }
    out
}

fn diff(p: &Poly, k: usize) -> Poly {
    p.iter()
        .filter(|(a, _)| a[k] > 0)
        .map(|(a, c)| {
            let mut b = *a;
            b[k] -= 1;
            (b, c * a[k] as f64)
        })
        .collect()
}

fn integral(p: &Poly) -> f64 {
    p.iter().map(|(a, c)| c * monomial_integral(*a)).sum()
}

fn unit(k: usize, power: u8) -> [u8; 3] {
    let mut a = [0u8; 3];
    a[k] = power;
    a
}

/// Local basis of the given order; P2 lists the vertex functions first, then
/// the edge functions with edge k opposite vertex k.
fn basis(order: u8) -> Vec<Poly> {
    match order {
        1 => (0..3).map(|k| vec![(unit(k, 1), 1.0)]).collect(),
        _ => {
            let mut b: Vec<Poly> = (0..3).map(|k| vec![(unit(k, 2), 2.0), (unit(k, 1), -1.0)]).collect();
            for k in 0..3 {
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                let mut e = [0u8; 3];
                e[i] = 1;
                e[j] = 1;
                b.push(vec![(e, 4.0)]);
            }
            b
        }
    }
}

#[derive(Debug)]
pub struct Reference {
    pub order: u8,
    pub ndof: usize,
    /// stiffness[k][l][a][b] = ∫ ∂_k φ_a ∂_l φ_b / |T| (∂_k = ∂/∂λ_k).
    pub stiffness: [[Vec<Vec<f64>>; 3]; 3],
    pub mass: Vec<Vec<f64>>,
    basis: Vec<Poly>,
    grads: Vec<[Poly; 3]>,
}

impl Reference {
    pub fn get(order: u8) -> &'static Reference {
        static P1: OnceLock<Reference> = OnceLock::new();
        static P2: OnceLock<Reference> = OnceLock::new();
        match order {
            1 => P1.get_or_init(|| Reference::build(1)),
            _ => P2.get_or_init(|| Reference::build(2)),
        }
    }

    fn build(order: u8) -> Self {
        let basis = basis(order);
        let n = basis.len();
        let grads: Vec<[Poly; 3]> = basis.iter().map(|p| [diff(p, 0), diff(p, 1), diff(p, 2)]).collect();
        let stiffness = std::array::from_fn(|k| {
            std::array::from_fn(|l| {
                (0..n).map(|a| (0..n).map(|b| integral(&mul(&grads[a][k], &grads[b][l]))).collect()).collect()
            })
        });
        let mass = (0..n).map(|a| (0..n).map(|b| integral(&mul(&basis[a], &basis[b]))).collect()).collect();
        Reference { order, ndof: n, stiffness, mass, basis, grads }
    }

    pub fn values(&self, l: [f64; 3], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.basis) {
            *o = eval(p, l);
        }
    }

    /// ∂φ_a/∂λ_k at the barycentric point.
    pub fn lambda_grads(&self, l: [f64; 3], out: &mut [[f64; 3]]) {
        for (o, g) in out.iter_mut().zip(&self.grads) {
            *o = [eval(&g[0], l), eval(&g[1], l), eval(&g[2], l)];
        }
    }
}

fn eval(p: &Poly, l: [f64; 3]) -> f64 {
    p.iter().map(|(a, c)| c * l[0].powi(a[0] as i32) * l[1].powi(a[1] as i32) * l[2].powi(a[2] as i32)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_mass_and_partition_of_unity() {
        let r = Reference::get(1);
        assert!((r.mass[0][0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((r.mass[0][1] - 1.0 / 12.0).abs() < 1e-15);
        for order in [1, 2] {
            let r = Reference::get(order);
            let total: f64 = r.mass.iter().flatten().sum();
            assert!((total - 1.0).abs() < 1e-14);
            let mut v = vec![0.0; r.ndof];
            r.values([0.2, 0.3, 0.5], &mut v);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn p2_nodal_property() {
        let r = Reference::get(2);
        let nodes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
        let mut v = vec![0.0; 6];
        for (i, n) in nodes.iter().enumerate() {
            r.values(*n, &mut v);
            for (j, x) in v.iter().enumerate() {
                assert!((x - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }
}
