use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::geometry::{integrate_ball, BallQuadrature, Domain};
use crate::mesh::{generate, BoundaryEdge, Grading};

fn two_triangle_square() -> TriMesh {
    let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
    let boundary_edges = (0..4u32).map(|i| BoundaryEdge { v: [i, (i + 1) % 4], arc: i, t: [0.0, 1.0] }).collect();
    let m = TriMesh {
        domain: Domain::unit_square(),
        vertices: v,
        triangles: vec![[0, 1, 2], [0, 2, 3]],
        boundary_edges,
        corner_vertices: vec![1, 2, 3, 0],
        h_mesh: 2f64.sqrt(),
    };
    m.validate().unwrap();
    m
}

fn square_mesh(h: f64) -> Arc<TriMesh> {
    Arc::new(generate(&Domain::unit_square(), h, Grading::NONE).unwrap())
}

#[test]
fn two_triangle_stiffness() {
    let (_, k, m) = assemble_mesh(Arc::new(two_triangle_square()), 1).unwrap();
    let expected = [[1.0, -0.5, 0.0, -0.5], [-0.5, 1.0, -0.5, 0.0], [0.0, -0.5, 1.0, -0.5], [-0.5, 0.0, -0.5, 1.0]];
    for i in 0..4 {
        for j in 0..4 {
            assert!((k.get(i, j) - expected[i][j]).abs() < 1e-15, "K[{i}][{j}] = {}", k.get(i, j));
        }
    }
    // M diagonal: vertices 0 and 2 touch both triangles.
    assert!((m.get(0, 0) - 1.0 / 6.0).abs() < 1e-15);
    assert!((m.get(1, 1) - 1.0 / 12.0).abs() < 1e-15);
}

#[test]
fn neumann_kernel_and_partition_of_unity() {
    let mesh = Arc::new(generate(&Domain::half_disc(), 0.1, Grading { corner_exponent: 2.0, corner_radius: 0.3 }).unwrap());
    for order in [1, 2] {
        let (space, k, m) = assemble_mesh(mesh.clone(), order).unwrap();
        let ones = vec![1.0; space.ndof];
        let k1 = k.mul(&ones);
        let res = k1.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(res <= 1e-12 * k.norm(), "{res}");
        assert!((m.quad_form(&ones, &ones) - mesh.area()).abs() < 1e-12 * mesh.area());
        assert!(k.is_symmetric() && m.is_symmetric());
    }
}

#[test]
fn affine_and_quadratic_reproduction() {
    let mesh = square_mesh(0.2);
    let p1 = Arc::new(FemSpace::new(mesh.clone(), 1).unwrap());
    let u = FemField::new(p1.clone(), p1.interpolate(|p| p.x)).unwrap();
    let p2 = Arc::new(FemSpace::new(mesh, 2).unwrap());
    let w = FemField::new(p2.clone(), p2.interpolate(|p| p.x * p.x)).unwrap();
    for k in 0..50 {
        let p = Vec2::new((k as f64 * 0.618 + 0.01).fract(), (k as f64 * 0.377 + 0.02).fract());
        let (v, g) = u.eval(p).unwrap();
        assert!((v - p.x).abs() < 1e-14 && (g.x - 1.0).abs() < 1e-12 && g.y.abs() < 1e-12);
        let (v, g) = w.eval(p).unwrap();
        assert!((v - p.x * p.x).abs() < 1e-14, "{v}");
        assert!((g.x - 2.0 * p.x).abs() < 1e-12 && g.y.abs() < 1e-12);
    }
    assert!(matches!(u.eval(Vec2::new(2.0, 0.5)), Err(FemError::PointOutsideMesh(..))));
    assert!(FemField::new(p1, vec![0.0; 3]).is_err());
    assert!(matches!(FemSpace::new(square_mesh(0.5), 3), Err(FemError::BadOrder(3))));
}

#[test]
fn p1_gradient_converges_linearly() {
    let f = |p: Vec2| (PI * p.x).cos();
    let df = |p: Vec2| -PI * (PI * p.x).sin();
    let mut mesh = generate(&Domain::unit_square(), 0.2, Grading::NONE).unwrap();
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for _ in 0..4 {
        let space = Arc::new(FemSpace::new(Arc::new(mesh.clone()), 1).unwrap());
        let u = FemField::new(space.clone(), space.interpolate(f)).unwrap();
        let mut e: f64 = 0.0;
        for t in 0..mesh.num_triangles() {
            let (_, g) = u.eval_local(t, [1.0 / 3.0; 3]);
            let c = mesh.corners(t);
            // worst over the triangle: gradient is constant, compare at the vertices
            for p in c {
                e = e.max((g.x - df(p)).abs());
            }
        }
        hs.push(mesh.h_mesh.ln());
        errs.push(e.ln());
        mesh = mesh.refine();
    }
    let n = hs.len() as f64;
    let (mx, my) = (hs.iter().sum::<f64>() / n, errs.iter().sum::<f64>() / n);
    let slope = hs.iter().zip(&errs).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / hs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!((slope - 1.0).abs() < 0.3, "{slope}");
}

#[test]
fn assembly_ignores_triangle_order() {
    let mesh = generate(&Domain::half_ellipse(2.0, 1.0).unwrap(), 0.2, Grading::NONE).unwrap();
    let mut shuffled = mesh.clone();
    shuffled.triangles.reverse();
    let n = shuffled.triangles.len();
    shuffled.triangles.swap(0, n / 2);
    for t in shuffled.triangles.iter_mut().step_by(3) {
        t.rotate_left(1);
    }
    for order in [1, 2] {
        let (_, k1, m1) = assemble_mesh(Arc::new(mesh.clone()), order).unwrap();
        let (_, k2, m2) = assemble_mesh(Arc::new(shuffled.clone()), order).unwrap();
        if order == 1 {
            assert!(k1.row_ptr == k2.row_ptr && k1.col == k2.col);
            let close = |a: &SparseSymMatrix, b: &SparseSymMatrix| {
                a.val.iter().zip(&b.val).all(|(x, y)| (x - y).abs() <= 1e-14 * a.norm())
            };
            assert!(close(&k1, &k2) && close(&m1, &m2));
        } else {
            // P2 edge numbering follows the triangle order; compare invariants.
            assert!((k1.norm() - k2.norm()).abs() <= 1e-14 * k1.norm());
            assert!((m1.norm() - m2.norm()).abs() <= 1e-14 * m1.norm());
        }
    }
}

#[test]
fn ball_mass_matches_polar_quadrature() {
    let sq = Domain::unit_square();
    let mesh = square_mesh(0.1);
    let space = Arc::new(FemSpace::new(mesh.clone(), 2).unwrap());
    let f = |p: Vec2| p.x * p.y + 1.0 - 0.5 * p.x * p.x;
    let u = FemField::new(space.clone(), space.interpolate(f)).unwrap();
    let opts = BallQuadrature { rel_tol: 1e-13, ..Default::default() };
    for (p0, r) in [
        (Vec2::new(0.5, 0.5), 0.2),
        (Vec2::new(0.0, 0.0), 0.3),
        (Vec2::new(0.3, 1.0), 0.15),
        (Vec2::new(0.41, 0.47), 0.033),
        (Vec2::new(0.5, 0.5), 2.0),
        // Circles through mesh vertices.
        (Vec2::new(0.0, 1.0), 1.0),
        (Vec2::new(0.0, 0.0), 0.5),
        (Vec2::new(0.5, 0.5), 0.5f64.sqrt()),
        (Vec2::new(0.2, 0.3), 0.1),
    ] {
        let exact = integrate_ball(&sq, p0, r, |p| f(p) * f(p), &opts).value;
        let got = u.ball_mass(p0, r);
        assert!((got - exact).abs() < 1e-12 * exact, "{p0:?} {r}: {got} vs {exact}");
    }
    let one = FemField::new(space.clone(), vec![1.0; space.ndof]).unwrap();
    assert!((one.strip_mass(0.2, 0.5) - 0.3).abs() < 1e-13);
    assert!((one.l2_norm_sq() - 1.0).abs() < 1e-13);
}
