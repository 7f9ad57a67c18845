use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::fem::assemble_mesh;
use crate::geometry::Domain;
use crate::mesh::{generate, Grading, TriMesh};
use crate::oracles::bessel_jp_zero;

fn square(h: f64) -> TriMesh {
    generate(&Domain::unit_square(), h, Grading::NONE).unwrap()
}

fn mus(modes: &[EigenMode]) -> Vec<f64> {
    modes.iter().map(|m| m.mu).collect()
}

#[test]
fn square_ground_state_is_constant() {
    let (space, k, m) = assemble_mesh(Arc::new(square(0.2)), 1).unwrap();
    let modes = solve_window(&space, &k, &m, 0.0, 1, &SolveOptions::default()).unwrap();
    assert_eq!(modes.len(), 1);
    assert!(modes[0].mu.abs() < 1e-9, "{}", modes[0].mu);
    assert!(modes[0].h.is_infinite());
    let u = &modes[0].fem().unwrap().coeffs;
    assert!(u.iter().all(|c| (c - 1.0).abs() < 1e-8));
}

#[test]
fn square_window_with_richardson() {
    let coarse = square(0.05);
    let fine = coarse.refine();
    let opts = SolveOptions::default();
    let solve = |mesh: TriMesh| {
        let (space, k, m) = assemble_mesh(Arc::new(mesh), 1).unwrap();
        let modes = solve_window(&space, &k, &m, 10.0, 3, &opts).unwrap();
        for md in &modes {
            assert!(md.residual <= 1e-8);
            let u = &md.fem().unwrap().coeffs;
            assert!(relative_residual(&k, &m, u, md.mu) <= 1e-8);
        }
        mus(&modes)
    };
    let (a, b) = (solve(coarse), solve(fine));
    let exact = [PI * PI, PI * PI, 2.0 * PI * PI];
    for i in 0..3 {
        let r = (4.0 * b[i] - a[i]) / 3.0;
        assert!((r - exact[i]).abs() < 0.005 * exact[i], "{i}: {r} vs {}", exact[i]);
        // P1 eigenvalues approximate from above.
        assert!(b[i] > exact[i] && a[i] > b[i]);
    }
}

#[test]
fn disc_first_nonzero_eigenvalue() {
    let jp = bessel_jp_zero(1, 1).unwrap();
    let (space, k, m) = assemble_mesh(Arc::new(generate(&Domain::disc(1.0).unwrap(), 0.08, Grading::NONE).unwrap()), 2).unwrap();
    let modes = solve_window(&space, &k, &m, 3.0, 3, &SolveOptions::default()).unwrap();
    let mu = mus(&modes);
    assert!(mu[0].abs() < 1e-8, "{mu:?}");
    for v in &mu[1..] {
        assert!((v - jp * jp).abs() < 0.01 * jp * jp, "{v}");
    }
}

#[test]
fn p1_eigenvalue_converges_quadratically() {
    let mut mesh = square(0.2);
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for _ in 0..4 {
        let (_, k, m) = assemble_mesh(Arc::new(mesh.clone()), 1).unwrap();
        let p = eigenpairs(&k, &m, 20.0, 1, &SolveOptions::default()).unwrap();
        hs.push(mesh.h_mesh.ln());
        errs.push((p[0].mu - 2.0 * PI * PI).abs().ln());
        mesh = mesh.refine();
    }
    let n = hs.len() as f64;
    let (mx, my) = (hs.iter().sum::<f64>() / n, errs.iter().sum::<f64>() / n);
    let slope = hs.iter().zip(&errs).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / hs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!((slope - 2.0).abs() < 0.4, "{slope}");
}

#[test]
fn window_is_complete_orthonormal_and_deterministic() {
    let mesh = generate(&Domain::half_disc(), 0.05, Grading { corner_exponent: 2.0, corner_radius: 0.3 }).unwrap();
    let (_, k, m) = assemble_mesh(Arc::new(mesh), 2).unwrap();
    let opts = SolveOptions::default();
    let target = 400.0;
    let pairs = eigenpairs(&k, &m, target, 8, &opts).unwrap();
    for (i, p) in pairs.iter().enumerate() {
        assert!(p.residual <= 1e-8);
        for (j, q) in pairs.iter().enumerate() {
            let g = m.quad_form(&p.coeffs, &q.coeffs);
            assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8, "{i} {j} {g}");
        }
        if i > 0 {
            assert!(p.mu >= pairs[i - 1].mu);
        }
    }
    // Inertia: no eigenvalue is missing between the extremes of the window.
    let (lo, hi) = (pairs[0].mu, pairs[7].mu);
    let inside = count_below(&k, &m, hi + 1e-6 * hi).unwrap() - count_below(&k, &m, lo - 1e-6 * lo).unwrap();
    assert_eq!(inside, 8);
    // Nothing outside the window is nearer the target than its farthest member.
    let far = pairs.iter().map(|p| (p.mu - target).abs()).fold(0.0, f64::max);
    let around = count_below(&k, &m, target + far * (1.0 + 1e-9)).unwrap()
        - count_below(&k, &m, target - far * (1.0 + 1e-9)).unwrap();
    assert_eq!(around, 8);
    assert_eq!(eigenpairs(&k, &m, target, 8, &opts).unwrap(), pairs);
}

#[test]
fn normalization_contract() {
    let (space, k, m) = assemble_mesh(Arc::new(square(0.25)), 1).unwrap();
    let modes = solve_window(&space, &k, &m, 10.0, 1, &SolveOptions::default()).unwrap();
    let again = normalize(&modes[0], &m).unwrap();
    let (u, v) = (&modes[0].fem().unwrap().coeffs, &again.fem().unwrap().coeffs);
    assert!(u.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-14));
    let mut scaled = modes[0].clone();
    if let ModeField::Fem(f) = &mut scaled.field {
        f.coeffs.iter_mut().for_each(|c| *c *= -3.5);
    }
    let back = normalize(&scaled, &m).unwrap();
    let w = &back.fem().unwrap().coeffs;
    assert!(u.iter().zip(w).all(|(a, b)| (a + b).abs() < 1e-13));
    let mut constant = modes[0].clone();
    if let ModeField::Fem(f) = &mut constant.field {
        f.coeffs.iter_mut().for_each(|c| *c = 7.0);
    }
    let one = normalize(&constant, &m).unwrap();
    assert!(one.fem().unwrap().coeffs.iter().all(|c| (c - 1.0).abs() < 1e-13));
    let mut zero = modes[0].clone();
    if let ModeField::Fem(f) = &mut zero.field {
        f.coeffs.iter_mut().for_each(|c| *c = 0.0);
    }
    assert!(matches!(normalize(&zero, &m), Err(EigenError::ZeroVector)));
}

#[test]
fn dirichlet_flag() {
    let (space, k, m) = assemble_mesh(Arc::new(square(0.05)), 2).unwrap();
    let opts = SolveOptions { boundary: BoundaryCondition::Dirichlet, ..Default::default() };
    let modes = solve_window(&space, &k, &m, 0.0, 1, &opts).unwrap();
    assert!((modes[0].mu - 2.0 * PI * PI).abs() < 1e-3 * 2.0 * PI * PI, "{}", modes[0].mu);
    let u = &modes[0].fem().unwrap().coeffs;
    assert!(space.boundary_dofs().iter().all(|&i| u[i] == 0.0));
}

#[test]
fn archive_round_trip() {
    let mesh = square(0.3);
    let hash = mesh.content_hash();
    let (_, k, m) = assemble_mesh(Arc::new(mesh), 2).unwrap();
    let pairs = eigenpairs(&k, &m, 30.0, 4, &SolveOptions::default()).unwrap();
    let a = EigenArchive { mesh_hash: hash, order: 2, pairs };
    let b = EigenArchive::from_text(&a.to_text()).unwrap();
    assert_eq!(a, b);
    assert!(EigenArchive::from_text("eigenpairs 2 mesh x order 1\nmu 1\nresidual 0\n").is_err());
}

#[test]
fn rejects_bad_parameters() {
    let (_, k, m) = assemble_mesh(Arc::new(square(0.5)), 1).unwrap();
    let opts = SolveOptions::default();
    assert!(matches!(eigenpairs(&k, &m, -1.0, 1, &opts), Err(EigenError::BadParameters(_))));
    assert!(matches!(eigenpairs(&k, &m, 1.0, 0, &opts), Err(EigenError::BadParameters(_))));
    assert!(matches!(eigenpairs(&k, &m, 1.0, k.n + 1, &opts), Err(EigenError::BadParameters(_))));
}
