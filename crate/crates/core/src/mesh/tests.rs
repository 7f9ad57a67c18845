use std::f64::consts::PI;

use super::*;

#[test]
fn coarse_square() {
    let m = generate(&Domain::unit_square(), 0.5, Grading::NONE).unwrap();
    assert!(m.num_triangles() >= 8, "{}", m.num_triangles());
    m.validate().unwrap();
    assert!((m.area() - 1.0).abs() < 1e-14);
    assert!(m.min_angle_deg() >= 20.0);
}

#[test]
fn disc_area_defect() {
    let d = Domain::disc(1.0).unwrap();
    let h = 0.05;
    let m = generate(&d, h, Grading::NONE).unwrap();
    m.validate().unwrap();
    assert!((m.area() - PI).abs() < 2.0 * h * h, "{}", m.area());
    assert!(m.min_angle_deg() >= 20.0, "{}", m.min_angle_deg());
    for &v in &m.boundary_vertices() {
        assert!((m.vertices[v as usize].norm() - 1.0).abs() < 1e-12);
    }
    assert!(m.h_mesh <= 1.3 * h, "{}", m.h_mesh);
}

#[test]
fn graded_half_disc() {
    let d = Domain::half_disc();
    let h = 0.1;
    let m = generate(&d, h, Grading { corner_exponent: 2.0, corner_radius: 0.5 }).unwrap();
    m.validate().unwrap();
    assert!(m.min_angle_deg() >= 20.0);
    for (i, c) in d.corners.iter().enumerate() {
        assert_eq!(m.vertices[m.corner_vertices[i] as usize], c.location);
        let nearest = m
            .vertices
            .iter()
            .filter(|p| **p != c.location)
            .map(|p| p.dist(c.location))
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < h / 10.0, "{nearest}");
    }
}

#[test]
fn grading_follows_size_field() {
    let d = Domain::unit_square();
    let h = 0.1;
    let r = 0.5;
    let m = generate(&d, h, Grading { corner_exponent: 3.0, corner_radius: r }).unwrap();
    // Edges near the origin corner versus the target length at their midpoint.
    let table = m.edge_table();
    let mut ratios = Vec::new();
    for e in &table.edges {
        let (a, b) = (m.vertices[e[0] as usize], m.vertices[e[1] as usize]);
        let mid = (a + b) * 0.5;
        let dist = mid.norm();
        if dist < 0.3 && dist > 0.01 {
            let target = h * (dist / r).powf(2.0 / 3.0);
            ratios.push(a.dist(b) / target);
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(mean > 0.4 && mean < 1.5, "{mean}");
}

#[test]
fn wedge_and_polygons() {
    for d in [
        Domain::wedge(PI / 4.0, 1.0).unwrap(),
        Domain::regular_polygon(5, 1.0).unwrap(),
        Domain::half_ellipse(2.0, 1.0).unwrap(),
    ] {
        let m = generate(&d, 0.1, Grading { corner_exponent: 2.0, corner_radius: 0.3 }).unwrap();
        m.validate().unwrap();
        assert!((m.area() - d.area).abs() < 0.02 * d.area);
        assert!(m.min_angle_deg() >= 20.0, "{} {}", d.name, m.min_angle_deg());
    }
}

#[test]
fn red_refinement() {
    let d = Domain::half_disc();
    let m = generate(&d, 0.2, Grading::NONE).unwrap();
    let r = m.refine();
    r.validate().unwrap();
    assert_eq!(r.num_triangles(), 4 * m.num_triangles());
    assert_eq!(r.boundary_edges.len(), 2 * m.boundary_edges.len());
    for e in &r.boundary_edges {
        let p = r.vertices[e.v[0] as usize];
        let arc = &d.arcs[e.arc as usize];
        assert!(arc.point(e.t[0]).dist(p) < 1e-12);
    }
}

#[test]
fn interpolation_error_quarters() {
    let f = |p: Vec2| p.x * p.x + p.y * p.y;
    let mut m = generate(&Domain::unit_square(), 0.2, Grading::NONE).unwrap();
    // Max error of the P1 interpolant sampled at triangle centroids.
    let err = |m: &TriMesh| {
        let vals = m.interpolate(f);
        (0..m.num_triangles())
            .map(|t| {
                let tri = m.triangles[t];
                let c = m.corners(t);
                let p = (c[0] + c[1] + c[2]) * (1.0 / 3.0);
                let v = tri.iter().map(|&i| vals[i as usize]).sum::<f64>() / 3.0;
                (v - f(p)).abs()
            })
            .fold(0.0, f64::max)
    };
    let mut prev = err(&m);
    for _ in 0..3 {
        m = m.refine();
        let e = err(&m);
        let ratio = prev / e;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        prev = e;
    }
}

#[test]
fn area_converges_quadratically() {
    let d = Domain::disc(1.0).unwrap();
    let mut m = generate(&d, 0.3, Grading::NONE).unwrap();
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for _ in 0..4 {
        hs.push(m.h_mesh.ln());
        errs.push((PI - m.area()).abs().ln());
        m = m.refine();
    }
    let n = hs.len() as f64;
    let (mx, my) = (hs.iter().sum::<f64>() / n, errs.iter().sum::<f64>() / n);
    let sxy: f64 = hs.iter().zip(&errs).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = hs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    assert!((slope - 2.0).abs() < 0.3, "{slope}");
}

#[test]
fn text_round_trip_and_determinism() {
    let d = Domain::half_ellipse(2.0, 1.0).unwrap();
    let a = generate(&d, 0.15, Grading { corner_exponent: 2.0, corner_radius: 0.4 }).unwrap();
    let b = generate(&d, 0.15, Grading { corner_exponent: 2.0, corner_radius: 0.4 }).unwrap();
    assert_eq!(a.content_hash(), b.content_hash());
    let back = TriMesh::from_text(&a.to_text()).unwrap();
    assert_eq!(back, a);
    assert!(a.to_text().starts_with(&format!("vertices {} / triangles {}\n", a.num_vertices(), a.num_triangles())));
}

#[test]
fn locator_finds_points() {
    let m = generate(&Domain::unit_square(), 0.1, Grading::NONE).unwrap();
    let loc = Locator::new(&m);
    for k in 0..100 {
        let p = Vec2::new((k as f64 * 0.618).fract(), (k as f64 * 0.414).fract());
        let (t, bc) = loc.locate(&m, p).unwrap();
        let c = m.corners(t);
        let q = c[0] * bc[0] + c[1] * bc[1] + c[2] * bc[2];
        assert!(q.dist(p) < 1e-14);
    }
    assert!(loc.locate(&m, Vec2::new(1.5, 0.5)).is_none());
}

#[test]
fn rejects_bad_parameters() {
    let d = Domain::unit_square();
    assert!(matches!(generate(&d, 0.0, Grading::NONE), Err(MeshError::BadParameters(_))));
    let g = Grading { corner_exponent: 0.5, corner_radius: 1.0 };
    assert!(matches!(generate(&d, 0.1, g), Err(MeshError::BadParameters(_))));
}
