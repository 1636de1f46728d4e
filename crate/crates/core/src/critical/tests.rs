use super::*;
use proptest::prelude::*;

fn disk_problem(p: Point2, eps: f64, l1: f64, l2: f64) -> Problem {
    problem_for(DomainSpec::unit_disk(), p, eps, l1, l2, &MfsConfig::default()).unwrap()
}

fn point(x: Point2, y: Point2) -> CriticalPoint {
    CriticalPoint {
        x,
        y,
        grad_norm: 0.0,
        hess_eigs: [1.0; 4],
        morse_index: 0,
        nondegenerate: true,
        local_index: 1,
        kind: PointType::Unclassified,
        gauge: None,
        paired_with: None,
        seed: [0.0; 4],
        iterations: 0,
    }
}

#[test]
fn classification_examples() {
    let p = Point2::ZERO;
    let bands = ClassBands::default();
    let (eps, tau): (f64, f64) = (1e-6, 2.0);
    let beta = crate::kr::beta(tau);
    let c = 1.3;
    let base = eps.powf(beta) * c;
    let cp = point(Point2::new(base * 1.01, 0.0), Point2::new(-base / tau * 0.99, 0.0));
    assert_eq!(classify_type(&cp, p, eps, beta, c, tau, &bands), PointType::TypeIII);
    let cp = point(Point2::new(0.4, 0.0), Point2::new(0.0, 0.5));
    assert_eq!(classify_type(&cp, p, 1e-6, 0.25, 1.0, 1.0, &bands), PointType::TypeI);
    let cp = point(Point2::new(0.02, 0.0), Point2::new(0.0, 0.5));
    assert_eq!(classify_type(&cp, p, 1e-6, 0.25, 1.0, 1.0, &bands), PointType::TypeII);
    let cp = point(Point2::new(0.02, 0.0), Point2::new(0.0, 0.001));
    assert_eq!(classify_type(&cp, p, 1e-6, 0.25, 1.0, 1.0, &bands), PointType::Unclassified);
}

#[test]
fn config_validation() {
    assert!(SearchConfig::default().validate().is_ok());
    let bad = SearchConfig { dedup_radius: Some(1e-10), ..Default::default() };
    assert!(bad.validate().is_err());
    let bad = SearchConfig { bands: ClassBands { delta0: 0.1, c_lo: 2.0, c_hi: 1.0 }, ..Default::default() };
    assert!(bad.validate().is_err());
}

#[test]
fn newton_converges_from_type_three_prediction() {
    let p = Point2::new(0.3, 0.0);
    let prob = disk_problem(p, 1e-4, 2.0, 1.0);
    let pred = crate::asymptotics::predict(
        crate::asymptotics::TheoremId::T1_15,
        &crate::asymptotics::PredictInput { outer: &prob.outer, p, lambda1: 2.0, lambda2: 1.0, eps: 1e-4, y0: None },
    )
    .unwrap();
    let cfg = SearchConfig::default();
    for pt in &pred.points {
        let cp = newton_refine(&prob, (pt.x, pt.y), &cfg).unwrap();
        assert!(cp.iterations <= 12, "{} iterations", cp.iterations);
        assert!(cp.grad_norm < 1e-10 * prob.grad_scale());
        assert!(cp.nondegenerate);
        let again = newton_refine(&prob, (cp.x, cp.y), &cfg).unwrap();
        assert_eq!(again.iterations, 0);
        assert_eq!((again.x, again.y), (cp.x, cp.y));
    }
    assert!(matches!(
        newton_refine(&prob, (p + Point2::new(0.2, 0.0), p + Point2::new(0.2, 0.0)), &cfg),
        Err(Error::DiagonalSingularity)
    ));
    assert!(newton_refine(&prob, (p, Point2::new(-0.5, 0.0)), &cfg).is_err());
}

#[test]
fn gauge_fixing_rotates_onto_axis() {
    let prob = disk_problem(Point2::ZERO, 1e-3, 1.0, 1.0);
    let cfg = SearchConfig::default();
    let x = Point2::new(0.0, 0.2);
    let y = Point2::new(-0.1, -0.3);
    let cp = certify(&prob, x, y, &cfg, [0.0; 4], 0).unwrap();
    let g = gauge_fix_annulus(&prob, &cp, &cfg).unwrap();
    assert!((g.x.x1 - 0.2).abs() < 1e-15 && g.x.x2.abs() < 1e-15);
    assert!((g.y - y.rotate(-PI / 2.0)).norm() < 1e-15);
    assert!((g.gauge.unwrap() - PI / 2.0).abs() < 1e-15);
    assert!((g.grad_norm - cp.grad_norm).abs() < 1e-10 * cp.grad_norm.max(1.0));
    for k in 0..4 {
        assert!((g.hess_eigs[k] - cp.hess_eigs[k]).abs() < 1e-10 * cp.hess_eigs[3].abs());
    }
    let again = gauge_fix_annulus(&prob, &g, &cfg).unwrap();
    assert!(again.distance(g.x, g.y) < 1e-15);
    let off = disk_problem(Point2::new(0.2, 0.0), 1e-3, 1.0, 1.0);
    assert!(gauge_fix_annulus(&off, &cp, &cfg).is_err());
}

#[test]
fn reduced_eigs_drop_the_rotation_mode() {
    // Hessian with a zero mode along the rotation generator at x = (1,0), y = (−1,0).
    let t = [0.0, 1.0, 0.0, -1.0];
    let mut h = [[0.0; 4]; 4];
    let d = [2.0, 5.0, 3.0, 5.0];
    for i in 0..4 {
        h[i][i] = d[i];
    }
    for i in 0..4 {
        for j in 0..4 {
            h[i][j] -= 2.5 * t[i] * t[j];
        }
    }
    let e = reduced_eigs(&h, Point2::new(1.0, 0.0), Point2::new(-1.0, 0.0));
    assert!((e[0] - 2.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12 && (e[2] - 5.0).abs() < 1e-12);
}

#[test]
fn degree_of_a_minimum_box() {
    let p = Point2::new(0.3, 0.0);
    let prob = disk_problem(p, 1e-3, 2.0, 1.0);
    let cfg = SearchConfig::default();
    let pts =
        enumerate_critical_points(&prob, &SearchConfig { grid: 8, grid_keep: 16, seed_density: 12, ..cfg.clone() }).unwrap();
    assert!(!pts.is_empty());
    for cp in &pts {
        assert!(cp.nondegenerate);
        assert_eq!(cp.local_index, if cp.morse_index % 2 == 0 { 1 } else { -1 });
        let h = 0.2 * cp.x.dist(p).min(cp.y.dist(p));
        let d = Point2::new(h, h);
        let region = DegreeRegion::Box { x_lo: cp.x - d, x_hi: cp.x + d, y_lo: cp.y - d, y_hi: cp.y + d };
        let r = local_degree_box(&prob, &region, 3, None, &cfg).unwrap();
        assert!(r.verified);
        assert_eq!(r.degree, cp.local_index as i32);
    }
}

#[test]
fn degree_region_membership() {
    let region = DegreeRegion::Tube { center: Point2::ZERO, rx: (0.1, 0.3), ry: (0.1, 0.3), half_angle: 0.5 };
    assert!(region.contains(Point2::new(0.2, 0.0), Point2::new(-0.2, 0.05)));
    assert!(!region.contains(Point2::new(0.2, 0.0), Point2::new(0.2, 0.05)));
    for u in region.boundary_samples(3) {
        let (x, y) = region.map(u);
        assert!(region.contains(x, y) || (x.norm() - 0.1).abs() < 1e-12 || (x.norm() - 0.3).abs() < 1e-12 || y.norm() > 0.0);
    }
}

#[test]
fn nontrivial_count() {
    let mut a = point(Point2::new(0.1, 0.0), Point2::new(-0.1, 0.0));
    let mut b = point(Point2::new(-0.1, 0.0), Point2::new(0.1, 0.0));
    a.paired_with = Some(1);
    b.paired_with = Some(0);
    let c = point(Point2::new(0.0, 0.1), Point2::new(0.0, -0.2));
    assert_eq!(nontrivially_different(&[a, b, c]), 2);
}

#[test]
fn critical_point_json_round_trip() {
    let cp = point(Point2::new(0.1, 0.2), Point2::new(-0.3, 0.4));
    let s = serde_json::to_string(&cp).unwrap();
    assert!(s.contains("\"type\":\"unclassified\""));
    let back: CriticalPoint = serde_json::from_str(&s).unwrap();
    assert_eq!(back, cp);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn classification_is_swap_symmetric_at_unit_ratio(a in 1e-4f64..0.9, b in 1e-4f64..0.9) {
        let bands = ClassBands::default();
        let p = Point2::ZERO;
        let u = point(Point2::new(a, 0.0), Point2::new(0.0, b));
        let v = point(Point2::new(0.0, b), Point2::new(a, 0.0));
        prop_assert_eq!(classify_type(&u, p, 1e-4, 0.25, 1.0, 1.0, &bands), classify_type(&v, p, 1e-4, 0.25, 1.0, 1.0, &bands));
    }
}
