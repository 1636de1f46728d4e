use super::*;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn unit_disk() -> GreenModel {
    GreenModel::closed_form_disk(Point2::ZERO, 1.0).unwrap()
}

#[test]
fn constants_solve_k() {
    for tau in [0.5, 1.0, 2.0, 3.7] {
        for r_p in [-0.3, 0.0, 0.12] {
            let k = constants(tau, r_p).unwrap();
            assert!(k_of_r(k.c_tau, tau, r_p).abs() < 1e-12);
            assert_relative_eq!(k.beta, tau / ((1.0 + tau) * (1.0 + tau)), epsilon = 1e-15);
        }
    }
    let k = constants(1.0, 0.0).unwrap();
    assert_relative_eq!(k.beta, 0.25);
    assert_relative_eq!(k.c_tau, 1.0);
    assert_eq!(k.d_tau, 0.0);
    assert!(constants(0.0, 0.0).is_err());
}

#[test]
fn h_has_pole_at_s() {
    assert!(matches!(type2_disk_h(0.5, 0.5, 1.0, 1.0), Err(Error::Pole)));
    let v = type2_disk_h(0.5, 0.25, 1.0, 2.0).unwrap();
    let expected = 2.0 * 0.25 / (1.0 - 0.0625) + 1.0 / (0.25 - 0.5) + 0.5 / (1.0 - 0.125);
    assert_relative_eq!(v, expected, epsilon = 1e-14);
}

#[test]
fn fold_locations() {
    assert!((s_bar(1.0, 1.0).unwrap() - 0.9185587).abs() < 2e-7);
    assert!((s_bar(2.0, 1.0).unwrap() - 0.9581166).abs() < 2e-7);
    assert!((s_bar(1.0, 2.0).unwrap() - 0.8474866).abs() < 2e-7);
    let th = type2_disk_thresholds(2.0, 1.0).unwrap();
    assert_relative_eq!(th.d1, 1.0 - th.s_bar);
    assert_relative_eq!(th.d2, 1.0 - th.s_bar_swapped);
}

#[test]
fn zeros_and_slopes() {
    let sol = type2_disk_solve(0.99, 1.0, 1.0).unwrap();
    assert_eq!(sol.zeros.len(), 2);
    for z in &sol.zeros {
        assert!(h_raw(0.99, z.t, 1.0, 1.0).abs() < 1e-8);
    }
    // h < 0 near t = 0 and as t → s⁻, so the smaller zero rises and the larger falls.
    assert_eq!(sol.zeros[0].slope_sign, 1);
    assert_eq!(sol.zeros[1].slope_sign, -1);
    assert!(sol.zeros[0].t < 0.05 && sol.zeros[1].t > 0.95);
    assert!(type2_disk_solve(0.5, 1.0, 1.0).unwrap().zeros.is_empty());
    assert!(type2_disk_solve(1.0, 1.0, 1.0).is_err());
}

#[test]
fn near_fold_pair_is_resolved() {
    let sb = s_bar(1.0, 1.0).unwrap();
    let sol = type2_disk_solve(sb + 2e-8, 1.0, 1.0).unwrap();
    assert_eq!(sol.zeros.len(), 2);
    assert!(sol.fold.is_some());
}

#[test]
fn heps_and_r_eps_roots() {
    let eps: f64 = 1e-6;
    let r = type2_heps_root(0.3, 1.0, eps).unwrap();
    assert!((r.ln() / r - PI * 0.3 * eps.ln()).abs() < 1e-8);
    assert!(r > 1.0 / eps.ln().abs() && r < 1.0 / eps.ln().abs().sqrt());
    let r = type2_r_eps(2.0, 1.5, eps).unwrap();
    assert_relative_eq!(r.ln() / (r * r * eps.ln()), 2.0 * PI / 2.25, max_relative = 1e-10);
    let r_small = type2_r_eps(2.0, 1.5, 1e-30).unwrap();
    assert!(r_small < r);
}

#[test]
fn mtilde_on_shifted_disk() {
    let q = 0.5;
    let m = GreenModel::closed_form_disk(Point2::new(q, 0.0), 1.0).unwrap();
    let robin = m.robin(Point2::ZERO).unwrap();
    let c = q * q / (2.0 * PI * (1.0 - q * q).powi(2));
    assert_relative_eq!(robin.grad_r.x1, -q / (PI * (1.0 - q * q)), epsilon = 1e-12);
    let e = sym_eigen2(&matrix_mtilde(&robin));
    assert_relative_eq!(e.values[0], -5.0 * c, epsilon = 1e-10);
    assert_relative_eq!(e.values[1], -c, epsilon = 1e-10);
    assert!((e.vectors[0].x1.abs() - 1.0).abs() < 1e-10);
}

#[test]
fn mbar_and_m1_at_unit_ratio() {
    let robin = unit_disk().robin(Point2::new(0.3, 0.1)).unwrap();
    let (mbar, m1) = matrix_mbar_m1(&robin, 1.0);
    let expect_m1 = add2(&scale2(&robin.hess_h_xx, 3.0), &scale2(&robin.hess_h_yx, 4.0));
    for i in 0..2 {
        for j in 0..2 {
            assert_relative_eq!(mbar[i][j], 3.0 * robin.hess_h_xx[i][j], epsilon = 1e-14);
            assert_relative_eq!(m1[i][j], expect_m1[i][j], epsilon = 1e-14);
        }
    }
}

#[test]
fn schur_complement() {
    let h = [[4.0, 1.0, 1.0, 0.0], [1.0, 3.0, 0.0, 2.0], [1.0, 0.0, 2.0, 0.0], [0.0, 2.0, 0.0, 4.0]];
    let m0 = matrix_m0(&h).unwrap();
    assert_relative_eq!(m0[0][0], 3.5, epsilon = 1e-14);
    assert_relative_eq!(m0[1][1], 2.0, epsilon = 1e-14);
    assert_relative_eq!(m0[0][1], 1.0, epsilon = 1e-14);
    let mut sing = h;
    sing[2][2] = 0.0;
    sing[3][3] = 0.0;
    sing[2][3] = 0.0;
    sing[3][2] = 0.0;
    assert!(matches!(matrix_m0(&sing), Err(Error::HypothesisViolated(_))));
}

#[test]
fn limit_system_at_scaled_solution() {
    for tau in [0.5, 1.0, 3.0] {
        let r_p = -0.05;
        let eps: f64 = 1e-8;
        let c = constants(tau, r_p).unwrap().c_tau;
        let w = Point2::new(c, 0.0);
        let z = Point2::new(-c / tau, 0.0);
        assert!(limit_system_check(w, z, tau, r_p, eps).unwrap() < 1e-12);
        let (_, g, h) = f_tilde(c, -c / tau, tau, r_p, eps).unwrap();
        assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
        let l = eps.ln() + 2.0 * PI * r_p;
        let ww = tau * tau / (c * c) * (1.0 / ((tau + 1.0) * (tau + 1.0)) - 1.0 / l);
        assert_relative_eq!(h[0][0], ww, max_relative = 1e-12);
        assert!(limit_system_check(w * 1.1, z, tau, r_p, eps).unwrap() > 1e-3);
    }
}

#[test]
fn f_tilde_derivatives_match_differences() {
    let (tau, r_p, eps) = (2.0, 0.1, 1e-5);
    let (w, z) = (0.7, -0.4);
    let (_, g, h) = f_tilde(w, z, tau, r_p, eps).unwrap();
    let f = |a: f64, b: f64| f_tilde(a, b, tau, r_p, eps).unwrap();
    let d = 1e-5;
    assert_relative_eq!(g[0], (f(w + d, z).0 - f(w - d, z).0) / (2.0 * d), max_relative = 1e-7);
    assert_relative_eq!(g[1], (f(w, z + d).0 - f(w, z - d).0) / (2.0 * d), max_relative = 1e-7);
    assert_relative_eq!(h[0][0], (f(w + d, z).1[0] - f(w - d, z).1[0]) / (2.0 * d), max_relative = 1e-7);
    assert_relative_eq!(h[0][1], (f(w, z + d).1[0] - f(w, z - d).1[0]) / (2.0 * d), max_relative = 1e-7);
    assert_relative_eq!(h[1][1], (f(w, z + d).1[1] - f(w, z - d).1[1]) / (2.0 * d), max_relative = 1e-7);
    assert!(f_tilde(-0.1, z, tau, r_p, eps).is_err());
}

#[test]
fn necessary_condition_matches_disk_zeros() {
    let m = unit_disk();
    let p = Point2::new(0.97, 0.0);
    let ys = necessary_condition_points(&m, p, 1.0, 1.0, false, 24).unwrap();
    let zeros = type2_disk_solve(0.97, 1.0, 1.0).unwrap().zeros;
    assert_eq!(ys.len(), zeros.len());
    for (y, z) in ys.iter().zip(&zeros) {
        assert!((y.x1 - z.t).abs() < 1e-8 && y.x2.abs() < 1e-8);
    }
}

#[test]
fn predictions_type_three() {
    let m = unit_disk();
    let p = Point2::new(0.3, 0.0);
    let inp = PredictInput { outer: &m, p, lambda1: 2.0, lambda2: 1.0, eps: 1e-6, y0: None };
    let s = predict(TheoremId::T1_15, &inp).unwrap();
    assert_eq!(s.count, 2);
    let c = constants(2.0, m.robin(p).unwrap().r).unwrap();
    assert_relative_eq!((s.points[0].x - p).norm(), c.c_tau * 1e-6f64.powf(c.beta), max_relative = 1e-12);
    assert!(matches!(predict(TheoremId::T1_16, &inp), Err(Error::HypothesisViolated(_))));
    assert!(matches!(predict(TheoremId::T1_17, &inp), Err(Error::HypothesisViolated(_))));

    let center = PredictInput { p: Point2::ZERO, ..inp };
    assert!(matches!(predict(TheoremId::T1_17, &center), Err(Error::HypothesisViolated(_))));
    let ann = predict(TheoremId::T1_19, &center).unwrap();
    assert_eq!(ann.count, 1);
    assert!(ann.points[0].x.x2 == 0.0 && ann.points[0].x.x1 > 0.0);
    assert_relative_eq!(ann.points[0].x.norm(), 2.0 * ann.points[0].y.norm(), max_relative = 1e-12);
    let equal = PredictInput { lambda1: 1.0, ..center };
    assert_eq!(predict(TheoremId::T1_19, &equal).unwrap().count, 1);
    let sixteen = PredictInput { lambda1: 1.0, ..inp };
    let s = predict(TheoremId::T1_16, &sixteen).unwrap();
    assert_eq!(s.count, 4);
    assert_eq!(s.nontrivially_different, 2);
}

#[test]
fn predictions_disk_type_two() {
    let m = unit_disk();
    let th = type2_disk_thresholds(1.0, 1.0).unwrap();
    let near =
        PredictInput { outer: &m, p: Point2::new(1.0 - 0.5 * th.d1, 0.0), lambda1: 1.0, lambda2: 1.0, eps: 1e-4, y0: None };
    let s = predict(TheoremId::T1_6, &near).unwrap();
    assert_eq!(s.count, 4);
    let far = PredictInput { p: Point2::new(1.0 - 2.0 * th.d1, 0.0), ..near };
    assert_eq!(predict(TheoremId::T1_6, &far).unwrap().count, 0);
}

#[test]
fn theorem_ids_parse() {
    assert_eq!("t1.15".parse::<TheoremId>().unwrap(), TheoremId::T1_15);
    assert_eq!("T1_9".parse::<TheoremId>().unwrap(), TheoremId::T1_9);
    assert!("T2_1".parse::<TheoremId>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zeros_come_in_pairs(s in 0.05f64..0.999, l1 in 0.3f64..3.0, l2 in 0.3f64..3.0) {
        let sol = type2_disk_solve(s, l1, l2).unwrap();
        prop_assert!(sol.zeros.is_empty() || sol.zeros.len() == 2);
        for z in &sol.zeros {
            let scale = l1 / (s - z.t).abs() + l2 / (1.0 - z.t * z.t);
            prop_assert!(h_raw(s, z.t, l1, l2).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn k_is_increasing(r in 1e-6f64..1.0, tau in 0.1f64..10.0, r_p in -1.0f64..1.0) {
        prop_assert!(k_of_r(r * 1.01, tau, r_p) > k_of_r(r, tau, r_p));
    }
}
