use std::time::Instant;

use dqcalc::coordbundle::*;
use dqcalc::rational::{q, Q};
use dqcalc::Error;
use proptest::prelude::*;

fn ring(m: usize, l: i32) -> CoordRing1 {
    CoordRing1::new(m, l).unwrap()
}

fn sum(parts: &[(i64, CoordForm)]) -> CoordForm {
    let mut out = CoordForm::new();
    for (c, f) in parts {
        form_add(&mut out, &q(*c), f);
    }
    out
}

#[test]
fn tilde_of_constants_and_x() {
    let r = ring(4, 2);
    let c = tilde_expand(&r, &[q(7)], 3).unwrap();
    assert_eq!(c.coeffs[0], r.constant(q(7)));
    assert!(c.coeffs[1..].iter().all(|f| f.is_empty()));
    let x = tilde_expand(&r, &[q(0), q(1)], 3).unwrap();
    for i in 0..=3 {
        assert_eq!(x.coeffs[i], r.var(i as i64).unwrap());
    }
}

#[test]
fn tilde_of_x_squared_matches_squared_series() {
    let r = ring(4, 2);
    let v = |i| r.var(i).unwrap();
    let m = |a: &CoordForm, b: &CoordForm| r.mul(a, b).unwrap();
    let s = tilde_expand(&r, &[q(0), q(0), q(1)], 2).unwrap();
    assert_eq!(s.coeffs[0], m(&v(0), &v(0)));
    assert_eq!(s.coeffs[1], sum(&[(2, m(&v(0), &v(1)))]));
    assert_eq!(s.coeffs[2], sum(&[(1, m(&v(1), &v(1))), (2, m(&v(0), &v(2)))]));
}

#[test]
fn tilde_beyond_generator_cap_overflows() {
    let r = ring(3, 2);
    assert!(matches!(tilde_expand(&r, &[q(0), q(1)], 4), Err(Error::Overflow { .. })));
}

#[test]
fn witt_action_on_generators() {
    let r = ring(8, 2);
    for j in 0..7 {
        assert_eq!(r.witt_act(&[(0, q(1))], &r.var(j).unwrap()).unwrap(), sum(&[(-(j + 1), r.var(j + 1).unwrap())]));
    }
    for i in 2..6usize {
        for j in 0..i - 1 {
            assert!(r.witt_on_generator(i, j).unwrap().is_empty(), "δ{i}(x{j})");
        }
    }
}

#[test]
fn bracket_delta0_delta2_is_twice_delta1() {
    let r = ring(10, 3);
    for j in 0..=8 {
        let x = r.var(j).unwrap();
        let mut lhs = r.witt_act(&[(0, q(1))], &r.witt_act(&[(2, q(1))], &x).unwrap()).unwrap();
        form_add(&mut lhs, &q(-1), &r.witt_act(&[(2, q(1))], &r.witt_act(&[(0, q(1))], &x).unwrap()).unwrap());
        assert_eq!(lhs, r.witt_act(&[(1, q(2))], &x).unwrap(), "x{j}");
    }
}

#[test]
fn witt_relations_through_index_six_up_to_x12() {
    let report = witt_relations(&ring(14, 4), 6, 12).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    assert_eq!(report.checked, 7 * 7 * 14);
}

#[test]
fn invariance_of_generating_series() {
    let r = ring(8, 3);
    assert!(check_invariance(&r, &[q(5)], &[(0, q(1))], 6).unwrap().passed());
    for i in 0..=5 {
        let rep = check_invariance(&r, &[q(0), q(1)], &[(i, q(1))], 6).unwrap();
        assert!(rep.passed(), "δ{i}: {:?}", rep.defect);
    }
    assert!(check_invariance(&r, &[q(0), q(0), q(1)], &[(1, q(1))], 6).unwrap().passed());
    let mixed = [(0, q(2)), (1, q(-1)), (3, Q::new(1.into(), 3.into()))];
    assert!(check_invariance(&r, &[q(1), q(-2), q(0), q(1)], &mixed, 5).unwrap().passed());
}

#[test]
fn coefficient_action_alone_is_not_invariant() {
    // The t-action is what cancels the coefficient action; drop it and the defect appears.
    let r = ring(6, 2);
    let x = tilde_expand(&r, &[q(0), q(1)], 4).unwrap();
    let only = x.map(|c| r.witt_act(&[(0, q(1))], c)).unwrap();
    assert!(!only.is_zero());
}

#[test]
fn mc_form_leading_coefficient() {
    let r = ring(3, 3);
    let w = mc_form(&r, 2).unwrap();
    let expected = r.mul(&r.x1_pow(-1).unwrap(), &sum(&[(-1, r.dvar(0).unwrap())])).unwrap();
    assert_eq!(w.g[0], expected);
}

#[test]
fn mc_form_satisfies_all_identities_to_order_eight() {
    let start = Instant::now();
    let r = ring(9, 9);
    let w = mc_form(&r, 8).unwrap();
    let report = w.verify().unwrap();
    assert!(report.defining_equation, "{:?}", report.failures);
    assert!(report.mc_equation, "{:?}", report.failures);
    assert!(report.contraction_identity, "{:?}", report.failures);
    assert!(report.passed());
    eprintln!("mc_form order 8 verified in {:?}", start.elapsed());
}

#[test]
fn contraction_with_delta0_is_delta0() {
    let r = ring(5, 5);
    let w = mc_form(&r, 4).unwrap();
    let c = w.contractions().unwrap();
    assert_eq!(c[&(0, 0)], r.constant(q(1)));
    for j in 1..=4 {
        assert!(c[&(0, j)].is_empty());
    }
}

#[test]
fn perturbed_mc_form_fails_its_checks() {
    let r = ring(5, 5);
    let mut w = mc_form(&r, 4).unwrap();
    form_add(&mut w.g[2], &q(1), &r.dvar(0).unwrap());
    let report = w.verify().unwrap();
    assert!(!report.defining_equation);
    assert!(!report.contraction_identity);
}

#[test]
fn mc_form_caps_overflow() {
    assert!(matches!(mc_form(&ring(4, 9), 4), Err(Error::Overflow { .. })));
    assert!(matches!(mc_form(&ring(9, 2), 8), Err(Error::Overflow { .. })));
}

#[test]
fn gl1_invariants_and_weights() {
    let r = ring(6, 6);
    let (ys, report) = gl1_invariants(&r).unwrap();
    assert_eq!(ys[0], r.var(0).unwrap());
    assert_eq!(ys.len(), 6);
    assert!(report.passed(), "{report:?}");
    for (j, w) in &report.weights {
        assert_eq!(*w, Some(-(*j as i64)));
    }
    // δ_1(x_1^{−2} x_2) = 2 x_1^{−2} x_2 − 2 x_1^{−2} x_2 by Leibniz.
    let y2 = r.mul(&r.x1_pow(-2).unwrap(), &r.var(2).unwrap()).unwrap();
    assert!(r.witt_act(&[(1, q(1))], &y2).unwrap().is_empty());
    // x_2 alone is not invariant.
    assert!(!r.witt_act(&[(1, q(1))], &r.var(2).unwrap()).unwrap().is_empty());
}

#[test]
fn homotopy_identity_on_every_basis_element() {
    let h = acyclicity_homotopy(4, 4, 1).unwrap();
    let report = h.verify().unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    assert_eq!(report.cohomology[0], 2);
    assert!(report.cohomology[1..].iter().all(|&c| c == 0));
    assert!(report.passed);
}

#[test]
fn homotopy_examples() {
    let h = acyclicity_homotopy(4, 3, 0).unwrap();
    let a = &h.algebra;
    // variables: 0 = y0 − x, 1 = y2, 2 = y3, 3 = y4; inert 4 = x.
    assert_eq!(h.apply_h(&a.dvar(1)).unwrap(), a.var(1));
    assert!(h.apply_h(&a.var(0)).unwrap().is_empty());
    assert!(h.apply_h(&a.var(1)).unwrap().is_empty());
    let y2 = h.keys.iter().position(|k| *k == a.var(1).keys().next().unwrap().clone()).unwrap();
    assert!(h.phi0.column(y2).is_empty());
    assert_eq!(h.phi1.column(y2).len(), 1);
}

#[test]
fn graded_pieces_are_exact() {
    for k in 1..=3 {
        for piece in graded_poincare_pieces(k, 4).unwrap() {
            assert!(piece.exact, "k = {k}: {piece:?}");
        }
    }
}

fn poly() -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(-3i64..=3, 1..=4).prop_map(|v| v.into_iter().map(q).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tilde_is_multiplicative(f in poly(), g in poly()) {
        let r = ring(5, 6);
        let mut fg = vec![q(0); f.len() + g.len() - 1];
        for (i, a) in f.iter().enumerate() {
            for (j, b) in g.iter().enumerate() {
                fg[i + j] += a * b;
            }
        }
        let lhs = tilde_expand(&r, &fg, 4).unwrap();
        let rhs = tilde_expand(&r, &f, 4).unwrap().mul(&r, &tilde_expand(&r, &g, 4).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn generating_series_are_invariant(f in poly(), a in prop::collection::vec(-2i64..=2, 1..=4)) {
        let r = ring(7, 4);
        let v: Vec<(usize, Q)> = a.into_iter().enumerate().map(|(i, c)| (i, q(c))).collect();
        prop_assert!(check_invariance(&r, &f, &v, 5).unwrap().passed());
    }

    #[test]
    fn witt_action_is_a_derivation(i in 0usize..4, j in 0usize..5, k in 0usize..5) {
        let r = ring(8, 3);
        let a = r.var(j as i64).unwrap();
        let b = r.mul(&r.var(k as i64).unwrap(), &r.x1_pow(-1).unwrap()).unwrap();
        let v = [(i, q(1))];
        let lhs = r.witt_act(&v, &r.mul(&a, &b).unwrap()).unwrap();
        let mut rhs = r.mul(&r.witt_act(&v, &a).unwrap(), &b).unwrap();
        form_add(&mut rhs, &q(1), &r.mul(&a, &r.witt_act(&v, &b).unwrap()).unwrap());
        prop_assert_eq!(lhs, rhs);
    }
}
