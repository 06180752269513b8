use dqcalc::dgla::check_dgla_axioms;
use dqcalc::linfty::TowerKind;
use dqcalc::polyops::*;
use dqcalc::rational::{one, q, qf, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mono(e: &[u32]) -> Monomial {
    e.to_vec()
}

fn pv(dim: usize, terms: &[(i64, &[u32], &[usize])]) -> PolyVectorField {
    let arity = terms[0].2.len();
    let mut p = PolyVectorField::zero(dim, arity);
    for (c, m, idx) in terms {
        p.add_term(mono(m), idx, q(*c));
    }
    p
}

fn poly(terms: &[(i64, &[u32])]) -> Poly {
    let mut p = Poly::new();
    for (c, m) in terms {
        poly_add_term(&mut p, mono(m), q(*c));
    }
    p
}

fn random_op<R: Rng>(rng: &mut R, dim: usize, arity: usize, coeff: u32, order: u32) -> PolyDiffOp {
    let mut op = PolyDiffOp::zero(dim, arity);
    for k in 0..=order {
        for t in multi_index_tuples(dim, arity, k) {
            if rng.gen_bool(0.3) {
                let m = monomials_of_degree(dim, rng.gen_range(0..=coeff)).swap_remove(0);
                op.add_term(m, t, q(rng.gen_range(-2..=2)));
            }
        }
    }
    op
}

fn random_pv<R: Rng>(rng: &mut R, dim: usize, arity: usize, coeff: u32) -> PolyVectorField {
    let mut p = PolyVectorField::zero(dim, arity);
    for idx in subsets(dim, arity) {
        for deg in 0..=coeff {
            for m in monomials_of_degree(dim, deg) {
                if rng.gen_bool(0.4) {
                    p.add_term(m, &idx, q(rng.gen_range(-2..=2)));
                }
            }
        }
    }
    p
}

fn all_monomials(dim: usize, max_deg: u32) -> Vec<Poly> {
    (0..=max_deg).flat_map(|d| monomials_of_degree(dim, d)).map(monomial_poly).collect()
}

fn arg_tuples(dim: usize, n: usize, max_deg: u32) -> Vec<Vec<Poly>> {
    let ms = all_monomials(dim, max_deg);
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t: Vec<Poly>| ms.iter().map(move |m| {
            let mut t = t.clone();
            t.push(m.clone());
            t
        })).collect();
    }
    out
}

/// Oracle: the standard Hochschild differential evaluated directly on polynomials.
fn hochschild_eval(phi: &PolyDiffOp, args: &[Poly]) -> Poly {
    let n = phi.arity;
    let mut out = poly_mul(&args[0], &phi.eval(&args[1..]));
    for i in 1..=n {
        let mut merged: Vec<Poly> = args[..i - 1].to_vec();
        merged.push(poly_mul(&args[i - 1], &args[i]));
        merged.extend(args[i + 1..].iter().cloned());
        let s = if i % 2 == 0 { one() } else { -one() };
        poly_add_scaled(&mut out, &s, &phi.eval(&merged));
    }
    let s = if (n + 1).is_multiple_of(2) { one() } else { -one() };
    poly_add_scaled(&mut out, &s, &poly_mul(&phi.eval(&args[..n]), &args[n]));
    out
}

/// Oracle: `a∘b` evaluated by literally inserting `b` into each slot of `a`.
fn circle_eval(a: &PolyDiffOp, b: &PolyDiffOp, args: &[Poly]) -> Poly {
    let (m, n) = (a.arity, b.arity);
    let mut out = Poly::new();
    for i in 0..m {
        let inner = b.eval(&args[i..i + n]);
        let mut outer: Vec<Poly> = args[..i].to_vec();
        outer.push(inner);
        outer.extend(args[i + n..].iter().cloned());
        let s = if (i as i64 * (n as i64 - 1)).rem_euclid(2) == 0 { one() } else { -one() };
        poly_add_scaled(&mut out, &s, &a.eval(&outer));
    }
    out
}

#[test]
fn monomial_derivatives_and_splits() {
    assert_eq!(mono_derivative(&[3, 1], &[2, 0]), Some((q(6), vec![1, 1])));
    assert_eq!(mono_derivative(&[1], &[2]), None);
    // (2,1) into two parts: weights sum to 2^3 = 8
    let total: Q = multinomial_splits(&[2, 1], 2).iter().map(|(w, _)| w.clone()).sum();
    assert_eq!(total, q(8));
    assert_eq!(monomials_of_degree(2, 3).len(), 4);
    assert_eq!(multi_index_tuples(2, 2, 1).len(), 4);
}

#[test]
fn schouten_examples() {
    let f = pv(2, &[(1, &[2, 1], &[])]);
    let dx = pv(2, &[(1, &[0, 0], &[0])]);
    assert_eq!(schouten_bracket(&dx, &f), pv(2, &[(2, &[1, 1], &[])]));
    let c = pv(2, &[(1, &[0, 0], &[0, 1])]);
    assert!(schouten_bracket(&c, &c).is_zero());
    let p = pv(2, &[(1, &[1, 0], &[0, 1])]);
    assert!(schouten_bracket(&p, &p).is_zero());
    // vector fields: x∂y and y∂x bracket to x∂x − y∂y
    let a = pv(2, &[(1, &[1, 0], &[1])]);
    let b = pv(2, &[(1, &[0, 1], &[0])]);
    assert_eq!(schouten_bracket(&a, &b), pv(2, &[(1, &[1, 0], &[0]), (-1, &[0, 1], &[1])]));
}

#[test]
fn schouten_on_vector_fields_is_the_commutator_of_derivations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let x = random_pv(&mut rng, 2, 1, 2);
        let y = random_pv(&mut rng, 2, 1, 2);
        let br = schouten_bracket(&x, &y);
        for f in all_monomials(2, 3) {
            let mut expected = x.eval(&[y.eval(std::slice::from_ref(&f))]);
            poly_add_scaled(&mut expected, &-one(), &y.eval(&[x.eval(std::slice::from_ref(&f))]));
            assert_eq!(br.eval(&[f]), expected);
        }
    }
}

#[test]
fn schouten_of_bivector_with_itself_matches_jacobiator() {
    // {f,g} = π(f,g); Jacobiator J = {f,{g,h}} + {g,{h,f}} + {h,{f,g}} = −½[π,π](f,g,h)
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut nonzero = 0;
    for _ in 0..6 {
        let pi = random_pv(&mut rng, 3, 2, 1);
        let br = schouten_bracket(&pi, &pi);
        for args in arg_tuples(3, 3, 1) {
            let (f, g, h) = (&args[0], &args[1], &args[2]);
            let pb = |a: &Poly, b: &Poly| pi.eval(&[a.clone(), b.clone()]);
            let mut jac = pb(f, &pb(g, h));
            poly_add_scaled(&mut jac, &one(), &pb(g, &pb(h, f)));
            poly_add_scaled(&mut jac, &one(), &pb(h, &pb(f, g)));
            let mut half = Poly::new();
            poly_add_scaled(&mut half, &qf(-1, 2), &br.eval(&args));
            assert_eq!(half, jac);
            if !jac.is_empty() {
                nonzero += 1;
            }
        }
    }
    assert!(nonzero > 0);
}

#[test]
fn alternation_of_gerstenhaber_bracket_of_hkr_images_is_schouten() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (p, r) in [(1, 1), (1, 2), (2, 2), (0, 2), (2, 1), (1, 3)] {
        for _ in 0..3 {
            let a = random_pv(&mut rng, 3, p, 2);
            let b = random_pv(&mut rng, 3, r, 2);
            let g = gerstenhaber_bracket(&hkr(&a), &hkr(&b));
            assert_eq!(alt(&g), schouten_bracket(&a, &b), "arities {p},{r}");
        }
    }
}

#[test]
fn hochschild_differential_matches_evaluation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 0..=2 {
        let phi = random_op(&mut rng, 2, n, 2, 2);
        let d = hochschild_standard(&phi);
        for args in arg_tuples(2, n + 1, 2) {
            assert_eq!(d.eval(&args), hochschild_eval(&phi, &args));
        }
    }
}

#[test]
fn circle_matches_insertion_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (m, n) in [(1, 1), (2, 1), (1, 2), (2, 2), (2, 0), (3, 1)] {
        let a = random_op(&mut rng, 1, m, 2, 3);
        let b = random_op(&mut rng, 1, n, 2, 2);
        let c = circle(&a, &b);
        for args in arg_tuples(1, m + n - 1, 3) {
            assert_eq!(c.eval(&args), circle_eval(&a, &b, &args), "arities {m},{n}");
        }
    }
}

#[test]
fn differential_is_bracket_with_multiplication() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mu = PolyDiffOp::mu(2);
    for n in 0..=3 {
        let phi = random_op(&mut rng, 2, n, 2, 2);
        assert_eq!(gerstenhaber_bracket(&mu, &phi), hochschild_differential(&phi), "arity {n}");
        assert!(hochschild_differential(&hochschild_differential(&phi)).is_zero());
    }
}

#[test]
fn hochschild_examples() {
    let d2 = PolyDiffOp::term(1, vec![0], vec![vec![2]], one());
    assert_eq!(hochschild_differential(&d2), PolyDiffOp::term(1, vec![0], vec![vec![1], vec![1]], q(-2)));
    let f = PolyDiffOp::term(2, vec![1, 2], vec![], one());
    assert!(hochschild_differential(&f).is_zero());
    let der = PolyDiffOp::term(2, vec![1, 1], vec![vec![1, 0]], one());
    assert!(hochschild_differential(&der).is_zero());
    assert!(gerstenhaber_bracket(&PolyDiffOp::mu(2), &der).is_zero());
    assert!(gerstenhaber_bracket(&f, &PolyDiffOp::term(2, vec![0, 1], vec![], one())).is_zero());
}

#[test]
fn gerstenhaber_bracket_of_derivations_is_their_commutator() {
    let a = PolyDiffOp::term(2, vec![1, 0], vec![vec![0, 1]], one()); // x∂y
    let b = PolyDiffOp::term(2, vec![0, 1], vec![vec![1, 0]], one()); // y∂x
    let mut expected = PolyDiffOp::term(2, vec![1, 0], vec![vec![1, 0]], one());
    expected.add_term(vec![0, 1], vec![vec![0, 1]], q(-1));
    assert_eq!(gerstenhaber_bracket(&a, &b), expected);
}

#[test]
fn internal_degree_is_preserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..5 {
        let mut phi = PolyDiffOp::zero(2, 2);
        phi.add_term(vec![2, 1], vec![vec![1, 0], vec![0, 1]], one());
        phi.add_term(vec![1, 0], vec![vec![0, 0], vec![0, 0]], q(rng.gen_range(1..4)));
        let w = PolyDiffOp::internal_degree(&[2, 1], &[vec![1, 0], vec![0, 1]]);
        let _ = w;
        let homog = PolyDiffOp::term(2, vec![2, 1], vec![vec![1, 0], vec![0, 1]], one());
        for (k, _) in hochschild_differential(&homog).terms {
            assert_eq!(PolyDiffOp::internal_degree(&k.0, &k.1), 1);
        }
    }
}

#[test]
fn hkr_examples_and_section_property() {
    let d1 = pv(2, &[(1, &[0, 0], &[0])]);
    assert_eq!(hkr(&d1), PolyDiffOp::term(2, vec![0, 0], vec![vec![1, 0]], one()));
    let d12 = pv(2, &[(1, &[0, 0], &[0, 1])]);
    let mut expected = PolyDiffOp::term(2, vec![0, 0], vec![vec![1, 0], vec![0, 1]], qf(1, 2));
    expected.add_term(vec![0, 0], vec![vec![0, 1], vec![1, 0]], qf(-1, 2));
    assert_eq!(hkr(&d12), expected);
    let f = pv(2, &[(3, &[1, 1], &[])]);
    assert_eq!(hkr(&f), PolyDiffOp::term(2, vec![1, 1], vec![], q(3)));
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 0..=3 {
        let p = random_pv(&mut rng, 3, n, 2);
        assert_eq!(alt(&hkr(&p)), p);
        assert!(hochschild_differential(&hkr(&p)).is_zero());
    }
}

#[test]
fn hkr_report_examples() {
    let r = hkr_quasi_iso_report(1, &InternalDegreeWindow::for_arities(0, 0, 1), 1..=1).unwrap();
    assert_eq!((r.rows[0].cohomology_dim, r.rows[0].tpoly_dim), (1, 1));
    assert!(r.passed);
    let r = hkr_quasi_iso_report(2, &InternalDegreeWindow::for_arities(-2, -2, 2), 2..=2).unwrap();
    assert_eq!(r.rows[0].cohomology_dim, 1);
    assert!(r.passed);
    let r = hkr_quasi_iso_report(1, &InternalDegreeWindow::for_arities(-2, 2, 2), 2..=2).unwrap();
    assert!(r.rows.iter().all(|row| row.cohomology_dim == 0));
    assert!(r.passed);
}

#[test]
fn windows_are_dg_lie_algebras() {
    let aff = tpoly_affine(2).unwrap();
    assert_eq!(aff.algebra.dim(), 12);
    assert!(check_dgla_axioms(&aff.algebra).passed());
    let gr = tpoly_graded(1, 2).unwrap();
    assert_eq!(gr.algebra.dim(), 6);
    assert!(check_dgla_axioms(&gr.algebra).passed());
    let dp = dpoly_constant(1, 3, 2).unwrap();
    assert_eq!(dp.algebra.dim(), 19);
    assert!(check_dgla_axioms(&dp.algebra).passed());
    assert!(check_dgla_axioms(&dpoly_constant(2, 2, 2).unwrap().algebra).passed());
}

fn hkr_windows() -> (TpolyWindow, DpolyWindow) {
    let src = TpolyWindow::new(2, 2, 2, |_, _| true);
    let tgt = DpolyWindow::new(2, 2, 0..=2, 2, |_, a| a.iter().all(|x| mono_degree(x) == 1));
    (src, tgt)
}

#[test]
fn hkr_tower_has_the_properties() {
    let (src, tgt) = hkr_windows();
    let u = hkr_tower(&src, &tgt, 2).unwrap();
    let r = check_properties(&u, &src, &tgt, 2).unwrap();
    assert!(r.passed(), "{:?}", r);
}

#[test]
fn quadratic_part_on_vector_fields_violates_p4() {
    let (src, tgt) = hkr_windows();
    let mut u = hkr_tower(&src, &tgt, 2).unwrap();
    let dx = src.index_of(&(vec![0, 0], vec![0])).unwrap();
    let dy = src.index_of(&(vec![0, 0], vec![1])).unwrap();
    let target = tgt.index_of(&(vec![0, 0], vec![])).unwrap();
    u.set(&[dx, dy], dqcalc::sparse::unit(target)).unwrap();
    let r = check_properties(&u, &src, &tgt, 2).unwrap();
    assert!(!r.p4.is_empty());
    assert!(r.p5.is_empty());
    assert_eq!(u.kind, TowerKind::Morphism);
}

#[test]
fn star_product_examples() {
    let pi = pv(2, &[(1, &[0, 0], &[0, 1])]);
    let x = poly(&[(1, &[1, 0])]);
    let y = poly(&[(1, &[0, 1])]);
    let s = first_order_star(&pi, &x, &y, 2).unwrap();
    assert_eq!(s, vec![poly(&[(1, &[1, 1])]), poly(&[(1, &[0, 0])]).into_keys().map(|m| (m, qf(1, 2))).collect()]);
    let a = poly(&[(2, &[2, 1]), (-1, &[0, 3])]);
    let one_p = poly(&[(1, &[0, 0])]);
    assert_eq!(first_order_star(&pi, &a, &one_p, 2).unwrap(), vec![a.clone(), Poly::new()]);
    assert!(first_order_star(&pi, &a, &one_p, 3).is_err());
    assert!(first_order_star(&pv(2, &[(1, &[0, 0], &[0])]), &a, &one_p, 2).is_err());
}

#[test]
fn poisson_bivectors_give_associative_first_order_products() {
    for pi in [pv(2, &[(1, &[0, 0], &[0, 1])]), pv(2, &[(1, &[1, 0], &[0, 1])])] {
        for [a, b, c] in monomial_triples(2, 3) {
            let r = star_associator(&pi, &monomial_poly(a), &monomial_poly(b), &monomial_poly(c), 2).unwrap();
            assert!(r.iter().all(|p| p.is_empty()));
        }
    }
}

#[test]
fn second_order_obstruction_is_half_the_schouten_square() {
    // π = x∂y∧∂z + y∂x∧∂y on Q[x,y,z] is not Poisson: J(x,y,z) = −x
    let pi = pv(3, &[(1, &[1, 0, 0], &[1, 2]), (1, &[0, 1, 0], &[0, 1])]);
    let sq = schouten_bracket(&pi, &pi);
    assert!(!sq.is_zero());
    assert_eq!(second_order_obstruction(&pi).unwrap(), sq.scaled(&qf(1, 2)));
    let op = associator_operator(&pi).unwrap();
    for [a, b, c] in monomial_triples(3, 2) {
        let args = [monomial_poly(a), monomial_poly(b), monomial_poly(c)];
        let r = star_associator(&pi, &args[0], &args[1], &args[2], 3).unwrap();
        assert!(r[1].is_empty());
        assert_eq!(r[2], op.eval(&args));
    }
}

#[test]
fn json_round_trip_for_polyvectors() {
    let p = pv(2, &[(3, &[1, 0], &[0, 1])]);
    let j = serde_json::to_string(&p.to_json()).unwrap();
    let back: Vec<PolyVectorTermJson> = serde_json::from_str(&j).unwrap();
    assert_eq!(PolyVectorField::from_json(2, 2, &back).unwrap(), p);
}

mod properties {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn shifted_sign(p: usize, q: usize) -> Q {
        if ((p + 1) * (q + 1)).is_multiple_of(2) { one() } else { -one() }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn schouten_is_graded_antisymmetric(p in 0usize..=3, r in 0usize..=3, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = (random_pv(&mut rng, 3, p, 1), random_pv(&mut rng, 3, r, 1));
            let mut sum = schouten_bracket(&a, &b);
            sum.add_scaled(&shifted_sign(p, r), &schouten_bracket(&b, &a));
            prop_assert!(sum.is_zero());
        }

        #[test]
        fn schouten_satisfies_graded_jacobi(p in 1usize..=2, r in 1usize..=2, s in 1usize..=2, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c) = (random_pv(&mut rng, 2, p, 1), random_pv(&mut rng, 2, r, 1), random_pv(&mut rng, 2, s, 1));
            let lhs = schouten_bracket(&a, &schouten_bracket(&b, &c));
            let mut rhs = schouten_bracket(&schouten_bracket(&a, &b), &c);
            rhs.add_scaled(&shifted_sign(p, r), &schouten_bracket(&b, &schouten_bracket(&a, &c)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn hochschild_differential_squares_to_zero(arity in 0usize..=2, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let op = random_op(&mut rng, 2, arity, 1, 2);
            prop_assert!(hochschild_differential(&hochschild_differential(&op)).is_zero());
        }

        #[test]
        fn alternated_gerstenhaber_of_hkr_is_schouten(p in 1usize..=2, r in 1usize..=2, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = (random_pv(&mut rng, 2, p, 1), random_pv(&mut rng, 2, r, 1));
            prop_assert_eq!(alt(&gerstenhaber_bracket(&hkr(&a), &hkr(&b))), schouten_bracket(&a, &b));
        }

        #[test]
        fn obstruction_is_half_the_schouten_square(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pi = random_pv(&mut rng, 3, 2, 1);
            prop_assert_eq!(second_order_obstruction(&pi).unwrap(), schouten_bracket(&pi, &pi).scaled(&qf(1, 2)));
        }

        #[test]
        fn star_product_starts_with_the_product_and_half_the_bracket(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pi = random_pv(&mut rng, 2, 2, 1);
            let (a, b) = (all_monomials(2, 2), all_monomials(2, 2));
            let (f, g) = (&a[rng.gen_range(0..a.len())], &b[rng.gen_range(0..b.len())]);
            let s = first_order_star(&pi, f, g, 2).unwrap();
            prop_assert_eq!(&s[0], &poly_mul(f, g));
            let mut half = Poly::new();
            poly_add_scaled(&mut half, &qf(1, 2), &pi.eval(&[f.clone(), g.clone()]));
            prop_assert_eq!(&s[1], &half);
        }
    }
}
