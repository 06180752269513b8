use dqcalc::catalog::{jacobi_broken, standard_dglas, two_dim};
use dqcalc::dgla::{extend_scalars, random_mc, series_to_ext, twist_dgla, DGLieAlgebra};
use dqcalc::linfty::*;
use dqcalc::rational::{inv_factorial, q, Q};
use dqcalc::sparse::{add_scaled, unit, SparseVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force oracle: project `Q(Q(w))` onto word length one.
fn square_projection(t: &TaylorTower, w: &[usize]) -> SparseVec {
    let once = coderivation_apply(t, w).unwrap();
    let mut twice = SymElem::new();
    for (u, x) in &once {
        let e = coderivation_apply(t, u).unwrap();
        for (v, y) in e {
            add_term(&mut twice, v, x * y);
        }
    }
    linear_part(&twice)
}

/// Oracle for the coalgebra map: literal sum over ordered partitions with 1/p!.
fn coalgebra_literal(psi: &TaylorTower, w: &[usize]) -> SymElem {
    let n = w.len();
    let degs: Vec<i64> = w.iter().map(|&i| psi.source.degree(i)).collect();
    let mut out = SymElem::new();
    // assign each position a block label 0..p-1 with all labels used
    for p in 1..=n {
        let total = p.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let labels: Vec<usize> = (0..n)
                .map(|_| {
                    let l = c % p;
                    c /= p;
                    l
                })
                .collect();
            if (0..p).any(|b| !labels.contains(&b)) {
                continue;
            }
            let blocks: Vec<Vec<usize>> = (0..p).map(|b| (0..n).filter(|&i| labels[i] == b).map(|i| i + 1).collect()).collect();
            let eps = koszul_sign(&degs, &blocks).unwrap();
            let mut prod = word_elem(&[]);
            for b in &blocks {
                let sub: Vec<usize> = b.iter().map(|&i| w[i - 1]).collect();
                prod = multiply(&psi.target, &prod, &vector_elem(&psi.eval(&sub)));
            }
            let coeff = inv_factorial(p) * q(eps as i64);
            for (u, x) in prod {
                add_term(&mut out, u, &coeff * x);
            }
        }
    }
    out
}

fn random_vec<R: Rng>(rng: &mut R, space: &ShiftedSpace, degree: i64) -> SparseVec {
    let mut v = SparseVec::new();
    for i in 0..space.dim() {
        if space.degree(i) == degree && rng.gen_bool(0.5) {
            let c = rng.gen_range(-3..=3);
            if c != 0 {
                v.insert(i, q(c));
            }
        }
    }
    v
}

fn random_tower<R: Rng>(rng: &mut R, kind: TowerKind, source: &ShiftedSpace, target: &ShiftedSpace, arity: usize) -> TaylorTower {
    let deg = if kind == TowerKind::Structure { 1 } else { 0 };
    let mut t = TaylorTower::new(kind, deg, arity, source.clone(), target.clone());
    for n in 1..=arity {
        for w in words_of_length(source, n, true) {
            let d: i64 = w.iter().map(|&i| source.degree(i)).sum::<i64>() + deg;
            t.set(&w, random_vec(rng, target, d)).unwrap();
        }
    }
    t
}

#[test]
fn dgla_towers_have_zero_defect_through_arity_four() {
    for (name, g) in standard_dglas() {
        let t = from_dgla(&g).unwrap();
        for n in 1..=4 {
            for w in words_of_length(&t.source, n, false) {
                assert!(linfty_defect(&t, n, &w).unwrap().is_empty(), "{name} at {w:?}");
            }
        }
    }
}

#[test]
fn jacobi_failure_shows_at_arity_three() {
    let g = jacobi_broken();
    assert!(from_dgla(&g).is_err());
    let t = from_dgla_unchecked(&g, 1);
    for n in 1..=2 {
        for w in words_of_length(&t.source, n, false) {
            assert!(linfty_defect(&t, n, &w).unwrap().is_empty());
        }
    }
    assert!(words_of_length(&t.source, 3, false).iter().any(|w| !linfty_defect(&t, 3, w).unwrap().is_empty()));
}

#[test]
fn defect_formula_matches_square_of_coderivation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = &standard_dglas()[2].1;
    let space = ShiftedSpace::shift_of(g.space());
    let t = random_tower(&mut rng, TowerKind::Structure, &space, &space, 3);
    for n in 1..=3 {
        for w in words_of_length(&space, n, false).into_iter().take(60) {
            assert_eq!(linfty_defect(&t, n, &w).unwrap(), square_projection(&t, &w));
        }
    }
}

#[test]
fn coalgebra_map_matches_ordered_partition_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = &standard_dglas()[1].1;
    let space = ShiftedSpace::shift_of(g.space());
    let psi = random_tower(&mut rng, TowerKind::Morphism, &space, &space, 3);
    for n in 1..=3 {
        for w in words_of_length(&space, n, false).into_iter().take(40) {
            assert_eq!(coalgebra_apply(&psi, &w).unwrap(), coalgebra_literal(&psi, &w));
        }
    }
}

#[test]
fn linear_only_morphism_is_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = &standard_dglas()[1].1;
    let space = ShiftedSpace::shift_of(g.space());
    let mut psi = random_tower(&mut rng, TowerKind::Morphism, &space, &space, 1);
    psi.exact = true;
    let w = words_of_length(&space, 2, false).last().cloned().unwrap();
    let expected = multiply(&space, &vector_elem(&psi.eval(&[w[0]])), &vector_elem(&psi.eval(&[w[1]])));
    assert_eq!(coalgebra_apply(&psi, &w).unwrap(), expected);
}

#[test]
fn two_term_defect_agrees_with_general_form_on_random_towers() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = &standard_dglas()[2].1;
    let space = ShiftedSpace::shift_of(g.space());
    for _ in 0..3 {
        let mut qg = random_tower(&mut rng, TowerKind::Structure, &space, &space, 2);
        let mut qh = random_tower(&mut rng, TowerKind::Structure, &space, &space, 2);
        qg.exact = true;
        qh.exact = true;
        let psi = random_tower(&mut rng, TowerKind::Morphism, &space, &space, 3);
        for n in 1..=3 {
            for w in words_of_length(&space, n, false).into_iter().take(30) {
                let a = morphism_defect_general(&psi, &qg, &qh, &w);
                let b = morphism_defect_dgla(&psi, &qg, &qh, &w);
                assert_eq!(a, b);
            }
        }
    }
}

#[test]
fn exponential_automorphisms_are_morphisms() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (name, g) in standard_dglas().into_iter().take(4) {
        let q = from_dgla(&g).unwrap();
        let eta = random_eta(&q.source, &mut rng);
        let psi = exp_automorphism(&q, &eta, 3).unwrap();
        for n in 1..=3 {
            for w in words_of_length(&q.source, n, false) {
                assert!(morphism_defect(&psi, &q, &q, n, &w).unwrap().is_empty(), "{name} {w:?}");
            }
        }
    }
}

#[test]
fn non_bracket_preserving_chain_map_fails_at_arity_two() {
    // g: a (deg 0), b (deg 1), [a,b] = b, d = 0. The identity rescaled on b commutes
    // with d = 0 but does not preserve the bracket once a is also rescaled.
    let g = two_dim();
    let q = from_dgla(&g).unwrap();
    let mut psi = TaylorTower::morphism(q.source.clone(), q.source.clone(), 2);
    psi.set(&[0], dqcalc::sparse::scaled(&q_(2), &unit(0))).unwrap();
    psi.set(&[1], unit(1)).unwrap();
    for w in words_of_length(&q.source, 1, false) {
        assert!(morphism_defect(&psi, &q, &q, 1, &w).unwrap().is_empty());
    }
    assert!(words_of_length(&q.source, 2, false).iter().any(|w| !morphism_defect(&psi, &q, &q, 2, w).unwrap().is_empty()));
}

fn q_(n: i64) -> Q {
    q(n)
}

#[test]
fn twisting_random_mc_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut done = 0;
    for (name, g) in standard_dglas() {
        let Some(mc) = random_mc(&g, 3, &mut rng) else { continue };
        let qg = from_dgla(&g).unwrap();
        let eta = random_eta(&qg.source, &mut rng);
        let psi = exp_automorphism(&qg, &eta, 4).unwrap();
        let (qe, pe) = (extend_tower(&qg, 3), extend_tower(&psi, 3));
        let omega = series_to_ext(&mc.series());
        let r = twist(&qe, &qe, &pe, &omega, 2).unwrap();
        let rep = verify_twist(&qe, &qe, &r, 2).unwrap();
        assert!(rep.passed(), "{name}: {:?}", rep.witnesses);
        // DG-Lie cross-check: ∂¹Q_ω = −d_ω.
        let tw = twist_dgla(&g, &mc).unwrap();
        for i in (0..qe.source.dim()).step_by(3) {
            let mut expected = tw.d(&unit(i));
            expected = dqcalc::sparse::scaled(&q(-1), &expected);
            assert_eq!(r.q_g.eval(&[i]), expected, "{name}");
        }
        done += 1;
    }
    assert!(done >= 3);
}

#[test]
fn twisting_by_zero_changes_nothing() {
    let g = &standard_dglas()[1].1;
    let q = extend_tower(&from_dgla(g).unwrap(), 2);
    let id = identity_morphism(&q.source, 3);
    let r = twist(&q, &q, &id, &SparseVec::new(), 3).unwrap();
    for n in 1..=2 {
        for w in words_of_length(&q.source, n, true) {
            assert_eq!(r.q_g.eval(&w), q.eval(&w));
        }
    }
    assert!(r.omega_prime.is_empty());
    let ext: DGLieAlgebra = extend_scalars(g, 2);
    assert_eq!(ext.dim(), q.source.dim());
}

#[test]
fn linear_morphism_pushes_omega_forward_linearly() {
    let g = &standard_dglas()[1].1;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let q = extend_tower(&from_dgla(g).unwrap(), 3);
    let mc = loop {
        if let Some(m) = random_mc(g, 3, &mut rng) {
            if !m.series().is_zero() {
                break m;
            }
        }
    };
    let omega = series_to_ext(&mc.series());
    let id = identity_morphism(&q.source, 3);
    let r = twist(&q, &q, &id, &omega, 2).unwrap();
    let mut expected = SparseVec::new();
    add_scaled(&mut expected, &q_(1), &omega);
    assert_eq!(r.omega_prime, expected);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn small_algebra(idx: usize) -> DGLieAlgebra {
        standard_dglas()[idx % 4].1.clone()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn exponentials_are_morphisms(idx in 0usize..4, seed in any::<u64>()) {
            let g = small_algebra(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let qg = from_dgla(&g).unwrap();
            let psi = exp_automorphism(&qg, &random_eta(&qg.source, &mut rng), 3).unwrap();
            for n in 1..=3 {
                for w in words_of_length(&qg.source, n, true) {
                    prop_assert!(morphism_defect(&psi, &qg, &qg, n, &w).unwrap().is_empty());
                }
            }
        }

        #[test]
        fn twists_by_random_mc_elements_verify(idx in 0usize..4, seed in any::<u64>()) {
            let g = small_algebra(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let Some(mc) = (0..8).find_map(|_| random_mc(&g, 3, &mut rng)) else { return Ok(()) };
            let qg = from_dgla(&g).unwrap();
            let psi = exp_automorphism(&qg, &random_eta(&qg.source, &mut rng), 4).unwrap();
            let (qe, pe) = (extend_tower(&qg, 3), extend_tower(&psi, 3));
            let r = twist(&qe, &qe, &pe, &series_to_ext(&mc.series()), 2).unwrap();
            let rep = verify_twist(&qe, &qe, &r, 2).unwrap();
            prop_assert!(rep.passed(), "{:?}", rep.witnesses);
        }

        #[test]
        fn defect_is_the_square_projection_for_random_towers(seed in any::<u64>()) {
            let g = two_dim();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = from_dgla(&g).unwrap().source;
            let t = random_tower(&mut rng, TowerKind::Structure, &s, &s, 3);
            for n in 1..=3 {
                for w in words_of_length(&s, n, true) {
                    prop_assert_eq!(linfty_defect(&t, n, &w).unwrap(), square_projection(&t, &w));
                }
            }
        }
    }
}
