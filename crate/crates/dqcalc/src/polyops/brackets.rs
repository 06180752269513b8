use super::types::*;
use crate::rational::{inv_factorial, q, sign, Q};

/// Removes `ξ_i` from the left of `ξ_I`, returning the sign and the rest.
fn left_xi_derivative(idx: &[usize], i: usize) -> Option<(Q, Vec<usize>)> {
    let k = idx.iter().position(|&j| j == i)?;
    let mut rest = idx.to_vec();
    rest.remove(k);
    Some((sign(k as i64), rest))
}

/// Adds `c · Σ_i (∂_{x_i} P)(∂ξ_i Q)` with the left ξ-derivative.
fn schouten_half(out: &mut PolyVectorField, p: &PolyVectorField, qv: &PolyVectorField, c: &Q) {
    for ((m2, i2), y) in &qv.terms {
        for &i in i2 {
            let (s, rest) = left_xi_derivative(i2, i).unwrap();
            let mut unit = vec![0; p.dim];
            unit[i] = 1;
            for ((m1, i1), x) in &p.terms {
                let Some((e, m1d)) = mono_derivative(m1, &unit) else { continue };
                let mut idx = i1.clone();
                idx.extend_from_slice(&rest);
                out.add_term(mono_mul(&m1d, m2), &idx, c * &s * &e * x * y);
            }
        }
    }
}

/// Schouten-Nijenhuis bracket in superfunction form, with left ξ-derivatives:
/// `[P,Q] = Σ_i (∂_{x_i}Q)(∂_{ξ_i}P) − (−1)^{(p−1)(q−1)} Σ_i (∂_{x_i}P)(∂_{ξ_i}Q)`.
/// With this sign `Alt([hkr P, hkr Q]) = [P,Q]`, so HKR respects brackets on cohomology.
pub fn schouten_bracket(a: &PolyVectorField, b: &PolyVectorField) -> PolyVectorField {
    assert_eq!(a.dim, b.dim, "dimension mismatch");
    let (p, r) = (a.arity as i64, b.arity as i64);
    if p + r == 0 {
        return PolyVectorField::zero(a.dim, 0);
    }
    let mut out = PolyVectorField::zero(a.dim, (p + r - 1) as usize);
    schouten_half(&mut out, b, a, &q(1));
    schouten_half(&mut out, a, b, &-sign((p - 1) * (r - 1)));
    out
}

/// `(dφ)(a_0..a_n) = a_0φ(a_1..a_n) + Σ_{i=1}^n (−1)^i φ(..a_{i−1}a_i..) + (−1)^{n+1}φ(a_0..a_{n−1})a_n`.
pub fn hochschild_standard(phi: &PolyDiffOp) -> PolyDiffOp {
    let n = phi.arity;
    let zero = vec![0; phi.dim];
    let mut out = PolyDiffOp::zero(phi.dim, n + 1);
    for ((m, alphas), c) in &phi.terms {
        let mut first = vec![zero.clone()];
        first.extend(alphas.iter().cloned());
        out.add_term(m.clone(), first, c.clone());
        for i in 1..=n {
            let s = sign(i as i64) * c;
            for (w, parts) in multinomial_splits(&alphas[i - 1], 2) {
                let mut t: Vec<MultiIndex> = alphas[..i - 1].to_vec();
                t.extend(parts);
                t.extend(alphas[i..].iter().cloned());
                out.add_term(m.clone(), t, &s * w);
            }
        }
        let mut last = alphas.clone();
        last.push(zero.clone());
        out.add_term(m.clone(), last, sign(n as i64 + 1) * c);
    }
    out
}

/// `d_H φ = [μ, φ] = (−1)^{n−1} · (standard Hochschild differential)` for arity `n`.
pub fn hochschild_differential(phi: &PolyDiffOp) -> PolyDiffOp {
    hochschild_standard(phi).scaled(&sign(phi.arity as i64 - 1))
}

/// `a∘b = Σ_i (−1)^{(i−1)(|b|−1)} a(…, b(…), …)` with `b` inserted in slot `i`.
pub fn circle(a: &PolyDiffOp, b: &PolyDiffOp) -> PolyDiffOp {
    assert_eq!(a.dim, b.dim, "dimension mismatch");
    let (m, n) = (a.arity, b.arity);
    if m == 0 {
        return PolyDiffOp::zero(a.dim, n.saturating_sub(1));
    }
    let mut out = PolyDiffOp::zero(a.dim, m + n - 1);
    for ((fa, alphas), x) in &a.terms {
        for i in 0..m {
            let s = sign(i as i64 * (n as i64 - 1));
            for (w, parts) in multinomial_splits(&alphas[i], n + 1) {
                for ((gb, betas), y) in &b.terms {
                    let Some((e, gd)) = mono_derivative(gb, &parts[0]) else { continue };
                    let mut t: Vec<MultiIndex> = alphas[..i].to_vec();
                    for k in 0..n {
                        t.push(mono_mul(&betas[k], &parts[k + 1]));
                    }
                    t.extend(alphas[i + 1..].iter().cloned());
                    out.add_term(mono_mul(fa, &gd), t, &s * &w * &e * x * y);
                }
            }
        }
    }
    out
}

/// `[a,b] = a∘b − (−1)^{(|a|−1)(|b|−1)} b∘a`.
pub fn gerstenhaber_bracket(a: &PolyDiffOp, b: &PolyDiffOp) -> PolyDiffOp {
    let (m, n) = (a.arity as i64, b.arity as i64);
    if m + n == 0 {
        return PolyDiffOp::zero(a.dim, 0);
    }
    let mut out = circle(a, b);
    out.add_scaled(&-sign((m - 1) * (n - 1)), &circle(b, a));
    out
}

/// `f ∂_{i_1}∧…∧∂_{i_n} ↦ (1/n!) Σ_σ sgn(σ) f ∂_{i_σ(1)}⊗…⊗∂_{i_σ(n)}`.
pub fn hkr(p: &PolyVectorField) -> PolyDiffOp {
    let n = p.arity;
    let mut out = PolyDiffOp::zero(p.dim, n);
    let perms = permutations(n);
    for ((m, idx), c) in &p.terms {
        for (perm, neg) in &perms {
            let alphas = perm
                .iter()
                .map(|&k| {
                    let mut a = vec![0; p.dim];
                    a[idx[k]] = 1;
                    a
                })
                .collect();
            let x = c * inv_factorial(n);
            out.add_term(m.clone(), alphas, if *neg { -x } else { x });
        }
    }
    out
}

/// Antisymmetrization onto polyvectors: keeps the terms of order one in every slot.
pub fn alt(op: &PolyDiffOp) -> PolyVectorField {
    let mut out = PolyVectorField::zero(op.dim, op.arity);
    for ((m, alphas), c) in &op.terms {
        if alphas.iter().all(|a| mono_degree(a) == 1) {
            let idx: Vec<usize> = alphas.iter().map(|a| a.iter().position(|&e| e == 1).unwrap()).collect();
            out.add_term(m.clone(), &idx, c.clone());
        }
    }
    out
}
