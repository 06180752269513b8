use super::brackets::*;
use super::types::*;
use crate::error::{Error, Result};
use crate::rational::one;

/// Polynomial with coefficients in `Q[ε]/ε^N`, stored as its ε-coefficients.
pub type EpsPoly = Vec<Poly>;

fn bidifferential(pi: &PolyVectorField) -> Result<PolyDiffOp> {
    if pi.arity != 2 {
        return Err(Error::Invalid(format!("π must be a bivector, got arity {}", pi.arity)));
    }
    Ok(hkr(pi))
}

fn star_with(b: &PolyDiffOp, x: &[Poly], y: &[Poly], order: usize) -> EpsPoly {
    let mut out = vec![Poly::new(); order];
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            if i + j < order {
                poly_add_scaled(&mut out[i + j], &one(), &poly_mul(xi, yj));
            }
            if i + j + 1 < order {
                poly_add_scaled(&mut out[i + j + 1], &one(), &b.eval(&[xi.clone(), yj.clone()]));
            }
        }
    }
    out
}

/// `a ⋆ b = ab + ε·hkr(π)(a, b)` over `Q[ε]/ε^N`, `N ≤ 2`.
pub fn first_order_star(pi: &PolyVectorField, a: &Poly, b: &Poly, order: usize) -> Result<EpsPoly> {
    if !(1..=2).contains(&order) {
        return Err(Error::Invalid(format!("ε-order must be 1 or 2, got {order}")));
    }
    let bop = bidifferential(pi)?;
    Ok(star_with(&bop, std::slice::from_ref(a), std::slice::from_ref(b), order))
}

/// `(a⋆b)⋆c − a⋆(b⋆c)` for the first-order product, computed over `Q[ε]/ε^N`. With
/// `N = 3` the `ε²` coefficient is the second-order obstruction evaluated on `(a, b, c)`.
pub fn star_associator(pi: &PolyVectorField, a: &Poly, b: &Poly, c: &Poly, order: usize) -> Result<EpsPoly> {
    if !(1..=3).contains(&order) {
        return Err(Error::Invalid(format!("ε-order must be between 1 and 3, got {order}")));
    }
    let bop = bidifferential(pi)?;
    let lift = |p: &Poly| vec![p.clone()];
    let left = star_with(&bop, &star_with(&bop, &lift(a), &lift(b), order), &lift(c), order);
    let right = star_with(&bop, &lift(a), &star_with(&bop, &lift(b), &lift(c), order), order);
    Ok(left
        .into_iter()
        .zip(right)
        .map(|(mut l, r)| {
            poly_add_scaled(&mut l, &-one(), &r);
            l
        })
        .collect())
}

/// `B∘B = B(B(·,·),·) − B(·,B(·,·))` for `B = hkr(π)`, the `ε²` associator as an operator.
pub fn associator_operator(pi: &PolyVectorField) -> Result<PolyDiffOp> {
    let b = bidifferential(pi)?;
    Ok(circle(&b, &b))
}

/// Antisymmetric part of the `ε²` associator: the trivector obstructing extension of
/// the first-order product to second order.
pub fn second_order_obstruction(pi: &PolyVectorField) -> Result<PolyVectorField> {
    Ok(alt(&associator_operator(pi)?))
}

/// Every monomial triple with total degree `≤ max_total`.
pub fn monomial_triples(dim: usize, max_total: u32) -> Vec<[Monomial; 3]> {
    let mut out = Vec::new();
    for total in 0..=max_total {
        for split in monomials_of_degree(3, total) {
            for a in monomials_of_degree(dim, split[0]) {
                for b in monomials_of_degree(dim, split[1]) {
                    for c in monomials_of_degree(dim, split[2]) {
                        out.push([a.clone(), b.clone(), c.clone()]);
                    }
                }
            }
        }
    }
    out
}
