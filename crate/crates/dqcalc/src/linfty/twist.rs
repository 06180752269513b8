use serde::Serialize;

use super::tower::*;
use super::words::*;
use crate::error::{Error, Result};
use crate::rational::inv_factorial;
use crate::sparse::{add_scaled, SparseVec};

/// Towers and element produced by twisting along a Maurer-Cartan element ω.
#[derive(Clone, Debug)]
pub struct TwistResult {
    pub q_g: TaylorTower,
    pub q_h: TaylorTower,
    pub psi: TaylorTower,
    pub omega: SparseVec,
    pub omega_prime: SparseVec,
}

fn check_nilpotent(space: &ShiftedSpace, omega: &SparseVec) -> Result<()> {
    if space.eps_order < 2 || omega.keys().any(|&i| space.power(i) == 0) {
        return Err(Error::Invalid("ω must lie in the maximal ideal (every term divisible by ε)".into()));
    }
    if omega.keys().any(|&i| space.degree(i) != 0) {
        return Err(Error::Invalid("ω must have degree 0 in g[1]".into()));
    }
    Ok(())
}

/// `[1, ω, ω², …]` up to the first vanishing power.
pub(crate) fn omega_powers(space: &ShiftedSpace, omega: &SparseVec) -> Vec<SymElem> {
    let w = vector_elem(omega);
    let mut out = vec![word_elem(&[])];
    loop {
        let next = multiply(space, out.last().unwrap(), &w);
        if next.is_empty() {
            break;
        }
        out.push(next);
    }
    out
}

/// `(∂ⁱT_ω)(γ) = Σ_{j≥0} (1/j!) (∂^{i+j}T)(ω^j γ)` for `i ≤ arity`.
pub fn twist_tower(t: &TaylorTower, omega: &SparseVec, arity: usize) -> Result<TaylorTower> {
    check_nilpotent(&t.source, omega)?;
    let powers = omega_powers(&t.source, omega);
    let needed = arity + powers.len() - 1;
    if !t.covers(needed) {
        return Err(Error::Invalid(format!(
            "twisting to arity {arity} needs components up to arity {needed}, bound is {}",
            t.arity_bound
        )));
    }
    let mut out = TaylorTower::new(t.kind, t.degree, arity, t.source.clone(), t.target.clone());
    out.exact = t.exact && arity >= t.arity_bound;
    for n in 1..=arity {
        for gamma in words_of_length(&t.source, n, true) {
            let g = word_elem(&gamma);
            let mut acc = SparseVec::new();
            for (j, wj) in powers.iter().enumerate() {
                add_scaled(&mut acc, &inv_factorial(j), &t.eval_elem(&multiply(&t.source, wj, &g)));
            }
            insert_component(&mut out, gamma, acc);
        }
    }
    Ok(out)
}

/// `ω' = Σ_{j≥1} (1/j!) ∂^jψ(ω^j)`.
pub fn push_forward_mc(psi: &TaylorTower, omega: &SparseVec) -> Result<SparseVec> {
    check_nilpotent(&psi.source, omega)?;
    let powers = omega_powers(&psi.source, omega);
    if !psi.covers(powers.len() - 1) {
        return Err(Error::Invalid("morphism tower too short for the powers of ω".into()));
    }
    let mut out = SparseVec::new();
    for (j, wj) in powers.iter().enumerate().skip(1) {
        add_scaled(&mut out, &inv_factorial(j), &psi.eval_elem(wj));
    }
    Ok(out)
}

/// Twists `Q_g` by ω, `Q_h` by ω' and ψ by ω, all computed to `arity`.
pub fn twist(qg: &TaylorTower, qh: &TaylorTower, psi: &TaylorTower, omega: &SparseVec, arity: usize) -> Result<TwistResult> {
    if psi.source != qg.source || psi.target != qh.source {
        return Err(Error::Invalid("towers do not share spaces".into()));
    }
    let omega_prime = push_forward_mc(psi, omega)?;
    let q_g = twist_tower(qg, omega, arity)?;
    let q_h = if omega_prime.is_empty() { qh.clone() } else { twist_tower(qh, &omega_prime, arity)? };
    let psi_w = twist_tower(psi, omega, arity)?;
    Ok(TwistResult { q_g, q_h, psi: psi_w, omega: omega.clone(), omega_prime })
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct TwistReport {
    pub arity_window: usize,
    pub input_mc: bool,
    pub d_squared_zero: bool,
    pub source_structure: bool,
    pub target_structure: bool,
    pub omega_prime_mc: bool,
    pub morphism: bool,
    pub witnesses: Vec<String>,
}

impl TwistReport {
    pub fn passed(&self) -> bool {
        self.input_mc && self.d_squared_zero && self.source_structure && self.target_structure && self.omega_prime_mc && self.morphism
    }
}

/// Checks the twisted data on all ε⁰ words up to `arity` (ε-linearity covers the rest).
pub fn verify_twist(qg: &TaylorTower, qh: &TaylorTower, r: &TwistResult, arity: usize) -> Result<TwistReport> {
    let mut rep = TwistReport { arity_window: arity, ..Default::default() };
    let res = linfty_mc_residual(qg, &r.omega)?;
    rep.input_mc = res.is_empty();
    if !rep.input_mc {
        rep.witnesses.push(format!("MC residual of ω: {}", qg.source.describe(&res)));
    }
    let res = linfty_mc_residual(qh, &r.omega_prime)?;
    rep.omega_prime_mc = res.is_empty();
    if !rep.omega_prime_mc {
        rep.witnesses.push(format!("MC residual of ω': {}", qh.source.describe(&res)));
    }
    rep.d_squared_zero = true;
    rep.source_structure = true;
    rep.target_structure = true;
    rep.morphism = true;
    for n in 1..=arity {
        for w in words_of_length(&r.q_g.source, n, true) {
            let dg = linfty_defect(&r.q_g, n, &w)?;
            if !dg.is_empty() {
                rep.source_structure = false;
                if n == 1 {
                    rep.d_squared_zero = false;
                }
                rep.witnesses.push(format!("∂^{n}(Q_ω²)({}) = {}", r.q_g.source.describe_word(&w), r.q_g.source.describe(&dg)));
            }
            let m = morphism_defect(&r.psi, &r.q_g, &r.q_h, n, &w)?;
            if !m.is_empty() {
                rep.morphism = false;
                rep.witnesses.push(format!("ψ_ω defect on {}: {}", r.q_g.source.describe_word(&w), r.q_h.source.describe(&m)));
            }
        }
        for w in words_of_length(&r.q_h.source, n, true) {
            let dh = linfty_defect(&r.q_h, n, &w)?;
            if !dh.is_empty() {
                rep.target_structure = false;
                rep.witnesses.push(format!("∂^{n}(Q_ω'²)({}) = {}", r.q_h.source.describe_word(&w), r.q_h.source.describe(&dh)));
            }
        }
    }
    Ok(rep)
}
