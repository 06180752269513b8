use serde::Serialize;

use super::brackets::*;
use super::types::*;
use super::windows::*;
use crate::error::{Error, Result};
use crate::linfty::{add_term, multiply, vector_elem, word_elem, words_of_length, ShiftedSpace, SymElem, TaylorTower, TowerKind};
use crate::rational::{format_q, zero};
use crate::sparse::{unit, SparseVec};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub arity_window: usize,
    pub words_checked: usize,
    pub p4: Vec<String>,
    pub p5: Vec<String>,
    pub p3_prime: Vec<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.p4.is_empty() && self.p5.is_empty() && self.p3_prime.is_empty()
    }
}

/// Decodes a possibly inhomogeneous window vector into one term map.
fn decode_any(w: &DpolyWindow, v: &SparseVec) -> PolyDiffOp {
    let mut op = PolyDiffOp::zero(w.dim, 0);
    for (&i, x) in v {
        let (m, a) = &w.items[i];
        op.terms.insert((m.clone(), a.clone()), x.clone());
    }
    if let Some(((_, a), _)) = op.terms.iter().next() {
        op.arity = a.len();
    }
    op
}

fn is_vector_field(w: &TpolyWindow, i: usize) -> bool {
    w.items[i].1.len() == 1
}

/// Linear vector fields `x_j ∂_i`, the image of `gl_d`.
fn is_gl(w: &TpolyWindow, i: usize) -> bool {
    is_vector_field(w, i) && mono_degree(&w.items[i].0) == 1
}

/// Tower of `hkr` on a polyvector window: only `∂¹` is nonzero.
pub fn hkr_tower(src: &TpolyWindow, tgt: &DpolyWindow, arity: usize) -> Result<TaylorTower> {
    let s = ShiftedSpace::shift_of(&src.space);
    let t = ShiftedSpace::shift_of(&tgt.space);
    let mut tower = TaylorTower::new(TowerKind::Morphism, 0, arity, s, t);
    tower.exact = true;
    for i in 0..src.len() {
        tower.set(&[i], tgt.encode(&hkr(&src.element(i)), true)?)?;
    }
    Ok(tower)
}

/// Checks, on all basis words of length `≤ arity`:
/// (P4) `U_q(γ_1⋯γ_q) = 0` for vector fields `γ_i` and `q ≥ 2`;
/// (P5) `U_q(γ·α) = 0` for `γ ∈ gl_d` and `q ≥ 2`;
/// (P3′) `[U_1 γ, U_q(α)] = Σ_j U_q(α_1⋯[γ,α_j]⋯α_q)` for `γ ∈ gl_d`.
pub fn check_properties(u: &TaylorTower, src: &TpolyWindow, tgt: &DpolyWindow, arity: usize) -> Result<PropertyReport> {
    if u.kind != TowerKind::Morphism || u.source.dim() != src.len() || u.target.dim() != tgt.len() {
        return Err(Error::Invalid("tower does not match the windows".into()));
    }
    let mut rep = PropertyReport { arity_window: arity, ..Default::default() };
    let s = &u.source;
    let gl: Vec<usize> = (0..src.len()).filter(|&i| is_gl(src, i)).collect();
    for q in 1..=arity {
        for w in words_of_length(s, q, true) {
            rep.words_checked += 1;
            let val = u.eval(&w);
            if q >= 2 && !val.is_empty() {
                if w.iter().all(|&i| is_vector_field(src, i)) {
                    rep.p4.push(format!("U_{q}({}) = {}", s.describe_word(&w), u.target.describe(&val)));
                }
                if w.iter().any(|&i| is_gl(src, i)) {
                    rep.p5.push(format!("U_{q}({}) = {}", s.describe_word(&w), u.target.describe(&val)));
                }
            }
            let uq = decode_any(tgt, &val);
            for &g in &gl {
                let ug = tgt.decode(&u.eval(&[g]), 1);
                let mut defect = gerstenhaber_bracket(&ug, &uq).terms;
                let gamma = src.element(g);
                let mut acted = SymElem::new();
                for j in 0..q {
                    let mut prod = word_elem(&[]);
                    for (p, &a) in w.iter().enumerate() {
                        let v = if p == j { src.encode(&schouten_bracket(&gamma, &src.element(a)), true)? } else { unit(a) };
                        prod = multiply(s, &prod, &vector_elem(&v));
                    }
                    for (k, x) in prod {
                        add_term(&mut acted, k, x);
                    }
                }
                for (k, x) in decode_any(tgt, &u.eval_elem(&acted)).terms {
                    let e = defect.entry(k.clone()).or_insert_with(zero);
                    *e -= x;
                    if *e == zero() {
                        defect.remove(&k);
                    }
                }
                if !defect.is_empty() {
                    let shown = defect.iter().map(|((m, a), x)| format!("{}*{}", format_q(x), op_label(m, a))).collect::<Vec<_>>();
                    rep.p3_prime.push(format!("γ = {}, α = {}: defect {}", s.label(g), s.describe_word(&w), shown.join(" + ")));
                }
            }
        }
    }
    Ok(rep)
}
