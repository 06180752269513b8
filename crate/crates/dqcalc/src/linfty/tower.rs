use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::words::*;
use crate::dgla::{check_dgla_axioms, eps_label, DGLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg::GradedSpace;
use crate::rational::{inv_factorial, qf, sign, Q};
use crate::sparse::{add_entry, add_scaled, scaled, unit, SparseVec};

pub const DEFAULT_ARITY_BOUND: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerKind {
    /// coderivation of degree +1 (an L∞ structure when it squares to zero)
    Structure,
    /// degree-0 coalgebra map
    Morphism,
    /// coderivation of arbitrary degree
    Coderivation,
}

/// Taylor coefficients `∂ⁿT: Sⁿ(source) → target` for `1 ≤ n ≤ arity_bound`,
/// stored on canonical words. Over `Q[ε]/ε^N` only words whose letters carry
/// `ε⁰` are stored and evaluation extends ε-linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorTower {
    pub kind: TowerKind,
    pub degree: i64,
    pub arity_bound: usize,
    /// components above the bound vanish identically rather than being unknown
    pub exact: bool,
    pub source: ShiftedSpace,
    pub target: ShiftedSpace,
    comps: Vec<BTreeMap<Word, SparseVec>>,
}

impl TaylorTower {
    pub fn new(kind: TowerKind, degree: i64, arity_bound: usize, source: ShiftedSpace, target: ShiftedSpace) -> Self {
        TaylorTower { kind, degree, arity_bound, exact: false, source, target, comps: vec![BTreeMap::new(); arity_bound] }
    }

    pub fn structure(space: ShiftedSpace, arity_bound: usize) -> Self {
        Self::new(TowerKind::Structure, 1, arity_bound, space.clone(), space)
    }

    pub fn morphism(source: ShiftedSpace, target: ShiftedSpace, arity_bound: usize) -> Self {
        Self::new(TowerKind::Morphism, 0, arity_bound, source, target)
    }

    pub fn is_coderivation(&self) -> bool {
        self.kind != TowerKind::Morphism
    }

    /// Sets `∂ⁿT(w₁⋯w_n) = value` for the given letter sequence (any order).
    pub fn set(&mut self, seq: &[usize], value: SparseVec) -> Result<()> {
        let n = seq.len();
        if n == 0 {
            return Err(Error::Invalid("the ∂⁰ component is absent".into()));
        }
        if n > self.arity_bound {
            return Err(Error::Invalid(format!("arity {n} exceeds bound {}", self.arity_bound)));
        }
        if seq.iter().any(|&i| i >= self.source.dim() || self.source.power(i) != 0) {
            return Err(Error::Invalid("word letters must be ε⁰ basis vectors of the source".into()));
        }
        let deg: i64 = seq.iter().map(|&i| self.source.degree(i)).sum::<i64>() + self.degree;
        for &k in value.keys() {
            if k >= self.target.dim() || self.target.degree(k) != deg {
                return Err(Error::Invalid(format!(
                    "value on {} must have degree {deg}",
                    self.source.describe_word(seq)
                )));
            }
        }
        let Some((w, neg)) = canonical(&self.source, seq) else {
            if value.is_empty() {
                return Ok(());
            }
            return Err(Error::Invalid(format!("{} vanishes in the symmetric algebra", self.source.describe_word(seq))));
        };
        let value = if neg { scaled(&-Q::from_integer(1.into()), &value) } else { value };
        if value.is_empty() {
            self.comps[n - 1].remove(&w);
        } else {
            self.comps[n - 1].insert(w, value);
        }
        Ok(())
    }

    pub fn component(&self, n: usize) -> &BTreeMap<Word, SparseVec> {
        &self.comps[n - 1]
    }

    pub fn components(&self) -> impl Iterator<Item = (usize, &BTreeMap<Word, SparseVec>)> {
        self.comps.iter().enumerate().map(|(i, c)| (i + 1, c))
    }

    /// Largest arity with a nonzero component.
    pub fn max_nonzero_arity(&self) -> usize {
        self.comps.iter().rposition(|c| !c.is_empty()).map_or(0, |i| i + 1)
    }

    /// Value on a canonical word; zero beyond the arity bound.
    pub fn eval(&self, w: &[usize]) -> SparseVec {
        let n = w.len();
        if n == 0 || n > self.arity_bound {
            return SparseVec::new();
        }
        if self.source.eps_order == 1 {
            return self.comps[n - 1].get(w).cloned().unwrap_or_default();
        }
        let p = self.source.word_power(w);
        if p >= self.source.eps_order {
            return SparseVec::new();
        }
        let base: Word = w.iter().map(|&i| i - self.source.power(i)).collect();
        match self.comps[n - 1].get(&base) {
            Some(v) => self.target.shift_power(v, p),
            None => SparseVec::new(),
        }
    }

    pub fn eval_elem(&self, e: &SymElem) -> SparseVec {
        let mut out = SparseVec::new();
        for (w, x) in e {
            add_scaled(&mut out, x, &self.eval(w));
        }
        out
    }

    /// Whether arity `n` is covered: either within the bound or known to vanish.
    pub fn covers(&self, n: usize) -> bool {
        n <= self.arity_bound || self.exact
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if self.covers(n) {
            Ok(())
        } else {
            Err(Error::Invalid(format!("arity {n} exceeds the tower's bound {}", self.arity_bound)))
        }
    }

    /// Checks graded symmetry of every stored component under adjacent transpositions
    /// by re-evaluating on swapped letter sequences; returns the first offending word.
    pub fn symmetry_violation(&self) -> Option<String> {
        for (_, comp) in self.components() {
            for (w, v) in comp {
                for i in 0..w.len().saturating_sub(1) {
                    let mut s = w.clone();
                    s.swap(i, i + 1);
                    let Some((cw, neg)) = canonical(&self.source, &s) else {
                        return Some(self.source.describe_word(w));
                    };
                    let sgn = if neg { -1 } else { 1 };
                    let odd = self.source.is_odd(w[i]) && self.source.is_odd(w[i + 1]);
                    let expected = if odd { -1 } else { 1 };
                    if (cw != *w || sgn != expected)
                        && self.eval(&cw) != scaled(&Q::from_integer((sgn * expected).into()), v) {
                            return Some(self.source.describe_word(w));
                        }
                }
            }
        }
        None
    }
}

/// `Q(w) = Σ_{∅≠I⊂N} ε(I,N∖I) (∂^{|I|}Q)(w_I)·w_{N∖I}`.
pub fn coderivation_apply(q: &TaylorTower, w: &[usize]) -> Result<SymElem> {
    if !q.is_coderivation() {
        return Err(Error::Invalid("tower is not a coderivation".into()));
    }
    q.check_arity(w.len())?;
    Ok(apply_coder_word(q, w))
}

pub(crate) fn apply_coder_word(q: &TaylorTower, w: &[usize]) -> SymElem {
    let n = w.len();
    let degs: Vec<i64> = w.iter().map(|&i| q.source.degree(i)).collect();
    let mut out = SymElem::new();
    for mask in 1u32..(1 << n) {
        let v = q.eval(&select(w, mask));
        if v.is_empty() {
            continue;
        }
        let neg = split_sign(&degs, mask);
        let rest = select(w, !mask & ((1 << n) - 1));
        for (l, x) in v {
            let mut seq = vec![l];
            seq.extend_from_slice(&rest);
            add_sequence(&q.target, &mut out, &seq, if neg { -x } else { x });
        }
    }
    out
}

pub fn apply_coder(q: &TaylorTower, e: &SymElem) -> SymElem {
    let mut out = SymElem::new();
    for (w, x) in e {
        add_scaled_elem(&mut out, x, &apply_coder_word(q, w));
    }
    out
}

/// Length-one part of an element of the symmetric algebra.
pub fn linear_part(e: &SymElem) -> SparseVec {
    let mut v = SparseVec::new();
    for (w, x) in e {
        if w.len() == 1 {
            add_entry(&mut v, w[0], x.clone());
        }
    }
    v
}

/// `∂ⁿ(Q²)(w) = Σ_I ε(I,N∖I) ∂^{n-|I|+1}Q((∂^{|I|}Q)(w_I)·w_{N∖I})`.
pub fn linfty_defect(q: &TaylorTower, n: usize, w: &[usize]) -> Result<SparseVec> {
    if w.len() != n {
        return Err(Error::Invalid(format!("word has length {}, not {n}", w.len())));
    }
    q.check_arity(n)?;
    let degs: Vec<i64> = w.iter().map(|&i| q.source.degree(i)).collect();
    let mut out = SparseVec::new();
    for mask in 1u32..(1 << n) {
        let v = q.eval(&select(w, mask));
        if v.is_empty() {
            continue;
        }
        let neg = split_sign(&degs, mask);
        let rest = select(w, !mask & ((1 << n) - 1));
        for (l, x) in v {
            let mut seq = vec![l];
            seq.extend_from_slice(&rest);
            if let Some((u, neg2)) = canonical(&q.source, &seq) {
                let c = if neg != neg2 { -x } else { x };
                add_scaled(&mut out, &c, &q.eval(&u));
            }
        }
    }
    Ok(out)
}

/// `ψ(w) = Σ_{ordered partitions} (1/p!) ε ∂^{|I₁|}ψ(w_{I₁})⋯∂^{|I_p|}ψ(w_{I_p})`,
/// evaluated as one term per unordered partition (the p! orderings agree since ψ has degree 0).
pub fn coalgebra_apply(psi: &TaylorTower, w: &[usize]) -> Result<SymElem> {
    if psi.kind != TowerKind::Morphism {
        return Err(Error::Invalid("tower is not a morphism".into()));
    }
    psi.check_arity(w.len())?;
    Ok(apply_coalg_word(psi, w))
}

pub(crate) fn apply_coalg_word(psi: &TaylorTower, w: &[usize]) -> SymElem {
    let n = w.len();
    if n == 0 {
        return word_elem(&[]);
    }
    let degs: Vec<i64> = w.iter().map(|&i| psi.source.degree(i)).collect();
    let mut out = SymElem::new();
    for blocks in set_partitions(n) {
        let mut prod = word_elem(&[]);
        for &b in &blocks {
            let v = psi.eval(&select(w, b));
            prod = multiply(&psi.target, &prod, &vector_elem(&v));
            if prod.is_empty() {
                break;
            }
        }
        if prod.is_empty() {
            continue;
        }
        let seq: Vec<usize> = blocks.iter().flat_map(|&b| (0..n).filter(move |i| b >> i & 1 == 1)).collect();
        let c = if sequence_sign(&degs, &seq) { qf(-1, 1) } else { qf(1, 1) };
        add_scaled_elem(&mut out, &c, &prod);
    }
    out
}

pub fn apply_coalg(psi: &TaylorTower, e: &SymElem) -> SymElem {
    let mut out = SymElem::new();
    for (w, x) in e {
        add_scaled_elem(&mut out, x, &apply_coalg_word(psi, w));
    }
    out
}

/// Left side minus right side of the first-order morphism condition, general form.
pub fn morphism_defect_general(psi: &TaylorTower, qg: &TaylorTower, qh: &TaylorTower, w: &[usize]) -> SparseVec {
    let n = w.len();
    let degs: Vec<i64> = w.iter().map(|&i| qg.source.degree(i)).collect();
    let mut out = SparseVec::new();
    for mask in 1u32..(1 << n) {
        let v = qg.eval(&select(w, mask));
        if v.is_empty() {
            continue;
        }
        let neg = split_sign(&degs, mask);
        let rest = select(w, !mask & ((1 << n) - 1));
        for (l, x) in v {
            let mut seq = vec![l];
            seq.extend_from_slice(&rest);
            if let Some((u, neg2)) = canonical(&qg.source, &seq) {
                let c = if neg != neg2 { -x } else { x };
                add_scaled(&mut out, &c, &psi.eval(&u));
            }
        }
    }
    let rhs = qh.eval_elem(&apply_coalg_word(psi, w));
    add_scaled(&mut out, &qf(-1, 1), &rhs);
    out
}

/// The same defect when both structures have only ∂¹ and ∂², written term by term:
/// `Σ_i ε ∂ⁿψ(∂¹Q(w_i)w_{N∖i}) + Σ_{i<j} ε ∂^{n-1}ψ(∂²Q(w_iw_j)w_{N∖{i,j}})
///  − ∂¹Q(∂ⁿψ(w)) − ½ Σ_{N=I₁⊔I₂} ε ∂²Q(∂ψ(w_{I₁})∂ψ(w_{I₂}))`.
pub fn morphism_defect_dgla(psi: &TaylorTower, qg: &TaylorTower, qh: &TaylorTower, w: &[usize]) -> SparseVec {
    let n = w.len();
    let degs: Vec<i64> = w.iter().map(|&i| qg.source.degree(i)).collect();
    let full = (1u32 << n) - 1;
    let mut out = SparseVec::new();
    let push_psi = |out: &mut SparseVec, v: SparseVec, neg: bool, rest: &[usize]| {
        for (l, x) in v {
            let mut seq = vec![l];
            seq.extend_from_slice(rest);
            if let Some((u, neg2)) = canonical(&qg.source, &seq) {
                let c = if neg != neg2 { -x } else { x };
                add_scaled(out, &c, &psi.eval(&u));
            }
        }
    };
    for i in 0..n {
        let mask = 1u32 << i;
        let v = qg.eval(&[w[i]]);
        push_psi(&mut out, v, split_sign(&degs, mask), &select(w, full & !mask));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mask = (1u32 << i) | (1 << j);
            let v = qg.eval(&select(w, mask));
            push_psi(&mut out, v, split_sign(&degs, mask), &select(w, full & !mask));
        }
    }
    let top = psi.eval(w);
    for (l, x) in &top {
        add_scaled(&mut out, &-x.clone(), &qh.eval(&[*l]));
    }
    for mask in 1u32..full {
        let a = psi.eval(&select(w, mask));
        let b = psi.eval(&select(w, full & !mask));
        if a.is_empty() || b.is_empty() {
            continue;
        }
        let c0 = if split_sign(&degs, mask) { qf(1, 2) } else { qf(-1, 2) };
        for (l, x) in &a {
            for (m, y) in &b {
                if let Some((u, neg)) = canonical(&qh.source, &[*l, *m]) {
                    let c = &c0 * x * y;
                    add_scaled(&mut out, &if neg { -c } else { c }, &qh.eval(&u));
                }
            }
        }
    }
    out
}

/// Morphism defect at arity `n`. When both structures stop at arity 2 the term-by-term
/// form is used and cross-checked against the general form.
pub fn morphism_defect(psi: &TaylorTower, qg: &TaylorTower, qh: &TaylorTower, n: usize, w: &[usize]) -> Result<SparseVec> {
    if w.len() != n {
        return Err(Error::Invalid(format!("word has length {}, not {n}", w.len())));
    }
    if psi.kind != TowerKind::Morphism || qg.source != psi.source || qh.source != psi.target {
        return Err(Error::Invalid("towers do not form a morphism between the structures".into()));
    }
    psi.check_arity(n)?;
    qg.check_arity(n)?;
    qh.check_arity(n)?;
    let general = morphism_defect_general(psi, qg, qh, w);
    let two_term = |t: &TaylorTower| t.exact && t.max_nonzero_arity() <= 2;
    if two_term(qg) && two_term(qh) {
        let special = morphism_defect_dgla(psi, qg, qh, w);
        if special != general {
            return Err(Error::Structure(format!(
                "term-by-term and general morphism defects disagree on {}",
                qg.source.describe_word(w)
            )));
        }
        return Ok(special);
    }
    Ok(general)
}

/// Structure tower of a DG-Lie algebra: `∂¹Q(a) = −da`, `∂²Q(a·b) = (−1)^{|a|}[a,b]`
/// with `|a|` the degree in `g`.
pub fn from_dgla(g: &DGLieAlgebra) -> Result<TaylorTower> {
    let r = check_dgla_axioms(g);
    if let Some(f) = r.failures.first() {
        return Err(Error::Structure(format!("{:?} fails on {:?}: {}", f.axiom, f.basis, f.defect)));
    }
    Ok(from_dgla_unchecked(g, 1))
}

/// Same construction without verifying the axioms. With `eps_order > 1`, `g` is read as
/// a scalar extension laid out as in [`crate::dgla::extend_scalars`].
pub fn from_dgla_unchecked(g: &DGLieAlgebra, eps_order: usize) -> TaylorTower {
    let mut space = ShiftedSpace::shift_of(g.space());
    space.eps_order = eps_order;
    let mut t = TaylorTower::structure(space, DEFAULT_ARITY_BOUND);
    t.exact = true;
    for i in 0..g.dim() {
        if i % eps_order != 0 {
            continue;
        }
        let dv = g.d(&unit(i));
        if !dv.is_empty() {
            t.comps[0].insert(vec![i], scaled(&qf(-1, 1), &dv));
        }
        for j in i..g.dim() {
            if j % eps_order != 0 {
                continue;
            }
            let b = g.bracket(&unit(i), &unit(j));
            if b.is_empty() || canonical(&t.source, &[i, j]).is_none() {
                continue;
            }
            t.comps[1].insert(vec![i, j], scaled(&sign(g.degree(i)), &b));
        }
    }
    t
}

/// Space `V ⊗ Q[ε]/ε^N` with the index layout `i*N + j`.
pub fn extend_space(s: &ShiftedSpace, order: usize) -> ShiftedSpace {
    assert_eq!(s.eps_order, 1, "space is already extended");
    let mut ext = GradedSpace::empty();
    for i in 0..s.dim() {
        for j in 0..order {
            ext.push(s.degree(i), eps_label(s.label(i), j)).unwrap();
        }
    }
    ShiftedSpace { space: Arc::new(ext), eps_order: order }
}

pub fn lift_vector(v: &SparseVec, order: usize) -> SparseVec {
    v.iter().map(|(i, x)| (i * order, x.clone())).collect()
}

/// ε-linear extension of a tower over `Q` to `Q[ε]/ε^N`.
pub fn extend_tower(t: &TaylorTower, order: usize) -> TaylorTower {
    let source = extend_space(&t.source, order);
    let target = if t.source == t.target { source.clone() } else { extend_space(&t.target, order) };
    let mut out = TaylorTower::new(t.kind, t.degree, t.arity_bound, source, target);
    out.exact = t.exact;
    for (n, comp) in t.components() {
        for (w, v) in comp {
            out.comps[n - 1].insert(w.iter().map(|i| i * order).collect(), lift_vector(v, order));
        }
    }
    out
}

/// `Σ_{i≥1} (1/i!) ∂ⁱQ(ωⁱ)`; requires ω to lie in the nilpotent ideal unless the
/// tower is known to vanish in high arity.
pub fn linfty_mc_residual(q: &TaylorTower, omega: &SparseVec) -> Result<SparseVec> {
    let nilpotent = q.source.eps_order > 1 && omega.keys().all(|&i| q.source.power(i) > 0);
    if !nilpotent && !q.exact {
        return Err(Error::Invalid("ω is not nilpotent and the tower is truncated".into()));
    }
    let w = vector_elem(omega);
    let mut out = SparseVec::new();
    let mut p = word_elem(&[]);
    for i in 1.. {
        p = multiply(&q.source, &p, &w);
        if p.is_empty() || i > q.arity_bound {
            if !p.is_empty() && !q.exact {
                return Err(Error::Invalid("series does not terminate within the arity bound".into()));
            }
            break;
        }
        add_scaled(&mut out, &inv_factorial(i), &q.eval_elem(&p));
    }
    Ok(out)
}

/// Builds a tower from explicit components `(arity, entries)`, used for deserialized input.
pub fn tower_from_entries(
    kind: TowerKind,
    arity_bound: usize,
    source: ShiftedSpace,
    target: ShiftedSpace,
    entries: Vec<(Vec<usize>, SparseVec)>,
) -> Result<TaylorTower> {
    let degree = match kind {
        TowerKind::Structure => 1,
        TowerKind::Morphism => 0,
        TowerKind::Coderivation => return Err(Error::Invalid("coderivation towers need an explicit degree".into())),
    };
    let mut t = TaylorTower::new(kind, degree, arity_bound, source, target);
    let mut seen = std::collections::BTreeSet::new();
    for (seq, v) in entries {
        let key = canonical(&t.source, &seq).map(|(w, _)| w);
        if let Some(w) = key.as_ref().filter(|w| seen.contains(*w)) {
            let mut probe = t.clone();
            probe.set(&seq, v)?;
            if probe.eval(w) != t.eval(w) {
                return Err(Error::Invalid(format!(
                    "conflicting values for {} under graded symmetry",
                    t.source.describe_word(&seq)
                )));
            }
            continue;
        }
        t.set(&seq, v)?;
        if let Some(w) = key {
            seen.insert(w);
        }
    }
    Ok(t)
}

/// Exponential `exp([Q, η])` of the degree-0 coderivation `[Q, η]`, where η has
/// only components of arity ≥ 2 and degree −1. The result is an L∞ automorphism of
/// `(g, Q)` with identity linear part.
pub fn exp_automorphism(q: &TaylorTower, eta: &TaylorTower, arity: usize) -> Result<TaylorTower> {
    if eta.degree != -1 || !eta.component(1).is_empty() {
        return Err(Error::Invalid("η must have degree −1 and no linear part".into()));
    }
    let space = q.source.clone();
    let xi = |w: &[usize]| -> SymElem {
        let mut out = apply_coder(q, &apply_coder_word(eta, w));
        add_scaled_elem(&mut out, &qf(1, 1), &apply_coder(eta, &apply_coder_word(q, w)));
        out
    };
    let mut memo = BTreeMap::new();
    let mut psi = TaylorTower::morphism(space.clone(), space.clone(), arity);
    for n in 1..=arity {
        for w in words_of_length(&space, n, true) {
            let mut acc = SparseVec::new();
            for (k, v) in xi_linear_powers(&xi, &w, &mut memo).iter().enumerate() {
                add_scaled(&mut acc, &inv_factorial(k), v);
            }
            if !acc.is_empty() {
                psi.comps[n - 1].insert(w, acc);
            }
        }
    }
    Ok(psi)
}

/// `lin(ξ^k w)` for `k < |w|`. Since ξ shortens words, these come from the shorter
/// words of `ξ(w)`, memoized across calls.
fn xi_linear_powers(xi: &dyn Fn(&[usize]) -> SymElem, w: &[usize], memo: &mut BTreeMap<Word, Vec<SparseVec>>) -> Vec<SparseVec> {
    if let Some(f) = memo.get(w) {
        return f.clone();
    }
    let mut out = vec![SparseVec::new(); w.len()];
    if w.len() == 1 {
        out[0] = unit(w[0]);
    }
    for (v, c) in xi(w) {
        let g = xi_linear_powers(xi, &v, memo);
        for (slot, x) in out.iter_mut().skip(1).zip(&g) {
            add_scaled(slot, &c, x);
        }
    }
    memo.insert(w.to_vec(), out.clone());
    out
}

pub(crate) fn insert_component(t: &mut TaylorTower, w: Word, v: SparseVec) {
    if !v.is_empty() {
        t.comps[w.len() - 1].insert(w, v);
    }
}

pub fn identity_morphism(space: &ShiftedSpace, arity: usize) -> TaylorTower {
    let mut t = TaylorTower::morphism(space.clone(), space.clone(), arity);
    t.exact = true;
    for i in 0..space.dim() {
        if space.power(i) == 0 {
            t.comps[0].insert(vec![i], unit(i));
        }
    }
    t
}

/// A random degree −1 coderivation with only arity-two components on ε⁰ words, each
/// present with probability 0.3 and with coefficients in `−3..=3`.
pub fn random_eta<R: rand::Rng>(space: &ShiftedSpace, rng: &mut R) -> TaylorTower {
    let mut eta = TaylorTower::new(TowerKind::Coderivation, -1, 2, space.clone(), space.clone());
    for w in words_of_length(space, 2, true) {
        if !rng.gen_bool(0.3) {
            continue;
        }
        let d: i64 = w.iter().map(|&i| space.degree(i)).sum::<i64>() - 1;
        let mut v = SparseVec::new();
        for i in 0..space.dim() {
            if space.degree(i) == d && space.power(i) == 0 && rng.gen_bool(0.5) {
                add_entry(&mut v, i, crate::rational::q(rng.gen_range(-3..=3)));
            }
        }
        insert_component(&mut eta, w, v);
    }
    eta
}
