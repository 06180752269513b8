use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::tower::*;
use super::twist::*;
use super::words::*;
use crate::dgla::{check_dgla_axioms, extend_scalars, DGLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{CochainComplex, GradedLinearMap, GradedSpace};
use num_traits::One;

use crate::rational::{q, sign};
use crate::sparse::{add_scaled, scaled, sub, unit, Echelon, SparseVec};

/// A set of named degree −1 derivations `i_v` of a DG-Lie algebra.
#[derive(Clone, Debug)]
pub struct ContractionAction {
    pub algebra: DGLieAlgebra,
    pub generators: Vec<(String, GradedLinearMap)>,
}

impl ContractionAction {
    /// Checks that each `i_v` has degree −1 and satisfies
    /// `i_v[a,b] = [i_v a, b] + (−1)^{|a|} [a, i_v b]` on basis pairs.
    pub fn new(algebra: DGLieAlgebra, generators: Vec<(String, GradedLinearMap)>) -> Result<Self> {
        let s = algebra.space().clone();
        for (name, i) in &generators {
            if i.degree != -1 || *i.source != *s || *i.target != *s {
                return Err(Error::Invalid(format!("i_{name} is not a degree -1 endomorphism of the algebra")));
            }
            for a in 0..s.dim() {
                for b in 0..s.dim() {
                    let lhs = i.apply(&algebra.bracket(&unit(a), &unit(b)));
                    let mut rhs = algebra.bracket(i.column(a), &unit(b));
                    add_scaled(&mut rhs, &sign(s.degree(a)), &algebra.bracket(&unit(a), i.column(b)));
                    let defect = sub(&lhs, &rhs);
                    if !defect.is_empty() {
                        return Err(Error::Structure(format!(
                            "i_{name} is not a derivation on ({}, {}): defect {}",
                            s.label(a),
                            s.label(b),
                            s.describe(&defect)
                        )));
                    }
                }
            }
        }
        Ok(ContractionAction { algebra, generators })
    }

    /// Action by zero for each name.
    pub fn trivial(algebra: DGLieAlgebra, names: &[&str]) -> Self {
        let s = algebra.space().clone();
        let generators = names.iter().map(|n| (n.to_string(), GradedLinearMap::zero(s.clone(), s.clone(), -1))).collect();
        ContractionAction { algebra, generators }
    }

    pub fn names(&self) -> Vec<&str> {
        self.generators.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn i_v(&self, k: usize) -> &GradedLinearMap {
        &self.generators[k].1
    }

    /// `L_v = d i_v + i_v d`.
    pub fn l_v(&self, k: usize) -> GradedLinearMap {
        let i = self.i_v(k);
        let d = &self.algebra.complex.d;
        let s = self.algebra.space().clone();
        GradedLinearMap::from_fn(s.clone(), s, 0, |c| {
            let mut v = d.apply(i.column(c));
            add_scaled(&mut v, &q(1), &i.apply(d.column(c)));
            v
        })
        .unwrap()
    }

    /// ε-linear extension to `g ⊗ Q[ε]/ε^N`, laid out as in [`extend_scalars`].
    pub fn extend(&self, order: usize) -> ContractionAction {
        let ext = extend_scalars(&self.algebra, order);
        let s = ext.space().clone();
        let generators = self
            .generators
            .iter()
            .map(|(n, i)| {
                let m = GradedLinearMap::from_fn(s.clone(), s.clone(), -1, |idx| {
                    i.column(idx / order).iter().map(|(k, x)| (k * order + idx % order, x.clone())).collect()
                })
                .unwrap();
                (n.clone(), m)
            })
            .collect();
        ContractionAction { algebra: ext, generators }
    }

    /// The coderivation `ĩ_v` on `S(g[1])` with `∂¹ĩ_v = j_v = −i_v` and no higher
    /// components. `space` must be the shift of the action's algebra.
    pub fn i_tilde(&self, k: usize, space: &ShiftedSpace) -> Result<TaylorTower> {
        self.check_space(space)?;
        let mut t = TaylorTower::new(TowerKind::Coderivation, -1, 1, space.clone(), space.clone());
        t.exact = true;
        for c in 0..space.dim() {
            if space.power(c) == 0 {
                t.set(&[c], scaled(&q(-1), self.i_v(k).column(c)))?;
            }
        }
        Ok(t)
    }

    fn check_space(&self, space: &ShiftedSpace) -> Result<()> {
        if space.dim() != self.algebra.dim() || (0..space.dim()).any(|i| space.degree(i) != self.algebra.degree(i) - 1) {
            return Err(Error::Invalid("shifted space does not match the acted-on algebra".into()));
        }
        Ok(())
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::Invalid(format!("unknown action generator {name}")))
    }
}

/// Applies the linear component of an arity-one tower to a vector.
fn apply_linear(t: &TaylorTower, v: &SparseVec) -> SparseVec {
    let mut out = SparseVec::new();
    for (&k, x) in v {
        add_scaled(&mut out, x, &t.eval(&[k]));
    }
    out
}

/// `∂ⁿ([Q, ĩ_v] − L̃_v)(w)`, evaluated as `∂ⁿQ(ĩ_v w) + j_v(∂ⁿQ(w)) − [n = 1] L_v(w)`.
pub fn lie_coderivation_identity(q_tower: &TaylorTower, action: &ContractionAction, v: &str, n: usize, w: &[usize]) -> Result<SparseVec> {
    if w.len() != n {
        return Err(Error::Invalid(format!("word has length {}, expected {n}", w.len())));
    }
    let k = action.index(v)?;
    let it = action.i_tilde(k, &q_tower.source)?;
    let moved = apply_coder(&it, &word_elem(w));
    let mut out = q_tower.eval_elem(&moved);
    add_scaled(&mut out, &q(1), &apply_linear(&it, &q_tower.eval(w)));
    if n == 1 {
        out = sub(&out, &action.l_v(k).apply(&unit(w[0])));
    }
    Ok(out)
}

/// The sub-DG-Lie algebra `g^s = {X : i_v X = L_v X = 0 for all v}` together with its
/// inclusion into `g`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub algebra: DGLieAlgebra,
    pub embedding: GradedLinearMap,
}

impl Reduction {
    pub fn basis(&self) -> &[SparseVec] {
        self.embedding.columns()
    }
}

/// Kernel of `X ↦ (i_v X, L_v X)_v`, degree by degree, with closure under `d` and the
/// bracket checked by solving for structure constants in the new basis.
pub fn reduce_by_action(action: &ContractionAction) -> Result<Reduction> {
    let g = &action.algebra;
    let s = g.space().clone();
    let n = s.dim();
    let maps: Vec<GradedLinearMap> = (0..action.generators.len())
        .flat_map(|k| [action.i_v(k).clone(), action.l_v(k)])
        .collect();
    let mut basis: Vec<SparseVec> = Vec::new();
    let mut sub_space = GradedSpace::empty();
    for deg in s.degrees().collect::<Vec<_>>() {
        let idx = s.basis_in(deg).to_vec();
        let mut ech = Echelon::tracking();
        for &c in &idx {
            let mut col = SparseVec::new();
            for (m, f) in maps.iter().enumerate() {
                for (r, x) in f.column(c) {
                    col.insert(m * n + r, x.clone());
                }
            }
            if let Err(rel) = ech.insert_or_relation(col) {
                basis.push(rel.iter().map(|(&p, x)| (idx[p], x.clone())).collect());
            }
        }
    }
    basis.sort_by_key(|v: &SparseVec| v.keys().next().copied());
    for v in &basis {
        let deg = s.degree_of(v).expect("kernel vectors are homogeneous");
        let label = match v.iter().next() {
            Some((&k, x)) if v.len() == 1 && x.is_one() => s.label(k).to_string(),
            _ => s.describe(v),
        };
        sub_space.push(deg, label)?;
    }
    let sub_space = Arc::new(sub_space);
    let mut span = Echelon::tracking();
    for b in &basis {
        span.insert(b.clone());
    }
    let express = |v: &SparseVec, what: &str| -> Result<SparseVec> {
        span.express(v).ok_or_else(|| Error::Structure(format!("invariants not closed under {what}: {}", s.describe(v))))
    };
    let mut d_cols = Vec::with_capacity(basis.len());
    for b in &basis {
        d_cols.push(express(&g.d(b), "d")?);
    }
    let d = GradedLinearMap::new(sub_space.clone(), sub_space.clone(), 1, d_cols)?;
    let mut bracket = BTreeMap::new();
    for (a, x) in basis.iter().enumerate() {
        for (b, y) in basis.iter().enumerate() {
            let c = express(&g.bracket(x, y), "the bracket")?;
            if !c.is_empty() {
                bracket.insert((a, b), c);
            }
        }
    }
    let algebra = DGLieAlgebra::new(CochainComplex::new(sub_space.clone(), d)?, bracket)?;
    let embedding = GradedLinearMap::new(sub_space, s, 0, basis)?;
    Ok(Reduction { algebra, embedding })
}

fn check_same_names(a: &ContractionAction, b: &ContractionAction) -> Result<()> {
    if a.names() != b.names() {
        return Err(Error::Invalid(format!("actions differ: {:?} vs {:?}", a.names(), b.names())));
    }
    Ok(())
}

/// First word and generator where `∂ⁿψ(ĩ_v w) ≠ j_v(∂ⁿψ(w))`, over ε⁰ words of length
/// up to `arity`.
pub fn commutation_witness(psi: &TaylorTower, src: &ContractionAction, tgt: &ContractionAction, arity: usize) -> Result<Option<String>> {
    check_same_names(src, tgt)?;
    for k in 0..src.generators.len() {
        let ig = src.i_tilde(k, &psi.source)?;
        let ih = tgt.i_tilde(k, &psi.target)?;
        for n in 1..=arity {
            for w in words_of_length(&psi.source, n, true) {
                let lhs = psi.eval_elem(&apply_coder(&ig, &word_elem(&w)));
                let rhs = apply_linear(&ih, &psi.eval(&w));
                let diff = sub(&lhs, &rhs);
                if !diff.is_empty() {
                    return Ok(Some(format!(
                        "[ĩ_{}, ψ] on {} = {}",
                        src.generators[k].0,
                        psi.source.describe_word(&w),
                        psi.target.describe(&diff)
                    )));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct Descent {
    pub source: Reduction,
    pub target: Reduction,
    /// `ψ` restricted to `S(g^s[1]) → h^s[1]`.
    pub tower: TaylorTower,
    pub report: DescentReport,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct DescentReport {
    pub arity_window: usize,
    pub source_dim: usize,
    pub target_dim: usize,
    pub lands_in_invariants: bool,
    pub restricted_morphism: bool,
    pub witnesses: Vec<String>,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.lands_in_invariants && self.restricted_morphism
    }
}

/// Restricts `ψ: g → h` to the reductions after checking `[ĩ_v, ψ] = 0` on the window.
/// The restriction is checked to land in `h^s` and to be an L∞-morphism between the
/// reduced algebras.
pub fn descend_morphism(psi: &TaylorTower, src: &ContractionAction, tgt: &ContractionAction, arity: usize) -> Result<Descent> {
    if psi.kind != TowerKind::Morphism || !psi.covers(arity) {
        return Err(Error::Invalid(format!("need a morphism tower covering arity {arity}")));
    }
    if let Some(w) = commutation_witness(psi, src, tgt, arity)? {
        return Err(Error::Hypothesis(w));
    }
    let rg = reduce_by_action(src)?;
    let rh = reduce_by_action(tgt)?;
    let mut report = DescentReport {
        arity_window: arity,
        source_dim: rg.algebra.dim(),
        target_dim: rh.algebra.dim(),
        lands_in_invariants: true,
        restricted_morphism: true,
        witnesses: Vec::new(),
    };
    let mut span = Echelon::tracking();
    for b in rh.basis() {
        span.insert(b.clone());
    }
    let s_red = ShiftedSpace::shift_of(rg.algebra.space());
    let t_red = ShiftedSpace::shift_of(rh.algebra.space());
    let mut tower = TaylorTower::morphism(s_red.clone(), t_red.clone(), arity);
    tower.exact = false;
    for n in 1..=arity {
        for w in words_of_length(&s_red, n, true) {
            let mut prod = word_elem(&[]);
            for &c in &w {
                prod = multiply(&psi.source, &prod, &vector_elem(&rg.basis()[c]));
            }
            let val = psi.eval_elem(&prod);
            match span.express(&val) {
                Some(c) => tower.set(&w, c)?,
                None => {
                    report.lands_in_invariants = false;
                    report.witnesses.push(format!(
                        "ψ({}) = {} is not invariant",
                        s_red.describe_word(&w),
                        psi.target.describe(&val)
                    ));
                }
            }
        }
    }
    if report.lands_in_invariants {
        let qg = from_dgla_unchecked(&rg.algebra, 1);
        let qh = from_dgla_unchecked(&rh.algebra, 1);
        for n in 1..=arity {
            for w in words_of_length(&s_red, n, true) {
                let m = morphism_defect(&tower, &qg, &qh, n, &w)?;
                if !m.is_empty() {
                    report.restricted_morphism = false;
                    report.witnesses.push(format!("restricted defect on {}: {}", s_red.describe_word(&w), t_red.describe(&m)));
                }
            }
        }
    } else {
        report.restricted_morphism = false;
    }
    Ok(Descent { source: rg, target: rh, tower, report })
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct TwistedCompatibility {
    pub arity_window: usize,
    /// `∂ⁱψ(i_v ω · γ) = 0` for `i ≥ 2` on all ε⁰ words γ.
    pub hypothesis: bool,
    /// `[ĩ_v, ψ_ω] = 0` on the window; only evaluated when the hypothesis holds.
    pub compatible: Option<bool>,
    pub witnesses: Vec<String>,
}

impl TwistedCompatibility {
    pub fn passed(&self) -> bool {
        self.hypothesis && self.compatible == Some(true)
    }
}

/// Checks the contraction hypothesis on `ω` and, if it holds, that the twisted morphism
/// still commutes with every `ĩ_v`. Towers and actions must live on ε-extended spaces.
pub fn twisted_compatibility(
    psi: &TaylorTower,
    qg: &TaylorTower,
    qh: &TaylorTower,
    src: &ContractionAction,
    tgt: &ContractionAction,
    omega: &SparseVec,
    arity: usize,
) -> Result<TwistedCompatibility> {
    check_same_names(src, tgt)?;
    src.check_space(&psi.source)?;
    tgt.check_space(&psi.target)?;
    let mut rep = TwistedCompatibility { arity_window: arity, ..Default::default() };
    let top = arity + omega_powers(&psi.source, omega).len() - 1;
    rep.hypothesis = true;
    for (name, i) in &src.generators {
        let iw = vector_elem(&i.apply(omega));
        for len in 1..top {
            for gamma in words_of_length(&psi.source, len, true) {
                let val = psi.eval_elem(&multiply(&psi.source, &iw, &word_elem(&gamma)));
                if !val.is_empty() {
                    rep.hypothesis = false;
                    rep.witnesses.push(format!(
                        "∂^{}ψ(i_{name}ω · {}) = {}",
                        len + 1,
                        psi.source.describe_word(&gamma),
                        psi.target.describe(&val)
                    ));
                }
            }
        }
    }
    if rep.hypothesis {
        let r = twist(qg, qh, psi, omega, arity)?;
        let w = commutation_witness(&r.psi, src, tgt, arity)?;
        rep.compatible = Some(w.is_none());
        rep.witnesses.extend(w);
    }
    Ok(rep)
}

/// `[ψ¹γ, ∂^qψ(α)] − Σ_j ∂^qψ(α₁⋯[γ,α_j]⋯α_q)` for `γ` of degree 0 in `g`.
/// Vanishes whenever ψ is an L∞-morphism between the DG-Lie algebras, `dγ = 0`, and
/// the components of arity ≥ 2 vanish on words containing `γ`.
pub fn equivariance_defect(psi: &TaylorTower, g: &DGLieAlgebra, h: &DGLieAlgebra, gamma: usize, alpha: &[usize]) -> Result<SparseVec> {
    if g.degree(gamma) != 0 {
        return Err(Error::Invalid(format!("{} does not have degree 0", g.space().label(gamma))));
    }
    let mut out = h.bracket(&psi.eval(&[gamma]), &psi.eval(alpha));
    for j in 0..alpha.len() {
        let mut prod = word_elem(&[]);
        for (p, &a) in alpha.iter().enumerate() {
            let v = if p == j { g.bracket(&unit(gamma), &unit(a)) } else { unit(a) };
            prod = multiply(&psi.source, &prod, &vector_elem(&v));
        }
        out = sub(&out, &psi.eval_elem(&prod));
    }
    Ok(out)
}

/// Whether every component of arity 2..=arity vanishes on ε⁰ words containing `gamma`.
pub fn vanishes_on(psi: &TaylorTower, gamma: usize, arity: usize) -> bool {
    (1..arity).all(|len| {
        words_of_length(&psi.source, len, true).iter().all(|w| {
            let mut seq = vec![gamma];
            seq.extend_from_slice(w);
            match canonical(&psi.source, &seq) {
                Some((c, _)) => psi.eval(&c).is_empty(),
                None => true,
            }
        })
    })
}

/// Convenience: axioms of a reduction, for reports.
pub fn reduction_axioms_hold(r: &Reduction) -> bool {
    check_dgla_axioms(&r.algebra).passed()
}

impl ContractionAction {
    /// The coderivation `L̃_v` with `∂¹L̃_v = L_v` and no higher components.
    pub fn l_tilde(&self, k: usize, space: &ShiftedSpace) -> Result<TaylorTower> {
        self.check_space(space)?;
        let l = self.l_v(k);
        let mut t = TaylorTower::new(TowerKind::Coderivation, 0, 1, space.clone(), space.clone());
        t.exact = true;
        for c in 0..space.dim() {
            if space.power(c) == 0 {
                t.set(&[c], l.column(c).clone())?;
            }
        }
        Ok(t)
    }
}

/// A random arity-two coderivation `η` of degree −1 with `[ĩ_v, η] = [L̃_v, η] = 0` for
/// every `v`, so that `exp([Q, η])` commutes with the action. Found by solving the
/// linear constraints on the components of `η` exactly.
pub fn random_equivariant_eta<R: rand::Rng>(space: &ShiftedSpace, action: &ContractionAction, rng: &mut R) -> Result<TaylorTower> {
    let words = words_of_length(space, 2, true);
    let mut tildes = Vec::new();
    for k in 0..action.generators.len() {
        tildes.push((action.i_tilde(k, space)?, action.l_tilde(k, space)?));
    }
    let moved: Vec<Vec<(SymElem, SymElem)>> = tildes
        .iter()
        .map(|(it, lt)| words.iter().map(|w| (apply_coder(it, &word_elem(w)), apply_coder(lt, &word_elem(w)))).collect())
        .collect();
    let n = space.dim();
    let rows = 2 * words.len() * n;
    let mut unknowns = Vec::new();
    let mut ech = Echelon::tracking();
    let mut kernel = Vec::new();
    for w in &words {
        let deg = space.degree(w[0]) + space.degree(w[1]) - 1;
        for k in (0..n).filter(|&k| space.degree(k) == deg && space.power(k) == 0) {
            let mut eta = TaylorTower::new(TowerKind::Coderivation, -1, 2, space.clone(), space.clone());
            eta.set(w, unit(k))?;
            let mut col = SparseVec::new();
            for (v, (it, lt)) in tildes.iter().enumerate() {
                for (p, wp) in words.iter().enumerate() {
                    let (mi, ml) = &moved[v][p];
                    let e = eta.eval(wp);
                    let mut c1 = apply_linear(it, &e);
                    add_scaled(&mut c1, &q(1), &eta.eval_elem(mi));
                    let c2 = sub(&apply_linear(lt, &e), &eta.eval_elem(ml));
                    let base = v * rows + 2 * p * n;
                    for (r, x) in c1 {
                        col.insert(base + r, x);
                    }
                    for (r, x) in c2 {
                        col.insert(base + n + r, x);
                    }
                }
            }
            unknowns.push((w.clone(), k));
            if let Err(rel) = ech.insert_or_relation(col) {
                kernel.push(rel);
            }
        }
    }
    let mut eta = TaylorTower::new(TowerKind::Coderivation, -1, 2, space.clone(), space.clone());
    let mut total = SparseVec::new();
    for kv in &kernel {
        add_scaled(&mut total, &q(rng.gen_range(-2..=2)), kv);
    }
    let mut comps: BTreeMap<Word, SparseVec> = BTreeMap::new();
    for (u, x) in total {
        let (w, k) = &unknowns[u];
        add_scaled(comps.entry(w.clone()).or_default(), &x, &unit(*k));
    }
    for (w, v) in comps {
        eta.set(&w, v)?;
    }
    Ok(eta)
}
