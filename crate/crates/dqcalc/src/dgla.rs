//! DG-Lie algebras given by structure constants, Maurer-Cartan elements over
//! `Q[ε]/ε^N`, the gauge action and twisting of the differential.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CochainComplex, GradedLinearMap, GradedSpace};
use crate::rational::{inv_factorial, q, qf, sign, Q};
use crate::sparse::{add_entry, add_scaled, scaled, Echelon, SparseVec};

#[derive(Clone, Debug, PartialEq)]
pub struct DGLieAlgebra {
    pub complex: CochainComplex,
    bracket: BTreeMap<(usize, usize), SparseVec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Axiom {
    DSquared,
    Antisymmetry,
    Jacobi,
    Leibniz,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomFailure {
    pub axiom: Axiom,
    pub basis: Vec<String>,
    pub defect: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub failures: Vec<AxiomFailure>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl DGLieAlgebra {
    /// `bracket` lists `[e_i, e_j]` for ordered pairs; absent pairs bracket to zero.
    /// Only degree compatibility is enforced here; use [`check_dgla_axioms`] for the rest.
    pub fn new(complex: CochainComplex, bracket: BTreeMap<(usize, usize), SparseVec>) -> Result<Self> {
        let s = &complex.space;
        let mut clean = BTreeMap::new();
        for ((i, j), v) in bracket {
            if i >= s.dim() || j >= s.dim() {
                return Err(Error::Invalid(format!("bracket index ({i},{j}) out of range")));
            }
            for &k in v.keys() {
                if k >= s.dim() || s.degree(k) != s.degree(i) + s.degree(j) {
                    return Err(Error::Invalid(format!(
                        "[{}, {}] has a component outside degree {}",
                        s.label(i),
                        s.label(j),
                        s.degree(i) + s.degree(j)
                    )));
                }
            }
            if !v.is_empty() {
                clean.insert((i, j), v);
            }
        }
        Ok(DGLieAlgebra { complex, bracket: clean })
    }

    /// Abelian algebra with zero differential on the given space.
    pub fn abelian(space: Arc<GradedSpace>) -> Self {
        let d = GradedLinearMap::zero(space.clone(), space.clone(), 1);
        DGLieAlgebra { complex: CochainComplex::new_unchecked(space, d).unwrap(), bracket: BTreeMap::new() }
    }

    pub fn space(&self) -> &Arc<GradedSpace> {
        &self.complex.space
    }

    pub fn dim(&self) -> usize {
        self.space().dim()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.space().degree(i)
    }

    pub fn d(&self, v: &SparseVec) -> SparseVec {
        self.complex.d.apply(v)
    }

    pub fn basis_bracket(&self, i: usize, j: usize) -> Option<&SparseVec> {
        self.bracket.get(&(i, j))
    }

    pub fn bracket_entries(&self) -> &BTreeMap<(usize, usize), SparseVec> {
        &self.bracket
    }

    pub fn is_abelian(&self) -> bool {
        self.bracket.is_empty()
    }

    pub fn bracket(&self, a: &SparseVec, b: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, x) in a {
            for (j, y) in b {
                if let Some(v) = self.bracket.get(&(*i, *j)) {
                    add_scaled(&mut out, &(x * y), v);
                }
            }
        }
        out
    }

    /// Same algebra with a different differential (bracket unchanged).
    pub fn with_differential(&self, d: GradedLinearMap) -> Result<Self> {
        let complex = CochainComplex::new_unchecked(self.space().clone(), d)?;
        Ok(DGLieAlgebra { complex, bracket: self.bracket.clone() })
    }
}

/// Checks `d² = 0`, graded antisymmetry, graded Jacobi and the graded Leibniz rule
/// on all basis pairs and triples.
pub fn check_dgla_axioms(g: &DGLieAlgebra) -> AxiomReport {
    let s = g.space().clone();
    let n = g.dim();
    let e = crate::sparse::unit;
    let mut failures = vec![];
    let mut fail = |axiom, idx: &[usize], v: &SparseVec| {
        failures.push(AxiomFailure {
            axiom,
            basis: idx.iter().map(|&i| s.label(i).to_string()).collect(),
            defect: s.describe(v),
        })
    };
    for i in 0..n {
        let dd = g.d(&g.d(&e(i)));
        if !dd.is_empty() {
            fail(Axiom::DSquared, &[i], &dd);
        }
    }
    for i in 0..n {
        for j in i..n {
            let (di, dj) = (g.degree(i), g.degree(j));
            let mut v = g.bracket(&e(i), &e(j));
            add_scaled(&mut v, &sign(di * dj), &g.bracket(&e(j), &e(i)));
            if !v.is_empty() {
                fail(Axiom::Antisymmetry, &[i, j], &v);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let (di, dj) = (g.degree(i), g.degree(j));
            // d[a,b] - [da,b] - (-1)^{|a|}[a,db]
            let mut v = g.d(&g.bracket(&e(i), &e(j)));
            add_scaled(&mut v, &-q(1), &g.bracket(&g.d(&e(i)), &e(j)));
            add_scaled(&mut v, &-sign(di), &g.bracket(&e(i), &g.d(&e(j))));
            if !v.is_empty() {
                fail(Axiom::Leibniz, &[i, j], &v);
            }
            let bij = g.bracket(&e(i), &e(j));
            for k in 0..n {
                // [a,[b,c]] - [[a,b],c] - (-1)^{|a||b|}[b,[a,c]]
                let mut v = g.bracket(&e(i), &g.bracket(&e(j), &e(k)));
                add_scaled(&mut v, &-q(1), &g.bracket(&bij, &e(k)));
                add_scaled(&mut v, &-sign(di * dj), &g.bracket(&e(j), &g.bracket(&e(i), &e(k))));
                if !v.is_empty() {
                    fail(Axiom::Jacobi, &[i, j, k], &v);
                }
            }
        }
    }
    AxiomReport { failures }
}

/// An element of `g ⊗ Q[ε]/ε^N`: `terms[j]` is the coefficient of `ε^j`, `0 ≤ j < N`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsSeries {
    pub order: usize,
    pub terms: Vec<SparseVec>,
}

impl EpsSeries {
    pub fn zero(order: usize) -> Self {
        assert!(order >= 1, "nilpotency order must be positive");
        EpsSeries { order, terms: vec![SparseVec::new(); order] }
    }

    pub fn from_terms(order: usize, terms: Vec<SparseVec>) -> Result<Self> {
        if terms.len() > order {
            return Err(Error::Invalid(format!("{} ε-terms exceed order {order}", terms.len())));
        }
        let mut s = Self::zero(order);
        for (j, t) in terms.into_iter().enumerate() {
            s.terms[j] = t;
        }
        Ok(s)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.is_empty())
    }

    pub fn add(&self, other: &EpsSeries) -> EpsSeries {
        let mut out = self.clone();
        out.add_scaled(&q(1), other);
        out
    }

    pub fn add_scaled(&mut self, c: &Q, other: &EpsSeries) {
        for (a, b) in self.terms.iter_mut().zip(&other.terms) {
            add_scaled(a, c, b);
        }
    }

    pub fn scale(&self, c: &Q) -> EpsSeries {
        EpsSeries { order: self.order, terms: self.terms.iter().map(|t| scaled(c, t)).collect() }
    }

    pub fn map(&self, f: impl Fn(&SparseVec) -> SparseVec) -> EpsSeries {
        EpsSeries { order: self.order, terms: self.terms.iter().map(f).collect() }
    }

    pub fn bracket(&self, g: &DGLieAlgebra, other: &EpsSeries) -> EpsSeries {
        let mut out = EpsSeries::zero(self.order);
        for (i, a) in self.terms.iter().enumerate() {
            for (j, b) in other.terms.iter().enumerate() {
                if i + j < self.order && !a.is_empty() && !b.is_empty() {
                    let v = g.bracket(a, b);
                    add_scaled(&mut out.terms[i + j], &q(1), &v);
                }
            }
        }
        out
    }

    pub fn d(&self, g: &DGLieAlgebra) -> EpsSeries {
        self.map(|t| g.d(t))
    }

    /// Lowest power of ε with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.terms.iter().position(|t| !t.is_empty())
    }

    fn homogeneous_degree(&self, g: &DGLieAlgebra) -> Option<Option<i64>> {
        let mut deg = None;
        for t in &self.terms {
            if t.is_empty() {
                continue;
            }
            let d = g.space().degree_of(t)?;
            if deg.is_some_and(|e| e != d) {
                return None;
            }
            deg = Some(d);
        }
        Some(deg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NilpotentCoefficients {
    pub order: usize,
}

/// A degree-1 element of `m ⊗ g`, stored as its coefficients of `ε^1 … ε^{N-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MCElement {
    pub order: usize,
    pub coeffs: Vec<SparseVec>,
}

impl MCElement {
    pub fn new(g: &DGLieAlgebra, order: usize, coeffs: Vec<SparseVec>) -> Result<Self> {
        if order < 1 || coeffs.len() != order - 1 {
            return Err(Error::Invalid(format!("expected {} ε-coefficients", order.saturating_sub(1))));
        }
        for c in &coeffs {
            if c.keys().any(|&k| k >= g.dim() || g.degree(k) != 1) {
                return Err(Error::Invalid("Maurer-Cartan coefficients must have degree 1".into()));
            }
        }
        Ok(MCElement { order, coeffs })
    }

    pub fn zero(order: usize) -> Self {
        MCElement { order, coeffs: vec![SparseVec::new(); order.saturating_sub(1)] }
    }

    pub fn series(&self) -> EpsSeries {
        let mut s = EpsSeries::zero(self.order);
        for (j, c) in self.coeffs.iter().enumerate() {
            s.terms[j + 1] = c.clone();
        }
        s
    }

    pub fn from_series(g: &DGLieAlgebra, s: &EpsSeries) -> Result<Self> {
        if !s.terms[0].is_empty() {
            return Err(Error::Invalid("element has an ε⁰ component".into()));
        }
        MCElement::new(g, s.order, s.terms[1..].to_vec())
    }
}

/// `dπ + ½[π,π]`, truncated at `ε^N`.
pub fn mc_residual(g: &DGLieAlgebra, pi: &MCElement) -> EpsSeries {
    let p = pi.series();
    let mut r = p.d(g);
    r.add_scaled(&qf(1, 2), &p.bracket(g, &p));
    r
}

/// `π ↦ e^{ad u}π − Σ_{k≥0} (ad u)^k(du)/(k+1)!`, finite because `u ∈ m ⊗ g₀`.
pub fn gauge_transform(g: &DGLieAlgebra, u: &EpsSeries, pi: &MCElement) -> Result<MCElement> {
    if u.order != pi.order {
        return Err(Error::Invalid("gauge parameter and element have different ε-orders".into()));
    }
    if !u.terms[0].is_empty() {
        return Err(Error::Invalid("gauge parameter has an ε⁰ component".into()));
    }
    match u.homogeneous_degree(g) {
        Some(None) | Some(Some(0)) => {}
        _ => return Err(Error::Invalid("gauge parameter must have degree 0".into())),
    }
    let n = u.order;
    let mut out = EpsSeries::zero(n);
    let mut term = pi.series();
    for k in 0..n {
        out.add_scaled(&inv_factorial(k), &term);
        term = u.bracket(g, &term);
    }
    let mut term = u.d(g);
    for k in 0..n {
        out.add_scaled(&-inv_factorial(k + 1), &term);
        term = u.bracket(g, &term);
    }
    MCElement::from_series(g, &out)
}

/// Label of the basis vector `e ⊗ ε^j` in a scalar extension.
pub fn eps_label(label: &str, j: usize) -> String {
    if j == 0 {
        label.to_string()
    } else {
        format!("{label}*eps^{j}")
    }
}

/// `g ⊗ Q[ε]/ε^N` as a DG-Lie algebra over Q; basis vector `e_i ⊗ ε^j` has index `i*N + j`.
pub fn extend_scalars(g: &DGLieAlgebra, order: usize) -> DGLieAlgebra {
    let s = g.space();
    let mut ext = GradedSpace::empty();
    for i in 0..s.dim() {
        for j in 0..order {
            ext.push(s.degree(i), eps_label(s.label(i), j)).unwrap();
        }
    }
    let ext = Arc::new(ext);
    let lift = |v: &SparseVec, j: usize| -> SparseVec { v.iter().map(|(k, x)| (k * order + j, x.clone())).collect() };
    let d = GradedLinearMap::from_fn(ext.clone(), ext.clone(), 1, |idx| lift(g.complex.d.column(idx / order), idx % order)).unwrap();
    let mut bracket = BTreeMap::new();
    for (&(a, b), v) in g.bracket_entries() {
        for ja in 0..order {
            for jb in 0..order - ja {
                bracket.insert((a * order + ja, b * order + jb), lift(v, ja + jb));
            }
        }
    }
    DGLieAlgebra { complex: CochainComplex::new_unchecked(ext, d).unwrap(), bracket }
}

pub fn series_to_ext(s: &EpsSeries) -> SparseVec {
    let mut out = SparseVec::new();
    for (j, t) in s.terms.iter().enumerate() {
        for (k, x) in t {
            add_entry(&mut out, k * s.order + j, x.clone());
        }
    }
    out
}

pub fn ext_to_series(v: &SparseVec, order: usize) -> EpsSeries {
    let mut s = EpsSeries::zero(order);
    for (idx, x) in v {
        add_entry(&mut s.terms[idx % order], idx / order, x.clone());
    }
    s
}

/// The twisted algebra `g ⊗ Q[ε]/ε^N` with `d_ω = d + [ω,−]` and the same bracket.
pub fn twist_dgla(g: &DGLieAlgebra, omega: &MCElement) -> Result<DGLieAlgebra> {
    let r = mc_residual(g, omega);
    if !r.is_zero() {
        let ext = extend_scalars(g, omega.order);
        return Err(Error::NotMaurerCartan(ext.space().describe(&series_to_ext(&r))));
    }
    let ext = extend_scalars(g, omega.order);
    let w = series_to_ext(&omega.series());
    let s = ext.space().clone();
    let d = GradedLinearMap::from_fn(s.clone(), s.clone(), 1, |i| {
        let mut v = ext.complex.d.column(i).clone();
        add_scaled(&mut v, &q(1), &ext.bracket(&w, &crate::sparse::unit(i)));
        v
    })?;
    let tw = ext.with_differential(d)?;
    tw.complex.check_d_squared(None)?;
    Ok(tw)
}

/// Solves the Maurer-Cartan equation order by order starting from a random cocycle,
/// adding random cocycles at each order. Returns `None` if an obstruction is met.
pub fn random_mc<R: Rng>(g: &DGLieAlgebra, order: usize, rng: &mut R) -> Option<MCElement> {
    let s = g.space();
    let deg1 = s.basis_in(1).to_vec();
    let mut d_images = Echelon::tracking();
    for &i in &deg1 {
        d_images.insert(g.complex.d.column(i).clone());
    }
    let (cocycles, _) = crate::linalg::kernel_image_raw(&g.complex.d, 1);
    let random_cocycle = |rng: &mut R| {
        let mut v = SparseVec::new();
        for z in &cocycles {
            add_scaled(&mut v, &q(rng.gen_range(-2..=2)), z);
        }
        v
    };
    let mut series = EpsSeries::zero(order);
    for k in 1..order {
        // Coefficient of ε^k in ½[π,π] from already fixed lower terms.
        let mut rhs = SparseVec::new();
        for i in 1..k {
            add_scaled(&mut rhs, &qf(1, 2), &g.bracket(&series.terms[i], &series.terms[k - i]));
        }
        let target: SparseVec = scaled(&q(-1), &rhs);
        let coords = d_images.express(&target)?;
        let mut t = SparseVec::new();
        for (c, x) in coords {
            add_entry(&mut t, deg1[c], x);
        }
        add_scaled(&mut t, &q(1), &random_cocycle(rng));
        series.terms[k] = t;
    }
    let mc = MCElement::from_series(g, &series).ok()?;
    mc_residual(g, &mc).is_zero().then_some(mc)
}

pub fn random_gauge_parameter<R: Rng>(g: &DGLieAlgebra, order: usize, rng: &mut R) -> EpsSeries {
    let mut u = EpsSeries::zero(order);
    for j in 1..order {
        for &i in g.space().basis_in(0) {
            let c = rng.gen_range(-2..=2);
            if c != 0 {
                u.terms[j].insert(i, q(c));
            }
        }
    }
    u
}

impl EpsSeries {
    pub fn describe(&self, g: &DGLieAlgebra) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_empty())
            .map(|(j, t)| format!("eps^{j}*({})", g.space().describe(t)))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}
