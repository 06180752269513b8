use std::collections::BTreeMap;
use std::sync::Arc;

use super::brackets::*;
use super::types::*;
use crate::dgla::DGLieAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{CochainComplex, GradedLinearMap, GradedSpace};
use crate::sparse::SparseVec;

pub type TpolyKey = (Monomial, Vec<usize>);
pub type DpolyKey = (Monomial, Vec<MultiIndex>);

/// A finite basis of polyvectors or polydifferential operators, graded as a DG-Lie
/// algebra: arity `n` sits in degree `n − 1`.
#[derive(Clone, Debug)]
pub struct Window<K: Ord + Clone> {
    pub dim: usize,
    pub items: Vec<K>,
    index: BTreeMap<K, usize>,
    pub space: Arc<GradedSpace>,
}

fn build_window<K: Ord + Clone>(dim: usize, items: Vec<K>, arity: impl Fn(&K) -> usize, label: impl Fn(&K) -> String) -> Window<K> {
    let mut space = GradedSpace::empty();
    let mut index = BTreeMap::new();
    for (i, k) in items.iter().enumerate() {
        space.push(arity(k) as i64 - 1, label(k)).expect("window labels are distinct");
        index.insert(k.clone(), i);
    }
    Window { dim, items, index, space: Arc::new(space) }
}

impl<K: Ord + Clone> Window<K> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn index_of(&self, k: &K) -> Option<usize> {
        self.index.get(k).copied()
    }
}

pub type TpolyWindow = Window<TpolyKey>;
pub type DpolyWindow = Window<DpolyKey>;

impl TpolyWindow {
    /// Polyvectors with coefficient degree `≤ coeff_max`, arity `≤ arity_max`, kept by `keep`.
    pub fn new(dim: usize, coeff_max: u32, arity_max: usize, keep: impl Fn(&Monomial, &[usize]) -> bool) -> Self {
        let mut items = Vec::new();
        for n in 0..=arity_max.min(dim) {
            for idx in subsets(dim, n) {
                for deg in 0..=coeff_max {
                    for m in monomials_of_degree(dim, deg) {
                        if keep(&m, &idx) {
                            items.push((m, idx.clone()));
                        }
                    }
                }
            }
        }
        build_window(dim, items, |k| k.1.len(), |k| pv_label(dim, &k.0, &k.1))
    }

    pub fn element(&self, i: usize) -> PolyVectorField {
        let (m, idx) = &self.items[i];
        PolyVectorField::term(self.dim, m.clone(), idx, one())
    }

    /// Coordinates of `p`; terms outside the window are an error when `strict`,
    /// dropped otherwise.
    pub fn encode(&self, p: &PolyVectorField, strict: bool) -> Result<SparseVec> {
        let mut v = SparseVec::new();
        for (k, x) in &p.terms {
            match self.index_of(k) {
                Some(i) => {
                    v.insert(i, x.clone());
                }
                None if strict => return Err(Error::Structure(format!("{} leaves the window", pv_label(self.dim, &k.0, &k.1)))),
                None => {}
            }
        }
        Ok(v)
    }

    pub fn decode(&self, v: &SparseVec, arity: usize) -> PolyVectorField {
        let mut p = PolyVectorField::zero(self.dim, arity);
        for (&i, x) in v {
            let (m, idx) = &self.items[i];
            assert_eq!(idx.len(), arity, "vector is not homogeneous");
            p.add_term(m.clone(), idx, x.clone());
        }
        p
    }
}

impl DpolyWindow {
    /// Operators with coefficient degree `≤ coeff_max`, arity in `arities`, total order
    /// `≤ order_max`, kept by `keep`.
    pub fn new(
        dim: usize,
        coeff_max: u32,
        arities: std::ops::RangeInclusive<usize>,
        order_max: u32,
        keep: impl Fn(&Monomial, &[MultiIndex]) -> bool,
    ) -> Self {
        let mut items = Vec::new();
        for n in arities {
            for k in 0..=order_max {
                for t in multi_index_tuples(dim, n, k) {
                    for deg in 0..=coeff_max {
                        for m in monomials_of_degree(dim, deg) {
                            if keep(&m, &t) {
                                items.push((m, t.clone()));
                            }
                        }
                    }
                }
            }
        }
        build_window(dim, items, |k| k.1.len(), |k| op_label(&k.0, &k.1))
    }

    pub fn element(&self, i: usize) -> PolyDiffOp {
        let (m, a) = &self.items[i];
        PolyDiffOp::term(self.dim, m.clone(), a.clone(), one())
    }

    pub fn encode(&self, p: &PolyDiffOp, strict: bool) -> Result<SparseVec> {
        let mut v = SparseVec::new();
        for (k, x) in &p.terms {
            match self.index_of(k) {
                Some(i) => {
                    v.insert(i, x.clone());
                }
                None if strict => return Err(Error::Structure(format!("{} leaves the window", op_label(&k.0, &k.1)))),
                None => {}
            }
        }
        Ok(v)
    }

    pub fn decode(&self, v: &SparseVec, arity: usize) -> PolyDiffOp {
        let mut p = PolyDiffOp::zero(self.dim, arity);
        for (&i, x) in v {
            let (m, a) = &self.items[i];
            assert_eq!(a.len(), arity, "vector is not homogeneous");
            p.add_term(m.clone(), a.clone(), x.clone());
        }
        p
    }
}

fn one() -> crate::rational::Q {
    crate::rational::one()
}

/// Increasing index tuples of length `n` from `0..d`.
pub fn subsets(d: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for s in subsets(d, n - 1) {
        let start = s.last().map_or(0, |&l| l + 1);
        for i in start..d {
            let mut t = s.clone();
            t.push(i);
            out.push(t);
        }
    }
    out
}

/// A finite DG-Lie algebra cut out of `T_poly` or `D_poly`, with its basis.
#[derive(Clone, Debug)]
pub struct PolyDgla<K: Ord + Clone> {
    pub algebra: DGLieAlgebra,
    pub window: Window<K>,
}

fn assemble(
    space: Arc<GradedSpace>,
    n: usize,
    d: impl Fn(usize) -> Result<SparseVec>,
    br: impl Fn(usize, usize) -> Result<SparseVec>,
) -> Result<DGLieAlgebra> {
    let cols = (0..n).map(&d).collect::<Result<Vec<_>>>()?;
    let dmap = GradedLinearMap::new(space.clone(), space.clone(), 1, cols)?;
    let mut bracket = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            let v = br(i, j)?;
            if !v.is_empty() {
                bracket.insert((i, j), v);
            }
        }
    }
    DGLieAlgebra::new(CochainComplex::new(space, dmap)?, bracket)
}

/// Polyvectors with affine coefficients (degree ≤ 1), all arities: closed under the
/// Schouten bracket; zero differential.
pub fn tpoly_affine(dim: usize) -> Result<PolyDgla<TpolyKey>> {
    let w = TpolyWindow::new(dim, 1, dim, |_, _| true);
    let algebra = assemble(w.space.clone(), w.len(), |_| Ok(SparseVec::new()), |i, j| {
        w.encode(&schouten_bracket(&w.element(i), &w.element(j)), true)
    })?;
    Ok(PolyDgla { algebra, window: w })
}

/// Polyvectors of internal degree in `[0, k]`: the quotient of the non-negative part by
/// internal degrees above `k`.
pub fn tpoly_graded(dim: usize, k: u32) -> Result<PolyDgla<TpolyKey>> {
    let w = TpolyWindow::new(dim, k + dim as u32, dim, |m, idx| {
        let wd = PolyVectorField::internal_degree(m, idx);
        (0..=k as i64).contains(&wd)
    });
    let algebra = assemble(w.space.clone(), w.len(), |_| Ok(SparseVec::new()), |i, j| {
        w.encode(&schouten_bracket(&w.element(i), &w.element(j)), false)
    })?;
    Ok(PolyDgla { algebra, window: w })
}

/// Constant-coefficient operators of arity `1..=arity_max` and total order `≤ order_max`:
/// a quotient of the constant-coefficient subalgebra, with `d_H = [μ, −]`.
pub fn dpoly_constant(dim: usize, arity_max: usize, order_max: u32) -> Result<PolyDgla<DpolyKey>> {
    let w = DpolyWindow::new(dim, 0, 1..=arity_max, order_max, |_, _| true);
    let algebra = assemble(
        w.space.clone(),
        w.len(),
        |i| w.encode(&hochschild_differential(&w.element(i)), false),
        |i, j| w.encode(&gerstenhaber_bracket(&w.element(i), &w.element(j)), false),
    )?;
    Ok(PolyDgla { algebra, window: w })
}
