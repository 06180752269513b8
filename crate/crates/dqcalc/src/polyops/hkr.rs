use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::brackets::*;
use super::types::*;
use super::windows::subsets;
use crate::error::{Error, Result};
use crate::linalg::{cohomology_raw, CochainComplex, GradedLinearMap, GradedSpace};
use crate::sparse::SparseVec;

/// Internal degrees `min_w..=max_w`, total order `≤ order_cap`, coefficient degree
/// `≤ coeff_cap`. The Hochschild differential preserves both the coefficient monomial
/// and the total order, so each cap removes whole direct summands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InternalDegreeWindow {
    pub min_w: i64,
    pub max_w: i64,
    pub order_cap: u32,
    pub coeff_cap: u32,
}

impl InternalDegreeWindow {
    /// Caps large enough that every polyvector of arity `≤ arity_max` in the internal
    /// degree range is represented.
    pub fn for_arities(min_w: i64, max_w: i64, arity_max: usize) -> Self {
        InternalDegreeWindow { min_w, max_w, order_cap: arity_max as u32, coeff_cap: (max_w + arity_max as i64).max(0) as u32 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HkrRow {
    pub arity: usize,
    pub internal_degree: i64,
    pub cochain_dim: usize,
    pub cohomology_dim: usize,
    pub tpoly_dim: usize,
    pub hkr_rank: usize,
    pub hkr_cocycles: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HkrReport {
    pub dim: usize,
    pub window: InternalDegreeWindow,
    pub rows: Vec<HkrRow>,
    pub passed: bool,
}

fn op_basis(d: usize, n: usize, w: i64, win: &InternalDegreeWindow) -> Vec<(Monomial, Vec<MultiIndex>)> {
    let mut out = Vec::new();
    for k in 0..=win.order_cap {
        let deg = w + k as i64;
        if deg < 0 || deg > win.coeff_cap as i64 {
            continue;
        }
        for t in multi_index_tuples(d, n, k) {
            for m in monomials_of_degree(d, deg as u32) {
                out.push((m, t.clone()));
            }
        }
    }
    out
}

/// Hochschild complex in arities `n−1, n, n+1` at internal degree `w`, graded by arity.
fn windowed_complex(d: usize, n: usize, w: i64, win: &InternalDegreeWindow) -> Result<(CochainComplex, BTreeMap<(Monomial, Vec<MultiIndex>), usize>)> {
    let mut space = GradedSpace::empty();
    let mut index = BTreeMap::new();
    let lo = n.saturating_sub(1);
    for a in lo..=n + 1 {
        for key in op_basis(d, a, w, win) {
            let i = space.push(a as i64, op_label(&key.0, &key.1))?;
            index.insert(key, i);
        }
    }
    let space = Arc::new(space);
    let keys: Vec<_> = {
        let mut v: Vec<_> = index.iter().map(|(k, &i)| (i, k.clone())).collect();
        v.sort();
        v.into_iter().map(|(_, k)| k).collect()
    };
    let mut cols = Vec::with_capacity(keys.len());
    for (m, alphas) in &keys {
        let mut col = SparseVec::new();
        if alphas.len() <= n {
            let img = hochschild_differential(&PolyDiffOp::term(d, m.clone(), alphas.clone(), crate::rational::one()));
            for (k, x) in img.terms {
                let Some(&i) = index.get(&k) else {
                    return Err(Error::Structure(format!("window not closed under d_H: {} is missing", op_label(&k.0, &k.1))));
                };
                col.insert(i, x);
            }
        }
        cols.push(col);
    }
    let dmap = GradedLinearMap::new(space.clone(), space.clone(), 1, cols)?;
    Ok((CochainComplex::new(space, dmap)?, index))
}

/// For each arity and internal degree: `dim H` of the windowed Hochschild complex, the
/// dimension of the matching polyvector component, and whether HKR images of the
/// polyvector basis are cocycles spanning the cohomology.
pub fn hkr_quasi_iso_report(d: usize, win: &InternalDegreeWindow, arities: std::ops::RangeInclusive<usize>) -> Result<HkrReport> {
    if d == 0 {
        return Err(Error::Invalid("dimension must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for n in arities {
        for w in win.min_w..=win.max_w {
            let (cx, index) = windowed_complex(d, n, w, win)?;
            let (reps, mut bounds) = cohomology_raw(&cx, n as i64);
            let deg = w + n as i64;
            let mut tpoly = Vec::new();
            if deg >= 0 && deg <= win.coeff_cap as i64 && n as u32 <= win.order_cap {
                for idx in subsets(d, n) {
                    for m in monomials_of_degree(d, deg as u32) {
                        tpoly.push(PolyVectorField::term(d, m, &idx, crate::rational::one()));
                    }
                }
            }
            let mut cocycles = true;
            let before = bounds.rank();
            for p in &tpoly {
                let h = hkr(p);
                let mut v = SparseVec::new();
                for (k, x) in h.terms {
                    match index.get(&k) {
                        Some(&i) => {
                            v.insert(i, x);
                        }
                        None => cocycles = false,
                    }
                }
                if !cx.d.apply(&v).is_empty() {
                    cocycles = false;
                }
                bounds.insert(v);
            }
            let rank = bounds.rank() - before;
            let ok = cocycles && reps.len() == tpoly.len() && rank == reps.len();
            rows.push(HkrRow {
                arity: n,
                internal_degree: w,
                cochain_dim: cx.space.dim_in(n as i64),
                cohomology_dim: reps.len(),
                tpoly_dim: tpoly.len(),
                hkr_rank: rank,
                hkr_cocycles: cocycles,
                ok,
            });
        }
    }
    let passed = rows.iter().all(|r| r.ok);
    Ok(HkrReport { dim: d, window: *win, rows, passed })
}
