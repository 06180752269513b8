use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{overflow, Error, Result};
use crate::linalg::{cohomology, CochainComplex, GradedLinearMap, GradedSpace};
use crate::rational::{q, Q};
use crate::sparse::SparseVec;

/// Monomial in the variables (exponents, first the differentiated variables then the
/// inert ones) and a sorted set of differentials of differentiated variables.
pub type PolyKey = (Vec<u32>, Vec<usize>);
pub type PolyForm = BTreeMap<PolyKey, Q>;

/// Polynomial differential forms `Q[v_1, dv_1, …, v_n, dv_n] ⊗ Q[w_1, …]` where the
/// inert variables `w` have zero differential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormAlgebra {
    pub vars: Vec<String>,
    pub inert: Vec<String>,
}

fn insert(f: &mut PolyForm, k: PolyKey, c: Q) {
    if c.is_zero() {
        return;
    }
    match f.entry(k) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn add_into(acc: &mut PolyForm, c: &Q, f: &PolyForm) {
    for (k, x) in f {
        insert(acc, k.clone(), c * x);
    }
}

fn merge_sign(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut out = a.to_vec();
    let mut odd = false;
    for &x in b {
        if out.contains(&x) {
            return None;
        }
        let pos = out.partition_point(|&y| y < x);
        odd ^= (out.len() - pos) % 2 == 1;
        out.insert(pos, x);
    }
    Some((out, odd))
}

impl FormAlgebra {
    pub fn new(vars: Vec<String>, inert: Vec<String>) -> Self {
        FormAlgebra { vars, inert }
    }

    fn n_exps(&self) -> usize {
        self.vars.len() + self.inert.len()
    }

    pub fn one(&self) -> PolyForm {
        [((vec![0; self.n_exps()], vec![]), Q::one())].into_iter().collect()
    }

    /// Variable number `i` (inert ones follow the differentiated ones).
    pub fn var(&self, i: usize) -> PolyForm {
        let mut e = vec![0; self.n_exps()];
        e[i] = 1;
        [((e, vec![]), Q::one())].into_iter().collect()
    }

    pub fn dvar(&self, i: usize) -> PolyForm {
        [((vec![0; self.n_exps()], vec![i]), Q::one())].into_iter().collect()
    }

    /// Weight: degree in the differentiated variables plus the number of differentials.
    pub fn weight(&self, k: &PolyKey) -> u32 {
        k.0[..self.vars.len()].iter().sum::<u32>() + k.1.len() as u32
    }

    pub fn mul(&self, a: &PolyForm, b: &PolyForm) -> PolyForm {
        let mut out = PolyForm::new();
        for ((ea, da), x) in a {
            for ((eb, db), y) in b {
                let Some((ds, odd)) = merge_sign(da, db) else { continue };
                let e = ea.iter().zip(eb).map(|(p, r)| p + r).collect();
                let c = x * y;
                insert(&mut out, (e, ds), if odd { -c } else { c });
            }
        }
        out
    }

    pub fn d(&self, a: &PolyForm) -> PolyForm {
        let mut out = PolyForm::new();
        for ((e, ds), x) in a {
            for k in 0..self.vars.len() {
                if e[k] == 0 || ds.contains(&k) {
                    continue;
                }
                let mut e2 = e.clone();
                e2[k] -= 1;
                let (ds2, odd) = merge_sign(&[k], ds).unwrap();
                let c = x * q(e[k] as i64);
                insert(&mut out, (e2, ds2), if odd { -c } else { c });
            }
        }
        out
    }

    pub fn label(&self, k: &PolyKey) -> String {
        let names: Vec<&String> = self.vars.iter().chain(&self.inert).collect();
        let mut s = String::new();
        for (i, &e) in k.0.iter().enumerate() {
            match e {
                0 => {}
                1 => s += &format!("({})", names[i]),
                _ => s += &format!("({})^{e}", names[i]),
            }
        }
        for &i in &k.1 {
            s += &format!("d({})", self.vars[i]);
        }
        if s.is_empty() {
            "1".into()
        } else {
            s
        }
    }

    /// All monomials of weight `≤ weight_cap` (or exactly `exact`) with inert degree
    /// `≤ inert_cap`, ordered by form degree, weight and key.
    pub fn basis(&self, weight_cap: u32, exact: Option<u32>, inert_cap: u32) -> Vec<PolyKey> {
        let nv = self.vars.len();
        let mut out = vec![];
        let subsets: Vec<Vec<usize>> = (0u32..(1 << nv)).map(|m| (0..nv).filter(|i| m & (1 << i) != 0).collect()).collect();
        for w in 0..=weight_cap {
            if exact.is_some_and(|x| x != w) {
                continue;
            }
            for ds in &subsets {
                let Some(rest) = w.checked_sub(ds.len() as u32) else { continue };
                for e in crate::polyops::monomials_of_degree(nv, rest) {
                    for inert in inert_exponents(self.inert.len(), inert_cap) {
                        out.push(([e.clone(), inert].concat(), ds.clone()));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then(self.weight(a).cmp(&self.weight(b))).then(a.cmp(b)));
        out
    }

    /// The span of `keys` as a cochain complex in form degree.
    pub fn complex(&self, keys: &[PolyKey]) -> Result<(CochainComplex, HashMap<PolyKey, usize>)> {
        let index: HashMap<PolyKey, usize> = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let mut space = GradedSpace::empty();
        for k in keys {
            space.push(k.1.len() as i64, self.label(k))?;
        }
        let space = Arc::new(space);
        let cols = keys
            .iter()
            .map(|k| self.encode(&index, &self.d(&[(k.clone(), Q::one())].into_iter().collect())))
            .collect::<Result<Vec<_>>>()?;
        let d = GradedLinearMap::new(space.clone(), space.clone(), 1, cols)?;
        Ok((CochainComplex::new(space, d)?, index))
    }

    fn encode(&self, index: &HashMap<PolyKey, usize>, f: &PolyForm) -> Result<SparseVec> {
        f.iter()
            .map(|(k, c)| {
                index
                    .get(k)
                    .map(|&i| (i, c.clone()))
                    .ok_or_else(|| overflow("weight cap", format!("{} leaves the truncation", self.label(k))))
            })
            .collect()
    }
}

fn inert_exponents(n: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v: Vec<u32>| (0..=cap).map(move |e| [v.clone(), vec![e]].concat())).collect();
    }
    out
}

/// The completed complex `Q[y_0, dy_0, y_2, dy_2, …, y_M, dy_M, x]^` in the variables
/// `u = y_0 − x, y_2, …, y_M` (differentiated) and `x` (inert, `dx = 0`), truncated at
/// `u`-and-`y` weight `weight_cap` and `x`-degree `x_cap`; with the homotopy
/// `h(ω) = ∫_0^1 H(ω)` between `φ_0` (`y_0 ↦ x`, `y_i ↦ 0`) and `φ_1 = id`.
#[derive(Clone, Debug)]
pub struct AcyclicityHomotopy {
    pub gen_cap: usize,
    pub weight_cap: u32,
    pub x_cap: u32,
    pub algebra: FormAlgebra,
    pub keys: Vec<PolyKey>,
    pub complex: CochainComplex,
    pub h: GradedLinearMap,
    pub phi0: GradedLinearMap,
    pub phi1: GradedLinearMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomotopyReport {
    pub gen_cap: usize,
    pub weight_cap: u32,
    pub x_cap: u32,
    pub basis_dim: usize,
    /// Basis elements where `dh + hd ≠ φ_1 − φ_0`.
    pub failures: Vec<String>,
    /// `dim H^p` of the truncated complex, `p = 0, 1, …`.
    pub cohomology: Vec<usize>,
    pub passed: bool,
}

/// `H` on one monomial of the algebra extended by `z` (the last differentiated
/// variable): `v ↦ z v`, `dv ↦ dz·v + z dv`, inert variables fixed.
fn homotopy_image(ext: &FormAlgebra, nv: usize, key: &PolyKey) -> PolyForm {
    let z = nv;
    let mut out = PolyForm::new();
    let mut e = key.0.clone();
    let zpow: u32 = key.0[..nv].iter().sum();
    e.insert(z, zpow);
    insert(&mut out, (e, vec![]), Q::one());
    for &i in &key.1 {
        let mut dv = ext.mul(&ext.dvar(z), &ext.var(i));
        add_into(&mut dv, &Q::one(), &ext.mul(&ext.var(z), &ext.dvar(i)));
        out = ext.mul(&out, &dv);
    }
    out
}

/// `∫_0^1`: keeps the terms `dz·η` and integrates in `z`.
fn integrate_z(nv: usize, f: &PolyForm) -> PolyForm {
    let z = nv;
    let mut out = PolyForm::new();
    for ((e, ds), c) in f {
        if ds.last() != Some(&z) {
            continue;
        }
        let mut e2 = e.clone();
        let p = e2.remove(z);
        let ds2 = ds[..ds.len() - 1].to_vec();
        // `dz` is stored rightmost; moving it to the front costs `(−1)^{deg η}`.
        let c = c / q(p as i64 + 1);
        insert(&mut out, (e2, ds2.clone()), if ds2.len() % 2 == 1 { -c } else { c });
    }
    out
}

pub fn acyclicity_homotopy(gen_cap: usize, weight_cap: u32, x_cap: u32) -> Result<AcyclicityHomotopy> {
    if gen_cap < 2 {
        return Err(Error::Invalid("the generator cap must be at least 2".into()));
    }
    let mut vars = vec!["y0-x".to_string()];
    vars.extend((2..=gen_cap).map(|i| format!("y{i}")));
    let nv = vars.len();
    let algebra = FormAlgebra::new(vars.clone(), vec!["x".into()]);
    let ext = FormAlgebra::new([vars, vec!["z".into()]].concat(), vec!["x".into()]);
    let keys = algebra.basis(weight_cap, None, x_cap);
    let (complex, index) = algebra.complex(&keys)?;
    let space = complex.space.clone();
    let mut h_cols = vec![];
    let mut phi0_cols = vec![];
    for k in &keys {
        let image = homotopy_image(&ext, nv, k);
        h_cols.push(algebra.encode(&index, &integrate_z(nv, &image))?);
        // φ_0 kills every u, y_i, du, dy_i and fixes x.
        phi0_cols.push(if algebra.weight(k) == 0 { [(index[k], Q::one())].into_iter().collect() } else { SparseVec::new() });
    }
    let h = GradedLinearMap::new(space.clone(), space.clone(), -1, h_cols)?;
    let phi0 = GradedLinearMap::new(space.clone(), space.clone(), 0, phi0_cols)?;
    let phi1 = GradedLinearMap::identity(space.clone());
    Ok(AcyclicityHomotopy { gen_cap, weight_cap, x_cap, algebra, keys, complex, h, phi0, phi1 })
}

impl AcyclicityHomotopy {
    pub fn verify(&self) -> Result<HomotopyReport> {
        let d = &self.complex.d;
        let mut failures = vec![];
        for i in 0..self.keys.len() {
            let mut lhs = d.apply(self.h.column(i));
            for (r, c) in self.h.apply(d.column(i)) {
                crate::sparse::add_entry(&mut lhs, r, c);
            }
            let mut rhs = self.phi1.column(i).clone();
            for (r, c) in self.phi0.column(i) {
                crate::sparse::add_entry(&mut rhs, *r, -c.clone());
            }
            if lhs != rhs {
                failures.push(self.complex.space.label(i).to_string());
            }
        }
        let top = self.keys.iter().map(|k| k.1.len()).max().unwrap_or(0) as i64;
        let coh = (0..=top).map(|p| cohomology(&self.complex, p).map(|r| r.dimension)).collect::<Result<Vec<_>>>()?;
        let passed = failures.is_empty() && coh[0] == self.x_cap as usize + 1 && coh[1..].iter().all(|&c| c == 0);
        Ok(HomotopyReport {
            gen_cap: self.gen_cap,
            weight_cap: self.weight_cap,
            x_cap: self.x_cap,
            basis_dim: self.keys.len(),
            failures,
            cohomology: coh,
            passed,
        })
    }

    pub fn apply_h(&self, f: &PolyForm) -> Result<PolyForm> {
        let index: HashMap<PolyKey, usize> = self.keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let v = self.algebra.encode(&index, f)?;
        Ok(self.h.apply(&v).into_iter().map(|(i, c)| (self.keys[i].clone(), c)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedPiece {
    pub weight: u32,
    /// Dimension per form degree.
    pub dims: Vec<usize>,
    /// Cohomology of the augmented piece per form degree.
    pub cohomology: Vec<usize>,
    pub exact: bool,
}

/// The weight-`n` parts of `Q → Ω(Q[t_1..t_k])` with `deg t_i = deg dt_i = 1`, for
/// `n ≤ weight_cap`; each must be exact.
pub fn graded_poincare_pieces(k: usize, weight_cap: u32) -> Result<Vec<GradedPiece>> {
    let alg = FormAlgebra::new((1..=k).map(|i| format!("t{i}")).collect(), vec![]);
    let mut out = vec![];
    for n in 0..=weight_cap {
        let keys = alg.basis(weight_cap, Some(n), 0);
        let (cx, _) = alg.complex(&keys)?;
        let dims: Vec<usize> = (0..=k as i64).map(|p| cx.space.dim_in(p)).collect();
        let mut coh = (0..=k as i64).map(|p| cohomology(&cx, p).map(|r| r.dimension)).collect::<Result<Vec<_>>>()?;
        // The augmentation Q → Ω_0 is an isomorphism onto the constants.
        if n == 0 {
            coh[0] -= 1;
        }
        let exact = coh.iter().all(|&c| c == 0);
        out.push(GradedPiece { weight: n, dims, cohomology: coh, exact });
    }
    Ok(out)
}
