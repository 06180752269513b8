use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use super::complex::*;
use super::derham::*;
use crate::dgla::DGLieAlgebra;
use crate::error::{overflow, Error, Result};
use crate::linalg::{is_quasi_iso, kernel_subcomplex, CochainComplex, GradedLinearMap, GradedSpace, QuasiIsoRow, Subcomplex};
use crate::rational::{sign, Q};
use crate::sparse::{add_entry, SparseVec};

/// An element of `Π_n Ω(Δ[n]) ⊗ A^n` without any degree cap, keyed by
/// `(level, form term, basis vector of A^n)`.
pub type TsElem = BTreeMap<(usize, FormKey, usize), Q>;

/// `Ω ⊗ A^n` at one level, as a form per basis vector of `A^n`.
type Slice = BTreeMap<usize, Form>;

/// The Thom–Sullivan cochains: the end of `Ω_{≤D}(Δ[n]) ⊗ A^n` over the truncated
/// simplex category, as a subcomplex of the levelwise product.
#[derive(Clone, Debug)]
pub struct ThomSullivan {
    pub cap: u32,
    pub cosimplicial: CosimplicialComplex,
    pub derham: Vec<SimplexDeRham>,
    pub ambient: CochainComplex,
    pub end: Subcomplex,
    offsets: Vec<usize>,
}

/// `d^i: [n] → [n+1]`, skipping `i`.
pub fn coface_map(n: usize, i: usize) -> Vec<usize> {
    (0..=n).map(|j| if j < i { j } else { j + 1 }).collect()
}

/// `s^j: [n+1] → [n]`, hitting `j` twice.
pub fn codegeneracy_map(n: usize, j: usize) -> Vec<usize> {
    (0..=n + 1).map(|k| if k <= j { k } else { k - 1 }).collect()
}

fn insert_term(e: &mut TsElem, key: (usize, FormKey, usize), c: Q) {
    if c.is_zero() {
        return;
    }
    let x = e.entry(key.clone()).or_insert_with(Q::zero);
    *x += c;
    if x.is_zero() {
        e.remove(&key);
    }
}

impl ThomSullivan {
    fn dim_a(&self, n: usize) -> usize {
        self.cosimplicial.levels[n].space.dim()
    }

    fn split(&self, i: usize) -> (usize, usize, usize) {
        let n = self.offsets.partition_point(|&o| o <= i) - 1;
        let r = i - self.offsets[n];
        (n, r / self.dim_a(n), r % self.dim_a(n))
    }

    pub fn n_max(&self) -> usize {
        self.cosimplicial.n_max()
    }

    pub fn to_elem(&self, v: &SparseVec) -> TsElem {
        let mut e = TsElem::new();
        for (&i, x) in v {
            let (n, f, b) = self.split(i);
            insert_term(&mut e, (n, self.derham[n].key(f).clone(), b), x.clone());
        }
        e
    }

    /// Ambient coordinates of `e`; terms beyond the degree cap are an overflow.
    pub fn from_elem(&self, e: &TsElem) -> Result<SparseVec> {
        let mut out = SparseVec::new();
        for ((n, k, b), x) in e {
            let mut f = Form::zero(*n);
            f.add_term(k.clone(), Q::one());
            let enc = self.derham[*n].encode(&f)?;
            let (&fi, _) = enc.iter().next().expect("nonzero basis form");
            add_entry(&mut out, self.offsets[*n] + fi * self.dim_a(*n) + b, x.clone());
        }
        Ok(out)
    }

    fn slices(&self, e: &TsElem) -> Vec<Slice> {
        let mut out = vec![Slice::new(); self.n_max() + 1];
        for ((n, k, b), x) in e {
            let f = out[*n].entry(*b).or_insert_with(|| Form::zero(*n));
            f.add_term(k.clone(), x.clone());
        }
        out
    }

    /// First end condition violated by `e`, checked without any cap.
    pub fn end_defect(&self, e: &TsElem) -> Result<Option<String>> {
        let s = self.slices(e);
        let a = &self.cosimplicial;
        for n in 0..self.n_max() {
            for i in 0..=n + 1 {
                let mut lhs = pull_slice(&s[n + 1], &coface_map(n, i))?;
                push_slice(&mut lhs, &s[n], &a.cofaces[n][i], -Q::one(), n);
                if !lhs.is_empty() {
                    return Ok(Some(format!("coface d^{i} between levels {n} and {}", n + 1)));
                }
            }
            for j in 0..=n {
                let mut lhs = pull_slice(&s[n], &codegeneracy_map(n, j))?;
                push_slice(&mut lhs, &s[n + 1], &a.codegeneracies[n][j], -Q::one(), n + 1);
                if !lhs.is_empty() {
                    return Ok(Some(format!("codegeneracy s^{j} between levels {} and {n}", n + 1)));
                }
            }
        }
        Ok(None)
    }

    /// Componentwise differential `d_Ω ⊗ 1 + (−1)^p 1 ⊗ d`, uncapped.
    pub fn elem_d(&self, e: &TsElem) -> TsElem {
        let mut out = TsElem::new();
        for ((n, k, b), x) in e {
            let mut f = Form::zero(*n);
            f.add_term(k.clone(), x.clone());
            for (k2, y) in f.d().terms {
                insert_term(&mut out, (*n, k2, *b), y);
            }
            let sgn = sign(k.1.len() as i64) * x;
            for (r, y) in self.cosimplicial.levels[*n].d.column(*b) {
                insert_term(&mut out, (*n, k.clone(), *r), &sgn * y);
            }
        }
        out
    }

    /// Componentwise product `(α⊗a)(β⊗b) = (−1)^{|a||β|} αβ ⊗ ab`, uncapped.
    pub fn elem_product(&self, x: &TsElem, y: &TsElem) -> Result<TsElem> {
        let p = self.cosimplicial.products.as_ref().ok_or_else(|| Error::Invalid("no product on the cosimplicial object".into()))?;
        let mut out = TsElem::new();
        for ((n, k1, b1), c1) in x {
            let deg_b1 = self.cosimplicial.levels[*n].space.degree(*b1);
            for ((m, k2, b2), c2) in y {
                if n != m {
                    continue;
                }
                let Some(ab) = p.tables[*n].get(&(*b1, *b2)) else { continue };
                let mut f1 = Form::zero(*n);
                f1.add_term(k1.clone(), Q::one());
                let mut f2 = Form::zero(*n);
                f2.add_term(k2.clone(), Q::one());
                let w = f1.wedge(&f2);
                let c = sign(deg_b1 * k2.1.len() as i64) * c1 * c2;
                for (kw, xw) in &w.terms {
                    for (r, y) in ab {
                        insert_term(&mut out, (*n, kw.clone(), *r), &c * xw * y);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Product of two vectors of the end, in end coordinates. Overflows if the
    /// product needs forms beyond the cap.
    pub fn product(&self, x: &SparseVec, y: &SparseVec) -> Result<SparseVec> {
        let ex = self.to_elem(&self.end.inclusion.apply(x));
        let ey = self.to_elem(&self.end.inclusion.apply(y));
        let amb = self.from_elem(&self.elem_product(&ex, &ey)?)?;
        self.end
            .express(&amb)
            .ok_or_else(|| Error::Structure(format!("product leaves the end: {}", self.ambient.space.describe(&amb))))
    }

    /// The end as a DG-Lie algebra, available when the input is Lie and every basis
    /// bracket stays inside the cap.
    pub fn lie_algebra(&self) -> Result<DGLieAlgebra> {
        match &self.cosimplicial.products {
            Some(p) if p.kind == ProductKind::Lie => {}
            _ => return Err(Error::Invalid("the cosimplicial object carries no Lie bracket".into())),
        }
        let dim = self.end.complex.space.dim();
        let mut table = BTreeMap::new();
        for i in 0..dim {
            for j in 0..dim {
                let v = self.product(&crate::sparse::unit(i), &crate::sparse::unit(j))?;
                if !v.is_empty() {
                    table.insert((i, j), v);
                }
            }
        }
        DGLieAlgebra::new(self.end.complex.clone(), table)
    }

    /// Uncapped check of the algebra structure on the end basis: closure of products
    /// under the end conditions, graded (anti)symmetry, Leibniz and Jacobi or
    /// associativity.
    pub fn check_algebra(&self) -> Result<AlgebraCheck> {
        let kind = self.cosimplicial.products.as_ref().map(|p| p.kind).ok_or_else(|| Error::Invalid("no product installed".into()))?;
        let basis: Vec<TsElem> = self.end.inclusion.columns().iter().map(|c| self.to_elem(c)).collect();
        let degs: Vec<i64> = (0..basis.len()).map(|i| self.end.complex.space.degree(i)).collect();
        let labels = |i: usize| self.end.complex.space.label(i).to_string();
        let mut report = AlgebraCheck { kind, basis_dim: basis.len(), failures: vec![] };
        let sym = match kind {
            ProductKind::Lie => -Q::one(),
            ProductKind::Commutative => Q::one(),
        };
        let mut prods = vec![vec![TsElem::new(); basis.len()]; basis.len()];
        for (i, x) in basis.iter().enumerate() {
            for (j, y) in basis.iter().enumerate() {
                prods[i][j] = self.elem_product(x, y)?;
            }
        }
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let xy = &prods[i][j];
                if let Some(w) = self.end_defect(xy)? {
                    report.failures.push(format!("product of {} and {} violates the {w} condition", labels(i), labels(j)));
                }
                let mut s = xy.clone();
                for (k, c) in &prods[j][i] {
                    insert_term(&mut s, k.clone(), -(&sym * sign(degs[i] * degs[j]) * c));
                }
                if !s.is_empty() {
                    report.failures.push(format!("graded symmetry fails on ({}, {})", labels(i), labels(j)));
                }
                let mut leib = self.elem_d(xy);
                for (k, c) in self.elem_product(&self.elem_d(&basis[i]), &basis[j])? {
                    insert_term(&mut leib, k, -c);
                }
                for (k, c) in self.elem_product(&basis[i], &self.elem_d(&basis[j]))? {
                    insert_term(&mut leib, k, -(sign(degs[i]) * c));
                }
                if !leib.is_empty() {
                    report.failures.push(format!("Leibniz fails on ({}, {})", labels(i), labels(j)));
                }
            }
        }
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                for k in 0..basis.len() {
                    let lhs = self.elem_product(&basis[i], &prods[j][k])?;
                    let mut rhs = self.elem_product(&prods[i][j], &basis[k])?;
                    if kind == ProductKind::Lie {
                        for (key, c) in self.elem_product(&basis[j], &prods[i][k])? {
                            insert_term(&mut rhs, key, sign(degs[i] * degs[j]) * c);
                        }
                    }
                    for (key, c) in lhs {
                        insert_term(&mut rhs, key, -c);
                    }
                    if !rhs.is_empty() {
                        let what = if kind == ProductKind::Lie { "Jacobi" } else { "associativity" };
                        report.failures.push(format!("{what} fails on ({}, {}, {})", labels(i), labels(j), labels(k)));
                    }
                }
            }
        }
        Ok(report)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgebraCheck {
    pub kind: ProductKind,
    pub basis_dim: usize,
    pub failures: Vec<String>,
}

impl AlgebraCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn pull_slice(s: &Slice, theta: &[usize]) -> Result<Slice> {
    let mut out = Slice::new();
    for (b, f) in s {
        let g = f.pullback(theta)?;
        if !g.is_zero() {
            out.insert(*b, g);
        }
    }
    Ok(out)
}

/// `acc += c · (1 ⊗ φ)(s)`.
fn push_slice(acc: &mut Slice, s: &Slice, phi: &GradedLinearMap, c: Q, n: usize) {
    for (b, f) in s {
        for (r, x) in phi.column(*b) {
            let e = acc.entry(*r).or_insert_with(|| Form::zero(n));
            e.add_scaled(&(&c * x), f);
            if e.is_zero() {
                acc.remove(r);
            }
        }
    }
}

/// Builds `N(A)^TS` with forms of polynomial degree at most `cap`.
pub fn thom_sullivan(a: &CosimplicialComplex, cap: u32) -> Result<ThomSullivan> {
    let n_max = a.n_max();
    if (cap as usize) < n_max {
        return Err(overflow("degree cap", format!("top forms on Δ[{n_max}] need degree {n_max}, cap is {cap}")));
    }
    a.check_identities()?;
    let derham: Vec<SimplexDeRham> = (0..=n_max).map(|n| SimplexDeRham::new(n, cap)).collect();
    let dim_a: Vec<usize> = a.levels.iter().map(|l| l.space.dim()).collect();
    let mut offsets = vec![0];
    for n in 0..=n_max {
        offsets.push(offsets[n] + derham[n].dim() * dim_a[n]);
    }

    let mut space = GradedSpace::empty();
    let mut cols = vec![];
    for n in 0..=n_max {
        let s = &a.levels[n].space;
        for f in 0..derham[n].dim() {
            let p = derham[n].form_degree(f);
            let df = derham[n].d(f);
            for b in 0..dim_a[n] {
                space.push(p as i64 + s.degree(b), format!("[{n}]{}⊗{}", derham[n].label(f), s.label(b)))?;
                let mut col = SparseVec::new();
                for (g, x) in &df {
                    add_entry(&mut col, offsets[n] + g * dim_a[n] + b, x.clone());
                }
                for (r, x) in a.levels[n].d.column(b) {
                    add_entry(&mut col, offsets[n] + f * dim_a[n] + r, sign(p as i64) * x);
                }
                cols.push(col);
            }
        }
    }
    let space = Arc::new(space);
    let ambient = CochainComplex::new(space.clone(), GradedLinearMap::new(space.clone(), space, 1, cols)?)?;

    // Pullback matrices: coface_pull[n][i][f] lives on Δ[n] for f on Δ[n+1];
    // codeg_pull[n][j][f] lives on Δ[n+1] for f on Δ[n].
    let mut coface_pull = vec![];
    let mut codeg_pull = vec![];
    for n in 0..n_max {
        let mut faces = vec![];
        for i in 0..=n + 1 {
            let mut rows = vec![];
            for f in 0..derham[n + 1].dim() {
                rows.push(derham[n].encode(&derham[n + 1].basis_form(f).pullback(&coface_map(n, i))?)?);
            }
            faces.push(rows);
        }
        coface_pull.push(faces);
        let mut degs = vec![];
        for j in 0..=n {
            let mut rows = vec![];
            for f in 0..derham[n].dim() {
                rows.push(derham[n + 1].encode(&derham[n].basis_form(f).pullback(&codegeneracy_map(n, j))?)?);
            }
            degs.push(rows);
        }
        codeg_pull.push(degs);
    }
    let mut block = BTreeMap::new();
    let mut next = 0usize;
    for n in 0..n_max {
        for i in 0..=n + 1 {
            block.insert(('d', n, i), next);
            next += derham[n].dim() * dim_a[n + 1];
        }
        for j in 0..=n {
            block.insert(('s', n, j), next);
            next += derham[n + 1].dim() * dim_a[n];
        }
    }
    let split = |idx: usize| {
        let n = offsets.partition_point(|&o| o <= idx) - 1;
        let r = idx - offsets[n];
        (n, r / dim_a[n], r % dim_a[n])
    };
    let constraint = |idx: usize| {
        let (m, f, b) = split(idx);
        let mut col = SparseVec::new();
        if m >= 1 {
            for i in 0..=m {
                let base = block[&('d', m - 1, i)];
                for (g, x) in &coface_pull[m - 1][i][f] {
                    add_entry(&mut col, base + g * dim_a[m] + b, x.clone());
                }
            }
            for j in 0..m {
                let base = block[&('s', m - 1, j)];
                for (r, x) in a.codegeneracies[m - 1][j].column(b) {
                    add_entry(&mut col, base + f * dim_a[m - 1] + r, -x.clone());
                }
            }
        }
        if m < n_max {
            for i in 0..=m + 1 {
                let base = block[&('d', m, i)];
                for (r, x) in a.cofaces[m][i].column(b) {
                    add_entry(&mut col, base + f * dim_a[m + 1] + r, -x.clone());
                }
            }
            for j in 0..=m {
                let base = block[&('s', m, j)];
                for (g, x) in &codeg_pull[m][j][f] {
                    add_entry(&mut col, base + g * dim_a[m] + b, x.clone());
                }
            }
        }
        col
    };
    let end = kernel_subcomplex(&ambient, constraint)?;
    Ok(ThomSullivan { cap, cosimplicial: a.clone(), derham, ambient, end, offsets })
}

/// The integration map `N(A)^TS → N(A)`, `(c_n) ↦ (∫_{Δ[n]} c_n)_n`, and its
/// quasi-isomorphism verdict on a degree window.
#[derive(Clone, Debug)]
pub struct TsComparison {
    pub map: GradedLinearMap,
    pub report: TsComparisonReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TsComparisonReport {
    pub n_max: usize,
    pub degree_cap: u32,
    pub ts_dim: usize,
    pub normalized_dim: usize,
    pub table: Vec<QuasiIsoRow>,
    pub is_quasi_iso: bool,
}

pub fn ts_comparison_map(ts: &ThomSullivan, n: &NormalizedCochains) -> Result<GradedLinearMap> {
    let a = &ts.cosimplicial;
    let mut cols = vec![];
    for v in ts.end.inclusion.columns() {
        let mut out = SparseVec::new();
        for ((lvl, key, b), x) in ts.to_elem(v) {
            if key.1.len() != lvl {
                continue;
            }
            let mut f = Form::zero(lvl);
            f.add_term(key, x);
            add_entry(&mut out, a.total_index(lvl, b), f.integrate()?);
        }
        cols.push(n.normalized.express(&out).ok_or_else(|| {
            Error::Structure(format!("integral {} is not normalized", n.total.space.describe(&out)))
        })?);
    }
    GradedLinearMap::new(ts.end.complex.space.clone(), n.normalized.complex.space.clone(), 0, cols)
}

pub fn ts_comparison(a: &CosimplicialComplex, cap: u32, degrees: RangeInclusive<i64>) -> Result<TsComparison> {
    let ts = thom_sullivan(a, cap)?;
    let n = normalized_cochain(a)?;
    let map = ts_comparison_map(&ts, &n)?;
    let q = is_quasi_iso(&map, &ts.end.complex, &n.normalized.complex, degrees)?;
    Ok(TsComparison {
        map,
        report: TsComparisonReport {
            n_max: a.n_max(),
            degree_cap: cap,
            ts_dim: ts.end.complex.space.dim(),
            normalized_dim: n.normalized.complex.space.dim(),
            table: q.table,
            is_quasi_iso: q.is_quasi_iso,
        },
    })
}
