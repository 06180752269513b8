use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dgla::{check_dgla_axioms, DGLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{kernel_subcomplex, CochainComplex, GradedLinearMap, GradedSpace, Subcomplex};
use crate::rational::sign;
use crate::sparse::{add_scaled, sub, SparseVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductKind {
    Lie,
    Commutative,
}

/// Levelwise multiplication tables `e_i · e_j` for a cosimplicial DG-Lie or
/// DG-commutative algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelProducts {
    pub kind: ProductKind,
    pub tables: Vec<BTreeMap<(usize, usize), SparseVec>>,
}

pub fn table_product(table: &BTreeMap<(usize, usize), SparseVec>, a: &SparseVec, b: &SparseVec) -> SparseVec {
    let mut out = SparseVec::new();
    for (i, x) in a {
        for (j, y) in b {
            if let Some(v) = table.get(&(*i, *j)) {
                add_scaled(&mut out, &(x * y), v);
            }
        }
    }
    out
}

/// A cosimplicial cochain complex truncated at level `n_max`: complexes `A^0..A^{n_max}`,
/// cofaces `δ_i: A^n → A^{n+1}` (`cofaces[n][i]`, `0 ≤ i ≤ n+1`) and codegeneracies
/// `σ_j: A^{n+1} → A^n` (`codegeneracies[n][j]`, `0 ≤ j ≤ n`).
#[derive(Clone, Debug)]
pub struct CosimplicialComplex {
    pub levels: Vec<CochainComplex>,
    pub cofaces: Vec<Vec<GradedLinearMap>>,
    pub codegeneracies: Vec<Vec<GradedLinearMap>>,
    pub products: Option<LevelProducts>,
}

impl CosimplicialComplex {
    /// Validates shapes, chain-map property, the cosimplicial identities and, when
    /// products are given, the levelwise algebra axioms and multiplicativity.
    pub fn new(
        levels: Vec<CochainComplex>,
        cofaces: Vec<Vec<GradedLinearMap>>,
        codegeneracies: Vec<Vec<GradedLinearMap>>,
        products: Option<LevelProducts>,
    ) -> Result<Self> {
        let a = CosimplicialComplex { levels, cofaces, codegeneracies, products };
        a.check_shapes()?;
        a.check_identities()?;
        a.check_products()?;
        Ok(a)
    }

    /// `A` at every level with identity structure maps.
    pub fn constant(level: CochainComplex, n_max: usize, products: Option<(ProductKind, BTreeMap<(usize, usize), SparseVec>)>) -> Result<Self> {
        let id = GradedLinearMap::identity(level.space.clone());
        Self::new(
            vec![level; n_max + 1],
            (0..n_max).map(|n| vec![id.clone(); n + 2]).collect(),
            (0..n_max).map(|n| vec![id.clone(); n + 1]).collect(),
            products.map(|(kind, t)| LevelProducts { kind, tables: vec![t; n_max + 1] }),
        )
    }

    pub fn n_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level_space(&self, n: usize) -> &Arc<GradedSpace> {
        &self.levels[n].space
    }

    fn check_shapes(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Invalid("at least one level is required".into()));
        }
        let n_max = self.n_max();
        if self.cofaces.len() != n_max || self.codegeneracies.len() != n_max {
            return Err(Error::Invalid(format!("expected {n_max} coface and codegeneracy families")));
        }
        for n in 0..n_max {
            if self.cofaces[n].len() != n + 2 || self.codegeneracies[n].len() != n + 1 {
                return Err(Error::Invalid(format!("level {n}: need {} cofaces and {} codegeneracies", n + 2, n + 1)));
            }
            for (i, f) in self.cofaces[n].iter().enumerate() {
                self.check_chain_map(f, n, n + 1, &format!("δ_{i} on level {n}"))?;
            }
            for (j, s) in self.codegeneracies[n].iter().enumerate() {
                self.check_chain_map(s, n + 1, n, &format!("σ_{j} on level {}", n + 1))?;
            }
        }
        if let Some(p) = &self.products {
            if p.tables.len() != self.levels.len() {
                return Err(Error::Invalid("one product table per level is required".into()));
            }
        }
        Ok(())
    }

    fn check_chain_map(&self, f: &GradedLinearMap, from: usize, to: usize, name: &str) -> Result<()> {
        let (src, tgt) = (&self.levels[from], &self.levels[to]);
        if f.degree != 0 || f.source != src.space || f.target != tgt.space {
            return Err(Error::Invalid(format!("{name} must be a degree-0 map A^{from} → A^{to}")));
        }
        for i in 0..src.space.dim() {
            if tgt.d.apply(f.column(i)) != f.apply(src.d.column(i)) {
                return Err(Error::NotChainMap(format!("{name} on {}", src.space.label(i))));
            }
        }
        Ok(())
    }

    fn coface(&self, n: usize, i: usize) -> &GradedLinearMap {
        &self.cofaces[n][i]
    }

    fn codegeneracy(&self, n: usize, j: usize) -> &GradedLinearMap {
        &self.codegeneracies[n][j]
    }

    fn same(lhs: &GradedLinearMap, rhs: &GradedLinearMap, what: String) -> Result<()> {
        if lhs.columns() != rhs.columns() {
            return Err(Error::Structure(format!("cosimplicial identity fails: {what}")));
        }
        Ok(())
    }

    /// All cosimplicial identities available inside the truncation.
    pub fn check_identities(&self) -> Result<()> {
        let n_max = self.n_max();
        for n in 0..n_max.saturating_sub(1) {
            for j in 0..=n + 2 {
                for i in 0..j {
                    let lhs = self.coface(n + 1, j).compose(self.coface(n, i))?;
                    let rhs = self.coface(n + 1, i).compose(self.coface(n, j - 1))?;
                    Self::same(&lhs, &rhs, format!("δ_{j}δ_{i} = δ_{i}δ_{} on level {n}", j - 1))?;
                }
            }
            for j in 0..=n {
                for i in 0..=j {
                    let lhs = self.codegeneracy(n, j).compose(self.codegeneracy(n + 1, i))?;
                    let rhs = self.codegeneracy(n, i).compose(self.codegeneracy(n + 1, j + 1))?;
                    Self::same(&lhs, &rhs, format!("σ_{j}σ_{i} = σ_{i}σ_{} on level {}", j + 1, n + 2))?;
                }
            }
        }
        for n in 0..n_max {
            for j in 0..=n {
                for i in 0..=n + 1 {
                    let lhs = self.codegeneracy(n, j).compose(self.coface(n, i))?;
                    let what = format!("σ_{j}δ_{i} on level {n}");
                    if i == j || i == j + 1 {
                        Self::same(&lhs, &GradedLinearMap::identity(self.level_space(n).clone()), what)?;
                    } else if n >= 1 {
                        let rhs = if i < j {
                            self.coface(n - 1, i).compose(self.codegeneracy(n - 1, j - 1))?
                        } else {
                            self.coface(n - 1, i - 1).compose(self.codegeneracy(n - 1, j))?
                        };
                        Self::same(&lhs, &rhs, what)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn check_products(&self) -> Result<()> {
        let Some(p) = &self.products else { return Ok(()) };
        for (n, (cx, table)) in self.levels.iter().zip(&p.tables).enumerate() {
            match p.kind {
                ProductKind::Lie => {
                    let g = DGLieAlgebra::new(cx.clone(), table.clone())?;
                    if let Some(f) = check_dgla_axioms(&g).failures.first() {
                        return Err(Error::Structure(format!("level {n}: {:?} fails on {:?}: {}", f.axiom, f.basis, f.defect)));
                    }
                }
                ProductKind::Commutative => {
                    if let Some(w) = cdga_failures(cx, table).first() {
                        return Err(Error::Structure(format!("level {n}: {w}")));
                    }
                }
            }
        }
        let maps = (0..self.n_max()).flat_map(|n| {
            let faces = self.cofaces[n].iter().enumerate().map(move |(i, f)| (f, n, n + 1, format!("δ_{i}")));
            let degs = self.codegeneracies[n].iter().enumerate().map(move |(j, s)| (s, n + 1, n, format!("σ_{j}")));
            faces.chain(degs)
        });
        for (f, from, to, name) in maps {
            let dim = self.levels[from].space.dim();
            for a in 0..dim {
                for b in 0..dim {
                    let ab = p.tables[from].get(&(a, b)).cloned().unwrap_or_default();
                    let lhs = f.apply(&ab);
                    let rhs = table_product(&p.tables[to], f.column(a), f.column(b));
                    if lhs != rhs {
                        let s = &self.levels[from].space;
                        return Err(Error::Structure(format!("{name} on level {from} is not multiplicative on ({}, {})", s.label(a), s.label(b))));
                    }
                }
            }
        }
        Ok(())
    }

    /// Offsets of each level inside the total space.
    fn offsets(&self) -> Vec<usize> {
        let mut out = vec![0];
        for cx in &self.levels {
            out.push(out.last().unwrap() + cx.space.dim());
        }
        out
    }

    /// The unnormalized total complex `C(A)`: `A^{n,q}` in degree `n + q`, with
    /// `D = Σ_i (−1)^i δ_i + (−1)^n d`. The top level has no outgoing cofaces.
    pub fn unnormalized_total(&self) -> Result<CochainComplex> {
        let off = self.offsets();
        let mut space = GradedSpace::empty();
        let mut cols = vec![];
        for (n, cx) in self.levels.iter().enumerate() {
            let s = &cx.space;
            for b in 0..s.dim() {
                space.push(n as i64 + s.degree(b), total_label(n, s.label(b)))?;
                let mut col: SparseVec = cx.d.column(b).iter().map(|(&r, x)| (off[n] + r, sign(n as i64) * x)).collect();
                if n < self.n_max() {
                    for (i, f) in self.cofaces[n].iter().enumerate() {
                        for (&r, x) in f.column(b) {
                            crate::sparse::add_entry(&mut col, off[n + 1] + r, sign(i as i64) * x);
                        }
                    }
                }
                cols.push(col);
            }
        }
        let space = Arc::new(space);
        CochainComplex::new(space.clone(), GradedLinearMap::new(space.clone(), space, 1, cols)?)
    }

    /// Index of `(level, basis vector)` in the total space.
    pub fn total_index(&self, n: usize, b: usize) -> usize {
        self.offsets()[n] + b
    }
}

pub fn total_label(n: usize, label: &str) -> String {
    format!("[{n}]{label}")
}

/// The normalized cochains `N(A) ⊂ C(A)`: at each level the common kernel of the
/// codegeneracies out of it.
#[derive(Clone, Debug)]
pub struct NormalizedCochains {
    pub n_max: usize,
    pub total: CochainComplex,
    pub normalized: Subcomplex,
}

pub fn normalized_cochain(a: &CosimplicialComplex) -> Result<NormalizedCochains> {
    a.check_identities()?;
    let total = a.unnormalized_total()?;
    let off = a.offsets();
    let mut block = vec![0usize];
    for n in 1..a.levels.len() {
        block.push(block[n - 1] + n * a.levels[n - 1].space.dim());
    }
    let mut level_of = vec![];
    for (n, cx) in a.levels.iter().enumerate() {
        level_of.extend(std::iter::repeat_n(n, cx.space.dim()));
    }
    let constraint = |i: usize| {
        let n = level_of[i];
        let b = i - off[n];
        let mut col = SparseVec::new();
        if n > 0 {
            let dim = a.levels[n - 1].space.dim();
            for (j, s) in a.codegeneracies[n - 1].iter().enumerate() {
                for (&r, x) in s.column(b) {
                    col.insert(block[n - 1] + j * dim + r, x.clone());
                }
            }
        }
        col
    };
    let normalized = kernel_subcomplex(&total, constraint)?;
    Ok(NormalizedCochains { n_max: a.n_max(), total, normalized })
}

/// Associativity, graded commutativity and the Leibniz rule for a product table.
pub fn cdga_failures(cx: &CochainComplex, table: &BTreeMap<(usize, usize), SparseVec>) -> Vec<String> {
    let s = &cx.space;
    let n = s.dim();
    let e = |i: usize| crate::sparse::unit(i);
    let mul = |a: &SparseVec, b: &SparseVec| table_product(table, a, b);
    let mut out = vec![];
    for i in 0..n {
        for j in 0..n {
            let (di, dj) = (s.degree(i), s.degree(j));
            let ab = mul(&e(i), &e(j));
            if s.degree_of(&ab).is_some_and(|k| k != di + dj) {
                out.push(format!("product of {} and {} has the wrong degree", s.label(i), s.label(j)));
            }
            let ba = mul(&e(j), &e(i));
            if !sub(&ab, &crate::sparse::scaled(&sign(di * dj), &ba)).is_empty() {
                out.push(format!("graded commutativity fails on ({}, {})", s.label(i), s.label(j)));
            }
            let mut rhs = mul(cx.d.column(i), &e(j));
            add_scaled(&mut rhs, &sign(di), &mul(&e(i), cx.d.column(j)));
            if cx.d.apply(&ab) != rhs {
                out.push(format!("Leibniz fails on ({}, {})", s.label(i), s.label(j)));
            }
            for k in 0..n {
                if mul(&ab, &e(k)) != mul(&e(i), &mul(&e(j), &e(k))) {
                    out.push(format!("associativity fails on ({}, {}, {})", s.label(i), s.label(j), s.label(k)));
                }
            }
        }
    }
    out
}
