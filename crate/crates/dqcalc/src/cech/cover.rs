use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cosimplicial::{cdga_failures, table_product, CosimplicialComplex, LevelProducts, ProductKind};
use crate::dgla::{check_dgla_axioms, DGLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{CochainComplex, GradedLinearMap, GradedSpace};
use crate::sparse::{unit, SparseVec};

/// A nonempty subset of `{0..n-1}`, sorted.
pub type Subset = Vec<usize>;

pub type Table = BTreeMap<(usize, usize), SparseVec>;

/// Subset label with 1-based indices, e.g. `U12`.
pub fn subset_label(j: &[usize]) -> String {
    let sep = if j.iter().any(|&x| x >= 9) { "," } else { "" };
    format!("U{}", j.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(sep))
}

/// All nonempty subsets of `{0..n-1}`, by size then lexicographically.
pub fn nonempty_subsets(n: usize) -> Vec<Subset> {
    let mut out: Vec<Subset> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    out.sort_by(|a: &Subset, b: &Subset| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// Products on the values of a cover; units are required for commutative values.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverProducts {
    pub kind: ProductKind,
    pub tables: BTreeMap<Subset, Table>,
    pub units: BTreeMap<Subset, SparseVec>,
}

/// Values `A(U_J)` for every nonempty `J ⊆ {0..n-1}` with restriction maps for every
/// `J ⊊ J′`.
#[derive(Clone, Debug)]
pub struct FiniteCover {
    pub n: usize,
    pub values: BTreeMap<Subset, CochainComplex>,
    pub restrictions: BTreeMap<(Subset, Subset), GradedLinearMap>,
    pub products: Option<CoverProducts>,
}

impl FiniteCover {
    /// Restrictions must be given at least for `|J′| = |J| + 1`; longer ones are
    /// composed when absent. Functoriality, chain-map property and compatibility
    /// with products are checked.
    pub fn new(
        n: usize,
        values: BTreeMap<Subset, CochainComplex>,
        mut restrictions: BTreeMap<(Subset, Subset), GradedLinearMap>,
        products: Option<CoverProducts>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("a cover needs at least one set".into()));
        }
        let subsets = nonempty_subsets(n);
        for j in &subsets {
            if !values.contains_key(j) {
                return Err(Error::Invalid(format!("missing value on {}", subset_label(j))));
            }
        }
        if values.len() != subsets.len() {
            return Err(Error::Invalid("values given on sets outside the cover".into()));
        }
        for gap in 1..n {
            for j in &subsets {
                for jp in subsets.iter().filter(|jp| jp.len() == j.len() + gap && is_subset(j, jp)) {
                    if restrictions.contains_key(&(j.clone(), jp.clone())) {
                        continue;
                    }
                    if gap == 1 {
                        return Err(Error::Invalid(format!("missing restriction map {} → {}", subset_label(j), subset_label(jp))));
                    }
                    let v = *jp.iter().find(|x| !j.contains(x)).unwrap();
                    let mut k = j.clone();
                    k.push(v);
                    k.sort();
                    let composed = restrictions[&(k.clone(), jp.clone())].compose(&restrictions[&(j.clone(), k)])?;
                    restrictions.insert((j.clone(), jp.clone()), composed);
                }
            }
        }
        let cover = FiniteCover { n, values, restrictions, products };
        cover.check()?;
        Ok(cover)
    }

    /// The same value on every set with identity restrictions.
    pub fn constant(n: usize, value: CochainComplex, products: Option<(ProductKind, Table, Option<SparseVec>)>) -> Result<Self> {
        let subsets = nonempty_subsets(n);
        let values = subsets.iter().map(|j| (j.clone(), value.clone())).collect();
        let id = GradedLinearMap::identity(value.space.clone());
        let mut restrictions = BTreeMap::new();
        for a in &subsets {
            for b in subsets.iter().filter(|b| b.len() > a.len() && is_subset(a, b)) {
                restrictions.insert((a.clone(), b.clone()), id.clone());
            }
        }
        let products = products.map(|(kind, t, u)| CoverProducts {
            kind,
            tables: subsets.iter().map(|j| (j.clone(), t.clone())).collect(),
            units: u.map(|u| subsets.iter().map(|j| (j.clone(), u.clone())).collect()).unwrap_or_default(),
        });
        Self::new(n, values, restrictions, products)
    }

    pub fn subsets(&self) -> Vec<Subset> {
        nonempty_subsets(self.n)
    }

    /// `res_{J→J′}`, the identity when `J = J′`.
    pub fn restriction(&self, j: &[usize], jp: &[usize]) -> Result<GradedLinearMap> {
        if j == jp {
            return Ok(GradedLinearMap::identity(self.values[j].space.clone()));
        }
        self.restrictions
            .get(&(j.to_vec(), jp.to_vec()))
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("no restriction {} → {}", subset_label(j), subset_label(jp))))
    }

    fn check(&self) -> Result<()> {
        for ((j, jp), r) in &self.restrictions {
            if !is_subset(j, jp) || j.len() >= jp.len() {
                return Err(Error::Invalid(format!("restriction {} → {} is not along an inclusion", subset_label(j), subset_label(jp))));
            }
            crate::linalg::check_chain_map(r, &self.values[j], &self.values[jp])
                .map_err(|e| Error::Structure(format!("restriction {} → {}: {e}", subset_label(j), subset_label(jp))))?;
        }
        let subsets = self.subsets();
        for a in &subsets {
            for b in subsets.iter().filter(|b| b.len() > a.len() && is_subset(a, b)) {
                for c in subsets.iter().filter(|c| c.len() > b.len() && is_subset(b, c)) {
                    let via = self.restriction(b, c)?.compose(&self.restriction(a, b)?)?;
                    if via.columns() != self.restriction(a, c)?.columns() {
                        return Err(Error::Structure(format!(
                            "restrictions not functorial along {} ⊂ {} ⊂ {}",
                            subset_label(a),
                            subset_label(b),
                            subset_label(c)
                        )));
                    }
                }
            }
        }
        let Some(p) = &self.products else { return Ok(()) };
        for j in &subsets {
            let t = p.tables.get(j).ok_or_else(|| Error::Invalid(format!("missing product on {}", subset_label(j))))?;
            let cx = &self.values[j];
            match p.kind {
                ProductKind::Lie => {
                    if let Some(f) = check_dgla_axioms(&DGLieAlgebra::new(cx.clone(), t.clone())?).failures.first() {
                        return Err(Error::Structure(format!("{}: {:?} fails on {:?}", subset_label(j), f.axiom, f.basis)));
                    }
                }
                ProductKind::Commutative => {
                    if let Some(w) = cdga_failures(cx, t).first() {
                        return Err(Error::Structure(format!("{}: {w}", subset_label(j))));
                    }
                    if let Some(u) = p.units.get(j) {
                        for i in 0..cx.space.dim() {
                            if table_product(t, u, &unit(i)) != unit(i) {
                                return Err(Error::Structure(format!("{}: unit fails on {}", subset_label(j), cx.space.label(i))));
                            }
                        }
                    }
                }
            }
        }
        for ((j, jp), r) in &self.restrictions {
            let dim = self.values[j].space.dim();
            for a in 0..dim {
                for b in 0..dim {
                    let lhs = r.apply(&table_product(&p.tables[j], &unit(a), &unit(b)));
                    let rhs = table_product(&p.tables[jp], r.column(a), r.column(b));
                    if lhs != rhs {
                        return Err(Error::Structure(format!("restriction {} → {} is not multiplicative", subset_label(j), subset_label(jp))));
                    }
                }
            }
            if let (Some(u), Some(up)) = (p.units.get(j), p.units.get(jp)) {
                if &r.apply(u) != up {
                    return Err(Error::Structure(format!("restriction {} → {} does not preserve the unit", subset_label(j), subset_label(jp))));
                }
            }
        }
        Ok(())
    }
}

/// `Q[x]/(x^k)` in degree 0: basis `1, x, …, x^{k-1}`, its product table and unit.
pub fn truncated_polynomial_algebra(k: usize) -> (CochainComplex, Table, SparseVec) {
    assert!(k >= 1, "the algebra needs at least the unit");
    let labels = (0..k).map(|i| match i {
        0 => "1".to_string(),
        1 => "x".to_string(),
        _ => format!("x^{i}"),
    });
    let space = Arc::new(GradedSpace::new(vec![(0, labels.collect())]).unwrap());
    let mut table = Table::new();
    for a in 0..k {
        for b in 0..k {
            if a + b < k {
                table.insert((a, b), unit(a + b));
            }
        }
    }
    let cx = CochainComplex::new(space.clone(), GradedLinearMap::zero(space.clone(), space, 1)).unwrap();
    (cx, table, unit(0))
}

fn tuple_label(t: &[usize]) -> String {
    format!("({})", t.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(","))
}

/// Nondecreasing sequences of length `len` in `{0..n-1}`.
pub fn ordered_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        let mut next = vec![];
        for t in out {
            let start = t.last().copied().unwrap_or(0);
            for v in start..n {
                let mut s = t.clone();
                s.push(v);
                next.push(s);
            }
        }
        out = next;
    }
    out
}

fn support(t: &[usize]) -> Subset {
    let mut s = t.to_vec();
    s.dedup();
    s
}

/// The ordered Čech cosimplicial object truncated at `n_max`: level `m` is the
/// product of `A(U_{j_0..j_m})` over `j_0 ≤ … ≤ j_m`; `δ_i` fills in a new index
/// at position `i` and restricts, `σ_j` reads the component with `j_j` repeated.
pub fn ordered_cech(cover: &FiniteCover, n_max: usize) -> Result<CosimplicialComplex> {
    let n = cover.n;
    let tuples: Vec<Vec<Vec<usize>>> = (0..=n_max).map(|m| ordered_tuples(n, m + 1)).collect();
    let mut offsets: Vec<BTreeMap<Vec<usize>, usize>> = vec![];
    let mut levels = vec![];
    for ts in &tuples {
        let mut space = GradedSpace::empty();
        let mut off = BTreeMap::new();
        let mut cols = vec![];
        for t in ts {
            let v = &cover.values[&support(t)];
            let base = space.dim();
            off.insert(t.clone(), base);
            for b in 0..v.space.dim() {
                space.push(v.space.degree(b), format!("{}{}", tuple_label(t), v.space.label(b)))?;
                cols.push(v.d.column(b).iter().map(|(r, x)| (base + r, x.clone())).collect());
            }
        }
        let space = Arc::new(space);
        levels.push(CochainComplex::new(space.clone(), GradedLinearMap::new(space.clone(), space, 1, cols)?)?);
        offsets.push(off);
    }
    let mut cofaces = vec![];
    let mut codegeneracies = vec![];
    for m in 0..n_max {
        let mut faces = vec![];
        for i in 0..=m + 1 {
            let mut cols = vec![SparseVec::new(); levels[m].space.dim()];
            for t in &tuples[m] {
                let lo = if i > 0 { t[i - 1] } else { 0 };
                let hi = if i <= m { t[i] } else { n - 1 };
                for v in lo..=hi {
                    let mut tp = t.clone();
                    tp.insert(i, v);
                    let r = cover.restriction(&support(t), &support(&tp))?;
                    for b in 0..r.source.dim() {
                        for (row, x) in r.column(b) {
                            cols[offsets[m][t] + b].insert(offsets[m + 1][&tp] + row, x.clone());
                        }
                    }
                }
            }
            faces.push(GradedLinearMap::new(levels[m].space.clone(), levels[m + 1].space.clone(), 0, cols)?);
        }
        cofaces.push(faces);
        let mut degs = vec![];
        for j in 0..=m {
            let mut cols = vec![SparseVec::new(); levels[m + 1].space.dim()];
            for tp in tuples[m + 1].iter().filter(|tp| tp[j] == tp[j + 1]) {
                let mut t = tp.clone();
                t.remove(j + 1);
                let dim = cover.values[&support(tp)].space.dim();
                for b in 0..dim {
                    cols[offsets[m + 1][tp] + b] = unit(offsets[m][&t] + b);
                }
            }
            degs.push(GradedLinearMap::new(levels[m + 1].space.clone(), levels[m].space.clone(), 0, cols)?);
        }
        codegeneracies.push(degs);
    }
    let products = cover.products.as_ref().map(|p| LevelProducts {
        kind: p.kind,
        tables: (0..=n_max)
            .map(|m| {
                let mut table = Table::new();
                for t in &tuples[m] {
                    let base = offsets[m][t];
                    for ((a, b), v) in &p.tables[&support(t)] {
                        table.insert((base + a, base + b), v.iter().map(|(r, x)| (base + r, x.clone())).collect());
                    }
                }
                table
            })
            .collect(),
    });
    CosimplicialComplex::new(levels, cofaces, codegeneracies, products)
}

/// Two sets with `Q` on each and `Q²` on the overlap, restrictions `1 ↦ e1 + e2`: the
/// nerve is a circle, so the Čech cohomology is `Q` in degrees 0 and 1.
pub fn diagonal_two_cover() -> FiniteCover {
    let (q1, _, _) = truncated_polynomial_algebra(1);
    let s2 = Arc::new(GradedSpace::new(vec![(0, vec!["e1".to_string(), "e2".to_string()])]).unwrap());
    let q2 = CochainComplex::new(s2.clone(), GradedLinearMap::zero(s2.clone(), s2.clone(), 1)).unwrap();
    let diag = GradedLinearMap::new(q1.space.clone(), s2, 0, vec![[(0, crate::rational::q(1)), (1, crate::rational::q(1))].into_iter().collect()]).unwrap();
    let values = [(vec![0], q1.clone()), (vec![1], q1), (vec![0, 1], q2)].into_iter().collect();
    let restrictions = [((vec![0], vec![0, 1]), diag.clone()), ((vec![1], vec![0, 1]), diag)].into_iter().collect();
    FiniteCover::new(2, values, restrictions, None).expect("diagonal cover")
}
