use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::cover::*;
use crate::cosimplicial::{table_product, ProductKind};
use crate::error::{Error, Result};
use crate::linalg::{check_chain_map, CochainComplex, GradedLinearMap, GradedSpace};
use crate::rational::sign;
use crate::sparse::{add_entry, add_scaled, unit, SparseVec};

/// A linear category with finitely many objects and finite-dimensional homs.
/// `compose[(x, y, z)][(b, a)]` is `b ∘ a` for `a: x → y`, `b: y → z`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCategory {
    pub objects: Vec<String>,
    pub homs: BTreeMap<(usize, usize), Vec<String>>,
    pub compose: BTreeMap<(usize, usize, usize), BTreeMap<(usize, usize), SparseVec>>,
    pub identities: Vec<SparseVec>,
}

impl LinearCategory {
    /// Checks associativity and the identity laws exactly.
    pub fn new(
        objects: Vec<String>,
        homs: BTreeMap<(usize, usize), Vec<String>>,
        compose: BTreeMap<(usize, usize, usize), BTreeMap<(usize, usize), SparseVec>>,
        identities: Vec<SparseVec>,
    ) -> Result<Self> {
        let homs = homs.into_iter().filter(|(_, b)| !b.is_empty()).collect();
        let u = LinearCategory { objects, homs, compose, identities };
        u.check()?;
        Ok(u)
    }

    pub fn hom_dim(&self, x: usize, y: usize) -> usize {
        self.homs.get(&(x, y)).map_or(0, Vec::len)
    }

    /// `b ∘ a` on basis morphisms.
    pub fn comp(&self, x: usize, y: usize, z: usize, b: usize, a: usize) -> SparseVec {
        self.compose.get(&(x, y, z)).and_then(|t| t.get(&(b, a))).cloned().unwrap_or_default()
    }

    fn comp_vec(&self, x: usize, y: usize, z: usize, b: &SparseVec, a: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, p) in b {
            for (j, q) in a {
                add_scaled(&mut out, &(p * q), &self.comp(x, y, z, *i, *j));
            }
        }
        out
    }

    fn check(&self) -> Result<()> {
        let k = self.objects.len();
        if self.identities.len() != k {
            return Err(Error::Invalid("one identity per object is required".into()));
        }
        for x in 0..k {
            let n = self.hom_dim(x, x);
            if n == 0 || self.identities[x].keys().any(|&i| i >= n) {
                return Err(Error::Invalid(format!("identity of {} is not an endomorphism", self.objects[x])));
            }
        }
        for x in 0..k {
            for y in 0..k {
                for a in 0..self.hom_dim(x, y) {
                    let left = self.comp_vec(x, y, y, &self.identities[y], &unit(a));
                    let right = self.comp_vec(x, x, y, &unit(a), &self.identities[x]);
                    if left != unit(a) || right != unit(a) {
                        return Err(Error::Structure(format!("identity law fails on {}", self.homs[&(x, y)][a])));
                    }
                    for z in 0..k {
                        for b in 0..self.hom_dim(y, z) {
                            let ba = self.comp(x, y, z, b, a);
                            for w in 0..k {
                                for c in 0..self.hom_dim(z, w) {
                                    let lhs = self.comp_vec(x, z, w, &unit(c), &ba);
                                    let rhs = self.comp_vec(x, y, w, &self.comp(y, z, w, c, b), &unit(a));
                                    if lhs != rhs {
                                        return Err(Error::Structure(format!(
                                            "associativity fails on ({}, {}, {})",
                                            self.homs[&(z, w)][c],
                                            self.homs[&(y, z)][b],
                                            self.homs[&(x, y)][a]
                                        )));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The category with objects the nonempty `J` and `hom(J, J′) = A(U_{J′})` for
    /// `J ⊆ J′`, zero otherwise; `b ∘ a = b · res(a)`. Values must be commutative
    /// algebras in degree 0 with units.
    pub fn from_cover(cover: &FiniteCover) -> Result<Self> {
        let p = cover
            .products
            .as_ref()
            .filter(|p| p.kind == ProductKind::Commutative)
            .ok_or_else(|| Error::Invalid("the category needs commutative algebra values".into()))?;
        let subsets = cover.subsets();
        for j in &subsets {
            let v = &cover.values[j];
            if v.space.degrees().any(|d| d != 0) || !p.units.contains_key(j) {
                return Err(Error::Invalid(format!("{} must be an algebra in degree 0 with a unit", subset_label(j))));
            }
        }
        let objects: Vec<String> = subsets.iter().map(|j| subset_label(j)).collect();
        let contains = |a: &Subset, b: &Subset| a.iter().all(|x| b.contains(x));
        let mut homs = BTreeMap::new();
        for (x, a) in subsets.iter().enumerate() {
            for (y, b) in subsets.iter().enumerate() {
                if contains(a, b) {
                    homs.insert((x, y), cover.values[b].space.labels().to_vec());
                }
            }
        }
        let mut compose = BTreeMap::new();
        for (x, a) in subsets.iter().enumerate() {
            for (y, b) in subsets.iter().enumerate().filter(|(_, b)| contains(a, b)) {
                for (z, c) in subsets.iter().enumerate().filter(|(_, c)| contains(b, c)) {
                    let res = cover.restriction(b, c)?;
                    let mut t = BTreeMap::new();
                    for bi in 0..cover.values[c].space.dim() {
                        for ai in 0..cover.values[b].space.dim() {
                            let v = table_product(&p.tables[c], &unit(bi), res.column(ai));
                            if !v.is_empty() {
                                t.insert((bi, ai), v);
                            }
                        }
                    }
                    compose.insert((x, y, z), t);
                }
            }
        }
        let identities = subsets.iter().map(|j| p.units[j].clone()).collect();
        Self::new(objects, homs, compose, identities)
    }
}

/// `(objects X_0..X_p, basis morphisms a_1..a_p with a_i: X_{i-1} → X_i, output basis
/// morphism in hom(X_0, X_p))`.
pub type CochainKey = (Vec<usize>, Vec<usize>, usize);

/// The Hochschild complex of the full subcategory on `objects`, in degrees
/// `0..=cap+1` with the differential out of degree `cap+1` dropped, so cohomology
/// is exact in degrees `0..=cap`.
#[derive(Clone, Debug)]
pub struct CategoryHochschild {
    pub objects: Vec<usize>,
    pub cap: usize,
    pub complex: CochainComplex,
    keys: Vec<CochainKey>,
    index: HashMap<CochainKey, usize>,
}

impl CategoryHochschild {
    pub fn key(&self, i: usize) -> &CochainKey {
        &self.keys[i]
    }

    pub fn index_of(&self, k: &CochainKey) -> Option<usize> {
        self.index.get(k).copied()
    }
}

fn chains(u: &LinearCategory, objects: &[usize], len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = objects.iter().map(|&x| vec![x]).collect();
    for _ in 0..len {
        let mut next = vec![];
        for c in out {
            let last = *c.last().unwrap();
            for &y in objects {
                if u.hom_dim(last, y) > 0 {
                    let mut d = c.clone();
                    d.push(y);
                    next.push(d);
                }
            }
        }
        out = next;
    }
    out
}

fn arg_tuples(u: &LinearCategory, chain: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for w in chain.windows(2) {
        let n = u.hom_dim(w[0], w[1]);
        out = out.into_iter().flat_map(|t| (0..n).map(move |a| [t.clone(), vec![a]].concat())).collect();
    }
    out
}

pub fn category_hochschild(u: &LinearCategory, cap: usize) -> Result<CategoryHochschild> {
    full_subcategory_hochschild(u, &(0..u.objects.len()).collect::<Vec<_>>(), cap)
}

pub fn full_subcategory_hochschild(u: &LinearCategory, objects: &[usize], cap: usize) -> Result<CategoryHochschild> {
    let mut keys = vec![];
    let mut space = GradedSpace::empty();
    for p in 0..=cap + 1 {
        for chain in chains(u, objects, p) {
            let (x0, xp) = (chain[0], *chain.last().unwrap());
            let out_dim = u.hom_dim(x0, xp);
            for args in arg_tuples(u, &chain) {
                for c in 0..out_dim {
                    let names: Vec<&str> = chain.iter().map(|&x| u.objects[x].as_str()).collect();
                    let arg_names: Vec<&str> = chain.windows(2).zip(&args).map(|(w, &a)| u.homs[&(w[0], w[1])][a].as_str()).collect();
                    space.push(p as i64, format!("φ[{}]({}↦{})", names.join(">"), arg_names.join(","), u.homs[&(x0, xp)][c]))?;
                    keys.push((chain.clone(), args.clone(), c));
                }
            }
        }
    }
    let index: HashMap<CochainKey, usize> = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
    let mut cols = vec![SparseVec::new(); keys.len()];
    let add = |cols: &mut Vec<SparseVec>, from: &CochainKey, to: usize, c: &crate::rational::Q| {
        if let Some(&i) = index.get(from) {
            add_entry(&mut cols[i], to, c.clone());
        }
    };
    // (dφ)(a_1..a_{p+1}) = φ(a_2..a_{p+1}) a_1 + Σ_i (−1)^i φ(.., a_{i+1}a_i, ..) + (−1)^{p+1} a_{p+1} φ(a_1..a_p)
    for p in 0..=cap {
        for chain in chains(u, objects, p + 1) {
            let (x0, xl) = (chain[0], chain[p + 1]);
            for args in arg_tuples(u, &chain) {
                let target = |c2: usize| index[&(chain.clone(), args.clone(), c2)];
                let head = (chain[..=p].to_vec(), args[..p].to_vec());
                for c in 0..u.hom_dim(x0, chain[p]) {
                    for (c2, x) in u.comp(x0, chain[p], xl, args[p], c) {
                        add(&mut cols, &(head.0.clone(), head.1.clone(), c), target(c2), &(sign(p as i64 + 1) * x));
                    }
                }
                for i in 1..=p {
                    let (xa, xb, xc) = (chain[i - 1], chain[i], chain[i + 1]);
                    let mut sub_chain = chain.clone();
                    sub_chain.remove(i);
                    for (e, x) in u.comp(xa, xb, xc, args[i], args[i - 1]) {
                        let mut sub_args = args.clone();
                        sub_args.splice(i - 1..=i, [e]);
                        for c2 in 0..u.hom_dim(x0, xl) {
                            add(&mut cols, &(sub_chain.clone(), sub_args.clone(), c2), target(c2), &(sign(i as i64) * &x));
                        }
                    }
                }
                let tail = (chain[1..].to_vec(), args[1..].to_vec());
                for c in 0..u.hom_dim(chain[1], xl) {
                    for (c2, x) in u.comp(x0, chain[1], xl, c, args[0]) {
                        add(&mut cols, &(tail.0.clone(), tail.1.clone(), c), target(c2), &x);
                    }
                }
            }
        }
    }
    let space = Arc::new(space);
    let d = GradedLinearMap::new(space.clone(), space.clone(), 1, cols)?;
    let complex = CochainComplex::new(space, d)?;
    Ok(CategoryHochschild { objects: objects.to_vec(), cap, complex, keys, index })
}

/// The restriction `C(u) → C(v)` to a full subcategory on fewer objects: keeps the
/// values on chains inside `v`. Checked to be a chain map.
pub fn restriction_map(from: &CategoryHochschild, to: &CategoryHochschild) -> Result<GradedLinearMap> {
    if from.cap != to.cap || to.objects.iter().any(|x| !from.objects.contains(x)) {
        return Err(Error::Invalid("restriction needs a full subcategory with the same cap".into()));
    }
    let cols = from.keys.iter().map(|k| to.index_of(k).map(unit).unwrap_or_default()).collect();
    let f = GradedLinearMap::new(from.complex.space.clone(), to.complex.space.clone(), 0, cols)?;
    check_chain_map(&f, &from.complex, &to.complex)?;
    Ok(f)
}
