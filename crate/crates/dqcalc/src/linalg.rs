//! Graded vector spaces with named bases, sparse graded maps, cochain complexes
//! and their cohomology over the rationals.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::format_q;
use crate::sparse::{add_scaled, unit, Echelon, SparseVec};

/// Basis labels grouped by degree. Labels are unique across the whole space, so a
/// label alone identifies a basis vector and its degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSpace {
    labels: Vec<String>,
    degrees: Vec<i64>,
    lookup: HashMap<String, usize>,
    by_degree: BTreeMap<i64, Vec<usize>>,
}

impl GradedSpace {
    pub fn new(blocks: impl IntoIterator<Item = (i64, Vec<String>)>) -> Result<Self> {
        let mut s = GradedSpace {
            labels: vec![],
            degrees: vec![],
            lookup: HashMap::new(),
            by_degree: BTreeMap::new(),
        };
        for (deg, labels) in blocks {
            for l in labels {
                s.push(deg, l)?;
            }
        }
        Ok(s)
    }

    pub fn empty() -> Self {
        Self::new(vec![]).unwrap()
    }

    /// Appends a basis vector and returns its index.
    pub fn push(&mut self, degree: i64, label: String) -> Result<usize> {
        if self.lookup.contains_key(&label) {
            return Err(Error::Invalid(format!("duplicate basis label {label}")));
        }
        let i = self.labels.len();
        self.lookup.insert(label.clone(), i);
        self.labels.push(label);
        self.degrees.push(degree);
        self.by_degree.entry(degree).or_default().push(i);
        Ok(i)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn dim_in(&self, degree: i64) -> usize {
        self.basis_in(degree).len()
    }

    pub fn basis_in(&self, degree: i64) -> &[usize] {
        self.by_degree.get(&degree).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.lookup.get(label).copied()
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.by_degree.keys().copied()
    }

    /// Degree of a homogeneous vector; `None` for zero or inhomogeneous vectors.
    pub fn degree_of(&self, v: &SparseVec) -> Option<i64> {
        let mut it = v.keys().map(|&i| self.degrees[i]);
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    /// `{degree: {label: "p/q"}}`.
    pub fn labeled(&self, v: &SparseVec) -> BTreeMap<i64, BTreeMap<String, String>> {
        let mut out: BTreeMap<i64, BTreeMap<String, String>> = BTreeMap::new();
        for (i, x) in v {
            out.entry(self.degrees[*i]).or_default().insert(self.labels[*i].clone(), format_q(x));
        }
        out
    }

    pub fn from_labeled(&self, m: &BTreeMap<i64, BTreeMap<String, String>>) -> Result<SparseVec> {
        let mut v = SparseVec::new();
        for (deg, entries) in m {
            for (l, x) in entries {
                let i = self.index(l).ok_or_else(|| Error::Parse(format!("unknown label {l}")))?;
                if self.degrees[i] != *deg {
                    return Err(Error::Parse(format!("label {l} has degree {}, not {deg}", self.degrees[i])));
                }
                crate::sparse::add_entry(&mut v, i, crate::rational::parse_q(x)?);
            }
        }
        Ok(v)
    }

    pub fn describe(&self, v: &SparseVec) -> String {
        if v.is_empty() {
            return "0".into();
        }
        v.iter()
            .map(|(i, x)| format!("{}*{}", format_q(x), self.labels[*i]))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// A vector together with the space it lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedVector {
    pub space: Arc<GradedSpace>,
    pub coords: SparseVec,
}

impl GradedVector {
    pub fn new(space: Arc<GradedSpace>, coords: SparseVec) -> Result<Self> {
        if let Some(k) = coords.keys().find(|&&k| k >= space.dim()) {
            return Err(Error::Invalid(format!("index {k} outside space of dimension {}", space.dim())));
        }
        Ok(GradedVector { space, coords })
    }

    pub fn labeled(&self) -> BTreeMap<i64, BTreeMap<String, String>> {
        self.space.labeled(&self.coords)
    }
}

/// Linear map between graded spaces, shifting degree by `degree`; stored by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedLinearMap {
    pub source: Arc<GradedSpace>,
    pub target: Arc<GradedSpace>,
    pub degree: i64,
    cols: Vec<SparseVec>,
}

impl GradedLinearMap {
    pub fn new(source: Arc<GradedSpace>, target: Arc<GradedSpace>, degree: i64, cols: Vec<SparseVec>) -> Result<Self> {
        if cols.len() != source.dim() {
            return Err(Error::Invalid(format!("{} columns for a source of dimension {}", cols.len(), source.dim())));
        }
        for (i, c) in cols.iter().enumerate() {
            for &j in c.keys() {
                if j >= target.dim() {
                    return Err(Error::Invalid(format!("entry {j} outside target")));
                }
                if target.degree(j) != source.degree(i) + degree {
                    return Err(Error::Invalid(format!(
                        "{} -> {} does not shift degree by {degree}",
                        source.label(i),
                        target.label(j)
                    )));
                }
            }
        }
        Ok(GradedLinearMap { source, target, degree, cols })
    }

    pub fn from_fn(source: Arc<GradedSpace>, target: Arc<GradedSpace>, degree: i64, f: impl Fn(usize) -> SparseVec) -> Result<Self> {
        let cols = (0..source.dim()).map(f).collect();
        Self::new(source, target, degree, cols)
    }

    pub fn zero(source: Arc<GradedSpace>, target: Arc<GradedSpace>, degree: i64) -> Self {
        let cols = vec![SparseVec::new(); source.dim()];
        GradedLinearMap { source, target, degree, cols }
    }

    pub fn identity(space: Arc<GradedSpace>) -> Self {
        let cols = (0..space.dim()).map(unit).collect();
        GradedLinearMap { source: space.clone(), target: space, degree: 0, cols }
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.cols
    }

    pub fn column(&self, i: usize) -> &SparseVec {
        &self.cols[i]
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, x) in v {
            add_scaled(&mut out, x, &self.cols[*i]);
        }
        out
    }

    pub fn compose(&self, first: &GradedLinearMap) -> Result<GradedLinearMap> {
        if first.target != self.source {
            return Err(Error::Invalid("composition of maps with mismatched spaces".into()));
        }
        let cols = first.cols.iter().map(|c| self.apply(c)).collect();
        GradedLinearMap::new(first.source.clone(), self.target.clone(), self.degree + first.degree, cols)
    }
}

/// Kernel and image bases of `map` restricted to the degree-`degree` part of its source.
pub fn kernel_image(map: &GradedLinearMap, degree: i64) -> (Vec<GradedVector>, Vec<GradedVector>) {
    let (ker, im) = kernel_image_raw(map, degree);
    let wrap = |space: &Arc<GradedSpace>, vs: Vec<SparseVec>| {
        vs.into_iter().map(|coords| GradedVector { space: space.clone(), coords }).collect()
    };
    (wrap(&map.source, ker), wrap(&map.target, im))
}

pub(crate) fn kernel_image_raw(map: &GradedLinearMap, degree: i64) -> (Vec<SparseVec>, Vec<SparseVec>) {
    let basis = map.source.basis_in(degree);
    let mut ech = Echelon::tracking();
    let mut ker = vec![];
    let mut im = vec![];
    for &i in basis {
        let c = map.cols[i].clone();
        match ech.insert_or_relation(c.clone()) {
            Ok(()) => im.push(c),
            Err(rel) => ker.push(rel.into_iter().map(|(k, x)| (basis[k], x)).collect()),
        }
    }
    (ker, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CochainComplex {
    pub space: Arc<GradedSpace>,
    pub d: GradedLinearMap,
}

impl CochainComplex {
    /// Builds a complex and checks `d∘d = 0` on every basis vector.
    pub fn new(space: Arc<GradedSpace>, d: GradedLinearMap) -> Result<Self> {
        let cx = Self::new_unchecked(space, d)?;
        cx.check_d_squared(None)?;
        Ok(cx)
    }

    pub fn new_unchecked(space: Arc<GradedSpace>, d: GradedLinearMap) -> Result<Self> {
        if d.degree != 1 || d.source != space || d.target != space {
            return Err(Error::Invalid("differential must be a degree +1 endomorphism".into()));
        }
        Ok(CochainComplex { space, d })
    }

    pub fn from_fn(space: Arc<GradedSpace>, f: impl Fn(usize) -> SparseVec) -> Result<Self> {
        let d = GradedLinearMap::from_fn(space.clone(), space.clone(), 1, f)?;
        Self::new(space, d)
    }

    /// Checks `d∘d = 0` on the basis of the listed degrees (all degrees if `None`).
    pub fn check_d_squared(&self, degrees: Option<&[i64]>) -> Result<()> {
        let all: Vec<i64> = self.space.degrees().collect();
        for &k in degrees.unwrap_or(&all) {
            for &i in self.space.basis_in(k) {
                let dd = self.d.apply(self.d.column(i));
                if !dd.is_empty() {
                    return Err(Error::Structure(format!(
                        "d(d({})) = {}",
                        self.space.label(i),
                        self.space.describe(&dd)
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyReport {
    pub degree: i64,
    pub dimension: usize,
    pub representatives: Vec<GradedVector>,
}

pub fn cohomology(cx: &CochainComplex, degree: i64) -> Result<CohomologyReport> {
    cx.check_d_squared(Some(&[degree - 1, degree]))?;
    let (reps, _) = cohomology_raw(cx, degree);
    Ok(CohomologyReport {
        degree,
        dimension: reps.len(),
        representatives: reps.into_iter().map(|coords| GradedVector { space: cx.space.clone(), coords }).collect(),
    })
}

/// Cocycle representatives of a basis of `H^degree`, plus the echelon of coboundaries.
pub(crate) fn cohomology_raw(cx: &CochainComplex, degree: i64) -> (Vec<SparseVec>, Echelon) {
    let (_, boundaries) = kernel_image_raw(&cx.d, degree - 1);
    let (cycles, _) = kernel_image_raw(&cx.d, degree);
    let mut ech = Echelon::from_vectors(boundaries.iter());
    let reps = cycles.into_iter().filter(|z| ech.insert(z.clone())).collect();
    (reps, boundaries_echelon(boundaries))
}

fn boundaries_echelon(b: Vec<SparseVec>) -> Echelon {
    Echelon::from_vectors(b.iter())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiIsoRow {
    pub degree: i64,
    pub source_dim: usize,
    pub target_dim: usize,
    pub induced_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiIsoReport {
    pub is_quasi_iso: bool,
    pub table: Vec<QuasiIsoRow>,
}

/// Checks that `f` is a degree-0 map commuting with the differentials on every
/// basis vector; the error names the first offending vector.
pub fn check_chain_map(f: &GradedLinearMap, source: &CochainComplex, target: &CochainComplex) -> Result<()> {
    if f.degree != 0 || f.source != source.space || f.target != target.space {
        return Err(Error::Invalid("map must be degree 0 between the given complexes".into()));
    }
    for i in 0..source.space.dim() {
        let lhs = target.d.apply(f.column(i));
        let rhs = f.apply(source.d.column(i));
        if lhs != rhs {
            return Err(Error::NotChainMap(format!(
                "d f({0}) = {1} but f d({0}) = {2}",
                source.space.label(i),
                target.space.describe(&lhs),
                target.space.describe(&rhs)
            )));
        }
    }
    Ok(())
}

/// Checks that `f: source → target` is a chain map on every basis vector, then
/// compares cohomology degree by degree on the window.
pub fn is_quasi_iso(
    f: &GradedLinearMap,
    source: &CochainComplex,
    target: &CochainComplex,
    degrees: RangeInclusive<i64>,
) -> Result<QuasiIsoReport> {
    check_chain_map(f, source, target)?;
    let mut table = vec![];
    for k in degrees {
        source.check_d_squared(Some(&[k - 1, k]))?;
        target.check_d_squared(Some(&[k - 1, k]))?;
        let (src_reps, _) = cohomology_raw(source, k);
        let (tgt_reps, mut tgt_b) = cohomology_raw(target, k);
        let rank = src_reps.iter().filter(|z| tgt_b.insert(f.apply(z))).count();
        table.push(QuasiIsoRow { degree: k, source_dim: src_reps.len(), target_dim: tgt_reps.len(), induced_rank: rank });
    }
    let ok = table.iter().all(|r| r.source_dim == r.target_dim && r.induced_rank == r.source_dim);
    Ok(QuasiIsoReport { is_quasi_iso: ok, table })
}

/// A subcomplex together with its inclusion into the ambient complex.
#[derive(Clone, Debug)]
pub struct Subcomplex {
    pub complex: CochainComplex,
    pub inclusion: GradedLinearMap,
    span: Echelon,
}

impl Subcomplex {
    /// Coordinates of an ambient vector in the subcomplex basis, if it lies there.
    pub fn express(&self, v: &SparseVec) -> Option<SparseVec> {
        self.span.express(v)
    }
}

/// The subcomplex `{v : C(v) = 0}` of `cx`, where `constraint` gives the image of
/// each ambient basis vector. Each basis vector is labelled by the ambient label of
/// its last coordinate. Fails if `d` leaves the kernel.
pub fn kernel_subcomplex(cx: &CochainComplex, constraint: impl Fn(usize) -> SparseVec) -> Result<Subcomplex> {
    let s = &cx.space;
    let mut basis: Vec<SparseVec> = vec![];
    let mut sub = GradedSpace::empty();
    for deg in s.degrees().collect::<Vec<_>>() {
        let idx = s.basis_in(deg);
        let mut ech = Echelon::tracking();
        for &i in idx {
            if let Err(rel) = ech.insert_or_relation(constraint(i)) {
                let v: SparseVec = rel.into_iter().map(|(k, x)| (idx[k], x)).collect();
                let (&last, _) = v.iter().next_back().expect("relations are nonzero");
                let label = if v.len() == 1 { s.label(last).to_string() } else { format!("{}+…", s.label(last)) };
                sub.push(deg, label)?;
                basis.push(v);
            }
        }
    }
    let sub = Arc::new(sub);
    let mut span = Echelon::tracking();
    for b in &basis {
        span.insert(b.clone());
    }
    let mut cols = Vec::with_capacity(basis.len());
    for b in &basis {
        let db = cx.d.apply(b);
        cols.push(span.express(&db).ok_or_else(|| {
            Error::Structure(format!("d leaves the subcomplex: d({}) = {}", s.describe(b), s.describe(&db)))
        })?);
    }
    let d = GradedLinearMap::new(sub.clone(), sub.clone(), 1, cols)?;
    let inclusion = GradedLinearMap::new(sub.clone(), s.clone(), 0, basis)?;
    Ok(Subcomplex { complex: CochainComplex::new(sub, d)?, inclusion, span })
}
