//! JSON input formats for the command line. Vectors are objects `{label: "p/q"}`;
//! cover sets are 1-based lists such as `[1, 2]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use crate::cech::{CoverProducts, FiniteCover, Table};
use crate::cosimplicial::ProductKind;
use crate::dgla::{DGLieAlgebra, MCElement};
use crate::error::{Error, Result};
use crate::linalg::{CochainComplex, GradedLinearMap, GradedSpace};
use crate::linfty::{ShiftedSpace, TaylorTower, TowerKind};
use crate::rational::{parse_q, sign};
use crate::sparse::{add_entry, scaled, SparseVec};

pub type VectorJson = BTreeMap<String, String>;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisJson {
    pub label: String,
    pub degree: i64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductJson {
    pub left: String,
    pub right: String,
    pub value: VectorJson,
}

/// `{basis, d}` with `d` mapping a source label to its image; absent labels are cocycles.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub basis: Vec<BasisJson>,
    #[serde(default)]
    pub d: BTreeMap<String, VectorJson>,
}

/// A complex plus brackets on ordered pairs. Unless `[right, left]` is also listed, it
/// is filled in by graded antisymmetry.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DglaJson {
    pub basis: Vec<BasisJson>,
    #[serde(default)]
    pub d: BTreeMap<String, VectorJson>,
    #[serde(default)]
    pub bracket: Vec<ProductJson>,
}

/// A DG-Lie algebra and a candidate Maurer-Cartan element given by its coefficients of
/// `ε^1, …, ε^{order−1}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McJson {
    pub dgla: DglaJson,
    pub order: usize,
    pub mc: Vec<VectorJson>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverValueJson {
    pub set: Vec<usize>,
    pub basis: Vec<BasisJson>,
    #[serde(default)]
    pub d: BTreeMap<String, VectorJson>,
    #[serde(default)]
    pub product: Vec<ProductJson>,
    pub unit: Option<VectorJson>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionJson {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    /// Source label to image.
    pub map: BTreeMap<String, VectorJson>,
}

/// `kind` is `"commutative"`, `"lie"` or absent (no products).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverJson {
    pub n: usize,
    pub kind: Option<String>,
    pub values: Vec<CoverValueJson>,
    #[serde(default)]
    pub restrictions: Vec<RestrictionJson>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    pub arity: usize,
    /// Word such as `"a,b"` to the value of the Taylor coefficient on it.
    pub entries: BTreeMap<String, VectorJson>,
}

/// An L∞ structure tower on `g[1]`. `basis` lists `g` with its unshifted degrees as in
/// the other formats; components not listed are zero.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerJson {
    pub kind: TowerKind,
    pub arity_bound: usize,
    pub basis: Vec<BasisJson>,
    pub components: Vec<ComponentJson>,
}

pub fn from_str<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{path}: {m}")),
        other => other,
    }
}

pub fn vector(space: &GradedSpace, v: &VectorJson, path: &str) -> Result<SparseVec> {
    let mut out = SparseVec::new();
    for (label, x) in v {
        let i = space.index(label).ok_or_else(|| Error::Parse(format!("{path}: unknown label {label:?}")))?;
        add_entry(&mut out, i, parse_q(x).map_err(|e| at(path, e))?);
    }
    Ok(out)
}

fn space(basis: &[BasisJson], path: &str) -> Result<Arc<GradedSpace>> {
    let mut s = GradedSpace::empty();
    for b in basis {
        s.push(b.degree, b.label.clone()).map_err(|e| Error::Parse(format!("{path}.basis: {e}")))?;
    }
    Ok(Arc::new(s))
}

fn complex(basis: &[BasisJson], d: &BTreeMap<String, VectorJson>, path: &str) -> Result<CochainComplex> {
    let s = space(basis, path)?;
    let mut cols = vec![SparseVec::new(); s.dim()];
    for (label, img) in d {
        let i = s.index(label).ok_or_else(|| Error::Parse(format!("{path}.d: unknown label {label:?}")))?;
        cols[i] = vector(&s, img, &format!("{path}.d.{label}"))?;
    }
    let dmap = GradedLinearMap::new(s.clone(), s.clone(), 1, cols).map_err(|e| Error::Parse(format!("{path}.d: {e}")))?;
    CochainComplex::new_unchecked(s, dmap)
}

fn table(s: &GradedSpace, products: &[ProductJson], antisymmetric: bool, path: &str) -> Result<Table> {
    let mut t = Table::new();
    let given: Vec<(usize, usize)> = products
        .iter()
        .map(|p| Ok((index(s, &p.left, path)?, index(s, &p.right, path)?)))
        .collect::<Result<_>>()?;
    for (p, &(i, j)) in products.iter().zip(&given) {
        let v = vector(s, &p.value, &format!("{path}[{},{}]", p.left, p.right))?;
        if antisymmetric && !given.contains(&(j, i)) {
            t.insert((j, i), scaled(&-sign(s.degree(i) * s.degree(j)), &v));
        }
        t.insert((i, j), v);
    }
    Ok(t)
}

fn index(s: &GradedSpace, label: &str, path: &str) -> Result<usize> {
    s.index(label).ok_or_else(|| Error::Parse(format!("{path}: unknown label {label:?}")))
}

pub fn dgla(j: &DglaJson) -> Result<DGLieAlgebra> {
    let cx = complex(&j.basis, &j.d, "dgla")?;
    let t = table(&cx.space, &j.bracket, true, "dgla.bracket")?;
    DGLieAlgebra::new(cx, t)
}

pub fn mc_element(j: &McJson) -> Result<(DGLieAlgebra, MCElement)> {
    let g = dgla(&j.dgla)?;
    let coeffs = j.mc.iter().enumerate().map(|(k, v)| vector(g.space(), v, &format!("mc[{k}]"))).collect::<Result<Vec<_>>>()?;
    let pi = MCElement::new(&g, j.order, coeffs).map_err(|e| Error::Parse(format!("mc: {e}")))?;
    Ok((g, pi))
}

fn subset(set: &[usize], n: usize, path: &str) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(set.len());
    for &x in set {
        if x == 0 || x > n {
            return Err(Error::Parse(format!("{path}: set element {x} outside 1..={n}")));
        }
        out.push(x - 1);
    }
    out.sort_unstable();
    out.dedup();
    if out.len() != set.len() || out.is_empty() {
        return Err(Error::Parse(format!("{path}: sets must be nonempty without repeats")));
    }
    Ok(out)
}

pub fn cover(j: &CoverJson) -> Result<FiniteCover> {
    let kind = match j.kind.as_deref() {
        None => None,
        Some("commutative") => Some(ProductKind::Commutative),
        Some("lie") => Some(ProductKind::Lie),
        Some(k) => return Err(Error::Parse(format!("kind: expected \"commutative\" or \"lie\", got {k:?}"))),
    };
    let mut values = BTreeMap::new();
    let mut tables = BTreeMap::new();
    let mut units = BTreeMap::new();
    for (k, v) in j.values.iter().enumerate() {
        let path = format!("values[{k}]");
        let set = subset(&v.set, j.n, &path)?;
        let cx = complex(&v.basis, &v.d, &path)?;
        if let Some(kind) = kind {
            tables.insert(set.clone(), table(&cx.space, &v.product, kind == ProductKind::Lie, &format!("{path}.product"))?);
            if let Some(u) = &v.unit {
                units.insert(set.clone(), vector(&cx.space, u, &format!("{path}.unit"))?);
            }
        }
        if values.insert(set, cx).is_some() {
            return Err(Error::Parse(format!("{path}: set given twice")));
        }
    }
    let mut restrictions = BTreeMap::new();
    for (k, r) in j.restrictions.iter().enumerate() {
        let path = format!("restrictions[{k}]");
        let (a, b) = (subset(&r.from, j.n, &path)?, subset(&r.to, j.n, &path)?);
        let (Some(src), Some(tgt)) = (values.get(&a), values.get(&b)) else {
            return Err(Error::Parse(format!("{path}: no value on one of the sets")));
        };
        let mut cols = vec![SparseVec::new(); src.space.dim()];
        for (label, img) in &r.map {
            let i = index(&src.space, label, &path)?;
            cols[i] = vector(&tgt.space, img, &format!("{path}.map.{label}"))?;
        }
        let map = GradedLinearMap::new(src.space.clone(), tgt.space.clone(), 0, cols).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
        restrictions.insert((a, b), map);
    }
    let products = kind.map(|kind| CoverProducts { kind, tables, units });
    FiniteCover::new(j.n, values, restrictions, products)
}

pub fn tower(j: &TowerJson) -> Result<TaylorTower> {
    if j.kind != TowerKind::Structure {
        return Err(Error::Parse(format!("kind: expected \"structure\", got {:?}", j.kind)));
    }
    let s = ShiftedSpace::shift_of(&*space(&j.basis, "tower")?);
    let mut t = TaylorTower::new(TowerKind::Structure, 1, j.arity_bound, s.clone(), s.clone());
    t.exact = true;
    for (k, c) in j.components.iter().enumerate() {
        for (word, v) in &c.entries {
            let path = format!("components[{k}].entries.{word}");
            let letters = word.split(',').map(|l| index(&s.space, l.trim(), &path)).collect::<Result<Vec<_>>>()?;
            if letters.len() != c.arity {
                return Err(Error::Parse(format!("{path}: word of length {} in arity {}", letters.len(), c.arity)));
            }
            let value = vector(&s.space, v, &path)?;
            t.set(&letters, value).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
        }
    }
    Ok(t)
}
