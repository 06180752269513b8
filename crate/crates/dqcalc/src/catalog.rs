//! Small hand-built DG-Lie algebras used by the checks and the command line.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::dgla::DGLieAlgebra;
use crate::linfty::ContractionAction;
use crate::error::{Error, Result};
use crate::linalg::{CochainComplex, GradedLinearMap, GradedSpace};
use crate::rational::{q, sign, Q};
use crate::sparse::{add_entry, add_scaled, Echelon, SparseVec};

/// Assembles a DG-Lie algebra from labelled data. Brackets are entered once per
/// unordered pair and completed by graded antisymmetry.
#[derive(Default)]
pub struct DglaBuilder {
    space: GradedSpace,
    d: BTreeMap<usize, SparseVec>,
    bracket: BTreeMap<(usize, usize), SparseVec>,
}

impl Default for GradedSpace {
    fn default() -> Self {
        GradedSpace::empty()
    }
}

impl DglaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(mut self, degree: i64, labels: &[&str]) -> Self {
        for l in labels {
            self.space.push(degree, l.to_string()).expect("duplicate label");
        }
        self
    }

    fn idx(&self, l: &str) -> usize {
        self.space.index(l).unwrap_or_else(|| panic!("unknown label {l}"))
    }

    fn vec(&self, terms: &[(i64, &str)]) -> SparseVec {
        let mut v = SparseVec::new();
        for (c, l) in terms {
            add_entry(&mut v, self.idx(l), q(*c));
        }
        v
    }

    pub fn d(mut self, from: &str, to: &[(i64, &str)]) -> Self {
        let v = self.vec(to);
        self.d.insert(self.idx(from), v);
        self
    }

    /// Sets `[a,b]` and `[b,a] = −(−1)^{|a||b|}[a,b]`.
    pub fn bracket(mut self, a: &str, b: &str, value: &[(i64, &str)]) -> Self {
        let (i, j) = (self.idx(a), self.idx(b));
        let v = self.vec(value);
        let s = -sign(self.space.degree(i) * self.space.degree(j));
        self.bracket.insert((j, i), crate::sparse::scaled(&s, &v));
        self.bracket.insert((i, j), v);
        self
    }

    /// Sets `[a,b]` only, without completing the opposite order.
    pub fn raw_bracket(mut self, a: &str, b: &str, value: &[(i64, &str)]) -> Self {
        let (i, j) = (self.idx(a), self.idx(b));
        let v = self.vec(value);
        self.bracket.insert((i, j), v);
        self
    }

    pub fn build(self) -> Result<DGLieAlgebra> {
        let space = Arc::new(self.space);
        let d = GradedLinearMap::from_fn(space.clone(), space.clone(), 1, |i| self.d.get(&i).cloned().unwrap_or_default())?;
        DGLieAlgebra::new(CochainComplex::new_unchecked(space, d)?, self.bracket)
    }
}

/// Ungraded Lie algebra given by structure constants `[x_i, x_j] = Σ c_k x_k`.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    pub names: Vec<&'static str>,
    pub brackets: Vec<(usize, usize, Vec<(i64, usize)>)>,
}

/// Finite-dimensional commutative DG algebra with unit as basis element 0.
#[derive(Clone, Debug)]
pub struct Cdga {
    pub names: Vec<&'static str>,
    pub degrees: Vec<i64>,
    /// products of basis elements `(i, j) ↦ Σ c_k a_k` for `i ≤ j`
    pub products: Vec<(usize, usize, Vec<(i64, usize)>)>,
    pub d: Vec<(usize, Vec<(i64, usize)>)>,
}

impl Cdga {
    fn product(&self, i: usize, j: usize) -> SparseVec {
        let (a, b, s) = if i <= j { (i, j, q(1)) } else { (j, i, sign(self.degrees[i] * self.degrees[j])) };
        if a == 0 {
            return crate::sparse::unit(b);
        }
        let mut v = SparseVec::new();
        for (x, y, terms) in &self.products {
            if (*x, *y) == (a, b) {
                for (c, k) in terms {
                    add_entry(&mut v, *k, &s * q(*c));
                }
            }
        }
        v
    }

    fn diff(&self, i: usize) -> SparseVec {
        let mut v = SparseVec::new();
        for (x, terms) in &self.d {
            if *x == i {
                for (c, k) in terms {
                    add_entry(&mut v, *k, q(*c));
                }
            }
        }
        v
    }
}

pub fn sl2() -> LieAlgebra {
    // e=0, f=1, h=2: [e,f]=h, [h,e]=2e, [h,f]=-2f
    LieAlgebra { names: vec!["e", "f", "h"], brackets: vec![(0, 1, vec![(1, 2)]), (2, 0, vec![(2, 0)]), (2, 1, vec![(-2, 1)])] }
}

pub fn heisenberg() -> LieAlgebra {
    LieAlgebra { names: vec!["p", "r", "z"], brackets: vec![(0, 1, vec![(1, 2)])] }
}

pub fn affine_line() -> LieAlgebra {
    LieAlgebra { names: vec!["a", "b"], brackets: vec![(0, 1, vec![(1, 1)])] }
}

pub fn so3() -> LieAlgebra {
    LieAlgebra {
        names: vec!["l1", "l2", "l3"],
        brackets: vec![(0, 1, vec![(1, 2)]), (1, 2, vec![(1, 0)]), (2, 0, vec![(1, 1)])],
    }
}

pub fn ground_field() -> Cdga {
    Cdga { names: vec!["1"], degrees: vec![0], products: vec![], d: vec![] }
}

/// Exterior algebra on two degree-one generators, zero differential.
pub fn exterior2() -> Cdga {
    Cdga {
        names: vec!["1", "u", "v", "uv"],
        degrees: vec![0, 1, 1, 2],
        products: vec![(1, 2, vec![(1, 3)])],
        d: vec![],
    }
}

/// `span{1, s, t}` with `s² = st = t² = 0`, `|t| = 1`, `ds = t`.
pub fn interval_germ() -> Cdga {
    Cdga { names: vec!["1", "s", "t"], degrees: vec![0, 0, 1], products: vec![], d: vec![(1, vec![(1, 2)])] }
}

/// `span{1, s, t, u, su}` with `|s| = 0`, `|t| = |u| = 1`, `ds = t`, `s·u = su`, `|su| = 1`,
/// `d(su) = tu`, `|tu| = 2`; all other products zero.
pub fn germ_times_exterior() -> Cdga {
    Cdga {
        names: vec!["1", "s", "t", "u", "su", "tu"],
        degrees: vec![0, 0, 1, 1, 1, 2],
        products: vec![(1, 3, vec![(1, 4)]), (2, 3, vec![(1, 5)])],
        d: vec![(1, vec![(1, 2)]), (4, vec![(1, 5)])],
    }
}

/// `L ⊗ A` with `[x⊗a, y⊗b] = [x,y]⊗ab` and `d(x⊗a) = x⊗da`.
pub fn lie_tensor_cdga(l: &LieAlgebra, a: &Cdga) -> Result<DGLieAlgebra> {
    let mut space = GradedSpace::empty();
    let n = a.names.len();
    for x in &l.names {
        for (p, an) in a.names.iter().enumerate() {
            let label = if *an == "1" { x.to_string() } else { format!("{x}.{an}") };
            space.push(a.degrees[p], label)?;
        }
    }
    let space = Arc::new(space);
    let idx = |x: usize, p: usize| x * n + p;
    let lie = |x: usize, y: usize| -> SparseVec {
        let mut v = SparseVec::new();
        for (i, j, terms) in &l.brackets {
            let s = if (*i, *j) == (x, y) {
                q(1)
            } else if (*i, *j) == (y, x) {
                q(-1)
            } else {
                continue;
            };
            for (c, k) in terms {
                add_entry(&mut v, *k, &s * q(*c));
            }
        }
        v
    };
    let d = GradedLinearMap::from_fn(space.clone(), space.clone(), 1, |i| {
        let (x, p) = (i / n, i % n);
        a.diff(p).into_iter().map(|(r, c)| (idx(x, r), c)).collect()
    })?;
    let mut bracket = BTreeMap::new();
    for x in 0..l.names.len() {
        for y in 0..l.names.len() {
            let xy = lie(x, y);
            if xy.is_empty() {
                continue;
            }
            for p in 0..n {
                for r in 0..n {
                    let ab = a.product(p, r);
                    let mut v = SparseVec::new();
                    for (z, c) in &xy {
                        for (k, e) in &ab {
                            add_entry(&mut v, idx(*z, *k), c * e);
                        }
                    }
                    if !v.is_empty() {
                        bracket.insert((idx(x, p), idx(y, r)), v);
                    }
                }
            }
        }
    }
    DGLieAlgebra::new(CochainComplex::new_unchecked(space, d)?, bracket)
}

/// Two-dimensional algebra `a` (degree 0), `b` (degree 1), `[a,b] = b`, `d = 0`.
pub fn two_dim() -> DGLieAlgebra {
    DglaBuilder::new().basis(0, &["a"]).basis(1, &["b"]).bracket("a", "b", &[(1, "b")]).build().unwrap()
}

/// Antisymmetric bracket on three degree-zero vectors violating Jacobi.
pub fn jacobi_broken() -> DGLieAlgebra {
    DglaBuilder::new()
        .basis(0, &["a", "b", "c"])
        .bracket("a", "b", &[(1, "c")])
        .bracket("b", "c", &[(1, "c")])
        .bracket("a", "c", &[(1, "a")])
        .build()
        .unwrap()
}

/// The same algebra in the basis `f_i = Σ_k P_{ki} e_k` for a random unipotent,
/// degree-preserving `P`.
pub fn change_basis<R: Rng>(g: &DGLieAlgebra, rng: &mut R) -> Result<DGLieAlgebra> {
    let s = g.space().clone();
    let n = s.dim();
    let mut new_basis: Vec<SparseVec> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = crate::sparse::unit(i);
        for j in (i + 1)..n {
            if s.degree(j) == s.degree(i) {
                add_entry(&mut v, j, q(rng.gen_range(-2..=2)));
            }
        }
        new_basis.push(v);
    }
    let mut ech = Echelon::tracking();
    for v in &new_basis {
        if !ech.insert(v.clone()) {
            return Err(Error::Invalid("basis change is singular".into()));
        }
    }
    let coords = |v: &SparseVec| ech.express(v).expect("vector outside span");
    let d = GradedLinearMap::from_fn(s.clone(), s.clone(), 1, |i| coords(&g.d(&new_basis[i])))?;
    let mut bracket = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            let v = coords(&g.bracket(&new_basis[i], &new_basis[j]));
            if !v.is_empty() {
                bracket.insert((i, j), v);
            }
        }
    }
    DGLieAlgebra::new(CochainComplex::new_unchecked(s, d)?, bracket)
}

/// A catalog entry picked by index; used for seeded sweeps.
pub fn standard_dglas() -> Vec<(&'static str, DGLieAlgebra)> {
    let mut out = vec![("two_dim", two_dim())];
    let pairs: Vec<(&str, LieAlgebra, Cdga)> = vec![
        ("sl2_ext2", sl2(), exterior2()),
        ("heis_germ", heisenberg(), interval_germ()),
        ("affine_germ_ext", affine_line(), germ_times_exterior()),
        ("so3_ext2", so3(), exterior2()),
        ("sl2_germ_ext", sl2(), germ_times_exterior()),
    ];
    for (name, l, a) in pairs {
        out.push((name, lie_tensor_cdga(&l, &a).unwrap()));
    }
    out
}

/// Scales a vector by a rational; small convenience for callers building elements.
pub fn combo(terms: &[(Q, usize)]) -> SparseVec {
    let mut v = SparseVec::new();
    for (c, i) in terms {
        add_scaled(&mut v, c, &crate::sparse::unit(*i));
    }
    v
}

/// `id ⊗ ι` on `L ⊗ A` for each named degree −1 derivation `ι` of `A`, given on the
/// basis of `A` as `(index, image)`; unlisted basis elements go to zero.
pub fn tensor_contraction(
    l: &LieAlgebra,
    a: &Cdga,
    derivations: &[(&str, Vec<(usize, Vec<(i64, usize)>)>)],
) -> Result<ContractionAction> {
    let g = lie_tensor_cdga(l, a)?;
    let s = g.space().clone();
    let n = a.names.len();
    let mut generators = Vec::new();
    for (name, images) in derivations {
        let map = GradedLinearMap::from_fn(s.clone(), s.clone(), -1, |i| {
            let (x, p) = (i / n, i % n);
            let mut v = SparseVec::new();
            for (src, terms) in images {
                if *src == p {
                    for (c, k) in terms {
                        add_entry(&mut v, x * n + k, q(*c));
                    }
                }
            }
            v
        })?;
        generators.push((name.to_string(), map));
    }
    ContractionAction::new(g, generators)
}

/// Contraction actions on catalog algebras: `ι_u`, `ι_v` on the exterior algebra,
/// `ι(t) = s` on the interval germ and `ι(u) = 1` on the germ times exterior algebra.
pub fn standard_actions() -> Vec<(&'static str, ContractionAction)> {
    let iota_u = ("u", vec![(1, vec![(1, 0)]), (3, vec![(1, 2)])]);
    let iota_v = ("v", vec![(2, vec![(1, 0)]), (3, vec![(-1, 1)])]);
    let iota_ts = ("t", vec![(2, vec![(1, 1)])]);
    let iota_ge = ("u", vec![(3, vec![(1, 0)]), (4, vec![(1, 1)]), (5, vec![(-1, 2)])]);
    let specs: Vec<(&str, LieAlgebra, Cdga, Vec<(&str, Vec<(usize, Vec<(i64, usize)>)>)>)> = vec![
        ("sl2_ext2:u", sl2(), exterior2(), vec![iota_u.clone()]),
        ("sl2_ext2:u,v", sl2(), exterior2(), vec![iota_u, iota_v.clone()]),
        ("so3_ext2:v", so3(), exterior2(), vec![iota_v]),
        ("heis_germ:t", heisenberg(), interval_germ(), vec![iota_ts]),
        ("affine_germ_ext:u", affine_line(), germ_times_exterior(), vec![iota_ge.clone()]),
        ("sl2_germ_ext:u", sl2(), germ_times_exterior(), vec![iota_ge]),
    ];
    specs
        .into_iter()
        .map(|(name, l, a, ders)| (name, tensor_contraction(&l, &a, &ders).expect("catalog contraction")))
        .collect()
}
