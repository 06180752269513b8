use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{binomial, format_q, parse_q, Q};

/// Exponent vector of a monomial in `x_1..x_d`.
pub type Monomial = Vec<u32>;
/// Multi-index `α` of a constant-coefficient operator `∂^α`.
pub type MultiIndex = Vec<u32>;
pub type Poly = BTreeMap<Monomial, Q>;

pub fn mono_degree(m: &[u32]) -> u32 {
    m.iter().sum()
}

pub fn mono_mul(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `∂^α x^m = c·x^{m-α}`, or `None` when some exponent drops below zero.
pub fn mono_derivative(m: &[u32], alpha: &[u32]) -> Option<(Q, Monomial)> {
    let mut c = Q::from_integer(1.into());
    let mut out = Vec::with_capacity(m.len());
    for (&e, &a) in m.iter().zip(alpha) {
        if a > e {
            return None;
        }
        for k in 0..a {
            c *= Q::from_integer((e - k).into());
        }
        out.push(e - a);
    }
    Some((c, out))
}

pub fn var_name(d: usize, i: usize) -> String {
    if d <= 3 {
        ["x", "y", "z"][i].to_string()
    } else {
        format!("x{}", i + 1)
    }
}

pub fn format_monomial(m: &[u32]) -> String {
    let d = m.len();
    let mut s = String::new();
    for (i, &e) in m.iter().enumerate() {
        match e {
            0 => {}
            1 => s.push_str(&var_name(d, i)),
            _ => s.push_str(&format!("{}^{e}", var_name(d, i))),
        }
    }
    if s.is_empty() {
        "1".into()
    } else {
        s
    }
}

fn format_multi(alpha: &[u32]) -> String {
    let d = alpha.len();
    let mut s = String::new();
    for (i, &e) in alpha.iter().enumerate() {
        match e {
            0 => {}
            1 => s.push_str(&format!("∂{}", var_name(d, i))),
            _ => s.push_str(&format!("∂{}^{e}", var_name(d, i))),
        }
    }
    if s.is_empty() {
        "1".into()
    } else {
        s
    }
}

/// All monomials in `d` variables of total degree `deg`.
pub fn monomials_of_degree(d: usize, deg: u32) -> Vec<Monomial> {
    if d == 0 {
        return if deg == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=deg).rev() {
        for mut rest in monomials_of_degree(d - 1, deg - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All tuples of `n` multi-indices in `d` variables with total order `k`.
pub fn multi_index_tuples(d: usize, n: usize, k: u32) -> Vec<Vec<MultiIndex>> {
    monomials_of_degree(d * n, k).into_iter().map(|flat| flat.chunks(d.max(1)).map(|c| c.to_vec()).collect()).collect()
}

/// Splits `α` into `parts` multi-indices with the multinomial weight `α!/Π γ_j!`.
pub fn multinomial_splits(alpha: &[u32], parts: usize) -> Vec<(Q, Vec<MultiIndex>)> {
    let mut out: Vec<(Q, Vec<MultiIndex>)> = vec![(Q::from_integer(1.into()), vec![Vec::new(); parts])];
    for &a in alpha {
        let mut next = Vec::new();
        for (c, tuple) in &out {
            for comp in monomials_of_degree(parts, a) {
                let mut w = c.clone();
                let mut left = a;
                for &g in &comp {
                    w *= binomial(left, g);
                    left -= g;
                }
                let mut t = tuple.clone();
                for (j, &g) in comp.iter().enumerate() {
                    t[j].push(g);
                }
                next.push((w, t));
            }
        }
        out = next;
    }
    out
}

pub fn poly_add_term(p: &mut Poly, m: Monomial, c: Q) {
    if c == Q::from_integer(0.into()) {
        return;
    }
    let e = p.entry(m.clone()).or_insert_with(|| Q::from_integer(0.into()));
    *e += c;
    if *e == Q::from_integer(0.into()) {
        p.remove(&m);
    }
}

pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (m, x) in a {
        for (n, y) in b {
            poly_add_term(&mut out, mono_mul(m, n), x * y);
        }
    }
    out
}

pub fn poly_derivative(p: &Poly, alpha: &[u32]) -> Poly {
    let mut out = Poly::new();
    for (m, x) in p {
        if let Some((c, n)) = mono_derivative(m, alpha) {
            poly_add_term(&mut out, n, c * x);
        }
    }
    out
}

pub fn poly_add_scaled(acc: &mut Poly, c: &Q, p: &Poly) {
    for (m, x) in p {
        poly_add_term(acc, m.clone(), c * x);
    }
}

pub fn monomial_poly(m: Monomial) -> Poly {
    Poly::from([(m, Q::from_integer(1.into()))])
}

pub fn format_poly(p: &Poly) -> String {
    if p.is_empty() {
        return "0".into();
    }
    p.iter().map(|(m, x)| format!("{}*{}", format_q(x), format_monomial(m))).collect::<Vec<_>>().join(" + ")
}

/// Sorts `idx` in place, returning the permutation sign, or `None` on a repeat.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<bool> {
    let mut neg = false;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            neg = !neg;
            j -= 1;
        }
    }
    idx.windows(2).all(|w| w[0] < w[1]).then_some(neg)
}

/// `f·∂_{i_1}∧…∧∂_{i_n}` with `i_1 < … < i_n`, summed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVectorField {
    pub dim: usize,
    pub arity: usize,
    pub terms: BTreeMap<(Monomial, Vec<usize>), Q>,
}

impl PolyVectorField {
    pub fn zero(dim: usize, arity: usize) -> Self {
        PolyVectorField { dim, arity, terms: BTreeMap::new() }
    }

    /// Adds `c·x^m·∂_{idx[0]}∧…`, reordering the wedge with its sign.
    pub fn add_term(&mut self, m: Monomial, idx: &[usize], c: Q) {
        assert_eq!(idx.len(), self.arity, "arity mismatch");
        assert_eq!(m.len(), self.dim, "dimension mismatch");
        let mut idx = idx.to_vec();
        let Some(neg) = sort_with_sign(&mut idx) else { return };
        let c = if neg { -c } else { c };
        let key = (m, idx);
        let e = self.terms.entry(key.clone()).or_insert_with(|| Q::from_integer(0.into()));
        *e += c;
        if *e == Q::from_integer(0.into()) {
            self.terms.remove(&key);
        }
    }

    pub fn term(dim: usize, m: Monomial, idx: &[usize], c: Q) -> Self {
        let mut p = Self::zero(dim, idx.len());
        p.add_term(m, idx, c);
        p
    }

    pub fn add_scaled(&mut self, c: &Q, other: &PolyVectorField) {
        assert_eq!(self.arity, other.arity, "arity mismatch");
        for ((m, idx), x) in &other.terms {
            self.add_term(m.clone(), idx, c * x);
        }
    }

    pub fn scaled(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.dim, self.arity);
        out.add_scaled(c, self);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn internal_degree(m: &[u32], idx: &[usize]) -> i64 {
        mono_degree(m) as i64 - idx.len() as i64
    }

    /// Evaluates on polynomials as a multiderivation: `f·Σ_σ sgn(σ) Π ∂_{i_σ(k)} a_k`.
    pub fn eval(&self, args: &[Poly]) -> Poly {
        assert_eq!(args.len(), self.arity, "wrong number of arguments");
        let mut out = Poly::new();
        for ((m, idx), c) in &self.terms {
            for (perm, neg) in permutations(idx.len()) {
                let mut prod = monomial_poly(m.clone());
                for (k, a) in args.iter().enumerate() {
                    let mut alpha = vec![0; self.dim];
                    alpha[idx[perm[k]]] = 1;
                    prod = poly_mul(&prod, &poly_derivative(a, &alpha));
                }
                poly_add_scaled(&mut out, &if neg { -c.clone() } else { c.clone() }, &prod);
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms.iter().map(|((m, idx), x)| format!("{}*{}", format_q(x), pv_label(self.dim, m, idx))).collect::<Vec<_>>().join(" + ")
    }
}

pub fn pv_label(d: usize, m: &[u32], idx: &[usize]) -> String {
    if idx.is_empty() {
        return format_monomial(m);
    }
    let w: Vec<String> = idx.iter().map(|&i| format!("∂{}", var_name(d, i))).collect();
    format!("{}·{}", format_monomial(m), w.join("∧"))
}

pub fn op_label(m: &[u32], alphas: &[MultiIndex]) -> String {
    if alphas.is_empty() {
        return format_monomial(m);
    }
    let w: Vec<String> = alphas.iter().map(|a| format_multi(a)).collect();
    format!("{}·[{}]", format_monomial(m), w.join("|"))
}

/// All permutations of `0..n` with their parity (`true` for odd).
pub fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    if n == 0 {
        return vec![(vec![], false)];
    }
    let mut out = Vec::new();
    for (p, neg) in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            // inserting at `pos` passes over `n-1-pos` larger-indexed slots
            let moved = (p.len() - pos) % 2 == 1;
            out.push((q, neg ^ moved));
        }
    }
    out
}

/// `f·∂^{α_1}⊗…⊗∂^{α_n}`, summed; arity 0 operators are polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyDiffOp {
    pub dim: usize,
    pub arity: usize,
    pub terms: BTreeMap<(Monomial, Vec<MultiIndex>), Q>,
}

impl PolyDiffOp {
    pub fn zero(dim: usize, arity: usize) -> Self {
        PolyDiffOp { dim, arity, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, m: Monomial, alphas: Vec<MultiIndex>, c: Q) {
        assert_eq!(alphas.len(), self.arity, "arity mismatch");
        let key = (m, alphas);
        let e = self.terms.entry(key.clone()).or_insert_with(|| Q::from_integer(0.into()));
        *e += c;
        if *e == Q::from_integer(0.into()) {
            self.terms.remove(&key);
        }
    }

    pub fn term(dim: usize, m: Monomial, alphas: Vec<MultiIndex>, c: Q) -> Self {
        let mut p = Self::zero(dim, alphas.len());
        p.add_term(m, alphas, c);
        p
    }

    /// The multiplication `μ(a, b) = ab`.
    pub fn mu(dim: usize) -> Self {
        Self::term(dim, vec![0; dim], vec![vec![0; dim], vec![0; dim]], Q::from_integer(1.into()))
    }

    pub fn add_scaled(&mut self, c: &Q, other: &PolyDiffOp) {
        assert_eq!(self.arity, other.arity, "arity mismatch");
        for ((m, a), x) in &other.terms {
            self.add_term(m.clone(), a.clone(), c * x);
        }
    }

    pub fn scaled(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.dim, self.arity);
        out.add_scaled(c, self);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn internal_degree(m: &[u32], alphas: &[MultiIndex]) -> i64 {
        mono_degree(m) as i64 - alphas.iter().map(|a| mono_degree(a) as i64).sum::<i64>()
    }

    pub fn total_order(alphas: &[MultiIndex]) -> u32 {
        alphas.iter().map(|a| mono_degree(a)).sum()
    }

    pub fn eval(&self, args: &[Poly]) -> Poly {
        assert_eq!(args.len(), self.arity, "wrong number of arguments");
        let mut out = Poly::new();
        for ((m, alphas), c) in &self.terms {
            let mut prod = monomial_poly(m.clone());
            for (a, alpha) in args.iter().zip(alphas) {
                prod = poly_mul(&prod, &poly_derivative(a, alpha));
                if prod.is_empty() {
                    break;
                }
            }
            poly_add_scaled(&mut out, c, &prod);
        }
        out
    }

    pub fn describe(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms.iter().map(|((m, a), x)| format!("{}*{}", format_q(x), op_label(m, a))).collect::<Vec<_>>().join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyVectorTermJson {
    pub coeff: String,
    pub monomial: Vec<u32>,
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyDiffTermJson {
    pub coeff: String,
    pub monomial: Vec<u32>,
    pub multiindices: Vec<Vec<u32>>,
}

impl PolyVectorField {
    pub fn to_json(&self) -> Vec<PolyVectorTermJson> {
        self.terms
            .iter()
            .map(|((m, idx), x)| PolyVectorTermJson { coeff: format_q(x), monomial: m.clone(), indices: idx.clone() })
            .collect()
    }

    pub fn from_json(dim: usize, arity: usize, terms: &[PolyVectorTermJson]) -> Result<Self> {
        let mut p = Self::zero(dim, arity);
        for (k, t) in terms.iter().enumerate() {
            if t.monomial.len() != dim || t.indices.len() != arity || t.indices.iter().any(|&i| i >= dim) {
                return Err(Error::Parse(format!("term {k}: monomial or indices do not fit dimension {dim}, arity {arity}")));
            }
            p.add_term(t.monomial.clone(), &t.indices, parse_q(&t.coeff)?);
        }
        Ok(p)
    }
}

impl PolyDiffOp {
    pub fn to_json(&self) -> Vec<PolyDiffTermJson> {
        self.terms
            .iter()
            .map(|((m, a), x)| PolyDiffTermJson { coeff: format_q(x), monomial: m.clone(), multiindices: a.clone() })
            .collect()
    }
}
