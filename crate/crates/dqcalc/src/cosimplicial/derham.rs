use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{overflow, Error, Result};
use crate::polyops::{monomials_of_degree, sort_with_sign, subsets};
use crate::rational::{factorial, format_q, q, Q};
use crate::sparse::SparseVec;

/// Exponents of `t_1..t_n` and the sorted positions of the `dt` factors
/// (position `k` stands for `t_{k+1}`).
pub type FormKey = (Vec<u32>, Vec<usize>);

/// A polynomial differential form on `Δ[n]` in the coordinates `t_1..t_n`, with
/// `t_0 = 1 − Σ t_i` and `dt_0 = −Σ dt_i` already eliminated. No degree cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub n: usize,
    pub terms: BTreeMap<FormKey, Q>,
}

/// Polynomial degree of a term: `t_i` and `dt_i` both count 1. Face and degeneracy
/// pullbacks and `d` never raise it.
pub fn key_weight(k: &FormKey) -> u32 {
    k.0.iter().sum::<u32>() + k.1.len() as u32
}

impl Form {
    pub fn zero(n: usize) -> Self {
        Form { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Q) -> Self {
        let mut f = Self::zero(n);
        f.add_term((vec![0; n], vec![]), c);
        f
    }

    /// The barycentric coordinate `t_k`, `0 ≤ k ≤ n`.
    pub fn coordinate(n: usize, k: usize) -> Self {
        assert!(k <= n, "coordinate index out of range");
        let mut f = Self::zero(n);
        if k == 0 {
            f.add_term((vec![0; n], vec![]), Q::one());
            for i in 0..n {
                f.add_term((unit_exp(n, i), vec![]), -Q::one());
            }
        } else {
            f.add_term((unit_exp(n, k - 1), vec![]), Q::one());
        }
        f
    }

    /// The 1-form `dt_k`, `0 ≤ k ≤ n`.
    pub fn coordinate_differential(n: usize, k: usize) -> Self {
        Self::coordinate(n, k).d()
    }

    pub fn add_term(&mut self, key: FormKey, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
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

    pub fn add_scaled(&mut self, c: &Q, other: &Form) {
        for (k, x) in &other.terms {
            self.add_term(k.clone(), c * x);
        }
    }

    pub fn scaled(&self, c: &Q) -> Form {
        let mut f = Self::zero(self.n);
        f.add_scaled(c, self);
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.terms.keys().map(key_weight).max().unwrap_or(0)
    }

    /// The part of form degree `p`.
    pub fn component(&self, p: usize) -> Form {
        Form { n: self.n, terms: self.terms.iter().filter(|(k, _)| k.1.len() == p).map(|(k, x)| (k.clone(), x.clone())).collect() }
    }

    pub fn wedge(&self, other: &Form) -> Form {
        assert_eq!(self.n, other.n, "forms live on different simplices");
        let mut out = Self::zero(self.n);
        for ((a, i), x) in &self.terms {
            for ((b, j), y) in &other.terms {
                let mut idx: Vec<usize> = i.iter().chain(j).copied().collect();
                let Some(odd) = sort_with_sign(&mut idx) else { continue };
                let c = if odd { -(x * y) } else { x * y };
                out.add_term((a.iter().zip(b).map(|(p, r)| p + r).collect(), idx), c);
            }
        }
        out
    }

    pub fn d(&self) -> Form {
        let mut out = Self::zero(self.n);
        for ((a, i), x) in &self.terms {
            for k in 0..self.n {
                if a[k] == 0 || i.contains(&k) {
                    continue;
                }
                let mut b = a.clone();
                b[k] -= 1;
                let mut idx = vec![k];
                idx.extend(i);
                let odd = sort_with_sign(&mut idx).expect("k is not repeated");
                let c = x * q(a[k] as i64);
                out.add_term((b, idx), if odd { -c } else { c });
            }
        }
        out
    }

    /// Pullback along the simplicial map `Δ[m] → Δ[n]` induced by the monotone map
    /// `θ: [m] → [n]` (given as its list of values).
    pub fn pullback(&self, theta: &[usize]) -> Result<Form> {
        check_monotone(theta, self.n)?;
        let m = theta.len() - 1;
        let image = |k: usize| {
            let mut f = Form::zero(m);
            for (j, &t) in theta.iter().enumerate() {
                if t == k {
                    f.add_scaled(&Q::one(), &Form::coordinate(m, j));
                }
            }
            f
        };
        let coords: Vec<Form> = (1..=self.n).map(image).collect();
        let diffs: Vec<Form> = coords.iter().map(Form::d).collect();
        let mut out = Form::zero(m);
        for ((a, i), x) in &self.terms {
            let mut term = Form::constant(m, x.clone());
            for (k, &e) in a.iter().enumerate() {
                for _ in 0..e {
                    term = term.wedge(&coords[k]);
                }
            }
            for &k in i {
                term = term.wedge(&diffs[k]);
            }
            out.add_scaled(&Q::one(), &term);
        }
        Ok(out)
    }

    /// Value at the vertex `e_k`.
    pub fn at_vertex(&self, k: usize) -> Result<Q> {
        let f = self.pullback(&[k])?;
        Ok(f.terms.get(&(vec![], vec![])).cloned().unwrap_or_else(Q::zero))
    }

    /// `∫_{Δ[n]}` with the orientation `dt_1…dt_n`, using
    /// `∫ t_1^{a_1}⋯t_n^{a_n} dt_1…dt_n = Πa_i! / (n + Σa_i)!`.
    pub fn integrate(&self) -> Result<Q> {
        let mut acc = Q::zero();
        for ((a, i), x) in &self.terms {
            if i.len() != self.n {
                return Err(Error::Invalid(format!(
                    "only top-degree forms integrate over Δ[{}], found a {}-form term",
                    self.n,
                    i.len()
                )));
            }
            let num = a.iter().fold(Q::one(), |p, &e| p * factorial(e as usize));
            let total = self.n + a.iter().sum::<u32>() as usize;
            acc += x * num / factorial(total);
        }
        Ok(acc)
    }

    pub fn describe(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms.iter().map(|(k, x)| format!("{}*{}", format_q(x), key_label(k))).collect::<Vec<_>>().join(" + ")
    }
}

fn unit_exp(n: usize, i: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

fn check_monotone(theta: &[usize], n: usize) -> Result<()> {
    if theta.is_empty() || theta.windows(2).any(|w| w[0] > w[1]) || theta.iter().any(|&t| t > n) {
        return Err(Error::Invalid(format!("{theta:?} is not a monotone map into [{n}]")));
    }
    Ok(())
}

pub fn key_label(k: &FormKey) -> String {
    let mut s = String::new();
    for (i, &e) in k.0.iter().enumerate() {
        match e {
            0 => {}
            1 => s.push_str(&format!("t{}", i + 1)),
            _ => s.push_str(&format!("t{}^{e}", i + 1)),
        }
    }
    for &i in &k.1 {
        s.push_str(&format!("dt{}", i + 1));
    }
    if s.is_empty() {
        "1".into()
    } else {
        s
    }
}

/// Polynomial forms on `Δ[n]` of polynomial degree at most `cap`, with a fixed basis
/// ordered by form degree, then degree, then exponents.
#[derive(Clone, Debug)]
pub struct SimplexDeRham {
    pub n: usize,
    pub cap: u32,
    basis: Vec<FormKey>,
    index: BTreeMap<FormKey, usize>,
}

impl SimplexDeRham {
    pub fn new(n: usize, cap: u32) -> Self {
        let mut basis = vec![];
        for p in 0..=n.min(cap as usize) {
            for w in p as u32..=cap {
                for a in monomials_of_degree(n, w - p as u32) {
                    for i in subsets(n, p) {
                        basis.push((a.clone(), i));
                    }
                }
            }
        }
        let index = basis.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        SimplexDeRham { n, cap, basis, index }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn key(&self, i: usize) -> &FormKey {
        &self.basis[i]
    }

    pub fn form_degree(&self, i: usize) -> usize {
        self.basis[i].1.len()
    }

    pub fn label(&self, i: usize) -> String {
        key_label(&self.basis[i])
    }

    pub fn basis_form(&self, i: usize) -> Form {
        let mut f = Form::zero(self.n);
        f.add_term(self.basis[i].clone(), Q::one());
        f
    }

    /// Coordinates of `f`; terms beyond the cap are an overflow, never dropped.
    pub fn encode(&self, f: &Form) -> Result<SparseVec> {
        if f.n != self.n {
            return Err(Error::Invalid(format!("form on Δ[{}] given to Δ[{}]", f.n, self.n)));
        }
        let mut out = SparseVec::new();
        for (k, x) in &f.terms {
            let i = self.index.get(k).ok_or_else(|| {
                overflow("degree cap", format!("{} has degree {} > {} on Δ[{}]", key_label(k), key_weight(k), self.cap, self.n))
            })?;
            out.insert(*i, x.clone());
        }
        Ok(out)
    }

    pub fn decode(&self, v: &SparseVec) -> Form {
        let mut f = Form::zero(self.n);
        for (i, x) in v {
            f.add_term(self.basis[*i].clone(), x.clone());
        }
        f
    }

    pub fn d(&self, i: usize) -> SparseVec {
        self.encode(&self.basis_form(i).d()).expect("d does not raise the degree")
    }

    /// Wedge product inside the cap.
    pub fn wedge(&self, a: &Form, b: &Form) -> Result<Form> {
        let w = a.wedge(b);
        self.encode(&w)?;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn mono(n: usize, a: &[u32], i: &[usize]) -> Form {
        let mut f = Form::zero(n);
        f.add_term((a.to_vec(), i.to_vec()), Q::one());
        f
    }

    #[test]
    fn integrals() {
        assert_eq!(mono(1, &[0], &[0]).integrate().unwrap(), q(1));
        assert_eq!(mono(1, &[1], &[0]).integrate().unwrap(), qf(1, 2));
        assert_eq!(mono(2, &[1, 1], &[0, 1]).integrate().unwrap(), qf(1, 24));
        assert!(mono(2, &[1, 1], &[0]).integrate().is_err());
    }

    #[test]
    fn relations_hold() {
        for n in 1..=3 {
            let mut s = Form::zero(n);
            let mut ds = Form::zero(n);
            for k in 0..=n {
                s.add_scaled(&Q::one(), &Form::coordinate(n, k));
                ds.add_scaled(&Q::one(), &Form::coordinate_differential(n, k));
            }
            assert_eq!(s, Form::constant(n, Q::one()));
            assert!(ds.is_zero());
        }
    }

    #[test]
    fn d_squares_to_zero_and_caps_overflow() {
        let r = SimplexDeRham::new(2, 3);
        for i in 0..r.dim() {
            assert!(r.encode(&r.decode(&r.d(i)).d()).unwrap().is_empty());
        }
        let t1 = mono(2, &[1, 0], &[]);
        let big = mono(2, &[2, 0], &[1]);
        assert!(matches!(r.wedge(&t1, &big), Err(Error::Overflow { .. })));
    }

    #[test]
    fn pullback_is_functorial() {
        let f = mono(2, &[1, 2], &[0]);
        // s^0 ∘ d^1 = id on [1]: pull back along d^1 then s^0.
        let face = f.pullback(&[0, 2]).unwrap();
        let back = face.pullback(&[0, 0, 1]).unwrap();
        let direct = f.pullback(&[0, 0, 2]).unwrap();
        assert_eq!(back, direct);
    }
}
