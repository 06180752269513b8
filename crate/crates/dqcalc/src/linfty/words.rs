use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::GradedSpace;
use crate::rational::Q;
use crate::sparse::SparseVec;

/// Basis of `g[1]` (degrees already shifted), possibly tensored with `Q[ε]/ε^N`.
/// With `eps_order = N > 1`, index `i` stands for `e_{i / N} ⊗ ε^{i % N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedSpace {
    pub space: Arc<GradedSpace>,
    pub eps_order: usize,
}

impl ShiftedSpace {
    pub fn new(space: Arc<GradedSpace>) -> Self {
        ShiftedSpace { space, eps_order: 1 }
    }

    /// `g[1]` for a graded space `g` given with unshifted degrees.
    pub fn shift_of(g: &GradedSpace) -> Self {
        let mut s = GradedSpace::empty();
        for i in 0..g.dim() {
            s.push(g.degree(i) - 1, g.label(i).to_string()).unwrap();
        }
        ShiftedSpace::new(Arc::new(s))
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.space.degree(i)
    }

    pub fn label(&self, i: usize) -> &str {
        self.space.label(i)
    }

    pub fn power(&self, i: usize) -> usize {
        i % self.eps_order
    }

    pub fn word_power(&self, w: &[usize]) -> usize {
        w.iter().map(|&i| self.power(i)).sum()
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.degree(i).rem_euclid(2) == 1
    }

    /// Multiplies a vector by `ε^k`, dropping what falls beyond `ε^{N-1}`.
    pub fn shift_power(&self, v: &SparseVec, k: usize) -> SparseVec {
        if k == 0 {
            return v.clone();
        }
        v.iter()
            .filter(|(i, _)| self.power(**i) + k < self.eps_order)
            .map(|(i, x)| (i + k, x.clone()))
            .collect()
    }

    pub fn describe(&self, v: &SparseVec) -> String {
        self.space.describe(v)
    }

    pub fn describe_word(&self, w: &[usize]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.iter().map(|&i| self.label(i)).collect::<Vec<_>>().join("·")
    }
}

/// A monomial of `S(V)`: basis indices in nondecreasing order.
pub type Word = Vec<usize>;

/// Element of `S(V)`.
pub type SymElem = BTreeMap<Word, Q>;

/// Sorts `seq` into canonical order. Returns the sorted word and the Koszul sign,
/// or `None` if an odd element repeats (the product vanishes).
pub fn canonical(space: &ShiftedSpace, seq: &[usize]) -> Option<(Word, bool)> {
    let mut w = seq.to_vec();
    let mut negative = false;
    // insertion sort, counting transpositions of odd pairs
    for i in 1..w.len() {
        let mut j = i;
        while j > 0 && w[j - 1] > w[j] {
            if space.is_odd(w[j - 1]) && space.is_odd(w[j]) {
                negative = !negative;
            }
            w.swap(j - 1, j);
            j -= 1;
        }
    }
    for p in w.windows(2) {
        if p[0] == p[1] && space.is_odd(p[0]) {
            return None;
        }
    }
    if space.eps_order > 1 {
        // Over Q[ε]/ε^N only the total power matters; it is carried by the last letter.
        let p = space.word_power(&w);
        if p >= space.eps_order {
            return None;
        }
        for x in w.iter_mut() {
            *x -= space.power(*x);
        }
        if let Some(last) = w.last_mut() {
            *last += p;
        }
    }
    Some((w, negative))
}

pub fn add_term(e: &mut SymElem, w: Word, c: Q) {
    if c.is_zero() {
        return;
    }
    let entry = e.entry(w.clone()).or_insert_with(Q::zero);
    *entry += c;
    if entry.is_zero() {
        e.remove(&w);
    }
}

pub fn add_scaled_elem(acc: &mut SymElem, c: &Q, e: &SymElem) {
    for (w, x) in e {
        add_term(acc, w.clone(), c * x);
    }
}

/// Adds `c · (concatenation of the sequence)` to `acc` after canonical sorting.
pub fn add_sequence(space: &ShiftedSpace, acc: &mut SymElem, seq: &[usize], c: Q) {
    if let Some((w, neg)) = canonical(space, seq) {
        add_term(acc, w, if neg { -c } else { c });
    }
}

pub fn word_elem(w: &[usize]) -> SymElem {
    let mut e = SymElem::new();
    e.insert(w.to_vec(), Q::one());
    e
}

pub fn vector_elem(v: &SparseVec) -> SymElem {
    v.iter().map(|(i, x)| (vec![*i], x.clone())).collect()
}

/// Product in `S(V)`.
pub fn multiply(space: &ShiftedSpace, a: &SymElem, b: &SymElem) -> SymElem {
    let mut out = SymElem::new();
    for (u, x) in a {
        for (v, y) in b {
            let mut seq = u.clone();
            seq.extend_from_slice(v);
            add_sequence(space, &mut out, &seq, x * y);
        }
    }
    out
}

pub fn power(space: &ShiftedSpace, a: &SymElem, k: usize) -> SymElem {
    let mut out = word_elem(&[]);
    for _ in 0..k {
        out = multiply(space, &out, a);
    }
    out
}

/// Koszul sign `ε(I₁,…,I_p)` defined by `w_{I₁}⋯w_{I_p} = ε·w₁⋯w_n`, where each
/// block lists 1-based positions. Blocks must be disjoint and cover `1..=n`.
pub fn koszul_sign(degrees: &[i64], partition: &[Vec<usize>]) -> Result<i8> {
    let n = degrees.len();
    let mut seen = vec![false; n];
    let mut seq = Vec::with_capacity(n);
    for block in partition {
        let mut b = block.clone();
        b.sort_unstable();
        for &p in &b {
            if p == 0 || p > n {
                return Err(Error::Invalid(format!("position {p} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[p - 1], true) {
                return Err(Error::Invalid(format!("position {p} appears twice")));
            }
            seq.push(p - 1);
        }
    }
    if let Some(p) = seen.iter().position(|s| !s) {
        return Err(Error::Invalid(format!("position {} not covered", p + 1)));
    }
    Ok(if sequence_sign(degrees, &seq) { -1 } else { 1 })
}

/// True if reordering the positions `seq` into increasing order costs a minus sign.
pub(crate) fn sequence_sign(degrees: &[i64], seq: &[usize]) -> bool {
    let mut neg = false;
    for a in 0..seq.len() {
        for b in (a + 1)..seq.len() {
            if seq[a] > seq[b] && degrees[seq[a]].rem_euclid(2) == 1 && degrees[seq[b]].rem_euclid(2) == 1 {
                neg = !neg;
            }
        }
    }
    neg
}

/// Sign `ε(I, N∖I)` for the subset of positions encoded by `mask`.
pub(crate) fn split_sign(degrees: &[i64], mask: u32) -> bool {
    let n = degrees.len();
    let mut seq: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
    seq.extend((0..n).filter(|i| mask >> i & 1 == 0));
    sequence_sign(degrees, &seq)
}

pub(crate) fn select(w: &[usize], mask: u32) -> Word {
    w.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| *x).collect()
}

/// All canonical words of length `n`. With `power_zero`, only letters carrying `ε⁰`.
pub fn words_of_length(space: &ShiftedSpace, n: usize, power_zero: bool) -> Vec<Word> {
    let letters: Vec<usize> = (0..space.dim()).filter(|&i| !power_zero || space.power(i) == 0).collect();
    let mut out = vec![];
    let mut cur = vec![];
    fn rec(space: &ShiftedSpace, letters: &[usize], start: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Word>) {
        if cur.len() == n {
            if canonical(space, cur).is_some_and(|(w, _)| w == *cur) {
                out.push(cur.clone());
            }
            return;
        }
        for k in start..letters.len() {
            let l = letters[k];
            if cur.last() == Some(&l) && space.is_odd(l) {
                continue;
            }
            cur.push(l);
            rec(space, letters, k, n, cur, out);
            cur.pop();
        }
    }
    rec(space, &letters, 0, n, &mut cur, &mut out);
    out
}

/// Set partitions of `0..n` into nonempty blocks, blocks ordered by least element.
pub(crate) fn set_partitions(n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![];
    fn rec(i: usize, n: usize, blocks: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] |= 1 << i;
            rec(i + 1, n, blocks, out);
            blocks[b] &= !(1 << i);
        }
        blocks.push(1 << i);
        rec(i + 1, n, blocks, out);
        blocks.pop();
    }
    rec(0, n, &mut vec![], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(degs: &[i64]) -> ShiftedSpace {
        let g = GradedSpace::new(degs.iter().enumerate().map(|(i, d)| (*d, vec![format!("w{i}")]))).unwrap();
        ShiftedSpace::new(Arc::new(g))
    }

    #[test]
    fn koszul_examples() {
        assert_eq!(koszul_sign(&[0, 2, 4], &[vec![3], vec![1, 2]]).unwrap(), 1);
        assert_eq!(koszul_sign(&[1, 1], &[vec![2], vec![1]]).unwrap(), -1);
        assert_eq!(koszul_sign(&[1, 0, 1], &[vec![3], vec![1, 2]]).unwrap(), -1);
        assert!(koszul_sign(&[1, 1], &[vec![1], vec![1, 2]]).is_err());
        assert!(koszul_sign(&[1, 1], &[vec![1]]).is_err());
    }

    #[test]
    fn canonical_order_and_vanishing() {
        let s = space(&[1, 0, 1]);
        assert_eq!(canonical(&s, &[2, 0]), Some((vec![0, 2], true)));
        assert_eq!(canonical(&s, &[2, 1, 0]), Some((vec![0, 1, 2], true)));
        assert_eq!(canonical(&s, &[0, 0]), None);
        assert_eq!(canonical(&s, &[1, 1]), Some((vec![1, 1], false)));
    }

    #[test]
    fn partitions_counted_by_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52];
        for (n, b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(n).len(), *b);
        }
    }

    #[test]
    fn words_skip_repeated_odd_letters() {
        let s = space(&[1, 0]);
        assert_eq!(words_of_length(&s, 2, false), vec![vec![0, 1], vec![1, 1]]);
    }
}
