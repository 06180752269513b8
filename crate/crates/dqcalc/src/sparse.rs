//! Sparse rational vectors keyed by basis index, and incremental row echelon forms.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::rational::Q;

pub type SparseVec = BTreeMap<usize, Q>;

pub fn unit(i: usize) -> SparseVec {
    let mut v = SparseVec::new();
    v.insert(i, Q::one());
    v
}

pub fn add_scaled(acc: &mut SparseVec, c: &Q, v: &SparseVec) {
    if c.is_zero() {
        return;
    }
    for (k, x) in v {
        add_entry(acc, *k, c * x);
    }
}

pub fn add_entry(acc: &mut SparseVec, k: usize, x: Q) {
    if x.is_zero() {
        return;
    }
    let e = acc.entry(k).or_insert_with(Q::zero);
    *e += x;
    if e.is_zero() {
        acc.remove(&k);
    }
}

pub fn scaled(c: &Q, v: &SparseVec) -> SparseVec {
    if c.is_zero() {
        return SparseVec::new();
    }
    v.iter().map(|(k, x)| (*k, c * x)).collect()
}

pub fn sub(a: &SparseVec, b: &SparseVec) -> SparseVec {
    let mut out = a.clone();
    add_scaled(&mut out, &-Q::one(), b);
    out
}

/// Row echelon form built one vector at a time; each stored row has its pivot
/// (smallest index) normalized to 1 and is reduced against earlier pivots.
/// Every row carries a tag recording the combination of inserted vectors it came from.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, (SparseVec, SparseVec)>,
    inserted: usize,
    track: bool,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Echelon that records, for each row, its expression in the inserted vectors.
    pub fn tracking() -> Self {
        Echelon { track: true, ..Self::default() }
    }

    pub fn from_vectors<'a>(vs: impl IntoIterator<Item = &'a SparseVec>) -> Self {
        let mut e = Self::new();
        for v in vs {
            e.insert(v.clone());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` and returns the remainder together with the combination of
    /// inserted vectors that was subtracted.
    fn reduce_tagged(&self, mut v: SparseVec) -> (SparseVec, SparseVec) {
        let mut used = SparseVec::new();
        let mut cursor = 0usize;
        loop {
            let next = v.range(cursor..).find(|(k, _)| self.rows.contains_key(k)).map(|(k, c)| (*k, c.clone()));
            let Some((p, c)) = next else { break };
            let (row, tag) = &self.rows[&p];
            add_scaled(&mut v, &-c.clone(), row);
            if self.track {
                add_scaled(&mut used, &c, tag);
            }
            cursor = p + 1;
        }
        (v, used)
    }

    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        self.reduce_tagged(v.clone()).0
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Inserts `v`; returns `Ok(())` if it was independent, otherwise `Err(relation)`
    /// where the relation is a combination of inserted vectors summing to zero
    /// (only meaningful when tracking).
    pub fn insert_or_relation(&mut self, v: SparseVec) -> Result<(), SparseVec> {
        let idx = self.inserted;
        self.inserted += 1;
        let (r, used) = self.reduce_tagged(v);
        let mut tag = if self.track { crate::sparse::unit(idx) } else { SparseVec::new() };
        if self.track {
            add_scaled(&mut tag, &-Q::one(), &used);
        }
        let Some((&p, lead)) = r.iter().next() else {
            return Err(tag);
        };
        let inv = lead.recip();
        let r = scaled(&inv, &r);
        let tag = scaled(&inv, &tag);
        self.rows.insert(p, (r, tag));
        Ok(())
    }

    pub fn insert(&mut self, v: SparseVec) -> bool {
        self.insert_or_relation(v).is_ok()
    }

    /// Coordinates of `v` in terms of the inserted vectors, if `v` lies in their span.
    pub fn express(&self, v: &SparseVec) -> Option<SparseVec> {
        assert!(self.track, "express requires a tracking echelon");
        let (r, used) = self.reduce_tagged(v.clone());
        r.is_empty().then_some(used)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn v(entries: &[(usize, i64)]) -> SparseVec {
        entries.iter().map(|(k, x)| (*k, q(*x))).filter(|(_, x)| !x.is_zero()).collect()
    }

    #[test]
    fn rank_and_relations() {
        let mut e = Echelon::tracking();
        assert!(e.insert(v(&[(0, 1), (1, 2)])));
        assert!(e.insert(v(&[(1, 1)])));
        let rel = e.insert_or_relation(v(&[(0, 2), (1, 7)])).unwrap_err();
        // 2*(1,2) + 3*(0,1) - (2,7) = 0
        assert_eq!(rel, v(&[(0, 2), (1, 3), (2, -1)]).into_iter().map(|(k, x)| (k, -x)).collect());
        assert_eq!(e.rank(), 2);
    }

    #[test]
    fn express_in_basis() {
        let mut e = Echelon::tracking();
        e.insert(v(&[(0, 1), (2, 1)]));
        e.insert(v(&[(1, 1), (2, 1)]));
        let c = e.express(&v(&[(0, 2), (1, 3), (2, 5)])).unwrap();
        assert_eq!(c, v(&[(0, 2), (1, 3)]));
        assert!(e.express(&v(&[(2, 1)])).is_none());
    }
}
