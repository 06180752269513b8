use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{overflow, Error, Result};
use crate::rational::{format_q, q, Q};

/// Monomial `x^e dx_I`: exponents of `x_0..x_M` (only `x_1` may be negative) and a
/// sorted set of differentials.
pub type CoordKey = (Vec<i32>, Vec<usize>);

/// A differential form on the truncated coordinate ring.
pub type CoordForm = BTreeMap<CoordKey, Q>;

/// `Q[x_0, x_1^{±1}, x_2, …, x_M]` and its De Rham forms, with the exponent of `x_1`
/// confined to `[−L, L]`. Leaving either cap is an overflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoordRing1 {
    pub gen_cap: usize,
    pub laurent_cap: i32,
}

fn insert(f: &mut CoordForm, k: CoordKey, c: Q) {
    if c.is_zero() {
        return;
    }
    match f.entry(k) {
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

pub fn form_add(acc: &mut CoordForm, c: &Q, f: &CoordForm) {
    for (k, x) in f {
        insert(acc, k.clone(), c * x);
    }
}

pub fn form_scaled(c: &Q, f: &CoordForm) -> CoordForm {
    let mut out = CoordForm::new();
    form_add(&mut out, c, f);
    out
}

pub fn form_degree(f: &CoordForm) -> Option<usize> {
    let mut it = f.keys().map(|k| k.1.len());
    let d = it.next()?;
    it.all(|e| e == d).then_some(d)
}

/// Merges two sorted differential lists; `None` if they share an index.
fn merge_sign(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut out = a.to_vec();
    let mut odd = false;
    for &x in b {
        if out.contains(&x) {
            return None;
        }
        let pos = out.partition_point(|&y| y < x);
        odd ^= (out.len() - pos) % 2 == 1;
        out.insert(pos, x);
    }
    Some((out, odd))
}

impl CoordRing1 {
    pub fn new(gen_cap: usize, laurent_cap: i32) -> Result<Self> {
        if gen_cap < 1 || laurent_cap < 1 {
            return Err(Error::Invalid("the coordinate ring needs x_0, x_1 and a positive Laurent cap".into()));
        }
        Ok(CoordRing1 { gen_cap, laurent_cap })
    }

    fn zero_exps(&self) -> Vec<i32> {
        vec![0; self.gen_cap + 1]
    }

    fn check_key(&self, k: &CoordKey) -> Result<()> {
        if k.0[1].abs() > self.laurent_cap {
            return Err(overflow("laurent cap", format!("x_1^{} needs L ≥ {}", k.0[1], k.0[1].abs())));
        }
        Ok(())
    }

    pub fn constant(&self, c: Q) -> CoordForm {
        let mut f = CoordForm::new();
        insert(&mut f, (self.zero_exps(), vec![]), c);
        f
    }

    /// `x_j`; zero for `j < 0`.
    pub fn var(&self, j: i64) -> Result<CoordForm> {
        if j < 0 {
            return Ok(CoordForm::new());
        }
        let j = j as usize;
        if j > self.gen_cap {
            return Err(overflow("generator cap", format!("x_{j} needs M ≥ {j}")));
        }
        let mut e = self.zero_exps();
        e[j] = 1;
        Ok([((e, vec![]), Q::one())].into_iter().collect())
    }

    /// `x_1^k`, any sign within the Laurent cap.
    pub fn x1_pow(&self, k: i32) -> Result<CoordForm> {
        let mut e = self.zero_exps();
        e[1] = k;
        let key = (e, vec![]);
        self.check_key(&key)?;
        Ok([(key, Q::one())].into_iter().collect())
    }

    pub fn dvar(&self, j: usize) -> Result<CoordForm> {
        if j > self.gen_cap {
            return Err(overflow("generator cap", format!("dx_{j} needs M ≥ {j}")));
        }
        Ok([((self.zero_exps(), vec![j]), Q::one())].into_iter().collect())
    }

    pub fn mul(&self, a: &CoordForm, b: &CoordForm) -> Result<CoordForm> {
        let mut out = CoordForm::new();
        for ((ea, da), x) in a {
            for ((eb, db), y) in b {
                let Some((ds, odd)) = merge_sign(da, db) else { continue };
                let e: Vec<i32> = ea.iter().zip(eb).map(|(p, r)| p + r).collect();
                let key = (e, ds);
                self.check_key(&key)?;
                let c = x * y;
                insert(&mut out, key, if odd { -c } else { c });
            }
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self, a: &CoordForm) -> Result<CoordForm> {
        let mut out = CoordForm::new();
        for ((e, ds), x) in a {
            for (k, &p) in e.iter().enumerate() {
                if p == 0 || ds.contains(&k) {
                    continue;
                }
                let mut e2 = e.clone();
                e2[k] -= 1;
                let (ds2, odd) = merge_sign(&[k], ds).unwrap();
                let key = (e2, ds2);
                self.check_key(&key)?;
                let c = x * q(p as i64);
                insert(&mut out, key, if odd { -c } else { c });
            }
        }
        Ok(out)
    }

    /// Lie derivative along the vector field `x_k ↦ v(k)` (functions `v(k)`).
    pub fn lie_derivative(&self, a: &CoordForm, v: &dyn Fn(usize) -> Result<CoordForm>) -> Result<CoordForm> {
        let mut out = CoordForm::new();
        for ((e, ds), x) in a {
            let mono: CoordForm = [((e.clone(), vec![]), x.clone())].into_iter().collect();
            for (k, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                let mut e2 = e.clone();
                e2[k] -= 1;
                let key = (e2, ds.clone());
                let lowered: CoordForm = [(key, x * q(p as i64))].into_iter().collect();
                form_add(&mut out, &Q::one(), &self.mul(&v(k)?, &lowered)?);
            }
            // x^e dx_{i_1} … d(v(x_{i_m})) … dx_{i_p}
            for (m, &i) in ds.iter().enumerate() {
                let mut prod = mono.clone();
                for (l, &j) in ds.iter().enumerate() {
                    let f = if l == m { self.d(&v(i)?)? } else { self.dvar(j)? };
                    prod = self.mul(&prod, &f)?;
                }
                form_add(&mut out, &Q::one(), &prod);
            }
        }
        Ok(out)
    }

    /// Contraction with the vector field `x_k ↦ v(k)`.
    pub fn contract(&self, a: &CoordForm, v: &dyn Fn(usize) -> Result<CoordForm>) -> Result<CoordForm> {
        let mut out = CoordForm::new();
        for ((e, ds), x) in a {
            for (m, &i) in ds.iter().enumerate() {
                let mut rest = ds.clone();
                rest.remove(m);
                let sign = if m % 2 == 0 { x.clone() } else { -x.clone() };
                let term: CoordForm = [((e.clone(), rest), sign)].into_iter().collect();
                form_add(&mut out, &Q::one(), &self.mul(&v(i)?, &term)?);
            }
        }
        Ok(out)
    }

    /// `δ_i(x_j) = −(j−i+1) x_{j−i+1}`, with `x_j = 0` for `j < 0`.
    pub fn witt_on_generator(&self, i: usize, j: usize) -> Result<CoordForm> {
        let k = j as i64 - i as i64 + 1;
        if k <= 0 {
            return Ok(CoordForm::new());
        }
        Ok(form_scaled(&q(-k), &self.var(k)?))
    }

    /// The derivation `Σ α_i δ_i` applied to a form.
    pub fn witt_act(&self, v: &[(usize, Q)], a: &CoordForm) -> Result<CoordForm> {
        self.lie_derivative(a, &|k| self.witt_vector(v, k))
    }

    pub fn witt_vector(&self, v: &[(usize, Q)], k: usize) -> Result<CoordForm> {
        let mut out = CoordForm::new();
        for (i, c) in v {
            form_add(&mut out, c, &self.witt_on_generator(*i, k)?);
        }
        Ok(out)
    }

    pub fn describe(&self, f: &CoordForm) -> String {
        if f.is_empty() {
            return "0".into();
        }
        f.iter().map(|(k, c)| format!("{}*{}", format_q(c), key_label(k))).collect::<Vec<_>>().join(" + ")
    }
}

pub fn key_label(k: &CoordKey) -> String {
    let mut s = String::new();
    for (j, &e) in k.0.iter().enumerate() {
        match e {
            0 => {}
            1 => s += &format!("x{j}"),
            _ => s += &format!("x{j}^{e}"),
        }
    }
    for j in &k.1 {
        s += &format!("dx{j}");
    }
    if s.is_empty() {
        "1".into()
    } else {
        s
    }
}

/// A power series in `t` truncated after `t^order`, with coefficients in the forms
/// of the coordinate ring.
#[derive(Clone, Debug, PartialEq)]
pub struct TSeries {
    pub order: usize,
    pub coeffs: Vec<CoordForm>,
}

impl TSeries {
    pub fn zero(order: usize) -> Self {
        TSeries { order, coeffs: vec![CoordForm::new(); order + 1] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_empty())
    }

    pub fn truncate(&self, order: usize) -> TSeries {
        let order = order.min(self.order);
        TSeries { order, coeffs: self.coeffs[..=order].to_vec() }
    }

    pub fn add_scaled(&mut self, c: &Q, other: &TSeries) {
        let order = self.order.min(other.order);
        self.coeffs.truncate(order + 1);
        self.order = order;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            form_add(a, c, b);
        }
    }

    pub fn mul(&self, ring: &CoordRing1, other: &TSeries) -> Result<TSeries> {
        let order = self.order.min(other.order);
        let mut out = TSeries::zero(order);
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_empty() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                form_add(&mut out.coeffs[i + j], &Q::one(), &ring.mul(a, b)?);
            }
        }
        Ok(out)
    }

    /// `Σ α_i t^i ∂_t`; `∂_t` costs one order of precision when `α_0 ≠ 0`.
    pub fn t_action(&self, v: &[(usize, Q)]) -> TSeries {
        let lowers = v.iter().any(|(i, c)| *i == 0 && !c.is_zero());
        let order = if lowers { self.order.saturating_sub(1) } else { self.order };
        let mut out = TSeries::zero(order);
        for (i, c) in v {
            for m in 0..=order {
                let k = m as i64 - *i as i64 + 1;
                if k >= 1 && (k as usize) <= self.order {
                    form_add(&mut out.coeffs[m], &(c * q(k)), &self.coeffs[k as usize]);
                }
            }
        }
        out
    }

    /// Applies `f` to every coefficient.
    pub fn map(&self, f: impl Fn(&CoordForm) -> Result<CoordForm>) -> Result<TSeries> {
        Ok(TSeries { order: self.order, coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn describe(&self, ring: &CoordRing1) -> BTreeMap<usize, String> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, c)| (i, ring.describe(c)))
            .collect()
    }
}

/// `f̃` for `f = Σ_k f_k x^k`: substitutes `x ↦ Σ_{i ≤ order} x_i t^i`.
pub fn tilde_expand(ring: &CoordRing1, f: &[Q], order: usize) -> Result<TSeries> {
    let mut x = TSeries::zero(order);
    for i in 0..=order {
        x.coeffs[i] = ring.var(i as i64)?;
    }
    let mut out = TSeries::zero(order);
    for c in f.iter().rev() {
        out = out.mul(ring, &x)?;
        form_add(&mut out.coeffs[0], &Q::one(), &ring.constant(c.clone()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    pub order: usize,
    /// Nonzero coefficients of `L_{v̄}(f̃) + L_v(f̃)`, keyed by the power of `t`.
    pub defect: BTreeMap<usize, String>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.defect.is_empty()
    }
}

/// Evaluates `L_{v̄}(f̃) + L_v(f̃)` through `t^order` for `v = Σ α_i δ_i`.
pub fn check_invariance(ring: &CoordRing1, f: &[Q], v: &[(usize, Q)], order: usize) -> Result<InvarianceReport> {
    let ft = tilde_expand(ring, f, order + 1)?;
    let mut total = ft.t_action(v).truncate(order);
    let coeff = ft.truncate(order).map(|c| ring.witt_act(v, c))?;
    total.add_scaled(&Q::one(), &coeff);
    Ok(InvarianceReport { order, defect: total.describe(ring) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WittReport {
    pub index_max: usize,
    pub generator_max: usize,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl WittReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `[δ_i, δ_j] = (j−i) δ_{i+j−1}` by composing the actions on `x_k` for
/// `k ≤ generator_max` and on `x_1^{−1}`. The ring needs `M ≥ generator_max + 2`.
pub fn witt_relations(ring: &CoordRing1, index_max: usize, generator_max: usize) -> Result<WittReport> {
    let mut targets: Vec<(String, CoordForm)> = (0..=generator_max).map(|k| Ok((format!("x{k}"), ring.var(k as i64)?))).collect::<Result<_>>()?;
    targets.push(("x1^-1".into(), ring.x1_pow(-1)?));
    let mut report = WittReport { index_max, generator_max, checked: 0, failures: vec![] };
    for i in 0..=index_max {
        for j in 0..=index_max {
            let di = [(i, Q::one())];
            let dj = [(j, Q::one())];
            for (name, x) in &targets {
                let mut lhs = ring.witt_act(&di, &ring.witt_act(&dj, x)?)?;
                form_add(&mut lhs, &-Q::one(), &ring.witt_act(&dj, &ring.witt_act(&di, x)?)?);
                let c = q(j as i64 - i as i64);
                let rhs = if c.is_zero() { CoordForm::new() } else { ring.witt_act(&[(i + j - 1, c)], x)? };
                form_add(&mut lhs, &-Q::one(), &rhs);
                report.checked += 1;
                if !lhs.is_empty() {
                    report.failures.push(format!("[δ{i}, δ{j}]({name}) off by {}", ring.describe(&lhs)));
                }
            }
        }
    }
    Ok(report)
}
