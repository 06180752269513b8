use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use super::ring::*;
use crate::error::{overflow, Result};
use crate::rational::{q, Q};

/// `ω_MC = (Σ_{j ≤ order} g_j t^j) ∂_t` with one-forms `g_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaurerCartanForm1 {
    pub ring: CoordRing1,
    pub order: usize,
    pub g: Vec<CoordForm>,
}

/// Solves `(d + ω)(x̃) = 0` order by order:
/// `g_k = x_1^{−1} (−dx_k − Σ_{j<k} (k−j+1) g_j x_{k−j+1})`.
/// Needs `M ≥ order + 1` and `L ≥ order + 1`.
pub fn mc_form(ring: &CoordRing1, order: usize) -> Result<MaurerCartanForm1> {
    if ring.gen_cap < order + 1 {
        return Err(overflow("generator cap", format!("order {order} needs M ≥ {}", order + 1)));
    }
    let inv = ring.x1_pow(-1)?;
    let mut g: Vec<CoordForm> = vec![];
    for k in 0..=order {
        let mut rhs = form_scaled(&-Q::one(), &ring.dvar(k)?);
        for (j, gj) in g.iter().enumerate() {
            let m = k - j + 1;
            let term = ring.mul(gj, &ring.var(m as i64)?)?;
            form_add(&mut rhs, &-q(m as i64), &term);
        }
        g.push(ring.mul(&inv, &rhs)?);
    }
    Ok(MaurerCartanForm1 { ring: *ring, order, g })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct McFormReport {
    pub order: usize,
    pub gen_cap: usize,
    pub laurent_cap: i32,
    /// Degrees of the polynomials `f` for which `(d + ω)(f̃) = 0` was checked.
    pub defining_equation_degrees: Vec<usize>,
    pub defining_equation: bool,
    pub mc_equation: bool,
    pub contraction_identity: bool,
    pub g0: String,
    pub failures: Vec<String>,
}

impl McFormReport {
    pub fn passed(&self) -> bool {
        self.defining_equation && self.mc_equation && self.contraction_identity
    }
}

impl MaurerCartanForm1 {
    /// `(d + ω)(f̃)` through `t^order`.
    pub fn defining_residual(&self, f: &[Q]) -> Result<TSeries> {
        let ring = &self.ring;
        let ft = tilde_expand(ring, f, self.order + 1)?;
        let mut out = ft.truncate(self.order).map(|c| ring.d(c))?;
        let deriv = ft.t_action(&[(0, Q::one())]);
        for m in 0..=self.order {
            for j in 0..=m {
                let prod = ring.mul(&self.g[j], &deriv.coeffs[m - j])?;
                form_add(&mut out.coeffs[m], &Q::one(), &prod);
            }
        }
        Ok(out)
    }

    /// Coefficient of `δ_k` in `d_0ω + ½[ω,ω]`, i.e. `dg_k + Σ_{i+j=k+1} j g_i g_j`,
    /// for `k < order`.
    pub fn mc_residual(&self) -> Result<Vec<CoordForm>> {
        let ring = &self.ring;
        let mut out = vec![];
        for k in 0..self.order {
            let mut r = ring.d(&self.g[k])?;
            for j in 0..=k + 1 {
                let i = k + 1 - j;
                form_add(&mut r, &q(j as i64), &ring.mul(&self.g[i], &self.g[j])?);
            }
            out.push(r);
        }
        Ok(out)
    }

    /// `i_{δ̄_i} g_j` for `i, j ≤ order`; the identity predicts the Kronecker delta.
    pub fn contractions(&self) -> Result<BTreeMap<(usize, usize), CoordForm>> {
        let ring = &self.ring;
        let mut out = BTreeMap::new();
        for i in 0..=self.order {
            for (j, gj) in self.g.iter().enumerate() {
                out.insert((i, j), ring.contract(gj, &|k| ring.witt_on_generator(i, k))?);
            }
        }
        Ok(out)
    }

    /// Runs all three checks; `(d + ω)(f̃) = 0` is tested for `f = x^k`, `k ≤ 3`,
    /// and a mixed polynomial.
    pub fn verify(&self) -> Result<McFormReport> {
        let ring = &self.ring;
        let mut failures = vec![];
        let polys: Vec<Vec<Q>> = vec![vec![q(0), q(1)], vec![q(0), q(0), q(1)], vec![q(0), q(0), q(0), q(1)], vec![q(2), q(-1), q(3)]];
        let mut defining = true;
        for f in &polys {
            let r = self.defining_residual(f)?;
            if !r.is_zero() {
                defining = false;
                failures.push(format!("(d + ω)(f̃) ≠ 0 for f of degree {}: {:?}", f.len() - 1, r.describe(ring)));
            }
        }
        let mut mc = true;
        for (k, r) in self.mc_residual()?.iter().enumerate() {
            if !r.is_empty() {
                mc = false;
                failures.push(format!("MC residual at δ{k}: {}", ring.describe(r)));
            }
        }
        let mut contraction = true;
        for ((i, j), c) in self.contractions()? {
            let expected = if i == j { ring.constant(Q::one()) } else { CoordForm::new() };
            if c != expected {
                contraction = false;
                failures.push(format!("i_δ{i} g_{j} = {}", ring.describe(&c)));
            }
        }
        Ok(McFormReport {
            order: self.order,
            gen_cap: ring.gen_cap,
            laurent_cap: ring.laurent_cap,
            defining_equation_degrees: polys.iter().map(|f| f.len() - 1).collect(),
            defining_equation: defining,
            mc_equation: mc,
            contraction_identity: contraction,
            g0: ring.describe(&self.g[0]),
            failures,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Gl1Report {
    /// `(name, expansion)` for `y_0, y_2, …, y_M`.
    pub generators: Vec<(String, String)>,
    /// Weight of `x_j` under `δ_1`, read off from `δ_1(x_j) = w x_j`; `None` if
    /// `x_j` is not an eigenvector.
    pub weights: Vec<(usize, Option<i64>)>,
    pub invariants_killed: bool,
    pub tilde_x_invariant: bool,
}

impl Gl1Report {
    pub fn passed(&self) -> bool {
        self.invariants_killed && self.tilde_x_invariant && self.weights.iter().all(|(j, w)| *w == Some(-(*j as i64)))
    }
}

/// `y_0 = x_0` and `y_i = x_1^{−i} x_i` for `2 ≤ i ≤ M`, with the weight checks.
pub fn gl1_invariants(ring: &CoordRing1) -> Result<(Vec<CoordForm>, Gl1Report)> {
    let m = ring.gen_cap;
    let mut ys = vec![ring.var(0)?];
    let mut names = vec!["y0".to_string()];
    for i in 2..=m {
        ys.push(ring.mul(&ring.x1_pow(-(i as i32))?, &ring.var(i as i64)?)?);
        names.push(format!("y{i}"));
    }
    let delta1 = [(1usize, Q::one())];
    let mut killed = true;
    for y in &ys {
        killed &= ring.witt_act(&delta1, y)?.is_empty();
    }
    let mut weights = vec![];
    for j in 0..=m {
        let x = ring.var(j as i64)?;
        let image = ring.witt_act(&delta1, &x)?;
        let c = image.get(x.keys().next().unwrap()).cloned().unwrap_or_else(Q::zero);
        let w = (form_scaled(&c, &x) == image).then(|| crate::rational::to_i64(&c)).flatten();
        weights.push((j, w));
    }
    let tilde = check_invariance(ring, &[q(0), q(1)], &delta1, m.saturating_sub(1))?.passed();
    let generators = names.into_iter().zip(ys.iter().map(|y| ring.describe(y))).collect();
    Ok((ys, Gl1Report { generators, weights, invariants_killed: killed, tilde_x_invariant: tilde }))
}
