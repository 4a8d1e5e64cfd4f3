//! Doubly truncated power series in x and z = (z_1, ..., z_n).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{degree, MultiIndex};
use crate::error::{Error, Result};
use crate::table::Table;

/// Power series `sum h_{l,j} x^l z^j` with vector coefficients, known for
/// `l <= l_max` and `|j| <= j_max`.
///
/// Component and variable indices are 0-based in the Rust API. The JSON
/// interchange records use 1-based components.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    pub(crate) t: Table,
}

/// One coefficient in the interchange format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffRecord {
    pub l: usize,
    pub j: Vec<u32>,
    /// 1-based component.
    pub i: usize,
    pub re: f64,
    pub im: f64,
}

impl TruncatedSeries {
    pub fn zeros(n_vars: usize, n_comps: usize, l_max: usize, j_max: usize) -> Self {
        TruncatedSeries { t: Table::zeros(n_vars, n_comps, l_max, j_max) }
    }

    /// Scalar monomial `c x^l z^j`.
    pub fn monomial(n_vars: usize, l: usize, j: &[u32], c: C64, l_max: usize, j_max: usize) -> Result<Self> {
        let mut s = Self::zeros(n_vars, 1, l_max, j_max);
        s.set(l, j, 0, c)?;
        Ok(s)
    }

    /// The coordinate z_q as a scalar series.
    pub fn variable(n_vars: usize, q: usize, l_max: usize, j_max: usize) -> Result<Self> {
        let mut j = vec![0; n_vars];
        *j.get_mut(q).ok_or_else(|| Error::Invalid(format!("variable {q} of {n_vars}")))? = 1;
        Self::monomial(n_vars, 0, &j, C64::new(1.0, 0.0), l_max, j_max)
    }

    pub fn n_vars(&self) -> usize {
        self.t.n_vars
    }
    pub fn n_comps(&self) -> usize {
        self.t.n_comps
    }
    pub fn l_max(&self) -> usize {
        self.t.deg_max
    }
    pub fn j_max(&self) -> usize {
        self.t.j_max
    }

    fn locate(&self, l: usize, j: &[u32]) -> Option<usize> {
        if l > self.l_max() || j.len() != self.n_vars() || degree(j) > self.j_max() {
            return None;
        }
        self.t.basis.find(j)
    }

    /// Coefficient of `x^l z^j` in component `i`; zero outside the box.
    pub fn get(&self, l: usize, j: &[u32], i: usize) -> C64 {
        match self.locate(l, j) {
            Some(id) if i < self.n_comps() => self.t.get(l, id, i),
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, l: usize, j: &[u32], i: usize, v: C64) -> Result<()> {
        if i >= self.n_comps() {
            return Err(Error::Invalid(format!("component {i} of {}", self.n_comps())));
        }
        let id = self
            .locate(l, j)
            .ok_or_else(|| Error::Truncation(format!("(l={l}, j={j:?}) outside l<={}, |j|<={}", self.l_max(), self.j_max())))?;
        self.t.set(l, id, i, v);
        Ok(())
    }

    /// Nonzero coefficients as `(l, j, component, value)` in storage order.
    pub fn nonzero(&self) -> Vec<(usize, MultiIndex, usize, C64)> {
        let mut out = Vec::new();
        for l in 0..=self.l_max() {
            for jid in 0..self.t.n_j() {
                for c in 0..self.n_comps() {
                    let v = self.t.get(l, jid, c);
                    if v != C64::new(0.0, 0.0) {
                        out.push((l, self.t.basis.index(jid).clone(), c, v));
                    }
                }
            }
        }
        out
    }

    /// True when no coefficient with l = 0 is nonzero.
    pub fn is_order_x(&self) -> bool {
        (0..self.t.n_j()).all(|jid| self.t.block(0, jid).iter().all(|v| v.norm() == 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(TruncatedSeries { t: self.t.zip_with(&other.t, |a, b| a + b)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(TruncatedSeries { t: self.t.zip_with(&other.t, |a, b| a - b)? })
    }

    pub fn scale(&self, c: C64) -> Self {
        TruncatedSeries { t: self.t.map(|v| v * c) }
    }

    /// Truncated Cauchy product. Equal component counts multiply
    /// componentwise; a scalar series broadcasts against a vector one.
    /// The result is kept up to the orders where it is fully determined
    /// by the operands, never beyond the larger operand box.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(TruncatedSeries { t: Table::product(&self.t, &other.t, 0, &|_, _| 1.0)? })
    }

    /// Derivative in z_q (0-based). The top z-degree is dropped since it
    /// would need coefficients beyond the truncation.
    pub fn partial_z(&self, q: usize) -> Result<Self> {
        Ok(TruncatedSeries { t: self.t.partial_z(q)? })
    }

    /// `(1/k) x^{k+1} d/dx`: coefficient at `l + k` is `(l/k) h_l`.
    pub fn x_weighted_derivative(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("rank k must be >= 1".into()));
        }
        let mut out = Self::zeros(self.n_vars(), self.n_comps(), self.l_max(), self.j_max());
        for l in 1..=self.l_max() {
            if l + k > self.l_max() {
                break;
            }
            let f = l as f64 / k as f64;
            for jid in 0..self.t.n_j() {
                for c in 0..self.n_comps() {
                    out.t.set(l + k, jid, c, self.t.get(l, jid, c) * f);
                }
            }
        }
        Ok(out)
    }

    /// Multiply by x^p, dropping orders beyond l_max.
    pub fn shift_x(&self, p: usize) -> Self {
        let mut out = Self::zeros(self.n_vars(), self.n_comps(), self.l_max(), self.j_max());
        for l in 0..=self.l_max() {
            if l + p > self.l_max() {
                break;
            }
            for jid in 0..self.t.n_j() {
                for c in 0..self.n_comps() {
                    out.t.set(l + p, jid, c, self.t.get(l, jid, c));
                }
            }
        }
        out
    }

    pub fn component(&self, i: usize) -> Result<Self> {
        Ok(TruncatedSeries { t: self.t.component(i)? })
    }

    pub fn from_components(parts: &[TruncatedSeries]) -> Result<Self> {
        let tables: Vec<Table> = parts.iter().map(|p| p.t.clone()).collect();
        Ok(TruncatedSeries { t: Table::stack(&tables)? })
    }

    /// Restrict to a smaller box.
    pub fn truncate(&self, l_max: usize, j_max: usize) -> Self {
        TruncatedSeries { t: self.t.restrict(l_max, j_max) }
    }

    /// Treat the stored coefficients as an exact polynomial and place it in
    /// a larger box.
    pub fn pad_polynomial(&self, l_max: usize, j_max: usize) -> Self {
        TruncatedSeries { t: self.t.pad(l_max, j_max) }
    }

    /// The `z`-polynomial multiplying `x^l`.
    pub fn x_slice(&self, l: usize) -> Self {
        let mut out = Self::zeros(self.n_vars(), self.n_comps(), 0, self.j_max());
        if l <= self.l_max() {
            for jid in 0..self.t.n_j() {
                for c in 0..self.n_comps() {
                    out.t.set(0, jid, c, self.t.get(l, jid, c));
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.t.max_abs()
    }

    /// Max |a - b| over the common box.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.t.max_diff(&other.t)
    }

    /// Evaluate the truncated polynomial at (x, z).
    pub fn evaluate(&self, x: C64, z: &[C64]) -> Result<Vec<C64>> {
        if z.len() != self.n_vars() {
            return Err(Error::Dimension(format!("{} z-values for {} variables", z.len(), self.n_vars())));
        }
        let zpow: Vec<C64> = (0..self.t.n_j())
            .map(|jid| {
                self.t.basis.index(jid).iter().zip(z).fold(C64::new(1.0, 0.0), |acc, (&e, zq)| acc * zq.powu(e))
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); self.n_comps()];
        let mut xp = C64::new(1.0, 0.0);
        for l in 0..=self.l_max() {
            for (jid, zp) in zpow.iter().enumerate() {
                for (c, o) in out.iter_mut().enumerate() {
                    *o += self.t.get(l, jid, c) * zp * xp;
                }
            }
            xp *= x;
        }
        Ok(out)
    }

    /// Coefficients as interchange records (nonzero entries only).
    pub fn to_records(&self) -> Vec<CoeffRecord> {
        self.nonzero()
            .into_iter()
            .map(|(l, j, c, v)| CoeffRecord { l, j, i: c + 1, re: v.re, im: v.im })
            .collect()
    }

    pub fn from_records(
        records: &[CoeffRecord],
        n_vars: usize,
        n_comps: usize,
        l_max: usize,
        j_max: usize,
    ) -> Result<Self> {
        let mut s = Self::zeros(n_vars, n_comps, l_max, j_max);
        for r in records {
            if r.i == 0 || r.i > n_comps {
                return Err(Error::Invalid(format!("record component {} outside 1..={n_comps}", r.i)));
            }
            if r.j.len() != n_vars {
                return Err(Error::Dimension(format!("record multi-index {:?} for {n_vars} variables", r.j)));
            }
            let prev = s.get(r.l, &r.j, r.i - 1);
            s.set(r.l, &r.j, r.i - 1, prev + C64::new(r.re, r.im))?;
        }
        Ok(s)
    }

    /// Rescale the coordinates z -> (z_1, r z_2, ..., r^{n-1} z_n) and the
    /// components by r^{-(i-1)}. This turns `A = Lambda + Xi` into
    /// `Lambda + r Xi`; applying it with `1/r` undoes it.
    pub fn jordan_rescale(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Invalid(format!("rescaling factor r = {r} must be positive")));
        }
        let vector = self.n_comps() == self.n_vars() && self.n_comps() > 1;
        let mut out = self.clone();
        for jid in 0..self.t.n_j() {
            let wj: i64 = self.t.basis.index(jid).iter().enumerate().map(|(s, &e)| s as i64 * e as i64).sum();
            for c in 0..self.n_comps() {
                let p = if vector { wj - c as i64 } else { wj };
                let f = r.powi(p as i32);
                for l in 0..=self.l_max() {
                    let v = self.t.get(l, jid, c);
                    out.t.set(l, jid, c, v * f);
                }
            }
        }
        Ok(out)
    }
}

/// `f(x, z + x phi(x, z))`, expanded and truncated.
///
/// `f` is read as the polynomial given by its stored coefficients; `phi`
/// must have one component per variable.
pub fn compose_shift(f: &TruncatedSeries, phi: &TruncatedSeries) -> Result<TruncatedSeries> {
    let n = f.n_vars();
    if phi.n_vars() != n || phi.n_comps() != n {
        return Err(Error::Dimension(format!(
            "phi must have {n} components over {n} variables, got {} over {}",
            phi.n_comps(),
            phi.n_vars()
        )));
    }
    let l_max = f.l_max().min(phi.l_max() + 1);
    let j_max = f.j_max();
    // u_q = z_q + x phi_q
    let xphi = phi.pad_polynomial(phi.l_max() + 1, j_max).shift_x(1).truncate(l_max, j_max);
    let mut u = Vec::with_capacity(n);
    for q in 0..n {
        let zq = TruncatedSeries::variable(n, q, l_max, j_max)?;
        u.push(zq.add(&xphi.component(q)?)?);
    }
    let fb = &f.t.basis;
    // products P_j = prod_q u_q^{j_q}, built along the graded order
    let mut prods: Vec<Option<TruncatedSeries>> = vec![None; f.t.n_j()];
    let mut one = TruncatedSeries::zeros(n, 1, l_max, j_max);
    one.t.set(0, 0, 0, C64::new(1.0, 0.0));
    prods[0] = Some(one);
    let needed: Vec<bool> = (0..f.t.n_j()).map(|jid| (0..=f.l_max()).any(|l| f.t.block(l, jid).iter().any(|v| v.norm() != 0.0))).collect();
    let mut out = TruncatedSeries::zeros(n, f.n_comps(), l_max, j_max);
    for jid in 0..f.t.n_j() {
        if !needed[jid] {
            continue;
        }
        let p = power_product(fb.index(jid), &u, &mut prods, fb)?;
        for l in 0..=l_max.min(f.l_max()) {
            let coeff = f.t.block(l, jid);
            if coeff.iter().all(|v| v.norm() == 0.0) {
                continue;
            }
            for pl in 0..=(l_max - l) {
                for pj in 0..p.t.n_j().min(out.t.n_j()) {
                    let pv = p.t.get(pl, pj, 0);
                    if pv.norm() == 0.0 {
                        continue;
                    }
                    for (c, fc) in coeff.iter().enumerate() {
                        let o = out.t.offset(l + pl, pj) + c;
                        out.t.data[o] += fc * pv;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn power_product(
    j: &[u32],
    u: &[TruncatedSeries],
    memo: &mut Vec<Option<TruncatedSeries>>,
    basis: &crate::basis::Basis,
) -> Result<TruncatedSeries> {
    let id = basis.find(j).expect("index in basis");
    if let Some(p) = &memo[id] {
        return Ok(p.clone());
    }
    let q = j.iter().position(|&e| e > 0).expect("nonzero index");
    let mut lower = j.to_vec();
    lower[q] -= 1;
    let prev = power_product(&lower, u, memo, basis)?;
    let p = prev.mul(&u[q])?;
    memo[id] = Some(p.clone());
    Ok(p)
}
