//! Dense coefficient storage shared by the x-plane and Borel-plane series.
//!
//! A table holds vector-valued coefficients indexed by a scalar degree
//! `d <= deg_max` (x-degree or w-degree) and a multi-index `|j| <= j_max`.
//! Products skip zero blocks, so sparse inputs stay cheap.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::basis::Basis;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct Table {
    pub n_vars: usize,
    pub n_comps: usize,
    pub deg_max: usize,
    pub j_max: usize,
    pub basis: Arc<Basis>,
    pub data: Vec<C64>,
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Result component count for a componentwise or broadcast product.
pub(crate) fn product_comps(a: usize, b: usize) -> Result<usize> {
    match (a, b) {
        (x, y) if x == y => Ok(x),
        (1, y) => Ok(y),
        (x, 1) => Ok(x),
        (x, y) => Err(Error::Dimension(format!("cannot multiply {x}- and {y}-component series"))),
    }
}

fn valid_bound(ta: usize, va: Option<usize>, tb: usize, vb: Option<usize>, shift: usize) -> usize {
    // A truncated product is known up to min(T_a + v_b, T_b + v_a) (+shift),
    // capped at the larger operand bound to keep tables from growing.
    let cap = ta.max(tb);
    let from_a = vb.map(|v| ta + v + shift).unwrap_or(usize::MAX);
    let from_b = va.map(|v| tb + v + shift).unwrap_or(usize::MAX);
    from_a.min(from_b).min(cap)
}

impl Table {
    pub fn zeros(n_vars: usize, n_comps: usize, deg_max: usize, j_max: usize) -> Table {
        let basis = Basis::get(n_vars, j_max);
        let len = (deg_max + 1) * basis.len() * n_comps;
        Table { n_vars, n_comps, deg_max, j_max, basis, data: vec![ZERO; len] }
    }

    #[inline]
    pub fn n_j(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    pub fn offset(&self, d: usize, jid: usize) -> usize {
        (d * self.n_j() + jid) * self.n_comps
    }

    #[inline]
    pub fn block(&self, d: usize, jid: usize) -> &[C64] {
        let o = self.offset(d, jid);
        &self.data[o..o + self.n_comps]
    }

    #[inline]
    pub fn get(&self, d: usize, jid: usize, c: usize) -> C64 {
        self.data[self.offset(d, jid) + c]
    }

    #[inline]
    pub fn set(&mut self, d: usize, jid: usize, c: usize, v: C64) {
        let o = self.offset(d, jid) + c;
        self.data[o] = v;
    }

    pub fn check_same_shape(&self, other: &Table) -> Result<()> {
        if self.n_vars != other.n_vars || self.n_comps != other.n_comps {
            return Err(Error::Dimension(format!(
                "({} vars, {} comps) vs ({} vars, {} comps)",
                self.n_vars, self.n_comps, other.n_vars, other.n_comps
            )));
        }
        Ok(())
    }

    fn block_is_zero(&self, d: usize, jid: usize) -> bool {
        self.block(d, jid).iter().all(|v| *v == ZERO)
    }

    fn nonzero_mask(&self) -> Vec<bool> {
        let n_j = self.n_j();
        (0..(self.deg_max + 1) * n_j).map(|b| !self.block_is_zero(b / n_j, b % n_j)).collect()
    }

    /// Smallest degree d carrying a nonzero coefficient.
    pub fn valuation_deg(&self) -> Option<usize> {
        (0..=self.deg_max).find(|&d| (0..self.n_j()).any(|j| !self.block_is_zero(d, j)))
    }

    /// Smallest total z-degree carrying a nonzero coefficient.
    pub fn valuation_z(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for d in 0..=self.deg_max {
            for jid in 0..self.n_j() {
                if !self.block_is_zero(d, jid) {
                    let dj = self.basis.degree_of(jid);
                    best = Some(best.map_or(dj, |b: usize| b.min(dj)));
                    break; // graded order: first nonzero id in this row has the least degree
                }
            }
        }
        best
    }

    /// Copy restricted to a smaller box.
    pub fn restrict(&self, deg_max: usize, j_max: usize) -> Table {
        let deg_max = deg_max.min(self.deg_max);
        let j_max = j_max.min(self.j_max);
        let mut out = Table::zeros(self.n_vars, self.n_comps, deg_max, j_max);
        let n_j = out.n_j();
        for d in 0..=deg_max {
            let src = self.offset(d, 0);
            let dst = out.offset(d, 0);
            out.data[dst..dst + n_j * self.n_comps].copy_from_slice(&self.data[src..src + n_j * self.n_comps]);
        }
        out
    }

    /// Copy placed in a larger box with zero padding. Only meaningful for
    /// tables that are exact polynomials.
    pub fn pad(&self, deg_max: usize, j_max: usize) -> Table {
        let mut out = Table::zeros(self.n_vars, self.n_comps, deg_max.max(self.deg_max), j_max.max(self.j_max));
        let n_j = self.n_j();
        for d in 0..=self.deg_max {
            let src = self.offset(d, 0);
            let dst = out.offset(d, 0);
            out.data[dst..dst + n_j * self.n_comps].copy_from_slice(&self.data[src..src + n_j * self.n_comps]);
        }
        out
    }

    pub fn zip_with(&self, other: &Table, f: impl Fn(C64, C64) -> C64) -> Result<Table> {
        self.check_same_shape(other)?;
        let deg_max = self.deg_max.min(other.deg_max);
        let j_max = self.j_max.min(other.j_max);
        let mut out = Table::zeros(self.n_vars, self.n_comps, deg_max, j_max);
        for d in 0..=deg_max {
            for jid in 0..out.n_j() {
                for c in 0..self.n_comps {
                    out.set(d, jid, c, f(self.get(d, jid, c), other.get(d, jid, c)));
                }
            }
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Table {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    /// Generic truncated product. The degree of a product term is
    /// `da + db + shift` and it is weighted by `weight(da, db)`.
    pub fn product(a: &Table, b: &Table, shift: usize, weight: &dyn Fn(usize, usize) -> f64) -> Result<Table> {
        if a.n_vars != b.n_vars {
            return Err(Error::Dimension(format!("{} vs {} variables", a.n_vars, b.n_vars)));
        }
        let nc = product_comps(a.n_comps, b.n_comps)?;
        let deg_max = valid_bound(a.deg_max, a.valuation_deg(), b.deg_max, b.valuation_deg(), shift);
        let j_max = valid_bound(a.j_max, a.valuation_z(), b.j_max, b.valuation_z(), 0);
        let mut out = Table::zeros(a.n_vars, nc, deg_max, j_max);
        let big = if a.j_max >= b.j_max { a.basis.clone() } else { b.basis.clone() };
        let mask_b = b.nonzero_mask();
        let nj_b = b.n_j();
        let ac = |c: usize| if a.n_comps == 1 { 0 } else { c };
        let bc = |c: usize| if b.n_comps == 1 { 0 } else { c };
        for da in 0..=a.deg_max {
            if da + shift > deg_max {
                break;
            }
            for ja in 0..a.n_j() {
                let dja = a.basis.degree_of(ja);
                if dja > j_max {
                    break;
                }
                if a.block_is_zero(da, ja) {
                    continue;
                }
                let jb_end = big.len_up_to(j_max - dja).min(nj_b);
                let db_end = (deg_max - da - shift).min(b.deg_max);
                for db in 0..=db_end {
                    let w = weight(da, db);
                    if w == 0.0 {
                        continue;
                    }
                    let d = da + db + shift;
                    for jb in 0..jb_end {
                        if !mask_b[db * nj_b + jb] {
                            continue;
                        }
                        let jid = big.sum(ja, jb).expect("sum inside basis");
                        let oa = a.offset(da, ja);
                        let ob = b.offset(db, jb);
                        let oo = out.offset(d, jid);
                        for c in 0..nc {
                            out.data[oo + c] += a.data[oa + ac(c)] * b.data[ob + bc(c)] * w;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Derivative in z_q: coefficient of j - e_q gains factor j_q.
    /// The top z-degree is lost.
    pub fn partial_z(&self, q: usize) -> Result<Table> {
        if q >= self.n_vars {
            return Err(Error::Invalid(format!("variable index {q} with n = {}", self.n_vars)));
        }
        let j_max = self.j_max.saturating_sub(1);
        let mut out = Table::zeros(self.n_vars, self.n_comps, self.deg_max, j_max);
        for d in 0..=self.deg_max {
            for jid in 0..self.n_j() {
                let jq = self.basis.index(jid)[q];
                if jq == 0 {
                    continue;
                }
                let lid = self.basis.lower(q, jid).expect("lower index");
                if lid >= out.n_j() {
                    continue;
                }
                for c in 0..self.n_comps {
                    let v = self.get(d, jid, c) * jq as f64;
                    out.set(d, lid, c, v);
                }
            }
        }
        Ok(out)
    }

    pub fn component(&self, i: usize) -> Result<Table> {
        if i >= self.n_comps {
            return Err(Error::Invalid(format!("component {i} of {}", self.n_comps)));
        }
        let mut out = Table::zeros(self.n_vars, 1, self.deg_max, self.j_max);
        for d in 0..=self.deg_max {
            for jid in 0..self.n_j() {
                out.set(d, jid, 0, self.get(d, jid, i));
            }
        }
        Ok(out)
    }

    pub fn stack(parts: &[Table]) -> Result<Table> {
        let first = parts.first().ok_or_else(|| Error::Invalid("no components".into()))?;
        let deg_max = parts.iter().map(|p| p.deg_max).min().unwrap();
        let j_max = parts.iter().map(|p| p.j_max).min().unwrap();
        let mut out = Table::zeros(first.n_vars, parts.len(), deg_max, j_max);
        for (i, p) in parts.iter().enumerate() {
            if p.n_comps != 1 || p.n_vars != first.n_vars {
                return Err(Error::Dimension("stack expects scalar parts over the same variables".into()));
            }
            for d in 0..=deg_max {
                for jid in 0..out.n_j() {
                    out.set(d, jid, i, p.get(d, jid, 0));
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max |a - b| over the common box.
    pub fn max_diff(&self, other: &Table) -> Result<f64> {
        Ok(self.zip_with(other, |x, y| x - y)?.max_abs())
    }
}
