//! Borel-plane series, the order-k Borel transform and Gevrey diagnostics.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{degree, MultiIndex};
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;
use crate::special::{gamma, ln_gamma};
use crate::table::Table;

/// Truncated series `sum c_{m,j} w^m z^j`, known for `m <= m_max` and
/// `|j| <= j_max`.
#[derive(Clone, Debug)]
pub struct BorelSeries {
    pub(crate) t: Table,
}

/// One Borel-plane coefficient in the interchange format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorelRecord {
    pub m: usize,
    pub j: Vec<u32>,
    /// 1-based component.
    pub i: usize,
    pub re: f64,
    pub im: f64,
}

impl BorelSeries {
    pub fn zeros(n_vars: usize, n_comps: usize, m_max: usize, j_max: usize) -> Self {
        BorelSeries { t: Table::zeros(n_vars, n_comps, m_max, j_max) }
    }

    pub(crate) fn from_table(t: Table) -> Self {
        BorelSeries { t }
    }

    /// Scalar monomial `c w^m z^j`.
    pub fn monomial(n_vars: usize, m: usize, j: &[u32], c: C64, m_max: usize, j_max: usize) -> Result<Self> {
        let mut s = Self::zeros(n_vars, 1, m_max, j_max);
        s.set(m, j, 0, c)?;
        Ok(s)
    }

    pub fn n_vars(&self) -> usize {
        self.t.n_vars
    }
    pub fn n_comps(&self) -> usize {
        self.t.n_comps
    }
    pub fn m_max(&self) -> usize {
        self.t.deg_max
    }
    pub fn j_max(&self) -> usize {
        self.t.j_max
    }

    fn locate(&self, m: usize, j: &[u32]) -> Option<usize> {
        if m > self.m_max() || j.len() != self.n_vars() || degree(j) > self.j_max() {
            return None;
        }
        self.t.basis.find(j)
    }

    pub fn get(&self, m: usize, j: &[u32], i: usize) -> C64 {
        match self.locate(m, j) {
            Some(id) if i < self.n_comps() => self.t.get(m, id, i),
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, m: usize, j: &[u32], i: usize, v: C64) -> Result<()> {
        if i >= self.n_comps() {
            return Err(Error::Invalid(format!("component {i} of {}", self.n_comps())));
        }
        let id = self
            .locate(m, j)
            .ok_or_else(|| Error::Truncation(format!("(m={m}, j={j:?}) outside m<={}, |j|<={}", self.m_max(), self.j_max())))?;
        self.t.set(m, id, i, v);
        Ok(())
    }

    pub fn nonzero(&self) -> Vec<(usize, MultiIndex, usize, C64)> {
        let mut out = Vec::new();
        for m in 0..=self.m_max() {
            for jid in 0..self.t.n_j() {
                for c in 0..self.n_comps() {
                    let v = self.t.get(m, jid, c);
                    if v != C64::new(0.0, 0.0) {
                        out.push((m, self.t.basis.index(jid).clone(), c, v));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(BorelSeries { t: self.t.zip_with(&other.t, |a, b| a + b)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(BorelSeries { t: self.t.zip_with(&other.t, |a, b| a - b)? })
    }

    pub fn scale(&self, c: C64) -> Self {
        BorelSeries { t: self.t.map(|v| v * c) }
    }

    /// Pointwise product in w and z (not the convolution).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(BorelSeries { t: Table::product(&self.t, &other.t, 0, &|_, _| 1.0)? })
    }

    pub fn partial_z(&self, q: usize) -> Result<Self> {
        Ok(BorelSeries { t: self.t.partial_z(q)? })
    }

    /// Multiply by w^p, dropping degrees beyond m_max.
    pub fn shift_w(&self, p: usize) -> Self {
        let mut out = Self::zeros(self.n_vars(), self.n_comps(), self.m_max(), self.j_max());
        for m in 0..=self.m_max() {
            if m + p > self.m_max() {
                break;
            }
            for jid in 0..self.t.n_j() {
                for c in 0..self.n_comps() {
                    out.t.set(m + p, jid, c, self.t.get(m, jid, c));
                }
            }
        }
        out
    }

    pub fn component(&self, i: usize) -> Result<Self> {
        Ok(BorelSeries { t: self.t.component(i)? })
    }

    pub fn from_components(parts: &[BorelSeries]) -> Result<Self> {
        let tables: Vec<Table> = parts.iter().map(|p| p.t.clone()).collect();
        Ok(BorelSeries { t: Table::stack(&tables)? })
    }

    pub fn truncate(&self, m_max: usize, j_max: usize) -> Self {
        BorelSeries { t: self.t.restrict(m_max, j_max) }
    }

    pub fn pad_polynomial(&self, m_max: usize, j_max: usize) -> Self {
        BorelSeries { t: self.t.pad(m_max, j_max) }
    }

    pub fn max_abs(&self) -> f64 {
        self.t.max_abs()
    }

    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.t.max_diff(&other.t)
    }

    /// Coefficients of the w-polynomial multiplying z^j in component i.
    pub fn w_poly(&self, j: &[u32], i: usize) -> Vec<C64> {
        (0..=self.m_max()).map(|m| self.get(m, j, i)).collect()
    }

    /// Evaluate at (w, z).
    pub fn evaluate(&self, w: C64, z: &[C64]) -> Result<Vec<C64>> {
        if z.len() != self.n_vars() {
            return Err(Error::Dimension(format!("{} z-values for {} variables", z.len(), self.n_vars())));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.n_comps()];
        for jid in 0..self.t.n_j() {
            let zp = self.t.basis.index(jid).iter().zip(z).fold(C64::new(1.0, 0.0), |acc, (&e, zq)| acc * zq.powu(e));
            if zp == C64::new(0.0, 0.0) {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for m in (0..=self.m_max()).rev() {
                    acc = acc * w + self.t.get(m, jid, c);
                }
                *o += acc * zp;
            }
        }
        Ok(out)
    }

    pub fn to_records(&self) -> Vec<BorelRecord> {
        self.nonzero()
            .into_iter()
            .map(|(m, j, c, v)| BorelRecord { m, j, i: c + 1, re: v.re, im: v.im })
            .collect()
    }

    pub fn from_records(records: &[BorelRecord], n_vars: usize, n_comps: usize, m_max: usize, j_max: usize) -> Result<Self> {
        let mut s = Self::zeros(n_vars, n_comps, m_max, j_max);
        for r in records {
            if r.i == 0 || r.i > n_comps {
                return Err(Error::Invalid(format!("record component {} outside 1..={n_comps}", r.i)));
            }
            if r.j.len() != n_vars {
                return Err(Error::Dimension(format!("record multi-index {:?} for {n_vars} variables", r.j)));
            }
            let prev = s.get(r.m, &r.j, r.i - 1);
            s.set(r.m, &r.j, r.i - 1, prev + C64::new(r.re, r.im))?;
        }
        Ok(s)
    }
}

fn check_rank(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Invalid("rank k must be >= 1".into()));
    }
    Ok(())
}

/// `B_k`: the x^l coefficient divided by Gamma(l/k) becomes the w^{l-1}
/// coefficient.
pub fn borel_transform(h: &TruncatedSeries, k: usize) -> Result<BorelSeries> {
    check_rank(k)?;
    if !h.is_order_x() {
        return Err(Error::NotOrderX("series has terms with x^0".into()));
    }
    let m_max = h.l_max().saturating_sub(1);
    let mut out = BorelSeries::zeros(h.n_vars(), h.n_comps(), m_max, h.j_max());
    for l in 1..=h.l_max() {
        let g = gamma(l as f64 / k as f64);
        for jid in 0..h.t.n_j() {
            for c in 0..h.n_comps() {
                out.t.set(l - 1, jid, c, h.t.get(l, jid, c) / g);
            }
        }
    }
    Ok(out)
}

/// Formal inverse of `B_k`: w^m becomes Gamma((m+1)/k) x^{m+1}.
pub fn inverse_borel(hb: &BorelSeries, k: usize) -> Result<TruncatedSeries> {
    check_rank(k)?;
    let mut out = TruncatedSeries::zeros(hb.n_vars(), hb.n_comps(), hb.m_max() + 1, hb.j_max());
    for m in 0..=hb.m_max() {
        let g = gamma((m + 1) as f64 / k as f64);
        for jid in 0..hb.t.n_j() {
            for c in 0..hb.n_comps() {
                out.t.set(m + 1, jid, c, hb.t.get(m, jid, c) * g);
            }
        }
    }
    Ok(out)
}

/// Least-squares Gevrey fit `||h_l|| ~ K T^{l-1} Gamma(l/k)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GevreyFit {
    #[serde(rename = "K")]
    pub k_fit: f64,
    #[serde(rename = "T")]
    pub t_fit: f64,
    #[serde(rename = "k")]
    pub k_assumed: usize,
    /// RMS deviation of the log-linear fit.
    pub residual: f64,
    /// `||h_l||` for l = 0..=L_max.
    pub norms: Vec<f64>,
    /// Log-log slope of consecutive Borel-coefficient ratios against l.
    /// Near zero for genuine Gevrey-1/k growth, clearly negative when the
    /// Borel coefficients decay faster than any geometric sequence.
    pub ratio_exponent: Option<f64>,
    pub subgeometric: bool,
}

/// Ratio exponents below this count as faster-than-geometric decay.
const SUBGEOMETRIC_EXPONENT: f64 = -0.25;

/// `||h_l||` = max over components of `sum_j |h_{l,j}| R^{|j|}`.
pub fn order_norms(h: &TruncatedSeries, radius: f64) -> Vec<f64> {
    (0..=h.l_max())
        .map(|l| {
            (0..h.n_comps())
                .map(|c| {
                    (0..h.t.n_j())
                        .map(|jid| h.t.get(l, jid, c).norm() * radius.powi(h.t.basis.degree_of(jid) as i32))
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, rms)
}

pub fn gevrey_fit(h: &TruncatedSeries, k: usize, radius: f64) -> Result<GevreyFit> {
    check_rank(k)?;
    if !(radius > 0.0) {
        return Err(Error::Invalid(format!("z-radius R = {radius} must be positive")));
    }
    let norms = order_norms(h, radius);
    if norms.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateFit("all-zero series".into()));
    }
    if h.l_max() < 6 {
        return Err(Error::DegenerateFit(format!("need L_max >= 6 for a fit, have {}", h.l_max())));
    }
    let kf = k as f64;
    let pts: Vec<(f64, f64)> = (2..=h.l_max())
        .filter(|&l| norms[l] > 0.0)
        .map(|l| ((l - 1) as f64, norms[l].ln() - ln_gamma(l as f64 / kf)))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} usable orders", pts.len())));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, icpt, residual) = linear_fit(&xs, &ys);

    // ratios of consecutive Borel coefficients over consecutive orders
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for w in pts.windows(2) {
        if (w[1].0 - w[0].0 - 1.0).abs() < 0.5 {
            lx.push((w[0].0 + 1.0).ln());
            ly.push(w[1].1 - w[0].1);
        }
    }
    // d log(ratio) / d log(l); ly already holds log ratios
    let ratio_exponent = if lx.len() >= 3 { Some(linear_fit(&lx, &ly).0) } else { None };
    Ok(GevreyFit {
        k_fit: icpt.exp(),
        t_fit: slope.exp(),
        k_assumed: k,
        residual,
        norms,
        ratio_exponent,
        subgeometric: ratio_exponent.map_or(false, |e| e < SUBGEOMETRIC_EXPONENT),
    })
}

impl GevreyFit {
    /// `l,norm` rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,norm\n");
        for (l, v) in self.norms.iter().enumerate() {
            s.push_str(&format!("{l},{v:.16e}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn euler_x_phi(l_max: usize) -> TruncatedSeries {
        // sum_{m>=1} (-1)^{m-1} (m-1)! x^m
        let mut h = TruncatedSeries::zeros(1, 1, l_max, 0);
        let mut f = 1.0;
        for m in 1..=l_max {
            if m > 1 {
                f *= (m - 1) as f64;
            }
            let s = if m % 2 == 1 { 1.0 } else { -1.0 };
            h.set(m, &[0], 0, c(s * f)).unwrap();
        }
        h
    }

    #[test]
    fn transform_examples() {
        let x = TruncatedSeries::monomial(1, 1, &[0], c(1.0), 4, 2).unwrap();
        let b = borel_transform(&x, 2).unwrap();
        assert!((b.get(0, &[0], 0).re - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert_eq!(borel_transform(&x, 1).unwrap().get(0, &[0], 0), c(1.0));
        let b = borel_transform(&euler_x_phi(15), 1).unwrap();
        for m in 0..15 {
            let s = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert!((b.get(m, &[0], 0) - c(s)).norm() < 1e-12);
        }
        let one = TruncatedSeries::monomial(1, 0, &[0], c(1.0), 4, 2).unwrap();
        assert!(matches!(borel_transform(&one, 1), Err(Error::NotOrderX(_))));
    }

    #[test]
    fn inverse_examples() {
        let wn = BorelSeries::monomial(2, 3, &[0, 0], c(1.0), 5, 2).unwrap();
        let h = inverse_borel(&wn, 2).unwrap();
        assert!((h.get(4, &[0, 0], 0) - c(gamma(2.0))).norm() < 1e-15);
        assert_eq!(inverse_borel(&BorelSeries::zeros(1, 1, 4, 2), 3).unwrap().max_abs(), 0.0);
    }

    proptest! {
        #[test]
        fn round_trip(coeffs in proptest::collection::vec(-1.0f64..1.0, 18), k in 1usize..5) {
            let mut h = TruncatedSeries::zeros(2, 1, 6, 1);
            let js = [[0u32, 0], [1, 0], [0, 1]];
            for (idx, v) in coeffs.iter().enumerate() {
                h.set(idx / 3 + 1, &js[idx % 3], 0, c(*v)).unwrap();
            }
            let back = inverse_borel(&borel_transform(&h, k).unwrap(), k).unwrap();
            prop_assert!(back.max_diff(&h).unwrap() <= 1e-14);
        }

        #[test]
        fn transform_is_linear(a in proptest::collection::vec(-1.0f64..1.0, 6),
                               b in proptest::collection::vec(-1.0f64..1.0, 6),
                               s in -2.0f64..2.0) {
            let mut u = TruncatedSeries::zeros(1, 1, 6, 0);
            let mut v = TruncatedSeries::zeros(1, 1, 6, 0);
            for l in 1..=6 {
                u.set(l, &[0], 0, c(a[l - 1])).unwrap();
                v.set(l, &[0], 0, c(b[l - 1])).unwrap();
            }
            let lhs = borel_transform(&u.scale(c(s)).add(&v).unwrap(), 2).unwrap();
            let rhs = borel_transform(&u, 2).unwrap().scale(c(s)).add(&borel_transform(&v, 2).unwrap()).unwrap();
            prop_assert!(lhs.max_diff(&rhs).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn euler_fit() {
        let fit = gevrey_fit(&euler_x_phi(20), 1, 1.0).unwrap();
        assert!((fit.t_fit - 1.0).abs() < 1e-10);
        assert!((fit.k_fit - 1.0).abs() < 1e-10);
        assert!(!fit.subgeometric);
        for l in 1..=20 {
            let bound = fit.k_fit * fit.t_fit.powi(l as i32 - 1) * gamma(l as f64);
            assert!(fit.norms[l] <= bound * 1.5);
        }
    }

    #[test]
    fn convergent_control_is_subgeometric() {
        let mut h = TruncatedSeries::zeros(1, 1, 20, 0);
        for l in 1..=20 {
            h.set(l, &[0], 0, c(1.0)).unwrap();
        }
        let fit = gevrey_fit(&h, 1, 1.0).unwrap();
        assert!(fit.subgeometric);
        assert!(fit.ratio_exponent.unwrap() < -0.8);
        // k = 2 with Gamma(l/2) growth stays geometric
        let mut g = TruncatedSeries::zeros(1, 1, 20, 0);
        for l in 1..=20 {
            g.set(l, &[0], 0, c(0.5f64.powi(l as i32) * gamma(l as f64 / 2.0))).unwrap();
        }
        let fit = gevrey_fit(&g, 2, 1.0).unwrap();
        assert!((fit.t_fit - 0.5).abs() < 1e-10);
        assert!(!fit.subgeometric);
    }

    #[test]
    fn degenerate_fits() {
        let x = TruncatedSeries::monomial(1, 1, &[0], c(1.0), 10, 0).unwrap();
        assert!(matches!(gevrey_fit(&x, 1, 1.0), Err(Error::DegenerateFit(_))));
        let zero = TruncatedSeries::zeros(1, 1, 10, 0);
        assert!(matches!(gevrey_fit(&zero, 1, 1.0), Err(Error::DegenerateFit(_))));
        assert!(matches!(gevrey_fit(&euler_x_phi(5), 1, 1.0), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn norms_use_radius() {
        let mut h = TruncatedSeries::zeros(2, 2, 2, 2);
        h.set(1, &[1, 1], 0, c(2.0)).unwrap();
        h.set(1, &[0, 0], 0, c(-1.0)).unwrap();
        h.set(1, &[0, 1], 1, c(5.0)).unwrap();
        let n = order_norms(&h, 0.5);
        assert_eq!(n[1], 5.0 * 0.5);
        let n = order_norms(&h, 2.0);
        assert_eq!(n[1], 10.0f64.max(2.0 * 4.0 + 1.0));
    }
}
