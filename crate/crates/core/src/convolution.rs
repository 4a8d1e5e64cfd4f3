//! The order-k convolution
//!
//! ```text
//! (H *_k J)(w) = w int_0^1 (s(1-s))^{(1-k)/k} H(w (1-s)^{1/k}) J(w s^{1/k}) ds
//! ```
//!
//! exactly on w-monomials, numerically for callables, and the composition
//! `h*` that turns `h(x, z + L(Psi))` into a Borel-plane expression.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::degree;
use crate::borel::BorelSeries;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use crate::series::TruncatedSeries;
use crate::special::{beta, gamma};
use crate::table::Table;

/// `w^a *_k w^b = B((b+1)/k, (a+1)/k) w^{a+b+1}`.
pub fn convolve_monomial(a: usize, b: usize, k: usize) -> (usize, f64) {
    let kf = k as f64;
    (a + b + 1, beta((b + 1) as f64 / kf, (a + 1) as f64 / kf))
}

fn beta_table(m: usize, k: usize) -> Vec<f64> {
    let mut t = vec![0.0; (m + 1) * (m + 1)];
    for a in 0..=m {
        for b in 0..=m - a {
            t[a * (m + 1) + b] = convolve_monomial(a, b, k).1;
        }
    }
    t
}

fn check_rank(k: usize) -> Result<()> {
    if k == 0 {
        return invalid("rank k must be >= 1");
    }
    Ok(())
}

/// Bilinear extension of [`convolve_monomial`]; z-monomials multiply.
/// Components follow the same broadcasting rule as series products.
pub fn convolve_series(h: &BorelSeries, j: &BorelSeries, k: usize) -> Result<BorelSeries> {
    check_rank(k)?;
    let m = h.m_max().max(j.m_max());
    let bt = beta_table(m, k);
    let t = Table::product(&h.t, &j.t, 1, &|da, db| if da + db <= m { bt[da * (m + 1) + db] } else { 0.0 })?;
    Ok(BorelSeries::from_table(t))
}

/// `H_1^{*j_1} * ... * H_n^{*j_n}` for `|j| >= 1`.
pub fn conv_power(h: &BorelSeries, j: &[u32], k: usize) -> Result<BorelSeries> {
    if j.len() != h.n_comps() {
        return Err(Error::Dimension(format!("index {:?} for {} components", j, h.n_comps())));
    }
    if degree(j) == 0 {
        return invalid("convolution power with |j| = 0 has no Borel-plane representative");
    }
    let mut acc: Option<BorelSeries> = None;
    for (q, &e) in j.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let hq = h.component(q)?;
        for _ in 0..e {
            acc = Some(match acc {
                None => hq.clone(),
                Some(a) => convolve_series(&a, &hq, k)?,
            });
        }
    }
    Ok(acc.expect("|j| >= 1"))
}

/// Borel-plane element with an adjoined convolution unit: `unit` is a
/// z-polynomial standing for `unit(z) * delta`, `borel` the ordinary part.
/// Under the Laplace transform `delta` maps to 1, so this represents
/// series with an x^0 term.
#[derive(Clone, Debug)]
pub struct WithUnit {
    pub unit: BorelSeries,
    pub borel: BorelSeries,
}

impl WithUnit {
    pub fn new(unit: BorelSeries, borel: BorelSeries) -> Result<Self> {
        if unit.m_max() != 0 {
            return invalid("unit part must be a z-polynomial (m_max = 0)");
        }
        if unit.n_comps() != borel.n_comps() || unit.n_vars() != borel.n_vars() {
            return Err(Error::Dimension("unit and Borel parts disagree in shape".into()));
        }
        Ok(WithUnit { unit, borel })
    }

    /// `(p, P) * (q, Q) = (pq, pQ + qP + P * Q)`.
    pub fn convolve(&self, other: &Self, k: usize) -> Result<Self> {
        let unit = self.unit.mul(&other.unit)?;
        let m = self.borel.m_max().max(other.borel.m_max());
        let p = self.unit.pad_polynomial(m, self.unit.j_max());
        let q = other.unit.pad_polynomial(m, other.unit.j_max());
        let borel = p.mul(&other.borel)?.add(&q.mul(&self.borel)?)?.add(&convolve_series(&self.borel, &other.borel, k)?)?;
        Ok(WithUnit { unit, borel })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(WithUnit { unit: self.unit.add(&other.unit)?, borel: self.borel.add(&other.borel)? })
    }

    pub fn partial_z(&self, q: usize) -> Result<Self> {
        Ok(WithUnit { unit: self.unit.partial_z(q)?, borel: self.borel.partial_z(q)? })
    }

    pub fn component(&self, i: usize) -> Result<Self> {
        Ok(WithUnit { unit: self.unit.component(i)?, borel: self.borel.component(i)? })
    }
}

/// Borel image of multiplication by x: `u_x *_k H` with `u_x = 1/Gamma(1/k)`,
/// so `w^b` goes to `Gamma((b+1)/k)/Gamma((b+2)/k) w^{b+1}`. The unit part
/// contributes `u_x` times its z-polynomial. The w-truncation is kept.
pub fn times_x(h: &WithUnit, k: usize) -> Result<BorelSeries> {
    check_rank(k)?;
    let kf = k as f64;
    let b = &h.borel;
    let mut out = BorelSeries::zeros(b.n_vars(), b.n_comps(), b.m_max(), b.j_max());
    let ux = 1.0 / gamma(1.0 / kf);
    let nj = out.t.n_j().min(h.unit.t.n_j());
    for jid in 0..nj {
        for c in 0..b.n_comps() {
            out.t.set(0, jid, c, h.unit.t.get(0, jid, c) * ux);
        }
    }
    for m in 0..b.m_max() {
        let f = gamma((m + 1) as f64 / kf) / gamma((m + 2) as f64 / kf);
        for jid in 0..b.t.n_j() {
            for c in 0..b.n_comps() {
                let v = out.t.get(m + 1, jid, c) + b.t.get(m, jid, c) * f;
                out.t.set(m + 1, jid, c, v);
            }
        }
    }
    Ok(out)
}

/// Borel image of multiplication by `x^k / k`: `w^b` goes to
/// `w^{b+k}/(b+1)` and the unit part to `w^{k-1}/k`.
pub fn times_xk_over_k(h: &WithUnit, k: usize) -> Result<BorelSeries> {
    check_rank(k)?;
    let b = &h.borel;
    let mut out = BorelSeries::zeros(b.n_vars(), b.n_comps(), b.m_max(), b.j_max());
    let nj = out.t.n_j().min(h.unit.t.n_j());
    if k - 1 <= b.m_max() {
        for jid in 0..nj {
            for c in 0..b.n_comps() {
                out.t.set(k - 1, jid, c, h.unit.t.get(0, jid, c) / k as f64);
            }
        }
    }
    for m in 0..=b.m_max() {
        if m + k > b.m_max() {
            break;
        }
        for jid in 0..b.t.n_j() {
            for c in 0..b.n_comps() {
                let v = out.t.get(m + k, jid, c) + b.t.get(m, jid, c) / (m + 1) as f64;
                out.t.set(m + k, jid, c, v);
            }
        }
    }
    Ok(out)
}

/// Borel part of `f(x, z + L(Psi)) - f(0, z)`:
/// `sum_j F_j *_k (z + Psi)^{*j}` where `F_j` is the Borel image of
/// `sum_l f_{l,j} x^l` and the x^0 terms of f act as multiples of the unit.
///
/// `psi` has one component per variable; `f` is read as a polynomial.
pub fn h_star(f: &TruncatedSeries, psi: &BorelSeries, k: usize) -> Result<BorelSeries> {
    check_rank(k)?;
    let n = f.n_vars();
    if psi.n_vars() != n || psi.n_comps() != n {
        return Err(Error::Dimension(format!(
            "Psi must have {n} components over {n} variables, got {} over {}",
            psi.n_comps(),
            psi.n_vars()
        )));
    }
    let m_max = psi.m_max();
    let j_max = f.j_max().min(psi.j_max());
    let nc = f.n_comps();
    // base elements z_q + Psi_q
    let mut base = Vec::with_capacity(n);
    for q in 0..n {
        let mut e = vec![0; n];
        e[q] = 1;
        let unit = if j_max >= 1 {
            BorelSeries::monomial(n, 0, &e, C64::new(1.0, 0.0), 0, j_max)?
        } else {
            BorelSeries::zeros(n, 1, 0, j_max)
        };
        base.push(WithUnit::new(unit, psi.component(q)?.truncate(m_max, j_max))?);
    }
    let fb = f.t.basis.clone();
    let mut powers: Vec<Option<WithUnit>> = vec![None; fb.len_up_to(j_max)];
    let mut one_unit = BorelSeries::zeros(n, 1, 0, j_max);
    one_unit.t.set(0, 0, 0, C64::new(1.0, 0.0));
    powers[0] = Some(WithUnit { unit: one_unit, borel: BorelSeries::zeros(n, 1, m_max, j_max) });
    let mut out = BorelSeries::zeros(n, nc, m_max, j_max);
    let kf = k as f64;
    for jid in 0..powers.len() {
        let nonzero = (0..=f.l_max()).any(|l| f.t.block(l, jid).iter().any(|v| v.norm() != 0.0));
        if !nonzero {
            continue;
        }
        let p = power(jid, &base, &mut powers, &fb, k)?;
        // F_j as a vector-valued element with unit part f_{0,j}
        let mut fu = BorelSeries::zeros(n, nc, 0, j_max);
        let mut fw = BorelSeries::zeros(n, nc, m_max, j_max);
        for c in 0..nc {
            fu.t.set(0, 0, c, f.t.get(0, jid, c));
            for l in 1..=f.l_max().min(m_max + 1) {
                fw.t.set(l - 1, 0, c, f.t.get(l, jid, c) / gamma(l as f64 / kf));
            }
        }
        let term = WithUnit { unit: fu, borel: fw }.convolve(&p, k)?;
        out = out.add(&term.borel)?;
    }
    Ok(out)
}

fn power(
    jid: usize,
    base: &[WithUnit],
    memo: &mut Vec<Option<WithUnit>>,
    basis: &crate::basis::Basis,
    k: usize,
) -> Result<WithUnit> {
    if let Some(p) = &memo[jid] {
        return Ok(p.clone());
    }
    let j = basis.index(jid);
    let q = j.iter().position(|&e| e > 0).expect("nonzero index");
    let lower = basis.lower(q, jid).expect("j_q > 0");
    let prev = power(lower, base, memo, basis, k)?;
    let p = prev.convolve(&base[q], k)?;
    memo[jid] = Some(p.clone());
    Ok(p)
}

/// How `convolve_numeric` treats the endpoint singularities of the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureScheme {
    /// Split at s = 1/2 and substitute s = t^k (resp. 1 - s = t^k), which
    /// removes both the kernel singularity and the branch points of
    /// `s^{1/k}`; then Gauss-Legendre on each half.
    SplitPower,
    /// Gauss-Jacobi with exponents (1-k)/k at both ends. Exact for the
    /// kernel, but the integrand keeps `s^{1/k}` branch points, so the
    /// error decays only algebraically for k > 1.
    Jacobi,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub node_count: usize,
    pub tolerance: f64,
    pub scheme: QuadratureScheme,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { node_count: 64, tolerance: 1e-10, scheme: QuadratureScheme::SplitPower }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 8 {
            return invalid(format!("node_count = {} must be >= 8", self.node_count));
        }
        if !(self.tolerance > 0.0) {
            return invalid("quadrature tolerance must be positive");
        }
        Ok(())
    }

    pub fn jacobi_exponent(k: usize) -> f64 {
        (1.0 - k as f64) / k as f64
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureValue {
    pub value: C64,
    /// Difference to the same rule with half again as many nodes.
    pub error_estimate: f64,
}

fn numeric_with(h: &dyn Fn(C64) -> C64, j: &dyn Fn(C64) -> C64, w: C64, k: usize, n: usize, scheme: QuadratureScheme) -> Result<C64> {
    let kf = k as f64;
    let beta_exp = QuadratureConfig::jacobi_exponent(k);
    let mut sum = C64::new(0.0, 0.0);
    match scheme {
        QuadratureScheme::SplitPower => {
            let (x, wt) = gauss_legendre(n)?;
            let top = 0.5f64.powf(1.0 / kf);
            for (xi, wi) in x.iter().zip(&wt) {
                let t = 0.5 * top * (xi + 1.0);
                let rest = 1.0 - t.powi(k as i32);
                let kern = rest.powf(beta_exp);
                let near = w * t;
                let far = w * rest.powf(1.0 / kf);
                // s = t^k near 0, and 1 - s = t^k near 1
                sum += (h(far) * j(near) + h(near) * j(far)) * (kern * wi);
            }
            sum *= 0.5 * top * kf;
        }
        QuadratureScheme::Jacobi => {
            let (x, wt) = gauss_jacobi(n, beta_exp, beta_exp)?;
            for (xi, wi) in x.iter().zip(&wt) {
                let s = 0.5 * (xi + 1.0);
                sum += h(w * (1.0 - s).powf(1.0 / kf)) * j(w * s.powf(1.0 / kf)) * *wi;
            }
            // s = (1+x)/2 turns (s(1-s))^b ds into 2^{-2b-1} (1-x)^b (1+x)^b dx
            sum *= 2f64.powf(-2.0 * beta_exp - 1.0);
        }
    }
    if !sum.re.is_finite() || !sum.im.is_finite() {
        return Err(Error::Numerical(format!("non-finite convolution integrand at w = {w}")));
    }
    Ok(sum * w)
}

/// Quadrature value of `(H *_k J)(w)` with principal-branch roots.
pub fn convolve_numeric(
    h: &dyn Fn(C64) -> C64,
    j: &dyn Fn(C64) -> C64,
    w: C64,
    k: usize,
    cfg: &QuadratureConfig,
) -> Result<QuadratureValue> {
    check_rank(k)?;
    cfg.validate()?;
    let v = numeric_with(h, j, w, k, cfg.node_count, cfg.scheme)?;
    let v2 = numeric_with(h, j, w, k, cfg.node_count + cfg.node_count / 2, cfg.scheme)?;
    Ok(QuadratureValue { value: v2, error_estimate: (v2 - v).norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    use crate::borel::inverse_borel;
    use crate::series::compose_shift;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn poly(coeffs: &[f64]) -> BorelSeries {
        let mut s = BorelSeries::zeros(1, 1, coeffs.len() - 1, 0);
        for (m, v) in coeffs.iter().enumerate() {
            s.set(m, &[0], 0, c(*v)).unwrap();
        }
        s
    }

    #[test]
    fn monomial_examples() {
        assert_eq!(convolve_monomial(0, 0, 1), (1, 1.0));
        let (d, v) = convolve_monomial(0, 0, 2);
        assert_eq!(d, 1);
        assert!((v - PI).abs() < 1e-14);
        for k in 1..=4 {
            for a in 0..=12 {
                for b in 0..=12 {
                    let kf = k as f64;
                    let expect = gamma((a + 1) as f64 / kf) * gamma((b + 1) as f64 / kf) / gamma((a + b + 2) as f64 / kf);
                    let got = convolve_monomial(a, b, k).1;
                    assert!((got - expect).abs() <= 1e-12 * expect.max(1.0));
                }
            }
        }
    }

    #[test]
    fn quadrature_reproduces_beta_law() {
        let cfg = QuadratureConfig::default();
        for k in 1..=4 {
            for a in [0usize, 3, 12] {
                for b in [0usize, 5, 12] {
                    let v = convolve_numeric(&|w| w.powu(a as u32), &|w| w.powu(b as u32), c(1.0), k, &cfg).unwrap();
                    let expect = convolve_monomial(a, b, k).1;
                    assert!((v.value - c(expect)).norm() < 1e-10 * expect.max(1.0), "k={k} a={a} b={b}");
                }
            }
        }
        let one = |_: C64| c(1.0);
        let v = convolve_numeric(&one, &one, c(1.0), 2, &cfg).unwrap();
        assert!((v.value - c(PI)).norm() < 1e-10);
        let v = convolve_numeric(&one, &one, c(2.0), 1, &cfg).unwrap();
        assert!((v.value - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn jacobi_scheme_is_exact_for_k1_and_slow_otherwise() {
        let cfg = QuadratureConfig { scheme: QuadratureScheme::Jacobi, ..Default::default() };
        let one = |_: C64| c(1.0);
        let v = convolve_numeric(&one, &one, c(1.0), 2, &cfg).unwrap();
        assert!((v.value - c(PI)).norm() < 1e-12);
        let sq = |w: C64| w * w;
        let v = convolve_numeric(&sq, &sq, c(1.0), 1, &cfg).unwrap();
        assert!((v.value - c(convolve_monomial(2, 2, 1).1)).norm() < 1e-13);
        // w * w with k = 3 has s^{1/3} branch points
        let v = convolve_numeric(&|w| w, &|w| w, c(1.0), 3, &cfg).unwrap();
        let err = (v.value - c(convolve_monomial(1, 1, 3).1)).norm();
        assert!(err > 1e-6 && err < 1e-1, "{err}");
    }

    #[test]
    fn numeric_matches_series_on_complex_w() {
        let hp = poly(&[1.0, -0.5, 0.25, 0.3]);
        let jp = poly(&[0.2, 1.0, 0.0, -0.7]);
        for k in 1..=3 {
            let conv = convolve_series(&hp.pad_polynomial(8, 0), &jp.pad_polynomial(8, 0), k).unwrap();
            let w = C64::from_polar(0.8, 0.6);
            let hf = |x: C64| hp.evaluate(x, &[c(0.0)]).unwrap()[0];
            let jf = |x: C64| jp.evaluate(x, &[c(0.0)]).unwrap()[0];
            let v = convolve_numeric(&hf, &jf, w, k, &QuadratureConfig::default()).unwrap();
            let exact = conv.evaluate(w, &[c(0.0)]).unwrap()[0];
            assert!((v.value - exact).norm() < 1e-8);
            assert!(v.error_estimate < 1e-8);
        }
    }

    #[test]
    fn config_validation() {
        let cfg = QuadratureConfig { node_count: 4, ..Default::default() };
        assert!(convolve_numeric(&|_| c(1.0), &|_| c(1.0), c(1.0), 1, &cfg).is_err());
        let bad = |_: C64| c(f64::INFINITY);
        assert!(convolve_numeric(&bad, &bad, c(1.0), 1, &QuadratureConfig::default()).is_err());
    }

    fn random_series(vals: &[f64], n: usize, m_max: usize, j_max: usize) -> BorelSeries {
        let mut s = BorelSeries::zeros(n, 1, m_max, j_max);
        let mut it = vals.iter().cycle();
        for m in 0..=m_max {
            for j in crate::basis::Basis::get(n, j_max).indices().to_vec() {
                s.set(m, &j, 0, C64::new(*it.next().unwrap(), *it.next().unwrap())).unwrap();
            }
        }
        s
    }

    proptest! {
        #[test]
        fn series_convolution_laws(vals in proptest::collection::vec(-1.0f64..1.0, 40), k in 1usize..4) {
            let a = random_series(&vals, 2, 5, 2);
            let b = random_series(&vals[7..], 2, 5, 2);
            let cc = random_series(&vals[13..], 2, 5, 2);
            let ab = convolve_series(&a, &b, k).unwrap();
            let ba = convolve_series(&b, &a, k).unwrap();
            prop_assert!(ab.max_diff(&ba).unwrap() < 1e-13);
            // bilinear
            let lhs = convolve_series(&a, &b.add(&cc).unwrap(), k).unwrap();
            let rhs = ab.add(&convolve_series(&a, &cc, k).unwrap()).unwrap();
            prop_assert!(lhs.max_diff(&rhs).unwrap() < 1e-12);
            // associative
            let l = convolve_series(&ab, &cc, k).unwrap();
            let r = convolve_series(&a, &convolve_series(&b, &cc, k).unwrap(), k).unwrap();
            prop_assert!(l.max_diff(&r).unwrap() < 1e-12);
            // Laplace turns convolution into the product
            let prod = inverse_borel(&a, k).unwrap().mul(&inverse_borel(&b, k).unwrap()).unwrap();
            let lab = inverse_borel(&ab, k).unwrap();
            prop_assert!(lab.max_diff(&prod).unwrap() < 1e-11);
        }
    }

    #[test]
    fn powers() {
        let mut h = BorelSeries::zeros(2, 2, 6, 0);
        h.set(0, &[0, 0], 0, c(1.0)).unwrap();
        h.set(1, &[0, 0], 1, c(0.5)).unwrap();
        assert!(conv_power(&h, &[1, 0], 1).unwrap().max_diff(&h.component(0).unwrap()).unwrap() == 0.0);
        let sq = conv_power(&h, &[2, 0], 1).unwrap();
        assert!((sq.get(1, &[0, 0], 0) - c(1.0)).norm() < 1e-15);
        assert!(conv_power(&h, &[0, 0], 1).is_err());
        let h1 = h.component(0).unwrap();
        let h2 = h.component(1).unwrap();
        let l = convolve_series(&convolve_series(&h1, &h1, 2).unwrap(), &h2, 2).unwrap();
        let r = convolve_series(&h1, &convolve_series(&h1, &h2, 2).unwrap(), 2).unwrap();
        assert!(l.max_diff(&r).unwrap() < 1e-12);
        assert!(conv_power(&h, &[2, 1], 2).unwrap().max_diff(&l).unwrap() < 1e-12);
    }

    #[test]
    fn times_x_is_multiplication_by_x() {
        let b = random_series(&[0.3, -0.2, 0.9, 0.1, -0.6, 0.4, 0.7], 1, 6, 2);
        let unit = {
            let mut u = BorelSeries::zeros(1, 1, 0, 2);
            u.set(0, &[1], 0, c(0.5)).unwrap();
            u
        };
        let e = WithUnit::new(unit, b.clone()).unwrap();
        for k in 1..=3 {
            let lhs = inverse_borel(&times_x(&e, k).unwrap(), k).unwrap();
            let mut x_plane = inverse_borel(&b, k).unwrap();
            x_plane.set(0, &[1], 0, c(0.5)).unwrap();
            let expect = x_plane.pad_polynomial(x_plane.l_max() + 1, 2).shift_x(1).truncate(lhs.l_max(), 2);
            assert!(lhs.max_diff(&expect).unwrap() < 1e-13);
            let lhs = inverse_borel(&times_xk_over_k(&e, k).unwrap(), k).unwrap();
            let expect = x_plane.pad_polynomial(x_plane.l_max() + k, 2).shift_x(k).scale(c(1.0 / k as f64)).truncate(lhs.l_max(), 2);
            assert!(lhs.max_diff(&expect).unwrap() < 1e-13);
        }
    }

    #[test]
    fn h_star_matches_composition() {
        let n = 2;
        let mut f = TruncatedSeries::zeros(n, n, 7, 3);
        f.set(1, &[0, 0], 0, c(0.7)).unwrap();
        f.set(0, &[2, 0], 0, c(-0.4)).unwrap();
        f.set(2, &[1, 1], 1, C64::new(0.3, 0.2)).unwrap();
        f.set(0, &[0, 1], 1, c(1.1)).unwrap();
        f.set(3, &[0, 3], 0, c(0.5)).unwrap();
        let mut psi = BorelSeries::zeros(n, n, 6, 3);
        psi.set(0, &[0, 0], 0, c(0.2)).unwrap();
        psi.set(1, &[1, 0], 1, c(-0.6)).unwrap();
        psi.set(2, &[0, 1], 0, C64::new(0.1, -0.3)).unwrap();
        for k in 1..=3 {
            let hs = h_star(&f, &psi, k).unwrap();
            // x-plane: f(x, z + L(Psi)) - f(0, z), with L(Psi) = x * phi
            let lpsi = inverse_borel(&psi, k).unwrap();
            let mut phi = TruncatedSeries::zeros(n, n, lpsi.l_max() - 1, 3);
            for (l, j, i, v) in lpsi.nonzero() {
                phi.set(l - 1, &j, i, v).unwrap();
            }
            let comp = compose_shift(&f, &phi).unwrap();
            let f0 = f.truncate(0, 3).pad_polynomial(comp.l_max(), 3);
            let expect = comp.sub(&f0).unwrap();
            let got = inverse_borel(&hs, k).unwrap();
            let l_cmp = got.l_max().min(expect.l_max());
            let diff = got.truncate(l_cmp, 3).max_diff(&expect.truncate(l_cmp, 3)).unwrap();
            assert!(diff < 1e-12, "k = {k}: {diff}");
            assert!(l_cmp >= 6);
        }
        // Psi = 0 with f depending on x only gives the Borel transform of f
        let mut g = TruncatedSeries::zeros(n, n, 5, 2);
        g.set(2, &[0, 0], 0, c(3.0)).unwrap();
        let hs = h_star(&g, &BorelSeries::zeros(n, n, 4, 2), 2).unwrap();
        assert!((hs.get(1, &[0, 0], 0) - c(3.0 / gamma(1.0))).norm() < 1e-15);
    }
}
