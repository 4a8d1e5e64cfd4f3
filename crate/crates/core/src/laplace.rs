//! Order-k Laplace transform along rays and evaluation of k-sums.
//!
//! `L(H)(x) = int_0^{infinity e^{i theta'}} H(w) e^{-w^k/x^k} k dw`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::borel::borel_transform;
use crate::error::{invalid, Error, Result};
use crate::pade::robust_pade;
use crate::quadrature::integrate;
use crate::sector::{wrap_angle, SectorSpec};
use crate::series::TruncatedSeries;
use crate::special::gamma;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LaplaceOptions {
    /// Relative accuracy target.
    pub tol: f64,
    /// Integration direction; chosen from the sector when absent.
    pub theta_prime: Option<f64>,
    /// Exponential order `|H(w)| <= C e^{rate |w|^k}`; 0 for polynomials.
    pub growth_rate: f64,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        LaplaceOptions { tol: 1e-12, theta_prime: None, growth_rate: 0.0 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LaplaceValue {
    pub value: C64,
    pub error_estimate: f64,
    pub theta_prime: f64,
    /// Upper end of the integration interval in |w|.
    pub w_max: f64,
}

fn check_x(x: C64, sec: &SectorSpec) -> Result<()> {
    sec.validate()?;
    if !sec.in_omega_x(x) {
        return invalid(format!(
            "x = {x} lies outside omega_k (|x| < {}, |Arg x - {}| < {})",
            sec.nu,
            sec.theta,
            (sec.alpha + std::f64::consts::PI / sec.k as f64) / 2.0
        ));
    }
    Ok(())
}

/// Numerical `L_{theta,k}(H)(x)` for x in omega_k.
pub fn laplace_numeric(h: &dyn Fn(C64) -> C64, x: C64, sec: &SectorSpec, opts: &LaplaceOptions) -> Result<LaplaceValue> {
    check_x(x, sec)?;
    let k = sec.k;
    let kf = k as f64;
    let tp = match opts.theta_prime {
        Some(t) => {
            if wrap_angle(t - sec.theta).abs() >= sec.alpha / 2.0 {
                return invalid(format!("ray {t} outside the sector of opening {} around {}", sec.alpha, sec.theta));
            }
            t
        }
        None => sec.ray_for(x),
    };
    let dir = C64::from_polar(1.0, tp);
    // e^{-t^k e^{ik theta'}/x^k}: decay rate rho = Re(e^{ik theta'}/x^k)
    let q = C64::from_polar(1.0, kf * tp) / x.powu(k as u32);
    let rho = q.re - opts.growth_rate;
    if !(rho > 0.0) {
        return Err(Error::Numerical(format!(
            "no decay along theta' = {tp}: Re(e^(ik theta')/x^k) = {} does not exceed the growth rate {}",
            q.re, opts.growth_rate
        )));
    }
    let integrand = |t: f64| {
        let w = dir * t;
        h(w) * (-(q * t.powi(k as i32))).exp() * dir * kf
    };
    // start where the weight has dropped by e^{-40}, then extend until the
    // integrand near the end is negligible against the integral
    let mut w_max = (40.0 / rho).powf(1.0 / kf);
    let mut result = None;
    for _ in 0..40 {
        let (v, err) = integrate(&integrand, 0.0, w_max, 1e-300, opts.tol)?;
        let tail = [1.0, 1.25, 1.5, 2.0].iter().map(|s| integrand(s * w_max).norm()).fold(0.0, f64::max) * w_max;
        if !tail.is_finite() {
            return Err(Error::Numerical("integrand overflows along the ray".into()));
        }
        if tail <= opts.tol * v.norm() * 1e-2 || tail == 0.0 {
            result = Some((v, err + tail));
            break;
        }
        w_max *= 1.5;
    }
    let (value, error_estimate) =
        result.ok_or_else(|| Error::NotConverged("tail bound not achievable along the chosen ray".into()))?;
    Ok(LaplaceValue { value, error_estimate, theta_prime: tp, w_max })
}

/// Laplace transform of a w-polynomial (coefficients lowest degree first).
pub fn laplace_polynomial(coeffs: &[C64], x: C64, sec: &SectorSpec, opts: &LaplaceOptions) -> Result<LaplaceValue> {
    let h = |w: C64| coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c);
    laplace_numeric(&h, x, sec, opts)
}

/// Closed form `sum_n c_n Gamma((n+1)/k) x^{n+1}` of the Laplace transform
/// of a polynomial, for cross-checks.
pub fn laplace_polynomial_exact(coeffs: &[C64], x: C64, k: usize) -> C64 {
    coeffs.iter().enumerate().map(|(n, c)| c * gamma((n + 1) as f64 / k as f64) * x.powu(n as u32 + 1)).sum()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KsumOptions {
    pub laplace: LaplaceOptions,
    /// Replace each Borel-plane polynomial by its diagonal Padé approximant.
    pub pade: bool,
    pub pade_tol: f64,
}

impl Default for KsumOptions {
    fn default() -> Self {
        KsumOptions { laplace: LaplaceOptions::default(), pade: false, pade_tol: 1e-13 }
    }
}

/// k-sum of a series at (x, z): the x^0 part is added as is, the rest goes
/// through `B_k`, is evaluated at z as a w-polynomial and Laplace
/// transformed.
pub fn ksum_evaluate(h: &TruncatedSeries, z: &[C64], x: C64, sec: &SectorSpec, opts: &KsumOptions) -> Result<Vec<C64>> {
    check_x(x, sec)?;
    let x0 = h.truncate(0, h.j_max());
    let constant = x0.evaluate(C64::new(0.0, 0.0), z)?;
    let rest = h.sub(&x0.pad_polynomial(h.l_max(), h.j_max()))?;
    let hb = borel_transform(&rest, sec.k)?;
    let mut out = Vec::with_capacity(h.n_comps());
    for c in 0..h.n_comps() {
        // w-polynomial at the given z
        let mut coeffs = vec![C64::new(0.0, 0.0); hb.m_max() + 1];
        for (jid, j) in hb.t.basis.indices().iter().enumerate().take(hb.t.n_j()) {
            let zp = j.iter().zip(z).fold(C64::new(1.0, 0.0), |acc, (&e, zq)| acc * zq.powu(e));
            if zp == C64::new(0.0, 0.0) {
                continue;
            }
            for (m, cm) in coeffs.iter_mut().enumerate() {
                *cm += hb.t.get(m, jid, c) * zp;
            }
        }
        let v = if opts.pade && coeffs.len() >= 3 {
            let deg = (coeffs.len() - 1) / 2;
            let p = robust_pade(&coeffs, deg, deg, opts.pade_tol)?;
            laplace_numeric(&|w| p.eval(w), x, sec, &opts.laplace)?.value
        } else {
            laplace_polynomial(&coeffs, x, sec, &opts.laplace)?.value
        };
        out.push(constant[c] + v);
    }
    Ok(out)
}

/// `Gamma(1/k) nu / (sin(k alpha/4) - mu^k nu^k)^{1/k}`.
pub fn operator_norm_bound(sec: &SectorSpec) -> Result<f64> {
    sec.validate()?;
    let k = sec.k as f64;
    let d = (k * sec.alpha / 4.0).sin() - (sec.mu * sec.nu).powf(k);
    Ok(gamma(1.0 / k) * sec.nu / d.powf(1.0 / k))
}

/// `|(1/k) x^{k+1} d/dx L(H)(x) - L(w^k H)(x)|` for a w-polynomial H, with
/// the derivative from a five-point central stencil along Arg x.
pub fn commutation_check(coeffs: &[C64], x: C64, sec: &SectorSpec, opts: &LaplaceOptions) -> Result<f64> {
    check_x(x, sec)?;
    if coeffs.iter().all(|c| c.norm() == 0.0) {
        return Ok(0.0);
    }
    let k = sec.k;
    let step = 1e-3 * x.norm();
    if step < 1e-280 {
        return Err(Error::Numerical("finite-difference step underflows".into()));
    }
    let dir = x / x.norm();
    let mut vals = [C64::new(0.0, 0.0); 4];
    for (v, s) in vals.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
        let xs = x + dir * (s * step);
        *v = laplace_polynomial(coeffs, xs, sec, opts)?.value;
    }
    let deriv = (vals[0] - vals[1] * 8.0 + vals[2] * 8.0 - vals[3]) / (dir * (12.0 * step));
    let mut shifted = vec![C64::new(0.0, 0.0); k];
    shifted.extend_from_slice(coeffs);
    let rhs = laplace_polynomial(&shifted, x, sec, opts)?.value;
    Ok((x.powu(k as u32 + 1) * deriv / k as f64 - rhs).norm())
}
