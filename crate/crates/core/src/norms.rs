//! Weighted sup-norms `||H||_{mu,k} = sup_Omega |H(w)| (1 + mu^{2k}|w|^{2k}) e^{-mu^k |w|^k}`,
//! their z-series extension, and numerical checks of the convolution and
//! Borel-transform bounds.
//!
//! Suprema are sampled, so every value here is a lower bound of the true
//! norm. A doubled grid is used to flag estimates that are still moving.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::degree;
use crate::borel::{borel_transform, BorelSeries};
use crate::convolution::convolve_series;
use crate::error::{invalid, Error, Result};
use crate::sector::SectorSpec;
use crate::series::TruncatedSeries;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormEstimate {
    #[serde(rename = "norm")]
    pub value: f64,
    pub mu: f64,
    pub k: usize,
    #[serde(rename = "samples")]
    pub sample_count: usize,
    /// Doubling the grid changed the value by less than 0.1%.
    pub converged: bool,
    pub domain: SectorSpec,
}

pub const DEFAULT_SAMPLES: usize = 512;
const RAYS: usize = 9;
const RINGS: usize = 4;
const RING_POINTS: usize = 64;

pub fn weight(t: f64, mu: f64, k: usize) -> f64 {
    let s = (mu * t).powi(k as i32);
    (1.0 + s * s) * (-s).exp()
}

fn sup_on_grid(h: &dyn Fn(C64) -> C64, sec: &SectorSpec, samples: usize) -> Result<f64> {
    let (mu, k) = (sec.mu, sec.k);
    let visit = |w: C64, best: &mut f64| -> Result<()> {
        let v = h(w);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Numerical(format!("non-finite value at w = {w}")));
        }
        *best = best.max(v.norm() * weight(w.norm(), mu, k));
        Ok(())
    };
    let mut best: f64 = 0.0;
    visit(C64::new(0.0, 0.0), &mut best)?;
    // disk rings
    for r in 1..=RINGS {
        let rad = sec.nu * r as f64 / RINGS as f64;
        for a in 0..RING_POINTS {
            visit(C64::from_polar(rad, 2.0 * PI * a as f64 / RING_POINTS as f64), &mut best)?;
        }
    }
    // geometric radial grids along rays of the closed sector
    let t0 = 1e-4 / mu;
    for r in 0..RAYS {
        let ang = sec.theta + sec.alpha / 2.0 * (2.0 * r as f64 / (RAYS - 1) as f64 - 1.0);
        let dir = C64::from_polar(1.0, ang);
        let mut t_end = (40.0f64).powf(1.0 / k as f64) / mu;
        for _ in 0..60 {
            let tail = h(dir * t_end).norm() * weight(t_end, mu, k);
            if tail <= 1e-16 * best.max(f64::MIN_POSITIVE) || tail == 0.0 {
                break;
            }
            t_end *= 1.5;
        }
        let g = (t_end / t0).powf(1.0 / (samples - 1) as f64);
        let mut t = t0;
        for _ in 0..samples {
            visit(dir * t, &mut best)?;
            t *= g;
        }
    }
    Ok(best)
}

/// Sampled `||H||_{mu,k}` on Omega(nu, theta, alpha).
pub fn norm_mu_k(h: &dyn Fn(C64) -> C64, sec: &SectorSpec, samples: usize) -> Result<NormEstimate> {
    if !(sec.mu > 0.0) {
        return invalid("mu must be positive");
    }
    if samples < 8 {
        return invalid(format!("{samples} samples per ray is too few"));
    }
    let coarse = sup_on_grid(h, sec, samples)?;
    let fine = sup_on_grid(h, sec, 2 * samples)?;
    let value = coarse.max(fine);
    Ok(NormEstimate {
        value,
        mu: sec.mu,
        k: sec.k,
        sample_count: 2 * samples,
        converged: (fine - coarse).abs() <= 1e-3 * value,
        domain: *sec,
    })
}

/// Norm of a w-polynomial (coefficients lowest degree first).
pub fn norm_poly(coeffs: &[C64], sec: &SectorSpec, samples: usize) -> Result<NormEstimate> {
    let h = |w: C64| coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c);
    norm_mu_k(&h, sec, samples)
}

/// `sum_j max_i ||H_{i,j}||_{mu,k} mu^{-|j|}`.
pub fn norm_series_z(hb: &BorelSeries, sec: &SectorSpec, samples: usize) -> Result<NormEstimate> {
    let mut total = 0.0;
    let mut converged = true;
    let mut sample_count = 0;
    for j in hb.t.basis.indices().iter().take(hb.t.n_j()) {
        let mut comp_max: f64 = 0.0;
        for i in 0..hb.n_comps() {
            let coeffs = hb.w_poly(j, i);
            if coeffs.iter().all(|c| c.norm() == 0.0) {
                continue;
            }
            let est = norm_poly(&coeffs, sec, samples)?;
            converged &= est.converged;
            sample_count = est.sample_count;
            comp_max = comp_max.max(est.value);
        }
        total += comp_max * sec.mu.powi(-(degree(j) as i32));
    }
    Ok(NormEstimate { value: total, mu: sec.mu, k: sec.k, sample_count, converged, domain: *sec })
}

/// `2^{(4k-1)/k} pi / (2 cos(pi (k-1)/(2k)))`.
pub fn q_k(k: usize) -> f64 {
    let kf = k as f64;
    2f64.powf((4.0 * kf - 1.0) / kf) * PI / (2.0 * (PI * (kf - 1.0) / (2.0 * kf)).cos())
}

/// `k * 384 e^{-2 - sqrt(15)/2} (4 + sqrt(15))^2`.
pub fn c_k(k: usize) -> f64 {
    let s15 = 15f64.sqrt();
    k as f64 * 384.0 * (-2.0 - s15 / 2.0).exp() * (4.0 + s15).powi(2)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundMargin {
    pub bound: f64,
    pub value: f64,
    pub margin: f64,
}

/// `(q_k/mu) ||H|| ||J|| - ||H *_k J||` for scalar w-polynomials.
pub fn verify_conv_bound(h: &[C64], j: &[C64], sec: &SectorSpec, samples: usize) -> Result<BoundMargin> {
    let to_series = |c: &[C64]| -> Result<BorelSeries> {
        let mut s = BorelSeries::zeros(1, 1, c.len().max(1) - 1, 0);
        for (m, v) in c.iter().enumerate() {
            s.set(m, &[0], 0, *v)?;
        }
        Ok(s)
    };
    let m = h.len() + j.len();
    let hs = to_series(h)?.pad_polynomial(m, 0);
    let js = to_series(j)?.pad_polynomial(m, 0);
    let conv = convolve_series(&hs, &js, sec.k)?;
    let nh = norm_poly(h, sec, samples)?.value;
    let nj = norm_poly(j, sec, samples)?.value;
    let nc = norm_poly(&conv.w_poly(&[0], 0), sec, samples)?.value;
    let bound = q_k(sec.k) / sec.mu * nh * nj;
    Ok(BoundMargin { bound, value: nc, margin: bound - nc })
}

/// `2^n K C_k - ||B_k(h)||_{mu,k}` for h with `|h_{l,j}| <= K T^{l-1+|j|}`.
pub fn verify_borel_bound(h: &TruncatedSeries, kk: f64, t: f64, sec: &SectorSpec, samples: usize) -> Result<BoundMargin> {
    let k = sec.k;
    if !(sec.mu > 2f64.powf(1.0 / k as f64) * t) {
        return invalid(format!("mu = {} must exceed 2^(1/k) T = {}", sec.mu, 2f64.powf(1.0 / k as f64) * t));
    }
    for (l, j, i, v) in h.nonzero() {
        let cap = kk * t.powi(l as i32 - 1 + degree(&j) as i32);
        if l == 0 || v.norm() > cap * (1.0 + 1e-12) {
            return invalid(format!(
                "coefficient (l={l}, j={j:?}, i={}) = {} violates |h| <= K T^(l-1+|j|) = {cap}",
                i + 1,
                v.norm()
            ));
        }
    }
    let hb = borel_transform(h, k)?;
    let value = norm_series_z(&hb, sec, samples)?.value;
    let bound = 2f64.powi(h.n_vars() as i32) * kk * c_k(k);
    Ok(BoundMargin { bound, value, margin: bound - value })
}
