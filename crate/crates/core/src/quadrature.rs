//! Gauss-Jacobi rules and adaptive Gauss-Kronrod integration.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::special::beta;

/// Nodes and weights on [-1, 1] for the weight (1-x)^a (1+x)^b,
/// from the eigen-decomposition of the Jacobi matrix.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return invalid("quadrature needs at least one node");
    }
    if !(a > -1.0 && b > -1.0) {
        return invalid(format!("Jacobi exponents ({a}, {b}) must exceed -1"));
    }
    let ab = a + b;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let jf = j as f64;
        let diag = if j == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * jf + ab) * (2.0 * jf + ab + 2.0))
        };
        m[(j, j)] = diag;
        if j + 1 < n {
            let i = jf + 1.0;
            let s = 2.0 * i + ab;
            // (i + a + b) / (s - 1) is 0/0 at i = 1 when a + b = -1; it equals 1 there
            let off = if j == 0 {
                (4.0 * (1.0 + a) * (1.0 + b) / (s * s * (s + 1.0))).sqrt()
            } else {
                (4.0 * i * (i + a) * (i + b) * (i + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            };
            m[(j, j + 1)] = off;
            m[(j + 1, j)] = off;
        }
    }
    let eig = SymmetricEigen::new(m);
    let mu0 = 2f64.powf(ab + 1.0) * beta(a + 1.0, b + 1.0);
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(pairs.into_iter().unzip())
}

pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    gauss_jacobi(n, 0.0, 0.0)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &dyn Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive G7/K15 integration of a complex integrand over [a, b] until the
/// summed error estimate is below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate(f: &dyn Fn(f64) -> C64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(C64, f64)> {
    const MAX_INTERVALS: usize = 4000;
    let mut parts = vec![(a, b, gk15(f, a, b))];
    loop {
        let total: C64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Numerical("non-finite integrand value".into()));
        }
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok((total, err));
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::NotConverged(format!("adaptive quadrature stalled at error {err:.3e}")));
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("non-empty");
        let (lo, hi, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(f, lo, mid)));
        parts.push((mid, hi, gk15(f, mid, hi)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10).unwrap();
        for p in 0..20 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let expect = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((got - expect).abs() < 1e-14, "p = {p}");
        }
    }

    #[test]
    fn jacobi_weights_match_moments() {
        // int (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
        for &(a, b) in &[(-0.5, -0.5), (-0.75, -0.75), (0.3, -0.2)] {
            let (x, w) = gauss_jacobi(24, a, b).unwrap();
            let total: f64 = w.iter().sum();
            assert!((total - 2f64.powf(a + b + 1.0) * beta(a + 1.0, b + 1.0)).abs() < 1e-12);
            // first moment against the closed form via x = 1 - 2t substitution
            let m1: f64 = x.iter().zip(&w).map(|(x, w)| w * x).sum();
            let expect = 2f64.powf(a + b + 1.0) * (beta(a + 1.0, b + 2.0) - beta(a + 2.0, b + 1.0));
            assert!((m1 - expect).abs() < 1e-12, "{a} {b}: {m1} vs {expect}");
        }
        // Chebyshev: nodes are cos((2i-1) pi / 2n), weights pi/n
        let (x, w) = gauss_jacobi(8, -0.5, -0.5).unwrap();
        for (i, (xi, wi)) in x.iter().rev().zip(&w).enumerate() {
            assert!((xi - ((2 * i + 1) as f64 * PI / 16.0).cos()).abs() < 1e-14);
            assert!((wi - PI / 8.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gauss_jacobi(0, 0.0, 0.0).is_err());
        assert!(gauss_jacobi(5, -1.0, 0.0).is_err());
    }

    #[test]
    fn adaptive_integration() {
        let (v, _) = integrate(&|t| C64::new((-t).exp(), 0.0), 0.0, 40.0, 1e-14, 1e-14).unwrap();
        assert!((v.re - (1.0 - (-40f64).exp())).abs() < 1e-13);
        let (v, _) = integrate(&|t| C64::new(0.0, t.sqrt()), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((v.im - 2.0 / 3.0).abs() < 1e-11);
        assert!(integrate(&|_| C64::new(f64::NAN, 0.0), 0.0, 1.0, 1e-10, 0.0).is_err());
    }
}
