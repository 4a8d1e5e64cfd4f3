//! Robust Padé approximation from Taylor coefficients (SVD-based, with
//! degree reduction on numerical rank deficiency, after Gonnet, Güttel
//! and Trefethen).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};

#[derive(Clone, Debug)]
pub struct Pade {
    /// Numerator coefficients, lowest degree first.
    pub num: Vec<C64>,
    /// Denominator coefficients with `den[0] = 1`.
    pub den: Vec<C64>,
}

impl Pade {
    pub fn eval(&self, w: C64) -> C64 {
        horner(&self.num, w) / horner(&self.den, w)
    }
}

fn horner(c: &[C64], w: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, v| acc * w + v)
}

fn null_vector(c: &DMatrix<C64>) -> DMatrix<C64> {
    // pad to square so the SVD returns a full set of right singular vectors
    let cols = c.ncols();
    let mut sq = DMatrix::<C64>::zeros(cols, cols);
    sq.view_mut((0, 0), (c.nrows(), cols)).copy_from(c);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    DMatrix::from_iterator(cols, 1, vt.row(idx).iter().map(|v| v.conj()))
}

/// Type (m, n) Padé approximant of the series with coefficients `c`
/// (at least m + n + 1 of them). Singular values below `tol * ||c||`
/// reduce the degrees, which removes spurious pole-zero pairs.
pub fn robust_pade(c: &[C64], m: usize, n: usize, tol: f64) -> Result<Pade> {
    if c.len() < m + n + 1 {
        return invalid(format!("Padé type ({m}, {n}) needs {} coefficients, have {}", m + n + 1, c.len()));
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let c = &c[..m + n + 1];
    let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(Pade { num: vec![zero], den: vec![one] });
    }
    let ts = tol * norm;
    let (mut m, mut n) = (m, n);
    // Top-left (m+n+1) x (n+1) Toeplitz block Z[i][j] = c_{i-j}
    let toeplitz = |rows: usize, cols: usize| {
        DMatrix::<C64>::from_fn(rows, cols, |i, j| if i >= j { c[i - j] } else { zero })
    };
    let b = loop {
        if n == 0 {
            break DMatrix::<C64>::from_element(1, 1, one);
        }
        let z = toeplitz(m + n + 1, n + 1);
        let cm = z.rows(m + 1, n).into_owned();
        let sv = cm.clone().svd(false, false).singular_values;
        let rho = sv.iter().filter(|&&s| s > ts).count();
        if rho == n {
            break null_vector(&cm);
        }
        let drop = n - rho;
        n = rho;
        m = m.saturating_sub(drop);
    };
    let z = toeplitz(m + n + 1, n + 1);
    let a = z.rows(0, m + 1) * &b;
    let mut num: Vec<C64> = a.iter().copied().collect();
    let mut den: Vec<C64> = b.iter().copied().collect();
    // cancel common powers of w
    while den.len() > 1 && den[0].norm() <= tol && num[0].norm() <= ts.max(tol) {
        den.remove(0);
        num.remove(0);
        num.push(zero);
    }
    let lead = den[0];
    if lead.norm() == 0.0 {
        return invalid("Padé denominator vanishes at the expansion point");
    }
    num.iter_mut().for_each(|v| *v /= lead);
    den.iter_mut().for_each(|v| *v /= lead);
    while num.len() > 1 && num.last().unwrap().norm() <= ts {
        num.pop();
    }
    while den.len() > 1 && den.last().unwrap().norm() <= tol {
        den.pop();
    }
    Ok(Pade { num, den })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn geometric_series_collapses_to_one_pole() {
        let coeffs: Vec<C64> = (0..20).map(|m| c(if m % 2 == 0 { 1.0 } else { -1.0 })).collect();
        let p = robust_pade(&coeffs, 9, 9, 1e-13).unwrap();
        assert_eq!(p.den.len(), 2);
        assert!((p.den[1] - c(1.0)).norm() < 1e-12);
        assert_eq!(p.num.len(), 1);
        let w = c(7.0);
        assert!((p.eval(w) - c(1.0 / 8.0)).norm() < 1e-12);
    }

    #[test]
    fn exponential_is_approximated() {
        let mut coeffs = vec![c(1.0)];
        for m in 1..12 {
            let prev = coeffs[m - 1];
            coeffs.push(prev / m as f64);
        }
        let p = robust_pade(&coeffs, 5, 5, 1e-14).unwrap();
        for &x in &[-1.0, 0.5, 2.0] {
            assert!((p.eval(c(x)).re - f64::exp(x)).abs() < 1e-6 * f64::exp(x));
        }
    }

    #[test]
    fn polynomial_and_zero() {
        let coeffs = vec![c(1.0), c(2.0), c(0.0), c(0.0), c(0.0)];
        let p = robust_pade(&coeffs, 2, 2, 1e-13).unwrap();
        assert!((p.eval(c(3.0)) - c(7.0)).norm() < 1e-12);
        let z = robust_pade(&[c(0.0); 5], 2, 2, 1e-13).unwrap();
        assert_eq!(z.eval(c(1.0)), c(0.0));
        assert!(robust_pade(&coeffs, 3, 2, 1e-13).is_err());
    }
}
