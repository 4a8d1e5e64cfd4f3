//! The conjugation equation in the Borel plane, solved by Picard iteration
//! `(G, Phi) <- LHS^{-1}(RHS(G, Phi))` starting from zero.
//!
//! Unknowns are the Borel images of the O(x) parts of g and phi. The
//! x^0 parts come from the order-zero solve and enter as unit multiples.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::borel::BorelSeries;
use crate::conjugacy::{OrderZero, ShiftedProblem};
use crate::convolution::{h_star, times_x, times_xk_over_k, WithUnit};
use crate::error::{Error, Result};
use crate::jordan::phi_backward_induction;
use crate::spectrum::{ResonanceSet, Spectrum};

fn norm_shape(s: BorelSeries, m_max: usize, j_max: usize) -> BorelSeries {
    s.truncate(m_max, j_max).pad_polynomial(m_max, j_max)
}

/// `G - A Phi + (d_z Phi) A z + w^k Phi`.
pub fn lhs_apply(g: &BorelSeries, phi: &BorelSeries, spec: &Spectrum) -> Result<BorelSeries> {
    let n = spec.n();
    if g.n_comps() != n || phi.n_comps() != n || g.n_vars() != n || phi.n_vars() != n {
        return Err(Error::Dimension(format!("G and Phi must be {n}-vectors in {n} variables")));
    }
    let (m_max, j_max) = (phi.m_max(), phi.j_max());
    if g.m_max() != m_max || g.j_max() != j_max {
        return Err(Error::Dimension("G and Phi truncations differ".into()));
    }
    // A Phi, row by row
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = BorelSeries::zeros(n, 1, m_max, j_max);
        for col in 0..n {
            let a = spec.a_entry(i, col);
            if a != C64::new(0.0, 0.0) {
                acc = acc.add(&phi.component(col)?.scale(a))?;
            }
        }
        rows.push(acc);
    }
    let a_phi = BorelSeries::from_components(&rows)?;
    // (d_z Phi) A z = sum_q d_q Phi * (A z)_q
    let mut jac = BorelSeries::zeros(n, n, m_max, j_max);
    if j_max >= 1 {
        for q in 0..n {
            let mut azq = BorelSeries::zeros(n, 1, 0, j_max);
            for col in 0..n {
                let a = spec.a_entry(q, col);
                if a != C64::new(0.0, 0.0) {
                    let mut e = vec![0; n];
                    e[col] = 1;
                    azq.set(0, &e, 0, a)?;
                }
            }
            let azq = azq.pad_polynomial(m_max, j_max);
            let term = phi.partial_z(q)?.mul(&azq)?;
            jac = jac.add(&norm_shape(term, m_max, j_max))?;
        }
    }
    g.sub(&a_phi)?.add(&jac)?.add(&phi.shift_w(spec.k))
}

/// `(G, Phi)` with `LHS(G, Phi) = H`, G supported on `rset` and Phi on the
/// complement.
pub fn lhs_inverse(h: &BorelSeries, spec: &Spectrum, rset: &ResonanceSet) -> Result<(BorelSeries, BorelSeries)> {
    phi_backward_induction(h, spec, rset)
}

fn unit_of(s: &crate::series::TruncatedSeries, j_max: usize) -> BorelSeries {
    BorelSeries::from_table(s.truncate(0, j_max).pad_polynomial(0, j_max).t)
}

/// Borel image of the O(x) part of
/// `f(x, z + x phi) - x (d_z phi) g - (1/k) x^k phi`
/// where `phi = phi0 + L(Phi)` and `g = g0 + L(G)`.
pub fn rhs_apply(g: &BorelSeries, phi: &BorelSeries, problem: &ShiftedProblem, k: usize) -> Result<BorelSeries> {
    let n = phi.n_vars();
    let (m_max, j_max) = (phi.m_max(), phi.j_max());
    let OrderZero { g0, phi0 } = &problem.order_zero;
    let phi_u = WithUnit::new(unit_of(phi0, j_max), phi.clone())?;
    let g_u = WithUnit::new(unit_of(g0, j_max), g.clone())?;
    let psi = times_x(&phi_u, k)?;
    let f = problem.f.truncate(m_max + 1, j_max);
    let hs = norm_shape(h_star(&f, &psi, k)?, m_max, j_max);
    let mut jac: Option<WithUnit> = None;
    if j_max >= 1 {
        for q in 0..n {
            let t = phi_u.partial_z(q)?.convolve(&g_u.component(q)?, k)?;
            let t = WithUnit {
                unit: norm_shape(t.unit, 0, j_max),
                borel: norm_shape(t.borel, m_max, j_max),
            };
            jac = Some(match jac {
                None => t,
                Some(acc) => acc.add(&t)?,
            });
        }
    }
    let mut out = hs.sub(&times_xk_over_k(&phi_u, k)?)?;
    if let Some(jac) = jac {
        out = out.sub(&norm_shape(times_x(&jac, k)?, m_max, j_max))?;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Max coefficient change from the previous iterate.
    pub change: f64,
    /// Lowest w-degree where the iterates differ, if any.
    pub lowest_changed_order: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct BorelSolution {
    pub g: BorelSeries,
    pub phi: BorelSeries,
    pub order_zero: OrderZero,
    pub trace: Vec<IterationRecord>,
}

fn lowest_difference(a: &BorelSeries, b: &BorelSeries) -> Option<usize> {
    let d = a.sub(b).ok()?;
    d.nonzero().into_iter().map(|(m, _, _, _)| m).min()
}

/// Picard iteration through w-degree `m_max` and z-degree `j_max`.
/// Every sweep fixes at least one more w-order, so at truncation the
/// iterates stop changing after at most `m_max + 2` sweeps.
pub fn fixed_point_solve(
    problem: &ShiftedProblem,
    spec: &Spectrum,
    rset: &ResonanceSet,
    m_max: usize,
    j_max: usize,
    max_iter: usize,
    tol: f64,
) -> Result<BorelSolution> {
    let n = spec.n();
    let mut g = BorelSeries::zeros(n, n, m_max, j_max);
    let mut phi = BorelSeries::zeros(n, n, m_max, j_max);
    let mut trace = Vec::new();
    for it in 1..=max_iter {
        let rhs = rhs_apply(&g, &phi, problem, spec.k)?;
        let (g_new, phi_new) = lhs_inverse(&rhs, spec, rset)?;
        let change = g_new.max_diff(&g)?.max(phi_new.max_diff(&phi)?);
        let lowest = match (lowest_difference(&g_new, &g), lowest_difference(&phi_new, &phi)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        trace.push(IterationRecord { iteration: it, change, lowest_changed_order: lowest });
        g = g_new;
        phi = phi_new;
        if !change.is_finite() {
            return Err(Error::Numerical(format!("iterate {it} is not finite")));
        }
        if change <= tol {
            return Ok(BorelSolution { g, phi, order_zero: problem.order_zero.clone(), trace });
        }
    }
    Err(Error::NotConverged(format!(
        "Picard iteration still changing by {:.3e} after {max_iter} sweeps",
        trace.last().map_or(f64::NAN, |r| r.change)
    )))
}
