//! Order-by-order solution of the conjugation equation in the x-plane:
//!
//! ```text
//! g - A phi + (d_z phi) A z + (1/k) x^{k+1} d_x phi
//!     = f(x, z + x phi) - x (d_z phi) g - (1/k) x^k phi
//! ```
//!
//! Every nonlinear term carries an extra factor of x, so the coefficients
//! at order x^l solve the homological equation
//! `g_l - A phi_l + (d_z phi_l) A z = known_l`.

use num_complex::Complex64 as C64;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::series::{compose_shift, TruncatedSeries};
use crate::spectrum::{ResonanceSet, Spectrum};

/// The z-dependent parts g(0, z), phi(0, z).
#[derive(Clone, Debug)]
pub struct OrderZero {
    pub g0: TruncatedSeries,
    pub phi0: TruncatedSeries,
}

/// A problem after the order-zero solve: the unknowns `g - g0`, `phi - phi0`
/// vanish at x = 0.
#[derive(Clone, Debug)]
pub struct ShiftedProblem {
    pub f: TruncatedSeries,
    pub order_zero: OrderZero,
}

#[derive(Clone, Debug)]
pub struct NormalFormResult {
    /// O(x) part of g; supported on resonant slots.
    pub g_hat: TruncatedSeries,
    /// O(x) part of phi; zero on resonant slots.
    pub phi_hat: TruncatedSeries,
    pub order_zero: OrderZero,
    pub residual_norm: f64,
}

impl NormalFormResult {
    pub fn g_full(&self) -> Result<TruncatedSeries> {
        self.g_hat.add(&self.order_zero.g0.pad_polynomial(self.g_hat.l_max(), self.g_hat.j_max()))
    }

    pub fn phi_full(&self) -> Result<TruncatedSeries> {
        self.phi_hat.add(&self.order_zero.phi0.pad_polynomial(self.phi_hat.l_max(), self.phi_hat.j_max()))
    }

    /// x * phi(x, z), an O(x) series.
    pub fn x_phi(&self) -> Result<TruncatedSeries> {
        let p = self.phi_full()?;
        Ok(p.pad_polynomial(p.l_max() + 1, p.j_max()).shift_x(1))
    }
}

fn check_problem(f: &TruncatedSeries, spec: &Spectrum, rset: &ResonanceSet) -> Result<()> {
    spec.validate()?;
    let n = spec.n();
    if f.n_vars() != n || f.n_comps() != n {
        return Err(Error::Dimension(format!(
            "f must have {n} components over {n} variables, got {} over {}",
            f.n_comps(),
            f.n_vars()
        )));
    }
    if rset.n != n {
        return Err(Error::Dimension(format!("resonance set for n = {}, spectrum n = {n}", rset.n)));
    }
    if rset.j_max < f.j_max() {
        return Err(Error::Truncation(format!(
            "resonance set known to |j| <= {}, problem needs {}",
            rset.j_max,
            f.j_max()
        )));
    }
    Ok(())
}

/// Vector series `A z`.
pub fn linear_field(spec: &Spectrum, l_max: usize, j_max: usize) -> Result<TruncatedSeries> {
    let n = spec.n();
    let mut az = TruncatedSeries::zeros(n, n, l_max, j_max);
    for row in 0..n {
        for col in 0..n {
            let a = spec.a_entry(row, col);
            if a != C64::new(0.0, 0.0) {
                let mut e = vec![0; n];
                e[col] = 1;
                az.set(0, &e, row, a)?;
            }
        }
    }
    Ok(az)
}

/// `A v` for a vector series v.
pub fn apply_matrix(spec: &Spectrum, v: &TruncatedSeries) -> Result<TruncatedSeries> {
    let n = spec.n();
    let comps: Vec<TruncatedSeries> = (0..n).map(|i| v.component(i)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(n);
    for row in 0..n {
        let mut acc = comps[row].scale(spec.a_entry(row, row));
        if row + 1 < n && spec.xi[row] == 1 {
            acc = acc.add(&comps[row + 1].scale(C64::new(spec.r, 0.0)))?;
        }
        rows.push(acc);
    }
    TruncatedSeries::from_components(&rows)
}

/// `(d_z phi) v`, i.e. component i is `sum_q d_{z_q} phi_i * v_q`.
pub fn jacobian_apply(phi: &TruncatedSeries, v: &TruncatedSeries) -> Result<TruncatedSeries> {
    let n = phi.n_vars();
    let mut acc: Option<TruncatedSeries> = None;
    for q in 0..n {
        let term = phi.partial_z(q)?.mul(&v.component(q)?)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    acc.ok_or_else(|| Error::Invalid("no variables".into()))
}

/// Solve `g - A phi + (d_z phi) A z = rhs` for z-polynomials (x-degree 0),
/// with g on resonant slots and phi on the complement. Slots are visited
/// from i = n down to 1 and, within each degree, in increasing colex order
/// so every Jordan coupling refers to an already solved slot.
pub fn solve_homological(
    rhs: &TruncatedSeries,
    spec: &Spectrum,
    rset: &ResonanceSet,
) -> Result<(TruncatedSeries, TruncatedSeries)> {
    let n = spec.n();
    let j_max = rhs.j_max();
    let basis = Basis::get(n, j_max);
    let mut g = TruncatedSeries::zeros(n, n, 0, j_max);
    let mut phi = TruncatedSeries::zeros(n, n, 0, j_max);
    let r = C64::new(spec.r, 0.0);
    for d in 0..=j_max {
        let ids = basis.degree_block_colex(d);
        for i in (0..n).rev() {
            for &jid in &ids {
                let j = basis.index(jid);
                let mut h = rhs.t.get(0, jid, i);
                if i + 1 < n && spec.xi[i] == 1 {
                    h += r * phi.t.get(0, jid, i + 1);
                }
                for s in 0..n.saturating_sub(1) {
                    if spec.xi[s] == 1 && j[s + 1] >= 1 {
                        let up = basis.raise(s, basis.lower(s + 1, jid).expect("j_{s+1} >= 1")).expect("same degree");
                        h -= r * (j[s] as f64 + 1.0) * phi.t.get(0, up, i);
                    }
                }
                if rset.member(i, j) {
                    g.t.set(0, jid, i, h);
                } else {
                    let c = spec.divisor(i, j);
                    if c.norm() == 0.0 {
                        return Err(Error::NonResonance(format!(
                            "zero divisor at non-resonant slot ({}, {:?})",
                            i + 1,
                            j
                        )));
                    }
                    phi.t.set(0, jid, i, -h / c);
                }
            }
        }
    }
    Ok((g, phi))
}

/// Solve the x^0 part `g(0,z) - A phi(0,z) + d_z phi(0,z) A z = f(0,z)`.
pub fn solve_order_zero(f: &TruncatedSeries, spec: &Spectrum, rset: &ResonanceSet) -> Result<ShiftedProblem> {
    check_problem(f, spec, rset)?;
    let (g0, phi0) = solve_homological(&f.x_slice(0), spec, rset)?;
    Ok(ShiftedProblem { f: f.clone(), order_zero: OrderZero { g0, phi0 } })
}

/// Right side of the conjugation equation minus the x-derivative term,
/// `f(x, z + x phi) - x (d_z phi) g - (1/k) x^k phi - (1/k) x^{k+1} d_x phi`.
fn known_terms(f: &TruncatedSeries, phi: &TruncatedSeries, g: &TruncatedSeries, k: usize) -> Result<TruncatedSeries> {
    let comp = compose_shift(f, phi)?;
    let l_max = comp.l_max();
    let jg = jacobian_apply(phi, g)?;
    let xjg = jg.pad_polynomial(l_max, jg.j_max()).shift_x(1);
    let inv_k = C64::new(1.0 / k as f64, 0.0);
    let xk_phi = phi.shift_x(k).scale(inv_k);
    let dphi = phi.x_weighted_derivative(k)?;
    comp.sub(&xjg)?.sub(&xk_phi)?.sub(&dphi)
}

/// Solve the conjugation equation through x-order `l_max` and z-degree
/// `j_max`, in the coordinates where `A = Lambda + r Xi`.
pub fn solve_conjugacy(
    f: &TruncatedSeries,
    spec: &Spectrum,
    rset: &ResonanceSet,
    l_max: usize,
    j_max: usize,
) -> Result<NormalFormResult> {
    let f = f.truncate(l_max, j_max).pad_polynomial(l_max, j_max);
    check_problem(&f, spec, rset)?;
    let n = spec.n();
    let mut phi = TruncatedSeries::zeros(n, n, l_max, j_max);
    let mut g = TruncatedSeries::zeros(n, n, l_max, j_max);
    for l in 0..=l_max {
        let rhs = if l == 0 {
            f.x_slice(0)
        } else {
            let fl = f.truncate(l, j_max);
            known_terms(&fl, &phi.truncate(l, j_max), &g.truncate(l, j_max), spec.k)?.x_slice(l)
        };
        let (gl, pl) = solve_homological(&rhs, spec, rset)?;
        for jid in 0..gl.t.n_j() {
            for i in 0..n {
                g.t.set(l, jid, i, gl.t.get(0, jid, i));
                phi.t.set(l, jid, i, pl.t.get(0, jid, i));
            }
        }
    }
    let g0 = g.truncate(0, j_max);
    let phi0 = phi.truncate(0, j_max);
    let mut g_hat = g.clone();
    let mut phi_hat = phi.clone();
    for jid in 0..g.t.n_j() {
        for i in 0..n {
            g_hat.t.set(0, jid, i, C64::new(0.0, 0.0));
            phi_hat.t.set(0, jid, i, C64::new(0.0, 0.0));
        }
    }
    let mut result = NormalFormResult { g_hat, phi_hat, order_zero: OrderZero { g0, phi0 }, residual_norm: 0.0 };
    result.residual_norm = conjugacy_residual(&f, spec, &result)?;
    Ok(result)
}

/// Substitute (g, phi) into the conjugation equation and return the
/// defect series over the box where it is fully determined.
pub fn conjugacy_defect(f: &TruncatedSeries, spec: &Spectrum, g: &TruncatedSeries, phi: &TruncatedSeries) -> Result<TruncatedSeries> {
    let az = linear_field(spec, phi.l_max(), phi.j_max())?;
    let lhs = g.sub(&apply_matrix(spec, phi)?)?.add(&jacobian_apply(phi, &az)?)?;
    let f = f.truncate(phi.l_max(), phi.j_max());
    lhs.sub(&known_terms(&f, phi, g, spec.k)?)
}

/// Max |coefficient| of the conjugation defect.
pub fn conjugacy_residual(f: &TruncatedSeries, spec: &Spectrum, result: &NormalFormResult) -> Result<f64> {
    let g = result.g_full()?;
    let phi = result.phi_full()?;
    Ok(conjugacy_defect(f, spec, &g, &phi)?.max_abs())
}
