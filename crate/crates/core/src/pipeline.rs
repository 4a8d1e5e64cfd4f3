//! End-to-end runs on problem files: solve, summarise, verify.
//!
//! Result files carry the problem they were computed from, so they can be
//! re-checked without the original input.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::borel::{borel_transform, gevrey_fit, GevreyFit};
use crate::borel_solver::{fixed_point_solve, rhs_apply, IterationRecord};
use crate::conjugacy::{conjugacy_defect, solve_conjugacy, solve_order_zero, NormalFormResult};
use crate::error::{invalid, Error, Result};
use crate::hopf::{hopf_normal_form, invariant_manifold, polar_form, polar_from_vector_field, property_p_defect, ManifoldSamples, Summation};
use crate::jordan::{dense_oracle, phi_backward_induction};
use crate::laplace::KsumOptions;
use crate::norms::{verify_borel_bound, BoundMargin, DEFAULT_SAMPLES};
use crate::problem::{ComplexRecord, Problem, ProblemSpec};
use crate::sector::SectorSpec;
use crate::series::{CoeffRecord, TruncatedSeries};
use crate::special::gamma;

/// Default relative tolerance for the conjugation residual.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Max |coefficient| of the conjugation defect.
    pub residual: f64,
    /// Max over x-orders l of the order-l defect divided by
    /// `max(1, |coefficients of f, g, phi at orders <= l|)`.
    pub relative_residual: f64,
    #[serde(rename = "K_fit")]
    pub k_fit: Option<f64>,
    #[serde(rename = "T_fit")]
    pub t_fit: Option<f64>,
    /// Fit of `x phi`; absent when the series is too short or zero.
    pub gevrey: Option<GevreyFit>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalFormFile {
    pub problem: ProblemSpec,
    /// Coupling used by the solver; `g` and `phi` live in these coordinates.
    pub r: f64,
    pub g: Vec<CoeffRecord>,
    pub phi: Vec<CoeffRecord>,
    pub diagnostics: Diagnostics,
}

fn scale_of(f: &TruncatedSeries, g: &TruncatedSeries, phi: &TruncatedSeries) -> f64 {
    1f64.max(f.max_abs()).max(g.max_abs()).max(phi.max_abs())
}

/// Order-by-order relative defect. A single global scale would let the
/// factorially large top orders of a divergent series hide errors in the
/// low orders.
pub fn graded_residual(defect: &TruncatedSeries, parts: &[&TruncatedSeries]) -> f64 {
    let mut scale: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for l in 0..=defect.l_max() {
        for s in parts {
            if l <= s.l_max() {
                scale = scale.max(s.x_slice(l).max_abs());
            }
        }
        worst = worst.max(defect.x_slice(l).max_abs() / scale);
    }
    worst
}

fn x_times(phi: &TruncatedSeries) -> TruncatedSeries {
    phi.pad_polynomial(phi.l_max() + 1, phi.j_max()).shift_x(1)
}

pub fn solve_problem(p: &Problem) -> Result<NormalFormResult> {
    solve_conjugacy(&p.f, &p.spectrum, &p.rset, p.l_max, p.j_max)
}

/// Solve a problem file and package the result with diagnostics.
pub fn normal_form(spec: &ProblemSpec) -> Result<NormalFormFile> {
    let p = spec.build()?;
    let res = solve_problem(&p)?;
    let g = res.g_full()?;
    let phi = res.phi_full()?;
    let gevrey = gevrey_fit(&res.x_phi()?, p.spectrum.k, 1.0).ok();
    let defect = conjugacy_defect(&p.f, &p.spectrum, &g, &phi)?;
    let diagnostics = Diagnostics {
        residual: res.residual_norm,
        relative_residual: graded_residual(&defect, &[&p.f, &g, &phi]),
        k_fit: gevrey.as_ref().map(|f| f.k_fit),
        t_fit: gevrey.as_ref().map(|f| f.t_fit),
        gevrey,
    };
    Ok(NormalFormFile { problem: spec.clone(), r: p.spectrum.r, g: g.to_records(), phi: phi.to_records(), diagnostics })
}

impl NormalFormFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("result file: {e}")))
    }

    /// Rebuild the problem (with the stored r) and the stored series.
    pub fn load(&self) -> Result<(Problem, TruncatedSeries, TruncatedSeries)> {
        let mut spec = self.problem.clone();
        if spec.hopf.is_none() {
            spec.r = Some(self.r);
        }
        let p = spec.build()?;
        let n = p.spectrum.n();
        let g = TruncatedSeries::from_records(&self.g, n, n, p.l_max, p.j_max)?;
        let phi = TruncatedSeries::from_records(&self.phi, n, n, p.l_max, p.j_max)?;
        Ok((p, g, phi))
    }

    pub fn within_tolerance(&self, tol: f64) -> bool {
        self.diagnostics.relative_residual <= tol
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
    pub all_pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub iteration_trace: Vec<IterationRecord>,
}

fn check(name: &str, value: f64, threshold: f64, detail: Option<String>) -> CheckOutcome {
    CheckOutcome { name: name.into(), pass: value <= threshold, value, threshold, detail }
}

fn without_x0(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    s.sub(&s.truncate(0, s.j_max()).pad_polynomial(s.l_max(), s.j_max()))
}

/// Residual, route equivalence, Jordan oracle, Borel bound margin and,
/// for zero-Hopf problems, the reality property.
pub fn verify(p: &Problem, g: &TruncatedSeries, phi: &TruncatedSeries, tol: f64) -> Result<VerifyReport> {
    let spec = &p.spectrum;
    let k = spec.k;
    let scale = scale_of(&p.f, g, phi);
    let mut checks = Vec::new();

    let defect = conjugacy_defect(&p.f, spec, g, phi)?;
    checks.push(check("residual", graded_residual(&defect, &[&p.f, g, phi]), tol, None));

    // the Borel-plane fixed point against the transformed x-plane series
    let shifted = solve_order_zero(&p.f, spec, &p.rset)?;
    let m = p.m_max.min(p.l_max.saturating_sub(1));
    let sol = fixed_point_solve(&shifted, spec, &p.rset, m, p.j_max, m + 3, 0.0)?;
    let bg = borel_transform(&without_x0(g)?, k)?.truncate(m, p.j_max);
    let bp = borel_transform(&without_x0(phi)?, k)?.truncate(m, p.j_max);
    let route = bg.max_diff(&sol.g.truncate(m, p.j_max))?.max(bp.max_diff(&sol.phi.truncate(m, p.j_max))?);
    let bscale = 1f64.max(sol.g.max_abs()).max(sol.phi.max_abs());
    checks.push(check("route_equivalence", route / bscale, 1e-9, None));

    // recursive solution against the dense linear system on the same right-hand side
    let h = rhs_apply(&sol.g, &sol.phi, &shifted, k)?;
    let (gr, pr) = phi_backward_induction(&h, spec, &p.rset)?;
    let (go, po) = dense_oracle(&h, spec, &p.rset)?;
    let oracle = gr.max_diff(&go)?.max(pr.max_diff(&po)?);
    let oscale = 1f64.max(go.max_abs()).max(po.max_abs());
    checks.push(check("jordan_oracle", oracle / oscale, 1e-10, None));

    checks.push(bound_check(&x_times(phi), &p.sector)?);

    if p.hopf.is_some() {
        let d = property_p_defect(g)?.max(property_p_defect(phi)?) / scale;
        checks.push(check("property_p", d, tol.max(1e-12), None));
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, all_pass, iteration_trace: sol.trace })
}

/// Borel bound margin for `h` with T from the Gevrey fit (or 1) and the
/// smallest K that makes `|h_{l,j}| <= K T^{l-1+|j|}` hold.
fn bound_check(h: &TruncatedSeries, sector: &SectorSpec) -> Result<CheckOutcome> {
    let k = sector.k;
    let t = gevrey_fit(h, k, 1.0).map(|f| f.t_fit).ok().filter(|t| t.is_finite() && *t > 0.0).unwrap_or(1.0).max(1e-3);
    let mut kk: f64 = 0.0;
    for (l, j, _, v) in h.nonzero() {
        let deg: u32 = j.iter().sum();
        kk = kk.max(v.norm() / t.powi(l as i32 - 1 + deg as i32));
    }
    if kk == 0.0 {
        return Ok(check("bound_margin", 0.0, 0.0, Some("zero series".into())));
    }
    let mu = 1.5 * 2f64.powf(1.0 / k as f64) * t;
    let mut sec = SectorSpec::new(sector.theta, sector.alpha, 1.0, mu, k);
    sec.nu = 0.5 * sec.nu_limit();
    let BoundMargin { bound, value, margin } = verify_borel_bound(h, kk, t, &sec, DEFAULT_SAMPLES)?;
    Ok(CheckOutcome {
        name: "bound_margin".into(),
        pass: margin >= 0.0,
        value,
        threshold: bound,
        detail: Some(format!("K = {kk:.6e}, T = {t:.6e}, mu = {mu:.6e}")),
    })
}

pub fn verify_spec(spec: &ProblemSpec, tol: f64) -> Result<VerifyReport> {
    let p = spec.build()?;
    let res = solve_problem(&p)?;
    verify(&p, &res.g_full()?, &res.phi_full()?, tol)
}

pub fn verify_file(file: &NormalFormFile, tol: f64) -> Result<VerifyReport> {
    let (p, g, phi) = file.load()?;
    verify(&p, &g, &phi, tol)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolarSample {
    pub x: f64,
    pub radius: f64,
    pub phase: f64,
    pub radial: f64,
    pub angular: f64,
    /// Same rates computed from the complex vector field.
    pub radial_vf: f64,
    pub angular_vf: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HopfReport {
    pub b: f64,
    #[serde(rename = "N")]
    pub depth: usize,
    pub theta: f64,
    /// `h10[j][l]`: x^l coefficient of `z_1 (z_1 z_2)^j` in g_1.
    pub h10: Vec<Vec<ComplexRecord>>,
    pub h11: Vec<CoeffRecord>,
    pub p_defect: f64,
    pub pairing_defect: f64,
    pub polar: Vec<PolarSample>,
    pub manifold: ManifoldSamples,
}

/// Real x samples inside omega_k on the summation ray.
pub fn real_samples(sector: &SectorSpec, count: usize) -> Vec<f64> {
    let sign = if sector.theta.cos() < 0.0 { -1.0 } else { 1.0 };
    (1..=count).map(|i| sign * 0.8 * sector.nu * i as f64 / count as f64).collect()
}

pub fn hopf_report(spec: &ProblemSpec) -> Result<HopfReport> {
    let p = spec.build()?;
    let hp = match &p.hopf {
        Some(h) => h,
        None => return invalid("problem has no hopf block"),
    };
    let nf = hopf_normal_form(hp, p.sector.theta, p.l_max, p.j_max)?;
    let options = KsumOptions::default();
    let how = Summation::KSum { sector: p.sector, options };
    let mut polar = Vec::new();
    for x in real_samples(&p.sector, 3) {
        for radius in [0.05, 0.1] {
            let a = polar_form(&nf, x, radius, 0.0, &how)?;
            let v = polar_from_vector_field(&nf, x, radius, 0.0, &how)?;
            polar.push(PolarSample {
                x,
                radius,
                phase: 0.0,
                radial: a.radial,
                angular: a.angular,
                radial_vf: v.radial,
                angular_vf: v.angular,
            });
        }
    }
    let manifold = invariant_manifold(&nf.result.phi_full()?, &p.sector, &real_samples(&p.sector, 8), &options)?;
    Ok(HopfReport {
        b: nf.b,
        depth: nf.depth,
        theta: nf.theta,
        h10: nf.h10.iter().map(|row| row.iter().map(|&c| c.into()).collect()).collect(),
        h11: nf.h11.to_records(),
        p_defect: nf.p_defect,
        pairing_defect: nf.pairing_defect,
        polar,
        manifold,
    })
}

/// Closed form `Gamma((n+1)/k) x^{n+1}` of the Laplace transform of `w^n`.
pub fn laplace_monomial_exact(n: usize, x: C64, k: usize) -> C64 {
    x.powu(n as u32 + 1) * gamma((n + 1) as f64 / k as f64)
}
