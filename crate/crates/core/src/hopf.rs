//! Zero-Hopf singularities: a real system `(1/k) x^{k+1} u' = B u + x h(x, u)`
//! with `B = [[0, b], [-b, 0]]` complexified by `y_1 = u_1 + i u_2`,
//! `y_2 = u_1 - i u_2` into a saddle-node with `A = diag(-ib, ib)`.
//!
//! Realness survives as the symmetry (P): `c_{2,l,(j1,j2)} = conj(c_{1,l,(j2,j1)})`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{degree, Basis};
use crate::borel::BorelSeries;
use crate::conjugacy::{solve_conjugacy, NormalFormResult};
use crate::error::{invalid, Error, Result};
use crate::laplace::{ksum_evaluate, KsumOptions};
use crate::sector::SectorSpec;
use crate::series::TruncatedSeries;
use crate::spectrum::{ResonanceSet, Spectrum};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug)]
pub struct HopfProblem {
    pub b: f64,
    pub k: usize,
    /// Real series in (x, u_1, u_2), one component each.
    pub h1: TruncatedSeries,
    pub h2: TruncatedSeries,
    pub n_depth: usize,
}

impl HopfProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !self.b.is_finite() {
            return invalid(format!("rotation frequency b = {} must be positive", self.b));
        }
        if self.k == 0 {
            return invalid("rank k must be >= 1");
        }
        if self.n_depth == 0 {
            return invalid("resonance depth N must be >= 1");
        }
        for (name, h) in [("h1", &self.h1), ("h2", &self.h2)] {
            if h.n_vars() != 2 || h.n_comps() != 1 {
                return Err(Error::Dimension(format!("{name} must be a scalar series in (u1, u2)")));
            }
            if h.nonzero().iter().any(|(_, _, _, v)| v.im != 0.0) {
                return invalid(format!("{name} has non-real coefficients"));
            }
        }
        Ok(())
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::diagonal(vec![C64::new(0.0, -self.b), C64::new(0.0, self.b)], self.k)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `f_1 = (h_1 + i h_2)(x, u(y))`, `f_2 = (h_1 - i h_2)(x, u(y))` with
/// `u_1 = (y_1 + y_2)/2`, `u_2 = (y_1 - y_2)/(2i)`.
pub fn complexify(h1: &TruncatedSeries, h2: &TruncatedSeries) -> Result<TruncatedSeries> {
    if h1.n_vars() != 2 || h2.n_vars() != 2 || h1.n_comps() != 1 || h2.n_comps() != 1 {
        return Err(Error::Dimension("h1 and h2 must be scalar series in two variables".into()));
    }
    let l_max = h1.l_max().max(h2.l_max());
    let j_max = h1.j_max().max(h2.j_max());
    let mut f = TruncatedSeries::zeros(2, 2, l_max, j_max);
    let i_unit = C64::new(0.0, 1.0);
    let inv_2i = C64::new(0.0, -0.5);
    for (h, sign) in [(h1, C64::new(1.0, 0.0)), (h2, i_unit)] {
        for (l, j, _, v) in h.nonzero() {
            let (a, b) = (j[0], j[1]);
            let scale = v * 0.5f64.powi(a as i32) * inv_2i.powu(b);
            // ((y1 + y2))^a ((y1 - y2))^b
            for p in 0..=a {
                for q in 0..=b {
                    let coef = scale * binomial(a, p) * binomial(b, q) * if (b - q) % 2 == 0 { 1.0 } else { -1.0 };
                    let e = [p + q, a + b - p - q];
                    let c1 = f.get(l, &e, 0) + coef * sign;
                    let c2 = f.get(l, &e, 1) + coef * sign.conj();
                    f.set(l, &e, 0, c1)?;
                    f.set(l, &e, 1, c2)?;
                }
            }
        }
    }
    Ok(f)
}

fn check_pair(n_vars: usize, n_comps: usize) -> Result<()> {
    if n_vars != 2 || n_comps != 2 {
        return Err(Error::Dimension(format!(
            "property (P) needs 2 components over 2 variables, got {n_comps} over {n_vars}"
        )));
    }
    Ok(())
}

/// `max |c_{2,l,(j1,j2)} - conj(c_{1,l,(j2,j1)})|`.
pub fn property_p_defect(s: &TruncatedSeries) -> Result<f64> {
    check_pair(s.n_vars(), s.n_comps())?;
    let mut worst: f64 = 0.0;
    for (l, j, _, _) in s.nonzero() {
        let sw = [j[1], j[0]];
        worst = worst.max((s.get(l, &j, 1) - s.get(l, &sw, 0).conj()).norm());
    }
    Ok(worst)
}

/// Borel-plane version of [`property_p_defect`].
pub fn property_p_defect_borel(s: &BorelSeries) -> Result<f64> {
    check_pair(s.n_vars(), s.n_comps())?;
    let mut worst: f64 = 0.0;
    for (m, j, _, _) in s.nonzero() {
        let sw = [j[1], j[0]];
        worst = worst.max((s.get(m, &j, 1) - s.get(m, &sw, 0).conj()).norm());
    }
    Ok(worst)
}

/// Relative (P) test: the defect must be at most `tol * max(1, max |c|)`.
pub fn check_property_p(s: &TruncatedSeries, tol: f64) -> Result<bool> {
    Ok(property_p_defect(s)? <= tol * s.max_abs().max(1.0))
}

/// Replace each `c_2` by the average of `c_2` and the conjugate-swap of
/// `c_1` (and `c_1` to match). Fails when the existing defect exceeds `tol`
/// relative to the largest coefficient.
pub fn enforce_property_p(s: &TruncatedSeries, tol: f64) -> Result<TruncatedSeries> {
    let defect = property_p_defect(s)?;
    let scale = s.max_abs().max(1.0);
    if defect > tol * scale {
        return Err(Error::Numerical(format!("property (P) defect {defect:.3e} is too large to symmetrize")));
    }
    let mut out = s.clone();
    for (l, j, _, _) in s.nonzero() {
        let sw = [j[1], j[0]];
        let avg = 0.5 * (s.get(l, &j, 1) + s.get(l, &sw, 0).conj());
        out.set(l, &j, 1, avg)?;
        out.set(l, &sw, 0, avg.conj())?;
    }
    Ok(out)
}

/// `(j1, j2)` in the first projection `R_1(N)`.
pub fn in_r1(depth: usize, j: &[u32]) -> bool {
    let (j1, j2, n) = (j[0] as usize, j[1] as usize, depth);
    (j1 == j2 + 1 && j2 <= n) || (j1 > n + 1 && j2 > n)
}

pub fn in_r2(depth: usize, j: &[u32]) -> bool {
    in_r1(depth, &[j[1], j[0]])
}

/// Largest C with `|j1 - (j2+1)| >= C (1 + |j|)` off `R_1` (and the mirror
/// off `R_2`), scanned over `|j| <= j_max`.
pub fn r1r2_constant(depth: usize, j_max: usize) -> f64 {
    let mut best = f64::INFINITY;
    for j in Basis::get(2, j_max).indices() {
        let s = 1.0 + degree(j) as f64;
        if !in_r1(depth, j) {
            best = best.min((j[0] as f64 - j[1] as f64 - 1.0).abs() / s);
        }
        if !in_r2(depth, j) {
            best = best.min((j[1] as f64 - j[0] as f64 - 1.0).abs() / s);
        }
    }
    best
}

/// Resonance set `R(N)` for `lambda = (-ib, ib)` truncated to `|j| <= j_max`.
pub fn hopf_resonance_sets(depth: usize, b: f64, j_max: usize, theta: f64) -> Result<ResonanceSet> {
    if depth == 0 {
        return invalid("resonance depth N must be >= 1");
    }
    let spec = Spectrum::diagonal(vec![C64::new(0.0, -b), C64::new(0.0, b)], 1)?;
    let mut pairs = BTreeSet::new();
    for j in Basis::get(2, j_max).indices() {
        if in_r1(depth, j) {
            pairs.insert((0, j.clone()));
        }
        if in_r2(depth, j) {
            pairs.insert((1, j.clone()));
        }
    }
    ResonanceSet::from_pairs(&spec, pairs, j_max, theta)
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta.abs() > 1e-12 && (theta - PI).abs() > 1e-12 {
        return invalid(format!("zero-Hopf problems are summed along theta = 0 or pi, got {theta}"));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct HopfNormalForm {
    pub result: NormalFormResult,
    /// `h10[j][l]`: x^l coefficient of `z_1 (z_1 z_2)^j` in g_1, for j < N.
    pub h10: Vec<Vec<C64>>,
    pub h20: Vec<Vec<C64>>,
    /// g_1 = z_1 (z_1 z_2)^N h11 on the remaining slots.
    pub h11: TruncatedSeries,
    pub h21: TruncatedSeries,
    pub p_defect: f64,
    pub pairing_defect: f64,
    pub theta: f64,
    pub depth: usize,
    pub b: f64,
}

/// Solve the complexified problem with `R(N)` and read off the real
/// normal-form coefficients.
pub fn hopf_normal_form(problem: &HopfProblem, theta: f64, l_max: usize, j_max: usize) -> Result<HopfNormalForm> {
    problem.validate()?;
    check_theta(theta)?;
    let spec = problem.spectrum()?;
    let n = problem.n_depth;
    let rset = hopf_resonance_sets(n, problem.b, j_max, theta)?;
    let f = complexify(&problem.h1, &problem.h2)?;
    let f = enforce_property_p(&f.truncate(l_max, j_max).pad_polynomial(l_max, j_max), 1e-12)?;
    let result = solve_conjugacy(&f, &spec, &rset, l_max, j_max)?;
    let g = result.g_full()?;
    let phi = result.phi_full()?;
    let p_defect = property_p_defect(&g)?.max(property_p_defect(&phi)?) / g.max_abs().max(phi.max_abs()).max(1.0);
    let reduced = j_max.saturating_sub(2 * n + 1);
    let mut h10 = vec![vec![ZERO; l_max + 1]; n];
    let mut h20 = vec![vec![ZERO; l_max + 1]; n];
    let mut h11 = TruncatedSeries::zeros(2, 1, l_max, reduced);
    let mut h21 = TruncatedSeries::zeros(2, 1, l_max, reduced);
    for (l, j, i, v) in g.nonzero() {
        let (j1, j2) = (j[0] as usize, j[1] as usize);
        let (own, other) = if i == 0 { (j1, j2) } else { (j2, j1) };
        if own == other + 1 && other < n {
            if i == 0 {
                h10[other][l] = v;
            } else {
                h20[other][l] = v;
            }
        } else if own > n && other >= n {
            let e = [(own - n - 1) as u32, (other - n) as u32];
            let e = if i == 0 { e } else { [e[1], e[0]] };
            let target = if i == 0 { &mut h11 } else { &mut h21 };
            target.set(l, &e, 0, v)?;
        } else {
            return Err(Error::Invalid(format!(
                "g_{} has a coefficient at z^{:?} outside the zero-Hopf pattern",
                i + 1,
                j
            )));
        }
    }
    let mut pairing_defect: f64 = 0.0;
    for (a, b) in h10.iter().zip(&h20) {
        for (x, y) in a.iter().zip(b) {
            pairing_defect = pairing_defect.max((y - x.conj()).norm());
        }
    }
    for (l, e, _, v) in h11.nonzero() {
        pairing_defect = pairing_defect.max((h21.get(l, &[e[1], e[0]], 0) - v.conj()).norm());
    }
    for (l, e, _, v) in h21.nonzero() {
        pairing_defect = pairing_defect.max((h11.get(l, &[e[1], e[0]], 0) - v.conj()).norm());
    }
    Ok(HopfNormalForm { result, h10, h20, h11, h21, p_defect, pairing_defect, theta, depth: n, b: problem.b })
}

/// How x-series are turned into numbers.
#[derive(Clone, Debug)]
pub enum Summation {
    /// Partial sum of the truncated series.
    Truncated,
    /// k-sum in the given sector.
    KSum { sector: SectorSpec, options: KsumOptions },
}

fn evaluate(h: &TruncatedSeries, z: &[C64], x: C64, how: &Summation) -> Result<Vec<C64>> {
    match how {
        Summation::Truncated => h.evaluate(x, z),
        Summation::KSum { sector, options } => ksum_evaluate(h, z, x, sector, options),
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PolarRates {
    pub radial: f64,
    pub angular: f64,
}

/// `x * sum_j h10_j(x) r^{2j} + x r^{2N} h11(x, z1, conj z1)` with `z1 = r e^{i phase}`.
fn polar_sum(nf: &HopfNormalForm, x: f64, rr: f64, phase: f64, how: &Summation) -> Result<C64> {
    let xc = C64::new(x, 0.0);
    let z1 = C64::from_polar(rr, phase);
    let mut total = ZERO;
    for (j, coeffs) in nf.h10.iter().enumerate() {
        let mut s = TruncatedSeries::zeros(2, 1, coeffs.len() - 1, 0);
        for (l, v) in coeffs.iter().enumerate() {
            s.set(l, &[0, 0], 0, *v)?;
        }
        total += evaluate(&s, &[ZERO, ZERO], xc, how)?[0] * rr.powi(2 * j as i32);
    }
    if rr > 0.0 {
        total += evaluate(&nf.h11, &[z1, z1.conj()], xc, how)?[0] * rr.powi(2 * nf.depth as i32);
    }
    Ok(total)
}

/// Radial and angular rates of the real normal form at real x in polar
/// coordinates `z_1 = rr e^{i phase}`.
pub fn polar_form(nf: &HopfNormalForm, x: f64, rr: f64, phase: f64, how: &Summation) -> Result<PolarRates> {
    if !x.is_finite() || rr < 0.0 {
        return invalid("polar form needs finite real x and radius rr >= 0");
    }
    if let Summation::KSum { sector, .. } = how {
        if !sector.in_omega_x(C64::new(x, 0.0)) {
            return invalid(format!("x = {x} lies outside omega_k"));
        }
    }
    let s = polar_sum(nf, x, rr, phase, how)?;
    Ok(PolarRates { radial: x * s.re * rr, angular: -nf.b + x * s.im })
}

/// The same rates from `z' = A z + x g(x, z)` pushed through `z_1 = r e^{i phase}`.
pub fn polar_from_vector_field(nf: &HopfNormalForm, x: f64, rr: f64, phase: f64, how: &Summation) -> Result<PolarRates> {
    let z1 = C64::from_polar(rr, phase);
    let g = nf.result.g_full()?;
    let gv = evaluate(&g, &[z1, z1.conj()], C64::new(x, 0.0), how)?;
    let dz1 = C64::new(0.0, -nf.b) * z1 + x * gv[0];
    if rr == 0.0 {
        return invalid("the angular rate is undefined at r = 0");
    }
    let radial = (z1.conj() * dz1).re / rr;
    let angular = (dz1 / z1).im;
    Ok(PolarRates { radial, angular })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldPoint {
    pub x: f64,
    pub u1: C64,
    pub u2: C64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldSamples {
    pub theta: f64,
    pub points: Vec<ManifoldPoint>,
    /// max over samples of |Im u_1| + |Im u_2|.
    pub realness_defect: f64,
}

impl ManifoldSamples {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,u1_re,u1_im,u2_re,u2_im\n");
        for p in &self.points {
            s.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n", p.x, p.u1.re, p.u1.im, p.u2.re, p.u2.im));
        }
        s
    }
}

/// `u_1 = x (phi_1 + phi_2)/2`, `u_2 = x (phi_1 - phi_2)/(2i)` at z = 0
/// for real samples x in omega_k, with phi k-summed along theta in {0, pi}.
pub fn invariant_manifold(phi: &TruncatedSeries, sector: &SectorSpec, xs: &[f64], options: &KsumOptions) -> Result<ManifoldSamples> {
    check_theta(sector.theta)?;
    if phi.n_comps() != 2 || phi.n_vars() != 2 {
        return Err(Error::Dimension("phi must have 2 components over 2 variables".into()));
    }
    let how = Summation::KSum { sector: *sector, options: options.clone() };
    let mut points = Vec::with_capacity(xs.len());
    let mut defect: f64 = 0.0;
    for &x in xs {
        let xc = C64::new(x, 0.0);
        if !sector.in_omega_x(xc) {
            return invalid(format!("sample x = {x} lies outside omega_k"));
        }
        let v = evaluate(phi, &[ZERO, ZERO], xc, &how)?;
        let u1 = xc * (v[0] + v[1]) / 2.0;
        let u2 = xc * (v[0] - v[1]) / C64::new(0.0, 2.0);
        defect = defect.max(u1.im.abs() + u2.im.abs());
        points.push(ManifoldPoint { x, u1, u2 });
    }
    Ok(ManifoldSamples { theta: sector.theta, points, realness_defect: defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn re(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    fn scalar(terms: &[(usize, [u32; 2], f64)], l_max: usize, j_max: usize) -> TruncatedSeries {
        let mut s = TruncatedSeries::zeros(2, 1, l_max, j_max);
        for (l, j, v) in terms {
            s.set(*l, j, 0, re(*v)).unwrap();
        }
        s
    }

    #[test]
    fn complexify_examples() {
        let f = complexify(&scalar(&[(0, [1, 0], 1.0)], 2, 2), &scalar(&[], 2, 2)).unwrap();
        for i in 0..2 {
            assert!((f.get(0, &[1, 0], i) - re(0.5)).norm() < 1e-15);
            assert!((f.get(0, &[0, 1], i) - re(0.5)).norm() < 1e-15);
        }
        let f = complexify(&scalar(&[], 2, 2), &scalar(&[(0, [0, 1], 1.0)], 2, 2)).unwrap();
        assert!((f.get(0, &[1, 0], 0) - re(0.5)).norm() < 1e-15);
        assert!((f.get(0, &[0, 1], 0) - re(-0.5)).norm() < 1e-15);
        assert!((f.get(0, &[1, 0], 1) - re(-0.5)).norm() < 1e-15);
        assert!((f.get(0, &[0, 1], 1) - re(0.5)).norm() < 1e-15);
        // u1^2 + u2^2 = y1 y2
        let f = complexify(&scalar(&[(0, [2, 0], 1.0), (0, [0, 2], 1.0)], 2, 2), &scalar(&[], 2, 2)).unwrap();
        assert_eq!(f.nonzero().len(), 2);
        assert!((f.get(0, &[1, 1], 0) - re(1.0)).norm() < 1e-15);
    }

    fn random_real(rng: &mut ChaCha8Rng, l_max: usize, deg: usize) -> TruncatedSeries {
        let mut s = TruncatedSeries::zeros(2, 1, l_max, deg);
        for j in Basis::get(2, deg).indices() {
            for l in 0..=l_max.min(2) {
                if rng.gen_bool(0.5) {
                    s.set(l, j, 0, re(rng.gen_range(-1.0..1.0))).unwrap();
                }
            }
        }
        s
    }

    #[test]
    fn complexify_satisfies_p_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let h1 = random_real(&mut rng, 3, 4);
            let h2 = random_real(&mut rng, 3, 4);
            let f = complexify(&h1, &h2).unwrap();
            assert!(property_p_defect(&f).unwrap() < 1e-14);
            // f_1(x, y(u)) = h1 + i h2 at a real point
            let (u1, u2, x) = (0.3, -0.2, 0.1);
            let y = [C64::new(u1, u2), C64::new(u1, -u2)];
            let fv = f.evaluate(re(x), &y).unwrap();
            let a = h1.evaluate(re(x), &[re(u1), re(u2)]).unwrap()[0];
            let b = h2.evaluate(re(x), &[re(u1), re(u2)]).unwrap()[0];
            assert!((fv[0] - (a + C64::new(0.0, 1.0) * b)).norm() < 1e-13);
            assert!((fv[1] - (a - C64::new(0.0, 1.0) * b)).norm() < 1e-13);
        }
    }

    #[test]
    fn perturbed_series_fails_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut f = complexify(&random_real(&mut rng, 2, 3), &random_real(&mut rng, 2, 3)).unwrap();
        assert!(check_property_p(&f, 1e-14).unwrap());
        let v = f.get(1, &[1, 2], 0);
        f.set(1, &[1, 2], 0, v + 1e-3).unwrap();
        assert!(!check_property_p(&f, 1e-12).unwrap());
        assert!(enforce_property_p(&f, 1e-12).is_err());
        assert!(check_property_p(&enforce_property_p(&f, 1e-2).unwrap(), 1e-15).unwrap());
        assert!(property_p_defect(&TruncatedSeries::zeros(3, 2, 1, 1)).is_err());
    }

    #[test]
    fn resonance_set_examples() {
        assert!(in_r1(1, &[1, 0]));
        assert!(in_r1(1, &[2, 1]));
        assert!(!in_r1(1, &[2, 0]));
        assert!(in_r1(1, &[3, 2]));
        assert!(in_r2(1, &[0, 1]));
        let c = r1r2_constant(1, 12);
        assert!(c > 0.0);
        for n in 1..=3 {
            let c = r1r2_constant(n, 12);
            for j in Basis::get(2, 12).indices() {
                let s = 1.0 + degree(j) as f64;
                if !in_r1(n, j) {
                    assert!((j[0] as f64 - j[1] as f64 - 1.0).abs() >= c * s - 1e-15);
                }
            }
        }
        let rset = hopf_resonance_sets(2, 1.5, 8, 0.0).unwrap();
        for j in Basis::get(2, 8).indices() {
            assert_eq!(rset.contains(0, j).unwrap(), in_r1(2, j));
            assert_eq!(rset.contains(1, j).unwrap(), in_r2(2, j));
        }
        let spec = Spectrum::diagonal(vec![C64::new(0.0, -1.5), C64::new(0.0, 1.5)], 1).unwrap();
        assert!(rset.contains_exact_resonances(&spec));
    }

    #[test]
    fn quadratic_demo() {
        let problem = HopfProblem {
            b: 1.0,
            k: 1,
            h1: scalar(&[(0, [2, 0], 1.0), (0, [0, 2], 1.0)], 8, 4),
            h2: scalar(&[(1, [1, 0], 0.5)], 8, 4),
            n_depth: 1,
        };
        let nf = hopf_normal_form(&problem, 0.0, 8, 4).unwrap();
        assert!(nf.p_defect < 1e-12);
        assert!(nf.pairing_defect < 1e-12 * (1.0 + nf.result.g_full().unwrap().max_abs()));
        assert!(hopf_normal_form(&problem, 0.5, 8, 4).is_err());
        // polar rates against the vector field
        for &(rr, phase) in &[(0.1, 0.0), (0.2, 1.0), (0.05, -2.0)] {
            let a = polar_form(&nf, 0.05, rr, phase, &Summation::Truncated).unwrap();
            let b = polar_from_vector_field(&nf, 0.05, rr, phase, &Summation::Truncated).unwrap();
            assert!((a.radial - b.radial).abs() < 1e-12 && (a.angular - b.angular).abs() < 1e-12, "{a:?} {b:?}");
        }
        let origin = polar_form(&nf, 0.05, 0.0, 0.0, &Summation::Truncated).unwrap();
        assert_eq!(origin.radial, 0.0);
    }

    #[test]
    fn zero_input_gives_zero_normal_form() {
        let problem = HopfProblem { b: 2.0, k: 2, h1: scalar(&[], 4, 3), h2: scalar(&[], 4, 3), n_depth: 2 };
        let nf = hopf_normal_form(&problem, PI, 4, 3).unwrap();
        assert!(nf.h10.iter().flatten().all(|v| *v == ZERO));
        let sec = SectorSpec::new(PI, 0.5, 0.1, 1.0, 2);
        let m = invariant_manifold(&nf.result.phi_full().unwrap(), &sec, &[-0.05, -0.02], &KsumOptions::default()).unwrap();
        assert!(m.points.iter().all(|p| p.u1 == ZERO && p.u2 == ZERO));
    }

    #[test]
    fn manifold_is_real_and_breaks_without_p() {
        let problem = HopfProblem {
            b: 1.0,
            k: 1,
            h1: scalar(&[(0, [0, 0], 1.0), (1, [1, 0], 0.3)], 14, 3),
            h2: scalar(&[(0, [0, 0], -0.5), (0, [1, 1], 0.2)], 14, 3),
            n_depth: 1,
        };
        for theta in [0.0, PI] {
            let nf = hopf_normal_form(&problem, theta, 14, 3).unwrap();
            let sec = SectorSpec::new(theta, 0.5, 0.1, 1.0, 1);
            let sign = if theta == 0.0 { 1.0 } else { -1.0 };
            let xs: Vec<f64> = [0.02, 0.04, 0.06].iter().map(|v| sign * v).collect();
            let phi = nf.result.phi_full().unwrap();
            let m = invariant_manifold(&phi, &sec, &xs, &KsumOptions::default()).unwrap();
            assert!(m.realness_defect <= 1e-8, "theta = {theta}: {}", m.realness_defect);
            assert!(m.points.iter().any(|p| p.u1.norm() > 1e-6));
            let mut broken = phi.clone();
            let v = broken.get(1, &[0, 0], 0);
            broken.set(1, &[0, 0], 0, v + C64::new(0.0, 0.1)).unwrap();
            let mb = invariant_manifold(&broken, &sec, &xs, &KsumOptions::default()).unwrap();
            assert!(mb.realness_defect > 1e-6);
        }
        let sec = SectorSpec::new(0.3, 0.5, 0.1, 1.0, 1);
        assert!(invariant_manifold(&TruncatedSeries::zeros(2, 2, 2, 2), &sec, &[0.05], &KsumOptions::default()).is_err());
    }
}
