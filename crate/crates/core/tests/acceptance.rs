//! Acceptance suite: one line per criterion with its wall time.
//!
//! Reference values come from code that is independent of the library:
//! Gamma by upward recurrence from tabulated values at p/k, the Euler
//! integral via a continued fraction for E_1, the Hopf resonance pattern
//! from its closed-form predicate, and the Jordan path length from the
//! potential sum_s s m_s.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nfk_core::basis::Basis;
use nfk_core::borel::{borel_transform, gevrey_fit};
use nfk_core::borel_solver::fixed_point_solve;
use nfk_core::conjugacy::{conjugacy_residual, solve_conjugacy, solve_order_zero};
use nfk_core::convolution::{convolve_monomial, convolve_numeric, QuadratureConfig};
use nfk_core::hopf::{hopf_normal_form, hopf_resonance_sets, invariant_manifold, HopfProblem};
use nfk_core::jordan::{cone, dense_oracle, enumerate_paths, phi_backward_induction};
use nfk_core::laplace::{ksum_evaluate, laplace_numeric, KsumOptions, LaplaceOptions};
use nfk_core::norms::{c_k, norm_poly, q_k, verify_borel_bound, verify_conv_bound};
use nfk_core::problem::ProblemSpec;
use nfk_core::pipeline::solve_problem;
use nfk_core::sector::SectorSpec;
use nfk_core::series::TruncatedSeries;
use nfk_core::spectrum::{default_r, divisor_lower_bound, minimal_resonance_set, ResonanceSet, Spectrum};
use nfk_core::borel::BorelSeries;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// Gamma(p/q) for p < q <= 4, to 20 digits.
fn gamma_base(p: usize, q: usize) -> f64 {
    match (p, q) {
        (a, b) if a == b => 1.0,
        (1, 2) => 1.772_453_850_905_516_027_3,
        (1, 3) => 2.678_938_534_707_747_633_7,
        (2, 3) => 1.354_117_939_426_400_416_9,
        (1, 4) => 3.625_609_908_221_908_311_9,
        (2, 4) => 1.772_453_850_905_516_027_3,
        (3, 4) => 1.225_416_702_465_177_645_1,
        _ => unreachable!(),
    }
}

/// Gamma(n/k) by Gamma(x+1) = x Gamma(x) from the base values.
fn gamma_rational(n: usize, k: usize) -> f64 {
    let mut p = n % k;
    if p == 0 {
        p = k;
    }
    let mut x = p as f64 / k as f64;
    let mut g = gamma_base(p, k);
    let mut cur = p;
    while cur < n {
        g *= x;
        x += 1.0;
        cur += k;
    }
    g
}

/// e^{1/x} E_1(1/x) by the continued fraction of E_1 (modified Lentz).
fn euler_integral(x: f64) -> f64 {
    let z = 1.0 / x;
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut cc = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        cc = b + a / cc;
        let delta = cc * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

fn crit1() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let alpha = PI / (2.0 * k as f64);
        let sec = SectorSpec::new(0.0, alpha, 0.2, 1.0, k);
        sec.validate().map_err(|e| e.to_string())?;
        for n in 0..=10 {
            for &x in &[0.05, 0.1] {
                let v = laplace_numeric(&|w: C64| w.powu(n as u32), c(x, 0.0), &sec, &LaplaceOptions::default())
                    .map_err(|e| e.to_string())?
                    .value;
                let exact = gamma_rational(n + 1, k) * x.powi(n as i32 + 1);
                let rel = (v - exact).norm() / exact;
                worst = worst.max(rel);
            }
        }
    }
    ensure(worst <= 1e-8, || format!("worst relative error {worst:.3e}"))?;
    Ok(format!("66 cases, worst relative error {worst:.2e}"))
}

fn crit2() -> Outcome {
    let mut worst_exact: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    let cfg = QuadratureConfig::default();
    for k in 1..=4 {
        for a in 0..=12 {
            for b in 0..=12 {
                let want = gamma_rational(a + 1, k) * gamma_rational(b + 1, k) / gamma_rational(a + b + 2, k);
                let (deg, coef) = convolve_monomial(a, b, k);
                ensure(deg == a + b + 1, || format!("degree {deg} for a={a}, b={b}"))?;
                worst_exact = worst_exact.max((coef - want).abs() / want);
                let q = convolve_numeric(&|s| s.powu(a as u32), &|s| s.powu(b as u32), c(1.0, 0.0), k, &cfg)
                    .map_err(|e| e.to_string())?;
                worst_quad = worst_quad.max((q.value - want).norm() / want);
            }
        }
    }
    let (deg, pi) = convolve_monomial(0, 0, 2);
    ensure(deg == 1 && (pi - PI).abs() < 1e-14, || format!("1 *_2 1 = {pi} w^{deg}"))?;
    ensure(worst_exact <= 1e-12, || format!("exact path error {worst_exact:.3e}"))?;
    ensure(worst_quad <= 1e-8, || format!("quadrature path error {worst_quad:.3e}"))?;
    Ok(format!("676 pairs, exact {worst_exact:.1e}, quadrature {worst_quad:.1e}, 1*_2 1 = pi w"))
}

fn crit3() -> Outcome {
    let q1 = q_k(1);
    ensure((q1 - 4.0 * PI).abs() <= 4.0 * f64::EPSILON * 4.0 * PI, || format!("q_1 = {q1}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut max_ratio: f64 = 0.0;
    for t in 0..500 {
        let k = rng.gen_range(1..=4);
        let mu = rng.gen_range(0.5..3.0);
        let alpha = rng.gen_range(0.3..2.5);
        let mut sec = SectorSpec::new(rng.gen_range(-PI..PI), alpha, 1.0, mu, k);
        sec.nu = 0.5 * sec.nu_limit();
        let dh = rng.gen_range(0..5);
        let dj = rng.gen_range(0..5);
        let h: Vec<C64> = (0..=dh).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let j: Vec<C64> = (0..=dj).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let m = verify_conv_bound(&h, &j, &sec, 256).map_err(|e| e.to_string())?;
        ensure(m.margin >= 0.0, || format!("trial {t}: margin {:.3e} (k={k}, mu={mu:.3})", m.margin))?;
        max_ratio = max_ratio.max(m.value / m.bound);
    }
    Ok(format!("q_1 = 4 pi, 500 trials, max ||H*J|| / bound = {max_ratio:.3}"))
}

const EULER: &str = r#"{
    "n": 1, "k": 1,
    "lambda": [{"re": -1.0, "im": 0.0}],
    "f": [{"l": 0, "j": [0], "i": 1, "re": 1.0, "im": 0.0}],
    "truncation": {"L_max": 20, "J_max": 1},
    "resonance": {"pairs": [{"i": 1, "j": [1]}]},
    "sector": {"theta": 0.0, "alpha": 1.0, "nu": 0.2, "mu": 1.0}
}"#;

fn euler_x_phi() -> Result<(TruncatedSeries, TruncatedSeries, SectorSpec), String> {
    let spec = ProblemSpec::from_json(EULER).map_err(|e| e.to_string())?;
    let p = spec.build().map_err(|e| e.to_string())?;
    let res = solve_problem(&p).map_err(|e| e.to_string())?;
    Ok((res.phi_full().map_err(|e| e.to_string())?, res.x_phi().map_err(|e| e.to_string())?, p.sector))
}

fn crit4() -> Outcome {
    let (phi, xphi, sec) = euler_x_phi()?;
    let mut fact = 1.0;
    for l in 0..=20usize {
        if l > 0 {
            fact *= l as f64;
        }
        let want = if l % 2 == 0 { fact } else { -fact };
        let got = phi.get(l, &[0], 0);
        ensure(got == c(want, 0.0), || format!("phi_{l}(0) = {got}, expected {want}"))?;
    }
    let hb = borel_transform(&xphi, 1).map_err(|e| e.to_string())?;
    for m in 1..=21usize {
        let want = if m % 2 == 1 { 1.0 } else { -1.0 };
        let got = hb.get(m - 1, &[0], 0);
        ensure(got == c(want, 0.0), || format!("Borel coefficient {m}: {got}"))?;
    }
    let opts = KsumOptions { pade: true, ..KsumOptions::default() };
    let v = ksum_evaluate(&xphi, &[c(0.0, 0.0)], c(0.1, 0.0), &sec, &opts).map_err(|e| e.to_string())?[0];
    let want = euler_integral(0.1);
    let err = (v - want).norm();
    ensure(err <= 1e-6, || format!("k-sum {v} vs quadrature {want}"))?;
    Ok(format!("phi_l(0) exact for l <= 20, Borel coefficients exact, k-sum error {err:.1e}"))
}

fn random_spectrum(rng: &mut ChaCha8Rng, n: usize, k: usize, jordan: bool) -> Spectrum {
    let mut lambda = Vec::new();
    let mut xi = vec![0u8; n.saturating_sub(1)];
    let mut cur = c(rng.gen_range(-2.0..-0.5), rng.gen_range(-1.5..1.5));
    for i in 0..n {
        if i > 0 {
            if jordan && rng.gen_bool(0.6) {
                xi[i - 1] = 1;
            } else {
                cur = c(rng.gen_range(-2.0..-0.5), rng.gen_range(-1.5..1.5));
            }
        }
        lambda.push(cur);
    }
    if jordan && n > 1 && xi.iter().all(|&x| x == 0) {
        xi[0] = 1;
        lambda[1] = lambda[0];
    }
    Spectrum::new(lambda, xi, k, 1.0).unwrap()
}

fn random_f(rng: &mut ChaCha8Rng, n: usize, l_max: usize, j_max: usize, deg: usize) -> TruncatedSeries {
    let mut f = TruncatedSeries::zeros(n, n, l_max, j_max);
    for l in 0..=deg.min(l_max) {
        for j in Basis::get(n, deg.min(j_max)).indices() {
            if l + j.iter().sum::<u32>() as usize > deg {
                continue;
            }
            for i in 0..n {
                if rng.gen_bool(0.6) {
                    f.set(l, j, i, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
                }
            }
        }
    }
    f
}

fn crit5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst: f64 = 0.0;
    let (l_max, j_max) = (12, 6);
    for t in 0..50 {
        let n = 1 + t % 3;
        let k = 1 + (t / 3) % 3;
        let jordan = n > 1 && t % 2 == 0;
        let mut spec = random_spectrum(&mut rng, n, k, jordan);
        if jordan {
            spec = spec.with_r(rng.gen_range(0.05..0.5)).unwrap();
        }
        let rset = minimal_resonance_set(&spec, 0.05, j_max).map_err(|e| e.to_string())?;
        let f = random_f(&mut rng, n, l_max, j_max, 3);
        let res = solve_conjugacy(&f, &spec, &rset, l_max, j_max).map_err(|e| format!("problem {t}: {e}"))?;
        let resid = conjugacy_residual(&f, &spec, &res).map_err(|e| e.to_string())?;
        let g = res.g_full().unwrap();
        let phi = res.phi_full().unwrap();
        let scale = f.max_abs().max(g.max_abs()).max(phi.max_abs());
        let rel = resid / scale;
        ensure(rel <= 1e-10, || format!("problem {t} (n={n}, k={k}): residual {resid:.3e}, scale {scale:.3e}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("50 problems, worst residual / max coefficient {worst:.1e}"))
}

/// Chain of Jordan blocks whose divisors avoid the Borel sector around
/// k theta = pi/2 with opening 1; returns r = 1/(2K(n-1)).
fn jordan_borel_problem(rng: &mut ChaCha8Rng, n: usize, k: usize, j_max: usize) -> Option<(Spectrum, ResonanceSet)> {
    let unit = random_spectrum(rng, n, k, true);
    let theta = PI / (2.0 * k as f64);
    let rset = minimal_resonance_set(&unit, 0.05, j_max).ok()?.with_theta(&unit, theta);
    let mut sec = SectorSpec::new(theta, 1.0 / k as f64, 1.0, 1.0, k);
    sec.nu = 0.5 * sec.nu_limit();
    let bound = divisor_lower_bound(&rset, &unit, &sec).ok()?;
    let r = default_r(&unit, &bound);
    Some((unit.with_r(r).ok()?, rset))
}

fn crit6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut worst: f64 = 0.0;
    let mut made = 0;
    let mut attempts = 0;
    let mut paths_checked = 0usize;
    while made < 30 {
        attempts += 1;
        ensure(attempts < 1000, || "could not draw admissible Jordan problems".into())?;
        let n = 2 + made % 3;
        let k = 1 + made % 2;
        let j_max = if n == 4 { 5 } else { 6 };
        let m_max = 8;
        let Some((spec, rset)) = jordan_borel_problem(&mut rng, n, k, j_max) else { continue };
        let mut h = BorelSeries::zeros(n, n, m_max, j_max);
        for m in 0..=m_max {
            for j in Basis::get(n, j_max).indices() {
                for i in 0..n {
                    h.set(m, j, i, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
                }
            }
        }
        let (g1, p1) = phi_backward_induction(&h, &spec, &rset).map_err(|e| e.to_string())?;
        let (g2, p2) = dense_oracle(&h, &spec, &rset).map_err(|e| e.to_string())?;
        let scale = g2.max_abs().max(p2.max_abs()).max(1.0);
        let diff = g1.max_diff(&g2).unwrap().max(p1.max_diff(&p2).unwrap()) / scale;
        ensure(diff <= 1e-10, || format!("problem {made} (n={n}, k={k}, r={:.3e}): {diff:.3e}", spec.r))?;
        worst = worst.max(diff);
        made += 1;
    }
    // path lengths are fixed by the potential sum_s s m_s
    for n in 2..=4 {
        for j in Basis::get(n, 6).indices() {
            for m in cone(j, n).map_err(|e| e.to_string())? {
                let ps = enumerate_paths(&m, j, n).map_err(|e| e.to_string())?;
                let pot = |v: &[u32]| v.iter().enumerate().map(|(s, &x)| (s + 1) as i64 * x as i64).sum::<i64>();
                let want = (pot(j) - pot(&m)).unsigned_abs() as usize;
                ensure(!ps.paths.is_empty() && ps.is_valid(), || format!("paths {m:?} -> {j:?}"))?;
                ensure(ps.paths.iter().all(|p| p.len() == want), || format!("non-uniform paths {m:?} -> {j:?}"))?;
                paths_checked += ps.paths.len();
            }
        }
    }
    Ok(format!("30 problems, worst relative difference {worst:.1e}, {paths_checked} paths uniform"))
}

fn crit7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let (l_max, j_max) = (8, 3);
    for t in 0..20 {
        let n = 1 + t % 3;
        let k = 1 + (t / 3) % 3;
        let jordan = n > 1 && t % 2 == 1;
        let mut spec = random_spectrum(&mut rng, n, k, jordan);
        if jordan {
            spec = spec.with_r(rng.gen_range(0.05..0.5)).unwrap();
        }
        let rset = minimal_resonance_set(&spec, 0.05, j_max).map_err(|e| e.to_string())?;
        let f = random_f(&mut rng, n, l_max, j_max, 3);
        let x = solve_conjugacy(&f, &spec, &rset, l_max, j_max).map_err(|e| e.to_string())?;
        let p = solve_order_zero(&f, &spec, &rset).map_err(|e| e.to_string())?;
        let sol = fixed_point_solve(&p, &spec, &rset, l_max - 1, j_max, 40, 0.0).map_err(|e| e.to_string())?;
        let bg = borel_transform(&x.g_hat, k).unwrap();
        let bp = borel_transform(&x.phi_hat, k).unwrap();
        let scale = bg.max_abs().max(bp.max_abs()).max(1.0);
        let diff = bg.max_diff(&sol.g).unwrap().max(bp.max_diff(&sol.phi).unwrap()) / scale;
        ensure(diff <= 1e-9, || format!("problem {t} (n={n}, k={k}): {diff:.3e}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("20 problems, worst relative difference {worst:.1e}"))
}

fn crit8() -> Outcome {
    let mut notes = Vec::new();
    for k in 1..=3 {
        let mu = 1.5 * 2f64.powf(1.0 / k as f64);
        let mut sec = SectorSpec::new(0.0, 1.0, 1.0, mu, k);
        sec.nu = 0.5 * sec.nu_limit();
        let one = norm_poly(&[c(1.0, 0.0)], &sec, 512).map_err(|e| e.to_string())?;
        ensure((one.value - 1.0).abs() <= 1e-3, || format!("||1|| = {} for k = {k}", one.value))?;
        // monotone decreasing in mu
        let h = [c(0.3, 0.1), c(-1.0, 0.5), c(0.0, 0.7), c(0.2, 0.0)];
        let mut last = f64::INFINITY;
        for m in [0.5, 1.0, 2.0, 4.0] {
            let s = SectorSpec { mu: m, nu: 0.01, ..sec };
            let v = norm_poly(&h, &s, 512).map_err(|e| e.to_string())?.value;
            ensure(v <= last * (1.0 + 1e-9), || format!("norm increased at mu = {m}: {v} > {last}"))?;
            last = v;
        }
        let ck = c_k(k) / k as f64;
        ensure((ck - 465.0).abs() < 1.0, || format!("C_k/k = {ck}"))?;
        // |h_{l,j}| = K T^{l-1+|j|} with K = T = 1
        for n in 1..=2 {
            let (l_max, j_max) = (12, 3);
            let mut h = TruncatedSeries::zeros(n, 1, l_max, j_max);
            for l in 1..=l_max {
                for j in Basis::get(n, j_max).indices() {
                    h.set(l, j, 0, c(1.0, 0.0)).unwrap();
                }
            }
            let m = verify_borel_bound(&h, 1.0, 1.0, &sec, 512).map_err(|e| e.to_string())?;
            ensure(m.margin >= 0.0, || format!("borel bound margin {:.3e} (k={k}, n={n})", m.margin))?;
            notes.push(format!("{:.0}", m.value));
        }
    }
    Ok(format!("||1|| = 1, monotone in mu, C_k/k = {:.1}, geometric series norms {}", c_k(1), notes.join("/")))
}

fn r1_closed(n: usize, j1: usize, j2: usize) -> bool {
    (j1 == j2 + 1 && j2 <= n) || (j1 > n + 1 && j2 > n)
}

fn crit9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_p: f64 = 0.0;
    let mut worst_real: f64 = 0.0;
    let mut cases = 0;
    for depth in 1..=2 {
        for k in 1..=2 {
            for &theta in &[0.0, PI] {
                // membership scan
                let rs = hopf_resonance_sets(depth, 1.0, 12, theta).map_err(|e| e.to_string())?;
                for j in Basis::get(2, 12).indices() {
                    let (j1, j2) = (j[0] as usize, j[1] as usize);
                    let in1 = rs.contains(0, j).unwrap();
                    let in2 = rs.contains(1, j).unwrap();
                    ensure(in1 == r1_closed(depth, j1, j2) && in2 == r1_closed(depth, j2, j1), || {
                        format!("R(N={depth}) membership at {j:?}")
                    })?;
                }
                for _ in 0..3 {
                    let (l_max, j_max) = (6, 2 * depth + 3);
                    let mut h1 = TruncatedSeries::zeros(2, 1, l_max, j_max);
                    let mut h2 = TruncatedSeries::zeros(2, 1, l_max, j_max);
                    for l in 0..=2 {
                        for j in Basis::get(2, 4).indices() {
                            if j.iter().sum::<u32>() >= 1 || l > 0 {
                                h1.set(l, j, 0, c(rng.gen_range(-0.5..0.5), 0.0)).unwrap();
                                h2.set(l, j, 0, c(rng.gen_range(-0.5..0.5), 0.0)).unwrap();
                            }
                        }
                    }
                    let b = rng.gen_range(0.5..2.0);
                    let prob = HopfProblem { b, k, h1, h2, n_depth: depth };
                    let nf = hopf_normal_form(&prob, theta, l_max, j_max).map_err(|e| e.to_string())?;
                    ensure(nf.p_defect <= 1e-12, || format!("(P) defect {:.3e}", nf.p_defect))?;
                    worst_p = worst_p.max(nf.p_defect);
                    let g = nf.result.g_full().unwrap();
                    for (_, j, i, _) in g.nonzero() {
                        let (j1, j2) = (j[0] as usize, j[1] as usize);
                        let ok = if i == 0 { r1_closed(depth, j1, j2) } else { r1_closed(depth, j2, j1) };
                        ensure(ok, || format!("g_{} has support at {j:?}", i + 1))?;
                    }
                    let sec = SectorSpec::new(theta, 0.5, 0.1, 1.0, k);
                    let sign = if theta == 0.0 { 1.0 } else { -1.0 };
                    let xs: Vec<f64> = (1..=6).map(|i| sign * 0.012 * i as f64).collect();
                    let man = invariant_manifold(&nf.result.phi_full().unwrap(), &sec, &xs, &KsumOptions::default())
                        .map_err(|e| e.to_string())?;
                    ensure(man.realness_defect <= 1e-8, || format!("realness defect {:.3e}", man.realness_defect))?;
                    worst_real = worst_real.max(man.realness_defect);
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} problems, (P) defect {worst_p:.1e}, realness defect {worst_real:.1e}, membership to |j| <= 12"))
}

fn crit10() -> Outcome {
    let (_, xphi, _) = euler_x_phi()?;
    let fit = gevrey_fit(&xphi, 1, 1.0).map_err(|e| e.to_string())?;
    ensure((fit.k_fit - 1.0).abs() <= 0.1 && (fit.t_fit - 1.0).abs() <= 0.1, || {
        format!("Euler fit K = {}, T = {}", fit.k_fit, fit.t_fit)
    })?;
    ensure(!fit.subgeometric, || "Euler flagged as subgeometric".into())?;
    let mut conv = TruncatedSeries::zeros(1, 1, 20, 0);
    for l in 1..=20 {
        conv.set(l, &[0], 0, c(1.0, 0.0)).unwrap();
    }
    let cf = gevrey_fit(&conv, 1, 1.0).map_err(|e| e.to_string())?;
    ensure(cf.subgeometric, || format!("control not subgeometric, ratio exponent {:?}", cf.ratio_exponent))?;
    Ok(format!(
        "Euler K = {:.4}, T = {:.4}; control ratio exponent {:.2}",
        fit.k_fit,
        fit.t_fit,
        cf.ratio_exponent.unwrap_or(f64::NAN)
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("Laplace monomial law", crit1, Duration::from_secs(5)),
        ("convolution Beta law", crit2, Duration::from_secs(10)),
        ("q_1 = 4 pi and convolution bound", crit3, Duration::from_secs(30)),
        ("Euler anchor", crit4, Duration::from_secs(5)),
        ("conjugacy residual", crit5, Duration::from_secs(120)),
        ("Jordan oracle equivalence", crit6, Duration::from_secs(60)),
        ("route equivalence", crit7, Duration::from_secs(120)),
        ("norm-bound suite", crit8, Duration::from_secs(60)),
        ("zero-Hopf suite", crit9, Duration::from_secs(120)),
        ("Gevrey diagnostics", crit10, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if took <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {:.0} s budget", budget.as_secs_f64())),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {status} {:>8.3} s  {name}: {detail}", i + 1, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
