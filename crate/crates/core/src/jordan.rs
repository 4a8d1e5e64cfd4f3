//! Borel-plane coefficient equations for a non-semisimple linear part.
//!
//! With `A = diag(lambda) + r Xi` the slot `(i, j)` couples to `(i+1, j)` and
//! to `(i, j + d_s)` where `d_s = e_s - e_{s+1}`. The equations are solved
//! three ways: by explicit sums over paths, by backward induction over the
//! components, and by a dense linear solve used as an oracle.
//!
//! Borel-plane data are w-polynomials truncated at `M_max`; division by
//! `c - w^k` is the truncated geometric expansion.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{degree, Basis, MultiIndex};
use crate::borel::BorelSeries;
use crate::error::{invalid, Error, Result};
use crate::spectrum::{ResonanceSet, Spectrum};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `d_s = e_s - e_{s+1}` for `1 <= s <= n-1`.
pub fn d_vector(s: usize, n: usize) -> Result<Vec<i64>> {
    if s == 0 || s >= n {
        return invalid(format!("step index s = {s} outside 1..={}", n.saturating_sub(1)));
    }
    let mut d = vec![0; n];
    d[s - 1] = 1;
    d[s] = -1;
    Ok(d)
}

/// `j + d_s` (0-based s) when it stays in N_0^n.
fn raise_step(j: &[u32], s: usize) -> Option<MultiIndex> {
    if j[s + 1] == 0 {
        return None;
    }
    let mut m = j.to_vec();
    m[s] += 1;
    m[s + 1] -= 1;
    Some(m)
}

/// `m - d_s` (0-based s) when it stays in N_0^n.
fn lower_step(m: &[u32], s: usize) -> Option<MultiIndex> {
    if m[s] == 0 {
        return None;
    }
    let mut j = m.to_vec();
    j[s] -= 1;
    j[s + 1] += 1;
    Some(j)
}

/// All `m != j` from which a path of steps reaches `j`. Every member has `|m| = |j|`.
pub fn cone(j: &[u32], n: usize) -> Result<BTreeSet<MultiIndex>> {
    if j.len() != n {
        return Err(Error::Dimension(format!("multi-index of length {} for n = {n}", j.len())));
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![j.to_vec()];
    while let Some(v) = stack.pop() {
        for s in 0..n.saturating_sub(1) {
            if let Some(m) = raise_step(&v, s) {
                if seen.insert(m.clone()) {
                    stack.push(m);
                }
            }
        }
    }
    Ok(seen)
}

/// Paths `(p_1, .., p_l)` (entries 1-based) with `j = m - sum d_{p_s}`,
/// applied in order starting from `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub source: MultiIndex,
    pub target: MultiIndex,
    pub length: usize,
    pub paths: Vec<Vec<usize>>,
}

impl PathSet {
    pub fn is_uniform(&self) -> bool {
        self.paths.iter().all(|p| p.len() == self.length)
    }

    pub fn is_valid(&self) -> bool {
        self.paths.iter().all(|p| {
            let mut v = self.source.clone();
            for &s in p {
                match lower_step(&v, s - 1) {
                    Some(next) => v = next,
                    None => return false,
                }
            }
            v == self.target
        })
    }
}

/// Each step raises `sum_s s m_s` by exactly one, which bounds the search
/// and fixes the path length.
fn potential(m: &[u32]) -> i64 {
    m.iter().enumerate().map(|(s, &v)| s as i64 * v as i64).sum()
}

fn paths_from(m: &[u32], j: &[u32], memo: &mut HashMap<MultiIndex, Vec<Vec<usize>>>) -> Vec<Vec<usize>> {
    if m == j {
        return vec![Vec::new()];
    }
    if let Some(p) = memo.get(m) {
        return p.clone();
    }
    let mut out = Vec::new();
    if potential(m) < potential(j) {
        for s in 0..m.len() - 1 {
            if let Some(next) = lower_step(m, s) {
                for tail in paths_from(&next, j, memo) {
                    let mut p = vec![s + 1];
                    p.extend(tail);
                    out.push(p);
                }
            }
        }
    }
    memo.insert(m.to_vec(), out.clone());
    out
}

pub fn enumerate_paths(m: &[u32], j: &[u32], n: usize) -> Result<PathSet> {
    if m.len() != n || j.len() != n {
        return Err(Error::Dimension(format!("multi-indices of length {}, {} for n = {n}", m.len(), j.len())));
    }
    let paths = if degree(m) == degree(j) && n > 0 {
        paths_from(m, j, &mut HashMap::new())
    } else {
        Vec::new()
    };
    let length = paths.first().map_or(0, |p| p.len());
    Ok(PathSet { source: m.to_vec(), target: j.to_vec(), length, paths })
}

/// `y` with `(c - w^k) y = h` as truncated series, i.e. `y_m = (h_m + y_{m-k}) / c`.
pub fn divide_geometric(h: &[C64], c: C64, k: usize) -> Vec<C64> {
    let mut y = vec![ZERO; h.len()];
    for m in 0..h.len() {
        let prev = if m >= k { y[m - k] } else { ZERO };
        y[m] = (h[m] + prev) / c;
    }
    y
}

/// The T operator at slot `(i, j)`: `-h / (lambda_i - <j, lambda> - w^k)`,
/// or zero on resonant slots where Phi vanishes by construction.
fn t_op(h: &[C64], i: usize, j: &[u32], spec: &Spectrum, rset: &ResonanceSet) -> Result<Vec<C64>> {
    if rset.member(i, j) {
        return Ok(vec![ZERO; h.len()]);
    }
    let c = spec.divisor(i, j);
    if c.norm() == 0.0 {
        if h.iter().all(|v| v.norm() == 0.0) {
            return Ok(h.to_vec());
        }
        return Err(Error::NonResonance(format!("divisor vanishes at w = 0 for slot ({}, {:?})", i + 1, j)));
    }
    Ok(divide_geometric(h, c, spec.k).into_iter().map(|v| -v).collect())
}

/// Largest radius on which every geometric expansion used for the
/// complement of `rset` converges, with the 0.9 safety factor.
pub fn geometric_radius(spec: &Spectrum, rset: &ResonanceSet, j_max: usize) -> f64 {
    let basis = Basis::get(spec.n(), j_max);
    let mut best = f64::INFINITY;
    for j in basis.indices() {
        for i in 0..spec.n() {
            if !rset.member(i, j) {
                best = best.min(0.9 * spec.divisor(i, j).norm().powf(1.0 / spec.k as f64));
            }
        }
    }
    best
}

pub(crate) fn slot_poly(h: &BorelSeries, jid: usize, i: usize) -> Vec<C64> {
    (0..=h.m_max()).map(|m| h.t.get(m, jid, i)).collect()
}

pub(crate) fn set_slot_poly(h: &mut BorelSeries, jid: usize, i: usize, p: &[C64]) {
    for (m, v) in p.iter().enumerate() {
        h.t.set(m, jid, i, *v);
    }
}

fn check_shape(h: &BorelSeries, spec: &Spectrum) -> Result<()> {
    if h.n_vars() != spec.n() || h.n_comps() != spec.n() {
        return Err(Error::Dimension(format!(
            "Borel data with {} variables and {} components for n = {}",
            h.n_vars(),
            h.n_comps(),
            spec.n()
        )));
    }
    Ok(())
}

/// Phi for one component `i` with effective right side `h` (one column),
/// summing the explicit path expansion
/// `Phi_j = T[j] h_j + sum_{m in C(j)} sum_{p in P(m,j)} K .. K T[m] h_m`.
pub fn phi_n_solution(h: &BorelSeries, i: usize, spec: &Spectrum, rset: &ResonanceSet) -> Result<BorelSeries> {
    let n = spec.n();
    if h.n_vars() != n || h.n_comps() != 1 {
        return Err(Error::Dimension("phi_n_solution takes a single component in n variables".into()));
    }
    let basis = h.t.basis.clone();
    let r = C64::new(spec.r, 0.0);
    let mut base: HashMap<MultiIndex, Vec<C64>> = HashMap::new();
    let mut out = BorelSeries::zeros(n, 1, h.m_max(), h.j_max());
    for jid in 0..h.t.n_j() {
        let j = basis.index(jid).clone();
        if rset.member(i, &j) {
            continue;
        }
        let mut total = t_op(&slot_poly(h, jid, 0), i, &j, spec, rset)?;
        let mut memo = HashMap::new();
        for m in cone(&j, n)? {
            let mid = basis.find(&m).expect("same degree as j");
            if !base.contains_key(&m) {
                base.insert(m.clone(), t_op(&slot_poly(h, mid, 0), i, &m, spec, rset)?);
            }
            let start = &base[&m];
            for p in paths_from(&m, &j, &mut memo) {
                let mut v = m.clone();
                let mut y = start.clone();
                for &s in &p {
                    let next = lower_step(&v, s - 1).expect("valid path");
                    // K[i, s, next](y) = -r xi_s (next_s + 1) T[i, next](y)
                    let coef = -r * spec.xi[s - 1] as f64 * (next[s - 1] as f64 + 1.0);
                    y = t_op(&y, i, &next, spec, rset)?.into_iter().map(|t| coef * t).collect();
                    v = next;
                }
                for (a, b) in total.iter_mut().zip(&y) {
                    *a += b;
                }
            }
            memo.clear();
        }
        set_slot_poly(&mut out, jid, 0, &total);
    }
    Ok(out)
}

/// Right side of slot `(i, j)` with the coupling terms moved over:
/// `H_ij + r xi_i Phi_{i+1,j} - r sum_s xi_s (j_s+1) Phi_{i, j+d_s}`.
fn coupled_rhs(h: &BorelSeries, phi: &BorelSeries, i: usize, jid: usize, spec: &Spectrum) -> Vec<C64> {
    let n = spec.n();
    let basis = &h.t.basis;
    let j = basis.index(jid);
    let r = C64::new(spec.r, 0.0);
    let mut acc = slot_poly(h, jid, i);
    if i + 1 < n && spec.xi[i] == 1 {
        for (a, b) in acc.iter_mut().zip(slot_poly(phi, jid, i + 1)) {
            *a += r * b;
        }
    }
    for s in 0..n.saturating_sub(1) {
        if spec.xi[s] == 1 && j[s + 1] >= 1 {
            let up = basis.find(&raise_step(j, s).expect("j_{s+1} >= 1")).expect("same degree");
            let f = r * (j[s] as f64 + 1.0);
            for (a, b) in acc.iter_mut().zip(slot_poly(phi, up, i)) {
                *a -= f * b;
            }
        }
    }
    acc
}

/// `(G, Phi)` solving `LHS(G, Phi) = H` with G on `rset` and Phi on its
/// complement; components are solved from `n` down to 1.
pub fn phi_backward_induction(h: &BorelSeries, spec: &Spectrum, rset: &ResonanceSet) -> Result<(BorelSeries, BorelSeries)> {
    check_shape(h, spec)?;
    let n = spec.n();
    let mut g = BorelSeries::zeros(n, n, h.m_max(), h.j_max());
    let mut phi = BorelSeries::zeros(n, n, h.m_max(), h.j_max());
    for d in 0..=h.j_max() {
        let ids = h.t.basis.degree_block_colex(d);
        for i in (0..n).rev() {
            for &jid in &ids {
                let acc = coupled_rhs(h, &phi, i, jid, spec);
                let j = h.t.basis.index(jid).clone();
                if rset.member(i, &j) {
                    set_slot_poly(&mut g, jid, i, &acc);
                } else {
                    set_slot_poly(&mut phi, jid, i, &t_op(&acc, i, &j, spec, rset)?);
                }
            }
        }
    }
    Ok((g, phi))
}

/// Pointwise values of `(G, Phi)` at a single `w`, using exact division by
/// `c - w^k`. `hvals[jid][i]` holds `H_ij(w)`.
pub fn phi_backward_induction_at(
    hvals: &[Vec<C64>],
    w: C64,
    spec: &Spectrum,
    rset: &ResonanceSet,
    j_max: usize,
) -> Result<(Vec<Vec<C64>>, Vec<Vec<C64>>)> {
    let n = spec.n();
    let basis = Basis::get(n, j_max);
    if hvals.len() != basis.len() || hvals.iter().any(|v| v.len() != n) {
        return Err(Error::Dimension("pointwise data must have one row of n values per multi-index".into()));
    }
    let r = C64::new(spec.r, 0.0);
    let wk = w.powu(spec.k as u32);
    let mut g = vec![vec![ZERO; n]; basis.len()];
    let mut phi = vec![vec![ZERO; n]; basis.len()];
    for d in 0..=j_max {
        let ids = basis.degree_block_colex(d);
        for i in (0..n).rev() {
            for &jid in &ids {
                let j = basis.index(jid);
                let mut acc = hvals[jid][i];
                if i + 1 < n && spec.xi[i] == 1 {
                    acc += r * phi[jid][i + 1];
                }
                for s in 0..n.saturating_sub(1) {
                    if spec.xi[s] == 1 && j[s + 1] >= 1 {
                        let up = basis.find(&raise_step(j, s).expect("j_{s+1} >= 1")).expect("same degree");
                        acc -= r * (j[s] as f64 + 1.0) * phi[up][i];
                    }
                }
                if rset.member(i, j) {
                    g[jid][i] = acc;
                } else {
                    let c = spec.divisor(i, j) - wk;
                    if c.norm() == 0.0 {
                        return Err(Error::NonResonance(format!("divisor vanishes at w = {w} for slot ({}, {:?})", i + 1, j)));
                    }
                    phi[jid][i] = -acc / c;
                }
            }
        }
    }
    Ok((g, phi))
}

/// Brute-force solve of the slot equations, one linear system per
/// `(|j|, m)` block. Unknowns are `G_ij` on `rset` and `Phi_ij` elsewhere.
pub fn dense_oracle(h: &BorelSeries, spec: &Spectrum, rset: &ResonanceSet) -> Result<(BorelSeries, BorelSeries)> {
    check_shape(h, spec)?;
    let n = spec.n();
    let k = spec.k;
    let basis = h.t.basis.clone();
    let r = C64::new(spec.r, 0.0);
    let mut g = BorelSeries::zeros(n, n, h.m_max(), h.j_max());
    let mut phi = BorelSeries::zeros(n, n, h.m_max(), h.j_max());
    for d in 0..=h.j_max() {
        let ids = basis.degree_block_colex(d);
        let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(p, &id)| (id, p)).collect();
        let size = n * ids.len();
        let var = |i: usize, p: usize| i * ids.len() + p;
        for m in 0..=h.m_max() {
            let mut a = DMatrix::<C64>::zeros(size, size);
            let mut b = DVector::<C64>::zeros(size);
            for i in 0..n {
                for (p, &jid) in ids.iter().enumerate() {
                    let j = basis.index(jid);
                    let row = var(i, p);
                    b[row] = h.t.get(m, jid, i);
                    if rset.member(i, j) {
                        a[(row, row)] = C64::new(1.0, 0.0);
                    } else {
                        a[(row, row)] = -spec.divisor(i, j);
                        // + w^k Phi_ij moves the known lower coefficient to the right
                        if m >= k {
                            b[row] -= phi.t.get(m - k, jid, i);
                        }
                    }
                    // - (A Phi)_i off-diagonal part: - r xi_i Phi_{i+1,j}
                    if i + 1 < n && spec.xi[i] == 1 && !rset.member(i + 1, j) {
                        a[(row, var(i + 1, p))] -= r;
                    }
                    // + (Phi_z A z) off-diagonal part: r xi_s (j_s+1) Phi_{i, j+d_s}
                    for s in 0..n.saturating_sub(1) {
                        if spec.xi[s] == 1 {
                            if let Some(up) = raise_step(j, s) {
                                if !rset.member(i, &up) {
                                    let col = var(i, pos[&basis.find(&up).expect("same degree")]);
                                    a[(row, col)] += r * (j[s] as f64 + 1.0);
                                }
                            }
                        }
                    }
                }
            }
            let x = a.lu().solve(&b).ok_or_else(|| {
                Error::NonResonance(format!("singular slot system at |j| = {d}, m = {m}; check the resonance set"))
            })?;
            for i in 0..n {
                for (p, &jid) in ids.iter().enumerate() {
                    let v = x[var(i, p)];
                    if rset.member(i, basis.index(jid)) {
                        g.t.set(m, jid, i, v);
                    } else {
                        phi.t.set(m, jid, i, v);
                    }
                }
            }
        }
    }
    Ok((g, phi))
}
