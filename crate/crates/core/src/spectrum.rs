//! Eigenvalue data, resonance sets and the sector condition on divisors.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::basis::{degree, Basis, MultiIndex};
use crate::error::{invalid, Error, Result};
use crate::sector::{angular_distance, distance_to_ray, wrap_angle, SectorSpec};

/// Linear part `A = Lambda + r Xi` in Jordan form with rank `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub lambda: Vec<C64>,
    /// Superdiagonal flags, length n - 1.
    pub xi: Vec<u8>,
    pub k: usize,
    pub r: f64,
}

const EIG_TOL: f64 = 1e-12;

impl Spectrum {
    pub fn new(lambda: Vec<C64>, xi: Vec<u8>, k: usize, r: f64) -> Result<Self> {
        let s = Spectrum { lambda, xi, k, r };
        s.validate()?;
        Ok(s)
    }

    /// Diagonal spectrum with r = 1.
    pub fn diagonal(lambda: Vec<C64>, k: usize) -> Result<Self> {
        let n = lambda.len();
        Self::new(lambda, vec![0; n.saturating_sub(1)], k, 1.0)
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_semisimple(&self) -> bool {
        self.xi.iter().all(|&x| x == 0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return invalid("dimension n must be >= 1");
        }
        if self.k == 0 {
            return invalid("rank k must be >= 1");
        }
        if self.xi.len() != n - 1 {
            return invalid(format!("xi has {} flags, expected {}", self.xi.len(), n - 1));
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return invalid(format!("Jordan scale r = {} must be positive", self.r));
        }
        for (i, l) in self.lambda.iter().enumerate() {
            if !l.re.is_finite() || !l.im.is_finite() || l.norm() == 0.0 {
                return invalid(format!("eigenvalue lambda_{} must be finite and nonzero", i + 1));
            }
        }
        for (i, &x) in self.xi.iter().enumerate() {
            match x {
                0 => {}
                1 => {
                    let (a, b) = (self.lambda[i], self.lambda[i + 1]);
                    if (a - b).norm() > EIG_TOL * a.norm().max(1.0) {
                        return invalid(format!("xi_{} = 1 needs lambda_{} = lambda_{}", i + 1, i + 1, i + 2));
                    }
                }
                _ => return invalid(format!("xi_{} must be 0 or 1", i + 1)),
            }
        }
        Ok(())
    }

    /// `lambda_i - <j, lambda>` (0-based i).
    pub fn divisor(&self, i: usize, j: &[u32]) -> C64 {
        let dot: C64 = j.iter().zip(&self.lambda).map(|(&e, l)| l * e as f64).sum();
        self.lambda[i] - dot
    }

    /// Entry (row, col) of A = Lambda + r Xi.
    pub fn a_entry(&self, row: usize, col: usize) -> C64 {
        if row == col {
            self.lambda[row]
        } else if col == row + 1 && self.xi[row] == 1 {
            C64::new(self.r, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.lambda.clone(), self.xi.clone(), self.k, r)
    }
}

/// Finite resonance set with its constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceSet {
    pub n: usize,
    pub j_max: usize,
    pub pairs: BTreeSet<(usize, MultiIndex)>,
    pub c: f64,
    pub theta: f64,
    pub sector_margin: f64,
}

/// Outcome of the sector condition check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorCheck {
    pub holds: bool,
    /// Smallest angular distance from a non-member divisor to the ray
    /// k*theta; `None` when every slot is a member.
    pub min_angle: Option<f64>,
}

/// Constants bounding the divisors `lambda_i - <j,lambda> - w^k` on Omega.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorBound {
    /// min over non-members of (1+|j|) |divisor - w^k|.
    pub lower: f64,
    /// max over non-members of (1+|j|) / |divisor - w^k|; the constant in
    /// `|T[i,j] h| <= K/(1+|j|) |h|`.
    pub inverse: f64,
    pub worst: (usize, MultiIndex),
}

impl ResonanceSet {
    /// Set with explicit pairs; the constants are recomputed from the
    /// complement.
    pub fn from_pairs(spec: &Spectrum, pairs: BTreeSet<(usize, MultiIndex)>, j_max: usize, theta: f64) -> Result<Self> {
        let n = spec.n();
        for (i, j) in &pairs {
            if *i >= n || j.len() != n {
                return invalid(format!("pair ({}, {:?}) does not fit n = {n}", i + 1, j));
            }
            if degree(j) > j_max {
                return Err(Error::Truncation(format!("pair ({}, {:?}) beyond J_max = {j_max}", i + 1, j)));
            }
        }
        let mut set = ResonanceSet { n, j_max, pairs, c: 0.0, theta, sector_margin: 0.0 };
        set.c = set.complement_constant(spec);
        set.sector_margin = set.default_margin(spec, theta);
        Ok(set)
    }

    /// Membership; indices beyond J_max are an error.
    pub fn contains(&self, i: usize, j: &[u32]) -> Result<bool> {
        if degree(j) > self.j_max {
            return Err(Error::Truncation(format!("|j| = {} beyond J_max = {}", degree(j), self.j_max)));
        }
        Ok(self.pairs.contains(&(i, j.to_vec())))
    }

    pub(crate) fn member(&self, i: usize, j: &[u32]) -> bool {
        self.pairs.contains(&(i, j.to_vec()))
    }

    fn complement(&self) -> impl Iterator<Item = (usize, MultiIndex)> + '_ {
        let basis = Basis::get(self.n, self.j_max);
        let all: Vec<(usize, MultiIndex)> =
            (0..self.n).flat_map(|i| basis.indices().iter().map(move |j| (i, j.clone()))).collect();
        all.into_iter().filter(|(i, j)| !self.member(*i, j))
    }

    /// Largest C with |divisor| >= C (1+|j|) on the complement.
    fn complement_constant(&self, spec: &Spectrum) -> f64 {
        self.complement()
            .map(|(i, j)| spec.divisor(i, &j).norm() / (1.0 + degree(&j) as f64))
            .fold(f64::INFINITY, f64::min)
    }

    fn min_angle(&self, spec: &Spectrum, theta: f64) -> Option<f64> {
        let ray = spec.k as f64 * theta;
        self.complement().map(|(i, j)| angular_distance(spec.divisor(i, &j), ray)).reduce(f64::min)
    }

    fn default_margin(&self, spec: &Spectrum, theta: f64) -> f64 {
        self.min_angle(spec, theta).map_or(PI, |a| a / 2.0)
    }

    /// Replace the direction and reset the margin to its default.
    pub fn with_theta(mut self, spec: &Spectrum, theta: f64) -> Self {
        self.theta = theta;
        self.sector_margin = self.default_margin(spec, theta);
        self
    }

    /// True when the pairs are closed under the Jordan couplings.
    pub fn is_jordan_closed(&self, spec: &Spectrum) -> bool {
        self.pairs.iter().all(|(i, j)| jordan_successors(spec, *i, j, self.j_max).iter().all(|p| self.pairs.contains(p)))
    }

    /// Every exact resonance in the box is a member.
    pub fn contains_exact_resonances(&self, spec: &Spectrum) -> bool {
        self.complement().all(|(i, j)| !is_exact_resonance(spec, i, &j))
    }
}

fn is_exact_resonance(spec: &Spectrum, i: usize, j: &[u32]) -> bool {
    let scale = spec.lambda.iter().map(|l| l.norm()).fold(0.0, f64::max) * (1.0 + degree(j) as f64);
    spec.divisor(i, j).norm() <= EIG_TOL * scale
}

fn jordan_successors(spec: &Spectrum, i: usize, j: &[u32], j_max: usize) -> Vec<(usize, MultiIndex)> {
    let mut out = Vec::new();
    let n = spec.n();
    if i + 1 < n && spec.xi[i] == 1 {
        out.push((i + 1, j.to_vec()));
    }
    for s in 0..n.saturating_sub(1) {
        if spec.xi[s] == 1 && j[s + 1] >= 1 {
            let mut m = j.to_vec();
            m[s] += 1;
            m[s + 1] -= 1;
            if degree(&m) <= j_max {
                out.push((i, m));
            }
        }
    }
    out
}

/// Smallest Jordan-closed set containing every (i, j) with |j| <= J_max
/// and |divisor| < C (1+|j|), plus every exact resonance.
pub fn minimal_resonance_set(spec: &Spectrum, c: f64, j_max: usize) -> Result<ResonanceSet> {
    if !(c > 0.0) {
        return invalid(format!("constant C = {c} must be positive"));
    }
    let basis = Basis::get(spec.n(), j_max);
    let mut pairs = BTreeSet::new();
    for i in 0..spec.n() {
        for j in basis.indices() {
            let d = spec.divisor(i, j);
            if d.norm() < c * (1.0 + degree(j) as f64) || is_exact_resonance(spec, i, j) {
                pairs.insert((i, j.clone()));
            }
        }
    }
    let mut stack: Vec<(usize, MultiIndex)> = pairs.iter().cloned().collect();
    while let Some((i, j)) = stack.pop() {
        for p in jordan_successors(spec, i, &j, j_max) {
            if pairs.insert(p.clone()) {
                stack.push(p);
            }
        }
    }
    ResonanceSet::from_pairs(spec, pairs, j_max, 0.0)
}

/// Is every non-member divisor outside S(k theta, sector_margin)?
pub fn check_sector_condition(rset: &ResonanceSet, spec: &Spectrum, theta: f64) -> SectorCheck {
    match rset.min_angle(spec, theta) {
        None => SectorCheck { holds: true, min_angle: None },
        Some(a) => SectorCheck { holds: a > 0.0 && a >= rset.sector_margin / 2.0, min_angle: Some(a) },
    }
}

/// Bound `|lambda_i - <j,lambda> - w^k|` from below on Omega(nu, theta, alpha)
/// for every non-member with |j| <= J_max.
///
/// The image of Omega under w -> w^k is the disk of radius nu^k together
/// with the sector of opening k*alpha around k*theta, so distances are
/// computed from that geometry directly.
pub fn divisor_lower_bound(rset: &ResonanceSet, spec: &Spectrum, sec: &SectorSpec) -> Result<DivisorBound> {
    let k = spec.k as f64;
    let nu_k = sec.nu.powf(k);
    let center = k * sec.theta;
    let half = k * sec.alpha / 2.0;
    let mut lower = f64::INFINITY;
    let mut inverse: f64 = 0.0;
    let mut worst = (0, vec![0; spec.n()]);
    for (i, j) in rset.complement() {
        let c = spec.divisor(i, &j);
        let disk = (c.norm() - nu_k).max(0.0);
        let sector = if half >= PI || wrap_angle(c.arg() - center).abs() <= half {
            0.0
        } else {
            distance_to_ray(c, center + half).min(distance_to_ray(c, center - half))
        };
        let dist = disk.min(sector);
        if dist <= 0.0 {
            return Err(Error::NonResonance(format!(
                "divisor of slot ({}, {:?}) meets the image of Omega",
                i + 1,
                j
            )));
        }
        let w = 1.0 + degree(&j) as f64;
        lower = lower.min(w * dist);
        if w / dist > inverse {
            inverse = w / dist;
            worst = (i, j.clone());
        }
    }
    Ok(DivisorBound { lower, inverse, worst })
}

/// r = 1/(2 K (n-1)) for a Jordan spectrum, 1 when semi-simple.
pub fn default_r(spec: &Spectrum, bound: &DivisorBound) -> f64 {
    if spec.is_semisimple() || spec.n() < 2 {
        1.0
    } else {
        1.0 / (2.0 * bound.inverse * (spec.n() - 1) as f64)
    }
}
