//! Problem files: the serde model of a normal-form problem and its
//! validation into solver inputs.
//!
//! `f` is given in the coordinates where `A = Lambda + Xi` (ones on the
//! superdiagonal where `xi_i = 1`). The solver works with `A = Lambda + r Xi`
//! and rescales `f` accordingly; `r` defaults to `1/(2K(n-1))` from the
//! divisor bound.

use std::collections::BTreeSet;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hopf::{check_theta, complexify, enforce_property_p, hopf_resonance_sets, HopfProblem};
use crate::sector::SectorSpec;
use crate::series::{CoeffRecord, TruncatedSeries};
use crate::spectrum::{default_r, divisor_lower_bound, minimal_resonance_set, ResonanceSet, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexRecord {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexRecord> for C64 {
    fn from(c: ComplexRecord) -> C64 {
        C64::new(c.re, c.im)
    }
}

impl From<C64> for ComplexRecord {
    fn from(c: C64) -> Self {
        ComplexRecord { re: c.re, im: c.im }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(rename = "L_max")]
    pub l_max: usize,
    #[serde(rename = "J_max")]
    pub j_max: usize,
    /// Borel-plane w-degree; defaults to `L_max - 1`.
    #[serde(rename = "M_max", default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRecord {
    /// 1-based component.
    pub i: usize,
    pub j: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResonanceBlock {
    /// Smallest Jordan-closed set containing all `|divisor| < C (1+|j|)`.
    Constant {
        #[serde(rename = "C")]
        c: f64,
    },
    Pairs { pairs: Vec<PairRecord> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorBlock {
    pub theta: f64,
    pub alpha: f64,
    pub nu: f64,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfBlock {
    pub b: f64,
    #[serde(rename = "N")]
    pub depth: usize,
    /// Real coefficients of h_1(x, u_1, u_2); `i` must be 1.
    #[serde(default)]
    pub h1: Vec<CoeffRecord>,
    #[serde(default)]
    pub h2: Vec<CoeffRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub k: usize,
    #[serde(default)]
    pub lambda: Vec<ComplexRecord>,
    #[serde(default)]
    pub xi: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default)]
    pub f: Vec<CoeffRecord>,
    pub truncation: Truncation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<ResonanceBlock>,
    pub sector: SectorBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopf: Option<HopfBlock>,
}

/// A validated problem ready for the solvers.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spectrum: Spectrum,
    pub rset: ResonanceSet,
    /// Nonlinearity in the working coordinates (`A = Lambda + r Xi`).
    pub f: TruncatedSeries,
    pub l_max: usize,
    pub j_max: usize,
    pub m_max: usize,
    pub sector: SectorSpec,
    pub hopf: Option<HopfProblem>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("problem file: {e}")))
    }

    pub fn build(&self) -> Result<Problem> {
        let t = self.truncation;
        if t.l_max == 0 {
            return invalid("L_max must be at least 1");
        }
        let m_max = t.m_max.unwrap_or(t.l_max - 1);
        let sector = SectorSpec::new(self.sector.theta, self.sector.alpha, self.sector.nu, self.sector.mu, self.k);
        sector.validate()?;
        if let Some(h) = &self.hopf {
            return self.build_hopf(h, sector, m_max);
        }
        let n = self.lambda.len();
        if let Some(declared) = self.n {
            if declared != n {
                return Err(Error::Dimension(format!("n = {declared} but lambda has {n} entries")));
            }
        }
        let lambda: Vec<C64> = self.lambda.iter().map(|&c| c.into()).collect();
        let xi = if self.xi.is_empty() && n > 0 { vec![0; n - 1] } else { self.xi.clone() };
        let unit = Spectrum::new(lambda, xi, self.k, 1.0)?;
        let rset = match &self.resonance {
            None => return invalid("a resonance block ({\"C\": ..} or {\"pairs\": [..]}) is required"),
            Some(ResonanceBlock::Constant { c }) => {
                minimal_resonance_set(&unit, *c, t.j_max)?.with_theta(&unit, sector.theta)
            }
            Some(ResonanceBlock::Pairs { pairs }) => {
                let mut set = BTreeSet::new();
                for p in pairs {
                    if p.i == 0 || p.i > n {
                        return invalid(format!("resonant pair component {} outside 1..={n}", p.i));
                    }
                    set.insert((p.i - 1, p.j.clone()));
                }
                ResonanceSet::from_pairs(&unit, set, t.j_max, sector.theta)?
            }
        };
        let r = match self.r {
            Some(r) => r,
            None if unit.is_semisimple() => 1.0,
            None => default_r(&unit, &divisor_lower_bound(&rset, &unit, &sector)?),
        };
        let spectrum = unit.with_r(r)?;
        let f = TruncatedSeries::from_records(&self.f, n, n, t.l_max, t.j_max)?;
        let f = if spectrum.is_semisimple() { f } else { f.jordan_rescale(r)? };
        Ok(Problem { spectrum, rset, f, l_max: t.l_max, j_max: t.j_max, m_max, sector, hopf: None })
    }

    fn build_hopf(&self, h: &HopfBlock, sector: SectorSpec, m_max: usize) -> Result<Problem> {
        let t = self.truncation;
        if !self.lambda.is_empty() || !self.f.is_empty() || self.resonance.is_some() {
            return invalid("a hopf problem derives lambda, f and the resonance set from the hopf block");
        }
        for r in h.h1.iter().chain(&h.h2) {
            if r.i != 1 {
                return invalid(format!("hopf records are scalar (i = 1), got i = {}", r.i));
            }
        }
        let problem = HopfProblem {
            b: h.b,
            k: self.k,
            h1: TruncatedSeries::from_records(&h.h1, 2, 1, t.l_max, t.j_max)?,
            h2: TruncatedSeries::from_records(&h.h2, 2, 1, t.l_max, t.j_max)?,
            n_depth: h.depth,
        };
        problem.validate()?;
        check_theta(sector.theta)?;
        let spectrum = problem.spectrum()?;
        let rset = hopf_resonance_sets(h.depth, h.b, t.j_max, sector.theta)?;
        let f = enforce_property_p(&complexify(&problem.h1, &problem.h2)?, 1e-12)?;
        Ok(Problem { spectrum, rset, f, l_max: t.l_max, j_max: t.j_max, m_max, sector, hopf: Some(problem) })
    }
}
