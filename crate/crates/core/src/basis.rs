//! Graded enumeration of multi-indices.
//!
//! All multi-indices `j` in `n` variables with `|j| <= j_max` are listed
//! degree by degree. Because the listing for `j_max` is a prefix of the
//! listing for any larger bound, tables of different truncation share
//! indices and only the length differs.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Multi-index in N0^n.
pub type MultiIndex = Vec<u32>;

/// Total degree |j|.
pub fn degree(j: &[u32]) -> usize {
    j.iter().map(|&v| v as usize).sum()
}

/// Colexicographic comparison: `m < j` when the last differing component
/// of `m` is smaller. With this order `j + d_s < j` for every Jordan step.
pub fn colex_cmp(m: &[u32], j: &[u32]) -> std::cmp::Ordering {
    for (a, b) in m.iter().rev().zip(j.iter().rev()) {
        match a.cmp(b) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

#[derive(Debug)]
pub struct Basis {
    n: usize,
    j_max: usize,
    indices: Vec<MultiIndex>,
    /// `degree_end[d]` = number of indices with degree <= d.
    degree_end: Vec<usize>,
    lookup: HashMap<MultiIndex, usize>,
    /// Row-major `len x len` table of the index of `a + b`, `u32::MAX` when
    /// the sum leaves the basis.
    sum_table: Vec<u32>,
    /// `lower[q][id]` = index of `j - e_q`, `u32::MAX` when `j_q = 0`.
    lower: Vec<Vec<u32>>,
    /// `raise[q][id]` = index of `j + e_q`, `u32::MAX` when outside.
    raise: Vec<Vec<u32>>,
}

const NONE: u32 = u32::MAX;

fn compositions(n: usize, d: usize, out: &mut Vec<MultiIndex>) {
    // all j with |j| = d, first component descending
    fn rec(prefix: &mut Vec<u32>, n: usize, left: usize, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == n {
            prefix.push(left as u32);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in (0..=left).rev() {
            prefix.push(v as u32);
            rec(prefix, n, left - v, out);
            prefix.pop();
        }
    }
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return;
    }
    rec(&mut Vec::with_capacity(n), n, d, out);
}

impl Basis {
    fn build(n: usize, j_max: usize) -> Basis {
        let mut indices = Vec::new();
        let mut degree_end = Vec::with_capacity(j_max + 1);
        for d in 0..=j_max {
            compositions(n, d, &mut indices);
            degree_end.push(indices.len());
        }
        let lookup: HashMap<MultiIndex, usize> =
            indices.iter().enumerate().map(|(i, j)| (j.clone(), i)).collect();
        let len = indices.len();
        let mut sum_table = vec![NONE; len * len];
        for a in 0..len {
            let da = degree(&indices[a]);
            for b in 0..degree_end[j_max - da] {
                let s: MultiIndex = indices[a].iter().zip(&indices[b]).map(|(x, y)| x + y).collect();
                sum_table[a * len + b] = lookup[&s] as u32;
            }
        }
        let mut lower = vec![vec![NONE; len]; n];
        let mut raise = vec![vec![NONE; len]; n];
        for (id, j) in indices.iter().enumerate() {
            for q in 0..n {
                if j[q] > 0 {
                    let mut m = j.clone();
                    m[q] -= 1;
                    lower[q][id] = lookup[&m] as u32;
                }
                let mut m = j.clone();
                m[q] += 1;
                if let Some(&r) = lookup.get(&m) {
                    raise[q][id] = r as u32;
                }
            }
        }
        Basis { n, j_max, indices, degree_end, lookup, sum_table, lower, raise }
    }

    /// Shared basis for `n` variables up to total degree `j_max`.
    pub fn get(n: usize, j_max: usize) -> Arc<Basis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((n, j_max))
            .or_insert_with(|| Arc::new(Basis::build(n, j_max)))
            .clone()
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of indices with degree <= d (clamped to the basis).
    pub fn len_up_to(&self, d: usize) -> usize {
        self.degree_end[d.min(self.j_max)]
    }

    pub fn index(&self, id: usize) -> &MultiIndex {
        &self.indices[id]
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn degree_of(&self, id: usize) -> usize {
        degree(&self.indices[id])
    }

    pub fn find(&self, j: &[u32]) -> Option<usize> {
        self.lookup.get(j).copied()
    }

    /// Index of `a + b` if it lies within the basis.
    #[inline]
    pub fn sum(&self, a: usize, b: usize) -> Option<usize> {
        let v = self.sum_table[a * self.len() + b];
        (v != NONE).then_some(v as usize)
    }

    /// Index of `j - e_q`.
    #[inline]
    pub fn lower(&self, q: usize, id: usize) -> Option<usize> {
        let v = self.lower[q][id];
        (v != NONE).then_some(v as usize)
    }

    /// Index of `j + e_q`.
    #[inline]
    pub fn raise(&self, q: usize, id: usize) -> Option<usize> {
        let v = self.raise[q][id];
        (v != NONE).then_some(v as usize)
    }

    /// Ids of degree exactly d, sorted ascending in the colex order.
    pub fn degree_block_colex(&self, d: usize) -> Vec<usize> {
        let start = if d == 0 { 0 } else { self.degree_end[d - 1] };
        let mut ids: Vec<usize> = (start..self.degree_end[d]).collect();
        ids.sort_by(|&a, &b| colex_cmp(&self.indices[a], &self.indices[b]));
        ids
    }
}
