//! Canonical correlation between the response and small covariate subsets,
//! and the neighbourhood subsets each covariate is scored over.
//!
//! Covariate indices are 0-based; in a joint correlation matrix covariate
//! `j` sits at row/column `j + 1` and the response at 0.

use ndarray::{Array1, Array2};

use crate::linalg::{inverse_quadratic_form, symmetric_eigen};
use crate::rank_corr::{psd_project, CorrelationEstimate};
use crate::{Result, Scalar, ScreenError};

/// A set of distinct covariate indices kept in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    members: Vec<usize>,
}

impl SubsetIndex {
    /// Sorts the members; errors on duplicates or an empty set.
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.is_empty() {
            return Err(ScreenError::Config(
                "covariate subset must be non-empty".into(),
            ));
        }
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(ScreenError::Config(format!(
                "duplicate covariate in subset {members:?}"
            )));
        }
        Ok(Self { members })
    }

    pub fn singleton(i: usize) -> Self {
        Self { members: vec![i] }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Same subset after mapping every member through `f`.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut members: Vec<usize> = self.members.iter().map(|&m| f(m)).collect();
        members.sort_unstable();
        Self { members }
    }
}

impl std::fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|m| m.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Subset size `k` and neighbourhood radius `k_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodConfig {
    pub k: usize,
    pub k_n: usize,
}

impl NeighborhoodConfig {
    pub fn new(k: usize, k_n: usize) -> Result<Self> {
        if k == 0 || k_n == 0 {
            return Err(ScreenError::Config(format!(
                "neighbourhood needs k >= 1 and k_n >= 1, got k = {k}, k_n = {k_n}"
            )));
        }
        Ok(Self { k, k_n })
    }
}

/// `sqrt(Ŝ_IJ Ŝ_JJ⁻¹ Ŝ_IJᵀ)` with the response as `I`.
///
/// The `J × J` block is repaired with [`psd_project`] when its smallest
/// eigenvalue is below `ridge` (or not positive). The squared value is
/// clamped into `[0, 1]` before the square root.
pub fn canonical_correlation<F: Scalar>(
    s: &CorrelationEstimate<F>,
    subset: &SubsetIndex,
    ridge: F,
) -> Result<F> {
    let p = s.dim().saturating_sub(1);
    if let Some(&bad) = subset.members().iter().find(|&&m| m >= p) {
        return Err(ScreenError::Config(format!(
            "covariate index {bad} out of range for {p} covariates"
        )));
    }
    let k = subset.len();
    let cross = Array1::from_iter(subset.members().iter().map(|&m| s.get(0, m + 1)));
    let mut block = Array2::<F>::zeros((k, k));
    for (a, &ma) in subset.members().iter().enumerate() {
        for (b, &mb) in subset.members().iter().enumerate() {
            block[[a, b]] = s.get(ma + 1, mb + 1);
        }
    }

    let block = if k == 1 {
        if block[[0, 0]] >= ridge && block[[0, 0]] > F::zero() {
            block
        } else {
            psd_project(block.view(), ridge)?
        }
    } else {
        let eig = symmetric_eigen(block.view()).ok_or_else(|| {
            ScreenError::Numeric(format!("eigendecomposition failed for subset {subset}"))
        })?;
        let min = eig.min_value();
        if min >= ridge && min > F::zero() {
            block
        } else {
            psd_project(block.view(), ridge)?
        }
    };

    let q = inverse_quadratic_form(block.view(), cross.view()).ok_or_else(|| {
        ScreenError::Numeric(format!(
            "covariate block for subset {subset} is singular after repair (ridge = {ridge})"
        ))
    })?;
    if q.is_nan() {
        return Err(ScreenError::Numeric(format!(
            "canonical correlation for subset {subset} is NaN"
        )));
    }
    Ok(q.max(F::zero()).min(F::one()).sqrt())
}

/// All size-`k` subsets containing `i` whose other members lie within
/// `k_n` of `i` (and inside `0..p`), in lexicographic order.
pub fn enumerate_neighborhood_sets(
    i: usize,
    p: usize,
    config: NeighborhoodConfig,
) -> Result<Vec<SubsetIndex>> {
    let NeighborhoodConfig { k, k_n } = config;
    if i >= p {
        return Err(ScreenError::Config(format!(
            "covariate {i} out of range for {p} covariates"
        )));
    }
    if k == 0 || k_n == 0 {
        return Err(ScreenError::Config("k and k_n must be at least 1".into()));
    }
    if k > 1 + (2 * k_n).min(p - 1) {
        return Err(ScreenError::Config(format!(
            "subset size k = {k} exceeds 1 + min(2 k_n, p - 1) = {} (k_n = {k_n}, p = {p})",
            1 + (2 * k_n).min(p - 1)
        )));
    }
    let lo = i.saturating_sub(k_n);
    let hi = (i + k_n).min(p - 1);
    let window: Vec<usize> = (lo..=hi).filter(|&j| j != i).collect();
    if window.len() < k - 1 {
        return Err(ScreenError::Config(format!(
            "covariate {i} has only {} neighbour(s) within k_n = {k_n}; cannot form subsets of size {k}",
            window.len()
        )));
    }
    let mut out: Vec<SubsetIndex> = combinations(&window, k - 1)
        .into_iter()
        .map(|mut c| {
            c.push(i);
            c.sort_unstable();
            SubsetIndex { members: c }
        })
        .collect();
    out.sort();
    Ok(out)
}

fn combinations(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    if r > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.iter().map(|&j| items[j]).collect());
        let Some(pos) = (0..r).rev().find(|&t| idx[t] != t + n - r) else {
            return out;
        };
        idx[pos] += 1;
        for t in (pos + 1)..r {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Largest canonical correlation over covariate `i`'s neighbourhood
/// subsets; ties keep the lexicographically smallest subset.
pub fn max_cc_score<F: Scalar>(
    i: usize,
    s: &CorrelationEstimate<F>,
    config: NeighborhoodConfig,
    ridge: F,
) -> Result<(F, SubsetIndex)> {
    let p = s.dim().saturating_sub(1);
    let mut best: Option<(F, SubsetIndex)> = None;
    for subset in enumerate_neighborhood_sets(i, p, config)? {
        let rho = canonical_correlation(s, &subset, ridge)?;
        match &best {
            Some((b, _)) if rho <= *b => {}
            _ => best = Some((rho, subset)),
        }
    }
    Ok(best.expect("enumeration yields at least one subset"))
}
