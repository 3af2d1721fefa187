//! Screening scores (CCH, CCK, SIS, RRCS) and selection rules.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView1;
use rayon::prelude::*;

use crate::cancorr::{max_cc_score, NeighborhoodConfig, SubsetIndex};
use crate::rank_corr::{
    kendall_tau_matrix, kendall_tau_with, pearson_matrix, sine_transform, CorrelationEstimate,
    KendallAlgorithm,
};
use crate::{DataMatrix, Result, Scalar, ScreenError, DEFAULT_RIDGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Canonical correlation on the Kendall-sine matrix.
    Cch,
    /// Canonical correlation on the Pearson matrix.
    Cck,
    /// Marginal Pearson correlation.
    Sis,
    /// Marginal Kendall's tau.
    Rrcs,
}

impl Method {
    pub fn uses_neighborhood(self) -> bool {
        matches!(self, Method::Cch | Method::Cck)
    }

    pub fn uses_pearson(self) -> bool {
        matches!(self, Method::Cck | Method::Sis)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cch => "cch",
            Method::Cck => "cck",
            Method::Sis => "sis",
            Method::Rrcs => "rrcs",
        })
    }
}

impl FromStr for Method {
    type Err = ScreenError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cch" => Ok(Method::Cch),
            "cck" => Ok(Method::Cck),
            "sis" => Ok(Method::Sis),
            "rrcs" => Ok(Method::Rrcs),
            other => Err(ScreenError::Config(format!(
                "unknown method `{other}` (expected cch, cck, sis or rrcs)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreeningConfig {
    pub method: Method,
    /// Required by CCH and CCK, ignored by SIS and RRCS.
    pub neighborhood: Option<NeighborhoodConfig>,
    pub ridge: f64,
}

impl ScreeningConfig {
    pub fn new(
        method: Method,
        neighborhood: Option<NeighborhoodConfig>,
        ridge: f64,
    ) -> Result<Self> {
        if method.uses_neighborhood() && neighborhood.is_none() {
            return Err(ScreenError::Config(format!(
                "method {method} needs k and k_n"
            )));
        }
        if !(ridge >= 0.0) || !ridge.is_finite() {
            return Err(ScreenError::Config(format!(
                "ridge must be nonnegative, got {ridge}"
            )));
        }
        let neighborhood = if method.uses_neighborhood() {
            neighborhood
        } else {
            None
        };
        Ok(Self {
            method,
            neighborhood,
            ridge,
        })
    }

    pub fn cch(k: usize, k_n: usize) -> Result<Self> {
        Self::new(
            Method::Cch,
            Some(NeighborhoodConfig::new(k, k_n)?),
            DEFAULT_RIDGE,
        )
    }

    pub fn cck(k: usize, k_n: usize) -> Result<Self> {
        Self::new(
            Method::Cck,
            Some(NeighborhoodConfig::new(k, k_n)?),
            DEFAULT_RIDGE,
        )
    }

    pub fn sis() -> Self {
        Self {
            method: Method::Sis,
            neighborhood: None,
            ridge: DEFAULT_RIDGE,
        }
    }

    pub fn rrcs() -> Self {
        Self {
            method: Method::Rrcs,
            neighborhood: None,
            ridge: DEFAULT_RIDGE,
        }
    }

    pub fn with_ridge(self, ridge: f64) -> Result<Self> {
        Self::new(self.method, self.neighborhood, ridge)
    }
}

/// Per-covariate screening statistic in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningScores<F> {
    pub scores: Vec<F>,
    /// Subset attaining the score (a singleton for marginal methods).
    pub argmax_subsets: Vec<SubsetIndex>,
    pub warnings: Vec<String>,
}

impl<F: Scalar> ScreeningScores<F> {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Covariate indices from highest to lowest score, ties by index.
    pub fn order(&self) -> Vec<usize> {
        order_by_score(&self.scores)
    }

    /// Wraps plain scores, e.g. for selection on externally computed values.
    pub fn from_scores(scores: Vec<F>) -> Self {
        let argmax_subsets = (0..scores.len()).map(SubsetIndex::singleton).collect();
        Self {
            scores,
            argmax_subsets,
            warnings: Vec::new(),
        }
    }
}

pub(crate) fn order_by_score<F: Scalar>(scores: &[F]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are never NaN")
            .then(a.cmp(&b))
    });
    idx
}

/// Scores every covariate of `data` with the configured method.
pub fn score_all<F: Scalar>(
    data: &DataMatrix<F>,
    config: &ScreeningConfig,
) -> Result<ScreeningScores<F>> {
    let (n, p) = (data.n(), data.p());
    if n < 2 {
        return Err(ScreenError::Domain(format!(
            "screening needs at least 2 observations, got {n}"
        )));
    }
    if p == 0 {
        return Err(ScreenError::Domain(
            "screening needs at least one covariate".into(),
        ));
    }
    let out = match config.method {
        Method::Cch => {
            let tau = kendall_tau_matrix(data.values())?;
            let s = sine_transform(&tau);
            let constant: BTreeSet<usize> = tau.constant_columns.iter().copied().collect();
            canonical_scores(data, &s, config, &constant)?
        }
        Method::Cck => {
            let s = pearson_matrix(data.values()).map_err(|e| relabel(e, data))?;
            canonical_scores(data, &s, config, &BTreeSet::new())?
        }
        Method::Sis => marginal_pearson(data)?,
        Method::Rrcs => marginal_kendall(data)?,
    };
    debug_assert!(out.scores.iter().all(|s| !s.is_nan()));
    Ok(out)
}

fn relabel<F: Scalar>(e: ScreenError, data: &DataMatrix<F>) -> ScreenError {
    match e {
        ScreenError::ConstantColumn { index, .. } => ScreenError::ConstantColumn {
            index,
            label: data.labels()[index].clone(),
        },
        other => other,
    }
}

fn constant_warning<F: Scalar>(data: &DataMatrix<F>, j: usize) -> String {
    format!(
        "covariate `{}` is constant; scored 0",
        data.covariate_label(j)
    )
}

fn canonical_scores<F: Scalar>(
    data: &DataMatrix<F>,
    s: &CorrelationEstimate<F>,
    config: &ScreeningConfig,
    constant_joint_columns: &BTreeSet<usize>,
) -> Result<ScreeningScores<F>> {
    let neighborhood = config
        .neighborhood
        .ok_or_else(|| ScreenError::Config(format!("method {} needs k and k_n", config.method)))?;
    let ridge = F::lit(config.ridge);
    let results: Vec<(F, SubsetIndex)> = (0..data.p())
        .into_par_iter()
        .map(|i| {
            if constant_joint_columns.contains(&(i + 1)) {
                Ok((F::zero(), SubsetIndex::singleton(i)))
            } else {
                max_cc_score(i, s, neighborhood, ridge)
            }
        })
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    if constant_joint_columns.contains(&0) {
        warnings.push(format!(
            "response `{}` is constant; all scores are 0",
            data.response_label()
        ));
    }
    warnings.extend(
        constant_joint_columns
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| constant_warning(data, c - 1)),
    );
    let (scores, argmax_subsets) = results.into_iter().unzip();
    Ok(ScreeningScores {
        scores,
        argmax_subsets,
        warnings,
    })
}

fn marginal_pearson<F: Scalar>(data: &DataMatrix<F>) -> Result<ScreeningScores<F>> {
    let n = F::lit(data.n() as f64);
    let center = |col: usize, v: ArrayView1<'_, F>| -> Result<(Vec<F>, F)> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ScreenError::Domain(format!(
                "column `{}` has non-finite values; Pearson correlation is undefined",
                data.labels()[col]
            )));
        }
        let mean = v.iter().copied().sum::<F>() / n;
        let c: Vec<F> = v.iter().map(|&x| x - mean).collect();
        let norm = c.iter().map(|&x| x * x).sum::<F>().sqrt();
        if v.iter().all(|&x| x == v[0]) || norm == F::zero() {
            return Err(ScreenError::ConstantColumn {
                index: col,
                label: data.labels()[col].clone(),
            });
        }
        Ok((c, norm))
    };
    let (y, ynorm) = center(0, data.response())?;
    let scores = (0..data.p())
        .into_par_iter()
        .map(|j| {
            let (x, xnorm) = center(j + 1, data.covariate(j))?;
            let dot: F = x.iter().zip(&y).map(|(&a, &b)| a * b).sum();
            Ok((dot / (xnorm * ynorm)).abs().min(F::one()))
        })
        .collect::<Result<Vec<F>>>()?;
    Ok(ScreeningScores::from_scores(scores))
}

fn marginal_kendall<F: Scalar>(data: &DataMatrix<F>) -> Result<ScreeningScores<F>> {
    let y = data.response();
    let scores = (0..data.p())
        .into_par_iter()
        .map(|j| Ok(kendall_tau_with(y, data.covariate(j), KendallAlgorithm::Auto)?.abs()))
        .collect::<Result<Vec<F>>>()?;
    let mut out = ScreeningScores::from_scores(scores);
    if y.iter().all(|&v| v == y[0]) {
        out.warnings.push(format!(
            "response `{}` is constant; all scores are 0",
            data.response_label()
        ));
    }
    for j in 0..data.p() {
        let c = data.covariate(j);
        if c.iter().all(|&v| v == c[0]) {
            out.warnings.push(constant_warning(data, j));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionRule {
    Threshold(f64),
    TopM(usize),
    Iterative { delta: f64, stop_below: usize },
}

/// Selected covariate indices (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    pub members: BTreeSet<usize>,
    pub rule: SelectionRule,
}

impl ActiveSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }
}

/// Covariates whose score is strictly greater than `t_n`.
pub fn threshold_select<F: Scalar>(scores: &ScreeningScores<F>, t_n: F) -> ActiveSet {
    let members = scores
        .scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > t_n)
        .map(|(i, _)| i)
        .collect();
    ActiveSet {
        members,
        rule: SelectionRule::Threshold(t_n.to_f64_lossy()),
    }
}

/// The `min(m, p)` highest-scoring covariates, ties to the smaller index.
pub fn top_m_select<F: Scalar>(scores: &ScreeningScores<F>, m: usize) -> ActiveSet {
    let members = scores.order().into_iter().take(m).collect();
    ActiveSet {
        members,
        rule: SelectionRule::TopM(m),
    }
}

/// `⌊n / ln n⌋`, at least 1.
pub fn default_top_m(n: usize) -> usize {
    if n < 3 {
        return 1;
    }
    ((n as f64 / (n as f64).ln()).floor() as usize).max(1)
}

/// Repeatedly keeps the top `⌊delta · count⌋` covariates, rescoring the
/// survivors on their own (re-indexed contiguously in original order), until
/// fewer than `stop_below` remain.
pub fn iterative_screen<F: Scalar>(
    data: &DataMatrix<F>,
    config: &ScreeningConfig,
    delta: f64,
    stop_below: usize,
) -> Result<ActiveSet> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ScreenError::Config(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let p = data.p();
    if stop_below == 0 || stop_below > p {
        return Err(ScreenError::Config(format!(
            "stop_below must lie in 1..={p}, got {stop_below}"
        )));
    }
    let mut survivors: Vec<usize> = (0..p).collect();
    while survivors.len() >= stop_below {
        let keep = (delta * survivors.len() as f64).floor() as usize;
        if keep == 0 {
            return Err(ScreenError::Config(format!(
                "delta = {delta} keeps no covariates out of {} before reaching stop_below = {stop_below}; use a larger delta",
                survivors.len()
            )));
        }
        let sub = data.select_covariates(&survivors);
        let scores = score_all(&sub, config)?;
        let mut next: Vec<usize> = scores
            .order()
            .into_iter()
            .take(keep)
            .map(|j| survivors[j])
            .collect();
        next.sort_unstable();
        survivors = next;
    }
    Ok(ActiveSet {
        members: survivors.into_iter().collect(),
        rule: SelectionRule::Iterative { delta, stop_below },
    })
}
