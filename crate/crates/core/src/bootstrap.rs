//! Bootstrap rank intervals and influential-covariate flags.
//!
//! Rows (response together with its covariates) are resampled with
//! replacement; resample `b` draws from [`substream`]`(seed, b)`, so results
//! do not depend on how replicates are scheduled across threads.

use rand::Rng;
use rayon::prelude::*;

use crate::rng::substream;
use crate::screening::{score_all, ScreeningConfig, ScreeningScores};
use crate::{DataMatrix, Result, Scalar, ScreenError};

/// Resamples producing a degenerate (constant) Pearson column are redrawn
/// at most this many times.
pub const MAX_RESAMPLE_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub alpha: f64,
    pub top_k: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 200,
            alpha: 0.05,
            top_k: 20,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(ScreenError::Config(format!(
                "bootstrap needs at least 2 replicates, got {}",
                self.replicates
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ScreenError::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.top_k == 0 {
            return Err(ScreenError::Config("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootstrapRankSummary {
    /// 0-based covariate index.
    pub covariate: usize,
    pub label: String,
    pub point_rank: usize,
    pub lower: usize,
    pub upper: usize,
    pub influential: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    /// One entry per covariate, in covariate order.
    pub summaries: Vec<BootstrapRankSummary>,
    /// `replicate_ranks[b][j]` is covariate `j`'s rank in resample `b`.
    pub replicate_ranks: Vec<Vec<usize>>,
}

/// 1-based ranks: the largest score gets rank 1, ties go to the smaller index.
pub fn rank_covariates<F: Scalar>(scores: &ScreeningScores<F>) -> Vec<usize> {
    let mut ranks = vec![0; scores.len()];
    for (r, j) in scores.order().into_iter().enumerate() {
        ranks[j] = r + 1;
    }
    ranks
}

/// Position (1-based) of the empirical `q`-quantile among `b` order
/// statistics: `ceil(q · b)` clamped to `[1, b]`.
pub fn order_statistic_position(q: f64, b: usize) -> usize {
    // Absorb representation error so 0.975 · 200 lands on 195, not 196.
    let pos = (q * b as f64 - 1e-9).ceil();
    (pos.max(1.0) as usize).min(b)
}

/// Equal-tailed `(1 − alpha)` interval of a sample of ranks.
pub fn rank_interval(ranks: &[usize], alpha: f64) -> (usize, usize) {
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let b = sorted.len();
    let lo = order_statistic_position(alpha / 2.0, b);
    let hi = order_statistic_position(1.0 - alpha / 2.0, b);
    (sorted[lo - 1], sorted[hi - 1])
}

fn resample_scores<F: Scalar>(
    data: &DataMatrix<F>,
    config: &ScreeningConfig,
    seed: u64,
    replicate: usize,
) -> Result<ScreeningScores<F>> {
    let mut rng = substream(seed, replicate as u64);
    let n = data.n();
    let mut attempt = 0;
    loop {
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        match score_all(&data.select_rows(&rows), config) {
            Err(ScreenError::ConstantColumn { label, .. }) if attempt < MAX_RESAMPLE_RETRIES => {
                log::debug!("replicate {replicate}: constant column `{label}`, redrawing");
                attempt += 1;
            }
            Err(e @ ScreenError::ConstantColumn { .. }) => {
                return Err(ScreenError::Replicate {
                    replicate,
                    seed,
                    source: Box::new(e),
                })
            }
            other => return other,
        }
    }
}

/// Point ranks, bootstrap rank intervals and influential flags
/// (`upper ≤ top_k`) for every covariate.
pub fn bootstrap_rank_intervals<F: Scalar>(
    data: &DataMatrix<F>,
    config: &ScreeningConfig,
    boot: &BootstrapConfig,
) -> Result<BootstrapResult> {
    boot.validate()?;
    let point = rank_covariates(&score_all(data, config)?);
    let replicate_ranks: Vec<Vec<usize>> = (0..boot.replicates)
        .into_par_iter()
        .map(|b| resample_scores(data, config, boot.seed, b).map(|s| rank_covariates(&s)))
        .collect::<Result<_>>()?;

    let summaries = (0..data.p())
        .map(|j| {
            let ranks: Vec<usize> = replicate_ranks.iter().map(|r| r[j]).collect();
            let (lower, upper) = rank_interval(&ranks, boot.alpha);
            BootstrapRankSummary {
                covariate: j,
                label: data.covariate_label(j).to_string(),
                point_rank: point[j],
                lower,
                upper,
                influential: upper <= boot.top_k,
            }
        })
        .collect();
    Ok(BootstrapResult {
        summaries,
        replicate_ranks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_examples() {
        assert_eq!(
            rank_covariates(&ScreeningScores::from_scores(vec![0.9, 0.1, 0.5])),
            vec![1, 3, 2]
        );
        assert_eq!(
            rank_covariates(&ScreeningScores::from_scores(vec![0.2; 5])),
            vec![1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn ranks_form_a_permutation() {
        let scores: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 / 10.0).collect();
        let ranks = rank_covariates(&ScreeningScores::from_scores(scores));
        let mut inverse = vec![usize::MAX; ranks.len()];
        for (j, &r) in ranks.iter().enumerate() {
            inverse[r - 1] = j;
        }
        for (r, &j) in inverse.iter().enumerate() {
            assert_eq!(ranks[j], r + 1);
        }
    }

    #[test]
    fn order_statistic_positions() {
        assert_eq!(order_statistic_position(0.025, 200), 5);
        assert_eq!(order_statistic_position(0.975, 200), 195);
        assert_eq!(order_statistic_position(0.001, 200), 1);
        assert_eq!(order_statistic_position(1.0, 7), 7);
    }

    #[test]
    fn constant_rank_interval() {
        assert_eq!(rank_interval(&[1; 200], 0.05), (1, 1));
    }

    #[test]
    fn interval_widens_with_smaller_alpha() {
        let ranks: Vec<usize> = (0..200).map(|i| 1 + (i * 7919) % 40).collect();
        let (l1, u1) = rank_interval(&ranks, 0.1);
        let (l2, u2) = rank_interval(&ranks, 0.01);
        assert!(l2 <= l1 && u2 >= u1);
    }

    #[test]
    fn config_validation() {
        assert!(BootstrapConfig {
            replicates: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BootstrapConfig {
            alpha: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        let d = BootstrapConfig::default();
        assert_eq!((d.replicates, d.alpha, d.top_k), (200, 0.05, 20));
    }
}
