//! Doubly robust sure screening for the elliptical copula regression model.
//!
//! The crate estimates a rank-based correlation matrix from Kendall's tau,
//! turns it into canonical correlations between the response and small
//! neighbourhoods of covariates, and ranks covariates by the largest such
//! correlation. Marginal Pearson (SIS), marginal Kendall (RRCS) and
//! Pearson-plug-in canonical correlation (CCK) screeners are provided as
//! baselines, together with simulation generators, a bootstrap rank
//! procedure and a Monte Carlo harness.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the precision.

// `!(x > 0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod cancorr;
pub mod data;
pub mod elliptical;
mod error;
pub mod harness;
pub mod linalg;
pub mod rank_corr;
pub mod rng;
mod scalar;
pub mod screening;
pub mod simgen;

pub use bootstrap::{
    bootstrap_rank_intervals, rank_covariates, BootstrapConfig, BootstrapRankSummary,
    BootstrapResult,
};
pub use cancorr::{
    canonical_correlation, enumerate_neighborhood_sets, max_cc_score, NeighborhoodConfig,
    SubsetIndex,
};
pub use data::DataMatrix;
pub use elliptical::{
    equicorrelation_matrix, sample_elliptical, EllipticalSampler, EllipticalSpec, Family,
    ScatterMatrix,
};
pub use error::{Result, ScreenError};
pub use harness::{
    containment, run_cell, run_grid, variance_filter, CellResult, ExperimentCell, MethodSpec,
    ProportionResult,
};
pub use rank_corr::{
    kendall_tau, kendall_tau_matrix, pearson_matrix, psd_project, sine_transform,
    CorrelationEstimate, CorrelationKind, KendallTauMatrix,
};
pub use scalar::Scalar;
pub use screening::{
    default_top_m, iterative_screen, score_all, threshold_select, top_m_select, ActiveSet, Method,
    ScreeningConfig, ScreeningScores, SelectionRule,
};
pub use simgen::{generate, LabeledSample, ModelGenerator, SimModel, SimModelSpec};

/// Default eigenvalue floor applied when a covariate block must be repaired
/// before inversion.
pub const DEFAULT_RIDGE: f64 = 1e-8;

pub type DataMatrix64 = DataMatrix<f64>;
pub type DataMatrix32 = DataMatrix<f32>;
pub type CorrelationEstimate64 = CorrelationEstimate<f64>;
pub type CorrelationEstimate32 = CorrelationEstimate<f32>;
pub type ScatterMatrix64 = ScatterMatrix<f64>;
pub type ScatterMatrix32 = ScatterMatrix<f32>;
pub type ScreeningScores64 = ScreeningScores<f64>;
pub type ScreeningScores32 = ScreeningScores<f32>;
pub type LabeledSample64 = LabeledSample<f64>;
pub type LabeledSample32 = LabeledSample<f32>;
