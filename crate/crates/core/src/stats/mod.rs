//! Diachronic statistics: trend tests, effect sizes, ANOVA, PCA and clustering.

pub mod anova;
pub mod cluster;
pub mod pca;
pub mod special;
pub mod trend;

use thiserror::Error;

pub use anova::{anova_oneway, Anova, AnovaDegeneracy};
pub use cluster::{cluster, ward, ClusterTree, Merge};
pub use pca::{jacobi_eigen, pca, standardize, PcaResult, Standardized, SymmetricEigen};
pub use trend::{
    average_ranks, classify_trends, cohens_d, ols_trend, spearman, spearman_with, trend_for, write_trends_csv,
    EffectBand, OlsTrend, SpearmanPValue, SpearmanTrend, TrendClass, TrendOptions, TrendStats,
};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("pooled standard deviation is zero but the group means differ")]
    InfiniteEffect,
    #[error("empty group")]
    EmptyGroup,
    #[error("{0}")]
    Shape(&'static str),
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("eigen solver did not converge after {0} sweeps")]
    NoConvergence(usize),
}
