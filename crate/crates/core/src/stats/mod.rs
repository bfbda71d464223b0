//! Descriptive statistics, rank tests, GLMs, matching and bucketing.

mod buckets;
mod describe;
mod glm;
mod matching;
mod ranks;
mod reuse;

pub use buckets::{bucket_indicators, bucket_of, percentile_buckets, top_cited_indicator, BUCKET_LABELS};
pub use describe::{
    describe, mean, percentile_sorted, std_dev, transform_log1p, variance_decomposition, Description, VarianceShares,
};
pub use glm::{
    average_marginal_effect, fit_glm, log_likelihood, score, DesignMatrix, Family, GlmFit, GlmOptions,
};
pub use matching::{match_case_control, MatchKey, MatchLevel, MatchResult, MatchedPair};
pub use ranks::{auc, classification_metrics, mann_whitney, midranks, ClassificationMetrics, MannWhitney};
pub use reuse::{
    reuse_citation_analysis, sample_terms, GapEffect, ReuseCitationConfig, ReuseCitationResult, TermReuseSample,
};
