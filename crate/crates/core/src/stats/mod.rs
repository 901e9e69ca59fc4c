//! Group summaries and hypothesis tests for comparing fabrication methods,
//! materials and growth phases.

mod hypothesis;
mod quad;
mod special;
mod table;
mod trials;

pub use hypothesis::{
    group_summary, independent_t_test, kruskal_wallis, levene_test, one_way_anova,
    paired_t_test, ranks, stars, tukey_hsd, welch_t_test, GroupSummary, PairComparison,
    TestResult,
};
pub use quad::integrate;
pub use special::{
    chi_square_upper_tail, erfc, f_upper_tail, log_gamma, normal_cdf, normal_pdf,
    regularized_gamma_p, regularized_incomplete_beta, student_t_cdf, student_t_quantile,
    student_t_two_sided, studentized_range_cdf, studentized_range_upper_tail,
};
pub use table::{
    analyze, AnalysisReport, Factor, FactorReport, LevelSummary, Material, ParameterReport,
    Sample, SampleTable, SignificantPair, HOMOGENEITY_ALPHA, TUKEY_ALPHA,
};
pub use trials::{read_trials_csv, summarize_trials, write_trials_csv, GrowthTrial, TrialSummary};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {group} has {size} observations, needs {needed}")]
    GroupTooSmall {
        group: usize,
        size: usize,
        needed: usize,
    },
    #[error("{0}: zero variance")]
    ZeroVariance(&'static str),
    #[error("non-finite observation")]
    NonFinite,
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}
