//! Ranking evaluation under the filtered setting, significance testing, and
//! model comparison reports.

pub mod compare;
pub mod mcnemar;
pub mod metrics;

pub use compare::{compare_models, sparck_jones_band, Band, ComparisonReport, ModelEvaluation};
pub use mcnemar::{mcnemar, ContingencyTable, McNemarError, McNemarResult};
pub use metrics::{
    build_test_sample, filtered_rank, ranking_report, EvalError, RankingReport,
};
