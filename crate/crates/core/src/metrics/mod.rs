//! Correlation statistics and the score-versus-level evaluation harness.

mod correlation;
mod evaluate;

pub use correlation::{kendall, pearson, ranks, spearman, SeriesPair, Undefined};
pub use evaluate::{
    evaluate, CoefficientMean, Correlations, EvaluationReport, GroupOutcome, GroupResult,
};
