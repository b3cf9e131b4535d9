//! Level-3 estimators: likelihood fits and instrumented regressions whose
//! outputs become new covariates.

mod cauchy;
mod linear;
mod strength;

pub use cauchy::{
    cauchy_log_likelihood, cauchy_mle, cauchy_score, empirical_mean_feature, CauchyFit,
};
pub use linear::{ols, two_stage_least_squares, LinearFit, TwoStageFit};
pub use strength::{
    fit_strengths, mean_goals_strength, mean_goals_table, read_matches, recency_weight,
    write_matches, MatchRecord, StrengthTable, DEFAULT_HALF_LIFE_DAYS,
};
