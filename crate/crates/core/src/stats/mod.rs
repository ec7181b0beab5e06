//! Evaluation statistics: rank correlation, proportion intervals and
//! explanation-method comparison.

mod explainers;
mod kendall;
pub mod labels;
mod proportion;

pub use explainers::{compare_explainers, compare_explainers_at, ExplainerReport};
pub use kendall::{kendall_tau_b, KendallTau, PairedSample};
pub use proportion::{binomial_ci, mean_ci_halfwidth, ProportionEstimate, Z_95};
