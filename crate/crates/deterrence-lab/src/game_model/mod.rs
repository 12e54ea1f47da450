//! Game primitives, strategy objects, and the Bayesian quantities the judge
//! and the agents reason with.

mod inference;
mod params;
mod rule;
mod strategy;
pub mod symmetric;

pub use inference::{
    classify, conviction_gain, conviction_prob, informativeness, informativeness_all, judge_app, judge_dpp,
    marginal_conviction_increase, offense_correlation, offense_correlation_dist, posterior_aggregate,
    posterior_aggregate_all, posterior_specific, posterior_specific_all, report_distribution,
    report_profile_likelihood, Decision, INDIFFERENCE_TOL,
};
#[allow(unused_imports)]
pub(crate) use inference::{conviction_gain_with, AgentPsi};
pub use params::{GameParams, MAX_ENUM_N};
pub use rule::{ConvictionRule, Interaction};
pub use strategy::{AgentCutoffs, Cutoffs, PrincipalStrategy, Principle, StrategyProfile};
#[allow(unused_imports)]
pub(crate) use strategy::binomial;
