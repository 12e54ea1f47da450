//! Exact Bayesian quantities by enumeration of offense and report vectors.

use serde::{Deserialize, Serialize};

use super::params::MAX_ENUM_N;
use super::strategy::StrategyProfile;
use crate::error::LabError;

/// Relative tolerance under which a posterior counts as equal to the threshold.
pub const INDIFFERENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Convict,
    Acquit,
    Indifferent,
}

pub fn classify(posterior: f64, pi_star: f64) -> Decision {
    if (posterior - pi_star).abs() <= INDIFFERENCE_TOL * pi_star {
        Decision::Indifferent
    } else if posterior > pi_star {
        Decision::Convict
    } else {
        Decision::Acquit
    }
}

/// Aggregate-probability judge: one decision per report profile.
pub fn judge_app(posteriors: &[f64], pi_star: f64) -> Vec<Decision> {
    posteriors.iter().map(|p| classify(*p, pi_star)).collect()
}

/// Distinct-probability judge: each entry holds the per-offense posteriors
/// of one report profile; the largest one is compared with the threshold.
pub fn judge_dpp(per_offense: &[Vec<f64>], pi_star: f64) -> Vec<Decision> {
    per_offense
        .iter()
        .map(|ps| classify(ps.iter().copied().fold(0.0, f64::max), pi_star))
        .collect()
}

fn ensure_enumerable(profile: &StrategyProfile) -> Result<(), LabError> {
    if profile.n() > MAX_ENUM_N {
        return Err(LabError::Domain(format!("exact enumeration supports n <= {MAX_ENUM_N}")));
    }
    Ok(())
}

/// Per-agent accusation probabilities, witnessed and not witnessed.
pub(crate) struct AgentPsi {
    pub psi1: Vec<f64>,
    pub psi0: Vec<f64>,
    pub gap: Vec<f64>,
}

impl AgentPsi {
    pub fn of(profile: &StrategyProfile) -> Self {
        let n = profile.n();
        Self {
            psi1: (0..n).map(|i| profile.psi(i, true)).collect(),
            psi0: (0..n).map(|i| profile.psi(i, false)).collect(),
            gap: (0..n).map(|i| profile.psi_gap(i)).collect(),
        }
    }

    pub fn report_prob(&self, i: usize, theta: u32, a: u32) -> f64 {
        let psi = if theta >> i & 1 == 1 { self.psi1[i] } else { self.psi0[i] };
        if a >> i & 1 == 1 {
            psi
        } else {
            1.0 - psi
        }
    }

    pub fn likelihood(&self, theta: u32, a: u32) -> f64 {
        (0..self.psi1.len()).map(|i| self.report_prob(i, theta, a)).product()
    }

    /// Probability of the other agents' reports `a` (bit `i` ignored).
    pub fn likelihood_without(&self, i: usize, theta: u32, a: u32) -> f64 {
        (0..self.psi1.len()).filter(|j| *j != i).map(|j| self.report_prob(j, theta, a)).product()
    }
}

/// Probability of report vector `a` given offense vector `theta`.
pub fn report_profile_likelihood(profile: &StrategyProfile, theta: u32, a: u32) -> f64 {
    AgentPsi::of(profile).likelihood(theta, a)
}

/// Marginal probability of every report vector.
pub fn report_distribution(profile: &StrategyProfile) -> Result<Vec<f64>, LabError> {
    ensure_enumerable(profile)?;
    let psi = AgentPsi::of(profile);
    let support = profile.theta_support()?;
    Ok((0..(1u32 << profile.n()))
        .map(|a| support.iter().map(|(t, p)| p * psi.likelihood(*t, a)).sum())
        .collect())
}

/// `Pr(at least one offense | a)` for every report vector.
pub fn posterior_aggregate_all(profile: &StrategyProfile) -> Result<Vec<f64>, LabError> {
    ensure_enumerable(profile)?;
    let psi = AgentPsi::of(profile);
    let support = profile.theta_support()?;
    Ok((0..(1u32 << profile.n()))
        .map(|a| {
            let mut guilty = 0.0;
            let mut innocent = 0.0;
            for (t, p) in &support {
                let w = p * psi.likelihood(*t, a);
                if *t == 0 {
                    innocent += w;
                } else {
                    guilty += w;
                }
            }
            guilty / (guilty + innocent)
        })
        .collect())
}

pub fn posterior_aggregate(profile: &StrategyProfile, a: u32) -> Result<f64, LabError> {
    Ok(posterior_aggregate_all(profile)?[a as usize])
}

/// `Pr(theta_i = 1 | a)` for every agent, for every report vector.
pub fn posterior_specific_all(profile: &StrategyProfile) -> Result<Vec<Vec<f64>>, LabError> {
    ensure_enumerable(profile)?;
    let n = profile.n();
    let psi = AgentPsi::of(profile);
    let support = profile.theta_support()?;
    Ok((0..(1u32 << n))
        .map(|a| {
            let mut total = 0.0;
            let mut hit = vec![0.0; n];
            for (t, p) in &support {
                let w = p * psi.likelihood(*t, a);
                total += w;
                for (i, h) in hit.iter_mut().enumerate() {
                    if t >> i & 1 == 1 {
                        *h += w;
                    }
                }
            }
            hit.into_iter().map(|h| h / total).collect()
        })
        .collect())
}

pub fn posterior_specific(profile: &StrategyProfile, i: usize, a: u32) -> Result<f64, LabError> {
    if i >= profile.n() {
        return Err(LabError::Domain(format!("agent index {i} out of range")));
    }
    Ok(posterior_specific_all(profile)?[a as usize][i])
}

/// Likelihood ratio `Pr(a | guilty) / Pr(a | innocent)` for every report vector.
pub fn informativeness_all(profile: &StrategyProfile) -> Result<Vec<f64>, LabError> {
    ensure_enumerable(profile)?;
    let psi = AgentPsi::of(profile);
    let support = profile.theta_support()?;
    let guilty_mass: f64 = support.iter().filter(|(t, _)| *t != 0).map(|(_, p)| p).sum();
    if guilty_mass <= 0.0 {
        return Err(LabError::Domain("informativeness undefined: no offense has positive probability".into()));
    }
    Ok((0..(1u32 << profile.n()))
        .map(|a| {
            let given_guilt: f64 =
                support.iter().filter(|(t, _)| *t != 0).map(|(t, p)| p * psi.likelihood(*t, a)).sum::<f64>()
                    / guilty_mass;
            given_guilt / psi.likelihood(0, a)
        })
        .collect())
}

pub fn informativeness(profile: &StrategyProfile, a: u32) -> Result<f64, LabError> {
    Ok(informativeness_all(profile)?[a as usize])
}

/// `Pr(theta_i = 1 | theta_j = 1) - Pr(theta_i = 1 | theta_j = 0)` under an
/// offense-vector distribution indexed by mask.
pub fn offense_correlation_dist(dist: &[f64], i: usize, j: usize) -> Result<f64, LabError> {
    let (mut pj, mut both, mut i_not_j) = (0.0, 0.0, 0.0);
    for (t, p) in dist.iter().enumerate() {
        let (ti, tj) = (t >> i & 1 == 1, t >> j & 1 == 1);
        if tj {
            pj += p;
            if ti {
                both += p;
            }
        } else if ti {
            i_not_j += p;
        }
    }
    let total: f64 = dist.iter().sum();
    let not_j = total - pj;
    if pj <= 0.0 || not_j <= 0.0 {
        return Err(LabError::Domain(format!("offense {j} has degenerate probability {pj}")));
    }
    Ok(both / pj - i_not_j / not_j)
}

/// Correlation indicator of the unconditional offense distribution.
pub fn offense_correlation(profile: &StrategyProfile, i: usize, j: usize) -> Result<f64, LabError> {
    ensure_enumerable(profile)?;
    let mut dist = vec![0.0; 1 << profile.n()];
    for (t, p) in profile.theta_support()? {
        dist[t as usize] = p;
    }
    offense_correlation_dist(&dist, i, j)
}

/// `Pr(s=1 | theta_i=1, theta_-i) - Pr(s=1 | theta_i=0, theta_-i)`; bit `i`
/// of `theta` is ignored.
pub fn marginal_conviction_increase(profile: &StrategyProfile, i: usize, theta: u32) -> f64 {
    let psi = AgentPsi::of(profile);
    marginal_increase_with(profile, &psi, i, theta)
}

pub(crate) fn marginal_increase_with(profile: &StrategyProfile, psi: &AgentPsi, i: usize, theta: u32) -> f64 {
    let n = profile.n();
    let bit = 1u32 << i;
    let mut acc = 0.0;
    for a in 0..(1u32 << n) {
        if a & bit != 0 {
            continue;
        }
        let dq = profile.rule.prob(a | bit) - profile.rule.prob(a);
        if dq != 0.0 {
            acc += psi.likelihood_without(i, theta, a) * dq;
        }
    }
    acc * psi.gap[i]
}

/// Conviction probability given the offense vector.
pub fn conviction_prob(profile: &StrategyProfile, theta: u32) -> f64 {
    let psi = AgentPsi::of(profile);
    (0..(1u32 << profile.n())).map(|a| profile.rule.prob(a) * psi.likelihood(theta, a)).sum()
}

/// `Pr(s=1 | theta) - Pr(s=1 | no offense)`, accumulated one offense at a
/// time so that tiny differences survive.
pub fn conviction_gain(profile: &StrategyProfile, theta: u32) -> f64 {
    let psi = AgentPsi::of(profile);
    conviction_gain_with(profile, &psi, theta)
}

pub(crate) fn conviction_gain_with(profile: &StrategyProfile, psi: &AgentPsi, theta: u32) -> f64 {
    let mut current = 0u32;
    let mut acc = 0.0;
    for i in 0..profile.n() {
        if theta >> i & 1 == 1 {
            acc += marginal_increase_with(profile, psi, i, current);
            current |= 1 << i;
        }
    }
    acc
}
