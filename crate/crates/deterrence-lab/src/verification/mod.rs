//! Independent checks of a strategy profile: the exact outcome table,
//! best-response residuals for principal, agents and judge, and a seeded
//! simulation of the three-stage game.

mod monte_carlo;

pub use monte_carlo::{monte_carlo, MonteCarloReport, ReportRow, ThetaRow};

use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::game_model::symmetric::SymmetricView;
use crate::game_model::{
    conviction_gain_with, informativeness_all, offense_correlation, posterior_aggregate_all, posterior_specific_all,
    AgentPsi, Interaction, Principle, StrategyProfile, MAX_ENUM_N,
};

/// One cell of the joint distribution of offenses, reports and verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub theta: u32,
    pub reports: u32,
    pub convicted: bool,
    pub prob: f64,
}

/// Exact joint table `Pr(theta, a, s)` over the support of `theta`.
#[derive(Debug, Clone)]
pub struct OutcomeTable {
    pub n: usize,
    pub cells: Vec<Outcome>,
}

impl OutcomeTable {
    pub fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.prob).sum()
    }

    /// Marginal probability of each report vector.
    pub fn report_probs(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n];
        for c in &self.cells {
            out[c.reports as usize] += c.prob;
        }
        out
    }

    /// Probability of each (report vector, verdict) pair, indexed `2 * a + s`.
    pub fn event_probs(&self) -> Vec<f64> {
        let mut out = vec![0.0; 2 << self.n];
        for c in &self.cells {
            out[2 * c.reports as usize + c.convicted as usize] += c.prob;
        }
        out
    }

    /// Marginal probability of each offense vector.
    pub fn theta_probs(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n];
        for c in &self.cells {
            out[c.theta as usize] += c.prob;
        }
        out
    }

    /// `Pr(at least one offense | a)` from the table.
    pub fn posterior_aggregate(&self) -> Vec<f64> {
        let mut guilty = vec![0.0; 1 << self.n];
        let mut all = vec![0.0; 1 << self.n];
        for c in &self.cells {
            all[c.reports as usize] += c.prob;
            if c.theta != 0 {
                guilty[c.reports as usize] += c.prob;
            }
        }
        guilty.iter().zip(&all).map(|(g, a)| g / a).collect()
    }
}

pub fn enumerate_outcomes(profile: &StrategyProfile) -> Result<OutcomeTable, LabError> {
    let n = profile.n();
    if n > MAX_ENUM_N {
        return Err(LabError::Domain(format!("outcome enumeration supports n <= {MAX_ENUM_N}")));
    }
    let psi = AgentPsi::of(profile);
    let mut cells = Vec::new();
    for (theta, p) in profile.theta_support()? {
        for a in 0..(1u32 << n) {
            let pa = p * psi.likelihood(theta, a);
            let q = profile.rule.prob(a);
            cells.push(Outcome { theta, reports: a, convicted: true, prob: pa * q });
            cells.push(Outcome { theta, reports: a, convicted: false, prob: pa * (1.0 - q) });
        }
    }
    Ok(OutcomeTable { n, cells })
}

/// Opportunistic principal's payoff: offenses minus expected punishment.
pub fn principal_payoff(profile: &StrategyProfile, theta: u32) -> f64 {
    let psi = AgentPsi::of(profile);
    let convict: f64 = (0..(1u32 << profile.n())).map(|a| profile.rule.prob(a) * psi.likelihood(theta, a)).sum();
    theta.count_ones() as f64 - profile.params.l * convict
}

/// Payoff of `theta` minus the payoff of committing nothing, computed from
/// the incremental conviction probabilities.
pub fn principal_payoff_relative(profile: &StrategyProfile, theta: u32) -> f64 {
    let psi = AgentPsi::of(profile);
    theta.count_ones() as f64 - profile.params.l * conviction_gain_with(profile, &psi, theta)
}

/// Informativeness of one report vector (bit string, agent 1 first) or of
/// an accusation count (`#k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileValue {
    pub reports: String,
    pub value: f64,
}

pub(crate) fn mask_label(a: u32, n: usize) -> String {
    (0..n).map(|i| if a >> i & 1 == 1 { '1' } else { '0' }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub principal_gap: f64,
    pub agent_gap: f64,
    pub judge_gap: f64,
    pub correlation: Option<f64>,
    pub substitutes_index: Option<f64>,
    pub substitutes: Option<Interaction>,
    pub per_profile_informativeness: Vec<ProfileValue>,
}

impl Diagnostics {
    pub fn max_gap(&self) -> f64 {
        self.principal_gap.max(self.agent_gap).max(self.judge_gap)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_gap() <= tol
    }
}

fn judge_violation(posterior: f64, q: f64, pi_star: f64) -> f64 {
    if q <= 0.0 {
        (posterior - pi_star).max(0.0)
    } else if q >= 1.0 {
        (pi_star - posterior).max(0.0)
    } else {
        (posterior - pi_star).abs()
    }
}

fn cutoff_gap(stated: f64, best: f64) -> f64 {
    if stated == best {
        0.0
    } else {
        (stated - best).abs()
    }
}

/// Best-response residuals of every player; count-based for symmetric
/// profiles, by enumeration otherwise.
pub fn best_response_residuals(profile: &StrategyProfile) -> Result<Diagnostics, LabError> {
    profile.validate()?;
    let substitutes = if profile.n() == 2 { Some(profile.rule.substitutes_index()?) } else { None };
    let mut d = match SymmetricView::of(profile) {
        Some(view) => symmetric_residuals(profile, &view),
        None => enumerated_residuals(profile)?,
    };
    d.substitutes_index = substitutes.map(|s| s.0);
    d.substitutes = substitutes.map(|s| s.1);
    Ok(d)
}

fn symmetric_residuals(profile: &StrategyProfile, view: &SymmetricView) -> Diagnostics {
    let n = view.n;
    let pi_star = profile.params.pi_star;

    let rel = view.relative_payoffs();
    let best = rel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sigma = profile.principal.count_distribution(n).expect("symmetric principal");
    let principal_gap = sigma
        .iter()
        .zip(&rel)
        .filter(|(p, _)| **p > 0.0)
        .map(|(_, v)| best - v)
        .fold(0.0, f64::max);

    let cut = profile.cutoffs.shared().expect("shared cutoffs");
    let mut agent_gap: f64 = 0.0;
    for witnessed in [true, false] {
        if let Some(br) = view.best_response(witnessed) {
            agent_gap = agent_gap.max(cutoff_gap(cut.get(witnessed), br));
        }
    }

    let mut judge_gap: f64 = 0.0;
    let mut informativeness = Vec::with_capacity(n + 1);
    for s in 0..=n {
        let posterior = match profile.principle {
            Principle::Aggregate => view.posterior_aggregate(s),
            Principle::Distinct => view.posterior_specific_max(s),
        };
        judge_gap = judge_gap.max(judge_violation(posterior, view.q[s], pi_star));
        informativeness.push(ProfileValue { reports: format!("#{s}"), value: view.informativeness(s) });
    }

    Diagnostics {
        principal_gap,
        agent_gap,
        judge_gap,
        correlation: view.offense_correlation(),
        substitutes_index: None,
        substitutes: None,
        per_profile_informativeness: informativeness,
    }
}

fn enumerated_residuals(profile: &StrategyProfile) -> Result<Diagnostics, LabError> {
    let n = profile.n();
    if n > MAX_ENUM_N {
        return Err(LabError::Domain(format!("asymmetric profiles are checked by enumeration, n <= {MAX_ENUM_N}")));
    }
    let psi = AgentPsi::of(profile);
    let full = 1u32 << n;
    let params = &profile.params;

    let sigma = profile.principal.theta_distribution(n)?;
    let rel: Vec<f64> = (0..full)
        .map(|t| t.count_ones() as f64 - params.l * conviction_gain_with(profile, &psi, t))
        .collect();
    let best = rel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let principal_gap = sigma
        .iter()
        .zip(&rel)
        .filter(|(p, _)| **p > 0.0)
        .map(|(_, v)| best - v)
        .fold(0.0, f64::max);

    let support = profile.theta_support()?;
    let mut agent_gap: f64 = 0.0;
    for i in 0..n {
        let bit = 1u32 << i;
        // index 0: not witnessed, 1: witnessed
        let mut weight = [0.0; 2];
        let mut dq = [0.0; 2];
        let mut acquit = [0.0; 2];
        for (t, p) in &support {
            let w_t = (t & bit != 0) as usize;
            for a in 0..full {
                if a & bit != 0 {
                    continue;
                }
                let w = p * psi.likelihood_without(i, *t, a);
                let hi = profile.rule.prob(a | bit);
                weight[w_t] += w;
                dq[w_t] += w * (hi - profile.rule.prob(a));
                acquit[w_t] += w * (1.0 - hi);
            }
        }
        let cut = profile.cutoffs.agent(i);
        for w_t in 0..2 {
            if weight[w_t] <= 0.0 {
                continue;
            }
            let base = if w_t == 1 { params.b } else { 0.0 };
            let br = if dq[w_t] > 0.0 { base - params.c * acquit[w_t] / dq[w_t] } else { f64::NEG_INFINITY };
            agent_gap = agent_gap.max(cutoff_gap(cut.get(w_t == 1), br));
        }
    }

    let posteriors: Vec<f64> = match profile.principle {
        Principle::Aggregate => posterior_aggregate_all(profile)?,
        Principle::Distinct => posterior_specific_all(profile)?
            .into_iter()
            .map(|ps| ps.into_iter().fold(0.0, f64::max))
            .collect(),
    };
    let judge_gap = posteriors
        .iter()
        .enumerate()
        .map(|(a, post)| judge_violation(*post, profile.rule.prob(a as u32), params.pi_star))
        .fold(0.0, f64::max);

    let informativeness = match informativeness_all(profile) {
        Ok(v) => v
            .into_iter()
            .enumerate()
            .map(|(a, value)| ProfileValue { reports: mask_label(a as u32, n), value })
            .collect(),
        Err(_) => Vec::new(),
    };
    let correlation = if n >= 2 { offense_correlation(profile, 0, 1).ok() } else { None };

    Ok(Diagnostics {
        principal_gap,
        agent_gap,
        judge_gap,
        correlation,
        substitutes_index: None,
        substitutes: None,
        per_profile_informativeness: informativeness,
    })
}
