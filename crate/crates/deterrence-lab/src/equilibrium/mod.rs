//! Regime-specific equilibrium solvers.
//!
//! Each regime reduces the equilibrium conditions to one scalar equation
//! (two nested ones for the two-type case), scans it on a grid for sign
//! changes and refines every bracket by bisection. Every candidate is then
//! checked by [`best_response_residuals`]; survivors are ranked by residual
//! and the rest are reported as alternatives.

mod app_one_type;
mod app_two_type;
mod complements;
mod dpp;
pub mod roots;
mod single;

pub use app_one_type::solve_app_one_type;
pub use app_two_type::solve_app_two_type;
pub use complements::{complements_l_interval, solve_app_complements, solve_app_complements_at_l, ComplementsInterval};
pub use dpp::solve_dpp;
pub use single::solve_single_agent;

use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::game_model::{GameParams, StrategyProfile};
use crate::verification::{best_response_residuals, Diagnostics};

/// Lower end of every cutoff scan, in shock standard deviations.
const CUTOFF_FLOOR: f64 = -38.0;

pub(crate) fn cutoff_floor(p: &GameParams) -> f64 {
    (p.shock.mean + CUTOFF_FLOOR * p.shock.std_dev).min(CUTOFF_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SingleAgent,
    AppOneType,
    AppTwoType,
    AppComplements,
    DppLinear,
}

impl Regime {
    pub const ALL: [Regime; 5] =
        [Regime::SingleAgent, Regime::AppOneType, Regime::AppTwoType, Regime::AppComplements, Regime::DppLinear];

    /// Name used on the command line and in CSV output.
    pub fn cli_name(self) -> &'static str {
        match self {
            Regime::SingleAgent => "single",
            Regime::AppOneType => "app",
            Regime::AppTwoType => "app-two-type",
            Regime::AppComplements => "app-complements",
            Regime::DppLinear => "dpp",
        }
    }

    pub fn from_cli(name: &str) -> Result<Self, LabError> {
        Regime::ALL
            .into_iter()
            .find(|r| r.cli_name() == name)
            .ok_or_else(|| LabError::invalid("regime", format!("unknown regime {name:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub multistart_grid: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000, damping: 0.5, multistart_grid: 16 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(LabError::invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(LabError::invalid("max_iter", "must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(LabError::invalid("damping", format!("must lie in (0,1], got {}", self.damping)));
        }
        if self.multistart_grid == 0 {
            return Err(LabError::invalid("multistart", "must be at least 1"));
        }
        Ok(())
    }

    /// Grid nodes used when scanning a scalar equation for sign changes.
    pub fn scan_points(&self) -> usize {
        self.multistart_grid * 256
    }
}

/// A distinct fixed point that was not selected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub q: f64,
    pub omega_star: f64,
    pub omega_star2: f64,
    pub pi: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumProfile {
    pub regime: Regime,
    pub profile: StrategyProfile,
    /// Headline conviction probability: `q` (one agent), `q_n` (unanimity),
    /// the per-accusation increment (distinct rule) or the single-accusation
    /// probability (complements).
    pub q: f64,
    /// Equilibrium probability of at least one offense.
    pub pi: f64,
    /// Largest likelihood ratio over report vectors; per-agent ratio under
    /// the distinct rule.
    pub informativeness_max: f64,
    pub beta: Option<f64>,
    pub l_star: f64,
    pub residual: f64,
    pub diagnostics: Diagnostics,
    pub alternatives: Vec<Alternative>,
}

impl EquilibriumProfile {
    pub fn params(&self) -> &GameParams {
        &self.profile.params
    }

    pub fn omega_star(&self) -> f64 {
        self.profile.cutoffs.agent(0).omega_star
    }

    pub fn omega_star2(&self) -> f64 {
        self.profile.cutoffs.agent(0).omega_star2
    }
}

/// Candidate produced by a regime's scalar reduction.
pub(crate) struct Candidate {
    pub profile: StrategyProfile,
    pub q: f64,
    pub informativeness: f64,
    pub beta: Option<f64>,
}

/// Verify candidates, rank them and assemble the result.
pub(crate) fn select(
    regime: Regime,
    candidates: Vec<Candidate>,
    cfg: &SolverConfig,
    why_none: &str,
) -> Result<EquilibriumProfile, LabError> {
    if candidates.is_empty() {
        return Err(LabError::NoEquilibrium(why_none.to_string()));
    }
    let mut checked = Vec::new();
    let mut best_rejected = f64::INFINITY;
    for c in candidates {
        let diag = best_response_residuals(&c.profile)?;
        let r = diag.max_gap();
        let cut = c.profile.cutoffs.agent(0);
        let pi = c.profile.prior_guilt();
        if r <= cfg.tol && cut.omega_star > cut.omega_star2 && pi > 0.0 && pi < 1.0 {
            checked.push((c, diag, r, pi));
        } else if r.is_finite() {
            best_rejected = best_rejected.min(r);
        }
    }
    if checked.is_empty() {
        return Err(if best_rejected.is_finite() {
            LabError::NonConvergence(format!(
                "no candidate met tolerance {:e}; best residual {best_rejected:e}",
                cfg.tol
            ))
        } else {
            LabError::NoEquilibrium(why_none.to_string())
        });
    }
    checked.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.q.total_cmp(&b.0.q)));
    let mut iter = checked.into_iter();
    let (best, diag, residual, pi) = iter.next().expect("nonempty");
    let key = |p: &StrategyProfile, q: f64| {
        let c = p.cutoffs.agent(0);
        [q, c.omega_star, c.omega_star2]
    };
    let chosen = key(&best.profile, best.q);
    let mut alternatives: Vec<Alternative> = Vec::new();
    for (c, _, r, alt_pi) in iter {
        let k = key(&c.profile, c.q);
        let distinct = |other: &[f64; 3]| k.iter().zip(other).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) > 1e-6;
        let seen = alternatives.iter().any(|a| !distinct(&[a.q, a.omega_star, a.omega_star2]));
        if distinct(&chosen) && !seen {
            alternatives.push(Alternative { q: c.q, omega_star: k[1], omega_star2: k[2], pi: alt_pi, residual: r });
        }
    }
    Ok(EquilibriumProfile {
        regime,
        l_star: best.profile.params.l_star(),
        profile: best.profile,
        q: best.q,
        pi,
        informativeness_max: best.informativeness,
        beta: best.beta,
        residual,
        diagnostics: diag,
        alternatives,
    })
}

/// Dispatch on the regime. The complements regime solves for the
/// single-accusation probability that matches `params.l`.
pub fn solve(regime: Regime, params: &GameParams, cfg: &SolverConfig) -> Result<EquilibriumProfile, LabError> {
    params.validate()?;
    cfg.validate()?;
    match regime {
        Regime::SingleAgent => solve_single_agent(params, cfg),
        Regime::AppOneType => solve_app_one_type(params, cfg),
        Regime::AppTwoType => solve_app_two_type(params, cfg),
        Regime::AppComplements => solve_app_complements_at_l(params, cfg),
        Regime::DppLinear => solve_dpp(params, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_names_round_trip() {
        for r in Regime::ALL {
            assert_eq!(Regime::from_cli(r.cli_name()).unwrap(), r);
        }
        assert!(Regime::from_cli("nope").unwrap_err().to_string().contains("regime"));
    }

    #[test]
    fn config_validation_names_keys() {
        let bad = SolverConfig { damping: 0.0, ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("damping"));
        let bad = SolverConfig { tol: -1.0, ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("tol"));
    }
}
