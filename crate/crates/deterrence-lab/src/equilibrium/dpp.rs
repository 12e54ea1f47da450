//! Distinct rule: independent offenses, a conviction probability linear in
//! the number of accusations, and a per-offense posterior of exactly the
//! threshold after each accusation.

use super::roots::all_roots;
use super::{cutoff_floor, select, Candidate, EquilibriumProfile, Regime, SolverConfig};
use crate::error::LabError;
use crate::game_model::{
    binomial, AgentCutoffs, ConvictionRule, Cutoffs, GameParams, PrincipalStrategy, Principle, StrategyProfile,
};

/// Offense marginal and per-agent informativeness implied by the witness cutoff.
fn marginal(p: &GameParams, ws: f64) -> (f64, f64) {
    let i = p.psi(ws) / p.psi(ws - p.b);
    let ls = p.l_star();
    (ls / (ls + i), i)
}

fn residual(p: &GameParams, ws: f64) -> f64 {
    let (r, _) = marginal(p, ws);
    let other = p.behavioral_floor() + p.delta * (r * p.shock.cdf(ws) + (1.0 - r) * p.shock.cdf(ws - p.b));
    let n = p.n as f64;
    ws - p.b - p.c - p.c * (n - 1.0) * other + p.c * p.delta * p.l * p.shock.cdf_diff(ws, ws - p.b)
}

/// Opportunistic count distribution whose mixture with the virtuous type
/// is binomial with marginal `r`.
fn opportunistic_counts(n: usize, r: f64, pi_o: f64) -> Option<Vec<f64>> {
    let mut v: Vec<f64> =
        (0..=n).map(|m| binomial(n, m) * r.powi(m as i32) * (1.0 - r).powi((n - m) as i32)).collect();
    v[0] -= 1.0 - pi_o;
    if v[0] < -1e-15 {
        return None;
    }
    v[0] = v[0].max(0.0);
    for x in v.iter_mut() {
        *x /= pi_o;
    }
    let total: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= total;
    }
    Some(v)
}

pub fn solve_dpp(params: &GameParams, cfg: &SolverConfig) -> Result<EquilibriumProfile, LabError> {
    params.validate()?;
    cfg.validate()?;
    let n = params.n;
    let hi = params.b + params.c * n as f64;
    let roots = all_roots(|w| residual(params, w), cutoff_floor(params), hi, cfg.scan_points(), cfg.max_iter);
    let mut candidates = Vec::new();
    for ws in roots {
        let q_star = 1.0 / (params.delta * params.l * params.shock.cdf_diff(ws, ws - params.b));
        if !(q_star > 0.0 && q_star * n as f64 <= 1.0) {
            continue;
        }
        let (r, i) = marginal(params, ws);
        let Some(probs) = opportunistic_counts(n, r, params.pi_o) else { continue };
        let Ok(rule) = ConvictionRule::linear(n, q_star) else { continue };
        let Ok(profile) = StrategyProfile::new(
            *params,
            Principle::Distinct,
            PrincipalStrategy::Counts { probs },
            Cutoffs::Shared(AgentCutoffs { omega_star: ws, omega_star2: ws - params.b }),
            rule,
        ) else {
            continue;
        };
        candidates.push(Candidate { profile, q: q_star, informativeness: i, beta: None });
    }
    select(
        Regime::DppLinear,
        candidates,
        cfg,
        "no fixed point with per-accusation probability below 1/n; L is below the existence threshold",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_agent_matches_single_solver() {
        let p = GameParams { l: 1000.0, ..Default::default() };
        let cfg = SolverConfig::default();
        let a = solve_dpp(&p, &cfg).unwrap();
        let b = super::super::solve_single_agent(&p, &cfg).unwrap();
        assert!((a.q - b.q).abs() < 1e-9);
        assert!((a.pi - b.pi).abs() < 1e-9);
    }

    #[test]
    fn virtuous_type_preserves_marginal() {
        let v = opportunistic_counts(2, 0.1, 0.5).unwrap();
        let unconditional = [0.5 + 0.5 * v[0], 0.5 * v[1], 0.5 * v[2]];
        assert!((unconditional[0] - 0.81).abs() < 1e-15);
        assert!((unconditional[2] - 0.01).abs() < 1e-15);
        assert!(opportunistic_counts(2, 0.5, 0.5).is_none());
    }
}
