//! One agent: the principal is indifferent about his single offense, the
//! judge is indifferent after an accusation.

use super::roots::all_roots;
use super::{select, Candidate, EquilibriumProfile, Regime, SolverConfig};
use crate::error::LabError;
use crate::game_model::{AgentCutoffs, ConvictionRule, Cutoffs, GameParams, PrincipalStrategy, Principle, StrategyProfile};

/// Expected punishment of the offense minus its benefit, as a function of
/// `x = ln q`.
fn cost_gap(p: &GameParams, x: f64) -> f64 {
    let q = x.exp();
    let ws = p.b - p.c * (1.0 - q) / q;
    p.delta * p.l * q * p.shock.cdf_diff(ws, ws - p.b) - 1.0
}

pub(crate) fn candidate(p: &GameParams, q: f64, regime_n: usize) -> Option<Candidate> {
    let ws = p.b - p.c * (1.0 - q) / q;
    let wss = ws - p.b;
    let i = p.psi(ws) / p.psi(wss);
    let ls = p.l_star();
    let pi = ls / (ls + i);
    if pi > p.pi_o {
        return None;
    }
    let profile = StrategyProfile::new(
        p.with_n(regime_n),
        Principle::Aggregate,
        PrincipalStrategy::Mixed { k: 1, r: 1.0 - pi / p.pi_o },
        Cutoffs::Shared(AgentCutoffs { omega_star: ws, omega_star2: wss }),
        ConvictionRule::symmetric(vec![0.0, q]).ok()?,
    )
    .ok()?;
    Some(Candidate { profile, q, informativeness: i, beta: None })
}

pub fn solve_single_agent(params: &GameParams, cfg: &SolverConfig) -> Result<EquilibriumProfile, LabError> {
    params.validate()?;
    cfg.validate()?;
    if params.n != 1 {
        return Err(LabError::invalid("n", format!("single-agent regime needs n = 1, got {}", params.n)));
    }
    // expected punishment never exceeds delta * L * q, so q >= 1 / (delta L)
    let lo = -(params.delta * params.l).ln().max(0.0);
    let roots = if lo >= 0.0 {
        Vec::new()
    } else {
        all_roots(|x| cost_gap(params, x), lo, 0.0, cfg.scan_points(), cfg.max_iter)
    };
    let candidates =
        roots.into_iter().map(f64::exp).filter(|q| *q > 0.0 && *q < 1.0).filter_map(|q| candidate(params, q, 1)).collect();
    select(
        Regime::SingleAgent,
        candidates,
        cfg,
        "expected punishment never equals the offense benefit for q in (0,1); L is below the existence threshold",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_at_l5() {
        let p = GameParams::default();
        let eq = solve_single_agent(&p, &SolverConfig::default()).unwrap();
        assert!((eq.omega_star() - eq.omega_star2() - 1.0).abs() < 1e-12);
        assert!(eq.residual < 1e-10);
    }

    #[test]
    fn small_l_has_no_equilibrium() {
        let p = GameParams { l: 2.0, ..Default::default() };
        let err = solve_single_agent(&p, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, LabError::NoEquilibrium(_)));
    }
}
