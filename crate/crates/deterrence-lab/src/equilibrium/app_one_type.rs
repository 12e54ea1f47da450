//! Aggregate rule, opportunistic prior at or above the threshold: the
//! principal mixes between no offense and one uniformly placed offense and
//! the judge convicts only on unanimous accusation.

use super::roots::{all_roots, bisect};
use super::single::solve_single_agent;
use super::{cutoff_floor, select, Candidate, EquilibriumProfile, Regime, SolverConfig};
use crate::error::LabError;
use crate::game_model::{AgentCutoffs, ConvictionRule, Cutoffs, GameParams, PrincipalStrategy, Principle, StrategyProfile};

struct Point {
    ws: f64,
    wss: f64,
    i: f64,
    beta: f64,
    q: f64,
    residual: f64,
}

/// Given the non-witness cutoff, solve the witness cutoff equation and
/// return the residual of the non-witness equation.
fn evaluate(p: &GameParams, wss: f64, max_iter: usize) -> Option<Point> {
    let n = p.n as f64;
    let k = p.c * p.delta * p.l;
    // omega* - b - c + c delta L (Phi(omega*) - Phi(omega**)) is increasing
    // and changes sign on [omega**, b + c]
    let hi = p.b + p.c;
    if wss >= hi {
        return None;
    }
    let ws = bisect(|w| w - hi + k * p.shock.cdf_diff(w, wss), wss, hi, max_iter).ok()?;
    let dphi = p.shock.cdf_diff(ws, wss);
    let psi2 = p.psi(wss);
    let i = p.psi(ws) / psi2;
    let ls = p.l_star();
    let beta = n * i / (n * i + (n - 1.0) * ls);
    let residual = wss - p.c + k * dphi / (beta + (1.0 - beta) * i);
    let q = 1.0 / (p.delta * p.l * dphi * psi2.powi(p.n as i32 - 1));
    Some(Point { ws, wss, i, beta, q, residual })
}

pub fn solve_app_one_type(params: &GameParams, cfg: &SolverConfig) -> Result<EquilibriumProfile, LabError> {
    params.validate()?;
    cfg.validate()?;
    if params.pi_o < params.pi_star {
        return Err(LabError::invalid(
            "pi_o",
            format!("one-type regime needs pi_o >= pi_star ({}), got {}", params.pi_star, params.pi_o),
        ));
    }
    if params.n == 1 {
        let mut eq = solve_single_agent(params, cfg)?;
        eq.regime = Regime::AppOneType;
        return Ok(eq);
    }
    let roots = all_roots(
        |w| evaluate(params, w, cfg.max_iter).map_or(f64::NAN, |pt| pt.residual),
        cutoff_floor(params),
        params.c,
        cfg.scan_points(),
        cfg.max_iter,
    );
    let ls = params.l_star();
    let mut candidates = Vec::new();
    for wss in roots {
        let Some(pt) = evaluate(params, wss, cfg.max_iter) else { continue };
        if !(pt.q > 0.0 && pt.q < 1.0) {
            continue;
        }
        let pi = ls / (ls + pt.i);
        let Ok(rule) = ConvictionRule::unanimous(params.n, pt.q) else { continue };
        let Ok(profile) = StrategyProfile::new(
            *params,
            Principle::Aggregate,
            PrincipalStrategy::Mixed { k: 1, r: 1.0 - pi / params.pi_o },
            Cutoffs::Shared(AgentCutoffs { omega_star: pt.ws, omega_star2: pt.wss }),
            rule,
        ) else {
            continue;
        };
        candidates.push(Candidate { profile, q: pt.q, informativeness: pt.i, beta: Some(pt.beta) });
    }
    select(
        Regime::AppOneType,
        candidates,
        cfg,
        "no fixed point with an interior unanimous-conviction probability; L is below the existence threshold",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk() -> GameParams {
        GameParams { n: 2, b: 0.1, c: 0.02, delta: 0.999, l: 1e3, ..Default::default() }
    }

    #[test]
    fn two_agents_solve() {
        let eq = solve_app_one_type(&desk(), &SolverConfig::default()).unwrap();
        let gap = eq.omega_star() - eq.omega_star2();
        assert!(gap > 0.0 && gap < 0.1);
        assert!(eq.residual < 1e-10);
        assert!(eq.diagnostics.correlation.unwrap() < 0.0);
    }

    #[test]
    fn ratio_identity_two_agents() {
        let p = desk();
        let eq = solve_app_one_type(&p, &SolverConfig::default()).unwrap();
        let ls = p.l_star();
        let i = eq.informativeness_max;
        let lhs = (eq.omega_star() - p.c - p.b).abs() / (eq.omega_star2() - p.c).abs();
        let rhs = (ls + 2.0) * i / (ls + 2.0 * i);
        assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn baseline_costs_rule_out_two_agents() {
        let p = GameParams { n: 2, l: 50.0, ..Default::default() };
        assert!(solve_app_one_type(&p, &SolverConfig::default()).is_err());
    }

    #[test]
    fn rejects_low_opportunistic_prior() {
        let p = GameParams { n: 2, pi_o: 0.5, ..Default::default() };
        assert!(solve_app_one_type(&p, &SolverConfig::default()).unwrap_err().to_string().contains("pi_o"));
    }
}
