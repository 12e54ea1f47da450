//! Aggregate rule with complementary accusations (two agents): one
//! accusation convicts with probability `q > 1/2`, two always convict, and
//! the principal commits either both offenses or none.

use serde::{Deserialize, Serialize};

use super::roots::{all_roots, bisect};
use super::{cutoff_floor, select, Candidate, EquilibriumProfile, Regime, SolverConfig};
use crate::error::LabError;
use crate::game_model::{AgentCutoffs, ConvictionRule, Cutoffs, GameParams, PrincipalStrategy, Principle, StrategyProfile};

fn check(params: &GameParams) -> Result<(), LabError> {
    params.validate()?;
    if params.n != 2 {
        return Err(LabError::invalid("n", format!("complements regime needs n = 2, got {}", params.n)));
    }
    Ok(())
}

fn check_q(q: f64) -> Result<(), LabError> {
    if !(q > 0.5 && q <= 1.0) {
        return Err(LabError::invalid("q_target", format!("must lie in (1/2, 1], got {q}")));
    }
    Ok(())
}

/// Cost-to-benefit term of an accusation when the other agent accuses
/// with probability `psi`.
fn deterrent(p: &GameParams, q: f64, psi: f64) -> f64 {
    p.c * (1.0 - q) * (1.0 - psi) / (q + psi * (1.0 - 2.0 * q))
}

/// All cutoff pairs solving both agent equations at `q`.
fn cutoffs(p: &GameParams, q: f64, cfg: &SolverConfig) -> Vec<(f64, f64)> {
    if q >= 1.0 {
        return vec![(p.b, 0.0)];
    }
    let pts = cfg.scan_points();
    let ws = all_roots(|w| w - p.b + deterrent(p, q, p.psi(w)), cutoff_floor(p), p.b, pts, cfg.max_iter);
    let wss = all_roots(|w| w + deterrent(p, q, p.psi(w)), cutoff_floor(p), 0.0, pts, cfg.max_iter);
    ws.iter().flat_map(|a| wss.iter().map(move |b| (*a, *b))).filter(|(a, b)| a > b).collect()
}

/// Punishment making the principal indifferent between no and two offenses.
fn implied_l(p: &GameParams, q: f64, ws: f64, wss: f64) -> f64 {
    let (p1, p2) = (p.psi(ws), p.psi(wss));
    2.0 / (p.psi_gap(ws, wss) * ((1.0 - 2.0 * q) * (p1 + p2) + 2.0 * q))
}

fn build(p: &GameParams, q: f64, ws: f64, wss: f64) -> Option<Candidate> {
    let (p1, p2) = (p.psi(ws), p.psi(wss));
    let i = p1 * (1.0 - p1) / (p2 * (1.0 - p2));
    let ls = p.l_star();
    let pi = ls / (ls + i);
    if pi > p.pi_o {
        return None;
    }
    let both = pi / p.pi_o;
    let profile = StrategyProfile::new(
        *p,
        Principle::Aggregate,
        PrincipalStrategy::Counts { probs: vec![1.0 - both, 0.0, both] },
        Cutoffs::Shared(AgentCutoffs { omega_star: ws, omega_star2: wss }),
        ConvictionRule::symmetric(vec![0.0, q, 1.0]).ok()?,
    )
    .ok()?;
    Some(Candidate { profile, q, informativeness: (p1 / p2).powi(2), beta: None })
}

/// Solve at a given single-accusation probability; the punishment that
/// supports it is returned in the profile's parameters.
pub fn solve_app_complements(
    params: &GameParams,
    q_target: f64,
    cfg: &SolverConfig,
) -> Result<EquilibriumProfile, LabError> {
    check(params)?;
    check_q(q_target)?;
    cfg.validate()?;
    let pairs = cutoffs(params, q_target, cfg);
    if pairs.is_empty() {
        return Err(LabError::NonConvergence(format!("agent cutoff equations have no bracketed root at q = {q_target}")));
    }
    let candidates = pairs
        .into_iter()
        .filter_map(|(ws, wss)| build(&params.with_l(implied_l(params, q_target, ws, wss)), q_target, ws, wss))
        .collect();
    select(Regime::AppComplements, candidates, cfg, "implied prior exceeds the opportunistic share")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementsInterval {
    pub l_low: f64,
    pub l_high: f64,
    /// `(q, L(q))` on the scan grid.
    pub grid: Vec<(f64, f64)>,
}

impl ComplementsInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.l_low + self.l_high)
    }
}

/// Punishment implied by `q`, using the first cutoff pair found.
fn l_of_q(p: &GameParams, q: f64, cfg: &SolverConfig) -> Option<f64> {
    let (ws, wss) = *cutoffs(p, q, cfg).first()?;
    Some(implied_l(p, q, ws, wss))
}

/// Range of punishments supported by some `q` on the grid
/// `1/2 + j / (2N)`, `j = 1..=N`.
pub fn complements_l_interval(params: &GameParams, cfg: &SolverConfig) -> Result<ComplementsInterval, LabError> {
    check(params)?;
    cfg.validate()?;
    let steps = cfg.multistart_grid * 4;
    let grid: Vec<(f64, f64)> = (1..=steps)
        .filter_map(|j| {
            let q = 0.5 + j as f64 / (2.0 * steps as f64);
            l_of_q(params, q, cfg).filter(|l| l.is_finite() && *l > 0.0).map(|l| (q, l))
        })
        .collect();
    if grid.is_empty() {
        return Err(LabError::NonConvergence("no grid point yields a finite punishment".into()));
    }
    let l_low = grid.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let l_high = grid.iter().map(|g| g.1).fold(0.0, f64::max);
    Ok(ComplementsInterval { l_low, l_high, grid })
}

/// Locate the single-accusation probability supporting `params.l` and solve there.
pub fn solve_app_complements_at_l(params: &GameParams, cfg: &SolverConfig) -> Result<EquilibriumProfile, LabError> {
    let interval = complements_l_interval(params, cfg)?;
    let target = params.l.ln();
    let mut qs = Vec::new();
    for w in interval.grid.windows(2) {
        let ((q0, l0), (q1, l1)) = (w[0], w[1]);
        if (l0.ln() - target) * (l1.ln() - target) <= 0.0 {
            let f = |q: f64| l_of_q(params, q, cfg).map_or(f64::NAN, |l| l.ln() - target);
            if let Ok(q) = bisect(f, q0, q1, cfg.max_iter) {
                qs.push(q);
            }
        }
    }
    if qs.is_empty() {
        return Err(LabError::NoEquilibrium(format!(
            "L = {} lies outside the supported interval [{}, {}]",
            params.l, interval.l_low, interval.l_high
        )));
    }
    let mut candidates = Vec::new();
    for q in qs {
        for (ws, wss) in cutoffs(params, q, cfg) {
            // keep the requested punishment; the bisection matched it
            if let Some(c) = build(params, q, ws, wss) {
                candidates.push(c);
            }
        }
    }
    select(Regime::AppComplements, candidates, cfg, "implied prior exceeds the opportunistic share")
}
