//! Aggregate rule with a virtuous type and an opportunistic prior below the
//! threshold. The opportunistic type commits `k - 1` offenses with
//! probability `r` and `k` otherwise; conviction requires unanimous
//! accusation.
//!
//! For a fixed informativeness `I = psi* / psi**` the judge condition pins
//! down `r`, the two cutoff equations reduce to one equation in the
//! non-witness cutoff, and the principal's indifference is the outer
//! equation in `I`. Pure strategies (`r = 0`) fix `I` and are checked
//! against the payoff inequalities instead.

use super::roots::{all_roots, bisect};
use super::{cutoff_floor, select, Candidate, EquilibriumProfile, Regime, SolverConfig};
use crate::error::LabError;
use crate::game_model::symmetric::SymmetricView;
use crate::game_model::{AgentCutoffs, ConvictionRule, Cutoffs, GameParams, PrincipalStrategy, Principle, StrategyProfile};

struct Setup<'a> {
    p: &'a GameParams,
    k: usize,
    /// Relative odds threshold.
    l2: f64,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    ws: f64,
    wss: f64,
    q: f64,
    r: f64,
    /// `ln Lambda_k`, `ln Lambda_{k+1}` (the latter `+inf` when `k = n`).
    ln_lambda: (f64, f64),
}

impl Setup<'_> {
    /// Mixing probability that makes the judge indifferent at unanimity.
    fn r_of(&self, i: f64) -> f64 {
        let p = self.p;
        if self.k == 1 {
            (p.pi_o * i - p.l_star() * (1.0 - p.pi_o)) / (p.pi_o * (i + p.l_star()))
        } else {
            let hi = i.powi(self.k as i32);
            (hi - self.l2) / (hi - i.powi(self.k as i32 - 1))
        }
    }

    /// Offense-count weights seen by a witness and by a non-witness.
    fn weights(&self, r: f64) -> (Vec<f64>, Vec<f64>) {
        let p = self.p;
        let n = p.n;
        let mut counts = vec![0.0; n + 1];
        counts[self.k - 1] += p.pi_o * r;
        counts[self.k] += p.pi_o * (1.0 - r);
        counts[0] += 1.0 - p.pi_o;
        let w1: Vec<f64> = counts.iter().enumerate().map(|(m, x)| x * m as f64).collect();
        let w0: Vec<f64> = counts.iter().enumerate().map(|(m, x)| x * (n - m) as f64).collect();
        let (s1, s0): (f64, f64) = (w1.iter().sum(), w0.iter().sum());
        (w1.into_iter().map(|x| x / s1).collect(), w0.into_iter().map(|x| x / s0).collect())
    }

    /// `Q_t / psi**^(n-1)` for witness (`t = 1`) and non-witness.
    fn scaled_q(&self, i: f64, r: f64) -> (f64, f64) {
        let (w1, w0) = self.weights(r);
        let a1 = w1.iter().enumerate().skip(1).map(|(m, w)| w * i.powi(m as i32 - 1)).sum();
        let a0 = w0.iter().enumerate().map(|(m, w)| w * i.powi(m as i32)).sum();
        (a1, a0)
    }

    /// Residual of the cutoff-consistency equation at non-witness cutoff
    /// `wss`, together with the implied point.
    fn inner(&self, i: f64, r: f64, wss: f64) -> Option<(f64, Point)> {
        let p = self.p;
        let psi2 = p.psi(wss);
        let ws = p.cutoff_for_psi(i * psi2)?;
        if ws >= p.b + p.c {
            return None;
        }
        let (a1, a0) = self.scaled_q(i, r);
        let resid = (p.c - wss) * a0 - (p.b + p.c - ws) * a1;
        let n = p.n as i32;
        let q1 = a1 * psi2.powi(n - 1);
        let q = p.c / (q1 * (p.b + p.c - ws));
        let base = p.l.ln() + q.ln() + p.psi_gap(ws, wss).ln() + (n - self.k as i32) as f64 * psi2.ln();
        let ln_psi1 = p.psi(ws).ln();
        let lk = base + (self.k as f64 - 1.0) * ln_psi1;
        let lk1 = if self.k == p.n { f64::INFINITY } else { lk + ln_psi1 - psi2.ln() };
        Some((resid, Point { ws, wss, q, r, ln_lambda: (lk, lk1) }))
    }

    fn inner_roots(&self, i: f64, r: f64, cfg: &SolverConfig) -> Vec<Point> {
        let f = |w: f64| self.inner(i, r, w).map_or(f64::NAN, |x| x.0);
        all_roots(f, cutoff_floor(self.p), self.p.c, cfg.scan_points(), cfg.max_iter)
            .into_iter()
            .filter_map(|w| self.inner(i, r, w).map(|x| x.1))
            .collect()
    }

    /// Outer residual `ln Lambda_k` on inner branch `j` at `ln I = x`.
    fn outer(&self, x: f64, j: usize, cfg: &SolverConfig) -> f64 {
        let i = x.exp();
        let r = self.r_of(i);
        self.inner_roots(i, r, cfg).get(j).map_or(f64::NAN, |pt| pt.ln_lambda.0)
    }

    fn interval(&self) -> Option<(f64, f64)> {
        let p = self.p;
        if self.k == 1 {
            let floor = p.behavioral_floor();
            Some((self.l2.ln(), ((p.delta + floor) / floor).ln()))
        } else {
            let k = self.k as f64;
            Some((self.l2.ln() / k, self.l2.ln() / (k - 1.0)))
        }
    }

    fn interior(&self, cfg: &SolverConfig) -> Vec<Point> {
        let Some((lo, hi)) = self.interval() else { return Vec::new() };
        let m = cfg.multistart_grid * 16;
        let xs: Vec<f64> = (1..m).map(|j| lo + (hi - lo) * j as f64 / m as f64).collect();
        let rows: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| {
                let i = x.exp();
                self.inner_roots(i, self.r_of(i), cfg).iter().map(|pt| pt.ln_lambda.0).collect()
            })
            .collect();
        let mut out = Vec::new();
        for w in 0..xs.len().saturating_sub(1) {
            let (a, b) = (&rows[w], &rows[w + 1]);
            if a.len() != b.len() {
                continue;
            }
            for j in 0..a.len() {
                if a[j].is_finite() && b[j].is_finite() && a[j].signum() != b[j].signum() {
                    if let Ok(x) = bisect(|x| self.outer(x, j, cfg), xs[w], xs[w + 1], cfg.max_iter) {
                        let i = x.exp();
                        let r = self.r_of(i);
                        if let Some(pt) = self.inner_roots(i, r, cfg).get(j) {
                            out.push(self.polish(*pt, i, cfg));
                        }
                    }
                }
            }
        }
        out
    }

    /// Damped Newton steps on (cutoff consistency, indifference) in
    /// `(omega**, ln I)`; kept only if they shrink the residual.
    fn polish(&self, start: Point, i0: f64, cfg: &SolverConfig) -> Point {
        let eval = |wss: f64, x: f64| -> Option<([f64; 2], Point)> {
            let i = x.exp();
            let r = self.r_of(i);
            let (a, pt) = self.inner(i, r, wss)?;
            Some(([a, pt.ln_lambda.0], pt))
        };
        let norm = |f: &[f64; 2]| f[0].abs().max(f[1].abs());
        let mut state = (start.wss, i0.ln());
        let Some((mut f, mut best)) = eval(state.0, state.1) else { return start };
        for _ in 0..cfg.max_iter.min(200) {
            if norm(&f) < 1e-15 {
                break;
            }
            let h0 = 1e-7 * state.0.abs().max(1.0);
            let h1 = 1e-7 * state.1.abs().max(1.0);
            let (Some((fa, _)), Some((fb, _))) = (eval(state.0 + h0, state.1), eval(state.0, state.1 + h1)) else {
                break;
            };
            let j = [[(fa[0] - f[0]) / h0, (fb[0] - f[0]) / h1], [(fa[1] - f[1]) / h0, (fb[1] - f[1]) / h1]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dx = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
            let dy = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
            let next = (state.0 - cfg.damping * dx, state.1 - cfg.damping * dy);
            match eval(next.0, next.1) {
                Some((fn_, pt)) if norm(&fn_) < norm(&f) => {
                    state = next;
                    f = fn_;
                    best = pt;
                }
                _ => break,
            }
        }
        best
    }

    fn pure(&self, cfg: &SolverConfig) -> Vec<Point> {
        let i = if self.k == 1 { self.l2 } else { self.l2.powf(1.0 / self.k as f64) };
        self.inner_roots(i, 0.0, cfg)
            .into_iter()
            .filter(|pt| pt.ln_lambda.0 <= 0.0 && pt.ln_lambda.1 >= 0.0)
            .collect()
    }
}

pub fn solve_app_two_type(params: &GameParams, cfg: &SolverConfig) -> Result<EquilibriumProfile, LabError> {
    params.validate()?;
    cfg.validate()?;
    if params.pi_o >= params.pi_star {
        return Err(LabError::invalid(
            "pi_o",
            format!("two-type regime needs pi_o < pi_star ({}), got {}; use the one-type regime", params.pi_star, params.pi_o),
        ));
    }
    let l2 = params.l_star_relative();
    let mut candidates = Vec::new();
    for k in 1..=params.n {
        let setup = Setup { p: params, k, l2 };
        for pt in setup.interior(cfg).into_iter().chain(setup.pure(cfg)) {
            if let Some(c) = build(params, k, pt) {
                candidates.push(c);
            }
        }
    }
    select(
        Regime::AppTwoType,
        candidates,
        cfg,
        "no (k, r) strategy supports an interior unanimous-conviction probability at this L",
    )
}

fn build(p: &GameParams, k: usize, pt: Point) -> Option<Candidate> {
    if !(pt.q > 0.0 && pt.q < 1.0 && pt.r >= 0.0 && pt.r < 1.0) {
        return None;
    }
    let profile = StrategyProfile::new(
        *p,
        Principle::Aggregate,
        PrincipalStrategy::Mixed { k, r: pt.r },
        Cutoffs::Shared(AgentCutoffs { omega_star: pt.ws, omega_star2: pt.wss }),
        ConvictionRule::unanimous(p.n, pt.q).ok()?,
    )
    .ok()?;
    let view = SymmetricView::of(&profile)?;
    let informativeness = (0..=p.n).map(|s| view.informativeness(s)).fold(0.0, f64::max);
    let beta = view.others_offended(false).map(|w| w[0]);
    Some(Candidate { profile, q: pt.q, informativeness, beta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_high_prior() {
        let p = GameParams { n: 2, pi_o: 0.99, ..Default::default() };
        assert!(solve_app_two_type(&p, &SolverConfig::default()).unwrap_err().to_string().contains("pi_o"));
    }

    #[test]
    fn judge_mixing_inverts_posterior() {
        let p = GameParams { n: 2, pi_o: 0.5, ..Default::default() };
        let s = Setup { p: &p, k: 2, l2: p.l_star_relative() };
        let i = 6.0;
        let r = s.r_of(i);
        assert!((r * i + (1.0 - r) * i * i - 19.0).abs() < 1e-12);
        let s1 = Setup { k: 1, ..s };
        let r = s1.r_of(30.0);
        assert!((0.5 * (1.0 - r) * 30.0 / (0.5 + 0.5 * r) - 19.0).abs() < 1e-12);
    }
}
