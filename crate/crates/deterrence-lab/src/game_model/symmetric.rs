//! Count-based formulas for symmetric profiles.
//!
//! When the principal picks targets uniformly, every agent shares one cutoff
//! pair, and the rule depends only on the number of accusations, all
//! equilibrium quantities depend on counts alone. These routines scale to
//! populations far beyond exact enumeration and work in log space where
//! products of many small probabilities would underflow.

use statrs::function::factorial::ln_binomial;

use super::strategy::StrategyProfile;

/// Distribution of the number of accusations among `hit` witnesses and
/// `rest` non-witnesses.
pub fn accuser_distribution(hit: usize, rest: usize, psi1: f64, psi0: f64) -> Vec<f64> {
    fn add_agent(dist: &mut Vec<f64>, p: f64) {
        dist.push(0.0);
        for k in (0..dist.len()).rev() {
            let moved = if k > 0 { dist[k - 1] * p } else { 0.0 };
            dist[k] = dist[k] * (1.0 - p) + moved;
        }
    }
    let mut dist = Vec::with_capacity(hit + rest + 1);
    dist.push(1.0);
    for _ in 0..hit {
        add_agent(&mut dist, psi1);
    }
    for _ in 0..rest {
        add_agent(&mut dist, psi0);
    }
    dist
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        f64::NEG_INFINITY
    } else {
        ln_binomial(n as u64, k as u64)
    }
}

fn xlny(x: usize, y: f64) -> f64 {
    if x == 0 {
        0.0
    } else {
        x as f64 * y.ln()
    }
}

#[derive(Debug, Clone)]
pub struct SymmetricView {
    pub n: usize,
    pub psi1: f64,
    pub psi0: f64,
    pub gap: f64,
    /// Unconditional probability of `m` offenses, virtuous type included.
    pub counts: Vec<f64>,
    pub q: Vec<f64>,
    pub b: f64,
    pub c: f64,
    pub l: f64,
}

impl SymmetricView {
    pub fn of(profile: &StrategyProfile) -> Option<Self> {
        if !profile.is_symmetric() {
            return None;
        }
        let cut = profile.cutoffs.shared()?;
        let p = &profile.params;
        Some(Self {
            n: p.n,
            psi1: p.psi(cut.omega_star),
            psi0: p.psi(cut.omega_star2),
            gap: p.psi_gap(cut.omega_star, cut.omega_star2),
            counts: profile.count_distribution()?,
            q: profile.rule.by_count()?.to_vec(),
            b: p.b,
            c: p.c,
            l: p.l,
        })
    }

    /// Weights over the number of offended agents among the other `n - 1`,
    /// given an agent's own observation.
    pub fn others_offended(&self, witnessed: bool) -> Option<Vec<f64>> {
        let n = self.n as f64;
        let mut w = vec![0.0; self.n];
        for (m, p) in self.counts.iter().enumerate() {
            if witnessed && m >= 1 {
                w[m - 1] += p * m as f64 / n;
            } else if !witnessed && m < self.n {
                w[m] += p * (self.n - m) as f64 / n;
            }
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return None;
        }
        Some(w.into_iter().map(|x| x / total).collect())
    }

    /// Expected conviction-probability increase from accusing, and expected
    /// acquittal probability when accusing.
    pub fn agent_terms(&self, witnessed: bool) -> Option<(f64, f64)> {
        let w = self.others_offended(witnessed)?;
        let (mut d, mut s) = (0.0, 0.0);
        for (hit, wm) in w.iter().enumerate() {
            if *wm == 0.0 {
                continue;
            }
            let k = accuser_distribution(hit, self.n - 1 - hit, self.psi1, self.psi0);
            for (j, pk) in k.iter().enumerate() {
                d += wm * pk * (self.q[j + 1] - self.q[j]);
                s += wm * pk * (1.0 - self.q[j + 1]);
            }
        }
        Some((d, s))
    }

    /// Best-response cutoff; `-inf` when accusing never changes the outcome.
    pub fn best_response(&self, witnessed: bool) -> Option<f64> {
        let (d, s) = self.agent_terms(witnessed)?;
        let base = if witnessed { self.b } else { 0.0 };
        Some(if d > 0.0 { base - self.c * s / d } else { f64::NEG_INFINITY })
    }

    /// Payoff change from the `m`-th offense (`m >= 1`).
    pub fn payoff_increment(&self, m: usize) -> f64 {
        let k = accuser_distribution(m - 1, self.n - m, self.psi1, self.psi0);
        let dq: f64 = k.iter().enumerate().map(|(j, p)| p * (self.q[j + 1] - self.q[j])).sum();
        1.0 - self.l * self.gap * dq
    }

    /// Opportunistic payoff of `m` offenses relative to none.
    pub fn relative_payoffs(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        let mut acc = 0.0;
        for m in 1..=self.n {
            acc += self.payoff_increment(m);
            out.push(acc);
        }
        out
    }

    /// ln Pr(reports of a group | `hit` of its members uniformly offended),
    /// the group holding `acc` accusers and `non` silent agents.
    fn ln_group(&self, acc: usize, non: usize, hit: usize) -> f64 {
        let size = acc + non;
        if hit > size {
            return f64::NEG_INFINITY;
        }
        let lo = hit.saturating_sub(non);
        let hi = hit.min(acc);
        let terms: Vec<f64> = (lo..=hi)
            .map(|j| {
                ln_choose(acc, j) + ln_choose(non, hit - j) - ln_choose(size, hit)
                    + xlny(j, self.psi1)
                    + xlny(acc - j, self.psi0)
                    + xlny(hit - j, 1.0 - self.psi1)
                    + xlny(non - (hit - j), 1.0 - self.psi0)
            })
            .collect();
        log_sum_exp(&terms)
    }

    /// `Pr(at least one offense | a)` for any `a` with `s` accusations.
    pub fn posterior_aggregate(&self, s: usize) -> f64 {
        let mut guilty = Vec::new();
        let mut all = Vec::new();
        for (m, p) in self.counts.iter().enumerate() {
            if *p <= 0.0 {
                continue;
            }
            let v = p.ln() + self.ln_group(s, self.n - s, m);
            all.push(v);
            if m > 0 {
                guilty.push(v);
            }
        }
        (log_sum_exp(&guilty) - log_sum_exp(&all)).exp()
    }

    /// `Pr(theta_i = 1 | a)` for an agent who accused (`accuser`) or stayed
    /// silent, when `a` holds `s` accusations.
    pub fn posterior_specific(&self, s: usize, accuser: bool) -> f64 {
        if (accuser && s == 0) || (!accuser && s == self.n) {
            return f64::NAN;
        }
        let mut hit = Vec::new();
        let mut all = Vec::new();
        for (m, p) in self.counts.iter().enumerate() {
            if *p <= 0.0 {
                continue;
            }
            all.push(p.ln() + self.ln_group(s, self.n - s, m));
            if m == 0 {
                continue;
            }
            let own = if accuser { self.psi1 } else { 1.0 - self.psi1 };
            let rest = if accuser {
                self.ln_group(s - 1, self.n - s, m - 1)
            } else {
                self.ln_group(s, self.n - s - 1, m - 1)
            };
            hit.push(p.ln() + (m as f64 / self.n as f64).ln() + own.ln() + rest);
        }
        (log_sum_exp(&hit) - log_sum_exp(&all)).exp()
    }

    /// Largest per-offense posterior for a report vector with `s` accusations.
    pub fn posterior_specific_max(&self, s: usize) -> f64 {
        let a = if s > 0 { self.posterior_specific(s, true) } else { f64::NAN };
        let b = if s < self.n { self.posterior_specific(s, false) } else { f64::NAN };
        a.max(b)
    }

    /// `Pr(theta_i = 1 | theta_j = 1) - Pr(theta_i = 1 | theta_j = 0)` for
    /// any two distinct agents.
    pub fn offense_correlation(&self) -> Option<f64> {
        if self.n < 2 {
            return None;
        }
        let n = self.n as f64;
        let pj: f64 = self.counts.iter().enumerate().map(|(m, p)| p * m as f64 / n).sum();
        let both: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(m, p)| p * (m * m.saturating_sub(1)) as f64 / (n * (n - 1.0)))
            .sum();
        if pj <= 0.0 || pj >= 1.0 {
            return None;
        }
        Some(both / pj - (pj - both) / (1.0 - pj))
    }

    /// Likelihood ratio of guilt versus innocence for `s` accusations.
    pub fn informativeness(&self, s: usize) -> f64 {
        let guilty: Vec<f64> = self
            .counts
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, p)| **p > 0.0)
            .map(|(m, p)| p.ln() + self.ln_group(s, self.n - s, m))
            .collect();
        let mass: f64 = self.counts.iter().skip(1).sum();
        (log_sum_exp(&guilty) - mass.ln() - self.ln_group(s, self.n - s, 0)).exp()
    }
}
