//! Seeded simulation of the three-stage game.
//!
//! Draw `k` uses the ChaCha8 stream `k` of the master seed, so the merged
//! counts do not depend on how draws are split across worker threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{enumerate_outcomes, mask_label};
use crate::error::LabError;
use crate::game_model::{StrategyProfile, MAX_ENUM_N};

const BLOCK: u64 = 4096;

/// Frequency of one report vector, optionally split by verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub reports: String,
    pub convicted: Option<bool>,
    pub count: u64,
    pub frequency: f64,
    pub probability: f64,
    pub std_error: f64,
    /// Share of draws with at least one offense among draws with these reports.
    pub empirical_posterior: Option<f64>,
    pub posterior: Option<f64>,
}

impl ReportRow {
    /// Deviation from the analytic probability in standard errors.
    pub fn z_score(&self) -> f64 {
        let dev = (self.frequency - self.probability).abs();
        if dev == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            dev / self.std_error
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub offenses: String,
    pub count: u64,
    pub frequency: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub draws: u64,
    pub seed: u64,
    pub convictions: u64,
    /// One row per report vector.
    pub reports: Vec<ReportRow>,
    /// One row per (report vector, verdict) pair.
    pub events: Vec<ReportRow>,
    pub offenses: Vec<ThetaRow>,
}

impl MonteCarloReport {
    pub fn max_z(&self) -> f64 {
        self.reports.iter().chain(&self.events).map(ReportRow::z_score).fold(0.0, f64::max)
    }

    /// Whether every report and event frequency lies within `k` standard errors.
    pub fn within(&self, k: f64) -> bool {
        self.max_z() <= k
    }
}

#[derive(Clone)]
struct Counts {
    events: Vec<u64>,
    guilty: Vec<u64>,
    theta: Vec<u64>,
}

impl Counts {
    fn new(n: usize) -> Self {
        Self { events: vec![0; 2 << n], guilty: vec![0; 1 << n], theta: vec![0; 1 << n] }
    }

    fn merge(mut self, other: Counts) -> Counts {
        for (a, b) in self.events.iter_mut().zip(other.events) {
            *a += b;
        }
        for (a, b) in self.guilty.iter_mut().zip(other.guilty) {
            *a += b;
        }
        for (a, b) in self.theta.iter_mut().zip(other.theta) {
            *a += b;
        }
        self
    }
}

struct Sampler<'a> {
    profile: &'a StrategyProfile,
    theta: WeightedIndex<f64>,
    shock: Normal<f64>,
}

impl Sampler<'_> {
    fn draw(&self, rng: &mut ChaCha8Rng, acc: &mut Counts) {
        let p = &self.profile.params;
        let theta = if rng.random::<f64>() < p.pi_o { self.theta.sample(rng) as u32 } else { 0 };
        let mut a = 0u32;
        for i in 0..p.n {
            let accuse = if rng.random::<f64>() < p.delta {
                let cut = self.profile.cutoffs.agent(i).get(theta >> i & 1 == 1);
                self.shock.sample(rng) <= cut
            } else {
                rng.random::<f64>() < p.alpha
            };
            if accuse {
                a |= 1 << i;
            }
        }
        let convicted = rng.random::<f64>() < self.profile.rule.prob(a);
        acc.events[2 * a as usize + convicted as usize] += 1;
        acc.theta[theta as usize] += 1;
        if theta != 0 {
            acc.guilty[a as usize] += 1;
        }
    }
}

fn row(reports: String, convicted: Option<bool>, count: u64, draws: u64, probability: f64) -> ReportRow {
    let nf = draws as f64;
    ReportRow {
        reports,
        convicted,
        count,
        frequency: count as f64 / nf,
        probability,
        std_error: (probability * (1.0 - probability) / nf).max(0.0).sqrt(),
        empirical_posterior: None,
        posterior: None,
    }
}

/// Simulate `draws` plays of the game and compare with the exact outcome table.
pub fn monte_carlo(profile: &StrategyProfile, draws: u64, seed: u64) -> Result<MonteCarloReport, LabError> {
    if draws == 0 {
        return Err(LabError::invalid("draws", "must be at least 1"));
    }
    let n = profile.n();
    if n > MAX_ENUM_N {
        return Err(LabError::Domain(format!("simulation reports need n <= {MAX_ENUM_N}")));
    }
    let sigma = profile.principal.theta_distribution(n)?;
    let theta = WeightedIndex::new(&sigma).map_err(|e| LabError::invalid("principal", e.to_string()))?;
    let shock = Normal::new(profile.params.shock.mean, profile.params.shock.std_dev)
        .map_err(|e| LabError::invalid("sigma", e.to_string()))?;
    let sampler = Sampler { profile, theta, shock };

    let blocks = draws.div_ceil(BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut acc = Counts::new(n);
            let start = blk * BLOCK;
            for k in start..(start + BLOCK).min(draws) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k);
                sampler.draw(&mut rng, &mut acc);
            }
            acc
        })
        .reduce(|| Counts::new(n), Counts::merge);

    let table = enumerate_outcomes(profile)?;
    let report_p = table.report_probs();
    let event_p = table.event_probs();
    let theta_p = table.theta_probs();
    let posterior = table.posterior_aggregate();

    let mut reports = Vec::with_capacity(1 << n);
    let mut events = Vec::with_capacity(2 << n);
    for a in 0..(1usize << n) {
        let label = mask_label(a as u32, n);
        let count = counts.events[2 * a] + counts.events[2 * a + 1];
        let mut r = row(label.clone(), None, count, draws, report_p[a]);
        r.empirical_posterior = (count > 0).then(|| counts.guilty[a] as f64 / count as f64);
        r.posterior = Some(posterior[a]);
        reports.push(r);
        for s in [false, true] {
            let idx = 2 * a + s as usize;
            events.push(row(label.clone(), Some(s), counts.events[idx], draws, event_p[idx]));
        }
    }
    let offenses = (0..(1usize << n))
        .map(|t| ThetaRow {
            offenses: mask_label(t as u32, n),
            count: counts.theta[t],
            frequency: counts.theta[t] as f64 / draws as f64,
            probability: theta_p[t],
        })
        .collect();
    let convictions = (0..(1usize << n)).map(|a| counts.events[2 * a + 1]).sum();
    Ok(MonteCarloReport { draws, seed, convictions, reports, events, offenses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_model::{AgentCutoffs, ConvictionRule, Cutoffs, GameParams, PrincipalStrategy, Principle};

    fn profile() -> StrategyProfile {
        StrategyProfile::new(
            GameParams { n: 2, pi_o: 0.7, l: 2.0, ..Default::default() },
            Principle::Aggregate,
            PrincipalStrategy::Mixed { k: 1, r: 0.4 },
            Cutoffs::Shared(AgentCutoffs { omega_star: 0.2, omega_star2: -0.5 }),
            ConvictionRule::symmetric(vec![0.0, 0.2, 0.6]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn same_seed_same_report() {
        let p = profile();
        let a = monte_carlo(&p, 20_000, 7).unwrap();
        let b = monte_carlo(&p, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo(&p, 20_000, 8).unwrap();
        assert_ne!(a.reports, c.reports);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let p = profile();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| monte_carlo(&p, 30_000, 3).unwrap());
        let b = four.install(|| monte_carlo(&p, 30_000, 3).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn agrees_with_enumeration() {
        let r = monte_carlo(&profile(), 200_000, 11).unwrap();
        assert!(r.within(4.0), "max z {}", r.max_z());
        let total: f64 = r.reports.iter().map(|x| x.frequency).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // no offense vector outside the support
        assert_eq!(r.offenses[0b11].count, 0);
    }

    #[test]
    fn silent_judge_never_convicts() {
        let mut p = profile();
        p.rule = ConvictionRule::Symmetric { q: vec![0.0; 3] };
        let r = monte_carlo(&p, 10_000, 1).unwrap();
        assert_eq!(r.convictions, 0);
    }

    #[test]
    fn zero_draws_rejected() {
        assert!(monte_carlo(&profile(), 0, 1).is_err());
    }
}
