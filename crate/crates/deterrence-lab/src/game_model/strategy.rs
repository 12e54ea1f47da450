use serde::{Deserialize, Serialize};

use super::params::{GameParams, MAX_ENUM_N};
use super::rule::ConvictionRule;
use crate::error::LabError;

/// Opportunistic principal's mixed strategy over offense vectors.
///
/// The virtuous type always commits no offense and is not represented here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrincipalStrategy {
    /// Probability of each offense vector, indexed by bit mask.
    Full { probs: Vec<f64> },
    /// `k - 1` offenses with probability `r`, `k` offenses otherwise; targets uniform.
    Mixed { k: usize, r: f64 },
    /// Probability of committing `m` offenses, `m = 0..=n`; targets uniform.
    Counts { probs: Vec<f64> },
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

fn check_dist(key: &str, probs: &[f64]) -> Result<(), LabError> {
    if probs.iter().any(|p| !(*p >= 0.0 && *p <= 1.0)) {
        return Err(LabError::invalid(key, "probabilities must lie in [0,1]"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(LabError::invalid(key, format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

impl PrincipalStrategy {
    /// Independent offenses with marginal `p` per agent.
    pub fn independent(n: usize, p: f64) -> Self {
        PrincipalStrategy::Counts {
            probs: (0..=n)
                .map(|m| binomial(n, m) * p.powi(m as i32) * (1.0 - p).powi((n - m) as i32))
                .collect(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), LabError> {
        match self {
            PrincipalStrategy::Full { probs } => {
                if n > MAX_ENUM_N || probs.len() != 1 << n {
                    return Err(LabError::invalid("principal", format!("full distribution needs 2^{n} entries")));
                }
                check_dist("principal", probs)
            }
            PrincipalStrategy::Mixed { k, r } => {
                if *k < 1 || *k > n {
                    return Err(LabError::invalid("principal", format!("k must lie in 1..={n}, got {k}")));
                }
                if !(*r >= 0.0 && *r <= 1.0) {
                    return Err(LabError::invalid("principal", format!("r must lie in [0,1], got {r}")));
                }
                Ok(())
            }
            PrincipalStrategy::Counts { probs } => {
                if probs.len() != n + 1 {
                    return Err(LabError::invalid("principal", format!("count distribution needs {} entries", n + 1)));
                }
                check_dist("principal", probs)
            }
        }
    }

    /// Distribution over the number of offenses, when targets are uniform.
    pub fn count_distribution(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            PrincipalStrategy::Full { .. } => None,
            PrincipalStrategy::Counts { probs } => Some(probs.clone()),
            PrincipalStrategy::Mixed { k, r } => {
                let mut v = vec![0.0; n + 1];
                v[*k] += 1.0 - r;
                v[*k - 1] += *r;
                Some(v)
            }
        }
    }

    /// Probability of each offense vector (requires `n <= 16`).
    pub fn theta_distribution(&self, n: usize) -> Result<Vec<f64>, LabError> {
        if n > MAX_ENUM_N {
            return Err(LabError::Domain(format!("enumeration supports n <= {MAX_ENUM_N}")));
        }
        if let PrincipalStrategy::Full { probs } = self {
            return Ok(probs.clone());
        }
        let counts = self.count_distribution(n).expect("symmetric strategy");
        Ok((0..(1u32 << n))
            .map(|t| {
                let m = t.count_ones() as usize;
                counts[m] / binomial(n, m)
            })
            .collect())
    }

    /// Probability of committing at least one offense.
    pub fn aggregate_guilt_prior(&self, n: usize) -> f64 {
        let zero = match self {
            PrincipalStrategy::Full { probs } => probs[0],
            _ => self.count_distribution(n).expect("symmetric strategy")[0],
        };
        1.0 - zero
    }
}

/// Accusation thresholds on the shock after witnessing / not witnessing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentCutoffs {
    pub omega_star: f64,
    pub omega_star2: f64,
}

impl AgentCutoffs {
    pub fn get(&self, witnessed: bool) -> f64 {
        if witnessed {
            self.omega_star
        } else {
            self.omega_star2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoffs {
    Shared(AgentCutoffs),
    PerAgent(Vec<AgentCutoffs>),
}

impl Cutoffs {
    pub fn agent(&self, i: usize) -> AgentCutoffs {
        match self {
            Cutoffs::Shared(c) => *c,
            Cutoffs::PerAgent(v) => v[i],
        }
    }

    pub fn shared(&self) -> Option<AgentCutoffs> {
        match self {
            Cutoffs::Shared(c) => Some(*c),
            Cutoffs::PerAgent(v) if v.windows(2).all(|w| w[0] == w[1]) => v.first().copied(),
            Cutoffs::PerAgent(_) => None,
        }
    }
}

/// Adjudication principle applied by the judge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Principle {
    /// Convict on the probability of at least one unspecified offense.
    Aggregate,
    /// Convict on the probability of some specific offense.
    Distinct,
}

/// Complete strategy profile of principal, agents and judge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub params: GameParams,
    pub principle: Principle,
    pub principal: PrincipalStrategy,
    pub cutoffs: Cutoffs,
    pub rule: ConvictionRule,
}

impl StrategyProfile {
    pub fn new(
        params: GameParams,
        principle: Principle,
        principal: PrincipalStrategy,
        cutoffs: Cutoffs,
        rule: ConvictionRule,
    ) -> Result<Self, LabError> {
        let p = Self { params, principle, principal, cutoffs, rule };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let n = self.params.n;
        self.params.validate()?;
        self.principal.validate(n)?;
        self.rule.validate()?;
        if self.rule.n() != n {
            return Err(LabError::invalid("rule", format!("rule is for {} agents, params say {n}", self.rule.n())));
        }
        match &self.cutoffs {
            Cutoffs::PerAgent(v) if v.len() != n => {
                return Err(LabError::invalid("cutoffs", format!("expected {n} cutoff pairs, got {}", v.len())));
            }
            _ => {}
        }
        let pairs = match &self.cutoffs {
            Cutoffs::Shared(c) => std::slice::from_ref(c),
            Cutoffs::PerAgent(v) => v.as_slice(),
        };
        if pairs.iter().any(|c| c.omega_star.is_nan() || c.omega_star2.is_nan()) {
            return Err(LabError::invalid("cutoffs", "cutoffs must not be NaN"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Accusation probability of agent `i` given whether it witnessed an offense.
    pub fn psi(&self, i: usize, witnessed: bool) -> f64 {
        self.params.psi(self.cutoffs.agent(i).get(witnessed))
    }

    /// `psi(i, true) - psi(i, false)` without cancellation.
    pub fn psi_gap(&self, i: usize) -> f64 {
        let c = self.cutoffs.agent(i);
        self.params.psi_gap(c.omega_star, c.omega_star2)
    }

    /// Whether count-based formulas apply (symmetric principal, rule and cutoffs).
    pub fn is_symmetric(&self) -> bool {
        self.cutoffs.shared().is_some()
            && self.rule.by_count().is_some()
            && self.principal.count_distribution(self.n()).is_some()
    }

    /// Unconditional distribution over the number of offenses, mixing in
    /// the virtuous type.
    pub fn count_distribution(&self) -> Option<Vec<f64>> {
        let mut v = self.principal.count_distribution(self.n())?;
        for p in v.iter_mut() {
            *p *= self.params.pi_o;
        }
        v[0] += 1.0 - self.params.pi_o;
        Some(v)
    }

    /// Unconditional offense-vector distribution, as (mask, probability)
    /// pairs with positive mass.
    pub fn theta_support(&self) -> Result<Vec<(u32, f64)>, LabError> {
        let n = self.n();
        let sigma = self.principal.theta_distribution(n)?;
        let pi_o = self.params.pi_o;
        Ok(sigma
            .iter()
            .enumerate()
            .map(|(t, p)| (t as u32, pi_o * p + if t == 0 { 1.0 - pi_o } else { 0.0 }))
            .filter(|(_, p)| *p > 0.0)
            .collect())
    }

    /// Unconditional probability that at least one offense occurs.
    pub fn prior_guilt(&self) -> f64 {
        self.params.pi_o * self.principal.aggregate_guilt_prior(self.n())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intro_independent_offenses() {
        let s = PrincipalStrategy::Full { probs: vec![0.2 * 0.2, 0.8 * 0.2, 0.2 * 0.8, 0.8 * 0.8] };
        s.validate(2).unwrap();
        assert!((s.aggregate_guilt_prior(2) - 0.96).abs() <= 1e-15);
    }

    #[test]
    fn negatively_correlated_table() {
        let s = PrincipalStrategy::Full { probs: vec![0.01, 0.495, 0.495, 0.0] };
        assert!((s.aggregate_guilt_prior(2) - 0.99).abs() <= 1e-15);
        let zero = PrincipalStrategy::Counts { probs: vec![1.0, 0.0, 0.0] };
        assert_eq!(zero.aggregate_guilt_prior(2), 0.0);
    }

    #[test]
    fn mixed_expands_uniformly() {
        let s = PrincipalStrategy::Mixed { k: 2, r: 0.25 };
        let d = s.theta_distribution(3).unwrap();
        assert!((d[0b011] - 0.75 / 3.0).abs() < 1e-15);
        assert!((d[0b100] - 0.25 / 3.0).abs() < 1e-15);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn independent_matches_product() {
        let s = PrincipalStrategy::independent(3, 0.3);
        let d = s.theta_distribution(3).unwrap();
        assert!((d[0b101] - 0.3 * 0.7 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn bad_strategies_rejected() {
        assert!(PrincipalStrategy::Mixed { k: 0, r: 0.5 }.validate(2).is_err());
        assert!(PrincipalStrategy::Counts { probs: vec![0.5, 0.6, 0.0] }.validate(2).is_err());
        assert!(PrincipalStrategy::Full { probs: vec![1.0, 0.0] }.validate(2).is_err());
    }
}
