use serde::{Deserialize, Serialize};

use super::params::MAX_ENUM_N;
use crate::error::LabError;

/// Judge's conviction probability as a function of the report profile.
///
/// Report profiles are bit masks: bit `i` set means agent `i` accuses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvictionRule {
    /// One entry per report profile, indexed by mask.
    Table { q: Vec<f64> },
    /// One entry per accusation count `0..=n`.
    Symmetric { q: Vec<f64> },
}

/// Sign of `q(1,1) + q(0,0) - q(1,0) - q(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    Substitutes,
    Complements,
    Neutral,
}

impl ConvictionRule {
    pub fn symmetric(q: Vec<f64>) -> Result<Self, LabError> {
        let rule = ConvictionRule::Symmetric { q };
        rule.validate()?;
        Ok(rule)
    }

    pub fn table(q: Vec<f64>) -> Result<Self, LabError> {
        let rule = ConvictionRule::Table { q };
        rule.validate()?;
        Ok(rule)
    }

    /// `q_m = m * q_star`.
    pub fn linear(n: usize, q_star: f64) -> Result<Self, LabError> {
        Self::symmetric((0..=n).map(|m| (m as f64 * q_star).min(1.0)).collect())
    }

    /// Conviction only when every agent accuses.
    pub fn unanimous(n: usize, q: f64) -> Result<Self, LabError> {
        let mut v = vec![0.0; n + 1];
        v[n] = q;
        Self::symmetric(v)
    }

    pub fn n(&self) -> usize {
        match self {
            ConvictionRule::Symmetric { q } => q.len().saturating_sub(1),
            ConvictionRule::Table { q } => q.len().trailing_zeros() as usize,
        }
    }

    pub fn prob(&self, a: u32) -> f64 {
        match self {
            ConvictionRule::Symmetric { q } => q[a.count_ones() as usize],
            ConvictionRule::Table { q } => q[a as usize],
        }
    }

    /// Count-indexed form, when the rule is symmetric.
    pub fn by_count(&self) -> Option<&[f64]> {
        match self {
            ConvictionRule::Symmetric { q } => Some(q),
            ConvictionRule::Table { .. } => None,
        }
    }

    /// Expand to a full table (requires `n <= 16`).
    pub fn to_table(&self) -> Result<Vec<f64>, LabError> {
        let n = self.n();
        if n > MAX_ENUM_N {
            return Err(LabError::Domain(format!("table expansion needs n <= {MAX_ENUM_N}")));
        }
        Ok((0..(1u32 << n)).map(|a| self.prob(a)).collect())
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let q = match self {
            ConvictionRule::Symmetric { q } | ConvictionRule::Table { q } => q,
        };
        if q.is_empty() {
            return Err(LabError::invalid("rule", "empty conviction rule"));
        }
        if let ConvictionRule::Table { q } = self {
            if !q.len().is_power_of_two() || q.len() < 2 {
                return Err(LabError::invalid("rule", "table length must be 2^n with n >= 1"));
            }
            if q.len() > 1 << MAX_ENUM_N {
                return Err(LabError::invalid("rule", format!("tables support n <= {MAX_ENUM_N}")));
            }
        } else if q.len() < 2 {
            return Err(LabError::invalid("rule", "symmetric rule needs n + 1 >= 2 entries"));
        }
        if let Some(bad) = q.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(LabError::invalid("rule", format!("conviction probability {bad} outside [0,1]")));
        }
        if q[0] != 0.0 {
            return Err(LabError::invalid("rule", "refinement 1 violated: q(0,...,0) must be 0"));
        }
        match self {
            ConvictionRule::Symmetric { q } => {
                if q.windows(2).any(|w| w[1] < w[0]) {
                    return Err(LabError::invalid("rule", "refinement 2 violated: q_m must be nondecreasing"));
                }
                if !q.windows(2).any(|w| w[1] > w[0]) {
                    return Err(LabError::invalid("rule", "refinement 2 violated: some accusation must matter"));
                }
            }
            ConvictionRule::Table { q } => {
                let n = q.len().trailing_zeros();
                for i in 0..n {
                    let bit = 1u32 << i;
                    let mut strict = false;
                    for a in 0..q.len() as u32 {
                        if a & bit != 0 {
                            continue;
                        }
                        let (lo, hi) = (q[a as usize], q[(a | bit) as usize]);
                        if hi < lo {
                            return Err(LabError::invalid(
                                "rule",
                                format!("refinement 2 violated for agent {i} at profile {a:#b}"),
                            ));
                        }
                        strict |= hi > lo;
                    }
                    if !strict {
                        return Err(LabError::invalid(
                            "rule",
                            format!("refinement 2 violated: agent {i}'s accusation never matters"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `q(1,1) + q(0,0) - q(1,0) - q(0,1)` for two agents, with its sign class.
    pub fn substitutes_index(&self) -> Result<(f64, Interaction), LabError> {
        if self.n() != 2 {
            return Err(LabError::Domain("substitutes index is defined for n = 2".into()));
        }
        let v = self.prob(0b11) + self.prob(0) - self.prob(0b01) - self.prob(0b10);
        let class = if v > 1e-12 {
            Interaction::Substitutes
        } else if v < -1e-12 {
            Interaction::Complements
        } else {
            Interaction::Neutral
        };
        Ok((v, class))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinements_enforced() {
        assert!(ConvictionRule::symmetric(vec![0.1, 0.5]).is_err());
        assert!(ConvictionRule::symmetric(vec![0.0, 0.0, 0.0]).is_err());
        assert!(ConvictionRule::symmetric(vec![0.0, 0.6, 0.4]).is_err());
        assert!(ConvictionRule::table(vec![0.0, 0.3, 0.0, 0.3]).is_err());
        assert!(ConvictionRule::table(vec![0.0, 0.3, 0.2, 0.3]).is_ok());
        assert!(ConvictionRule::table(vec![0.0, 0.3, 0.2]).is_err());
    }

    #[test]
    fn substitutes_examples() {
        let r = ConvictionRule::unanimous(2, 0.4).unwrap();
        assert_eq!(r.substitutes_index().unwrap(), (0.4, Interaction::Substitutes));
        let r = ConvictionRule::symmetric(vec![0.0, 0.7, 1.0]).unwrap();
        let (v, class) = r.substitutes_index().unwrap();
        assert!((v - (1.0 - 2.0 * 0.7)).abs() < 1e-15);
        assert_eq!(class, Interaction::Complements);
        let r = ConvictionRule::linear(2, 0.3).unwrap();
        assert_eq!(r.substitutes_index().unwrap(), (0.0, Interaction::Neutral));
    }

    #[test]
    fn linear_rule_counts() {
        let r = ConvictionRule::linear(3, 0.2).unwrap();
        assert_eq!(r.by_count().unwrap(), &[0.0, 0.2, 0.4, 0.6000000000000001]);
        assert_eq!(r.prob(0b101), 0.4);
        assert_eq!(r.n(), 3);
        assert_eq!(r.to_table().unwrap().len(), 8);
    }
}
