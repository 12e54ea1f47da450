use serde::{Deserialize, Serialize};

use crate::distributions::{mixed_report_gap, mixed_report_prob, ShockDistribution};
use crate::error::LabError;

/// Largest population handled by exact profile enumeration.
pub const MAX_ENUM_N: usize = 16;

/// Model primitives. The offense benefit is normalized to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    pub n: usize,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub delta: f64,
    pub alpha: f64,
    pub pi_star: f64,
    pub pi_o: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub shock: ShockDistribution,
}

impl Default for GameParams {
    fn default() -> Self {
        Self {
            n: 1,
            b: 1.0,
            c: 10.0,
            l: 5.0,
            delta: 0.95,
            alpha: 0.5,
            pi_star: 0.95,
            pi_o: 1.0,
            gamma: 0.0,
            shock: ShockDistribution::standard(),
        }
    }
}

fn open_unit(key: &str, v: f64) -> Result<(), LabError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(LabError::invalid(key, format!("must lie strictly between 0 and 1, got {v}")))
    }
}

fn positive(key: &str, v: f64) -> Result<(), LabError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(LabError::invalid(key, format!("must be finite and positive, got {v}")))
    }
}

impl GameParams {
    pub fn validate(&self) -> Result<(), LabError> {
        if self.n == 0 {
            return Err(LabError::invalid("n", "must be at least 1"));
        }
        positive("b", self.b)?;
        positive("c", self.c)?;
        positive("L", self.l)?;
        open_unit("delta", self.delta)?;
        open_unit("alpha", self.alpha)?;
        open_unit("pi_star", self.pi_star)?;
        if !(self.pi_o > 0.0 && self.pi_o <= 1.0) {
            return Err(LabError::invalid("pi_o", format!("must lie in (0,1], got {}", self.pi_o)));
        }
        if self.gamma != 0.0 {
            return Err(LabError::invalid("gamma", "social preferences are not supported; must be 0"));
        }
        ShockDistribution::new(self.shock.mean, self.shock.std_dev)?;
        Ok(())
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_l(mut self, l: f64) -> Self {
        self.l = l;
        self
    }

    /// Accusation probability of an agent using `cutoff`.
    pub fn psi(&self, cutoff: f64) -> f64 {
        mixed_report_prob(cutoff, self.delta, self.alpha, &self.shock)
    }

    /// `psi(hi) - psi(lo)`, accurate when both are tiny.
    pub fn psi_gap(&self, hi: f64, lo: f64) -> f64 {
        mixed_report_gap(hi, lo, self.delta, &self.shock)
    }

    /// Probability that a behavioral agent accuses, weighted by its share.
    pub fn behavioral_floor(&self) -> f64 {
        (1.0 - self.delta) * self.alpha
    }

    /// Posterior odds threshold.
    pub fn l_star(&self) -> f64 {
        self.pi_star / (1.0 - self.pi_star)
    }

    /// Odds threshold relative to the opportunistic prior odds.
    pub fn l_star_relative(&self) -> f64 {
        self.pi_star * (1.0 - self.pi_o) / ((1.0 - self.pi_star) * self.pi_o)
    }

    /// Cutoff at which an agent accuses with total probability `psi`, if any.
    pub fn cutoff_for_psi(&self, psi: f64) -> Option<f64> {
        let strategic = (psi - self.behavioral_floor()) / self.delta;
        if strategic > 0.0 && strategic < 1.0 {
            self.shock.quantile(strategic).ok()
        } else {
            None
        }
    }
}
