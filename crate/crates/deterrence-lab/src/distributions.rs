//! Gaussian payoff shocks and the behavioral-mixture accusation probability.
//!
//! The cdf is built on the complementary error function for moderate
//! arguments and switches to an asymptotic series below `-TAIL_SWITCH`
//! standard deviations, so that ratios such as `cdf(w) / cdf(w - b)` stay
//! accurate deep in the left tail.

use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::LabError;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
/// ln(sqrt(2*pi))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const TAIL_SWITCH: f64 = 8.0;

/// Normal distribution of the agents' idiosyncratic shocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockDistribution {
    pub mean: f64,
    pub std_dev: f64,
}

impl Default for ShockDistribution {
    fn default() -> Self {
        Self::standard()
    }
}

impl ShockDistribution {
    pub fn new(mean: f64, std_dev: f64) -> Result<Self, LabError> {
        if !mean.is_finite() {
            return Err(LabError::invalid("mu", "must be finite"));
        }
        if !(std_dev.is_finite() && std_dev > 0.0) {
            return Err(LabError::invalid("sigma", "must be finite and strictly positive"));
        }
        Ok(Self { mean, std_dev })
    }

    pub const fn standard() -> Self {
        Self { mean: 0.0, std_dev: 1.0 }
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.std_dev
    }

    pub fn cdf(&self, x: f64) -> f64 {
        std_cdf(self.z(x))
    }

    /// Natural log of the cdf, finite far into the left tail.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        std_ln_cdf(self.z(x))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = self.z(x);
        INV_SQRT_2PI * (-0.5 * z * z).exp() / self.std_dev
    }

    /// `cdf(hi) - cdf(lo)` without cancellation when both points sit in the
    /// same tail.
    pub fn cdf_diff(&self, hi: f64, lo: f64) -> f64 {
        if hi < lo {
            return -self.cdf_diff(lo, hi);
        }
        let (zh, zl) = (self.z(hi), self.z(lo));
        if zh <= 0.0 {
            let lh = std_ln_cdf(zh);
            let ll = std_ln_cdf(zl);
            -(lh.exp()) * (ll - lh).exp_m1()
        } else if zl >= 0.0 {
            // upper tail: Phi(-zl) - Phi(-zh)
            let ll = std_ln_cdf(-zl);
            let lh = std_ln_cdf(-zh);
            -(ll.exp()) * (lh - ll).exp_m1()
        } else {
            std_cdf(zh) - std_cdf(zl)
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64, LabError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(LabError::Domain(format!("quantile requires p in (0,1), got {p}")));
        }
        Ok(self.mean + self.std_dev * std_quantile(p))
    }

    /// Quantile addressed by `ln p`, usable when `p` underflows.
    pub fn quantile_ln(&self, ln_p: f64) -> Result<f64, LabError> {
        if ln_p.is_nan() || ln_p >= 0.0 {
            return Err(LabError::Domain(format!("quantile requires ln p < 0, got {ln_p}")));
        }
        let p = ln_p.exp();
        let mut z = if p > 1e-300 {
            std_quantile(p)
        } else {
            let t = -2.0 * ln_p;
            -(t - t.ln() - 2.0 * LN_SQRT_2PI).max(1.0).sqrt()
        };
        for _ in 0..50 {
            let f = std_ln_cdf(z) - ln_p;
            // d/dz ln Phi(z) = phi(z)/Phi(z) = exp(ln phi - ln Phi)
            let slope = (-0.5 * z * z - LN_SQRT_2PI - std_ln_cdf(z)).exp();
            let step = f / slope;
            z -= step;
            if step.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        Ok(self.mean + self.std_dev * z)
    }
}

/// Standard normal cdf.
pub fn std_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < -TAIL_SWITCH {
        std_ln_cdf(z).exp()
    } else if z < 0.0 {
        0.5 * erfc(-z / SQRT_2)
    } else {
        1.0 - 0.5 * erfc(z / SQRT_2)
    }
}

/// Natural log of the standard normal cdf.
pub fn std_ln_cdf(z: f64) -> f64 {
    if z < -TAIL_SWITCH {
        // Phi(z) = phi(z)/|z| * sum_k (-1)^k (2k-1)!! / z^(2k)
        let z2 = z * z;
        let mut term: f64 = 1.0;
        let mut sum: f64 = 1.0;
        let mut k = 1.0;
        loop {
            let next = -term * (2.0 * k - 1.0) / z2;
            if next.abs() >= term.abs() || next.abs() < 1e-17 * sum.abs() {
                break;
            }
            sum += next;
            term = next;
            k += 1.0;
        }
        -0.5 * z2 - LN_SQRT_2PI - (-z).ln() + sum.ln()
    } else if z < 0.0 {
        (0.5 * erfc(-z / SQRT_2)).ln()
    } else {
        (-0.5 * erfc(z / SQRT_2)).ln_1p()
    }
}

fn std_quantile(p: f64) -> f64 {
    let mut z = -SQRT_2 * erfc_inv(2.0 * p);
    // two Newton polishes against our own cdf
    for _ in 0..2 {
        let err = std_cdf(z) - p;
        let dens = INV_SQRT_2PI * (-0.5 * z * z).exp();
        if dens > 0.0 {
            z -= err / dens;
        }
    }
    z
}

/// Total accusation probability `delta * cdf(cutoff) + (1 - delta) * alpha`.
pub fn mixed_report_prob(cutoff: f64, delta: f64, alpha: f64, dist: &ShockDistribution) -> f64 {
    delta * dist.cdf(cutoff) + (1.0 - delta) * alpha
}

/// Difference of two accusation probabilities that share `delta`.
pub fn mixed_report_gap(hi: f64, lo: f64, delta: f64, dist: &ShockDistribution) -> f64 {
    delta * dist.cdf_diff(hi, lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cdf_reference_values() {
        let d = ShockDistribution::standard();
        assert_eq!(d.cdf(0.0), 0.5);
        assert_abs_diff_eq!(d.cdf(1.0), 0.841_344_746_068_542_9, epsilon = 1e-15);
        assert_abs_diff_eq!(d.cdf(-3.0), 0.001_349_898_031_630_094_6, epsilon = 1e-17);
        let shifted = ShockDistribution::new(3.0, 2.0).unwrap();
        assert_eq!(shifted.cdf(3.0), 0.5);
    }

    #[test]
    fn tail_switch_is_continuous() {
        let below = std_ln_cdf(-TAIL_SWITCH - 1e-12);
        let above = (0.5 * erfc(TAIL_SWITCH / SQRT_2)).ln();
        assert!((below - above).abs() < 1e-11, "{below} vs {above}");
        // Phi(-10) = 7.619853024160527e-24
        assert!((std_cdf(-10.0) / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-13);
        // ln Phi(-40) = -804.608442013754...
        assert!((std_ln_cdf(-40.0) + 804.608_442_013_753_8).abs() < 1e-9);
    }

    #[test]
    fn cdf_diff_keeps_relative_accuracy_in_tails() {
        let d = ShockDistribution::standard();
        let exact = 7.619_853_022_384_044e-24;
        assert!((d.cdf_diff(-10.0, -12.0) / exact - 1.0).abs() < 1e-12);
        let upper = d.cdf_diff(12.0, 10.0);
        assert!((upper / exact - 1.0).abs() < 1e-12);
        assert_abs_diff_eq!(d.cdf_diff(1.0, -1.0), 0.682_689_492_137_085_9, epsilon = 1e-15);
    }

    #[test]
    fn quantile_round_trips() {
        let d = ShockDistribution::standard();
        assert_eq!(d.quantile(0.5).unwrap(), 0.0);
        for x in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            assert_abs_diff_eq!(d.quantile(d.cdf(x)).unwrap(), x, epsilon = 1e-9);
        }
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        let z = d.quantile_ln(std_ln_cdf(-45.0)).unwrap();
        assert_abs_diff_eq!(z, -45.0, epsilon = 1e-9);
    }

    #[test]
    fn pdf_symmetry_and_translation() {
        let d = ShockDistribution::standard();
        assert_abs_diff_eq!(d.pdf(0.0), 0.398_942_280_401_432_7, epsilon = 1e-16);
        assert_eq!(d.pdf(-5.0), d.pdf(5.0));
        let s = ShockDistribution::new(2.0, 1.0).unwrap();
        assert_eq!(s.pdf(2.0), d.pdf(0.0));
    }

    #[test]
    fn mixture_examples() {
        let d = ShockDistribution::standard();
        assert_abs_diff_eq!(mixed_report_prob(0.0, 0.5, 0.5, &d), 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(mixed_report_prob(-1e6, 0.9, 0.3, &d), 0.03, epsilon = 1e-16);
        assert_abs_diff_eq!(
            mixed_report_prob(1.0, 0.95, 0.5, &d),
            0.95 * 0.841_344_746_068_542_9 + 0.025,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(ShockDistribution::new(0.0, 0.0).is_err());
        assert!(ShockDistribution::new(0.0, -1.0).is_err());
    }
}
