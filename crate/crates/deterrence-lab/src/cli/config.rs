//! Flat `key=value` run configuration with `#` comments.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::distributions::ShockDistribution;
use crate::equilibrium::{Regime, SolverConfig};
use crate::error::LabError;
use crate::game_model::GameParams;

/// Every key accepted in a config file or as a `--key` flag.
pub const KEYS: &[&str] = &[
    "n", "b", "c", "L", "delta", "alpha", "pi_star", "pi_o", "mu", "sigma", "tol", "max_iter", "damping", "multistart",
    "grid", "draws", "seed", "output", "regime", "profile", "q_target", "n_small", "n_large",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(LabError::invalid(line, format!("line {}: expected key=value", lineno + 1)));
            };
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LabError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        if !KEYS.contains(&key) {
            return Err(LabError::invalid(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, LabError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| LabError::invalid(key, format!("cannot parse {v:?}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, LabError> {
        self.get(key)?.ok_or_else(|| LabError::invalid(key, "required"))
    }

    pub fn game_params(&self) -> Result<GameParams, LabError> {
        let mut p = GameParams::default();
        macro_rules! take {
            ($field:expr, $key:literal) => {
                if let Some(v) = self.get($key)? {
                    $field = v;
                }
            };
        }
        take!(p.n, "n");
        take!(p.b, "b");
        take!(p.c, "c");
        take!(p.l, "L");
        take!(p.delta, "delta");
        take!(p.alpha, "alpha");
        take!(p.pi_star, "pi_star");
        take!(p.pi_o, "pi_o");
        let mu = self.get("mu")?.unwrap_or(p.shock.mean);
        let sigma = self.get("sigma")?.unwrap_or(p.shock.std_dev);
        p.shock = ShockDistribution::new(mu, sigma)?;
        p.validate()?;
        Ok(p)
    }

    pub fn solver(&self) -> Result<SolverConfig, LabError> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            tol: self.get("tol")?.unwrap_or(d.tol),
            max_iter: self.get("max_iter")?.unwrap_or(d.max_iter),
            damping: self.get("damping")?.unwrap_or(d.damping),
            multistart_grid: self.get("multistart")?.unwrap_or(d.multistart_grid),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn regime(&self) -> Result<Regime, LabError> {
        Regime::from_cli(self.raw("regime").ok_or_else(|| LabError::invalid("regime", "required"))?)
    }
}
