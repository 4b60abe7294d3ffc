use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patches::patch_count;

/// All tunables of the denoiser.
///
/// The config file format is flat `key = value` text whose keys are exactly
/// these field names; missing keys keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseConfig {
    /// Neighbors per patch (a patch has `k + 1` points).
    pub k: usize,
    /// Patches per frame as a fraction of the point count.
    pub m_ratio: f64,
    /// Adjacent patches per patch in the spatial graph.
    pub k_s: usize,
    /// Candidate patches searched in the previous frame.
    pub xi: usize,
    /// Multiplier from mean nearest-neighbor spacing to the epsilon radius.
    pub c: f64,
    /// Balance between variation and position in point correspondence.
    pub alpha: f64,
    /// Weight of the temporal consistency term.
    pub lambda1: f64,
    /// Weight of the spatial smoothness term.
    pub lambda2: f64,
    /// Lower bound on the temporal weight sum, as a fraction of the patch count.
    pub m_prime_ratio: f64,
    /// Trace bound for the learned metric factor.
    pub trace_bound: f64,
    /// Neighbors used for local plane fitting.
    pub k_plane: usize,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    pub pg_step: f64,
    pub pg_max_iters: usize,
    pub pg_tol: f64,
    pub outer_max_iters: usize,
    pub outer_tol: f64,
    pub seed: u64,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig {
            k: 30,
            m_ratio: 0.5,
            k_s: 10,
            xi: 10,
            c: 5.0,
            alpha: 0.5,
            lambda1: 1.0,
            lambda2: 1.0,
            m_prime_ratio: 0.9,
            trace_bound: 5.0,
            k_plane: 10,
            cg_tol: 1e-10,
            cg_max_iters: 5000,
            pg_step: 1e-3,
            pg_max_iters: 100,
            pg_tol: 1e-6,
            outer_max_iters: 4,
            outer_tol: 1e-3,
            seed: 0,
        }
    }
}

impl DenoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.k == 0 {
            return bad("k must be positive");
        }
        if !(self.m_ratio > 0.0 && self.m_ratio <= 1.0) {
            return bad("m_ratio must be in (0, 1]");
        }
        if self.k_s == 0 || self.xi == 0 {
            return bad("k_s and xi must be positive");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("c must be positive");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must be in [0, 1]");
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) || !(self.lambda1 + self.lambda2).is_finite() {
            return bad("lambda1 and lambda2 must be non-negative");
        }
        if !(self.m_prime_ratio > 0.0 && self.m_prime_ratio <= 1.0) {
            return bad("m_prime_ratio must be in (0, 1]");
        }
        if !(self.trace_bound > 0.0) {
            return bad("trace_bound must be positive");
        }
        if self.k_plane < 3 {
            return bad("k_plane must be at least 3");
        }
        if !(self.cg_tol > 0.0 && self.pg_tol > 0.0 && self.outer_tol > 0.0 && self.pg_step > 0.0) {
            return bad("tolerances and step size must be positive");
        }
        if self.cg_max_iters == 0 || self.pg_max_iters == 0 || self.outer_max_iters == 0 {
            return bad("iteration caps must be positive");
        }
        Ok(())
    }

    /// Patch count for a frame of `n` points.
    pub fn patch_count(&self, n: usize) -> usize {
        patch_count(n, self.m_ratio)
    }

    /// Temporal weight lower bound for `m` patches.
    pub fn m_prime(&self, m: usize) -> f64 {
        self.m_prime_ratio * m as f64
    }

    /// Parses flat `key = value` text.
    pub fn from_text(text: &str) -> Result<Self> {
        let config: DenoiseConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Sets one field from its textual value, e.g. `("lambda1", "0.5")`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut table: toml::Table = toml::from_str(&self.to_text()).expect("config round-trips");
        if !table.contains_key(key) {
            return Err(Error::Config(format!("unknown config key `{key}`")));
        }
        let parsed: toml::Table = toml::from_str(&format!("v = {value}"))
            .map_err(|e| Error::Config(format!("bad value for `{key}`: {e}")))?;
        let mut v = parsed["v"].clone();
        // integers are accepted for float fields
        if let (toml::Value::Float(_), toml::Value::Integer(i)) = (&table[key], &v) {
            v = toml::Value::Float(*i as f64);
        }
        table.insert(key.to_string(), v);
        let updated: DenoiseConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("bad value for `{key}`: {e}")))?;
        *self = updated;
        Ok(())
    }
}
