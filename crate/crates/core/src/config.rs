//! Engine parameters shared by the library entry points and the CLI.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::index::OfflineConfig;
use crate::similarity::SimilarityMode;

/// All tunables in one place. Deserializable from a TOML config file; the
/// CLI layers flag and environment overrides on top.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    /// Penalty exponent on unrecalled query labels.
    pub gamma: f64,
    /// Symbol band width in standard deviations.
    pub kappa: f64,
    /// Number of matches to return.
    pub k: usize,
    /// Neighborhood label semantics.
    pub mode: SimilarityMode,
    /// Cap on pairs evaluated by the offline distribution pass.
    pub sample_pairs: Option<u64>,
    /// Master seed for sampling and generators.
    pub seed: u64,
    /// Worker count; `None` lets the runtime decide.
    pub threads: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            gamma: 3.0,
            kappa: 0.001,
            k: 1,
            mode: SimilarityMode::Multiset,
            sample_pairs: None,
            seed: 0,
            threads: None,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma < 1.0 {
            return Err(Error::Config(format!(
                "gamma must be at least 1, got {}",
                self.gamma
            )));
        }
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(Error::Config(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if let Some(s) = self.sample_pairs {
            if s < 2 {
                return Err(Error::Config(format!(
                    "sample-pairs must be at least 2, got {s}"
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// The offline-phase slice of this configuration.
    pub fn offline(&self) -> OfflineConfig {
        OfflineConfig {
            gamma: self.gamma,
            kappa: self.kappa,
            mode: self.mode,
            sample_pairs: self.sample_pairs,
            seed: self.seed,
        }
    }
}
