use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("n_steps must be at least 1")]
    ZeroSteps,
    #[error("top_k_candidates must be at least 1")]
    ZeroTopK,
    #[error("temp_base must lie in (0, 1], got {0}")]
    TempBase(f64),
    #[error("temp_interval must be at least 1")]
    ZeroTempInterval,
    #[error("min_ending_length must be at least 1")]
    ZeroMinLength,
    #[error("op_weights must be nonnegative and sum to 1, got {0:?}")]
    OpWeights([f64; 3]),
}

/// Settings of one rewriting chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_steps: usize,
    pub temp_base: f64,
    pub temp_interval: usize,
    pub top_k_candidates: usize,
    pub rng_seed: u64,
    pub min_ending_length: usize,
    /// Probabilities of replacement, deletion and insertion, in that order.
    pub op_weights: [f64; 3],
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_steps: 100,
            temp_base: 0.95,
            temp_interval: 5,
            top_k_candidates: 100,
            rng_seed: 0,
            min_ending_length: 3,
            op_weights: [1.0 / 3.0; 3],
        }
    }
}

impl SamplerConfig {
    /// Checks every field. `n_steps == 0` is accepted only through
    /// [`SamplerConfig::validate_allow_empty`], which the CLI uses for dry runs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_steps == 0 {
            return Err(ConfigError::ZeroSteps);
        }
        self.validate_allow_empty()
    }

    pub fn validate_allow_empty(&self) -> Result<(), ConfigError> {
        if self.top_k_candidates == 0 {
            return Err(ConfigError::ZeroTopK);
        }
        if !(self.temp_base > 0.0 && self.temp_base <= 1.0) {
            return Err(ConfigError::TempBase(self.temp_base));
        }
        if self.temp_interval == 0 {
            return Err(ConfigError::ZeroTempInterval);
        }
        if self.min_ending_length == 0 {
            return Err(ConfigError::ZeroMinLength);
        }
        let total: f64 = self.op_weights.iter().sum();
        if self.op_weights.iter().any(|w| w.is_nan() || *w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(ConfigError::OpWeights(self.op_weights));
        }
        Ok(())
    }
}
