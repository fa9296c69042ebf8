//! Counterfactual rewriting of story endings.
//!
//! Given a premise, an original context, an alternative ("what-if") context
//! and the original three-sentence ending, the [`sampler`] edits the ending
//! token by token with Metropolis-Hastings moves so that it stays fluent,
//! fits the alternative context, and changes as little as possible.
//!
//! Probabilities come through the [`scorer::Scorer`] trait. Two backends ship
//! with the crate: a Kneser-Ney [`ngram::NgramModel`] and a
//! [`scorer::RemoteScorer`] talking JSON to an external model server.
//! [`metrics`] holds BLEU, the harmonic-mean trade-off score and correlation
//! statistics.
//!
//! Score and metric math is generic over [`num::Scalar`] (`f32` or `f64`);
//! the aliases below fix the scalar to `f64`, the precision the backends use.

pub mod config;
pub mod dataset;
pub mod metrics;
pub mod ngram;
pub mod num;
pub mod sampler;
pub mod scorer;
pub mod token;

pub use config::SamplerConfig;
pub use dataset::{load_dataset, StoryInstance};
pub use ngram::NgramModel;
pub use scorer::{RemoteScorer, Scorer};
pub use token::{detokenize, tokenize, TokenSequence};

pub type ScoreBundleF64 = sampler::ScoreBundle<f64>;
pub type ScoreBundleF32 = sampler::ScoreBundle<f32>;
pub type ConflictDistributionF64 = sampler::ConflictDistribution<f64>;
pub type ConflictDistributionF32 = sampler::ConflictDistribution<f32>;
pub type CorrelationsF64 = metrics::Correlations<f64>;
pub type CorrelationsF32 = metrics::Correlations<f32>;
