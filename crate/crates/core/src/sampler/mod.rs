//! Metropolis-Hastings rewriting of a story ending.
//!
//! Each step picks a position to edit from the conflict distribution, draws a
//! replacement, deletion or insertion there, and accepts the edited ending
//! with the tempered MH probability. The target density is the product of the
//! fluency score and the coherence ratio between the counterfactual and the
//! initial context. Sentence-final tokens are never edited.

mod accept;
mod chain;
mod proposal;
mod score;

use thiserror::Error;

use crate::scorer::ScorerError;

pub use accept::{acceptance_probability, acceptance_rate, cooling, temperature};
pub use chain::{
    rewrite, story_seed, AcceptedEnding, Chain, ChainState, RewriteError, RewriteResult, StepOutcome, TraceRecord,
};
pub use proposal::{propose_edit, EditOp, EditProposal, ProposalContext, MASK_TOKEN};
pub use score::{
    conflict_distribution, editable_mask, evaluate, score_pi, ConflictDistribution, Evaluation, ScoreBundle,
};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("ending has no editable position")]
    NoEditablePositions,
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("temperature must be positive and finite")]
    BadTemperature,
    #[error("invalid sampler configuration: {0}")]
    Config(String),
}
