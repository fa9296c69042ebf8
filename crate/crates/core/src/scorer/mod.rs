//! The scoring boundary: causal-LM token log-probabilities, masked-LM fill-in
//! candidates and an optional dedicated coherence model.
//!
//! Every backend works on whole words. A backend with its own subword
//! vocabulary reports a word's log-probability as the sum over its pieces.

pub mod remote;

use thiserror::Error;

use crate::num::log_sum_exp;
use crate::token::TokenSequence;

pub use remote::RemoteScorer;

/// Log-probability substituted for any probability a backend cannot supply.
pub const LOG_PROB_FLOOR: f64 = -18.420_680_743_952_367; // ln(1e-8)

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("backend unavailable: {0}")]
    Transport(String),
    #[error("backend protocol violation: {0}")]
    Protocol(String),
    #[error("backend rejected request ({status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("position {position} out of range for sequence of length {len}")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("no candidates returned for position {0}")]
    NoCandidates(usize),
    #[error("empty ending")]
    EmptyEnding,
}

impl ScorerError {
    /// Transport failures may succeed if retried; everything else is permanent.
    pub fn is_retriable(&self) -> bool {
        matches!(self, ScorerError::Transport(_))
    }
}

/// A fill-in candidate with its log-probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub token: String,
    pub logprob: f64,
}

pub trait Scorer: Send + Sync {
    /// Natural-log probability of each continuation token given the context and
    /// the continuation tokens before it. One value per continuation token.
    fn clm_logprobs(&self, context: &[String], continuation: &[String]) -> Result<Vec<f64>, ScorerError>;

    /// Up to `k` fill-ins for `tokens[position]`, best first. The token
    /// currently at `position` is ignored.
    fn mlm_candidates(&self, tokens: &[String], position: usize, k: usize) -> Result<Vec<Candidate>, ScorerError>;

    /// Score from a dedicated coherence model, or `None` to fall back to the causal LM.
    fn coherence_override(&self, _context: &[String], _ending: &[String]) -> Result<Option<f64>, ScorerError> {
        Ok(None)
    }

    /// `ln P_coh(ending | context)`; the sum of causal-LM log-probabilities unless
    /// the backend has a dedicated coherence model.
    fn coherence_logprob(&self, context: &[String], ending: &[String]) -> Result<f64, ScorerError> {
        match self.coherence_override(context, ending)? {
            Some(lp) => Ok(lp),
            None => Ok(self.clm_logprobs(context, ending)?.iter().sum()),
        }
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn clm_logprobs(&self, context: &[String], continuation: &[String]) -> Result<Vec<f64>, ScorerError> {
        (**self).clm_logprobs(context, continuation)
    }
    fn mlm_candidates(&self, tokens: &[String], position: usize, k: usize) -> Result<Vec<Candidate>, ScorerError> {
        (**self).mlm_candidates(tokens, position, k)
    }
    fn coherence_override(&self, context: &[String], ending: &[String]) -> Result<Option<f64>, ScorerError> {
        (**self).coherence_override(context, ending)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn clm_logprobs(&self, context: &[String], continuation: &[String]) -> Result<Vec<f64>, ScorerError> {
        (**self).clm_logprobs(context, continuation)
    }
    fn mlm_candidates(&self, tokens: &[String], position: usize, k: usize) -> Result<Vec<Candidate>, ScorerError> {
        (**self).mlm_candidates(tokens, position, k)
    }
    fn coherence_override(&self, context: &[String], ending: &[String]) -> Result<Option<f64>, ScorerError> {
        (**self).coherence_override(context, ending)
    }
}

/// Per-token log-probabilities of `ending` given premise and context.
pub fn clm_score_ending(
    scorer: &dyn Scorer,
    premise: &TokenSequence,
    context: &TokenSequence,
    ending: &TokenSequence,
) -> Result<Vec<f64>, ScorerError> {
    if ending.is_empty() {
        return Err(ScorerError::EmptyEnding);
    }
    let prefix = premise.concat(context);
    let scores = scorer.clm_logprobs(prefix.tokens(), ending.tokens())?;
    if scores.len() != ending.len() {
        return Err(ScorerError::Protocol(format!(
            "expected {} log-probabilities, got {}",
            ending.len(),
            scores.len()
        )));
    }
    Ok(scores)
}

/// Candidates renormalized over the returned set.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    candidates: Vec<Candidate>,
}

impl CandidateSet {
    /// Renormalizes `raw`, dropping entries rejected by `keep`.
    pub fn from_raw(raw: Vec<Candidate>, keep: impl Fn(&str) -> bool) -> Option<Self> {
        let kept: Vec<Candidate> = raw.into_iter().filter(|c| keep(&c.token)).collect();
        if kept.is_empty() {
            return None;
        }
        let lps: Vec<f64> = kept.iter().map(|c| c.logprob).collect();
        let norm = log_sum_exp(&lps);
        let candidates = kept
            .into_iter()
            .map(|c| Candidate {
                logprob: c.logprob - norm,
                token: c.token,
            })
            .collect();
        Some(CandidateSet { candidates })
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Renormalized log-probability of `token`, or the floor when absent.
    pub fn logprob_or_floor(&self, token: &str) -> f64 {
        self.candidates
            .iter()
            .find(|c| c.token == token)
            .map_or(LOG_PROB_FLOOR, |c| c.logprob)
    }

    /// Picks a candidate given a uniform draw `u` in `[0, 1)`.
    pub fn pick(&self, u: f64) -> &Candidate {
        let mut acc = 0.0;
        for c in &self.candidates {
            acc += c.logprob.exp();
            if u < acc {
                return c;
            }
        }
        self.candidates.last().expect("candidate set is never empty")
    }
}

/// Queries up to `k` candidates at `position` and renormalizes them.
/// `keep` filters tokens the caller cannot use (sentence terminators, for instance).
pub fn propose_candidates_filtered(
    scorer: &dyn Scorer,
    tokens: &[String],
    position: usize,
    k: usize,
    keep: impl Fn(&str) -> bool,
) -> Result<CandidateSet, ScorerError> {
    if position >= tokens.len() {
        return Err(ScorerError::PositionOutOfRange {
            position,
            len: tokens.len(),
        });
    }
    let mut raw = scorer.mlm_candidates(tokens, position, k.max(1))?;
    raw.truncate(k.max(1));
    CandidateSet::from_raw(raw, keep).ok_or(ScorerError::NoCandidates(position))
}

pub fn propose_candidates(
    scorer: &dyn Scorer,
    sequence: &TokenSequence,
    position: usize,
    k: usize,
) -> Result<CandidateSet, ScorerError> {
    propose_candidates_filtered(scorer, sequence.tokens(), position, k, |_| true)
}
