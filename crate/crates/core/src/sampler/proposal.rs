use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ConflictDistribution, SamplerError};
use crate::config::SamplerConfig;
use crate::scorer::{propose_candidates_filtered, CandidateSet, Scorer, ScorerError, LOG_PROB_FLOOR};
use crate::token::{is_sentence_final, TokenSequence};

/// Placeholder occupying an inserted slot while candidates are queried.
pub const MASK_TOKEN: &str = "<mask>";

const POSITION_ATTEMPTS: usize = 8;
const OP_ATTEMPTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Replacement,
    Deletion,
    Insertion,
}

impl EditOp {
    pub const ALL: [EditOp; 3] = [EditOp::Replacement, EditOp::Deletion, EditOp::Insertion];

    pub fn as_str(self) -> &'static str {
        match self {
            EditOp::Replacement => "replacement",
            EditOp::Deletion => "deletion",
            EditOp::Insertion => "insertion",
        }
    }
}

impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One token-level edit with its forward and reverse word-choice log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct EditProposal {
    pub op: EditOp,
    /// Index into the ending before the edit.
    pub position: usize,
    pub old_token: Option<String>,
    pub new_token: Option<String>,
    pub log_g_forward: f64,
    pub log_g_reverse: f64,
}

/// Read-only view of what a proposal needs: the text the masked LM sees in
/// front of the ending, and the ending itself.
pub struct ProposalContext<'a> {
    /// Premise and counterfactual context, prepended for candidate queries.
    pub prefix: &'a TokenSequence,
    pub ending: &'a TokenSequence,
    pub conflict: &'a ConflictDistribution<f64>,
}

fn usable(token: &str) -> bool {
    !is_sentence_final(token)
}

fn query(
    scorer: &dyn Scorer,
    k: usize,
    prefix: &TokenSequence,
    ending: &[String],
    position: usize,
) -> Result<Option<CandidateSet>, ScorerError> {
    let mut tokens = Vec::with_capacity(prefix.len() + ending.len());
    tokens.extend_from_slice(prefix.tokens());
    tokens.extend_from_slice(ending);
    match propose_candidates_filtered(scorer, &tokens, prefix.len() + position, k, usable) {
        Ok(set) => Ok(Some(set)),
        Err(ScorerError::NoCandidates(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Draws one edit. Returns `None` when every attempt hit a blocked deletion or
/// an empty candidate set; the caller treats that as a no-op step.
///
/// Only word-choice probabilities enter `log_g_*`; the position draw is left
/// out of the proposal ratio.
pub fn propose_edit<R: Rng + ?Sized>(
    scorer: &dyn Scorer,
    config: &SamplerConfig,
    ctx: &ProposalContext<'_>,
    rng: &mut R,
) -> Result<Option<(TokenSequence, EditProposal)>, SamplerError> {
    let op_dist =
        WeightedIndex::new(config.op_weights).map_err(|_| SamplerError::Config(format!("{:?}", config.op_weights)))?;
    let ending = ctx.ending;
    let editable = (0..ending.len()).filter(|&i| !ending.is_boundary(i)).count();

    for _ in 0..POSITION_ATTEMPTS {
        let position = ctx.conflict.sample(rng.gen::<f64>());
        let old = ending.tokens()[position].clone();

        let mut op = EditOp::ALL[op_dist.sample(rng)];
        let mut tries = 1;
        while op == EditOp::Deletion && (ending.len() <= config.min_ending_length || editable <= 1) {
            if tries == OP_ATTEMPTS {
                break;
            }
            op = EditOp::ALL[op_dist.sample(rng)];
            tries += 1;
        }
        if op == EditOp::Deletion && (ending.len() <= config.min_ending_length || editable <= 1) {
            continue;
        }

        match op {
            EditOp::Replacement => {
                let Some(set) = query(scorer, config.top_k_candidates, ctx.prefix, ending.tokens(), position)? else {
                    continue;
                };
                let pick = set.pick(rng.gen::<f64>()).clone();
                // Masking the slot hides the token in it, so the reverse move
                // draws from this same candidate set.
                let log_g_reverse = set.logprob_or_floor(&old);
                let mut next = ending.clone();
                next.replace(position, pick.token.clone());
                return Ok(Some((
                    next,
                    EditProposal {
                        op,
                        position,
                        old_token: Some(old),
                        new_token: Some(pick.token),
                        log_g_forward: pick.logprob,
                        log_g_reverse,
                    },
                )));
            }
            EditOp::Deletion => {
                // Reverse move: insert a mask at `position` of the shortened ending,
                // i.e. the current ending with that slot masked.
                let log_g_reverse = query(scorer, config.top_k_candidates, ctx.prefix, ending.tokens(), position)?
                    .map_or(LOG_PROB_FLOOR, |set| set.logprob_or_floor(&old));
                let mut next = ending.clone();
                next.remove(position);
                return Ok(Some((
                    next,
                    EditProposal {
                        op,
                        position,
                        old_token: Some(old),
                        new_token: None,
                        log_g_forward: 0.0,
                        log_g_reverse,
                    },
                )));
            }
            EditOp::Insertion => {
                let mut masked = ending.tokens().to_vec();
                masked.insert(position, MASK_TOKEN.to_string());
                let Some(set) = query(scorer, config.top_k_candidates, ctx.prefix, &masked, position)? else {
                    continue;
                };
                let pick = set.pick(rng.gen::<f64>()).clone();
                let mut next = ending.clone();
                next.insert(position, pick.token.clone());
                return Ok(Some((
                    next,
                    EditProposal {
                        op,
                        position,
                        old_token: None,
                        new_token: Some(pick.token),
                        log_g_forward: pick.logprob,
                        log_g_reverse: 0.0,
                    },
                )));
            }
        }
    }
    Ok(None)
}
