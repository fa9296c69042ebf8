use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    acceptance_rate, editable_mask, evaluate, propose_edit, temperature, ConflictDistribution, EditOp, Evaluation,
    ProposalContext, SamplerError, ScoreBundle,
};
use crate::config::SamplerConfig;
use crate::dataset::StoryInstance;
use crate::scorer::Scorer;
use crate::token::TokenSequence;

/// An accepted move and the ending it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedEnding {
    pub step: usize,
    pub op: EditOp,
    pub position: usize,
    pub ending: TokenSequence,
    pub scores: ScoreBundle<f64>,
    pub alpha: f64,
}

impl AcceptedEnding {
    pub fn trace_record(&self) -> TraceRecord {
        TraceRecord {
            step: self.step,
            op: self.op,
            position: self.position,
            ending: self.ending.to_string(),
            log_pi: self.scores.log_pi,
            alpha: self.alpha,
        }
    }
}

/// One line of an exported trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub op: EditOp,
    pub position: usize,
    pub ending: String,
    pub log_pi: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct ChainState {
    pub ending: TokenSequence,
    pub step: usize,
    pub accepted: Vec<AcceptedEnding>,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Accepted {
        op: EditOp,
        alpha: f64,
    },
    Rejected {
        op: EditOp,
        alpha: f64,
    },
    /// No usable proposal could be drawn this step.
    NoOp,
}

/// A single Metropolis-Hastings chain over endings of one story.
pub struct Chain<'a> {
    scorer: &'a dyn Scorer,
    config: &'a SamplerConfig,
    instance: &'a StoryInstance,
    prefix: TokenSequence,
    state: ChainState,
    current: Evaluation,
}

impl<'a> Chain<'a> {
    pub fn new(
        scorer: &'a dyn Scorer,
        config: &'a SamplerConfig,
        instance: &'a StoryInstance,
    ) -> Result<Self, SamplerError> {
        config
            .validate_allow_empty()
            .map_err(|e| SamplerError::Config(e.to_string()))?;
        let ending = instance.original_ending.clone();
        let current = evaluate(scorer, instance, &ending)?;
        Ok(Chain {
            scorer,
            config,
            instance,
            prefix: instance.counterfactual_prefix(),
            state: ChainState {
                ending,
                step: 0,
                accepted: Vec::new(),
                rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            },
            current,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn ending(&self) -> &TokenSequence {
        &self.state.ending
    }

    pub fn scores(&self) -> &ScoreBundle<f64> {
        &self.current.scores
    }

    /// Conflict detection, one proposal and the accept/reject draw. The step
    /// counter advances whether or not the proposal is accepted.
    pub fn step(&mut self) -> Result<StepOutcome, SamplerError> {
        let t = self.state.step;
        let temp = temperature(self.config, t);
        let conflict =
            ConflictDistribution::from_logits(&self.current.conflict_logits(), &editable_mask(&self.state.ending))?;
        let ctx = ProposalContext {
            prefix: &self.prefix,
            ending: &self.state.ending,
            conflict: &conflict,
        };
        let proposal = propose_edit(self.scorer, self.config, &ctx, &mut self.state.rng)?;
        let outcome = match proposal {
            None => StepOutcome::NoOp,
            Some((candidate, proposal)) => {
                let next = evaluate(self.scorer, self.instance, &candidate)?;
                let alpha = acceptance_rate(&self.current.scores, &next.scores, &proposal, temp)?;
                let u: f64 = self.state.rng.gen();
                if u < alpha {
                    self.state.accepted.push(AcceptedEnding {
                        step: t,
                        op: proposal.op,
                        position: proposal.position,
                        ending: candidate.clone(),
                        scores: next.scores,
                        alpha,
                    });
                    self.state.ending = candidate;
                    self.current = next;
                    StepOutcome::Accepted { op: proposal.op, alpha }
                } else {
                    StepOutcome::Rejected { op: proposal.op, alpha }
                }
            }
        };
        self.state.step += 1;
        Ok(outcome)
    }

    pub fn into_state(self) -> ChainState {
        self.state
    }
}

#[derive(Debug, Clone)]
pub struct RewriteResult {
    pub best_ending: TokenSequence,
    pub best_scores: ScoreBundle<f64>,
    pub original_scores: ScoreBundle<f64>,
    pub trace: Vec<AcceptedEnding>,
}

#[derive(Debug, thiserror::Error)]
pub enum RewriteError {
    #[error("could not start chain: {0}")]
    Setup(#[source] SamplerError),
    #[error("chain failed after {completed_steps} completed steps: {source}")]
    Partial {
        completed_steps: usize,
        trace: Vec<AcceptedEnding>,
        #[source]
        source: SamplerError,
    },
}

impl RewriteError {
    pub fn sampler_error(&self) -> &SamplerError {
        match self {
            RewriteError::Setup(e) => e,
            RewriteError::Partial { source, .. } => source,
        }
    }
}

/// Runs `config.n_steps` steps and returns the highest-scoring ending among
/// the original and every accepted one. Ties keep the earlier candidate.
pub fn rewrite(
    scorer: &dyn Scorer,
    config: &SamplerConfig,
    instance: &StoryInstance,
) -> Result<RewriteResult, RewriteError> {
    let mut chain = Chain::new(scorer, config, instance).map_err(RewriteError::Setup)?;
    let original_scores = *chain.scores();
    for _ in 0..config.n_steps {
        if let Err(source) = chain.step() {
            let state = chain.into_state();
            return Err(RewriteError::Partial {
                completed_steps: state.step,
                trace: state.accepted,
                source,
            });
        }
    }
    let state = chain.into_state();
    let mut best_ending = &instance.original_ending;
    let mut best_scores = original_scores;
    for acc in &state.accepted {
        if acc.scores.log_pi > best_scores.log_pi {
            best_ending = &acc.ending;
            best_scores = acc.scores;
        }
    }
    Ok(RewriteResult {
        best_ending: best_ending.clone(),
        best_scores,
        original_scores,
        trace: state.accepted,
    })
}

/// Per-story seed: the run seed mixed with an FNV-1a hash of the story id, so
/// a story's chain does not depend on its position in the input.
pub fn story_seed(run_seed: u64, story_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in story_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    run_seed ^ h
}
