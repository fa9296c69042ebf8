use serde::{Deserialize, Serialize};

use super::SamplerError;
use crate::dataset::StoryInstance;
use crate::num::{masked_softmax, Scalar};
use crate::scorer::{clm_score_ending, Scorer};
use crate::token::TokenSequence;

/// Log target density of an ending and its two factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBundle<S> {
    /// Sum of causal-LM token log-probabilities under premise and counterfactual context.
    pub log_fluency: S,
    /// Log of the ratio of coherence under the counterfactual and the initial context.
    /// Positive when the ending fits the counterfactual context better.
    pub log_coherence: S,
    pub log_pi: S,
}

impl<S: Scalar> ScoreBundle<S> {
    pub fn new(log_fluency: S, log_coherence: S) -> Self {
        ScoreBundle {
            log_fluency,
            log_coherence,
            log_pi: log_fluency + log_coherence,
        }
    }
}

/// Token-level scores of one ending under both contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// `ln P_LM(y_i | z, x', y_<i)`
    pub counterfactual: Vec<f64>,
    /// `ln P_LM(y_i | z, x, y_<i)`
    pub initial: Vec<f64>,
    pub scores: ScoreBundle<f64>,
}

impl Evaluation {
    /// Per-token conflict logits: how much likelier each token is under the
    /// initial context than under the counterfactual one, in log space.
    pub fn conflict_logits(&self) -> Vec<f64> {
        self.initial
            .iter()
            .zip(&self.counterfactual)
            .map(|(init, cf)| init - cf)
            .collect()
    }
}

pub fn evaluate(
    scorer: &dyn Scorer,
    instance: &StoryInstance,
    ending: &TokenSequence,
) -> Result<Evaluation, SamplerError> {
    let counterfactual = clm_score_ending(scorer, &instance.premise, &instance.counterfactual_context, ending)?;
    let same_context = instance.is_degenerate();
    let initial = if same_context {
        counterfactual.clone()
    } else {
        clm_score_ending(scorer, &instance.premise, &instance.initial_context, ending)?
    };
    let log_fluency: f64 = counterfactual.iter().sum();

    let mut log_coherence = counterfactual.iter().sum::<f64>() - initial.iter().sum::<f64>();
    if !same_context {
        let cf_override = scorer.coherence_override(instance.counterfactual_prefix().tokens(), ending.tokens())?;
        if let Some(cf) = cf_override {
            if let Some(init) = scorer.coherence_override(instance.initial_prefix().tokens(), ending.tokens())? {
                log_coherence = cf - init;
            }
        }
    }
    Ok(Evaluation {
        counterfactual,
        initial,
        scores: ScoreBundle::new(log_fluency, log_coherence),
    })
}

/// Fluency plus coherence ratio of `ending` for `instance`.
pub fn score_pi(
    scorer: &dyn Scorer,
    instance: &StoryInstance,
    ending: &TokenSequence,
) -> Result<ScoreBundle<f64>, SamplerError> {
    Ok(evaluate(scorer, instance, ending)?.scores)
}

/// Where to edit: softmax of conflict logits over editable positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictDistribution<S> {
    probs: Vec<S>,
}

impl<S: Scalar> ConflictDistribution<S> {
    pub fn from_logits(logits: &[S], editable: &[bool]) -> Result<Self, SamplerError> {
        masked_softmax(logits, editable)
            .map(|probs| ConflictDistribution { probs })
            .ok_or(SamplerError::NoEditablePositions)
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Position for a uniform draw `u` in `[0, 1)`. Zero-probability positions are never returned.
    pub fn sample(&self, u: S) -> usize {
        let mut acc = S::zero();
        let mut last_positive = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > S::zero() {
                acc = acc + p;
                last_positive = i;
                if u < acc {
                    return i;
                }
            }
        }
        last_positive
    }
}

/// Positions the sampler may touch: everything except sentence-final tokens.
pub fn editable_mask(ending: &TokenSequence) -> Vec<bool> {
    (0..ending.len()).map(|i| !ending.is_boundary(i)).collect()
}

pub fn conflict_distribution(
    scorer: &dyn Scorer,
    instance: &StoryInstance,
    ending: &TokenSequence,
) -> Result<ConflictDistribution<f64>, SamplerError> {
    let eval = evaluate(scorer, instance, ending)?;
    ConflictDistribution::from_logits(&eval.conflict_logits(), &editable_mask(ending))
}
