//! Evaluation metrics: corpus BLEU-4, the BLEU/coherence harmonic mean, and
//! correlation statistics for comparing metrics with human judgements.

mod bleu;
mod correlation;

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Scalar;
use crate::token::TokenSequence;

pub use bleu::{bleu4, BleuStats, MAX_ORDER, ZERO_MATCH_EPSILON};
pub use correlation::{average_ranks, correlations, kendall_tau_b, pearson, spearman, Correlations};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no records to evaluate")]
    Empty,
    #[error("story {0} has no reference endings")]
    NoReferences(String),
    #[error("{name} = {value} outside [0, 100]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("inputs differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("{0} is undefined for constant input")]
    Undefined(&'static str),
    #[error("scores file line {line}: {message}")]
    ScoresFile { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A hypothesis ending with its references and an optional external coherence score (percent).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub story_id: String,
    pub hypothesis: TokenSequence,
    pub references: Vec<TokenSequence>,
    pub coherence_score: Option<f64>,
}

impl EvalRecord {
    pub fn new(
        story_id: impl Into<String>,
        hypothesis: TokenSequence,
        references: Vec<TokenSequence>,
        coherence_score: Option<f64>,
    ) -> Result<Self, MetricsError> {
        let story_id = story_id.into();
        if references.is_empty() {
            return Err(MetricsError::NoReferences(story_id));
        }
        if let Some(value) = coherence_score {
            check_percent("coherence_score", value)?;
        }
        Ok(EvalRecord {
            story_id,
            hypothesis,
            references,
            coherence_score,
        })
    }
}

fn check_percent(name: &'static str, value: f64) -> Result<(), MetricsError> {
    if (0.0..=100.0).contains(&value) {
        Ok(())
    } else {
        Err(MetricsError::OutOfRange { name, value })
    }
}

/// Harmonic mean `2·b·e / (b + e)` of two percentages; zero when both are zero.
pub fn hmean<S: Scalar>(bleu: S, ents: S) -> Result<S, MetricsError> {
    let hundred = S::lit(100.0);
    for (name, v) in [("bleu", bleu), ("ents", ents)] {
        if !(v >= S::zero() && v <= hundred) {
            return Err(MetricsError::OutOfRange {
                name,
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let total = bleu + ents;
    if total == S::zero() {
        return Ok(S::zero());
    }
    Ok(S::lit(2.0) * bleu * ents / total)
}

/// Metrics report as written by the `eval` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub bleu4: f64,
    pub ents: Option<f64>,
    pub hmean: Option<f64>,
    pub n: usize,
}

/// BLEU over all records; coherence mean and harmonic mean when every record carries a score.
pub fn evaluate_records(records: &[EvalRecord]) -> Result<MetricsReport, MetricsError> {
    let bleu = bleu4::<f64>(records)?;
    let scores: Option<Vec<f64>> = records.iter().map(|r| r.coherence_score).collect();
    let ents = scores.map(|s| s.iter().sum::<f64>() / s.len() as f64);
    let hmean = ents.map(|e| hmean(bleu, e)).transpose()?;
    Ok(MetricsReport {
        bleu4: bleu,
        ents,
        hmean,
        n: records.len(),
    })
}

#[derive(Debug, Deserialize)]
struct ScoreLine {
    story_id: String,
    coherence_score: f64,
}

/// Reads `{"story_id", "coherence_score"}` lines into a map.
pub fn load_scores(path: impl AsRef<Path>) -> Result<HashMap<String, f64>, MetricsError> {
    let file = std::fs::File::open(path)?;
    let mut out = HashMap::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ScoreLine = serde_json::from_str(&line).map_err(|e| MetricsError::ScoresFile {
            line: i + 1,
            message: e.to_string(),
        })?;
        check_percent("coherence_score", parsed.coherence_score).map_err(|e| MetricsError::ScoresFile {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.insert(parsed.story_id, parsed.coherence_score);
    }
    Ok(out)
}
