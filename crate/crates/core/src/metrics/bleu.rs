use std::collections::HashMap;

use super::{EvalRecord, MetricsError};
use crate::num::Scalar;

pub const MAX_ORDER: usize = 4;
/// Numerator substituted for an n-gram order with no matches.
pub const ZERO_MATCH_EPSILON: f64 = 1e-9;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Corpus-level statistics accumulated over records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub hypothesis_len: usize,
    pub reference_len: usize,
}

impl BleuStats {
    pub fn add(&mut self, hypothesis: &[String], references: &[&[String]]) {
        for n in 1..=MAX_ORDER {
            let hyp = ngram_counts(hypothesis, n);
            let mut max_ref: HashMap<&[String], usize> = HashMap::new();
            for r in references {
                for (gram, c) in ngram_counts(r, n) {
                    let slot = max_ref.entry(gram).or_insert(0);
                    *slot = (*slot).max(c);
                }
            }
            self.matches[n - 1] += hyp
                .iter()
                .map(|(gram, &c)| c.min(max_ref.get(gram).copied().unwrap_or(0)))
                .sum::<usize>();
            self.totals[n - 1] += hypothesis.len().saturating_sub(n - 1);
        }
        self.hypothesis_len += hypothesis.len();
        // Closest reference length; ties go to the shorter reference.
        self.reference_len += references
            .iter()
            .map(|r| r.len())
            .min_by_key(|&len| (len.abs_diff(hypothesis.len()), len))
            .unwrap_or(0);
    }

    /// BLEU on a 0-100 scale.
    pub fn score<S: Scalar>(&self) -> S {
        if self.hypothesis_len == 0 {
            return S::zero();
        }
        let mut log_sum = S::zero();
        for n in 0..MAX_ORDER {
            let p = if self.matches[n] == 0 {
                S::lit(ZERO_MATCH_EPSILON) / S::lit(self.totals[n].max(1) as f64)
            } else {
                S::lit(self.matches[n] as f64) / S::lit(self.totals[n] as f64)
            };
            log_sum = log_sum + p.ln();
        }
        let c = S::lit(self.hypothesis_len as f64);
        let r = S::lit(self.reference_len as f64);
        let brevity = if c > r { S::one() } else { (S::one() - r / c).exp() };
        S::lit(100.0) * brevity * (log_sum / S::lit(MAX_ORDER as f64)).exp()
    }
}

/// Corpus BLEU-4 with clipped multi-reference counts and a brevity penalty.
pub fn bleu4<S: Scalar>(records: &[EvalRecord]) -> Result<S, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut stats = BleuStats::default();
    for record in records {
        if record.references.is_empty() {
            return Err(MetricsError::NoReferences(record.story_id.clone()));
        }
        let refs: Vec<&[String]> = record.references.iter().map(|r| r.tokens()).collect();
        stats.add(record.hypothesis.tokens(), &refs);
    }
    Ok(stats.score())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::tokenize;

    fn rec(hyp: &str, refs: &[&str]) -> EvalRecord {
        EvalRecord::new("s", tokenize(hyp), refs.iter().map(|r| tokenize(r)).collect(), None).unwrap()
    }

    #[test]
    fn perfect_match_is_exactly_100() {
        let r = rec("She won the game at last.", &["She won the game at last."]);
        assert_eq!(bleu4::<f64>(std::slice::from_ref(&r)).unwrap(), 100.0);
        assert_eq!(bleu4::<f32>(&[r]).unwrap(), 100.0);
    }

    #[test]
    fn disjoint_is_tiny() {
        let r = rec("alpha beta gamma delta", &["one two three four five"]);
        assert!(bleu4::<f64>(&[r]).unwrap() < 1e-6);
    }

    #[test]
    fn short_hypothesis_hand_value() {
        // p1 = p2 = p3 = 1, no 4-grams, c = 3, r = 4.
        let r = rec("the cat sat", &["the cat sat down"]);
        let expected = 100.0 * (1.0f64 - 4.0 / 3.0).exp() * 1e-9f64.powf(0.25);
        assert!((bleu4::<f64>(&[r]).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn clipping_and_closest_reference() {
        let r = rec("the the the the", &["the cat", "the mat on the floor"]);
        let mut stats = BleuStats::default();
        let refs: Vec<&[String]> = r.references.iter().map(|x| x.tokens()).collect();
        stats.add(r.hypothesis.tokens(), &refs);
        assert_eq!(stats.matches[0], 2);
        assert_eq!(stats.reference_len, 5);
    }

    #[test]
    fn errors() {
        assert!(matches!(bleu4::<f64>(&[]), Err(MetricsError::Empty)));
    }
}
