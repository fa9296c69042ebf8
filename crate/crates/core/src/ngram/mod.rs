//! Interpolated Kneser-Ney n-gram language model.
//!
//! The trained model is stored the way an ARPA file lays it out: for every
//! seen k-gram the fully interpolated log-probability, and for every context
//! the log interpolation weight used when backing off. Queries walk from the
//! longest matching suffix down to unigrams, so an in-memory model and one
//! read back from disk answer identically.

mod arpa;
mod counts;

use std::collections::HashMap;

use thiserror::Error;

use crate::scorer::{Candidate, CandidateSet, Scorer, ScorerError};
use crate::token::TokenSequence;

pub use counts::NgramCounts;

pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";

pub(crate) const BOS: u32 = 0;
pub(crate) const EOS: u32 = 1;
pub(crate) const UNK: u32 = 2;

/// Log-probability stored for `<s>`, which is never predicted.
pub const BOS_LOGPROB: f64 = -99.0;

pub const DEFAULT_DISCOUNT: f64 = 0.75;

#[derive(Debug, Error)]
pub enum NgramError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("order must be at least 2, got {0}")]
    OrderTooSmall(usize),
    #[error("discount must lie in (0, 1), got {0}")]
    BadDiscount(f64),
    #[error("unsupported model file: {0}")]
    Version(String),
    #[error("corrupt model file at line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Entry {
    pub logprob: f64,
    pub backoff: f64,
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    /// `tables[k - 1]` holds k-gram entries.
    tables: Vec<HashMap<Vec<u32>, Entry>>,
}

impl NgramModel {
    /// Trains on `corpus`, one padded sentence per sequence. Every corpus token
    /// enters the vocabulary (min-count 1).
    pub fn train(corpus: &[TokenSequence], order: usize, discount: f64) -> Result<Self, NgramError> {
        let sentences: Vec<&[String]> = corpus.iter().map(|s| s.tokens()).collect();
        Self::train_tokens(&sentences, order, discount)
    }

    pub fn train_tokens<T: AsRef<str>>(corpus: &[&[T]], order: usize, discount: f64) -> Result<Self, NgramError> {
        if order < 2 {
            return Err(NgramError::OrderTooSmall(order));
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(NgramError::BadDiscount(discount));
        }
        if corpus.is_empty() {
            return Err(NgramError::EmptyCorpus);
        }

        let mut words: Vec<&str> = corpus
            .iter()
            .flat_map(|s| s.iter().map(AsRef::as_ref))
            .filter(|w| ![BOS_TOKEN, EOS_TOKEN, UNK_TOKEN].contains(w))
            .collect();
        words.sort_unstable();
        words.dedup();
        let mut model = NgramModel::with_vocab(
            order,
            [BOS_TOKEN, EOS_TOKEN, UNK_TOKEN]
                .into_iter()
                .chain(words)
                .map(str::to_string)
                .collect(),
        );

        let mut counts = NgramCounts::new(order);
        for sentence in corpus {
            let mut ids = Vec::with_capacity(sentence.len() + 2);
            ids.push(BOS);
            ids.extend(sentence.iter().map(|w| model.id(w.as_ref())));
            ids.push(EOS);
            counts.add_padded(&ids);
        }
        model.fill_tables(&counts, discount);
        Ok(model)
    }

    fn with_vocab(order: usize, vocab: Vec<String>) -> Self {
        let index = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        NgramModel {
            order,
            vocab,
            index,
            tables: vec![HashMap::new(); order],
        }
    }

    fn fill_tables(&mut self, counts: &NgramCounts, discount: f64) {
        let adjusted = counts.adjusted();

        // Unigrams interpolate with the uniform distribution over predictable words.
        let unigrams = &adjusted[0];
        let predictable = (self.vocab.len() - 1) as f64;
        let total: u64 = unigrams.iter().filter(|(g, _)| g[0] != BOS).map(|(_, &c)| c).sum();
        let seen = unigrams.iter().filter(|(g, &c)| g[0] != BOS && c > 0).count();
        let uniform_weight = discount * seen as f64 / total as f64;
        for id in 0..self.vocab.len() as u32 {
            let logprob = if id == BOS {
                BOS_LOGPROB
            } else {
                let count = unigrams.get(&vec![id]).copied().unwrap_or(0) as f64;
                ((count - discount).max(0.0) / total as f64 + uniform_weight / predictable).ln()
            };
            self.tables[0].insert(vec![id], Entry { logprob, backoff: 0.0 });
        }

        for k in 2..=self.order {
            let level = &adjusted[k - 1];
            let mut context_totals: HashMap<&[u32], (u64, u64)> = HashMap::new();
            for (gram, &count) in level {
                let slot = context_totals.entry(&gram[..k - 1]).or_insert((0, 0));
                slot.0 += count;
                slot.1 += 1;
            }
            let mut entries = Vec::with_capacity(level.len());
            for (gram, &count) in level {
                let (total, distinct) = context_totals[&gram[..k - 1]];
                let gamma = discount * distinct as f64 / total as f64;
                let lower = self.score_ids(&gram[1..k - 1], gram[k - 1]).exp();
                let p = (count as f64 - discount).max(0.0) / total as f64 + gamma * lower;
                entries.push((gram.clone(), p.ln()));
            }
            for (context, (total, distinct)) in context_totals {
                let gamma = discount * distinct as f64 / total as f64;
                let entry = self.tables[k - 2]
                    .get_mut(context)
                    .expect("every context is itself a stored lower-order gram");
                entry.backoff = gamma.ln();
            }
            for (gram, logprob) in entries {
                self.tables[k - 1].insert(gram, Entry { logprob, backoff: 0.0 });
            }
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// All tokens including `<s>`, `</s>` and `<unk>`.
    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    /// Number of stored entries of each order, lowest first.
    pub fn ngram_counts(&self) -> Vec<usize> {
        self.tables.iter().map(HashMap::len).collect()
    }

    fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    /// Back-off query over stored entries; only the last `order - 1` history ids count.
    fn score_ids(&self, history: &[u32], word: u32) -> f64 {
        let keep = history.len().min(self.order - 1);
        let mut gram = Vec::with_capacity(keep + 1);
        gram.extend_from_slice(&history[history.len() - keep..]);
        gram.push(word);
        let mut backoff = 0.0;
        for start in 0..gram.len() {
            let k = gram.len() - start;
            if let Some(entry) = self.tables[k - 1].get(&gram[start..]) {
                return backoff + entry.logprob;
            }
            if let Some(ctx) = self.tables[k - 2].get(&gram[start..gram.len() - 1]) {
                backoff += ctx.backoff;
            }
        }
        unreachable!("every vocabulary id has a unigram entry")
    }

    /// `ln P(token | context)` using the longest stored context suffix.
    /// Out-of-vocabulary words score as `<unk>`.
    pub fn conditional_logprob<T: AsRef<str>>(&self, context: &[T], token: &str) -> f64 {
        let history: Vec<u32> = context.iter().map(|t| self.id(t.as_ref())).collect();
        self.score_ids(&history, self.id(token))
    }

    /// Words the model may propose: the vocabulary without reserved tokens.
    fn proposable(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.vocab.len() as u32).filter(|&id| id != BOS && id != EOS && id != UNK)
    }

    /// Window scores of every proposable word at `position`, best first.
    ///
    /// A word's score is the log-probability of it given its left context plus
    /// the log-probabilities of the following `order - 1` tokens with it in place.
    /// The sequence is implicitly preceded by `<s>`.
    fn window_scores<T: AsRef<str>>(&self, tokens: &[T], position: usize) -> Vec<Candidate> {
        let mut ids = Vec::with_capacity(tokens.len() + 1);
        ids.push(BOS);
        ids.extend(tokens.iter().map(|t| self.id(t.as_ref())));
        let slot = position + 1;
        let last = (slot + self.order - 1).min(ids.len() - 1);
        let mut scored: Vec<Candidate> = self
            .proposable()
            .map(|w| {
                ids[slot] = w;
                let logprob = (slot..=last)
                    .map(|j| self.score_ids(&ids[j.saturating_sub(self.order - 1)..j], ids[j]))
                    .sum();
                Candidate {
                    token: self.vocab[w as usize].clone(),
                    logprob,
                }
            })
            .collect();
        scored.sort_by(|a, b| b.logprob.total_cmp(&a.logprob).then_with(|| a.token.cmp(&b.token)));
        scored
    }

    /// Top-`k` fill-ins for `position`, renormalized over the returned set.
    pub fn pseudo_mlm_candidates<T: AsRef<str>>(
        &self,
        tokens: &[T],
        position: usize,
        k: usize,
    ) -> Option<CandidateSet> {
        if position >= tokens.len() {
            return None;
        }
        let mut scored = self.window_scores(tokens, position);
        scored.truncate(k.max(1));
        CandidateSet::from_raw(scored, |_| true)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), NgramError> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        arpa::write(self, &mut out)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, NgramError> {
        let text = std::fs::read_to_string(path)?;
        arpa::read(&text)
    }

    pub fn to_arpa_string(&self) -> String {
        let mut buf = Vec::new();
        arpa::write(self, &mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("model text is UTF-8")
    }

    pub fn from_arpa_str(text: &str) -> Result<Self, NgramError> {
        arpa::read(text)
    }
}

impl Scorer for NgramModel {
    fn clm_logprobs(&self, context: &[String], continuation: &[String]) -> Result<Vec<f64>, ScorerError> {
        let mut ids = Vec::with_capacity(context.len() + continuation.len() + 1);
        ids.push(BOS);
        ids.extend(context.iter().map(|t| self.id(t)));
        let start = ids.len();
        ids.extend(continuation.iter().map(|t| self.id(t)));
        Ok((start..ids.len())
            .map(|j| self.score_ids(&ids[j.saturating_sub(self.order - 1)..j], ids[j]))
            .collect())
    }

    fn mlm_candidates(&self, tokens: &[String], position: usize, k: usize) -> Result<Vec<Candidate>, ScorerError> {
        if position >= tokens.len() {
            return Err(ScorerError::PositionOutOfRange {
                position,
                len: tokens.len(),
            });
        }
        let mut scored = self.window_scores(tokens, position);
        scored.truncate(k);
        Ok(scored)
    }
}
