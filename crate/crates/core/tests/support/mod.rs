//! Test-side reference implementations, written independently of the crate internals.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use cfrewrite::{tokenize, StoryInstance, TokenSequence};

/// Interpolated Kneser-Ney computed directly from raw counts on strings.
pub struct KnOracle {
    order: usize,
    discount: f64,
    raw: HashMap<Vec<String>, u64>,
    left_ext: HashMap<Vec<String>, HashSet<String>>,
    /// Every predictable word: corpus words plus `</s>` and `<unk>`.
    pub predictable: Vec<String>,
}

impl KnOracle {
    pub fn new(sentences: &[Vec<String>], order: usize, discount: f64) -> Self {
        let mut raw = HashMap::new();
        let mut words: HashSet<String> = HashSet::new();
        for s in sentences {
            let mut padded = vec!["<s>".to_string()];
            padded.extend(s.iter().cloned());
            padded.push("</s>".to_string());
            words.extend(s.iter().cloned());
            for k in 1..=order {
                for w in padded.windows(k) {
                    *raw.entry(w.to_vec()).or_insert(0u64) += 1;
                }
            }
        }
        let mut left_ext: HashMap<Vec<String>, HashSet<String>> = HashMap::new();
        for gram in raw.keys() {
            if gram.len() >= 2 {
                left_ext.entry(gram[1..].to_vec()).or_default().insert(gram[0].clone());
            }
        }
        let mut predictable: Vec<String> = words.into_iter().collect();
        predictable.push("</s>".into());
        predictable.push("<unk>".into());
        predictable.sort();
        predictable.dedup();
        KnOracle {
            order,
            discount,
            raw,
            left_ext,
            predictable,
        }
    }

    fn count(&self, gram: &[String]) -> f64 {
        if gram.len() == self.order || gram[0] == "<s>" {
            self.raw.get(gram).copied().unwrap_or(0) as f64
        } else {
            self.left_ext.get(gram).map_or(0, HashSet::len) as f64
        }
    }

    fn level(&self, history: &[String], word: &str) -> f64 {
        let d = self.discount;
        let with = |w: &str| {
            let mut g = history.to_vec();
            g.push(w.to_string());
            g
        };
        let (mut total, mut distinct) = (0.0, 0.0);
        for v in &self.predictable {
            let c = self.count(&with(v));
            total += c;
            if c > 0.0 {
                distinct += 1.0;
            }
        }
        if history.is_empty() {
            let c = self.count(&with(word));
            return (c - d).max(0.0) / total + d * distinct / total / self.predictable.len() as f64;
        }
        let lower = self.level(&history[1..], word);
        if total == 0.0 {
            return lower;
        }
        (self.count(&with(word)) - d).max(0.0) / total + d * distinct / total * lower
    }

    /// `P(word | context)`; unknown words become `<unk>`.
    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        let known = |w: &str| {
            if w == "<s>" || self.predictable.iter().any(|p| p == w) {
                w.to_string()
            } else {
                "<unk>".to_string()
            }
        };
        let keep = context.len().min(self.order - 1);
        let history: Vec<String> = context[context.len() - keep..].iter().map(|w| known(w)).collect();
        self.level(&history, &known(word))
    }
}

pub fn words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

pub fn seq(text: &str) -> TokenSequence {
    TokenSequence::from_tokens(text.split_whitespace())
}

pub fn instance(premise: &str, initial: &str, counterfactual: &str, ending: &str) -> StoryInstance {
    StoryInstance::new(
        "toy",
        seq(premise),
        seq(initial),
        seq(counterfactual),
        seq(ending),
        vec![],
    )
    .unwrap()
}

/// Bigram corpus where "happy" follows winning and "sad" follows losing.
pub const CONFLICT_CORPUS: [&str; 6] = [
    "she beat the game happy she was .",
    "he beat the game happy he was .",
    "we beat the game happy we were .",
    "she never beat it sad she was .",
    "he never beat it sad he was .",
    "they never beat it sad they were .",
];

pub fn conflict_model() -> cfrewrite::NgramModel {
    let corpus: Vec<TokenSequence> = CONFLICT_CORPUS.iter().map(|s| tokenize(s)).collect();
    cfrewrite::NgramModel::train(&corpus, 2, 0.75).unwrap()
}

/// "she beat the game" → "she never beat it", ending "happy she was .".
pub fn conflict_instance() -> StoryInstance {
    instance("once", "she beat the game", "she never beat it", "happy she was .")
}

const TOY_WORDS: [&str; 11] = [
    "she", "he", "we", "they", "beat", "never", "the", "game", "it", "happy", "sad",
];

fn toy_words<R: rand::Rng>(rng: &mut R, len: usize) -> String {
    (0..len)
        .map(|_| TOY_WORDS[rng.gen_range(0..TOY_WORDS.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// Random instance over the conflict-corpus vocabulary, optionally ending in ".".
pub fn random_toy_instance<R: rand::Rng>(rng: &mut R, with_period: bool) -> StoryInstance {
    let (n_end, n_init, n_cf) = (rng.gen_range(3..7), rng.gen_range(1..5), rng.gen_range(1..5));
    let mut ending = toy_words(rng, n_end);
    if with_period {
        ending.push_str(" .");
    }
    let premise = toy_words(rng, 2);
    let initial = toy_words(rng, n_init);
    let counterfactual = toy_words(rng, n_cf);
    instance(&premise, &initial, &counterfactual, &ending)
}
