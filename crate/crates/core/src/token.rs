//! Word-level tokenization.
//!
//! Text is NFC-normalized and split on whitespace; each chunk is then split
//! into word tokens and punctuation tokens. Letters and digits joined by an
//! apostrophe or hyphen stay one word (`didn't`, `well-known`), as do digit
//! groups joined by `.` or `,` (`3.5`, `1,000`). Runs of `.`, `!` and `?` form
//! a single sentence-final token. Every other punctuation character is its
//! own token.
//!
//! Each token remembers whether it was preceded by whitespace, so
//! `detokenize(tokenize(s)) == normalize(s)` holds exactly.

use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// A tokenized span of text with its sentence-final positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<String>,
    space_before: Vec<bool>,
    boundaries: Vec<usize>,
}

/// NFC normalization plus whitespace collapsing; case is preserved.
pub fn normalize(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// True for tokens made only of `.`, `!` and `?`.
pub fn is_sentence_final(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_terminal)
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_word_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

/// Whether a token inserted into running text attaches to its left neighbour.
fn attaches_left(token: &str) -> bool {
    match token.chars().next() {
        Some(c) => {
            matches!(
                c,
                '.' | ',' | '!' | '?' | ';' | ':' | ')' | ']' | '}' | '\u{2019}' | '\u{201D}'
            ) || token.starts_with("'")
        }
        None => false,
    }
}

pub fn tokenize(text: &str) -> TokenSequence {
    let normalized = normalize(text);
    let mut tokens = Vec::new();
    let mut space_before = Vec::new();
    for chunk in normalized.split(' ') {
        if chunk.is_empty() {
            continue;
        }
        let chars: Vec<char> = chunk.chars().collect();
        let mut first_in_chunk = true;
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let start = i;
            if c.is_alphanumeric() {
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    if d.is_alphanumeric() {
                        i += 1;
                        continue;
                    }
                    let prev = chars[i - 1];
                    let next = chars.get(i + 1).copied();
                    let joins = match next {
                        Some(n) if is_word_joiner(d) => prev.is_alphanumeric() && n.is_alphanumeric(),
                        Some(n) if matches!(d, '.' | ',') => prev.is_ascii_digit() && n.is_ascii_digit(),
                        _ => false,
                    };
                    if joins {
                        i += 1;
                    } else {
                        break;
                    }
                }
            } else if is_terminal(c) {
                i += 1;
                while i < chars.len() && is_terminal(chars[i]) {
                    i += 1;
                }
            } else {
                i += 1;
            }
            tokens.push(chars[start..i].iter().collect::<String>());
            space_before.push(first_in_chunk);
            first_in_chunk = false;
        }
    }
    if let Some(first) = space_before.first_mut() {
        *first = false;
    }
    TokenSequence::from_parts(tokens, space_before)
}

/// Two tokens that would read back as one if written without a space.
fn would_fuse(left: &str, right: &str) -> bool {
    let word_end = left.chars().last().is_some_and(char::is_alphanumeric);
    let word_start = right.chars().next().is_some_and(char::is_alphanumeric);
    (word_end && word_start) || (is_sentence_final(left) && is_sentence_final(right))
}

pub fn detokenize(seq: &TokenSequence) -> String {
    let mut out = String::new();
    for (i, (tok, &space)) in seq.tokens.iter().zip(&seq.space_before).enumerate() {
        if i > 0 && (space || would_fuse(&seq.tokens[i - 1], tok)) {
            out.push(' ');
        }
        out.push_str(tok);
    }
    out
}

impl TokenSequence {
    fn from_parts(tokens: Vec<String>, space_before: Vec<bool>) -> Self {
        let mut seq = TokenSequence {
            tokens,
            space_before,
            boundaries: Vec::new(),
        };
        seq.refresh_boundaries();
        seq
    }

    /// Builds a sequence from bare tokens, spacing them the way running text would be.
    pub fn from_tokens<I, T>(tokens: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let space_before = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| i > 0 && !attaches_left(t))
            .collect();
        Self::from_parts(tokens, space_before)
    }

    fn refresh_boundaries(&mut self) {
        self.boundaries = self
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| is_sentence_final(t))
            .map(|(i, _)| i)
            .collect();
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Indices of sentence-final tokens, strictly increasing.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn is_boundary(&self, index: usize) -> bool {
        self.boundaries.binary_search(&index).is_ok()
    }

    /// Number of sentences: one per boundary, plus a trailing unterminated one if present.
    pub fn sentence_count(&self) -> usize {
        match self.boundaries.last() {
            None if self.is_empty() => 0,
            None => 1,
            Some(&last) if last + 1 == self.len() => self.boundaries.len(),
            Some(_) => self.boundaries.len() + 1,
        }
    }

    /// `self` followed by `other`, with a space between them.
    pub fn concat(&self, other: &TokenSequence) -> TokenSequence {
        let mut tokens = self.tokens.clone();
        tokens.extend(other.tokens.iter().cloned());
        let mut space_before = self.space_before.clone();
        space_before.extend(other.space_before.iter().copied());
        if !self.is_empty() && !other.is_empty() {
            space_before[self.len()] = !attaches_left(&other.tokens[0]);
        }
        Self::from_parts(tokens, space_before)
    }

    pub fn replace(&mut self, index: usize, token: impl Into<String>) -> String {
        let token = token.into();
        let keep_spacing = attaches_left(&token) == attaches_left(&self.tokens[index]);
        if !keep_spacing {
            self.space_before[index] = index > 0 && !attaches_left(&token);
        }
        let old = std::mem::replace(&mut self.tokens[index], token);
        self.refresh_boundaries();
        old
    }

    pub fn remove(&mut self, index: usize) -> String {
        let old = self.tokens.remove(index);
        self.space_before.remove(index);
        if let Some(first) = self.space_before.first_mut() {
            *first = false;
        }
        self.refresh_boundaries();
        old
    }

    pub fn insert(&mut self, index: usize, token: impl Into<String>) {
        let token = token.into();
        let space = index > 0 && !attaches_left(&token);
        if index == 0 {
            if let Some(next) = self.tokens.first() {
                self.space_before[0] = !attaches_left(next);
            }
        }
        self.tokens.insert(index, token);
        self.space_before.insert(index, space);
        self.refresh_boundaries();
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&detokenize(self))
    }
}

/// Levenshtein distance over tokens.
pub fn token_edit_distance(a: &[String], b: &[String]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ta) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, tb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ta != tb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
