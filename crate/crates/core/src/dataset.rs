//! Counterfactual story records stored as newline-delimited JSON.

use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::token::{tokenize, TokenSequence};

/// Number of sentences in an original ending.
pub const ENDING_SENTENCES: usize = 3;

/// One story: premise, the two alternative contexts, the original ending and
/// any human-edited endings for the counterfactual context.
#[derive(Debug, Clone, PartialEq)]
pub struct StoryInstance {
    pub story_id: String,
    pub premise: TokenSequence,
    pub initial_context: TokenSequence,
    pub counterfactual_context: TokenSequence,
    pub original_ending: TokenSequence,
    pub reference_endings: Vec<TokenSequence>,
}

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("field `{0}` is empty")]
    EmptyField(&'static str),
}

impl StoryInstance {
    pub fn new(
        story_id: impl Into<String>,
        premise: TokenSequence,
        initial_context: TokenSequence,
        counterfactual_context: TokenSequence,
        original_ending: TokenSequence,
        reference_endings: Vec<TokenSequence>,
    ) -> Result<Self, InstanceError> {
        for (name, seq) in [
            ("premise", &premise),
            ("initial", &initial_context),
            ("counterfactual", &counterfactual_context),
            ("original_ending", &original_ending),
        ] {
            if seq.is_empty() {
                return Err(InstanceError::EmptyField(name));
            }
        }
        Ok(StoryInstance {
            story_id: story_id.into(),
            premise,
            initial_context,
            counterfactual_context,
            original_ending,
            reference_endings,
        })
    }

    /// Premise followed by the initial context.
    pub fn initial_prefix(&self) -> TokenSequence {
        self.premise.concat(&self.initial_context)
    }

    /// Premise followed by the counterfactual context.
    pub fn counterfactual_prefix(&self) -> TokenSequence {
        self.premise.concat(&self.counterfactual_context)
    }

    /// The two contexts are identical, so there is nothing to rewrite.
    pub fn is_degenerate(&self) -> bool {
        self.initial_context.tokens() == self.counterfactual_context.tokens()
    }
}

/// One line of the dataset file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoryRecord {
    pub story_id: String,
    pub premise: String,
    pub initial: String,
    pub counterfactual: String,
    pub original_ending: String,
    pub edited_endings: Vec<Vec<String>>,
}

impl StoryRecord {
    pub fn into_instance(self) -> Result<StoryInstance, String> {
        let ending = tokenize(&self.original_ending);
        let instance = StoryInstance::new(
            self.story_id,
            tokenize(&self.premise),
            tokenize(&self.initial),
            tokenize(&self.counterfactual),
            ending,
            self.edited_endings
                .iter()
                .map(|sentences| tokenize(&sentences.join(" ")))
                .collect(),
        )
        .map_err(|e| e.to_string())?;
        let sentences = instance.original_ending.sentence_count();
        if sentences != ENDING_SENTENCES || instance.original_ending.boundaries().len() != ENDING_SENTENCES {
            return Err(format!(
                "original_ending must hold {ENDING_SENTENCES} terminated sentences, found {sentences} sentence(s) and {} terminator(s)",
                instance.original_ending.boundaries().len()
            ));
        }
        Ok(instance)
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] io::Error),
}

/// A rejected line, numbered from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct LoadReport {
    pub instances: Vec<StoryInstance>,
    pub errors: Vec<LineError>,
    /// Story ids whose initial and counterfactual contexts coincide.
    pub degenerate: Vec<String>,
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<LoadReport, DatasetError> {
    let file = std::fs::File::open(path)?;
    Ok(parse_dataset(file))
}

/// Parses every line of `reader`. Invalid UTF-8, malformed JSON and schema
/// violations are reported per line; parsing never stops early.
pub fn parse_dataset<R: Read>(reader: R) -> LoadReport {
    let mut report = LoadReport::default();
    let mut reader = BufReader::new(reader);
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                report.errors.push(LineError {
                    line: line_no + 1,
                    message: format!("read failure: {e}"),
                });
                break;
            }
        }
        line_no += 1;
        let text = match std::str::from_utf8(&buf) {
            Ok(t) => t.trim(),
            Err(e) => {
                report.errors.push(LineError {
                    line: line_no,
                    message: format!("invalid UTF-8: {e}"),
                });
                continue;
            }
        };
        if text.is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<StoryRecord>(text)
            .map_err(|e| format!("schema violation: {e}"))
            .and_then(StoryRecord::into_instance);
        match parsed {
            Ok(instance) => {
                if instance.is_degenerate() {
                    log::warn!("story {} has identical contexts", instance.story_id);
                    report.degenerate.push(instance.story_id.clone());
                }
                report.instances.push(instance);
            }
            Err(message) => report.errors.push(LineError { line: line_no, message }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GOOD: &str = r#"{"story_id":"s1","premise":"Kelly loved games.","initial":"Kelly never beat the game.","counterfactual":"Kelly finally beat the game.","original_ending":"She was sad. She tried again. She gave up.","edited_endings":[["She was happy.","She played again.","She won again."]]}"#;

    #[test]
    fn parses_valid_line() {
        let report = parse_dataset(GOOD.as_bytes());
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        let inst = &report.instances[0];
        assert_eq!(inst.story_id, "s1");
        assert_eq!(inst.original_ending.boundaries().len(), 3);
        assert_eq!(inst.reference_endings.len(), 1);
        assert_eq!(
            inst.reference_endings[0].to_string(),
            "She was happy. She played again. She won again."
        );
        assert!(!inst.is_degenerate());
    }

    #[test]
    fn missing_key_is_line_error() {
        let bad = GOOD.replace(r#""counterfactual":"Kelly finally beat the game.","#, "");
        let input = format!("{GOOD}\n{bad}\n{GOOD}\n");
        let report = parse_dataset(input.as_bytes());
        assert_eq!(report.instances.len(), 2);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].line, 2);
        assert!(report.errors[0].message.contains("counterfactual"));
    }

    #[test]
    fn counts_lines() {
        let input = format!("{GOOD}\n{GOOD}\n\n{GOOD}");
        assert_eq!(parse_dataset(input.as_bytes()).instances.len(), 3);
    }

    #[test]
    fn rejects_two_sentence_ending() {
        let bad = GOOD.replace("She tried again. ", "");
        let report = parse_dataset(bad.as_bytes());
        assert!(report.instances.is_empty());
        assert!(report.errors[0].message.contains("3 terminated"));
    }

    #[test]
    fn flags_identical_contexts() {
        let same = GOOD.replace("Kelly finally beat the game.", "Kelly never beat the game.");
        let report = parse_dataset(same.as_bytes());
        assert_eq!(report.instances.len(), 1);
        assert_eq!(report.degenerate, vec!["s1".to_string()]);
    }

    #[test]
    fn empty_field_rejected() {
        let bad = GOOD.replace("Kelly loved games.", " ");
        let report = parse_dataset(bad.as_bytes());
        assert!(report.errors[0].message.contains("premise"));
    }

    proptest! {
        #[test]
        fn loader_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
            let report = parse_dataset(&bytes[..]);
            let lines = bytes.split(|b| *b == b'\n').count();
            prop_assert!(report.instances.len() + report.errors.len() <= lines);
        }
    }
}
