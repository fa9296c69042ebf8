use std::collections::HashMap;
use std::io::{BufRead, BufReader};

use cfrewrite::metrics::{evaluate_records, load_scores, EvalRecord, MetricsError};
use cfrewrite::{load_dataset, tokenize, StoryInstance};
use serde::Deserialize;

use crate::error::CliError;
use crate::EvalArgs;

#[derive(Deserialize)]
struct Hypothesis {
    story_id: String,
    rewritten_ending: String,
}

fn read_hypotheses(args: &EvalArgs) -> Result<Vec<Hypothesis>, CliError> {
    let file = std::fs::File::open(&args.hypotheses).map_err(|e| CliError::io("cannot read", &args.hypotheses, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io("cannot read", &args.hypotheses, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let h: Hypothesis = serde_json::from_str(&line)
            .map_err(|e| CliError::Validation(format!("{}:{}: {e}", args.hypotheses.display(), i + 1)))?;
        out.push(h);
    }
    if out.is_empty() {
        return Err(CliError::Validation(format!(
            "no hypotheses in {}",
            args.hypotheses.display()
        )));
    }
    Ok(out)
}

fn metrics_error(e: MetricsError) -> CliError {
    match e {
        MetricsError::NoReferences(id) => CliError::DataMismatch(format!("story {id} has no reference endings")),
        other => CliError::Validation(other.to_string()),
    }
}

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    let hypotheses = read_hypotheses(args)?;
    let report = load_dataset(&args.dataset).map_err(|e| CliError::io("cannot read dataset", &args.dataset, e))?;
    for err in &report.errors {
        log::warn!("{}:{}: {}", args.dataset.display(), err.line, err.message);
    }
    let stories: HashMap<&str, &StoryInstance> = report.instances.iter().map(|s| (s.story_id.as_str(), s)).collect();
    let scores = args
        .scores
        .as_ref()
        .map(|path| load_scores(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display()))))
        .transpose()?;

    let unknown: Vec<&str> = hypotheses
        .iter()
        .map(|h| h.story_id.as_str())
        .filter(|id| !stories.contains_key(id))
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::DataMismatch(format!(
            "story ids not in dataset: {}",
            unknown.join(", ")
        )));
    }

    let mut records = Vec::with_capacity(hypotheses.len());
    let mut unscored = Vec::new();
    for h in &hypotheses {
        let story = stories[h.story_id.as_str()];
        let coherence = match &scores {
            Some(map) => match map.get(&h.story_id) {
                Some(&v) => Some(v),
                None => {
                    unscored.push(h.story_id.as_str());
                    continue;
                }
            },
            None => None,
        };
        let record = EvalRecord::new(
            h.story_id.clone(),
            tokenize(&h.rewritten_ending),
            story.reference_endings.clone(),
            coherence,
        )
        .map_err(metrics_error)?;
        records.push(record);
    }
    if !unscored.is_empty() {
        return Err(CliError::DataMismatch(format!(
            "story ids missing from scores file: {}",
            unscored.join(", ")
        )));
    }

    let metrics = evaluate_records(&records).map_err(metrics_error)?;
    let text = serde_json::to_string_pretty(&metrics).expect("report serializes");
    println!("{text}");
    if let Some(path) = &args.output {
        std::fs::write(path, text + "\n").map_err(|e| CliError::io("cannot write", path, e))?;
    }
    Ok(())
}
