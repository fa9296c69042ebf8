use cfrewrite::dataset::parse_dataset;
use cfrewrite::token::{tokenize, TokenSequence};
use cfrewrite::NgramModel;

use crate::error::CliError;
use crate::{CorpusFormat, TrainArgs};

fn read_corpus(args: &TrainArgs) -> Result<Vec<TokenSequence>, CliError> {
    let bytes = std::fs::read(&args.corpus).map_err(|e| CliError::io("cannot read corpus", &args.corpus, e))?;
    match args.format {
        CorpusFormat::Text => {
            let text = String::from_utf8(bytes)
                .map_err(|e| CliError::Validation(format!("corpus {} is not UTF-8: {e}", args.corpus.display())))?;
            Ok(text.lines().map(tokenize).filter(|s| !s.is_empty()).collect())
        }
        CorpusFormat::Stories => {
            let report = parse_dataset(&bytes[..]);
            for err in &report.errors {
                log::warn!("skipping corpus line {}: {}", err.line, err.message);
            }
            let mut out = Vec::new();
            for story in report.instances {
                out.push(story.initial_prefix().concat(&story.original_ending));
                for reference in &story.reference_endings {
                    out.push(story.counterfactual_prefix().concat(reference));
                }
            }
            Ok(out)
        }
    }
}

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
    if args.order < 2 {
        return Err(CliError::Validation(format!(
            "--order must be at least 2, got {}",
            args.order
        )));
    }
    if !(args.discount > 0.0 && args.discount < 1.0) {
        return Err(CliError::Validation(format!(
            "--discount must lie in (0, 1), got {}",
            args.discount
        )));
    }
    let corpus = read_corpus(args)?;
    let model =
        NgramModel::train(&corpus, args.order, args.discount).map_err(|e| CliError::Validation(e.to_string()))?;
    model
        .save(&args.out)
        .map_err(|e| CliError::io("cannot write model", &args.out, e))?;
    println!("sequences: {}", corpus.len());
    println!("vocabulary: {}", model.vocabulary().len());
    for (k, n) in model.ngram_counts().iter().enumerate() {
        println!("{}-grams: {n}", k + 1);
    }
    Ok(())
}
