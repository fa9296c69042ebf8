use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use cfrewrite::sampler::{rewrite, story_seed, RewriteError, RewriteResult, SamplerError, TraceRecord};
use cfrewrite::scorer::ScorerError;
use cfrewrite::{load_dataset, NgramModel, RemoteScorer, SamplerConfig, Scorer, StoryInstance};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{manifest_path, unix_now, BackendDescriptor, RunManifest};
use crate::{Backend, RewriteArgs};

const RETRY_BUDGET: u32 = 3;

#[derive(Serialize)]
struct OutputLine<'a> {
    story_id: &'a str,
    rewritten_ending: String,
    log_pi: f64,
    n_accepted: usize,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    story_id: &'a str,
    #[serde(flatten)]
    record: TraceRecord,
}

struct Plan {
    config: SamplerConfig,
    backend: BackendDescriptor,
    input: PathBuf,
    output: PathBuf,
    trace: Option<PathBuf>,
    jobs: usize,
    timeout: Duration,
}

fn plan_from_args(args: &RewriteArgs) -> Result<Plan, CliError> {
    if let Some(path) = &args.from_manifest {
        let manifest = RunManifest::read(path)?;
        return Ok(Plan {
            config: manifest.config,
            backend: manifest.backend,
            input: manifest.input,
            output: args.output.clone().unwrap_or(manifest.output),
            trace: args.trace.clone().or(manifest.trace),
            jobs: manifest.jobs,
            timeout: Duration::from_secs(args.timeout_secs),
        });
    }
    let backend = match args.backend {
        Backend::Ngram => BackendDescriptor::Ngram {
            model: args
                .ngram_model
                .clone()
                .ok_or_else(|| CliError::Validation("--backend ngram needs --ngram-model".into()))?,
        },
        Backend::Remote => BackendDescriptor::Remote {
            server_url: args.server_url.clone().ok_or_else(|| {
                CliError::Validation("--backend remote needs --server-url or REWRITER_SERVER_URL".into())
            })?,
        },
    };
    let config = SamplerConfig {
        n_steps: args.steps,
        temp_base: args.temp_base,
        temp_interval: args.temp_interval,
        top_k_candidates: args.top_k,
        rng_seed: args.seed,
        min_ending_length: args.min_ending_len,
        ..SamplerConfig::default()
    };
    Ok(Plan {
        config,
        backend,
        input: args.input.clone().expect("clap enforces --input"),
        output: args.output.clone().expect("clap enforces --output"),
        trace: args.trace.clone(),
        jobs: args.jobs,
        timeout: Duration::from_secs(args.timeout_secs),
    })
}

fn open_backend(backend: &BackendDescriptor, timeout: Duration) -> Result<Box<dyn Scorer>, CliError> {
    match backend {
        BackendDescriptor::Ngram { model } => {
            let model = NgramModel::load(model)
                .map_err(|e| CliError::Validation(format!("cannot load n-gram model {}: {e}", model.display())))?;
            Ok(Box::new(model))
        }
        BackendDescriptor::Remote { server_url } => {
            let scorer = RemoteScorer::new(server_url.clone(), timeout, RETRY_BUDGET)
                .map_err(|e| CliError::Validation(format!("bad server url {server_url}: {e}")))?;
            let health = scorer
                .health()
                .map_err(|e| CliError::Backend(format!("{server_url}: {e}")))?;
            log::info!("model server {server_url} is up: {health:?}");
            Ok(Box::new(scorer))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io("cannot create", path, e))
}

fn is_transport(err: &RewriteError) -> bool {
    matches!(err.sampler_error(), SamplerError::Scorer(ScorerError::Transport(_)))
}

pub fn run(args: &RewriteArgs) -> Result<(), CliError> {
    let plan = plan_from_args(args)?;
    plan.config
        .validate_allow_empty()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if plan.jobs == 0 {
        return Err(CliError::Validation("--jobs must be at least 1".into()));
    }
    let started_at = unix_now();

    let report = load_dataset(&plan.input).map_err(|e| CliError::io("cannot read input", &plan.input, e))?;
    for err in &report.errors {
        log::warn!("{}:{}: {}", plan.input.display(), err.line, err.message);
    }
    if report.instances.is_empty() {
        return Err(CliError::Validation(format!(
            "no valid stories in {}",
            plan.input.display()
        )));
    }
    let scorer = open_backend(&plan.backend, plan.timeout)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| CliError::Failed(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RewriteResult, RewriteError>> = pool.install(|| {
        report
            .instances
            .par_iter()
            .map(|story: &StoryInstance| {
                let config = SamplerConfig {
                    rng_seed: story_seed(plan.config.rng_seed, &story.story_id),
                    ..plan.config.clone()
                };
                rewrite(scorer.as_ref(), &config, story)
            })
            .collect()
    });

    let mut out = create(&plan.output)?;
    let mut trace = plan.trace.as_deref().map(create).transpose()?;
    let mut failures = 0usize;
    let mut transport_failures = 0usize;
    for (story, result) in report.instances.iter().zip(&results) {
        let result = match result {
            Ok(r) => r,
            Err(e) => {
                log::error!("story {}: {e}", story.story_id);
                failures += 1;
                transport_failures += usize::from(is_transport(e));
                continue;
            }
        };
        let line = OutputLine {
            story_id: &story.story_id,
            rewritten_ending: result.best_ending.to_string(),
            log_pi: result.best_scores.log_pi,
            n_accepted: result.trace.len(),
        };
        let text = serde_json::to_string(&line).expect("output line serializes");
        writeln!(out, "{text}").map_err(|e| CliError::io("cannot write", &plan.output, e))?;
        if let (Some(trace), Some(path)) = (trace.as_mut(), plan.trace.as_deref()) {
            for acc in &result.trace {
                let line = TraceLine {
                    story_id: &story.story_id,
                    record: acc.trace_record(),
                };
                let text = serde_json::to_string(&line).expect("trace line serializes");
                writeln!(trace, "{text}").map_err(|e| CliError::io("cannot write", path, e))?;
            }
        }
    }
    out.flush().map_err(|e| CliError::io("cannot write", &plan.output, e))?;
    if let (Some(mut trace), Some(path)) = (trace, plan.trace.as_deref()) {
        trace.flush().map_err(|e| CliError::io("cannot write", path, e))?;
    }

    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config: plan.config.clone(),
        backend: plan.backend.clone(),
        input: plan.input.clone(),
        output: plan.output.clone(),
        trace: plan.trace.clone(),
        jobs: plan.jobs,
        started_at,
        finished_at: unix_now(),
    };
    manifest.write(&manifest_path(&plan.output))?;

    let total = results.len();
    log::info!("rewrote {} of {total} stories", total - failures);
    if failures == total {
        return Err(if transport_failures > 0 {
            CliError::Backend(format!("all {total} stories failed"))
        } else {
            CliError::Failed(format!("all {total} stories failed"))
        });
    }
    Ok(())
}
