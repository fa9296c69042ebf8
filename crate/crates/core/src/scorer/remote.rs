//! JSON-over-HTTP client for an external model server.
//!
//! Token sequences travel as their tokens joined by single spaces, so the
//! server's whitespace split yields exactly the engine's words.

use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Candidate, Scorer, ScorerError};

#[derive(Debug, Serialize)]
pub struct ClmRequest<'a> {
    pub context: &'a str,
    pub continuation: &'a str,
}

#[derive(Debug, Deserialize)]
pub struct ClmResponse {
    pub tokens: Vec<String>,
    pub logprobs: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct MlmRequest<'a> {
    pub tokens: &'a [String],
    pub mask_index: usize,
    pub top_k: usize,
}

#[derive(Debug, Deserialize)]
pub struct MlmCandidate {
    pub token: String,
    pub logprob: f64,
}

#[derive(Debug, Deserialize)]
pub struct MlmResponse {
    pub candidates: Vec<MlmCandidate>,
}

#[derive(Debug, Serialize)]
pub struct CoherenceRequest<'a> {
    pub context: &'a str,
    pub ending: &'a str,
}

#[derive(Debug, Deserialize)]
pub struct CoherenceResponse {
    pub logprob: f64,
}

#[derive(Debug, Deserialize)]
pub struct HealthResponse {
    pub clm: String,
    pub mlm: String,
    pub coherence: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ErrorBody {
    error: String,
}

/// Tolerance for tiny positive log-probabilities produced by rounding on the server.
const POSITIVE_SLACK: f64 = 1e-6;

pub struct RemoteScorer {
    base_url: String,
    client: Client,
    retry_budget: u32,
    /// Cleared once the server answers 404 on the coherence endpoint.
    coherence_available: AtomicBool,
}

impl RemoteScorer {
    pub fn new(base_url: impl Into<String>, timeout: Duration, retry_budget: u32) -> Result<Self, ScorerError> {
        let client = Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ScorerError::Transport(e.to_string()))?;
        Ok(RemoteScorer {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            client,
            retry_budget,
            coherence_available: AtomicBool::new(true),
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn health(&self) -> Result<HealthResponse, ScorerError> {
        self.with_retries(|| {
            let resp = self
                .client
                .get(format!("{}/v1/health", self.base_url))
                .send()
                .map_err(|e| ScorerError::Transport(e.to_string()))?;
            decode(resp)
        })
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R, ScorerError> {
        self.with_retries(|| {
            let resp = self
                .client
                .post(format!("{}{}", self.base_url, path))
                .json(body)
                .send()
                .map_err(|e| ScorerError::Transport(e.to_string()))?;
            decode(resp)
        })
    }

    fn with_retries<R>(&self, mut call: impl FnMut() -> Result<R, ScorerError>) -> Result<R, ScorerError> {
        let mut attempt = 0;
        loop {
            match call() {
                Err(e) if e.is_retriable() && attempt < self.retry_budget => {
                    attempt += 1;
                    log::debug!("retrying after transport error ({attempt}/{}): {e}", self.retry_budget);
                    thread::sleep(Duration::from_millis(50 * u64::from(attempt)));
                }
                other => return other,
            }
        }
    }
}

fn decode<R: DeserializeOwned>(resp: reqwest::blocking::Response) -> Result<R, ScorerError> {
    let status = resp.status();
    let bytes = resp.bytes().map_err(|e| ScorerError::Transport(e.to_string()))?;
    if status.is_success() {
        return serde_json::from_slice(&bytes).map_err(|e| ScorerError::Protocol(e.to_string()));
    }
    let message = serde_json::from_slice::<ErrorBody>(&bytes)
        .map(|b| b.error)
        .unwrap_or_else(|_| String::from_utf8_lossy(&bytes).into_owned());
    if status.is_server_error() {
        Err(ScorerError::Transport(format!("{status}: {message}")))
    } else {
        Err(ScorerError::Rejected {
            status: status.as_u16(),
            message,
        })
    }
}

fn check_logprob(lp: f64) -> Result<f64, ScorerError> {
    if !lp.is_finite() || lp > POSITIVE_SLACK {
        return Err(ScorerError::Protocol(format!("invalid log-probability {lp}")));
    }
    Ok(lp.min(0.0))
}

fn join(tokens: &[String]) -> String {
    tokens.join(" ")
}

impl Scorer for RemoteScorer {
    fn clm_logprobs(&self, context: &[String], continuation: &[String]) -> Result<Vec<f64>, ScorerError> {
        let context = join(context);
        let continuation_text = join(continuation);
        let resp: ClmResponse = self.post(
            "/v1/clm/logprobs",
            &ClmRequest {
                context: &context,
                continuation: &continuation_text,
            },
        )?;
        if resp.logprobs.len() != continuation.len() {
            return Err(ScorerError::Protocol(format!(
                "expected {} log-probabilities, got {}",
                continuation.len(),
                resp.logprobs.len()
            )));
        }
        resp.logprobs.into_iter().map(check_logprob).collect()
    }

    fn mlm_candidates(&self, tokens: &[String], position: usize, k: usize) -> Result<Vec<Candidate>, ScorerError> {
        if position >= tokens.len() {
            return Err(ScorerError::PositionOutOfRange {
                position,
                len: tokens.len(),
            });
        }
        let resp: MlmResponse = self.post(
            "/v1/mlm/candidates",
            &MlmRequest {
                tokens,
                mask_index: position,
                top_k: k,
            },
        )?;
        let mut out = Vec::with_capacity(resp.candidates.len());
        for c in resp.candidates {
            if c.token.is_empty() || c.token.chars().any(char::is_whitespace) {
                continue;
            }
            out.push(Candidate {
                logprob: check_logprob(c.logprob)?,
                token: c.token,
            });
        }
        out.sort_by(|a, b| b.logprob.total_cmp(&a.logprob));
        out.truncate(k);
        Ok(out)
    }

    fn coherence_override(&self, context: &[String], ending: &[String]) -> Result<Option<f64>, ScorerError> {
        if !self.coherence_available.load(Ordering::Relaxed) {
            return Ok(None);
        }
        let context = join(context);
        let ending = join(ending);
        let result: Result<CoherenceResponse, ScorerError> = self.post(
            "/v1/coherence",
            &CoherenceRequest {
                context: &context,
                ending: &ending,
            },
        );
        match result {
            Ok(resp) => check_logprob(resp.logprob).map(Some),
            Err(ScorerError::Rejected { status, .. }) if status == StatusCode::NOT_FOUND.as_u16() => {
                log::info!("server has no coherence model; using causal LM scores");
                self.coherence_available.store(false, Ordering::Relaxed);
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}
