//! Model access: one request/response contract, an HTTP client and a
//! deterministic mock.

mod edit;
mod http;
mod mock;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use edit::{apply_edit_script, apply_fix, EditOutcome};
pub use http::{HttpClient, HttpConfig};
pub use mock::{aspect_of_caption, fact_pool, Fact, MockConfig, MockModel, MockScenario, PlantedError, TranscriptEntry, FACTS_PER_CAPTION, PRE_SCORE_DIST};

/// Logprob assumed for a Yes/No token missing from a truncated candidate list.
pub const LOGPROB_FLOOR: f64 = -20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Generate,
    Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRequest {
    pub kind: RequestKind,
    pub prompt: String,
    pub media_uri: Option<String>,
    pub max_tokens: u32,
    pub temperature: f64,
    pub top_logprobs: u32,
    pub idempotency_key: String,
}

impl ModelRequest {
    pub fn generate(prompt: impl Into<String>, key: impl Into<String>) -> Self {
        Self {
            kind: RequestKind::Generate,
            prompt: prompt.into(),
            media_uri: None,
            max_tokens: 512,
            temperature: 0.0,
            top_logprobs: 0,
            idempotency_key: key.into(),
        }
    }

    pub fn score(prompt: impl Into<String>, key: impl Into<String>) -> Self {
        Self { kind: RequestKind::Score, max_tokens: 1, top_logprobs: 5, ..Self::generate(prompt, key) }
    }

    pub fn with_media(mut self, uri: Option<&str>) -> Self {
        self.media_uri = uri.map(str::to_string);
        self
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(GatewayError::InvalidRequest(format!("temperature {} must be finite and >= 0", self.temperature)));
        }
        if self.kind == RequestKind::Score && self.top_logprobs < 2 {
            return Err(GatewayError::InvalidRequest("score requests need top_logprobs >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprob {
    pub token: String,
    pub logprob: f64,
}

impl TokenLogprob {
    pub fn new(token: impl Into<String>, logprob: f64) -> Self {
        Self { token: token.into(), logprob }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub text: String,
    /// Sorted by descending logprob.
    pub first_token_candidates: Vec<TokenLogprob>,
    pub latency: Duration,
    pub provider_id: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GatewayError {
    #[error("provider unavailable after {attempts} attempts: {last}")]
    Unavailable { attempts: u32, last: String },
    #[error("provider returned status {status}: {body}")]
    ProviderError { status: u16, body: String },
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("provider does not return first-token logprobs")]
    CapabilityError,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("malformed provider response: {0}")]
    BadResponse(String),
}

/// Sorts descending and rejects non-finite or positive logprobs.
pub fn normalize_candidates(mut c: Vec<TokenLogprob>) -> Result<Vec<TokenLogprob>, GatewayError> {
    if let Some(bad) = c.iter().find(|t| !t.logprob.is_finite() || t.logprob > 0.0) {
        return Err(GatewayError::BadResponse(format!("logprob {} for token {:?}", bad.logprob, bad.token)));
    }
    c.sort_by(|a, b| b.logprob.total_cmp(&a.logprob));
    Ok(c)
}

pub trait ModelClient: Send + Sync {
    fn generate(&self, req: &ModelRequest) -> Result<ModelResponse, GatewayError>;

    /// First-token scoring; fails with `CapabilityError` when the provider
    /// returned no candidates.
    fn score_first_token(&self, req: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        if req.kind != RequestKind::Score {
            return Err(GatewayError::InvalidRequest("score_first_token needs a score request".into()));
        }
        let resp = self.generate(req)?;
        if resp.first_token_candidates.is_empty() {
            return Err(GatewayError::CapabilityError);
        }
        Ok(resp)
    }
}

impl<T: ModelClient + ?Sized> ModelClient for std::sync::Arc<T> {
    fn generate(&self, req: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        (**self).generate(req)
    }

    fn score_first_token(&self, req: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        (**self).score_first_token(req)
    }
}

impl<T: ModelClient + ?Sized> ModelClient for &T {
    fn generate(&self, req: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        (**self).generate(req)
    }

    fn score_first_token(&self, req: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        (**self).score_first_token(req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_validation() {
        let mut r = ModelRequest::score("p", "k");
        assert!(r.validate().is_ok());
        r.top_logprobs = 1;
        assert!(matches!(r.validate(), Err(GatewayError::InvalidRequest(_))));
        let g = ModelRequest::generate("p", "k").with_temperature(-1.0);
        assert!(g.validate().is_err());
    }

    #[test]
    fn candidates_sorted() {
        let c = normalize_candidates(vec![TokenLogprob::new("No", -2.4), TokenLogprob::new("Yes", -0.1)]).unwrap();
        assert_eq!(c[0].token, "Yes");
        assert!(normalize_candidates(vec![TokenLogprob::new("x", f64::NAN)]).is_err());
    }
}
