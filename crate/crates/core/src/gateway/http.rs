//! Blocking HTTP client for the generation endpoint.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use parking_lot::{Condvar, Mutex};
use serde::{Deserialize, Serialize};

use super::{normalize_candidates, GatewayError, ModelClient, ModelRequest, ModelResponse, RequestKind, TokenLogprob};

const BODY_EXCERPT: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub max_inflight: usize,
    pub timeout: Duration,
    /// Retries after the first attempt, for transport errors and 5xx.
    pub max_retries: u32,
    pub backoff_base: Duration,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: None,
            max_inflight: 4,
            timeout: Duration::from_secs(120),
            max_retries: 3,
            backoff_base: Duration::from_millis(200),
        }
    }

    /// Reads MODEL_ENDPOINT, MODEL_API_KEY, MODEL_MAX_INFLIGHT and
    /// MODEL_TIMEOUT_SECS. Returns `None` without an endpoint.
    pub fn from_env() -> Option<Self> {
        let endpoint = std::env::var("MODEL_ENDPOINT").ok().filter(|s| !s.is_empty())?;
        let mut cfg = Self::new(endpoint);
        cfg.api_key = std::env::var("MODEL_API_KEY").ok().filter(|s| !s.is_empty());
        if let Some(n) = std::env::var("MODEL_MAX_INFLIGHT").ok().and_then(|s| s.parse().ok()) {
            cfg.max_inflight = n;
        }
        if let Some(s) = std::env::var("MODEL_TIMEOUT_SECS").ok().and_then(|s| s.parse().ok()) {
            cfg.timeout = Duration::from_secs(s);
        }
        Some(cfg)
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    prompt: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    media_uri: Option<&'a str>,
    max_tokens: u32,
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_logprobs: Option<u32>,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
    #[serde(default)]
    first_token_logprobs: Option<Vec<TokenLogprob>>,
}

struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock();
        while *free == 0 {
            self.cv.wait(&mut free);
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock() += 1;
        self.0.cv.notify_one();
    }
}

pub struct HttpClient {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    slots: Slots,
    cache: Mutex<HashMap<String, ModelResponse>>,
}

enum Attempt {
    Done(ModelResponse),
    Retry(String),
    Fail(GatewayError),
}

impl HttpClient {
    pub fn new(config: HttpConfig) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GatewayError::InvalidRequest(e.to_string()))?;
        let slots = Slots { free: Mutex::new(config.max_inflight.max(1)), cv: Condvar::new() };
        Ok(Self { config, client, slots, cache: Mutex::new(HashMap::new()) })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn url(&self) -> String {
        format!("{}/generate", self.config.endpoint.trim_end_matches('/'))
    }

    fn attempt(&self, req: &ModelRequest) -> Attempt {
        let body = WireRequest {
            prompt: &req.prompt,
            media_uri: req.media_uri.as_deref(),
            max_tokens: req.max_tokens,
            temperature: req.temperature,
            top_logprobs: (req.kind == RequestKind::Score).then_some(req.top_logprobs),
        };
        let mut builder = self.client.post(self.url()).json(&body).header("Idempotency-Key", &req.idempotency_key);
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let started = Instant::now();
        let resp = match builder.send() {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Attempt::Fail(GatewayError::Timeout(self.config.timeout)),
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = resp.status();
        if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
            return Attempt::Retry(format!("status {}", status.as_u16()));
        }
        if !status.is_success() {
            let body: String = resp.text().unwrap_or_default().chars().take(BODY_EXCERPT).collect();
            return Attempt::Fail(GatewayError::ProviderError { status: status.as_u16(), body });
        }
        let wire: WireResponse = match resp.json() {
            Ok(w) => w,
            Err(e) if e.is_timeout() => return Attempt::Fail(GatewayError::Timeout(self.config.timeout)),
            Err(e) => return Attempt::Fail(GatewayError::BadResponse(e.to_string())),
        };
        let candidates = match wire.first_token_logprobs {
            Some(c) => match normalize_candidates(c) {
                Ok(c) => c,
                Err(e) => return Attempt::Fail(e),
            },
            None if req.kind == RequestKind::Score => return Attempt::Fail(GatewayError::CapabilityError),
            None => Vec::new(),
        };
        Attempt::Done(ModelResponse {
            text: wire.text,
            first_token_candidates: candidates,
            latency: started.elapsed(),
            provider_id: self.config.endpoint.clone(),
        })
    }
}

impl ModelClient for HttpClient {
    fn generate(&self, req: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        req.validate()?;
        if let Some(hit) = self.cache.lock().get(&req.idempotency_key) {
            return Ok(hit.clone());
        }
        let _slot = self.slots.acquire();
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for n in 0..attempts {
            if n > 0 {
                std::thread::sleep(self.config.backoff_base * 2u32.pow(n - 1));
            }
            match self.attempt(req) {
                Attempt::Done(resp) => {
                    self.cache.lock().insert(req.idempotency_key.clone(), resp.clone());
                    return Ok(resp);
                }
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(why) => {
                    tracing::warn!(attempt = n + 1, %why, "model request failed");
                    last = why;
                }
            }
        }
        Err(GatewayError::Unavailable { attempts, last })
    }
}
