//! Remote provider speaking JSON over HTTP.
//!
//! | route                | request body                                    | response body           |
//! |----------------------|-------------------------------------------------|-------------------------|
//! | `POST /v1/complete`  | `{task, prompt, context, max_output_tokens}`    | `{text}`                |
//! | `POST /v1/embed`     | `{text, dimension}`                             | `{values}`              |
//! | `POST /v1/translate` | `{text, source, target}`                        | `{text}`                |
//! | `POST /v1/transcribe`| `{audio_b64, language}`                         | `{text}`                |
//! | `POST /v1/synthesize`| `{text, language}`                              | `{audio_b64}`           |

use std::collections::BTreeSet;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    Capability, CompletionRequest, EmbeddingVector, LanguageTag, Provider, ProviderError,
    ProviderProfile, ProviderResult, TranslationResult,
};

/// Caps the number of requests in flight; callers beyond the cap block until
/// a slot frees up.
#[derive(Debug)]
pub struct InFlightLimiter {
    cap: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
}

pub struct InFlightPermit<'a> {
    limiter: &'a InFlightLimiter,
}

impl InFlightLimiter {
    pub fn new(cap: usize) -> Self {
        Self {
            cap: cap.max(1),
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> InFlightPermit<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.cap {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        InFlightPermit { limiter: self }
    }

    pub fn in_flight(&self) -> usize {
        *self.in_flight.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn cap(&self) -> usize {
        self.cap
    }
}

impl Drop for InFlightPermit<'_> {
    fn drop(&mut self) {
        let mut n = self
            .limiter
            .in_flight
            .lock()
            .unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.limiter.freed.notify_one();
    }
}

pub struct HttpProvider {
    profile: ProviderProfile,
    base_url: String,
    client: reqwest::blocking::Client,
    limiter: InFlightLimiter,
}

#[derive(Deserialize)]
struct TextReply {
    text: String,
}

#[derive(Deserialize)]
struct EmbedReply {
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct AudioReply {
    audio_b64: String,
}

#[derive(Serialize)]
struct CompleteBody<'a> {
    task: &'a str,
    prompt: &'a str,
    context: &'a [String],
    max_output_tokens: u32,
}

impl HttpProvider {
    pub fn new(name: &str, base_url: &str, max_in_flight: usize) -> ProviderResult<Self> {
        if !(base_url.starts_with("http://") || base_url.starts_with("https://")) {
            return Err(ProviderError::Config(format!(
                "provider `{name}` base URL must be http(s): `{base_url}`"
            )));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(Self {
            profile: ProviderProfile {
                name: name.to_string(),
                capabilities: BTreeSet::from([
                    Capability::Complete,
                    Capability::Embed,
                    Capability::Translate,
                    Capability::Transcribe,
                    Capability::Synthesize,
                ]),
                deterministic: false,
            },
            base_url: base_url.trim_end_matches('/').to_string(),
            client,
            limiter: InFlightLimiter::new(max_in_flight),
        })
    }

    pub fn limiter(&self) -> &InFlightLimiter {
        &self.limiter
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, route: &str, body: &B) -> ProviderResult<R> {
        let _permit = self.limiter.acquire();
        let url = format!("{}/v1/{route}", self.base_url);
        let resp = self
            .client
            .post(&url)
            .json(body)
            .send()
            .map_err(|e| ProviderError::Transport(format!("{url}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ProviderError::Transport(format!("{url}: HTTP {status}")));
        }
        resp.json::<R>()
            .map_err(|e| ProviderError::Decode(format!("{url}: {e}")))
    }
}

impl Provider for HttpProvider {
    fn profile(&self) -> &ProviderProfile {
        &self.profile
    }

    fn complete(&self, request: &CompletionRequest) -> ProviderResult<String> {
        let body = CompleteBody {
            task: request.task_kind.as_str(),
            prompt: &request.prompt_text,
            context: &request.context_passages,
            max_output_tokens: request.max_output_tokens,
        };
        Ok(self.post::<_, TextReply>("complete", &body)?.text)
    }

    fn embed(&self, text: &str, dimension: usize) -> ProviderResult<EmbeddingVector> {
        let reply: EmbedReply =
            self.post("embed", &json!({ "text": text, "dimension": dimension }))?;
        if reply.values.len() != dimension {
            return Err(ProviderError::Decode(format!(
                "expected {dimension} embedding values, got {}",
                reply.values.len()
            )));
        }
        Ok(EmbeddingVector::normalized(reply.values))
    }

    fn translate(
        &self,
        text: &str,
        source: &LanguageTag,
        target: &LanguageTag,
    ) -> ProviderResult<TranslationResult> {
        if source == target {
            return Ok(TranslationResult {
                text: text.to_string(),
                source_language: source.clone(),
                target_language: target.clone(),
            });
        }
        let reply: TextReply = self.post(
            "translate",
            &json!({ "text": text, "source": source, "target": target }),
        )?;
        Ok(TranslationResult {
            text: reply.text,
            source_language: source.clone(),
            target_language: target.clone(),
        })
    }

    fn transcribe(&self, audio: &[u8], language: &LanguageTag) -> ProviderResult<String> {
        let reply: TextReply = self.post(
            "transcribe",
            &json!({ "audio_b64": BASE64.encode(audio), "language": language }),
        )?;
        Ok(reply.text)
    }

    fn synthesize(&self, text: &str, language: &LanguageTag) -> ProviderResult<Vec<u8>> {
        let reply: AudioReply =
            self.post("synthesize", &json!({ "text": text, "language": language }))?;
        BASE64
            .decode(reply.audio_b64)
            .map_err(|e| ProviderError::Decode(e.to_string()))
    }
}
