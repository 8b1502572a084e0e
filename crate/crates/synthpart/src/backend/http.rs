//! Live chat-completions backend.
//!
//! Speaks the de-facto HTTP+JSON protocol: POST `{base_url}/chat/completions`
//! with model, messages and temperature, bearer-authenticated with the key in
//! the `SYNTHPART_API_KEY` environment variable.

use serde::{Deserialize, Serialize};

use crate::backend::{Backend, BackendError, FinishReason, GenerationRequest, GenerationResponse};
use crate::embedding::Embedding;

pub const API_KEY_ENV: &str = "SYNTHPART_API_KEY";

pub struct HttpBackend {
    base_url: String,
    api_key: Option<String>,
    embedding_model: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<i64>,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireChoiceMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    total_tokens: u64,
}

#[derive(Serialize)]
struct WireEmbedRequest<'a> {
    model: &'a str,
    input: &'a str,
}

#[derive(Deserialize)]
struct WireEmbedResponse {
    data: Vec<WireEmbedding>,
}

#[derive(Deserialize)]
struct WireEmbedding {
    embedding: Vec<f64>,
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpBackend {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: std::env::var(API_KEY_ENV).ok(),
            embedding_model: None,
            client: reqwest::blocking::Client::new(),
        }
    }

    pub fn with_api_key(mut self, api_key: impl Into<String>) -> Self {
        self.api_key = Some(api_key.into());
        self
    }

    /// Enable the provider's embedding endpoint; without it `embed` uses the
    /// deterministic bag-of-words fallback.
    pub fn with_embedding_model(mut self, model: impl Into<String>) -> Self {
        self.embedding_model = Some(model.into());
        self
    }

    fn post(
        &self,
        path: &str,
        body: &impl Serialize,
    ) -> Result<reqwest::blocking::Response, BackendError> {
        let mut builder = self
            .client
            .post(format!("{}{path}", self.base_url))
            .header("content-type", "application/json");
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder
            .json(body)
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let body = response.text().unwrap_or_default();
            return Err(BackendError::ProviderError {
                status: status.as_u16(),
                body,
            });
        }
        Ok(response)
    }
}

fn map_finish_reason(reason: Option<&str>) -> FinishReason {
    match reason {
        Some("length") => FinishReason::Length,
        Some("content_filter") => FinishReason::Refusal,
        Some("error") => FinishReason::Error,
        _ => FinishReason::Stop,
    }
}

impl Backend for HttpBackend {
    fn complete(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        request.validate()?;
        let wire = WireRequest {
            model: &request.model_id,
            messages: request
                .messages
                .iter()
                .map(|m| WireMessage {
                    role: m.role.as_str(),
                    content: &m.content,
                })
                .collect(),
            temperature: request.temperature,
            seed: request.seed,
        };
        let response = self.post("/chat/completions", &wire)?;
        let parsed: WireResponse = response
            .json()
            .map_err(|e| BackendError::Transport(format!("invalid response body: {e}")))?;
        let choice =
            parsed
                .choices
                .into_iter()
                .next()
                .ok_or_else(|| BackendError::ProviderError {
                    status: 200,
                    body: "response carried no choices".into(),
                })?;
        Ok(GenerationResponse {
            content: choice.message.content.unwrap_or_default(),
            finish_reason: map_finish_reason(choice.finish_reason.as_deref()),
            usage_tokens: parsed.usage.map(|u| u.total_tokens).unwrap_or(0),
        })
    }

    fn embed(&self, text: &str) -> Result<Embedding, BackendError> {
        if text.is_empty() {
            return Err(BackendError::EmptyText);
        }
        let Some(model) = &self.embedding_model else {
            return Ok(crate::embedding::bag_of_words_embed(text)?);
        };
        let response = self.post("/embeddings", &WireEmbedRequest { model, input: text })?;
        let parsed: WireEmbedResponse = response
            .json()
            .map_err(|e| BackendError::Transport(format!("invalid embedding body: {e}")))?;
        let first = parsed
            .data
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::ProviderError {
                status: 200,
                body: "embedding response carried no data".into(),
            })?;
        Ok(Embedding::Dense(first.embedding))
    }

    fn name(&self) -> &str {
        "http"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Message;

    #[test]
    fn wire_request_shape() {
        let request = GenerationRequest::new(
            vec![Message::system("s"), Message::user("u")],
            "gpt-4-turbo",
        );
        let wire = WireRequest {
            model: &request.model_id,
            messages: request
                .messages
                .iter()
                .map(|m| WireMessage {
                    role: m.role.as_str(),
                    content: &m.content,
                })
                .collect(),
            temperature: request.temperature,
            seed: None,
        };
        let body = serde_json::to_value(&wire).unwrap();
        assert_eq!(body["model"], "gpt-4-turbo");
        assert_eq!(body["temperature"], 1.0);
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "u");
        assert!(body.get("seed").is_none());
    }

    #[test]
    fn wire_response_parsing() {
        let raw = r#"{"choices":[{"message":{"content":"hello"},"finish_reason":"stop"}],"usage":{"total_tokens":12}}"#;
        let parsed: WireResponse = serde_json::from_str(raw).unwrap();
        assert_eq!(parsed.choices[0].message.content.as_deref(), Some("hello"));
        assert_eq!(parsed.usage.as_ref().unwrap().total_tokens, 12);
        assert_eq!(
            map_finish_reason(parsed.choices[0].finish_reason.as_deref()),
            FinishReason::Stop
        );
        assert_eq!(map_finish_reason(Some("length")), FinishReason::Length);
        assert_eq!(
            map_finish_reason(Some("content_filter")),
            FinishReason::Refusal
        );
    }

    #[test]
    fn trailing_slash_trimmed() {
        let backend = HttpBackend::new("http://localhost:9999/v1/");
        assert_eq!(backend.base_url, "http://localhost:9999/v1");
    }
}
