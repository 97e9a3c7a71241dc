use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{trim_provider_text, BackendError, CompletionBackend, CompletionRequest, ModelConfig, RawResponse};

/// Client for an OpenAI-compatible `/chat/completions` endpoint.
#[derive(Debug)]
pub struct HttpBackend {
    config: ModelConfig,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
}

enum Failure {
    Retryable { status: Option<u16>, message: String },
    Fatal(BackendError),
}

impl HttpBackend {
    pub fn new(config: ModelConfig) -> Result<Self, BackendError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout())
            .build()
            .map_err(|e| BackendError::Config(format!("http client: {e}")))?;
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        if api_key.is_none() {
            log::debug!("{} is not set; requests are sent without authorization", config.api_key_env);
        }
        Ok(HttpBackend { config, client, api_key })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.endpoint_url.trim_end_matches('/'))
    }

    fn body(&self, request: &CompletionRequest) -> Value {
        let mut messages = Vec::new();
        if let Some(system) = &self.config.system_message {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": request.prompt}));
        json!({
            "model": self.config.model_name,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": self.config.max_output_tokens,
        })
    }

    fn attempt(&self, body: &Value) -> Result<(String, Option<u64>), Failure> {
        let mut builder = self.client.post(self.url()).json(body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder
            .send()
            .map_err(|e| Failure::Retryable { status: e.status().map(|s| s.as_u16()), message: e.to_string() })?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| Failure::Retryable { status: Some(status.as_u16()), message: e.to_string() })?;
        if !status.is_success() {
            let message = format!("HTTP {status}: {}", text.chars().take(300).collect::<String>());
            let code = Some(status.as_u16());
            return if status.is_server_error() || status.as_u16() == 429 || status.as_u16() == 408 {
                Err(Failure::Retryable { status: code, message })
            } else {
                Err(Failure::Fatal(BackendError::Transport { status: code, message, attempts: 1 }))
            };
        }
        parse_payload(&text).map_err(Failure::Fatal)
    }
}

fn parse_payload(text: &str) -> Result<(String, Option<u64>), BackendError> {
    let v: Value = serde_json::from_str(text).map_err(|e| BackendError::Protocol(format!("not JSON: {e}")))?;
    let content = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::Protocol("missing choices[0].message.content".into()))?;
    let tokens = v.pointer("/usage/completion_tokens").and_then(Value::as_u64);
    Ok((content.to_string(), tokens))
}

impl CompletionBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<RawResponse, BackendError> {
        let body = self.body(request);
        let started = Instant::now();
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body) {
                Ok((text, tokens)) => {
                    return Ok(RawResponse {
                        text: trim_provider_text(text),
                        reported_completion_tokens: tokens,
                        latency: started.elapsed(),
                        from_cache: false,
                    })
                }
                Err(Failure::Fatal(BackendError::Transport { status, message, .. })) => {
                    return Err(BackendError::Transport { status, message, attempts })
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable { status, message }) => {
                    if attempts > self.config.retry_limit {
                        return Err(BackendError::Transport { status, message, attempts });
                    }
                    let delay = Duration::from_millis(self.config.backoff_base_ms.saturating_mul(1 << (attempts - 1)));
                    log::warn!("request failed ({message}); retry {attempts} in {delay:?}");
                    std::thread::sleep(delay);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_fields() {
        let (text, tokens) =
            parse_payload(r#"{"choices":[{"message":{"content":"hi"}}],"usage":{"completion_tokens":7}}"#).unwrap();
        assert_eq!((text.as_str(), tokens), ("hi", Some(7)));
        let (_, none) = parse_payload(r#"{"choices":[{"message":{"content":"hi"}}]}"#).unwrap();
        assert_eq!(none, None);
        assert!(matches!(parse_payload(r#"{"choices":[]}"#), Err(BackendError::Protocol(_))));
        assert!(matches!(parse_payload("<html>"), Err(BackendError::Protocol(_))));
    }

    #[test]
    fn body_shape() {
        let cfg = ModelConfig { system_message: Some("sys".into()), max_output_tokens: 64, ..ModelConfig::default() };
        let backend = HttpBackend::new(cfg).unwrap();
        let body = backend.body(&CompletionRequest::new("hello", 0.0));
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "hello");
        assert_eq!(body["max_tokens"], 64);
        assert_eq!(body["temperature"], 0.0);
    }
}
