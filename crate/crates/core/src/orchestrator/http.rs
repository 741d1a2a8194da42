//! OpenAI-compatible chat-completions client.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::backend::{ChatBackend, ChatError, ChatRequest};
use crate::retry::RetryPolicy;

/// Environment variables consulted for the API key, in order.
pub const API_KEY_VARS: [&str; 2] = ["SCENECOMP_API_KEY", "OPENAI_API_KEY"];

#[derive(Clone)]
pub struct HttpChatConfig {
    /// Either the full `.../chat/completions` URL or an API base such as
    /// `https://api.openai.com/v1`.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub api_key: Option<String>,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

impl fmt::Debug for HttpChatConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpChatConfig")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("temperature", &self.temperature)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("retry", &self.retry)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl HttpChatConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: "gpt-4o-mini".into(),
            temperature: 0.0,
            api_key: None,
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(120),
        }
    }

    /// Fills `api_key` from the first set variable in [`API_KEY_VARS`].
    pub fn with_env_key(mut self) -> Self {
        self.api_key = API_KEY_VARS
            .iter()
            .find_map(|v| std::env::var(v).ok().filter(|k| !k.is_empty()));
        self
    }

    pub fn completions_url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct CompletionBody<'a> {
    model: &'a str,
    messages: [Message<'a>; 2],
    temperature: f64,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

#[derive(Debug)]
pub struct HttpChatClient {
    config: HttpChatConfig,
    client: reqwest::blocking::Client,
}

impl HttpChatClient {
    pub fn new(config: HttpChatConfig) -> Result<Self, ChatError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ChatError::Transport(e.to_string()))?;
        Ok(Self { config, client })
    }

    pub fn config(&self) -> &HttpChatConfig {
        &self.config
    }

    fn attempt(&self, url: &str, body: &CompletionBody<'_>) -> Result<String, ChatError> {
        let mut req = self.client.post(url).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| ChatError::Transport(e.without_url().to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| ChatError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ChatError::Status {
                status: status.as_u16(),
                body: text,
            });
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&text).map_err(|e| ChatError::Malformed(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| ChatError::Malformed("response has no message content".into()))
    }
}

impl ChatBackend for HttpChatClient {
    fn complete(&self, req: &ChatRequest<'_>) -> Result<String, ChatError> {
        let url = self.config.completions_url();
        let body = CompletionBody {
            model: &self.config.model,
            messages: [
                Message {
                    role: "system",
                    content: req.system,
                },
                Message {
                    role: "user",
                    content: req.user,
                },
            ],
            temperature: self.config.temperature,
        };
        self.config.retry.run(ChatError::is_retryable, |attempt| {
            if attempt > 0 {
                log::warn!("retrying chat completion for {} (attempt {})", req.tag, attempt + 1);
            }
            self.attempt(&url, &body)
        })
    }
}
