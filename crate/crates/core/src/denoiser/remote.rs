//! Client for a denoising worker over HTTP.
//!
//! `POST /v1/denoise_step` with
//! `{"session_id", "prompt", "timestep", "total_steps", "guidance_scale", "latent_b64"}`
//! answers `{"latent_b64"}` or `{"error"}`; latents travel as base64-encoded
//! MCCDLAT1 blobs. `POST /v1/decode` returns PNG bytes and `GET /v1/health`
//! returns `{"ok", "model"}`.

use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{DenoiseError, DenoiseRequest, DenoiserBackend};
use crate::latent::LatentGrid;
use crate::retry::RetryPolicy;

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    /// Base URL of the worker, e.g. `http://127.0.0.1:8700`.
    pub endpoint: String,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(300),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.endpoint.trim_end_matches('/'), path)
    }
}

#[derive(Serialize)]
struct StepBody<'a> {
    session_id: &'a str,
    prompt: &'a str,
    timestep: u32,
    total_steps: u32,
    guidance_scale: f64,
    latent_b64: String,
}

#[derive(Deserialize)]
struct StepReply {
    latent_b64: Option<String>,
    error: Option<String>,
}

#[derive(Serialize)]
struct DecodeBody {
    latent_b64: String,
    width: u32,
    height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Health {
    pub ok: bool,
    pub model: String,
}

pub fn encode_latent(latent: &LatentGrid) -> String {
    B64.encode(latent.to_bytes())
}

pub fn decode_latent(text: &str) -> Result<LatentGrid, DenoiseError> {
    let bytes = B64
        .decode(text.trim())
        .map_err(|e| DenoiseError::ProtocolViolation(format!("latent_b64 is not base64: {e}")))?;
    LatentGrid::from_bytes(&bytes).map_err(|e| DenoiseError::ProtocolViolation(e.to_string()))
}

fn error_message(body: &str) -> String {
    serde_json::from_str::<serde_json::Value>(body)
        .ok()
        .and_then(|v| v.get("error").and_then(|e| e.as_str()).map(str::to_string))
        .unwrap_or_else(|| body.trim().to_string())
}

#[derive(Debug)]
pub struct RemoteDenoiser {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
}

impl RemoteDenoiser {
    pub fn new(config: RemoteConfig) -> Result<Self, DenoiseError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| DenoiseError::Transport(e.to_string()))?;
        Ok(Self { config, client })
    }

    fn send(&self, req: reqwest::blocking::RequestBuilder) -> Result<(u16, Vec<u8>), DenoiseError> {
        let resp = req.send().map_err(|e| DenoiseError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.bytes().map_err(|e| DenoiseError::Transport(e.to_string()))?;
        Ok((status, body.to_vec()))
    }

    pub fn health(&self) -> Result<Health, DenoiseError> {
        let (status, body) = self.send(self.client.get(self.config.url("/v1/health")))?;
        let text = String::from_utf8_lossy(&body);
        if status != 200 {
            return Err(DenoiseError::Worker {
                status: Some(status),
                message: error_message(&text),
            });
        }
        serde_json::from_str(&text).map_err(|e| DenoiseError::ProtocolViolation(format!("health reply: {e}")))
    }
}

impl DenoiserBackend for RemoteDenoiser {
    fn step(&self, req: &DenoiseRequest) -> Result<LatentGrid, DenoiseError> {
        req.validate()?;
        let body = StepBody {
            session_id: &req.session_id,
            prompt: &req.prompt,
            timestep: req.timestep,
            total_steps: req.total_steps,
            guidance_scale: req.guidance_scale,
            latent_b64: encode_latent(&req.latent),
        };
        let url = self.config.url("/v1/denoise_step");
        let (status, bytes) = self.config.retry.run(DenoiseError::is_retryable, |attempt| {
            if attempt > 0 {
                log::warn!("retrying denoise step for session {} (attempt {})", req.session_id, attempt + 1);
            }
            self.send(self.client.post(&url).json(&body))
        })?;
        let text = String::from_utf8_lossy(&bytes);
        if !(200..300).contains(&status) {
            return Err(DenoiseError::Worker {
                status: Some(status),
                message: error_message(&text),
            });
        }
        let reply: StepReply = serde_json::from_str(&text)
            .map_err(|e| DenoiseError::ProtocolViolation(format!("step reply is not the expected JSON: {e}")))?;
        if let Some(message) = reply.error {
            return Err(DenoiseError::Worker { status: None, message });
        }
        let b64 = reply
            .latent_b64
            .ok_or_else(|| DenoiseError::ProtocolViolation("step reply has neither latent_b64 nor error".into()))?;
        let latent = decode_latent(&b64)?;
        if latent.shape() != req.latent.shape() {
            return Err(DenoiseError::ProtocolViolation(format!(
                "worker returned a {} latent for a {} request",
                latent.shape(),
                req.latent.shape()
            )));
        }
        Ok(latent)
    }

    fn decode(&self, latent: &LatentGrid, width: u32, height: u32) -> Result<Option<Vec<u8>>, DenoiseError> {
        let body = DecodeBody {
            latent_b64: encode_latent(latent),
            width,
            height,
        };
        let url = self.config.url("/v1/decode");
        let (status, bytes) = self
            .config
            .retry
            .run(DenoiseError::is_retryable, |_| self.send(self.client.post(&url).json(&body)))?;
        match status {
            200..=299 => Ok(Some(bytes)),
            404 | 501 => Ok(None),
            _ => Err(DenoiseError::Worker {
                status: Some(status),
                message: error_message(&String::from_utf8_lossy(&bytes)),
            }),
        }
    }

    fn describe(&self) -> String {
        format!("remote:{}", self.config.endpoint)
    }
}
