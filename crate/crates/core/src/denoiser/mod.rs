//! Per-prompt denoising steps behind one interface: a deterministic toy
//! backend for tests and desk runs, and a client for a remote worker.

mod remote;
mod toy;

pub use remote::{decode_latent, encode_latent, Health, RemoteConfig, RemoteDenoiser};
pub use toy::{toy_beta, toy_target, ToyDenoiser};

use thiserror::Error;

use crate::latent::LatentGrid;

/// One denoising step for one prompt: `latent` is z_t, the reply is
/// z_{t-1}. `timestep` counts down from `total_steps` to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseRequest {
    /// Lets a worker cache the prompt encoding; results must not depend on it.
    pub session_id: String,
    pub prompt: String,
    pub latent: LatentGrid,
    pub timestep: u32,
    pub total_steps: u32,
    pub guidance_scale: f64,
}

impl DenoiseRequest {
    pub fn validate(&self) -> Result<(), DenoiseError> {
        if self.total_steps == 0 || self.timestep == 0 || self.timestep > self.total_steps {
            return Err(DenoiseError::InvalidRequest(format!(
                "timestep {} outside 1..={}",
                self.timestep, self.total_steps
            )));
        }
        if !(self.guidance_scale.is_finite() && self.guidance_scale > 0.0) {
            return Err(DenoiseError::InvalidRequest(format!(
                "guidance scale must be positive, got {}",
                self.guidance_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DenoiseError {
    #[error("invalid denoise request: {0}")]
    InvalidRequest(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("worker error{}: {message}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Worker { status: Option<u16>, message: String },
}

impl DenoiseError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, DenoiseError::Transport(_))
    }
}

/// A denoiser. Must accept concurrent `step` calls for different prompts.
pub trait DenoiserBackend: Send + Sync {
    fn step(&self, req: &DenoiseRequest) -> Result<LatentGrid, DenoiseError>;

    /// Decodes a latent to PNG bytes, or `None` if the backend cannot.
    fn decode(&self, _latent: &LatentGrid, _width: u32, _height: u32) -> Result<Option<Vec<u8>>, DenoiseError> {
        Ok(None)
    }

    fn describe(&self) -> String;
}

impl<T: DenoiserBackend + ?Sized> DenoiserBackend for &T {
    fn step(&self, req: &DenoiseRequest) -> Result<LatentGrid, DenoiseError> {
        (**self).step(req)
    }
    fn decode(&self, latent: &LatentGrid, width: u32, height: u32) -> Result<Option<Vec<u8>>, DenoiseError> {
        (**self).decode(latent, width, height)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<T: DenoiserBackend + ?Sized> DenoiserBackend for Box<T> {
    fn step(&self, req: &DenoiseRequest) -> Result<LatentGrid, DenoiseError> {
        (**self).step(req)
    }
    fn decode(&self, latent: &LatentGrid, width: u32, height: u32) -> Result<Option<Vec<u8>>, DenoiseError> {
        (**self).decode(latent, width, height)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}
