//! Compositional scene generation: parse a complex prompt into objects,
//! background and depth-ordered boxes with a team of language-model agents,
//! then composite per-prompt denoising latents into one latent at every
//! diffusion timestep.

pub mod denoiser;
pub mod fusion;
pub mod jsonfix;
pub mod latent;
pub mod orchestrator;
pub mod pipeline;
pub mod retry;
pub mod rng;
pub mod scene;

pub use latent::{LatentGrid, Shape};
