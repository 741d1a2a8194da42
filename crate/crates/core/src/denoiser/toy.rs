use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DenoiseError, DenoiseRequest, DenoiserBackend};
use crate::latent::{LatentGrid, Shape};
use crate::rng::text_seed;

const WAVES: usize = 3;

/// Step size at `timestep` of `total_steps`: 0.5 at the first (noisiest)
/// step, falling linearly towards 0.05 as the timestep approaches 0.
pub fn toy_beta(timestep: u32, total_steps: u32) -> f64 {
    0.05 + 0.45 * (timestep as f64 / total_steps as f64)
}

/// Smooth per-prompt field: a per-channel offset plus a few low-frequency
/// sinusoids, all drawn from a generator seeded by the prompt's digest.
pub fn toy_target(prompt: &str, shape: Shape) -> LatentGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(text_seed(prompt));
    let channels: Vec<(f64, Vec<[f64; 4]>)> = (0..shape.channels)
        .map(|_| {
            let offset = rng.random_range(-1.0..1.0);
            let waves = (0..WAVES)
                .map(|_| {
                    let fx = rng.random_range(0..=2) as f64;
                    let fy = rng.random_range(if fx == 0.0 { 1..=2 } else { 0..=2 }) as f64;
                    [fx, fy, rng.random_range(0.0..TAU), rng.random_range(0.1..0.4)]
                })
                .collect();
            (offset, waves)
        })
        .collect();
    let (h, w) = (shape.height as f64, shape.width as f64);
    LatentGrid::from_fn(shape.channels, shape.height, shape.width, |c, y, x| {
        let (u, v) = ((x as f64 + 0.5) / w, (y as f64 + 0.5) / h);
        let (offset, waves) = &channels[c];
        offset
            + waves
                .iter()
                .map(|[fx, fy, phase, amp]| amp * (TAU * (fx * u + fy * v) + phase).sin())
                .sum::<f64>()
    })
    .expect("target values are finite")
}

/// Moves the latent a fraction `toy_beta` of the way towards
/// [`toy_target`]: z_{t-1} = z_t + beta * (target - z_t).
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyDenoiser;

impl DenoiserBackend for ToyDenoiser {
    fn step(&self, req: &DenoiseRequest) -> Result<LatentGrid, DenoiseError> {
        req.validate()?;
        let beta = toy_beta(req.timestep, req.total_steps);
        let target = toy_target(&req.prompt, req.latent.shape());
        let data = req
            .latent
            .data()
            .iter()
            .zip(target.data())
            .map(|(&z, &t)| z + beta * (t - z))
            .collect();
        let s = req.latent.shape();
        LatentGrid::new(s.channels, s.height, s.width, data).map_err(|e| DenoiseError::ProtocolViolation(e.to_string()))
    }

    fn describe(&self) -> String {
        "toy".into()
    }
}
