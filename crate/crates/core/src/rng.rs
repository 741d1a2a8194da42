//! Seeded randomness. Every grid cell draws from its own ChaCha stream, so
//! a cell's value depends only on the seed and its flat index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::latent::{LatentGrid, Shape};

/// Stable 64-bit digest of a string (first 8 bytes of its SHA-256).
pub fn text_seed(text: &str) -> u64 {
    let digest = Sha256::digest(text.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Standard-normal sample for cell `index` under `seed`.
pub fn cell_normal(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    StandardNormal.sample(&mut rng)
}

/// Initial noise latent: independent standard-normal cells.
pub fn initial_latent(seed: u64, shape: Shape) -> LatentGrid {
    let w = shape.width;
    let plane = shape.plane();
    LatentGrid::from_fn(shape.channels, shape.height, w, |c, y, x| {
        cell_normal(seed, (c * plane + y * w + x) as u64)
    })
    .expect("normal samples are finite")
}
