//! Per-timestep latent compositing.
//!
//! One call to [`hcd_step`] turns the denoised latents of the complex
//! prompt, each object prompt and the background prompt into the single
//! latent carried to the next timestep:
//!
//! 1. discretize each box onto the grid ([`to_pixel_box`])
//! 2. resize the object latent into its box ([`resize_bilinear`])
//! 3. weight it by a center-peaked mask and its layer depth
//!    ([`gaussian_mask`], [`depth_weight`])
//! 4. average overlapping boxes ([`fuse_overlaps`]) and fill the rest with
//!    the background ([`compose`])
//! 5. pull box interiors toward the object's extremes and push the
//!    background away ([`regional_enhance`])
//! 6. smooth a band around box edges ([`boundary_smooth`])
//! 7. mix with the complex-prompt latent ([`blend`])
//!
//! Everything here is a pure function of its inputs.

mod config;
mod enhance;
mod fuse;
mod mask;
mod pixel;
mod resize;
mod smooth;

pub use config::FusionConfig;
pub use enhance::regional_enhance;
pub use fuse::{compose, fuse_overlaps, FusedRegion, ObjectLayer};
pub use mask::{depth_weight, gaussian_mask, GaussianMask};
pub use pixel::{to_pixel_box, PixelBox};
pub use resize::resize_bilinear;
pub use smooth::{boundary_smooth, gaussian_kernel, smoothing_band};

use thiserror::Error;

use crate::latent::{LatentError, LatentGrid, Shape};
use crate::scene::BoundingBox;

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("channel mismatch: expected {expected} channels, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: Shape, got: Shape },
    #[error("box {index} ({x0},{y0} {w}x{h}) does not fit a {grid_h}x{grid_w} grid")]
    BoxOutOfGrid {
        index: usize,
        x0: usize,
        y0: usize,
        w: usize,
        h: usize,
        grid_h: usize,
        grid_w: usize,
    },
    #[error("layer {index}: latent is {got_h}x{got_w} but its box is {box_h}x{box_w}")]
    LayerSizeMismatch {
        index: usize,
        got_h: usize,
        got_w: usize,
        box_h: usize,
        box_w: usize,
    },
    #[error("invalid fusion config: {0}")]
    Config(String),
    #[error(transparent)]
    Latent(#[from] LatentError),
}

/// Cellwise `mu * complex + (1 - mu) * smooth`.
///
/// `mu == 1` returns `complex` and `mu == 0` returns `smooth` bit for bit.
pub fn blend(complex: &LatentGrid, smooth: &LatentGrid, mu: f64) -> Result<LatentGrid, FusionError> {
    if complex.shape() != smooth.shape() {
        return Err(FusionError::DimensionMismatch {
            expected: complex.shape(),
            got: smooth.shape(),
        });
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(FusionError::Config(format!("mu must lie in [0, 1], got {mu}")));
    }
    if mu == 1.0 {
        return Ok(complex.clone());
    }
    if mu == 0.0 {
        return Ok(smooth.clone());
    }
    let s = complex.shape();
    // s + mu * (c - s) keeps blend(z, z, mu) == z exactly
    let data = complex
        .data()
        .iter()
        .zip(smooth.data())
        .map(|(&c, &sm)| sm + mu * (c - sm))
        .collect();
    Ok(LatentGrid::new(s.channels, s.height, s.width, data)?)
}

/// One full compositing step. `objects` pairs each object's denoised latent
/// with its normalized box; `complex` and `background` share the output
/// geometry.
pub fn hcd_step(
    complex: &LatentGrid,
    objects: &[(LatentGrid, BoundingBox)],
    background: &LatentGrid,
    cfg: &FusionConfig,
) -> Result<LatentGrid, FusionError> {
    cfg.validate()?;
    let shape = complex.shape();
    if background.shape() != shape {
        return Err(FusionError::DimensionMismatch {
            expected: shape,
            got: background.shape(),
        });
    }
    for (latent, _) in objects {
        if latent.channels() != shape.channels {
            return Err(FusionError::ChannelMismatch {
                expected: shape.channels,
                got: latent.channels(),
            });
        }
    }

    let n = objects.len();
    let layers = objects
        .iter()
        .map(|(latent, bbox)| {
            let pbox = to_pixel_box(bbox, shape.height, shape.width);
            ObjectLayer {
                latent: resize_bilinear(latent, pbox.h, pbox.w),
                mask: gaussian_mask(&pbox),
                weight: depth_weight(bbox.depth, n, cfg.alpha),
                pbox,
            }
        })
        .collect::<Vec<_>>();

    let fused = fuse_overlaps(&layers, shape.height, shape.width, cfg.epsilon)?;
    let composed = compose(&fused, background)?;
    let per_box: Vec<(PixelBox, LatentGrid)> = layers.into_iter().map(|l| (l.pbox, l.latent)).collect();
    let enhanced = regional_enhance(&composed, &per_box, cfg)?;
    let boxes: Vec<PixelBox> = per_box.iter().map(|(b, _)| *b).collect();
    let smoothed = boundary_smooth(&enhanced, &boxes, cfg)?;
    blend(complex, &smoothed, cfg.mu)
}
