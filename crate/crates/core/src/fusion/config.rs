use serde::{Deserialize, Serialize};

use super::FusionError;

/// Tunables of the compositing step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    /// Steepness of the depth sigmoid.
    pub alpha: f64,
    /// Pull of box interiors toward the object's per-channel maximum.
    pub lambda_pos: f64,
    /// Pull of uncovered cells toward the object's per-channel minimum.
    pub lambda_neg: f64,
    /// Standard deviation of the edge-smoothing kernel, in cells.
    pub smooth_sigma: f64,
    /// Half-width `k` of the `(2k+1)²` smoothing kernel.
    pub kernel_radius: usize,
    /// Chebyshev distance from a box edge within which cells are smoothed.
    pub band_width: usize,
    /// Weight of the complex-prompt latent in the final mix.
    pub mu: f64,
    pub epsilon: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            lambda_pos: 0.2,
            lambda_neg: 0.2,
            smooth_sigma: 1.0,
            kernel_radius: 3,
            band_width: 4,
            mu: 0.8,
            epsilon: 1e-8,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<(), FusionError> {
        let bad = |msg: String| Err(FusionError::Config(msg));
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if !(self.lambda_pos.is_finite() && self.lambda_pos >= 0.0) {
            return bad(format!("lambda_pos must be >= 0, got {}", self.lambda_pos));
        }
        if !(self.lambda_neg.is_finite() && self.lambda_neg >= 0.0) {
            return bad(format!("lambda_neg must be >= 0, got {}", self.lambda_neg));
        }
        if !(self.smooth_sigma.is_finite() && self.smooth_sigma > 0.0) {
            return bad(format!("smooth_sigma must be > 0, got {}", self.smooth_sigma));
        }
        if self.kernel_radius < 1 {
            return bad("kernel_radius must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return bad(format!("mu must lie in [0, 1], got {}", self.mu));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        Ok(())
    }
}
