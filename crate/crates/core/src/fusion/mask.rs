use super::PixelBox;

/// Center-peaked weights over one box, stored row-major `h × w` in box-local
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMask {
    pub pbox: PixelBox,
    values: Vec<f64>,
}

impl GaussianMask {
    /// Weight at box-local `(row, col)`.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.pbox.w + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Evaluates `exp(-((x-μx)² + (y-μy)²) / 2σ²)` at the center of every cell
/// of the box, with `(μx, μy) = (x0 + w/2, y0 + h/2)` and `σ = max(w, h)/2`.
pub fn gaussian_mask(pbox: &PixelBox) -> GaussianMask {
    let mu_x = pbox.x0 as f64 + pbox.w as f64 / 2.0;
    let mu_y = pbox.y0 as f64 + pbox.h as f64 / 2.0;
    let sigma = pbox.w.max(pbox.h) as f64 / 2.0;
    let two_sigma_sq = 2.0 * sigma * sigma;
    let mut values = Vec::with_capacity(pbox.w * pbox.h);
    for y in pbox.y0..pbox.y_end() {
        let dy = y as f64 + 0.5 - mu_y;
        for x in pbox.x0..pbox.x_end() {
            let dx = x as f64 + 0.5 - mu_x;
            values.push((-(dx * dx + dy * dy) / two_sigma_sq).exp());
        }
    }
    GaussianMask { pbox: *pbox, values }
}

/// Sigmoid layer weight `1 / (1 + exp(α (d - (n-1)/2)))`; front layers
/// (small `depth`) weigh more.
pub fn depth_weight(depth: u32, n: usize, alpha: f64) -> f64 {
    let mid = (n.max(1) - 1) as f64 / 2.0;
    1.0 / (1.0 + (alpha * (depth as f64 - mid)).exp())
}
