use super::{FusionConfig, FusionError, PixelBox};
use crate::latent::LatentGrid;

/// `(2k+1) × (2k+1)` Gaussian kernel with standard deviation `sigma`,
/// normalized to unit sum. Row-major, offset `(i, j)` at `(i+k)(2k+1) + (j+k)`.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let k = radius as i64;
    let two_sigma_sq = 2.0 * sigma * sigma;
    let mut kernel: Vec<f64> = (-k..=k)
        .flat_map(|i| (-k..=k).map(move |j| (-((i * i + j * j) as f64) / two_sigma_sq).exp()))
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|v| *v /= total);
    kernel
}

/// Marks the cells within Chebyshev distance `band` of a box side, as an
/// `h × w` row-major mask. A side is the row or column of cells on the
/// box's perimeter; sides lying on the grid border are skipped because
/// nothing lies beyond them.
pub fn smoothing_band(boxes: &[PixelBox], grid_h: usize, grid_w: usize, band: usize) -> Vec<bool> {
    let mut mask = vec![false; grid_h * grid_w];
    let mut mark = |rows: (usize, usize), cols: (usize, usize)| {
        for y in rows.0..=rows.1.min(grid_h - 1) {
            for x in cols.0..=cols.1.min(grid_w - 1) {
                mask[y * grid_w + x] = true;
            }
        }
    };
    for b in boxes {
        let (top, bottom) = (b.y0, b.y_end() - 1);
        let (left, right) = (b.x0, b.x_end() - 1);
        let cols = (left.saturating_sub(band), right + band);
        let rows = (top.saturating_sub(band), bottom + band);
        if top > 0 {
            mark((top.saturating_sub(band), top + band), cols);
        }
        if b.y_end() < grid_h {
            mark((bottom.saturating_sub(band), bottom + band), cols);
        }
        if left > 0 {
            mark(rows, (left.saturating_sub(band), left + band));
        }
        if b.x_end() < grid_w {
            mark(rows, (right.saturating_sub(band), right + band));
        }
    }
    mask
}

/// Gaussian-filters the cells near box edges; every other cell is copied
/// unchanged. Reads past the grid border replicate the edge value.
pub fn boundary_smooth(z: &LatentGrid, boxes: &[PixelBox], cfg: &FusionConfig) -> Result<LatentGrid, FusionError> {
    cfg.validate()?;
    let s = z.shape();
    for (index, b) in boxes.iter().enumerate() {
        if !b.fits(s.height, s.width) {
            return Err(FusionError::BoxOutOfGrid {
                index,
                x0: b.x0,
                y0: b.y0,
                w: b.w,
                h: b.h,
                grid_h: s.height,
                grid_w: s.width,
            });
        }
    }
    let band = smoothing_band(boxes, s.height, s.width, cfg.band_width);
    let kernel = gaussian_kernel(cfg.smooth_sigma, cfg.kernel_radius);
    let k = cfg.kernel_radius as i64;
    let side = 2 * cfg.kernel_radius + 1;
    let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;

    let mut out = z.clone();
    for y in 0..s.height {
        for x in 0..s.width {
            if !band[y * s.width + x] {
                continue;
            }
            for c in 0..s.channels {
                let mut acc = 0.0;
                for i in -k..=k {
                    let sy = clamp(y as i64 + i, s.height);
                    let row = ((i + k) as usize) * side;
                    for j in -k..=k {
                        let sx = clamp(x as i64 + j, s.width);
                        acc += z.get(c, sy, sx) * kernel[row + (j + k) as usize];
                    }
                }
                out.set(c, y, x, acc);
            }
        }
    }
    Ok(out)
}
