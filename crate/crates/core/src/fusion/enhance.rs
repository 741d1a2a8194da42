use super::{FusionConfig, FusionError, PixelBox};
use crate::latent::LatentGrid;

/// Widens the gap between boxes and background.
///
/// Boxes are visited back to front (largest depth first, then by index).
/// For box `i` with resized latent `ẑ`, every cell inside the box moves
/// toward the per-channel `max(ẑ)` by `lambda_pos`, and every cell outside
/// all boxes moves toward the per-channel `min(ẑ)` by `lambda_neg`.
pub fn regional_enhance(
    z: &LatentGrid,
    per_box: &[(PixelBox, LatentGrid)],
    cfg: &FusionConfig,
) -> Result<LatentGrid, FusionError> {
    let s = z.shape();
    for (index, (b, latent)) in per_box.iter().enumerate() {
        if latent.channels() != s.channels {
            return Err(FusionError::ChannelMismatch {
                expected: s.channels,
                got: latent.channels(),
            });
        }
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

    let mut out = z.clone();
    if per_box.is_empty() {
        return Ok(out);
    }

    let mut uncovered = vec![true; s.height * s.width];
    for (b, _) in per_box {
        for y in b.y0..b.y_end() {
            for x in b.x0..b.x_end() {
                uncovered[y * s.width + x] = false;
            }
        }
    }

    let mut order: Vec<usize> = (0..per_box.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(per_box[i].0.depth), i));

    for i in order {
        let (b, latent) = &per_box[i];
        for c in 0..s.channels {
            let ch = latent.channel(c);
            let hi = ch.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = ch.iter().cloned().fold(f64::INFINITY, f64::min);
            if cfg.lambda_pos != 0.0 {
                for y in b.y0..b.y_end() {
                    for x in b.x0..b.x_end() {
                        let v = out.get(c, y, x);
                        out.set(c, y, x, v + cfg.lambda_pos * (hi - v));
                    }
                }
            }
            if cfg.lambda_neg != 0.0 {
                for y in 0..s.height {
                    for x in 0..s.width {
                        if uncovered[y * s.width + x] {
                            let v = out.get(c, y, x);
                            out.set(c, y, x, v - cfg.lambda_neg * (v - lo));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
