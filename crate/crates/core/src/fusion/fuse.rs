use super::{FusionError, GaussianMask, PixelBox};
use crate::latent::{LatentGrid, Shape};

/// One object's contribution: its latent already resized to the box.
#[derive(Debug, Clone)]
pub struct ObjectLayer {
    pub latent: LatentGrid,
    pub pbox: PixelBox,
    pub mask: GaussianMask,
    pub weight: f64,
}

/// Fused object values over the union of boxes. Cells outside every box
/// carry no value.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedRegion {
    shape: Shape,
    values: Vec<f64>,
    covered: Vec<bool>,
}

impl FusedRegion {
    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn is_covered(&self, y: usize, x: usize) -> bool {
        self.covered[y * self.shape.width + x]
    }

    /// Fused value at `(c, y, x)`, or `None` outside the union of boxes.
    pub fn value(&self, c: usize, y: usize, x: usize) -> Option<f64> {
        self.is_covered(y, x)
            .then(|| self.values[(c * self.shape.height + y) * self.shape.width + x])
    }

    pub fn covered_cells(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }
}

/// Depth- and mask-weighted average of every layer covering each cell:
/// `Σ wᵢ Mᵢ zᵢ / Σ wᵢ Mᵢ` over the covering layers only.
///
/// A cell under a single box takes that box's value unchanged. If the
/// denominator drops below `epsilon`, the front-most covering layer (lowest
/// depth, then lowest index) supplies the value.
pub fn fuse_overlaps(
    layers: &[ObjectLayer],
    grid_h: usize,
    grid_w: usize,
    epsilon: f64,
) -> Result<FusedRegion, FusionError> {
    let channels = layers.first().map_or(1, |l| l.latent.channels());
    for (index, l) in layers.iter().enumerate() {
        if l.latent.channels() != channels {
            return Err(FusionError::ChannelMismatch {
                expected: channels,
                got: l.latent.channels(),
            });
        }
        let b = l.pbox;
        if !b.fits(grid_h, grid_w) {
            return Err(FusionError::BoxOutOfGrid {
                index,
                x0: b.x0,
                y0: b.y0,
                w: b.w,
                h: b.h,
                grid_h,
                grid_w,
            });
        }
        if l.latent.height() != b.h || l.latent.width() != b.w || l.mask.pbox != b {
            return Err(FusionError::LayerSizeMismatch {
                index,
                got_h: l.latent.height(),
                got_w: l.latent.width(),
                box_h: b.h,
                box_w: b.w,
            });
        }
    }

    let shape = Shape::new(channels, grid_h, grid_w);
    let mut values = vec![0.0; shape.len()];
    let mut covered = vec![false; grid_h * grid_w];
    let mut cover: Vec<(usize, f64)> = Vec::with_capacity(layers.len());

    for y in 0..grid_h {
        for x in 0..grid_w {
            cover.clear();
            for (i, l) in layers.iter().enumerate() {
                if l.pbox.contains(y, x) {
                    let wm = l.weight * l.mask.at(y - l.pbox.y0, x - l.pbox.x0);
                    cover.push((i, wm));
                }
            }
            if cover.is_empty() {
                continue;
            }
            covered[y * grid_w + x] = true;
            let local = |i: usize| (y - layers[i].pbox.y0, x - layers[i].pbox.x0);
            let denom: f64 = cover.iter().map(|&(_, wm)| wm).sum();
            let sole = if cover.len() == 1 {
                Some(cover[0].0)
            } else if denom < epsilon {
                cover
                    .iter()
                    .map(|&(i, _)| i)
                    .min_by_key(|&i| (layers[i].pbox.depth, i))
            } else {
                None
            };
            for c in 0..channels {
                let v = match sole {
                    Some(i) => {
                        let (ly, lx) = local(i);
                        layers[i].latent.get(c, ly, lx)
                    }
                    None => {
                        let num: f64 = cover
                            .iter()
                            .map(|&(i, wm)| {
                                let (ly, lx) = local(i);
                                wm * layers[i].latent.get(c, ly, lx)
                            })
                            .sum();
                        num / denom
                    }
                };
                values[(c * grid_h + y) * grid_w + x] = v;
            }
        }
    }
    Ok(FusedRegion { shape, values, covered })
}

/// Fills the union of boxes with fused values and everything else with the
/// background, copied bit for bit.
pub fn compose(fused: &FusedRegion, background: &LatentGrid) -> Result<LatentGrid, FusionError> {
    let s = background.shape();
    if fused.shape.height != s.height || fused.shape.width != s.width {
        return Err(FusionError::DimensionMismatch {
            expected: s,
            got: fused.shape,
        });
    }
    if fused.covered_cells() > 0 && fused.shape.channels != s.channels {
        return Err(FusionError::ChannelMismatch {
            expected: s.channels,
            got: fused.shape.channels,
        });
    }
    let mut out = background.clone();
    for y in 0..s.height {
        for x in 0..s.width {
            if fused.is_covered(y, x) {
                for c in 0..s.channels {
                    out.set(c, y, x, fused.values[(c * s.height + y) * s.width + x]);
                }
            }
        }
    }
    Ok(out)
}
