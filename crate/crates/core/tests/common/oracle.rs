//! Straight scalar-loop reimplementations of the compositing step, written
//! against plain nested vectors so they share nothing with the library
//! code they check.

#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scenecomp::fusion::{
    boundary_smooth, compose, depth_weight, fuse_overlaps, gaussian_mask, hcd_step, regional_enhance,
    resize_bilinear, to_pixel_box, FusionConfig, ObjectLayer, PixelBox,
};
use scenecomp::scene::BoundingBox;
use scenecomp::LatentGrid;

/// `grid[c][y][x]`
pub type Grid = Vec<Vec<Vec<f64>>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OBox {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
    pub depth: u32,
}

impl OBox {
    pub fn inside(&self, y: usize, x: usize) -> bool {
        self.y0 <= y && y < self.y0 + self.h && self.x0 <= x && x < self.x0 + self.w
    }

    fn same_as(&self, p: &PixelBox) -> bool {
        (self.x0, self.y0, self.w, self.h, self.depth) == (p.x0, p.y0, p.w, p.h, p.depth)
    }
}

pub fn to_grid(z: &LatentGrid) -> Grid {
    (0..z.channels())
        .map(|c| (0..z.height()).map(|y| (0..z.width()).map(|x| z.get(c, y, x)).collect()).collect())
        .collect()
}

pub fn dims(g: &Grid) -> (usize, usize, usize) {
    (g.len(), g[0].len(), g[0][0].len())
}

/// Largest absolute difference, or infinity if the shapes differ.
pub fn max_diff(z: &LatentGrid, g: &Grid) -> f64 {
    if (z.channels(), z.height(), z.width()) != dims(g) {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for (c, plane) in g.iter().enumerate() {
        for (y, row) in plane.iter().enumerate() {
            for (x, v) in row.iter().enumerate() {
                worst = worst.max((z.get(c, y, x) - v).abs());
            }
        }
    }
    worst
}

pub fn pixel_box(b: &BoundingBox, grid_h: usize, grid_w: usize) -> OBox {
    let x0 = ((b.x * grid_w as f64).round().max(0.0) as usize).min(grid_w - 1);
    let y0 = ((b.y * grid_h as f64).round().max(0.0) as usize).min(grid_h - 1);
    let w = ((b.w * grid_w as f64).round().max(0.0) as usize).max(1).min(grid_w - x0);
    let h = ((b.h * grid_h as f64).round().max(0.0) as usize).max(1).min(grid_h - y0);
    OBox { x0, y0, w, h, depth: b.depth }
}

/// Half-pixel bilinear sampling with edge clamping.
pub fn bilinear(src: &Grid, out_h: usize, out_w: usize) -> Grid {
    let (ch, in_h, in_w) = dims(src);
    let coord = |o: usize, n_in: usize, n_out: usize| {
        let s = (o as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5;
        let s = s.max(0.0).min((n_in - 1) as f64);
        let i0 = s.floor() as usize;
        (i0, (i0 + 1).min(n_in - 1), s - i0 as f64)
    };
    let mut out = vec![vec![vec![0.0; out_w]; out_h]; ch];
    for c in 0..ch {
        for oy in 0..out_h {
            let (y0, y1, fy) = coord(oy, in_h, out_h);
            for ox in 0..out_w {
                let (x0, x1, fx) = coord(ox, in_w, out_w);
                out[c][oy][ox] = (1.0 - fy) * (1.0 - fx) * src[c][y0][x0]
                    + (1.0 - fy) * fx * src[c][y0][x1]
                    + fy * (1.0 - fx) * src[c][y1][x0]
                    + fy * fx * src[c][y1][x1];
            }
        }
    }
    out
}

/// Mask weights over the box in box-local `[row][col]` order.
pub fn mask(b: &OBox) -> Vec<Vec<f64>> {
    let sigma = if b.w > b.h { b.w } else { b.h } as f64 * 0.5;
    let (cx, cy) = (b.x0 as f64 + 0.5 * b.w as f64, b.y0 as f64 + 0.5 * b.h as f64);
    (0..b.h)
        .map(|r| {
            (0..b.w)
                .map(|k| {
                    let px = (b.x0 + k) as f64 + 0.5;
                    let py = (b.y0 + r) as f64 + 0.5;
                    let d2 = (px - cx).powi(2) + (py - cy).powi(2);
                    (-d2 / (2.0 * sigma.powi(2))).exp()
                })
                .collect()
        })
        .collect()
}

/// The depth sigmoid written through tanh.
pub fn weight(depth: u32, n: usize, alpha: f64) -> f64 {
    let mid = if n == 0 { 0.0 } else { (n as f64 - 1.0) / 2.0 };
    0.5 * (1.0 - (0.5 * alpha * (depth as f64 - mid)).tanh())
}

pub struct Layer {
    pub resized: Grid,
    pub pbox: OBox,
    pub mask: Vec<Vec<f64>>,
    pub weight: f64,
}

/// Weighted average over the covering layers, `None` outside every box.
pub fn fuse(layers: &[Layer], h: usize, w: usize, channels: usize, eps: f64) -> Vec<Vec<Option<Vec<f64>>>> {
    let mut out = vec![vec![None; w]; h];
    for y in 0..h {
        for x in 0..w {
            let covering: Vec<&Layer> = layers.iter().filter(|l| l.pbox.inside(y, x)).collect();
            if covering.is_empty() {
                continue;
            }
            let wm = |l: &Layer| l.weight * l.mask[y - l.pbox.y0][x - l.pbox.x0];
            let val = |l: &Layer, c: usize| l.resized[c][y - l.pbox.y0][x - l.pbox.x0];
            let den: f64 = covering.iter().map(|l| wm(l)).sum();
            let mut cell = Vec::with_capacity(channels);
            for c in 0..channels {
                let v = if covering.len() == 1 {
                    val(covering[0], c)
                } else if den < eps {
                    // first of the smallest depth
                    let mut front = covering[0];
                    for l in &covering[1..] {
                        if l.pbox.depth < front.pbox.depth {
                            front = l;
                        }
                    }
                    val(front, c)
                } else {
                    covering.iter().map(|l| wm(l) * val(l, c)).sum::<f64>() / den
                };
                cell.push(v);
            }
            out[y][x] = Some(cell);
        }
    }
    out
}

pub fn compose_grid(fused: &[Vec<Option<Vec<f64>>>], background: &Grid) -> Grid {
    let mut out = background.clone();
    for (y, row) in fused.iter().enumerate() {
        for (x, cell) in row.iter().enumerate() {
            if let Some(values) = cell {
                for (c, v) in values.iter().enumerate() {
                    out[c][y][x] = *v;
                }
            }
        }
    }
    out
}

pub fn enhance(z: &Grid, per_box: &[(OBox, Grid)], lambda_pos: f64, lambda_neg: f64) -> Grid {
    let (ch, h, w) = dims(z);
    let mut out = z.clone();
    let mut order: Vec<usize> = (0..per_box.len()).collect();
    // back to front, stable on ties
    order.sort_by(|&a, &b| per_box[b].0.depth.cmp(&per_box[a].0.depth));
    for i in order {
        let (b, latent) = &per_box[i];
        for c in 0..ch {
            let mut hi = f64::MIN;
            let mut lo = f64::MAX;
            for row in &latent[c] {
                for &v in row {
                    hi = hi.max(v);
                    lo = lo.min(v);
                }
            }
            for y in 0..h {
                for x in 0..w {
                    if b.inside(y, x) {
                        out[c][y][x] += lambda_pos * (hi - out[c][y][x]);
                    } else if per_box.iter().all(|(o, _)| !o.inside(y, x)) {
                        out[c][y][x] -= lambda_neg * (out[c][y][x] - lo);
                    }
                }
            }
        }
    }
    out
}

/// True if `(y, x)` lies within Chebyshev distance `band` of a cell on a
/// box side that does not sit on the grid border.
pub fn in_band(boxes: &[OBox], y: usize, x: usize, h: usize, w: usize, band: usize) -> bool {
    let near = |sy: usize, sx: usize| y.abs_diff(sy).max(x.abs_diff(sx)) <= band;
    boxes.iter().any(|b| {
        let (bottom, right) = (b.y0 + b.h - 1, b.x0 + b.w - 1);
        let cols = b.x0..=right;
        let rows = b.y0..=bottom;
        (b.y0 > 0 && cols.clone().any(|sx| near(b.y0, sx)))
            || (bottom + 1 < h && cols.clone().any(|sx| near(bottom, sx)))
            || (b.x0 > 0 && rows.clone().any(|sy| near(sy, b.x0)))
            || (right + 1 < w && rows.clone().any(|sy| near(sy, right)))
    })
}

/// The continuous kernel sampled on `[-k, k]²`, then divided by its sum.
pub fn kernel(sigma: f64, k: usize) -> Vec<Vec<f64>> {
    let side = 2 * k + 1;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma);
    let mut g = vec![vec![0.0; side]; side];
    let mut total = 0.0;
    for (a, row) in g.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let (i, j) = (a as f64 - k as f64, b as f64 - k as f64);
            *v = norm * (-(i * i + j * j) / (2.0 * sigma * sigma)).exp();
            total += *v;
        }
    }
    for row in &mut g {
        for v in row {
            *v /= total;
        }
    }
    g
}

pub fn smooth(z: &Grid, boxes: &[OBox], sigma: f64, k: usize, band: usize) -> Grid {
    let (ch, h, w) = dims(z);
    let g = kernel(sigma, k);
    let mut out = z.clone();
    for y in 0..h {
        for x in 0..w {
            if !in_band(boxes, y, x, h, w, band) {
                continue;
            }
            for c in 0..ch {
                let mut acc = 0.0;
                for (a, row) in g.iter().enumerate() {
                    for (b, gv) in row.iter().enumerate() {
                        let sy = (y as i64 + a as i64 - k as i64).clamp(0, h as i64 - 1) as usize;
                        let sx = (x as i64 + b as i64 - k as i64).clamp(0, w as i64 - 1) as usize;
                        acc += z[c][sy][sx] * gv;
                    }
                }
                out[c][y][x] = acc;
            }
        }
    }
    out
}

pub fn mix(complex: &Grid, smooth: &Grid, mu: f64) -> Grid {
    complex
        .iter()
        .zip(smooth)
        .map(|(pc, ps)| {
            pc.iter()
                .zip(ps)
                .map(|(rc, rs)| rc.iter().zip(rs).map(|(c, s)| mu * c + (1.0 - mu) * s).collect())
                .collect()
        })
        .collect()
}

pub fn layers(inst: &Instance) -> Vec<Layer> {
    let (h, w) = (inst.complex.height(), inst.complex.width());
    let n = inst.objects.len();
    inst.objects
        .iter()
        .map(|(z, b)| {
            let pbox = pixel_box(b, h, w);
            Layer {
                resized: bilinear(&to_grid(z), pbox.h, pbox.w),
                mask: mask(&pbox),
                weight: weight(b.depth, n, inst.cfg.alpha),
                pbox,
            }
        })
        .collect()
}

/// The whole step, oracle stage feeding oracle stage.
pub fn step(inst: &Instance) -> Grid {
    let cfg = &inst.cfg;
    let (ch, h, w) = (inst.complex.channels(), inst.complex.height(), inst.complex.width());
    let layers = layers(inst);
    let fused = fuse(&layers, h, w, ch, cfg.epsilon);
    let composed = compose_grid(&fused, &to_grid(&inst.background));
    let per_box: Vec<(OBox, Grid)> = layers.iter().map(|l| (l.pbox, l.resized.clone())).collect();
    let enhanced = enhance(&composed, &per_box, cfg.lambda_pos, cfg.lambda_neg);
    let boxes: Vec<OBox> = layers.iter().map(|l| l.pbox).collect();
    let smoothed = smooth(&enhanced, &boxes, cfg.smooth_sigma, cfg.kernel_radius, cfg.band_width);
    mix(&to_grid(&inst.complex), &smoothed, cfg.mu)
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub complex: LatentGrid,
    pub background: LatentGrid,
    pub objects: Vec<(LatentGrid, BoundingBox)>,
    pub cfg: FusionConfig,
}

pub fn random_grid(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> LatentGrid {
    let data = (0..c * h * w).map(|_| rng.random_range(-3.0..3.0)).collect();
    LatentGrid::new(c, h, w, data).unwrap()
}

/// Grid 8..=16 per side, 1..=4 channels, 1..=4 boxes with distinct
/// depths, and a lightly perturbed config.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rng.random_range(1..=4);
    let h = rng.random_range(8..=16);
    let w = rng.random_range(8..=16);
    let n = rng.random_range(1..=4);
    let mut depths: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        depths.swap(i, rng.random_range(0..=i));
    }
    let objects = depths
        .into_iter()
        .map(|depth| {
            let bx = rng.random_range(0.0..0.9);
            let by = rng.random_range(0.0..0.9);
            let bw = rng.random_range(0.02..1.0 - bx);
            let bh = rng.random_range(0.02..1.0 - by);
            let (oh, ow) = (rng.random_range(1..=12), rng.random_range(1..=12));
            (random_grid(&mut rng, c, oh, ow), BoundingBox::new(bx, by, bw, bh, depth))
        })
        .collect();
    let defaults = FusionConfig::default();
    let cfg = FusionConfig {
        alpha: rng.random_range(0.5..4.0),
        lambda_pos: if rng.random_bool(0.2) { 0.0 } else { defaults.lambda_pos },
        lambda_neg: if rng.random_bool(0.2) { 0.0 } else { defaults.lambda_neg },
        smooth_sigma: rng.random_range(0.5..2.0),
        kernel_radius: rng.random_range(1..=3),
        band_width: rng.random_range(0..=4),
        mu: rng.random_range(0.0..=1.0),
        ..defaults
    };
    Instance {
        complex: random_grid(&mut rng, c, h, w),
        background: random_grid(&mut rng, c, h, w),
        objects,
        cfg,
    }
}

fn within(stage: &str, diff: f64, tol: f64) -> Result<(), String> {
    if diff <= tol {
        Ok(())
    } else {
        Err(format!("{stage}: max |diff| {diff:e} > {tol:e}"))
    }
}

/// Runs each library stage on the library's own previous output and
/// compares it with the oracle stage fed the same input; then compares the
/// full library step with the oracle pipeline. Also checks region
/// membership of the composed latent and finiteness of the result.
pub fn check_instance(inst: &Instance, tol: f64) -> Result<(), String> {
    let cfg = &inst.cfg;
    let (ch, h, w) = (inst.complex.channels(), inst.complex.height(), inst.complex.width());
    let n = inst.objects.len();
    let ours = layers(inst);

    let mut lib_layers = Vec::with_capacity(n);
    for (i, ((z, b), o)) in inst.objects.iter().zip(&ours).enumerate() {
        let pbox = to_pixel_box(b, h, w);
        if !o.pbox.same_as(&pbox) {
            return Err(format!("object {i}: box {pbox:?}, oracle {:?}", o.pbox));
        }
        let resized = resize_bilinear(z, pbox.h, pbox.w);
        within(&format!("resize {i}"), max_diff(&resized, &o.resized), tol)?;
        let m = gaussian_mask(&pbox);
        let mut worst: f64 = 0.0;
        for r in 0..pbox.h {
            for k in 0..pbox.w {
                worst = worst.max((m.at(r, k) - o.mask[r][k]).abs());
            }
        }
        within(&format!("mask {i}"), worst, tol)?;
        let wt = depth_weight(b.depth, n, cfg.alpha);
        within(&format!("weight {i}"), (wt - o.weight).abs(), tol)?;
        lib_layers.push(ObjectLayer {
            latent: resized,
            pbox,
            mask: m,
            weight: wt,
        });
    }

    // fuse
    let fused = fuse_overlaps(&lib_layers, h, w, cfg.epsilon).map_err(|e| e.to_string())?;
    let oracle_layers: Vec<Layer> = lib_layers
        .iter()
        .zip(&ours)
        .map(|(l, o)| Layer {
            resized: to_grid(&l.latent),
            pbox: o.pbox,
            mask: (0..o.pbox.h).map(|r| (0..o.pbox.w).map(|k| l.mask.at(r, k)).collect()).collect(),
            weight: l.weight,
        })
        .collect();
    let expected = fuse(&oracle_layers, h, w, ch, cfg.epsilon);
    let boxes: Vec<OBox> = ours.iter().map(|l| l.pbox).collect();
    for y in 0..h {
        for x in 0..w {
            let member = boxes.iter().any(|b| b.inside(y, x));
            if fused.is_covered(y, x) != member || expected[y][x].is_some() != member {
                return Err(format!("fuse: coverage of ({y},{x}) disagrees with point-in-box"));
            }
            if let Some(cell) = &expected[y][x] {
                for (c, v) in cell.iter().enumerate() {
                    let got = fused.value(c, y, x).unwrap();
                    within("fuse", (got - v).abs(), tol)?;
                    // convex combination of the covering values
                    let covering = lib_layers.iter().filter(|l| l.pbox.contains(y, x));
                    let vals: Vec<f64> = covering.map(|l| l.latent.get(c, y - l.pbox.y0, x - l.pbox.x0)).collect();
                    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if got < lo - tol || got > hi + tol {
                        return Err(format!("fuse: {got} at ({c},{y},{x}) outside [{lo}, {hi}]"));
                    }
                }
            }
        }
    }

    // compose
    let composed = compose(&fused, &inst.background).map_err(|e| e.to_string())?;
    let bg = to_grid(&inst.background);
    within("compose", max_diff(&composed, &compose_grid(&expected, &bg)), tol)?;
    for c in 0..ch {
        for y in 0..h {
            for x in 0..w {
                if !boxes.iter().any(|b| b.inside(y, x))
                    && composed.get(c, y, x).to_bits() != inst.background.get(c, y, x).to_bits()
                {
                    return Err(format!("compose: background cell ({c},{y},{x}) changed"));
                }
            }
        }
    }

    // enhance
    let per_box: Vec<(PixelBox, LatentGrid)> = lib_layers.iter().map(|l| (l.pbox, l.latent.clone())).collect();
    let enhanced = regional_enhance(&composed, &per_box, cfg).map_err(|e| e.to_string())?;
    let oracle_per_box: Vec<(OBox, Grid)> = ours.iter().zip(&per_box).map(|(o, (_, z))| (o.pbox, to_grid(z))).collect();
    let want = enhance(&to_grid(&composed), &oracle_per_box, cfg.lambda_pos, cfg.lambda_neg);
    within("enhance", max_diff(&enhanced, &want), tol)?;

    // smooth
    let pboxes: Vec<PixelBox> = per_box.iter().map(|(b, _)| *b).collect();
    let smoothed = boundary_smooth(&enhanced, &pboxes, cfg).map_err(|e| e.to_string())?;
    let want = smooth(&to_grid(&enhanced), &boxes, cfg.smooth_sigma, cfg.kernel_radius, cfg.band_width);
    within("smooth", max_diff(&smoothed, &want), tol)?;
    let enhanced_grid = to_grid(&enhanced);
    for y in 0..h {
        for x in 0..w {
            if !in_band(&boxes, y, x, h, w, cfg.band_width) {
                for (c, plane) in enhanced_grid.iter().enumerate() {
                    if smoothed.get(c, y, x).to_bits() != plane[y][x].to_bits() {
                        return Err(format!("smooth: cell ({c},{y},{x}) outside the band changed"));
                    }
                }
            }
        }
    }

    // full step
    let full = hcd_step(&inst.complex, &inst.objects, &inst.background, cfg).map_err(|e| e.to_string())?;
    within("hcd_step", max_diff(&full, &step(inst)), tol)?;
    if full.data().iter().any(|v| !v.is_finite()) {
        return Err("hcd_step produced a non-finite value".into());
    }
    Ok(())
}

fn build(seed: u64, c: usize, h: usize, w: usize, boxes: &[BoundingBox], cfg: FusionConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objects = boxes.iter().map(|b| (random_grid(&mut rng, c, 6, 5), *b)).collect();
    Instance {
        complex: random_grid(&mut rng, c, h, w),
        background: random_grid(&mut rng, c, h, w),
        objects,
        cfg,
    }
}

/// Edge cases of box geometry, each paired with a label.
pub fn degenerate_instances() -> Vec<(&'static str, Instance)> {
    let d = FusionConfig::default();
    let bb = BoundingBox::new;
    let mut out = vec![
        ("zero objects", build(1, 4, 12, 12, &[], d)),
        ("full-frame object", build(2, 4, 16, 16, &[BoundingBox::full_frame(0)], d)),
        (
            "1x1 boxes",
            build(
                3,
                3,
                16,
                16,
                &[
                    bb(0.0, 0.0, 0.001, 0.001, 0),
                    bb(0.99, 0.99, 0.005, 0.005, 1),
                    bb(0.5, 0.25, 0.01, 0.01, 2),
                ],
                d,
            ),
        ),
        (
            "nested boxes",
            build(
                4,
                4,
                16,
                16,
                &[
                    bb(0.1, 0.1, 0.8, 0.8, 2),
                    bb(0.25, 0.25, 0.5, 0.5, 1),
                    bb(0.375, 0.375, 0.25, 0.25, 0),
                ],
                d,
            ),
        ),
        (
            "total overlap",
            build(
                5,
                2,
                12,
                12,
                &[bb(0.25, 0.25, 0.5, 0.5, 2), bb(0.25, 0.25, 0.5, 0.5, 0), bb(0.25, 0.25, 0.5, 0.5, 1)],
                d,
            ),
        ),
        (
            "total overlap of full frames",
            build(6, 4, 8, 8, &[BoundingBox::full_frame(1), BoundingBox::full_frame(0)], d),
        ),
        (
            // the two shared boxes are deep enough that their weights
            // underflow the denominator guard
            "vanishing weights",
            build(
                7,
                2,
                12,
                12,
                &[
                    bb(0.0, 0.0, 0.25, 0.25, 0),
                    bb(0.0, 0.5, 0.25, 0.25, 1),
                    bb(0.5, 0.5, 0.5, 0.5, 3),
                    bb(0.5, 0.5, 0.5, 0.5, 2),
                ],
                FusionConfig { alpha: 60.0, ..d },
            ),
        ),
    ];
    let extremes = FusionConfig {
        lambda_pos: 0.0,
        lambda_neg: 0.0,
        band_width: 0,
        mu: 0.0,
        ..d
    };
    out.push(("nested boxes, no enhancement, mu 0", {
        let mut i = out[3].1.clone();
        i.cfg = extremes;
        i
    }));
    out
}
