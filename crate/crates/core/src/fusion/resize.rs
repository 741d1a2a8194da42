use crate::latent::LatentGrid;

/// Source coordinate and interpolation weights for one output index, using
/// the half-pixel (align-corners = false) convention.
#[derive(Clone, Copy)]
struct Tap {
    lo: usize,
    hi: usize,
    frac: f64,
}

fn taps(in_len: usize, out_len: usize) -> Vec<Tap> {
    let scale = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|o| {
            let src = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (in_len - 1) as f64);
            let lo = src.floor() as usize;
            let hi = (lo + 1).min(in_len - 1);
            Tap {
                lo,
                hi,
                frac: src - lo as f64,
            }
        })
        .collect()
}

/// Bilinearly resamples every channel of `z` to `out_h × out_w`.
///
/// # Panics
/// Panics if `out_h` or `out_w` is zero.
pub fn resize_bilinear(z: &LatentGrid, out_h: usize, out_w: usize) -> LatentGrid {
    assert!(out_h >= 1 && out_w >= 1, "resize target must be non-empty");
    if z.height() == out_h && z.width() == out_w {
        return z.clone();
    }
    let ys = taps(z.height(), out_h);
    let xs = taps(z.width(), out_w);
    let mut data = Vec::with_capacity(z.channels() * out_h * out_w);
    for c in 0..z.channels() {
        for ty in &ys {
            for tx in &xs {
                let top = lerp(z.get(c, ty.lo, tx.lo), z.get(c, ty.lo, tx.hi), tx.frac);
                let bottom = lerp(z.get(c, ty.hi, tx.lo), z.get(c, ty.hi, tx.hi), tx.frac);
                data.push(lerp(top, bottom, ty.frac));
            }
        }
    }
    LatentGrid::new(z.channels(), out_h, out_w, data).expect("interpolation of finite values is finite")
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + (b - a) * t
    }
}
