use crate::scene::BoundingBox;

/// A box in latent-cell units: columns `x0..x0 + w`, rows `y0..y0 + h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelBox {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
    pub depth: u32,
}

impl PixelBox {
    pub fn new(x0: usize, y0: usize, w: usize, h: usize, depth: u32) -> Self {
        Self { x0, y0, w, h, depth }
    }

    /// One past the last column.
    pub fn x_end(&self) -> usize {
        self.x0 + self.w
    }

    /// One past the last row.
    pub fn y_end(&self) -> usize {
        self.y0 + self.h
    }

    #[inline]
    pub fn contains(&self, y: usize, x: usize) -> bool {
        x >= self.x0 && x < self.x_end() && y >= self.y0 && y < self.y_end()
    }

    pub fn fits(&self, grid_h: usize, grid_w: usize) -> bool {
        self.w >= 1 && self.h >= 1 && self.x_end() <= grid_w && self.y_end() <= grid_h
    }
}

/// Discretizes a normalized box onto a `grid_h × grid_w` grid. Total: the
/// result is always at least 1×1 and inside the grid.
pub fn to_pixel_box(b: &BoundingBox, grid_h: usize, grid_w: usize) -> PixelBox {
    assert!(grid_h >= 1 && grid_w >= 1, "grid must be non-empty");
    let cells = |v: f64, n: usize| -> usize {
        let r = (v * n as f64).round();
        if r.is_nan() || r <= 0.0 {
            0
        } else {
            (r as usize).min(n)
        }
    };
    let x0 = cells(b.x, grid_w).min(grid_w - 1);
    let y0 = cells(b.y, grid_h).min(grid_h - 1);
    let w = cells(b.w, grid_w).clamp(1, grid_w - x0);
    let h = cells(b.h, grid_h).clamp(1, grid_h - y0);
    PixelBox::new(x0, y0, w, h, b.depth)
}
