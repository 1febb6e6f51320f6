//! Grayscale rasters, binary masks, and the even-odd scanline rasterizer used
//! to check traced outlines against their source masks.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::trace::Contour;

/// Row-major grayscale raster with values in `[0, 1]`, row 0 at the top.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(width * height, data.len(), "raster size mismatch");
        Self { width, height, data }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }
}

/// Row-major binary mask, row 0 at the top. `true` is ink.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bitmask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl Bitmask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(width * height, bits.len(), "mask size mismatch");
        Self { width, height, bits }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![false; width * height])
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, v: bool) {
        self.bits[row * self.width + col] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }
}

/// `mask = raster ≥ threshold`.
pub fn binarize(raster: &Raster, threshold: f64) -> Bitmask {
    Bitmask::new(
        raster.width,
        raster.height,
        raster.data.iter().map(|&v| v >= threshold).collect(),
    )
}

/// Fills the pixels whose centers lie inside `contours` under the even-odd
/// rule. Contours are in pixel units with the y axis pointing up from the
/// bottom edge of the raster.
pub fn rasterize(contours: &[Contour], width: usize, height: usize) -> Bitmask {
    let mut mask = Bitmask::empty(width, height);
    let mut xs: Vec<f64> = Vec::new();
    for row in 0..height {
        let yc = (height - row) as f64 - 0.5;
        xs.clear();
        for c in contours {
            for seg in c.points.windows(2) {
                let (p, q) = (seg[0], seg[1]);
                if (p.y > yc) != (q.y > yc) {
                    xs.push(p.x + (yc - p.y) * (q.x - p.x) / (q.y - p.y));
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let (x0, x1) = (pair[0], pair[1]);
            for col in 0..width {
                let xc = col as f64 + 0.5;
                if xc > x0 && xc < x1 {
                    mask.set(col, row, true);
                }
            }
        }
    }
    mask
}

/// Intersection over union; two empty masks count as identical.
pub fn iou(a: &Bitmask, b: &Bitmask) -> f64 {
    assert_eq!((a.width, a.height), (b.width, b.height), "iou shape mismatch");
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}
