//! Wold-holdout cross-validation of the component count.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nmf::{nmf, NmfOptions};
use super::FontSpaceError;
use crate::linalg::Matrix;

const GRID: usize = 4;

/// Binary observation mask hiding one block of a 4×4 grid per block-row.
#[derive(Clone, Debug, PartialEq)]
pub struct HoldoutMask {
    rows: usize,
    cols: usize,
    row_bounds: [usize; GRID + 1],
    col_bounds: [usize; GRID + 1],
    /// Held-out column block for each block-row.
    held_out: [usize; GRID],
    observed: Vec<bool>,
}

fn block_bounds(len: usize) -> [usize; GRID + 1] {
    let step = len / GRID;
    [0, step, 2 * step, 3 * step, len]
}

impl HoldoutMask {
    /// Builds the mask for an explicit choice of held-out column block per block-row.
    pub fn from_blocks(rows: usize, cols: usize, held_out: [usize; GRID]) -> Result<Self, FontSpaceError> {
        if rows < GRID || cols < GRID {
            return Err(FontSpaceError::TooSmallForHoldout { rows, cols });
        }
        assert!(held_out.iter().all(|&b| b < GRID), "block index out of range");
        let row_bounds = block_bounds(rows);
        let col_bounds = block_bounds(cols);
        let mut observed = vec![true; rows * cols];
        for (br, &bc) in held_out.iter().enumerate() {
            for i in row_bounds[br]..row_bounds[br + 1] {
                for j in col_bounds[bc]..col_bounds[bc + 1] {
                    observed[i * cols + j] = false;
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            row_bounds,
            col_bounds,
            held_out,
            observed,
        })
    }

    /// A random Wold holdout: the held-out blocks form a random permutation,
    /// so every block-row and every block-column loses exactly one block.
    pub fn wold(rows: usize, cols: usize, seed: u64) -> Result<Self, FontSpaceError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random(rows, cols, &mut rng)
    }

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<Self, FontSpaceError> {
        let mut perm = [0, 1, 2, 3];
        perm.shuffle(rng);
        Self::from_blocks(rows, cols, perm)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn observed(&self, row: usize, col: usize) -> bool {
        self.observed[row * self.cols + col]
    }

    #[inline]
    pub fn observed_flat(&self, idx: usize) -> bool {
        self.observed[idx]
    }

    pub fn held_out_blocks(&self) -> &[usize; GRID] {
        &self.held_out
    }

    pub fn row_bounds(&self) -> &[usize; GRID + 1] {
        &self.row_bounds
    }

    pub fn col_bounds(&self) -> &[usize; GRID + 1] {
        &self.col_bounds
    }

    pub fn block_of_row(&self, row: usize) -> usize {
        (0..GRID)
            .find(|&b| row < self.row_bounds[b + 1])
            .expect("row out of range")
    }

    pub fn block_of_col(&self, col: usize) -> usize {
        (0..GRID)
            .find(|&b| col < self.col_bounds[b + 1])
            .expect("column out of range")
    }

    pub fn held_out_count(&self) -> usize {
        self.observed.iter().filter(|o| !**o).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub ks: Vec<usize>,
    pub n_holdouts: usize,
    pub seed: u64,
    pub nmf: NmfOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            ks: (1..=5).collect(),
            n_holdouts: 10,
            seed: 0,
            nmf: NmfOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub ks: Vec<usize>,
    /// `errors[i][h]`: held-out error for `ks[i]` on holdout `h`.
    pub errors: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
}

impl CvReport {
    /// Component count with the lowest mean held-out error.
    pub fn best_k(&self) -> Option<usize> {
        self.mean
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| self.ks[i])
    }

    pub fn mean_for(&self, k: usize) -> Option<f64> {
        self.ks.iter().position(|&x| x == k).map(|i| self.mean[i])
    }

    pub fn fitted_models(&self) -> usize {
        self.errors.iter().map(Vec::len).sum()
    }
}

/// Fits a masked NMF for every `(k, holdout)` pair and reports held-out errors.
pub fn cross_validate(x: &Matrix, opts: &CvOptions) -> Result<CvReport, FontSpaceError> {
    if x.rows() < GRID || x.cols() < GRID {
        return Err(FontSpaceError::TooSmallForHoldout {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let masks = (0..opts.n_holdouts)
        .map(|_| HoldoutMask::random(x.rows(), x.cols(), &mut rng))
        .collect::<Result<Vec<_>, _>>()?;

    let mut errors = Vec::with_capacity(opts.ks.len());
    for &k in &opts.ks {
        let mut row = Vec::with_capacity(masks.len());
        for (h, mask) in masks.iter().enumerate() {
            let fit_opts = NmfOptions {
                seed: opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(h as u64),
                ..opts.nmf
            };
            let f = nmf(x, k, Some(mask), &fit_opts)?;
            row.push(f.held_out_error(x, mask));
        }
        errors.push(row);
    }
    let mean: Vec<f64> = errors
        .iter()
        .map(|e| e.iter().sum::<f64>() / e.len().max(1) as f64)
        .collect();
    let std_dev = errors
        .iter()
        .zip(&mean)
        .map(|(e, m)| {
            if e.len() < 2 {
                0.0
            } else {
                let v = e.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (e.len() - 1) as f64;
                libm::sqrt(v)
            }
        })
        .collect();
    Ok(CvReport {
        ks: opts.ks.clone(),
        errors,
        mean,
        std_dev,
    })
}
