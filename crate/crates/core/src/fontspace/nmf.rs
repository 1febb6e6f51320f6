//! Weighted NMF by multiplicative updates.
//!
//! Minimizes `‖M ⊙ (X − W H)‖_F` over `W, H ≥ 0`, where `M` is a binary
//! observation mask (all ones when no mask is given). The Lee–Seung style
//! updates never increase the objective.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_nonnegative, FontSpaceError, HoldoutMask};
use crate::linalg::{dot, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmfOptions {
    pub max_iter: usize,
    /// Stop once the relative objective change drops below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for NmfOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

/// Result of a factorization `X ≈ coords · basis`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    /// `n × k` (W).
    pub coords: Matrix,
    /// `k × D` (H).
    pub basis: Matrix,
    /// Masked objective after every iteration.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Factorization {
    pub fn reconstruction(&self) -> Matrix {
        self.coords.matmul(&self.basis)
    }

    pub fn objective(&self) -> f64 {
        self.objective_history.last().copied().unwrap_or(f64::NAN)
    }

    /// `‖X − WH‖_F / ‖X‖_F` over all entries.
    pub fn relative_error(&self, x: &Matrix) -> f64 {
        let r = self.reconstruction();
        let num: f64 = x
            .as_slice()
            .iter()
            .zip(r.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        libm::sqrt(num) / x.norm()
    }

    /// `‖(1 − M) ⊙ (X − WH)‖_F`: error on the held-out entries only.
    pub fn held_out_error(&self, x: &Matrix, mask: &HoldoutMask) -> f64 {
        let r = self.reconstruction();
        let mut s = 0.0;
        for (idx, (a, b)) in x.as_slice().iter().zip(r.as_slice()).enumerate() {
            if !mask.observed_flat(idx) {
                s += (a - b) * (a - b);
            }
        }
        libm::sqrt(s)
    }
}

/// Factorizes `x` with `k` components, ignoring entries hidden by `mask`.
pub fn nmf(
    x: &Matrix,
    k: usize,
    mask: Option<&HoldoutMask>,
    opts: &NmfOptions,
) -> Result<Factorization, FontSpaceError> {
    check_nonnegative(x)?;
    let (n, d) = (x.rows(), x.cols());
    let max_k = n.min(d);
    if k == 0 || k > max_k {
        return Err(FontSpaceError::ComponentCount { k, max: max_k });
    }
    if let Some(m) = mask {
        if m.rows() != n || m.cols() != d {
            return Err(FontSpaceError::MaskShape {
                mask_rows: m.rows(),
                mask_cols: m.cols(),
                rows: n,
                cols: d,
            });
        }
    }
    let observed = |idx: usize| mask.is_none_or(|m| m.observed_flat(idx));

    // Held-out entries are dropped here and never read again.
    let mut mx = x.clone();
    for (idx, v) in mx.as_mut_slice().iter_mut().enumerate() {
        if !observed(idx) {
            *v = 0.0;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut w = Matrix::from_fn(n, k, |_, _| rng.random_range(0.1..1.0));
    let mut h = Matrix::from_fn(k, d, |_, _| rng.random_range(0.1..1.0));

    let masked_product = |w: &Matrix, h: &Matrix| {
        let mut r = w.matmul(h);
        if mask.is_some() {
            for (idx, v) in r.as_mut_slice().iter_mut().enumerate() {
                if !observed(idx) {
                    *v = 0.0;
                }
            }
        }
        r
    };
    let objective = |r: &Matrix| {
        libm::sqrt(
            mx.as_slice()
                .iter()
                .zip(r.as_slice())
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    };

    let mut r = masked_product(&w, &h);
    let mut prev = objective(&r);
    let mut history = Vec::with_capacity(opts.max_iter.min(1 << 16));
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        if let Some(m) = mask {
            masked_step(&mx, m, &mut w, &mut h, &r);
        } else {
            gram_step(&mx, &mut w, &mut h);
        }
        r = masked_product(&w, &h);

        let cur = objective(&r);
        history.push(cur);
        if cur == 0.0 || (prev - cur).abs() <= opts.tol * prev {
            converged = true;
            break;
        }
        prev = cur;
    }

    Ok(Factorization {
        coords: w,
        basis: h,
        objective_history: history,
        iterations,
        converged,
    })
}

/// Inner multiplicative updates per factor in the unmasked case; each one is
/// cheap in Gram form and none of them can increase the objective.
const INNER_UPDATES: usize = 10;

#[inline]
fn apply_ratio(v: &mut [f64], num: &[f64], den: &[f64]) {
    for ((x, &a), &b) in v.iter_mut().zip(num).zip(den) {
        if b > 0.0 {
            *x *= a / b;
        }
    }
}

/// One sweep for the unmasked objective, using `X Hᵀ`, `H Hᵀ`, `Wᵀ X` and `Wᵀ W`.
fn gram_step(x: &Matrix, w: &mut Matrix, h: &mut Matrix) {
    let (n, k, d) = (w.rows(), w.cols(), h.cols());

    let xht = Matrix::from_fn(n, k, |i, p| dot(x.row(i), h.row(p)));
    let hht = Matrix::from_fn(k, k, |p, q| dot(h.row(p), h.row(q)));
    for _ in 0..INNER_UPDATES {
        let den = w.matmul(&hht);
        apply_ratio(w.as_mut_slice(), xht.as_slice(), den.as_slice());
    }

    let mut wtx = Matrix::zeros(k, d);
    for i in 0..n {
        for p in 0..k {
            let wip = w[(i, p)];
            if wip != 0.0 {
                for (acc, &xv) in wtx.row_mut(p).iter_mut().zip(x.row(i)) {
                    *acc += wip * xv;
                }
            }
        }
    }
    let wtw = Matrix::from_fn(k, k, |p, q| (0..n).map(|i| w[(i, p)] * w[(i, q)]).sum());
    for _ in 0..INNER_UPDATES {
        let den = wtw.matmul(h);
        apply_ratio(h.as_mut_slice(), wtx.as_slice(), den.as_slice());
    }
}

/// One sweep for the masked objective; `r` is the current masked product.
fn masked_step(mx: &Matrix, mask: &HoldoutMask, w: &mut Matrix, h: &mut Matrix, r: &Matrix) {
    let (n, k, d) = (w.rows(), w.cols(), h.cols());

    // W ← W ⊙ ((M⊙X) Hᵀ) / ((M⊙WH) Hᵀ)
    let num_w = Matrix::from_fn(n, k, |i, p| dot(mx.row(i), h.row(p)));
    let den_w = Matrix::from_fn(n, k, |i, p| dot(r.row(i), h.row(p)));
    apply_ratio(w.as_mut_slice(), num_w.as_slice(), den_w.as_slice());

    // H ← H ⊙ (Wᵀ(M⊙X)) / (Wᵀ(M⊙WH)), with WH recomputed from the new W.
    let mut num_h = Matrix::zeros(k, d);
    let mut den_h = Matrix::zeros(k, d);
    let mut wh_row = vec![0.0; d];
    for i in 0..n {
        wh_row.iter_mut().for_each(|v| *v = 0.0);
        for p in 0..k {
            let wip = w[(i, p)];
            if wip != 0.0 {
                for (acc, &hv) in wh_row.iter_mut().zip(h.row(p)) {
                    *acc += wip * hv;
                }
            }
        }
        let xr = mx.row(i);
        for (j, v) in wh_row.iter_mut().enumerate() {
            if !mask.observed(i, j) {
                *v = 0.0;
            }
        }
        for p in 0..k {
            let wip = w[(i, p)];
            if wip == 0.0 {
                continue;
            }
            for (acc, &xv) in num_h.row_mut(p).iter_mut().zip(xr) {
                *acc += wip * xv;
            }
            for (acc, &rv) in den_h.row_mut(p).iter_mut().zip(&wh_row) {
                *acc += wip * rv;
            }
        }
    }
    apply_ratio(h.as_mut_slice(), num_h.as_slice(), den_h.as_slice());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fontspace::cv::HoldoutMask;

    fn random_factors(n: usize, d: usize, k: usize, seed: u64) -> (Matrix, Matrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Matrix::from_fn(n, k, |_, _| rng.random_range(0.0..1.0));
        let h = Matrix::from_fn(k, d, |_, _| rng.random_range(0.0..1.0));
        (w, h)
    }

    #[test]
    fn exact_rank_one_is_recovered() {
        let (c, b) = random_factors(25, 60, 1, 1);
        let x = c.matmul(&b);
        let opts = NmfOptions {
            tol: 0.0,
            max_iter: 2000,
            ..Default::default()
        };
        let f = nmf(&x, 1, None, &opts).unwrap();
        assert!(f.relative_error(&x) < 1e-6, "{}", f.relative_error(&x));
    }

    #[test]
    fn exact_rank_three_is_recovered() {
        let (w, h) = random_factors(20, 40, 3, 2);
        let x = w.matmul(&h);
        let f = nmf(&x, 3, None, &NmfOptions::default()).unwrap();
        assert!(f.relative_error(&x) < 1e-3, "{}", f.relative_error(&x));
    }

    #[test]
    fn objective_is_monotone_and_factors_nonnegative() {
        let (w, h) = random_factors(12, 30, 4, 3);
        let x = w.matmul(&h);
        let mask = HoldoutMask::wold(12, 30, 9).unwrap();
        let f = nmf(&x, 3, Some(&mask), &NmfOptions::default()).unwrap();
        for pair in f.objective_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-10, "{} -> {}", pair[0], pair[1]);
        }
        assert!(f.coords.min_value() >= 0.0);
        assert!(f.basis.min_value() >= 0.0);
    }

    #[test]
    fn held_out_entries_do_not_influence_fit() {
        let (w, h) = random_factors(8, 16, 2, 4);
        let x = w.matmul(&h);
        let mask = HoldoutMask::wold(8, 16, 5).unwrap();
        let mut y = x.clone();
        for idx in 0..y.as_slice().len() {
            if !mask.observed_flat(idx) {
                y.as_mut_slice()[idx] = 1e6 + idx as f64;
            }
        }
        let opts = NmfOptions {
            max_iter: 300,
            ..Default::default()
        };
        let a = nmf(&x, 2, Some(&mask), &opts).unwrap();
        let b = nmf(&y, 2, Some(&mask), &opts).unwrap();
        assert_eq!(a.coords, b.coords);
        assert_eq!(a.basis, b.basis);
    }

    #[test]
    fn held_out_error_matches_direct_recomputation() {
        let (w, h) = random_factors(8, 12, 2, 6);
        let x = w.matmul(&h);
        let mask = HoldoutMask::wold(8, 12, 1).unwrap();
        let f = nmf(&x, 1, Some(&mask), &NmfOptions::default()).unwrap();
        // independent: explicit double loop over (row, col) using the block grid
        let wh = f.coords.matmul(&f.basis);
        let mut s = 0.0;
        for i in 0..8 {
            for j in 0..12 {
                let br = mask.block_of_row(i);
                let bc = mask.block_of_col(j);
                if mask.held_out_blocks()[br] == bc {
                    let e = x[(i, j)] - wh[(i, j)];
                    s += e * e;
                }
            }
        }
        let direct = s.sqrt();
        assert!((f.held_out_error(&x, &mask) - direct).abs() < 1e-12 * (1.0 + direct));
        assert!(direct > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let mut x = Matrix::zeros(3, 3);
        assert!(matches!(
            nmf(&x, 4, None, &NmfOptions::default()),
            Err(FontSpaceError::ComponentCount { k: 4, max: 3 })
        ));
        assert!(matches!(
            nmf(&x, 0, None, &NmfOptions::default()),
            Err(FontSpaceError::ComponentCount { .. })
        ));
        x[(1, 2)] = -0.5;
        assert_eq!(
            nmf(&x, 1, None, &NmfOptions::default()).unwrap_err(),
            FontSpaceError::NegativeEntry { row: 1, col: 2 }
        );
    }
}
