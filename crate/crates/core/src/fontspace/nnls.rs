//! Lawson–Hanson active-set nonnegative least squares, solved through the
//! `k × k` normal equations since `k` is tiny and `D` is large.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, Cholesky, Matrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnlsSolution {
    pub coords: Vec<f64>,
    /// `‖v − coords · basis‖₂`.
    pub residual: f64,
}

/// Minimizes `‖v − c · basis‖₂` over `c ≥ 0`, with `basis` of shape `k × D`.
pub fn nnls(basis: &Matrix, v: &[f64]) -> NnlsSolution {
    let k = basis.rows();
    assert_eq!(basis.cols(), v.len(), "nnls dimension mismatch");
    let gram = Matrix::from_fn(k, k, |i, j| dot(basis.row(i), basis.row(j)));
    let rhs: Vec<f64> = (0..k).map(|i| dot(basis.row(i), v)).collect();

    let scale = rhs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let tol = 1e-13 * (1.0 + scale);

    let mut c = vec![0.0; k];
    let mut passive = vec![false; k];
    let gradient = |c: &[f64]| -> Vec<f64> { (0..k).map(|i| rhs[i] - dot(gram.row(i), c)).collect() };

    for _ in 0..(3 * k + 3) {
        let w = gradient(&c);
        let next = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = next else { break };
        passive[j] = true;

        for _ in 0..(3 * k + 3) {
            let s = solve_passive(&gram, &rhs, &passive);
            if (0..k).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                c = s;
                break;
            }
            let mut alpha = f64::INFINITY;
            let mut blocking = None;
            for i in (0..k).filter(|&i| passive[i] && s[i] <= 0.0) {
                let denom = c[i] - s[i];
                let a = if denom > 0.0 { c[i] / denom } else { 0.0 };
                if a < alpha {
                    alpha = a;
                    blocking = Some(i);
                }
            }
            let Some(blocking) = blocking else { break };
            for i in 0..k {
                c[i] += alpha * (s[i] - c[i]);
            }
            c[blocking] = 0.0;
            passive[blocking] = false;
            for i in 0..k {
                if passive[i] && c[i] <= 0.0 {
                    passive[i] = false;
                    c[i] = 0.0;
                }
            }
        }
    }

    for x in c.iter_mut() {
        if x.is_nan() || *x <= 0.0 {
            *x = 0.0;
        }
    }
    let residual = residual_norm(basis, v, &c);
    NnlsSolution { coords: c, residual }
}

fn solve_passive(gram: &Matrix, rhs: &[f64], passive: &[bool]) -> Vec<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let sub = Matrix::from_fn(idx.len(), idx.len(), |a, b| gram[(idx[a], idx[b])]);
    let sub_rhs: Vec<f64> = idx.iter().map(|&i| rhs[i]).collect();
    let mut out = vec![0.0; passive.len()];
    let Ok(chol) = Cholesky::new_with_escalation(&sub) else {
        return out;
    };
    for (a, val) in chol.solve(&sub_rhs).into_iter().enumerate() {
        out[idx[a]] = val;
    }
    out
}

fn residual_norm(basis: &Matrix, v: &[f64], c: &[f64]) -> f64 {
    let mut s = 0.0;
    for (j, &vj) in v.iter().enumerate() {
        let mut r = vj;
        for (p, &cp) in c.iter().enumerate() {
            r -= cp * basis[(p, j)];
        }
        s += r * r;
    }
    libm::sqrt(s)
}
