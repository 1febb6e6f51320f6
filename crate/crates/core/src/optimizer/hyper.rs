//! Kernel hyperparameter fitting by maximizing the log marginal likelihood.
//!
//! The search runs over `(log ℓ, log σ_f²)` inside box bounds with a projected
//! BFGS method and analytic gradients; `α` stays fixed.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gp::{GpState, Observation, TargetScaling};
use super::kernel::{matern52_correlation, matern52_dlog_length, KernelParams};
use super::OptimizerError;
use crate::linalg::{distance, Cholesky, Matrix};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperBounds {
    pub length_scale: (f64, f64),
    pub signal_variance: (f64, f64),
}

impl Default for HyperBounds {
    fn default() -> Self {
        Self {
            length_scale: (0.05, 100.0),
            signal_variance: (0.01, 100.0),
        }
    }
}

impl HyperBounds {
    fn log_box(&self) -> ([f64; 2], [f64; 2]) {
        (
            [libm::log(self.length_scale.0), libm::log(self.signal_variance.0)],
            [libm::log(self.length_scale.1), libm::log(self.signal_variance.1)],
        )
    }

    pub fn clip(&self, p: KernelParams) -> KernelParams {
        KernelParams {
            length_scale: p.length_scale.clamp(self.length_scale.0, self.length_scale.1),
            signal_variance: p.signal_variance.clamp(self.signal_variance.0, self.signal_variance.1),
            noise: p.noise,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub bounds: HyperBounds,
    /// Random starts in addition to the one at the initial parameters.
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            bounds: HyperBounds::default(),
            restarts: 5,
            seed: 0,
            max_iter: 100,
        }
    }
}

/// Log marginal likelihood of standardized targets as a function of
/// `θ = (log ℓ, log σ_f²)`.
pub struct LogLikelihood {
    distances: Matrix,
    y: Vec<f64>,
    noise: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LikelihoodValue {
    pub value: f64,
    /// `∂/∂ log ℓ`, `∂/∂ log σ_f²`.
    pub gradient: [f64; 2],
}

impl LogLikelihood {
    pub fn new(observations: &[Observation], scaling: &TargetScaling, noise: f64) -> Self {
        let n = observations.len();
        let distances = Matrix::from_fn(n, n, |i, j| {
            distance(observations[i].c.as_slice(), observations[j].c.as_slice())
        });
        let y = observations.iter().map(|o| scaling.standardize(o.wpm)).collect();
        Self { distances, y, noise }
    }

    /// Value and gradient at `θ`; `None` if the Gram matrix cannot be factorized.
    pub fn evaluate(&self, theta: [f64; 2]) -> Option<LikelihoodValue> {
        let n = self.y.len();
        let ls = libm::exp(theta[0]);
        let sv = libm::exp(theta[1]);
        let mut k = Matrix::zeros(n, n);
        let mut dk_ls = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let r = self.distances[(i, j)];
                let v = sv * matern52_correlation(r, ls);
                let d = sv * matern52_dlog_length(r, ls);
                k[(i, j)] = v;
                k[(j, i)] = v;
                dk_ls[(i, j)] = d;
                dk_ls[(j, i)] = d;
            }
        }
        // ∂K/∂log σ_f² is the signal part of K, taken before the noise is added.
        let dk_sv = k.clone();
        for i in 0..n {
            k[(i, i)] += self.noise;
        }
        let chol = Cholesky::new_with_escalation(&k).ok()?;
        let alpha = chol.solve(&self.y);
        let fit: f64 = self.y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
        let value = -0.5 * fit - 0.5 * chol.log_det() - 0.5 * n as f64 * LN_2PI;

        let kinv = chol.inverse();
        let mut grad = [0.0; 2];
        for i in 0..n {
            for j in 0..n {
                let w = alpha[i] * alpha[j] - kinv[(i, j)];
                grad[0] += w * dk_ls[(i, j)];
                grad[1] += w * dk_sv[(i, j)];
            }
        }
        Some(LikelihoodValue {
            value,
            gradient: [0.5 * grad[0], 0.5 * grad[1]],
        })
    }
}

/// Fitted parameters and the likelihood they reach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub params: KernelParams,
    pub scaling: TargetScaling,
    pub log_likelihood: f64,
}

/// Maximizes the log marginal likelihood over `(ℓ, σ_f²)` with `α` fixed.
///
/// Targets are standardized first. Constant targets carry no information, so
/// the default parameters are returned clipped to the bounds.
pub fn fit_hyperparams(
    observations: &[Observation],
    initial: KernelParams,
    opts: &FitOptions,
) -> Result<FitResult, OptimizerError> {
    if observations.len() < 2 {
        return Err(OptimizerError::NotEnoughObservations(observations.len()));
    }
    let scaling = TargetScaling::fit(observations.iter().map(|o| o.wpm));
    let first = observations[0].wpm;
    if observations.iter().all(|o| o.wpm == first) {
        let params = opts.bounds.clip(KernelParams {
            noise: initial.noise,
            ..KernelParams::default()
        });
        let ll = LogLikelihood::new(observations, &scaling, params.noise)
            .evaluate([libm::log(params.length_scale), libm::log(params.signal_variance)])
            .map_or(f64::NEG_INFINITY, |v| v.value);
        return Ok(FitResult {
            params,
            scaling,
            log_likelihood: ll,
        });
    }

    let lml = LogLikelihood::new(observations, &scaling, initial.noise);
    let (lo, hi) = opts.bounds.log_box();
    let start = opts.bounds.clip(initial);
    let mut starts = Vec::with_capacity(opts.restarts + 1);
    starts.push([libm::log(start.length_scale), libm::log(start.signal_variance)]);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        starts.push([rng.random_range(lo[0]..=hi[0]), rng.random_range(lo[1]..=hi[1])]);
    }

    let mut best: Option<([f64; 2], f64)> = None;
    for s in starts {
        if let Some((theta, value)) = projected_bfgs(&lml, s, lo, hi, opts.max_iter) {
            if best.is_none_or(|(_, b)| value > b) {
                best = Some((theta, value));
            }
        }
    }
    let (theta, value) = best.ok_or(OptimizerError::NotPositiveDefinite)?;
    Ok(FitResult {
        params: KernelParams {
            length_scale: libm::exp(theta[0]),
            signal_variance: libm::exp(theta[1]),
            noise: initial.noise,
        },
        scaling,
        log_likelihood: value,
    })
}

/// Refits the hyperparameters and target scaling of `state`.
pub fn refit(state: &GpState, opts: &FitOptions) -> Result<GpState, OptimizerError> {
    let fit = fit_hyperparams(state.observations(), *state.params(), opts)?;
    state.reparameterize(fit.params, fit.scaling)
}

fn clamp2(x: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> [f64; 2] {
    [x[0].clamp(lo[0], hi[0]), x[1].clamp(lo[1], hi[1])]
}

/// Maximizes `lml` from `x0` inside `[lo, hi]`; returns the point and value.
fn projected_bfgs(
    lml: &LogLikelihood,
    x0: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    max_iter: usize,
) -> Option<([f64; 2], f64)> {
    // Work on f = −LML.
    let eval = |x: [f64; 2]| lml.evaluate(x).map(|v| (-v.value, [-v.gradient[0], -v.gradient[1]]));
    let mut x = clamp2(x0, lo, hi);
    let (mut f, mut g) = eval(x)?;
    let mut hinv = [[1.0, 0.0], [0.0, 1.0]];
    const MAX_STEP: f64 = 2.0;

    for _ in 0..max_iter {
        let free = [0, 1].map(|i| !((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)));
        let pg = [0, 1].map(|i| if free[i] { g[i] } else { 0.0 });
        if pg[0].abs().max(pg[1].abs()) < 1e-9 {
            break;
        }
        let mut d = [0.0; 2];
        if free[0] && free[1] {
            d[0] = -(hinv[0][0] * g[0] + hinv[0][1] * g[1]);
            d[1] = -(hinv[1][0] * g[0] + hinv[1][1] * g[1]);
        } else {
            for i in 0..2 {
                if free[i] {
                    d[i] = -hinv[i][i].max(1e-8) * g[i];
                }
            }
        }
        if d[0] * pg[0] + d[1] * pg[1] >= 0.0 {
            d = [-pg[0], -pg[1]];
        }
        let norm = libm::sqrt(d[0] * d[0] + d[1] * d[1]);
        if norm > MAX_STEP {
            d = [d[0] * MAX_STEP / norm, d[1] * MAX_STEP / norm];
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn = clamp2([x[0] + t * d[0], x[1] + t * d[1]], lo, hi);
            let step = [xn[0] - x[0], xn[1] - x[1]];
            if step == [0.0, 0.0] {
                break;
            }
            if let Some((fn_, gn)) = eval(xn) {
                if fn_ <= f + 1e-4 * (g[0] * step[0] + g[1] * step[1]) {
                    accepted = Some((xn, fn_, gn, step));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((xn, fn_, gn, s)) = accepted else { break };
        let yv = [gn[0] - g[0], gn[1] - g[1]];
        let sy = s[0] * yv[0] + s[1] * yv[1];
        if sy > 1e-12 {
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            let hy = [
                hinv[0][0] * yv[0] + hinv[0][1] * yv[1],
                hinv[1][0] * yv[0] + hinv[1][1] * yv[1],
            ];
            let yhy = yv[0] * hy[0] + yv[1] * hy[1];
            for i in 0..2 {
                for j in 0..2 {
                    hinv[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        let converged = (f - fn_).abs() <= 1e-14 * (1.0 + f.abs());
        x = xn;
        f = fn_;
        g = gn;
        if converged {
            break;
        }
    }
    Some((x, -f))
}
