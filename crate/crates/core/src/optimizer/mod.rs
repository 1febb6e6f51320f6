//! Bayesian optimization of reading speed over the font space.
//!
//! A Gaussian process with a Matérn 5/2 kernel models words per minute as a
//! function of font coordinates. New fonts are chosen by maximizing the upper
//! confidence bound inside a [`FeasibleRegion`].

mod acquisition;
mod diagnostics;
mod gp;
mod hyper;
mod kernel;

pub use acquisition::{
    call_seed, propose, propose_with_rng, ucb, AcquisitionConfig, Optimizer, OptimizerConfig, Phase, Proposal,
};
pub use diagnostics::{integrated_variance, IntegratedVariance, VarianceProbe};
pub use gp::{GpState, Observation, Posterior, TargetScaling};
pub use hyper::{fit_hyperparams, refit, FitOptions, FitResult, HyperBounds, LikelihoodValue, LogLikelihood};
pub use kernel::{matern52, matern52_correlation, matern52_dlog_length, KernelParams, NU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fontgen::FontCoordinates;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizerError {
    #[error("kernel parameters must be positive and finite")]
    InvalidParams,
    #[error("Gram matrix is not positive definite even with maximal jitter")]
    NotPositiveDefinite,
    #[error("invalid observation: {0}")]
    InvalidObservation(&'static str),
    #[error("hyperparameter fitting needs at least 2 observations, got {0}")]
    NotEnoughObservations(usize),
    #[error("no feasible sample after {0} draws")]
    RegionSamplingFailed(u64),
    #[error("feasible region is empty or malformed")]
    EmptyRegion,
    #[error("invalid acquisition configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Box `[lower, upper]` per axis intersected with the band
/// `sum_min ≤ c₁ + c₂ + c₃ ≤ sum_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibleRegion {
    pub lower: f64,
    pub upper: f64,
    pub sum_min: f64,
    pub sum_max: f64,
}

impl Default for FeasibleRegion {
    fn default() -> Self {
        Self {
            lower: 0.0,
            upper: 13.0,
            sum_min: 7.0,
            sum_max: 20.0,
        }
    }
}

/// Draw budget for rejection sampling.
pub const MAX_REJECTION_DRAWS: u64 = 1_000_000;

impl FeasibleRegion {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let ok = [self.lower, self.upper, self.sum_min, self.sum_max]
            .iter()
            .all(|v| v.is_finite())
            && self.lower <= self.upper
            && self.sum_min <= self.sum_max
            && self.sum_min <= 3.0 * self.upper
            && self.sum_max >= 3.0 * self.lower;
        if ok {
            Ok(())
        } else {
            Err(OptimizerError::EmptyRegion)
        }
    }

    /// Exact membership test.
    pub fn contains(&self, c: &FontCoordinates) -> bool {
        let s = c.sum();
        c.0.iter().all(|&v| v >= self.lower && v <= self.upper) && s >= self.sum_min && s <= self.sum_max
    }

    /// Uniform sample by rejection from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FontCoordinates, OptimizerError> {
        self.validate()?;
        for _ in 0..MAX_REJECTION_DRAWS {
            let c = FontCoordinates([0, 1, 2].map(|_| rng.random_range(self.lower..=self.upper)));
            if self.contains(&c) {
                return Ok(c);
            }
        }
        Err(OptimizerError::RegionSamplingFailed(MAX_REJECTION_DRAWS))
    }

    fn clamp_shift(&self, x: &[f64; 3], shift: f64) -> FontCoordinates {
        FontCoordinates(x.map(|v| (v - shift).clamp(self.lower, self.upper)))
    }

    /// Euclidean projection onto the region.
    ///
    /// The projection has the form `clamp(x − λ)`; `λ` is found by bisection,
    /// always keeping the endpoint that satisfies the violated sum bound.
    pub fn project(&self, c: &FontCoordinates) -> FontCoordinates {
        let x = c.0;
        let clamped = self.clamp_shift(&x, 0.0);
        let s = clamped.sum();
        if s >= self.sum_min && s <= self.sum_max {
            return clamped;
        }
        let span = (self.upper - self.lower)
            + x.iter()
                .fold(0.0f64, |m, v| m.max((v - self.lower).abs()).max((v - self.upper).abs()));
        let too_high = s > self.sum_max;
        // `good` always satisfies the violated bound, `bad` never does.
        let (mut good, mut bad) = if too_high { (span, 0.0) } else { (-span, 0.0) };
        let mut best = self.clamp_shift(&x, good);
        for _ in 0..200 {
            let mid = 0.5 * (good + bad);
            if mid == good || mid == bad {
                break;
            }
            let candidate = self.clamp_shift(&x, mid);
            let cs = candidate.sum();
            let satisfied = if too_high {
                cs <= self.sum_max
            } else {
                cs >= self.sum_min
            };
            if satisfied {
                good = mid;
                best = candidate;
            } else {
                bad = mid;
            }
        }
        best
    }
}
