//! Gaussian-process surrogate of reading speed over the font space.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::kernel::{matern52_correlation, KernelParams};
use super::OptimizerError;
use crate::fontgen::FontCoordinates;
use crate::linalg::{distance, Cholesky, Matrix};

/// One reading result: font coordinates and words per minute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub c: FontCoordinates,
    pub wpm: f64,
}

/// Affine map between raw targets and the standardized scale the GP works on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub mean: f64,
    pub sd: f64,
}

impl Default for TargetScaling {
    fn default() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }
}

impl TargetScaling {
    /// Zero mean, unit (population) variance; a constant sample keeps `sd = 1`.
    pub fn fit(ys: impl Iterator<Item = f64> + Clone) -> Self {
        let n = ys.clone().count();
        if n == 0 {
            return Self::default();
        }
        let mean = ys.clone().sum::<f64>() / n as f64;
        let var = ys.map(|y| (y - mean) * (y - mean)).sum::<f64>() / n as f64;
        let sd = libm::sqrt(var);
        Self {
            mean,
            sd: if sd > 1e-12 * (1.0 + mean.abs()) { sd } else { 1.0 },
        }
    }

    #[inline]
    pub fn standardize(&self, y: f64) -> f64 {
        (y - self.mean) / self.sd
    }
}

/// Posterior mean and variance, on the raw target scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    pub variance: f64,
}

impl Posterior {
    pub fn std_dev(&self) -> f64 {
        libm::sqrt(self.variance)
    }
}

/// Observations, hyperparameters, target scaling and the cached factorization
/// of `σ_f² R + αI`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpState {
    observations: Vec<Observation>,
    params: KernelParams,
    scaling: TargetScaling,
    chol: Option<Cholesky>,
    /// `(K + αI)⁻¹ y_std`.
    weights: Vec<f64>,
}

impl GpState {
    /// The prior: no observations.
    pub fn new(params: KernelParams) -> Self {
        Self {
            observations: Vec::new(),
            params,
            scaling: TargetScaling::default(),
            chol: None,
            weights: Vec::new(),
        }
    }

    pub fn with_observations(
        observations: Vec<Observation>,
        params: KernelParams,
        scaling: TargetScaling,
    ) -> Result<Self, OptimizerError> {
        if !params.is_valid() {
            return Err(OptimizerError::InvalidParams);
        }
        for o in &observations {
            validate(o)?;
        }
        let mut s = Self {
            observations,
            params,
            scaling,
            chol: None,
            weights: Vec::new(),
        };
        s.refactor()?;
        Ok(s)
    }

    /// Same as [`GpState::with_observations`] with scaling fitted to the targets.
    pub fn fitted_scaling(observations: Vec<Observation>, params: KernelParams) -> Result<Self, OptimizerError> {
        let scaling = TargetScaling::fit(observations.iter().map(|o| o.wpm));
        Self::with_observations(observations, params, scaling)
    }

    fn refactor(&mut self) -> Result<(), OptimizerError> {
        if self.observations.is_empty() {
            self.chol = None;
            self.weights.clear();
            return Ok(());
        }
        let k = self.gram();
        let chol = Cholesky::new_with_escalation(&k).map_err(|_| OptimizerError::NotPositiveDefinite)?;
        let y: Vec<f64> = self
            .observations
            .iter()
            .map(|o| self.scaling.standardize(o.wpm))
            .collect();
        self.weights = chol.solve(&y);
        self.chol = Some(chol);
        Ok(())
    }

    /// `σ_f² R + αI` over the observed inputs.
    pub fn gram(&self) -> Matrix {
        let n = self.observations.len();
        let p = &self.params;
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let r = distance(self.observations[i].c.as_slice(), self.observations[j].c.as_slice());
                let v = p.signal_variance * matern52_correlation(r, p.length_scale);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
            k[(i, i)] += p.noise;
        }
        k
    }

    /// Conditions on one more observation with parameters and scaling unchanged.
    pub fn condition(&self, obs: Observation) -> Result<Self, OptimizerError> {
        validate(&obs)?;
        let mut next = self.clone();
        next.observations.push(obs);
        next.refactor()?;
        Ok(next)
    }

    /// Replaces parameters and scaling, refactorizing.
    pub fn reparameterize(&self, params: KernelParams, scaling: TargetScaling) -> Result<Self, OptimizerError> {
        Self::with_observations(self.observations.clone(), params, scaling)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn scaling(&self) -> &TargetScaling {
        &self.scaling
    }

    pub fn cholesky(&self) -> Option<&Cholesky> {
        self.chol.as_ref()
    }

    /// Posterior of the latent reading-speed function at `x`.
    pub fn posterior(&self, x: &FontCoordinates) -> Posterior {
        let p = &self.params;
        let sd2 = self.scaling.sd * self.scaling.sd;
        let Some(chol) = &self.chol else {
            return Posterior {
                mean: self.scaling.mean,
                variance: p.signal_variance * sd2,
            };
        };
        let kstar: Vec<f64> = self
            .observations
            .iter()
            .map(|o| p.signal_variance * matern52_correlation(distance(x.as_slice(), o.c.as_slice()), p.length_scale))
            .collect();
        let mean_std: f64 = kstar.iter().zip(&self.weights).map(|(a, b)| a * b).sum();
        let v = chol.solve_lower(&kstar);
        let mut var_std = p.signal_variance - v.iter().map(|x| x * x).sum::<f64>();
        if var_std < 0.0 {
            var_std = 0.0;
        }
        Posterior {
            mean: self.scaling.mean + self.scaling.sd * mean_std,
            variance: var_std * sd2,
        }
    }
}

fn validate(o: &Observation) -> Result<(), OptimizerError> {
    if !o.c.is_finite() {
        return Err(OptimizerError::InvalidObservation("non-finite coordinates"));
    }
    if !o.wpm.is_finite() || o.wpm < 0.0 {
        return Err(OptimizerError::InvalidObservation("wpm must be finite and nonnegative"));
    }
    Ok(())
}
