use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::diagnostics::{integrated_variance, IntegratedVariance, VarianceProbe};
use super::gp::{GpState, Observation};
use super::hyper::{refit, FitOptions};
use super::kernel::KernelParams;
use super::{FeasibleRegion, OptimizerError};
use crate::fontgen::FontCoordinates;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    /// Exploration weight on the posterior standard deviation.
    pub kappa: f64,
    /// Proposals drawn uniformly from the region before the surrogate is used.
    pub n_init_random: u64,
    pub n_candidates: usize,
    pub refine_steps: usize,
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            kappa: 5.0,
            n_init_random: 10,
            n_candidates: 2048,
            refine_steps: 50,
            initial_step: 0.25,
            seed: 0,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if !self.kappa.is_finite() || self.kappa < 0.0 {
            return Err(OptimizerError::InvalidConfig("kappa must be finite and nonnegative"));
        }
        if self.n_candidates == 0 {
            return Err(OptimizerError::InvalidConfig("n_candidates must be positive"));
        }
        if self.initial_step.is_nan() || self.initial_step <= 0.0 {
            return Err(OptimizerError::InvalidConfig("initial_step must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Init,
    Bo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub c: FontCoordinates,
    pub phase: Phase,
    pub call_index: u64,
    /// Seed of the generator used for this call.
    pub seed: u64,
}

/// SplitMix64 finalizer over `seed` and `call_index`.
pub fn call_seed(seed: u64, call_index: u64) -> u64 {
    let mut z = seed ^ call_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `μ(x) + κ σ(x)`.
pub fn ucb(state: &GpState, x: &FontCoordinates, kappa: f64) -> f64 {
    let post = state.posterior(x);
    post.mean + kappa * post.std_dev()
}

/// The `call_index`-th proposal: uniform during the initial phase, UCB
/// maximization afterwards. Always inside `region`.
pub fn propose(
    state: &GpState,
    region: &FeasibleRegion,
    config: &AcquisitionConfig,
    call_index: u64,
) -> Result<Proposal, OptimizerError> {
    config.validate()?;
    let seed = call_seed(config.seed, call_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c, phase) = if call_index < config.n_init_random {
        (region.sample(&mut rng)?, Phase::Init)
    } else {
        (propose_with_rng(state, region, config, &mut rng)?, Phase::Bo)
    };
    Ok(Proposal {
        c,
        phase,
        call_index,
        seed,
    })
}

/// Best of `n_candidates` feasible samples by UCB, refined by projected
/// coordinate ascent.
pub fn propose_with_rng(
    state: &GpState,
    region: &FeasibleRegion,
    config: &AcquisitionConfig,
    rng: &mut ChaCha8Rng,
) -> Result<FontCoordinates, OptimizerError> {
    let score = |x: &FontCoordinates| ucb(state, x, config.kappa);
    let mut best = region.sample(rng)?;
    let mut best_score = score(&best);
    for _ in 1..config.n_candidates {
        let c = region.sample(rng)?;
        let s = score(&c);
        if s > best_score {
            best = c;
            best_score = s;
        }
    }

    let mut step = config.initial_step;
    for _ in 0..config.refine_steps {
        let mut moved = false;
        for axis in 0..3 {
            for dir in [1.0, -1.0] {
                let mut trial = best;
                trial.0[axis] += dir * step;
                let trial = region.project(&trial);
                if trial == best {
                    continue;
                }
                let s = score(&trial);
                if s > best_score {
                    best = trial;
                    best_score = s;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    debug_assert!(region.contains(&best));
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kernel: KernelParams,
    pub region: FeasibleRegion,
    pub acquisition: AcquisitionConfig,
    pub fit: FitOptions,
    /// Hyperparameters and target scaling are refitted whenever the
    /// observation count reaches a multiple of this.
    pub refit_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kernel: KernelParams::default(),
            region: FeasibleRegion::default(),
            acquisition: AcquisitionConfig::default(),
            fit: FitOptions::default(),
            refit_every: 5,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.acquisition.seed = seed;
        self.fit.seed = seed;
        self
    }
}

/// Surrogate state plus the proposal counter that drives seeding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    config: OptimizerConfig,
    gp: GpState,
    proposals: u64,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self, OptimizerError> {
        config.region.validate()?;
        config.acquisition.validate()?;
        if !config.kernel.is_valid() {
            return Err(OptimizerError::InvalidParams);
        }
        if config.refit_every == 0 {
            return Err(OptimizerError::InvalidConfig("refit_every must be positive"));
        }
        Ok(Self {
            gp: GpState::new(config.kernel),
            config,
            proposals: 0,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn gp(&self) -> &GpState {
        &self.gp
    }

    pub fn proposals_made(&self) -> u64 {
        self.proposals
    }

    pub fn propose(&mut self) -> Result<Proposal, OptimizerError> {
        let p = propose(&self.gp, &self.config.region, &self.config.acquisition, self.proposals)?;
        self.proposals += 1;
        Ok(p)
    }

    /// Adds `obs`; returns whether the hyperparameters were refitted.
    pub fn record(&mut self, obs: Observation) -> Result<bool, OptimizerError> {
        self.gp = self.gp.condition(obs)?;
        self.maybe_refit()
    }

    /// Like [`Optimizer::record`], also integrating the posterior variance
    /// around the new point before and after conditioning, with the
    /// hyperparameters of the pre-record state.
    pub fn record_probed(
        &mut self,
        obs: Observation,
        probe: &VarianceProbe,
    ) -> Result<(IntegratedVariance, IntegratedVariance, bool), OptimizerError> {
        let before = integrated_variance(&self.gp, &obs.c, probe);
        self.gp = self.gp.condition(obs)?;
        let after = integrated_variance(&self.gp, &obs.c, probe);
        let refitted = self.maybe_refit()?;
        Ok((before, after, refitted))
    }

    fn maybe_refit(&mut self) -> Result<bool, OptimizerError> {
        let n = self.gp.len();
        if n < 2 || !n.is_multiple_of(self.config.refit_every) {
            return Ok(false);
        }
        let opts = FitOptions {
            seed: call_seed(self.config.fit.seed, n as u64),
            ..self.config.fit
        };
        self.gp = refit(&self.gp, &opts)?;
        Ok(true)
    }
}
