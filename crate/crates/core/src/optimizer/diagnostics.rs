use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gp::GpState;
use crate::fontgen::FontCoordinates;

/// Ball integration settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceProbe {
    pub radius: f64,
    pub n_mc: usize,
    pub seed: u64,
}

impl Default for VarianceProbe {
    fn default() -> Self {
        Self {
            radius: 0.225,
            n_mc: 10_000,
            seed: 0,
        }
    }
}

/// Monte-Carlo estimate of `∫_B σ²(x) dx` and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratedVariance {
    pub value: f64,
    pub std_error: f64,
}

/// Integrates the posterior variance over the ball of radius `probe.radius`
/// around `center` from `probe.n_mc` uniform samples.
pub fn integrated_variance(state: &GpState, center: &FontCoordinates, probe: &VarianceProbe) -> IntegratedVariance {
    let r = probe.radius;
    let volume = 4.0 / 3.0 * core::f64::consts::PI * r * r * r;
    let n = probe.n_mc.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let offset = loop {
            let v = [0, 1, 2].map(|_| rng.random_range(-1.0..=1.0f64));
            if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                break v;
            }
        };
        let mut x = center.0;
        for (xi, oi) in x.iter_mut().zip(offset) {
            *xi += r * oi;
        }
        let s2 = state.posterior(&FontCoordinates(x)).variance;
        sum += s2;
        sum_sq += s2 * s2;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 {
        ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    IntegratedVariance {
        value: mean * volume,
        std_error: libm::sqrt(var / nf) * volume,
    }
}
