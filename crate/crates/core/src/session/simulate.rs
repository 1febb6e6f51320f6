use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::event::{EventKind, LogEvent};
use super::state::{Session, Submission};
use super::{SessionConfig, SessionError, SessionMode};
use crate::fontgen::FontCoordinates;
use crate::optimizer::{Observation, Optimizer};

/// Simulated reader whose speed is a Gaussian bump around `optimum`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub optimum: FontCoordinates,
    pub peak_wpm: f64,
    pub base_wpm: f64,
    pub width: f64,
    pub noise_sd: f64,
    /// Probability of answering a question correctly.
    pub mc_accuracy: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            optimum: FontCoordinates::new(5.0, 4.0, 3.0),
            peak_wpm: 300.0,
            base_wpm: 150.0,
            width: 2.5,
            noise_sd: 0.0,
            mc_accuracy: 0.8,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self, config: &SessionConfig) -> Result<(), SessionError> {
        if !config.optimizer.region.contains(&self.optimum) {
            return Err(SessionError::InfeasibleOracle(self.optimum.0));
        }
        let ok = self.peak_wpm >= self.base_wpm
            && self.base_wpm >= 0.0
            && self.width > 0.0
            && self.noise_sd >= 0.0
            && (0.0..=1.0).contains(&self.mc_accuracy)
            && [self.peak_wpm, self.base_wpm, self.width, self.noise_sd]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(SessionError::InvalidConfig("oracle parameters out of range".into()))
        }
    }

    /// Noise-free reading speed at `c`.
    pub fn expected_wpm(&self, c: &FontCoordinates) -> f64 {
        let d2 = crate::linalg::squared_distance(&c.0, &self.optimum.0);
        self.base_wpm + (self.peak_wpm - self.base_wpm) * libm::exp(-d2 / (2.0 * self.width * self.width))
    }

    fn sample_wpm(&self, c: &FontCoordinates, rng: &mut ChaCha8Rng) -> f64 {
        let noise = if self.noise_sd > 0.0 {
            Normal::new(0.0, self.noise_sd).unwrap().sample(rng)
        } else {
            0.0
        };
        (self.expected_wpm(c) + noise).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOutput {
    pub session: Session,
    pub events: Vec<LogEvent>,
}

/// Runs a whole session against the oracle on a virtual clock. A sampled
/// speed of zero is handled as an unreadable font and reset.
pub fn simulate_session(
    session_id: impl Into<String>,
    config: SessionConfig,
    oracle: &OracleConfig,
) -> Result<SimulationOutput, SessionError> {
    if config.mode != SessionMode::Simulated {
        return Err(SessionError::InvalidConfig("simulation needs simulated mode".into()));
    }
    oracle.validate(&config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(oracle.seed);
    let mut now = 0u64;
    let mut session = Session::start(session_id, config, now)?;
    let mut events = session.take_events();
    while !session.is_complete() {
        let trial = session.current_trial(now)?;
        now += trial.gate_delay_ms;
        let view = session.open_text(trial.trial_id, now)?;
        let wpm = oracle.sample_wpm(&trial.coords, &mut rng);
        if wpm <= 0.0 {
            now += 1000;
            session.reset_trial(trial.trial_id, now)?;
        } else {
            let duration_ms = view.word_count as f64 * 60_000.0 / wpm;
            now += libm::ceil(duration_ms) as u64;
            let text = session.config().texts.iter().find(|t| t.id == trial.text_id);
            let expected = text.map_or(0, |t| t.expected_detections);
            let correct = text.and_then(|t| t.mc.as_ref()).map_or(0, |m| m.correct_index);
            let mc_answer = view.question.as_ref().map(|q| {
                if rng.random_bool(oracle.mc_accuracy) {
                    correct
                } else {
                    (correct + rng.random_range(1..q.options.len())) % q.options.len()
                }
            });
            let sub = Submission {
                duration_ms,
                press_count: expected,
                mc_answer,
            };
            session.submit_result(trial.trial_id, sub, now)?;
        }
        events.extend(session.take_events());
    }
    Ok(SimulationOutput { session, events })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub proposals: usize,
    pub observations: usize,
    /// Trial ids whose replayed proposal differs from the log.
    pub mismatches: Vec<u64>,
}

impl ReplayReport {
    pub fn is_exact(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-runs the optimizer over the `(coords, wpm)` sequence of a trial log and
/// compares each proposal bit for bit with the logged one.
pub fn replay_proposals(events: &[LogEvent]) -> Result<ReplayReport, SessionError> {
    let Some(EventKind::Start(start)) = events.first().map(|e| &e.kind) else {
        return Err(SessionError::ReplayMismatch("log does not begin with start".into()));
    };
    let mut opt = Optimizer::new(start.config.effective_optimizer())?;
    let mut report = ReplayReport {
        proposals: 0,
        observations: 0,
        mismatches: Vec::new(),
    };
    let same = |a: &FontCoordinates, b: &FontCoordinates| a.0.iter().zip(&b.0).all(|(x, y)| x.to_bits() == y.to_bits());
    for e in &events[1..] {
        match &e.kind {
            EventKind::Propose(p) => {
                let q = opt.propose()?;
                report.proposals += 1;
                if !same(&q.c, &p.coords) || q.call_index != p.call_index || q.seed != p.seed || q.phase != p.phase {
                    report.mismatches.push(p.trial_id);
                }
            }
            EventKind::Result(r) => {
                opt.record(Observation {
                    c: r.coords,
                    wpm: r.wpm,
                })?;
                report.observations += 1;
            }
            EventKind::Reset(r) => {
                opt.record(Observation { c: r.coords, wpm: 0.0 })?;
                report.observations += 1;
            }
            EventKind::Start(_) => return Err(SessionError::ReplayMismatch(format!("second start at ts {}", e.ts))),
            EventKind::Reading { .. } | EventKind::Mc { .. } => {}
        }
    }
    Ok(report)
}
