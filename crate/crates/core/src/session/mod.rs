//! The closed-loop reading protocol.
//!
//! A [`Session`] schedules a shuffled text corpus, asks the optimizer for a
//! font per trial, withholds each text until its gate delay has passed, turns
//! reading times into words per minute, and feeds them back. Unreadable fonts
//! are reset: the font is recorded at zero words per minute and the same text
//! is reissued in a new font.
//!
//! Every state change is appended to an event log; re-executing the log
//! against a fresh session reproduces the state exactly.

mod corpus;
mod event;
mod score;
mod simulate;
mod state;

pub use corpus::{synthetic_texts, McQuestion, TextItem, MC_OPTION_COUNT};
pub use event::{EventKind, LogEvent, ProposePayload, ResetPayload, ResultPayload, StartPayload};
pub use score::{compute_score, detection_accuracy, ScoreWeights};
pub use simulate::{replay_proposals, simulate_session, OracleConfig, ReplayReport, SimulationOutput};
pub use state::{
    McPrompt, Session, Submission, TextView, TraceRecord, TrialIssue, TrialOutcome, TrialRecord, TrialStatus,
};

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::optimizer::{OptimizerConfig, OptimizerError, VarianceProbe};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("corpus has {available} texts but {requested} trials were requested")]
    CorpusTooSmall { requested: usize, available: usize },
    #[error("invalid session configuration: {0}")]
    InvalidConfig(String),
    #[error("session is complete")]
    Complete,
    #[error("unknown trial {0}")]
    UnknownTrial(u64),
    #[error("trial {0} is not active")]
    TrialNotActive(u64),
    #[error("trial {trial_id} text is gated for another {remaining_ms} ms")]
    GateClosed { trial_id: u64, remaining_ms: u64 },
    #[error("trial {0} has not started reading")]
    NotReading(u64),
    #[error("reading duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("trial {0} asks a multiple-choice question but no answer was given")]
    MissingAnswer(u64),
    #[error("answer index {answer} out of range for {options} options")]
    AnswerOutOfRange { answer: usize, options: usize },
    #[error("trial {0} was already finished with a different submission")]
    ConflictingSubmission(u64),
    #[error("log replay diverged: {0}")]
    ReplayMismatch(String),
    #[error("oracle optimum {0:?} is outside the feasible region")]
    InfeasibleOracle([f64; 3]),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionMode {
    #[default]
    Live,
    Simulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub texts: Vec<TextItem>,
    pub n_trials: usize,
    /// Drives text order, question placement and the optimizer seeds.
    pub seed: u64,
    pub gate_delay_ms: u64,
    /// Trials that end in a multiple-choice question; drawn from `seed` when
    /// absent.
    pub mc_trial_indices: Option<Vec<usize>>,
    pub n_mc_trials: usize,
    pub optimizer: OptimizerConfig,
    pub score: ScoreWeights,
    /// Integrated-variance diagnostics written to the optimizer trace.
    pub probe: Option<VarianceProbe>,
    pub mode: SessionMode,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            texts: Vec::new(),
            n_trials: 95,
            seed: 0,
            gate_delay_ms: 2000,
            mc_trial_indices: None,
            n_mc_trials: 11,
            optimizer: OptimizerConfig::default(),
            score: ScoreWeights::default(),
            probe: Some(VarianceProbe {
                n_mc: 2000,
                ..VarianceProbe::default()
            }),
            mode: SessionMode::Live,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.n_trials == 0 {
            return Err(SessionError::InvalidConfig("n_trials must be positive".into()));
        }
        if self.n_trials > self.texts.len() {
            return Err(SessionError::CorpusTooSmall {
                requested: self.n_trials,
                available: self.texts.len(),
            });
        }
        for t in &self.texts {
            t.validate()?;
        }
        if let Some(idx) = &self.mc_trial_indices {
            if let Some(bad) = idx.iter().find(|&&i| i >= self.n_trials) {
                return Err(SessionError::InvalidConfig(alloc::format!(
                    "question trial {bad} is outside 0..{}",
                    self.n_trials
                )));
            }
        } else if self.n_mc_trials > self.n_trials {
            return Err(SessionError::InvalidConfig("more question trials than trials".into()));
        }
        Ok(())
    }

    /// The optimizer configuration with seeds derived from the session seed.
    pub fn effective_optimizer(&self) -> OptimizerConfig {
        self.optimizer.with_seed(crate::optimizer::call_seed(self.seed, 0x0b7e))
    }
}

/// Whitespace-separated token count.
pub fn word_count(body: &str) -> usize {
    body.split_whitespace().count()
}

/// `words / (duration_ms / 60000)`.
pub fn words_per_minute(words: usize, duration_ms: f64) -> f64 {
    words as f64 * 60_000.0 / duration_ms
}
