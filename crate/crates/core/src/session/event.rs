use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::SessionConfig;
use crate::fontgen::FontCoordinates;
use crate::optimizer::Phase;

/// One line of the trial log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEvent {
    pub ts: u64,
    pub session_id: String,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "payload", rename_all = "lowercase")]
pub enum EventKind {
    Start(Box<StartPayload>),
    Propose(ProposePayload),
    Reading {
        trial_id: u64,
    },
    Result(ResultPayload),
    Reset(ResetPayload),
    Mc {
        trial_id: u64,
        answer: usize,
        correct: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartPayload {
    pub config: SessionConfig,
    /// Text ids in presentation order.
    pub schedule: Vec<String>,
    pub mc_trials: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposePayload {
    pub trial_id: u64,
    pub index: usize,
    pub text_id: String,
    pub category: String,
    pub coords: FontCoordinates,
    pub phase: Phase,
    pub call_index: u64,
    pub seed: u64,
    /// Trial this one replaces after a reset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reissue_of: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultPayload {
    pub trial_id: u64,
    pub index: usize,
    pub text_id: String,
    pub coords: FontCoordinates,
    pub duration_ms: f64,
    pub press_count: u32,
    pub expected_detections: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_answer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_correct: Option<bool>,
    pub word_count: usize,
    pub wpm: f64,
    pub score: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResetPayload {
    pub trial_id: u64,
    pub index: usize,
    pub text_id: String,
    pub coords: FontCoordinates,
}
