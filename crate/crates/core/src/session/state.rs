use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::event::{EventKind, LogEvent, ProposePayload, ResetPayload, ResultPayload, StartPayload};
use super::score::{compute_score, detection_accuracy};
use super::{words_per_minute, SessionConfig, SessionError};
use crate::fontgen::FontCoordinates;
use crate::optimizer::{call_seed, KernelParams, Observation, Optimizer, Phase, Proposal, VarianceProbe};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Pending,
    Reading,
    Done,
    Reset,
}

/// A trial as handed to the reader: everything except the text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialIssue {
    pub trial_id: u64,
    pub index: usize,
    pub text_id: String,
    pub category: String,
    pub coords: FontCoordinates,
    pub phase: Phase,
    pub gate_delay_ms: u64,
    pub issued_ms: u64,
    pub has_question: bool,
    pub reissue_of: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McPrompt {
    pub question: String,
    pub options: Vec<String>,
}

/// The text of a trial, released once its gate is open.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextView {
    pub trial_id: u64,
    pub text: String,
    pub word_count: usize,
    pub question: Option<McPrompt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub duration_ms: f64,
    pub press_count: u32,
    pub mc_answer: Option<usize>,
}

/// Feedback for a finished trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial_id: u64,
    pub word_count: usize,
    pub wpm: f64,
    pub score: i64,
    pub press_count: u32,
    pub expected_detections: u32,
    pub detection_accuracy: f64,
    pub mc_correct: Option<bool>,
}

/// A trial that left the active state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub index: usize,
    pub text_id: String,
    pub coords: FontCoordinates,
    pub status: TrialStatus,
    pub wpm: f64,
}

/// One optimizer iteration: the proposed point, its result and the variance
/// integrated around it before and after the update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: u64,
    pub proposed_c: FontCoordinates,
    pub wpm: f64,
    pub params: KernelParams,
    pub phase: Phase,
    pub iv_before: Option<f64>,
    pub iv_after: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ActiveTrial {
    issue: TrialIssue,
    status: TrialStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Finished {
    Result {
        submission: Submission,
        outcome: TrialOutcome,
    },
    Reset {
        reissue: TrialIssue,
    },
}

/// Session state machine. Time is supplied by the caller in milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    id: String,
    config: SessionConfig,
    /// Text indices in presentation order.
    schedule: Vec<usize>,
    mc_trials: Vec<usize>,
    optimizer: Optimizer,
    next_index: usize,
    active: Option<ActiveTrial>,
    next_trial_id: u64,
    history: Vec<TrialRecord>,
    /// Every issued trial; trial ids count from 1.
    issued: Vec<TrialIssue>,
    finished: BTreeMap<u64, Finished>,
    resets: u32,
    trace: Vec<TraceRecord>,
    /// Events emitted so far, including those already taken.
    event_count: u64,
    #[serde(skip)]
    pending: Vec<LogEvent>,
}

impl Session {
    /// Validates `config`, shuffles the corpus and emits the start event.
    pub fn start(id: impl Into<String>, config: SessionConfig, now_ms: u64) -> Result<Self, SessionError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..config.texts.len()).collect();
        order.shuffle(&mut rng);
        order.truncate(config.n_trials);
        let mut mc_trials = match &config.mc_trial_indices {
            Some(v) => v.clone(),
            None => {
                let mut r = ChaCha8Rng::seed_from_u64(call_seed(config.seed, 1));
                index::sample(&mut r, config.n_trials, config.n_mc_trials).into_vec()
            }
        };
        mc_trials.sort_unstable();
        mc_trials.dedup();
        let optimizer = Optimizer::new(config.effective_optimizer())?;
        let mut s = Self {
            id: id.into(),
            schedule: order,
            mc_trials,
            optimizer,
            next_index: 0,
            active: None,
            next_trial_id: 1,
            history: Vec::new(),
            issued: Vec::new(),
            finished: BTreeMap::new(),
            resets: 0,
            trace: Vec::new(),
            event_count: 0,
            pending: Vec::new(),
            config,
        };
        let payload = StartPayload {
            config: s.config.clone(),
            schedule: s.schedule.iter().map(|&i| s.config.texts[i].id.clone()).collect(),
            mc_trials: s.mc_trials.clone(),
        };
        s.emit(now_ms, EventKind::Start(Box::new(payload)));
        Ok(s)
    }

    /// Rebuilds a session by re-executing a complete event log.
    pub fn from_events(events: &[LogEvent]) -> Result<Self, SessionError> {
        let Some((first, rest)) = events.split_first() else {
            return Err(SessionError::ReplayMismatch("empty log".into()));
        };
        let EventKind::Start(start) = &first.kind else {
            return Err(SessionError::ReplayMismatch("log does not begin with start".into()));
        };
        let mut s = Self::start(first.session_id.clone(), start.config.clone(), first.ts)?;
        s.pending.clear();
        for e in rest {
            s.apply(e)?;
        }
        Ok(s)
    }

    /// Re-executes one logged event, checking that it reproduces the log.
    pub fn apply(&mut self, event: &LogEvent) -> Result<(), SessionError> {
        let mismatch = |what: &str| SessionError::ReplayMismatch(format!("{what} at ts {}", event.ts));
        match &event.kind {
            EventKind::Start(_) => return Err(mismatch("second start event")),
            EventKind::Propose(p) => {
                let issue = self.current_trial(event.ts)?;
                if issue.trial_id != p.trial_id || issue.coords != p.coords {
                    return Err(mismatch("proposal differs"));
                }
            }
            EventKind::Reading { trial_id } => {
                self.open_text(*trial_id, event.ts)?;
            }
            EventKind::Result(r) => {
                let sub = Submission {
                    duration_ms: r.duration_ms,
                    press_count: r.press_count,
                    mc_answer: r.mc_answer,
                };
                let (outcome, _) = self.submit_result(r.trial_id, sub, event.ts)?;
                if outcome.wpm != r.wpm || outcome.score != r.score {
                    return Err(mismatch("result differs"));
                }
            }
            EventKind::Reset(r) => {
                self.reset_trial(r.trial_id, event.ts)?;
            }
            EventKind::Mc { .. } => {}
        }
        self.pending.clear();
        Ok(())
    }

    fn emit(&mut self, ts: u64, kind: EventKind) {
        self.event_count += 1;
        self.pending.push(LogEvent {
            ts,
            session_id: self.id.clone(),
            kind,
        });
    }

    /// Drains the events emitted since the last call.
    pub fn take_events(&mut self) -> Vec<LogEvent> {
        core::mem::take(&mut self.pending)
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn optimizer(&self) -> &Optimizer {
        &self.optimizer
    }

    pub fn history(&self) -> &[TrialRecord] {
        &self.history
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn resets(&self) -> u32 {
        self.resets
    }

    pub fn mc_trials(&self) -> &[usize] {
        &self.mc_trials
    }

    /// Text ids in presentation order.
    pub fn schedule(&self) -> impl Iterator<Item = &str> {
        self.schedule.iter().map(|&i| self.config.texts[i].id.as_str())
    }

    pub fn completed_trials(&self) -> usize {
        self.next_index
    }

    pub fn is_complete(&self) -> bool {
        self.next_index >= self.config.n_trials
    }

    pub fn active_trial(&self) -> Option<(&TrialIssue, TrialStatus)> {
        self.active.as_ref().map(|a| (&a.issue, a.status))
    }

    /// Any trial issued by this session.
    pub fn find_issue(&self, trial_id: u64) -> Option<&TrialIssue> {
        let i = usize::try_from(trial_id.checked_sub(1)?).ok()?;
        self.issued.get(i)
    }

    pub fn trial_status(&self, trial_id: u64) -> Option<TrialStatus> {
        if let Some(a) = self.active.as_ref().filter(|a| a.issue.trial_id == trial_id) {
            return Some(a.status);
        }
        match self.finished.get(&trial_id)? {
            Finished::Result { .. } => Some(TrialStatus::Done),
            Finished::Reset { .. } => Some(TrialStatus::Reset),
        }
    }

    fn has_question(&self, index: usize) -> bool {
        self.mc_trials.binary_search(&index).is_ok() && self.config.texts[self.schedule[index]].mc.is_some()
    }

    fn issue(&mut self, now_ms: u64, reissue_of: Option<u64>) -> Result<TrialIssue, SessionError> {
        let Proposal {
            c,
            phase,
            call_index,
            seed,
        } = self.optimizer.propose()?;
        let index = self.next_index;
        let text = &self.config.texts[self.schedule[index]];
        let issue = TrialIssue {
            trial_id: self.next_trial_id,
            index,
            text_id: text.id.clone(),
            category: text.category.clone(),
            coords: c,
            phase,
            gate_delay_ms: self.config.gate_delay_ms,
            issued_ms: now_ms,
            has_question: self.has_question(index),
            reissue_of,
        };
        self.next_trial_id += 1;
        self.issued.push(issue.clone());
        self.active = Some(ActiveTrial {
            issue: issue.clone(),
            status: TrialStatus::Pending,
        });
        self.emit(
            now_ms,
            EventKind::Propose(ProposePayload {
                trial_id: issue.trial_id,
                index,
                text_id: issue.text_id.clone(),
                category: issue.category.clone(),
                coords: c,
                phase,
                call_index,
                seed,
                reissue_of,
            }),
        );
        Ok(issue)
    }

    /// The active trial, issuing the next one if none is active.
    pub fn current_trial(&mut self, now_ms: u64) -> Result<TrialIssue, SessionError> {
        if let Some(a) = &self.active {
            return Ok(a.issue.clone());
        }
        if self.is_complete() {
            return Err(SessionError::Complete);
        }
        self.issue(now_ms, None)
    }

    fn active_mut(&mut self, trial_id: u64) -> Result<&mut ActiveTrial, SessionError> {
        match &mut self.active {
            Some(a) if a.issue.trial_id == trial_id => Ok(a),
            _ if self.finished.contains_key(&trial_id) => Err(SessionError::TrialNotActive(trial_id)),
            _ if trial_id > 0 && trial_id < self.next_trial_id => Err(SessionError::TrialNotActive(trial_id)),
            _ => Err(SessionError::UnknownTrial(trial_id)),
        }
    }

    /// Releases the text once the gate delay has elapsed and starts reading.
    pub fn open_text(&mut self, trial_id: u64, now_ms: u64) -> Result<TextView, SessionError> {
        let gate = self.config.gate_delay_ms;
        let a = self.active_mut(trial_id)?;
        let open_at = a.issue.issued_ms.saturating_add(gate);
        if now_ms < open_at {
            return Err(SessionError::GateClosed {
                trial_id,
                remaining_ms: open_at - now_ms,
            });
        }
        let first = a.status == TrialStatus::Pending;
        a.status = TrialStatus::Reading;
        let index = a.issue.index;
        if first {
            self.emit(now_ms, EventKind::Reading { trial_id });
        }
        let text = &self.config.texts[self.schedule[index]];
        let question = if self.has_question(index) {
            text.mc.as_ref().map(|q| McPrompt {
                question: q.question.clone(),
                options: q.options.clone(),
            })
        } else {
            None
        };
        Ok(TextView {
            trial_id,
            text: text.body.clone(),
            word_count: text.word_count(),
            question,
        })
    }

    fn record(&mut self, c: FontCoordinates, wpm: f64, phase: Phase) -> Result<(), SessionError> {
        let obs = Observation { c, wpm };
        let params = *self.optimizer.gp().params();
        let iter = self.trace.len() as u64;
        let (iv_before, iv_after) = match self.config.probe {
            Some(probe) => {
                let probe = VarianceProbe {
                    seed: call_seed(probe.seed, iter),
                    ..probe
                };
                let (b, a, _) = self.optimizer.record_probed(obs, &probe)?;
                (Some(b.value), Some(a.value))
            }
            None => {
                self.optimizer.record(obs)?;
                (None, None)
            }
        };
        self.trace.push(TraceRecord {
            iter,
            proposed_c: c,
            wpm,
            params,
            phase,
            iv_before,
            iv_after,
        });
        Ok(())
    }

    /// Finishes the reading trial `trial_id`.
    ///
    /// Resubmitting an identical result returns the original outcome with
    /// `true`; a different submission for a finished trial is a conflict.
    pub fn submit_result(
        &mut self,
        trial_id: u64,
        sub: Submission,
        now_ms: u64,
    ) -> Result<(TrialOutcome, bool), SessionError> {
        match self.finished.get(&trial_id) {
            Some(Finished::Result { submission, outcome }) => {
                return if *submission == sub {
                    Ok((outcome.clone(), true))
                } else {
                    Err(SessionError::ConflictingSubmission(trial_id))
                };
            }
            Some(Finished::Reset { .. }) => return Err(SessionError::TrialNotActive(trial_id)),
            None => {}
        }
        let a = self.active_mut(trial_id)?;
        if a.status != TrialStatus::Reading {
            return Err(SessionError::NotReading(trial_id));
        }
        if !sub.duration_ms.is_finite() || sub.duration_ms <= 0.0 {
            return Err(SessionError::InvalidDuration(sub.duration_ms));
        }
        let issue = a.issue.clone();
        let text = &self.config.texts[self.schedule[issue.index]];
        let mc_correct = match (issue.has_question, &text.mc, sub.mc_answer) {
            (true, Some(_), None) => return Err(SessionError::MissingAnswer(trial_id)),
            (true, Some(q), Some(ans)) => {
                if ans >= q.options.len() {
                    return Err(SessionError::AnswerOutOfRange {
                        answer: ans,
                        options: q.options.len(),
                    });
                }
                Some(ans == q.correct_index)
            }
            _ => None,
        };
        let words = text.word_count();
        let expected = text.expected_detections;
        let text_id = text.id.clone();
        let wpm = words_per_minute(words, sub.duration_ms);
        let score = compute_score(wpm, sub.press_count, expected, mc_correct, &self.config.score);

        self.record(issue.coords, wpm, issue.phase)?;
        let outcome = TrialOutcome {
            trial_id,
            word_count: words,
            wpm,
            score,
            press_count: sub.press_count,
            expected_detections: expected,
            detection_accuracy: detection_accuracy(sub.press_count, expected),
            mc_correct,
        };
        if let (Some(answer), Some(correct)) = (sub.mc_answer, mc_correct) {
            self.emit(
                now_ms,
                EventKind::Mc {
                    trial_id,
                    answer,
                    correct,
                },
            );
        }
        self.emit(
            now_ms,
            EventKind::Result(ResultPayload {
                trial_id,
                index: issue.index,
                text_id: text_id.clone(),
                coords: issue.coords,
                duration_ms: sub.duration_ms,
                press_count: sub.press_count,
                expected_detections: expected,
                mc_answer: sub.mc_answer,
                mc_correct,
                word_count: words,
                wpm,
                score,
            }),
        );
        self.history.push(TrialRecord {
            trial_id,
            index: issue.index,
            text_id,
            coords: issue.coords,
            status: TrialStatus::Done,
            wpm,
        });
        self.finished.insert(
            trial_id,
            Finished::Result {
                submission: sub,
                outcome: outcome.clone(),
            },
        );
        self.active = None;
        self.next_index += 1;
        Ok((outcome, false))
    }

    /// Records the active trial's font as unreadable (zero words per minute)
    /// and reissues the same text in a new font.
    ///
    /// Repeating a reset returns the original reissue with `true`.
    pub fn reset_trial(&mut self, trial_id: u64, now_ms: u64) -> Result<(TrialIssue, bool), SessionError> {
        match self.finished.get(&trial_id) {
            Some(Finished::Reset { reissue }) => return Ok((reissue.clone(), true)),
            Some(Finished::Result { .. }) => return Err(SessionError::TrialNotActive(trial_id)),
            None => {}
        }
        let issue = self.active_mut(trial_id)?.issue.clone();
        self.record(issue.coords, 0.0, issue.phase)?;
        self.resets += 1;
        self.emit(
            now_ms,
            EventKind::Reset(ResetPayload {
                trial_id,
                index: issue.index,
                text_id: issue.text_id.clone(),
                coords: issue.coords,
            }),
        );
        self.history.push(TrialRecord {
            trial_id,
            index: issue.index,
            text_id: issue.text_id,
            coords: issue.coords,
            status: TrialStatus::Reset,
            wpm: 0.0,
        });
        self.active = None;
        let reissue = self.issue(now_ms, Some(trial_id))?;
        self.finished.insert(
            trial_id,
            Finished::Reset {
                reissue: reissue.clone(),
            },
        );
        Ok((reissue, false))
    }
}
