//! Reviewer loop over undetermined cases.
//!
//! Every neutral case gets its minimal axiom sets (both directions) as
//! pending questions. A `yes` conjoins the axioms to the premise and resolves
//! the case; a `no` discards the question, and a case with nothing left to
//! ask is genuinely underspecified. Answers are appended to a line-per-event
//! log before the in-memory state changes, and replaying the log over a
//! fresh state reproduces it exactly.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abduce::{abduce, review_question, AbductionError, Target, DEFAULT_K};
use crate::dataset::{Axiom, Case, Label};
use crate::entail::{classify, NeutralWitnesses, Verdict};
use crate::harness::{classify_all, evaluate_with, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Answer,
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewEvent {
    /// ISO-8601, UTC.
    pub timestamp: String,
    #[serde(rename = "type")]
    pub kind: EventKind,
    pub case_id: String,
    /// Sorted ascending.
    pub axiom_set: Vec<String>,
    pub answer: Answer,
    pub reviewer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum ReviewStatus {
    AutoClassified { verdict: Verdict },
    NeedsReview,
    ResolvedEntailment { accepted: Vec<String> },
    ResolvedContradiction { accepted: Vec<String> },
    GenuinelyUnderspecified,
}

impl ReviewStatus {
    pub fn name(&self) -> &'static str {
        match self {
            ReviewStatus::AutoClassified { .. } => "AutoClassified",
            ReviewStatus::NeedsReview => "NeedsReview",
            ReviewStatus::ResolvedEntailment { .. } => "ResolvedEntailment",
            ReviewStatus::ResolvedContradiction { .. } => "ResolvedContradiction",
            ReviewStatus::GenuinelyUnderspecified => "GenuinelyUnderspecified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingQuestion {
    pub axiom_set: Vec<String>,
    pub target: Target,
    pub score: u64,
    pub question: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsweredQuestion {
    pub axiom_set: Vec<String>,
    pub target: Target,
    pub answer: Answer,
    pub reviewer: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReviewState {
    pub verdict: Verdict,
    #[serde(flatten)]
    pub status: ReviewStatus,
    pub pending_questions: Vec<PendingQuestion>,
    pub answered: Vec<AnsweredQuestion>,
}

impl CaseReviewState {
    /// Formal verdict after accepted axioms are taken into account.
    pub fn effective_verdict(&self) -> Verdict {
        match self.status {
            ReviewStatus::ResolvedEntailment { .. } => Verdict::Entailment,
            ReviewStatus::ResolvedContradiction { .. } => Verdict::Contradiction,
            _ => self.verdict,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("case `{case_id}` has no pending questions (status {status})")]
    NotPending { case_id: String, status: &'static str },
    #[error("axiom set {axiom_set:?} is not a pending question for case `{case_id}`")]
    UnknownSolution { case_id: String, axiom_set: Vec<String> },
    #[error("axiom set {axiom_set:?} for case `{case_id}` was already answered")]
    ConflictingAnswer { case_id: String, axiom_set: Vec<String> },
    #[error("event log line {line}: {reason}")]
    Replay { line: usize, reason: String },
    #[error("accepting {axiom_set:?} for case `{case_id}` yields {verdict}, not {expected}")]
    Unsound {
        case_id: String,
        axiom_set: Vec<String>,
        verdict: Verdict,
        expected: Verdict,
    },
    #[error(transparent)]
    Abduction(#[from] AbductionError),
    #[error("event log {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

struct CaseEntry {
    case: Case,
    witnesses: Option<NeutralWitnesses>,
    review: CaseReviewState,
}

/// In-memory review state; no I/O.
pub struct ReviewState {
    cases: BTreeMap<String, CaseEntry>,
    dataset: Vec<Case>,
    report: Report,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseSummary {
    pub id: String,
    pub premise_text: String,
    pub hypothesis_text: String,
    pub verdict: Verdict,
    #[serde(flatten)]
    pub status: ReviewStatus,
    pub pending: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseDetail {
    pub id: String,
    pub premise_text: String,
    pub premise_forms: Vec<String>,
    pub hypothesis_text: String,
    pub hypothesis_form: String,
    pub gold_legal: Label,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<NeutralWitnesses>,
    pub axiom_pool: Vec<Axiom>,
    #[serde(flatten)]
    pub review: CaseReviewState,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReviewSummary {
    pub status_counts: BTreeMap<&'static str, usize>,
    pub effective_verdicts: BTreeMap<Verdict, usize>,
}

/// The static evaluation report plus the live review tallies.
#[derive(Debug, Clone, Serialize)]
pub struct ServiceReport {
    #[serde(flatten)]
    pub report: Report,
    pub review: ReviewSummary,
}

impl ReviewState {
    pub fn new(dataset: Vec<Case>) -> Result<Self, ReviewError> {
        Self::with_bound(dataset, DEFAULT_K)
    }

    pub fn with_bound(dataset: Vec<Case>, k: usize) -> Result<Self, ReviewError> {
        let verdicts = classify_all(&dataset);
        let report = evaluate_with(&dataset, verdicts.clone(), &[], k).map_err(|e| match e {
            crate::harness::HarnessError::Abduction(a) => ReviewError::Abduction(a),
            other => unreachable!("evaluation without predictions cannot fail with {other}"),
        })?;
        let mut cases = BTreeMap::new();
        for (case, classified) in dataset.iter().zip(verdicts) {
            let verdict = classified.verdict;
            let mut pending = Vec::new();
            if verdict == Verdict::Neutral {
                for target in Target::BOTH {
                    for s in abduce(case, target, k)?.solutions {
                        pending.push(PendingQuestion {
                            question: review_question(case, &s.axiom_ids)?,
                            axiom_set: s.axiom_ids,
                            target,
                            score: s.score,
                        });
                    }
                }
                pending.sort_by(|a, b| (a.score, &a.axiom_set, a.target).cmp(&(b.score, &b.axiom_set, b.target)));
            }
            let status = match verdict {
                Verdict::Neutral if pending.is_empty() => ReviewStatus::GenuinelyUnderspecified,
                Verdict::Neutral => ReviewStatus::NeedsReview,
                v => ReviewStatus::AutoClassified { verdict: v },
            };
            cases.insert(
                case.id.clone(),
                CaseEntry {
                    case: case.clone(),
                    witnesses: classified.witnesses,
                    review: CaseReviewState {
                        verdict,
                        status,
                        pending_questions: pending,
                        answered: Vec::new(),
                    },
                },
            );
        }
        Ok(ReviewState { cases, dataset, report })
    }

    fn entry(&self, case_id: &str) -> Result<&CaseEntry, ReviewError> {
        self.cases
            .get(case_id)
            .ok_or_else(|| ReviewError::UnknownCase(case_id.to_owned()))
    }

    /// Validates an answer without applying it; returns the question's
    /// target.
    pub fn check(&self, case_id: &str, axiom_set: &[String]) -> Result<Target, ReviewError> {
        let entry = self.entry(case_id)?;
        let review = &entry.review;
        if review.answered.iter().any(|a| a.axiom_set == axiom_set) {
            return Err(ReviewError::ConflictingAnswer {
                case_id: case_id.to_owned(),
                axiom_set: axiom_set.to_vec(),
            });
        }
        if review.status != ReviewStatus::NeedsReview {
            return Err(ReviewError::NotPending {
                case_id: case_id.to_owned(),
                status: review.status.name(),
            });
        }
        review
            .pending_questions
            .iter()
            .find(|q| q.axiom_set == axiom_set)
            .map(|q| q.target)
            .ok_or_else(|| ReviewError::UnknownSolution {
                case_id: case_id.to_owned(),
                axiom_set: axiom_set.to_vec(),
            })
    }

    /// Applies a validated event.
    pub fn apply(&mut self, event: &ReviewEvent) -> Result<&CaseReviewState, ReviewError> {
        let target = self.check(&event.case_id, &event.axiom_set)?;
        let entry = self.cases.get_mut(&event.case_id).expect("checked above");
        let review = &mut entry.review;
        review.pending_questions.retain(|q| q.axiom_set != event.axiom_set);
        review.answered.push(AnsweredQuestion {
            axiom_set: event.axiom_set.clone(),
            target,
            answer: event.answer,
            reviewer: event.reviewer.clone(),
            timestamp: event.timestamp.clone(),
        });
        match event.answer {
            Answer::Yes => {
                let case = &entry.case;
                let mut premise = case.premise_forms.clone();
                for id in &event.axiom_set {
                    premise.push(case.axiom(id).expect("pending sets name pool axioms").formula.clone());
                }
                let verdict = classify(&premise, &case.hypothesis_form).verdict;
                if verdict != target.verdict() {
                    return Err(ReviewError::Unsound {
                        case_id: case.id.clone(),
                        axiom_set: event.axiom_set.clone(),
                        verdict,
                        expected: target.verdict(),
                    });
                }
                review.pending_questions.clear();
                let accepted = event.axiom_set.clone();
                review.status = match target {
                    Target::Entailment => ReviewStatus::ResolvedEntailment { accepted },
                    Target::Contradiction => ReviewStatus::ResolvedContradiction { accepted },
                };
            }
            Answer::No => {
                if review.pending_questions.is_empty() {
                    review.status = ReviewStatus::GenuinelyUnderspecified;
                }
            }
        }
        Ok(&entry.review)
    }

    pub fn case_state(&self, case_id: &str) -> Result<&CaseReviewState, ReviewError> {
        self.entry(case_id).map(|e| &e.review)
    }

    pub fn summaries(&self) -> Vec<CaseSummary> {
        self.cases
            .values()
            .map(|e| CaseSummary {
                id: e.case.id.clone(),
                premise_text: e.case.premise_text.clone(),
                hypothesis_text: e.case.hypothesis_text.clone(),
                verdict: e.review.verdict,
                status: e.review.status.clone(),
                pending: e.review.pending_questions.len(),
            })
            .collect()
    }

    pub fn detail(&self, case_id: &str) -> Result<CaseDetail, ReviewError> {
        let e = self.entry(case_id)?;
        Ok(CaseDetail {
            id: e.case.id.clone(),
            premise_text: e.case.premise_text.clone(),
            premise_forms: e.case.premise_forms.iter().map(ToString::to_string).collect(),
            hypothesis_text: e.case.hypothesis_text.clone(),
            hypothesis_form: e.case.hypothesis_form.to_string(),
            gold_legal: e.case.gold_legal,
            witnesses: e.witnesses.clone(),
            axiom_pool: e.case.axiom_pool.clone(),
            review: e.review.clone(),
        })
    }

    pub fn report(&self) -> ServiceReport {
        let mut status_counts = BTreeMap::new();
        let mut effective_verdicts: BTreeMap<Verdict, usize> = Verdict::ALL.iter().map(|v| (*v, 0)).collect();
        for e in self.cases.values() {
            *status_counts.entry(e.review.status.name()).or_insert(0) += 1;
            *effective_verdicts.get_mut(&e.review.effective_verdict()).unwrap() += 1;
        }
        ServiceReport {
            report: self.report.clone(),
            review: ReviewSummary {
                status_counts,
                effective_verdicts,
            },
        }
    }

    pub fn dataset(&self) -> &[Case] {
        &self.dataset
    }

    /// Canonical serialization of every case's review state, ordered by
    /// case id.
    pub fn snapshot(&self) -> String {
        let states: BTreeMap<&str, &CaseReviewState> =
            self.cases.iter().map(|(id, e)| (id.as_str(), &e.review)).collect();
        serde_json::to_string_pretty(&states).expect("review state serializes")
    }

    /// Applies every event of a log, in order.
    pub fn replay(&mut self, log: &str) -> Result<usize, ReviewError> {
        let mut applied = 0;
        for (i, line) in log.split_inclusive('\n').enumerate() {
            let number = i + 1;
            let replay_err = |reason: String| ReviewError::Replay { line: number, reason };
            if !line.ends_with('\n') {
                return Err(replay_err("truncated record (no line terminator)".into()));
            }
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let event: ReviewEvent = serde_json::from_str(line).map_err(|e| replay_err(e.to_string()))?;
            self.apply(&event).map_err(|e| replay_err(e.to_string()))?;
            applied += 1;
        }
        Ok(applied)
    }
}

/// Review state behind a single writer, persisted to an append-only log.
pub struct ReviewService {
    inner: RwLock<Inner>,
}

struct Inner {
    state: ReviewState,
    log: File,
    log_path: PathBuf,
}

pub fn now_timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl ReviewService {
    /// Builds the state from the dataset and replays `log_path` if present.
    pub fn open(dataset: Vec<Case>, log_path: impl AsRef<Path>) -> Result<Self, ReviewError> {
        let log_path = log_path.as_ref().to_owned();
        let io_err = |source| ReviewError::Io {
            path: log_path.clone(),
            source,
        };
        let mut state = ReviewState::new(dataset)?;
        match std::fs::read_to_string(&log_path) {
            Ok(text) => {
                state.replay(&text)?;
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(io_err(e)),
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(io_err)?;
        Ok(ReviewService {
            inner: RwLock::new(Inner { state, log, log_path }),
        })
    }

    /// Records an answer. The event is flushed to disk before the state
    /// changes; concurrent callers are serialized.
    pub fn answer(
        &self,
        case_id: &str,
        axiom_set: &[String],
        answer: Answer,
        reviewer: &str,
    ) -> Result<CaseReviewState, ReviewError> {
        let mut axiom_set = axiom_set.to_vec();
        axiom_set.sort();
        axiom_set.dedup();
        let mut inner = self.inner.write().unwrap_or_else(|p| p.into_inner());
        inner.state.check(case_id, &axiom_set)?;
        let event = ReviewEvent {
            timestamp: now_timestamp(),
            kind: EventKind::Answer,
            case_id: case_id.to_owned(),
            axiom_set,
            answer,
            reviewer: reviewer.to_owned(),
        };
        let line = serde_json::to_string(&event).expect("event serializes") + "\n";
        let Inner { log, log_path, state } = &mut *inner;
        log.write_all(line.as_bytes())
            .and_then(|_| log.flush())
            .and_then(|_| log.sync_data())
            .map_err(|source| ReviewError::Io {
                path: log_path.clone(),
                source,
            })?;
        state.apply(&event).cloned()
    }

    /// Runs `f` under the read lock.
    pub fn read<T>(&self, f: impl FnOnce(&ReviewState) -> T) -> T {
        let inner = self.inner.read().unwrap_or_else(|p| p.into_inner());
        f(&inner.state)
    }

    pub fn snapshot(&self) -> String {
        self.read(ReviewState::snapshot)
    }
}
