//! Batch evaluation: formal re-labelling of a dataset, label-shift
//! statistics against the legal labels, failure-mode tagging of external
//! predictions, and the solver-derived reward signal.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abduce::{abduce, AbductionError, AbductionResult, Solution, Target, DEFAULT_K, MAX_POOL};
use crate::dataset::{Case, Label, Prediction};
use crate::entail::{classify, ClassifiedCase, Verdict};
use crate::logic::{to_clauses, ClauseSet, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureTag {
    /// A definite label where the formal verdict is neutral.
    AssumptionInjection,
    /// Claims formal grounding for a label the solver does not support.
    ScopeLaundering,
    /// Misses a definite verdict the formal representation forces.
    ImplicitConstraintBlindness,
}

impl FailureTag {
    pub const ALL: [FailureTag; 3] = [
        FailureTag::AssumptionInjection,
        FailureTag::ScopeLaundering,
        FailureTag::ImplicitConstraintBlindness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FailureTag::AssumptionInjection => "assumption_injection",
            FailureTag::ScopeLaundering => "scope_laundering",
            FailureTag::ImplicitConstraintBlindness => "implicit_constraint_blindness",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("case `{0}` has an inconsistent premise; failure modes are undefined")]
    DegenerateCase(String),
    #[error("prediction references unknown case id `{0}`")]
    UnknownCaseId(String),
    #[error(transparent)]
    Abduction(#[from] AbductionError),
}

/// Rows and columns are named so the structured report is self-describing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl Matrix {
    fn zeros(rows: &[&str], cols: &[&str]) -> Self {
        Matrix {
            rows: rows.iter().map(|s| (*s).to_owned()).collect(),
            cols: cols.iter().map(|s| (*s).to_owned()).collect(),
            counts: vec![vec![0; cols.len()]; rows.len()],
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, row: &str, col: &str) -> usize {
        let r = self.rows.iter().position(|x| x == row);
        let c = self.cols.iter().position(|x| x == col);
        match (r, c) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }
}

const LABELS: [&str; 3] = ["entailment", "contradiction", "neutral"];
const VERDICTS: [&str; 4] = ["entailment", "contradiction", "neutral", "premise_inconsistent"];

fn label_index(l: Label) -> usize {
    Label::ALL.iter().position(|x| *x == l).unwrap()
}

fn verdict_index(v: Verdict) -> usize {
    Verdict::ALL.iter().position(|x| *x == v).unwrap()
}

pub fn classify_case(case: &Case) -> ClassifiedCase {
    ClassifiedCase::new(&case.id, classify(&case.premise_forms, &case.hypothesis_form))
}

/// Classifies every case (in parallel; output keeps dataset order).
pub fn classify_all(dataset: &[Case]) -> Vec<ClassifiedCase> {
    dataset.par_iter().map(classify_case).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTable {
    /// Legal label (rows) against formal verdict (columns).
    pub matrix: Matrix,
    pub verdicts: Vec<ClassifiedCase>,
    pub entailment_to_neutral: usize,
    /// `entailment_to_neutral` over the number of cases; 0 for an empty
    /// dataset.
    pub entailment_to_neutral_proportion: f64,
}

pub fn compute_shift(dataset: &[Case]) -> ShiftTable {
    shift_from(dataset, classify_all(dataset))
}

fn shift_from(dataset: &[Case], verdicts: Vec<ClassifiedCase>) -> ShiftTable {
    let mut matrix = Matrix::zeros(&LABELS, &VERDICTS);
    for (case, v) in dataset.iter().zip(&verdicts) {
        matrix.counts[label_index(case.gold_legal)][verdict_index(v.verdict)] += 1;
    }
    let e2n = matrix.counts[0][2];
    ShiftTable {
        matrix,
        entailment_to_neutral: e2n,
        entailment_to_neutral_proportion: ratio(e2n, dataset.len()),
        verdicts,
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn tag_failures(case_id: &str, verdict: Verdict, pred: &Prediction) -> Result<BTreeSet<FailureTag>, HarnessError> {
    let formal = Label::from_verdict(verdict).ok_or_else(|| HarnessError::DegenerateCase(case_id.to_owned()))?;
    let mut tags = BTreeSet::new();
    let definite = |l: Label| l != Label::Neutral;
    if formal == Label::Neutral && definite(pred.predicted) {
        tags.insert(FailureTag::AssumptionInjection);
    }
    if pred.claims_formal && pred.predicted != formal {
        tags.insert(FailureTag::ScopeLaundering);
    }
    if definite(formal) && pred.predicted != formal {
        tags.insert(FailureTag::ImplicitConstraintBlindness);
    }
    Ok(tags)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardSignal {
    /// +1 when the claim matches the formal verdict, -1 for a definite
    /// claim on an undetermined case, 0 otherwise.
    pub reward: i8,
    /// The axioms that would ground a -1 claim, when the pool has any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required_axioms: Option<AbductionResult>,
}

pub fn reward_signal(case: &Case, claimed: Label) -> Result<RewardSignal, HarnessError> {
    let verdict = classify(&case.premise_forms, &case.hypothesis_form).verdict;
    reward_for(case, verdict, claimed, DEFAULT_K)
}

/// Reward against an already computed verdict.
pub fn reward_for(case: &Case, verdict: Verdict, claimed: Label, k: usize) -> Result<RewardSignal, HarnessError> {
    let none = |reward| RewardSignal {
        reward,
        required_axioms: None,
    };
    Ok(match (verdict, claimed) {
        (Verdict::PremiseInconsistent, _) => none(0),
        (v, c) if v == c.verdict() => none(1),
        (Verdict::Neutral, Label::Entailment | Label::Contradiction) => {
            let target = if claimed == Label::Entailment {
                Target::Entailment
            } else {
                Target::Contradiction
            };
            let result = abduce(case, target, k)?;
            RewardSignal {
                reward: -1,
                required_axioms: (!result.solutions.is_empty()).then_some(result),
            }
        }
        _ => none(0),
    })
}

/// Best-first abduction outcome for one direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub solutions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best: Option<Solution>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbductionSummary {
    Computed {
        entailment: TargetSummary,
        contradiction: TargetSummary,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub predicted: Label,
    pub claims_formal: bool,
    pub tags: Vec<FailureTag>,
    pub reward: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRow {
    pub id: String,
    pub gold_legal: Label,
    pub verdict: Verdict,
    pub shifted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<PredictionRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abduction: Option<AbductionSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub formal: Label,
    pub predicted: Label,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub cases: usize,
    pub verdict_counts: BTreeMap<Verdict, usize>,
    pub label_shifts: usize,
    pub entailment_to_neutral: usize,
    pub entailment_to_neutral_proportion: f64,
    pub entailment_to_neutral_share_of_shifts: f64,
    pub matched_predictions: usize,
    pub missing_predictions: Vec<String>,
    pub premise_inconsistent: Vec<String>,
    /// Largest off-diagonal confusion cell; earliest in row-major order on
    /// ties, absent when there are no errors.
    pub dominant_error: Option<Cell>,
    pub entailment_contradiction_confusions: usize,
    pub tag_counts: BTreeMap<FailureTag, usize>,
    pub reward_total: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub shift_matrix: Matrix,
    /// Formal verdict (rows) against predicted label (columns); cases with
    /// an inconsistent premise are excluded.
    pub confusion: Matrix,
    pub per_case: Vec<CaseRow>,
    pub aggregates: Aggregates,
}

impl Report {
    /// Pretty JSON with a trailing newline; stable byte-for-byte.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

fn summarize(case: &Case, k: usize) -> AbductionSummary {
    if case.axiom_pool.len() > MAX_POOL {
        return AbductionSummary::Skipped {
            reason: AbductionError::PoolTooLarge {
                size: case.axiom_pool.len(),
            }
            .to_string(),
        };
    }
    let run = |t| {
        let r = abduce(case, t, k).expect("neutral case with a bounded pool");
        TargetSummary {
            solutions: r.solutions.len(),
            best: r.solutions.into_iter().next(),
        }
    };
    AbductionSummary::Computed {
        entailment: run(Target::Entailment),
        contradiction: run(Target::Contradiction),
    }
}

/// Scores predictions against the formal verdicts of `dataset`.
pub fn evaluate(dataset: &[Case], predictions: &[Prediction]) -> Result<Report, HarnessError> {
    evaluate_with(dataset, classify_all(dataset), predictions, DEFAULT_K)
}

/// As [`evaluate`], reusing verdicts computed earlier (same order as
/// `dataset`).
pub fn evaluate_with(
    dataset: &[Case],
    verdicts: Vec<ClassifiedCase>,
    predictions: &[Prediction],
    k: usize,
) -> Result<Report, HarnessError> {
    let by_id: HashMap<&str, &Prediction> = predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    let known: BTreeSet<&str> = dataset.iter().map(|c| c.id.as_str()).collect();
    if let Some(p) = predictions.iter().find(|p| !known.contains(p.id.as_str())) {
        return Err(HarnessError::UnknownCaseId(p.id.clone()));
    }

    let shift = shift_from(dataset, verdicts);
    let rows: Vec<CaseRow> = dataset
        .par_iter()
        .zip(&shift.verdicts)
        .map(|(case, classified)| -> Result<CaseRow, HarnessError> {
            let verdict = classified.verdict;
            let prediction = match by_id.get(case.id.as_str()) {
                Some(p) if verdict != Verdict::PremiseInconsistent => {
                    let tags = tag_failures(&case.id, verdict, p)?.into_iter().collect();
                    let reward = if verdict == Verdict::Neutral && case.axiom_pool.len() > MAX_POOL {
                        // Reward sign does not depend on abduction.
                        if p.predicted == Label::Neutral {
                            1
                        } else {
                            -1
                        }
                    } else {
                        reward_for(case, verdict, p.predicted, k)?.reward
                    };
                    Some(PredictionRow {
                        predicted: p.predicted,
                        claims_formal: p.claims_formal,
                        tags,
                        reward,
                    })
                }
                _ => None,
            };
            Ok(CaseRow {
                id: case.id.clone(),
                gold_legal: case.gold_legal,
                verdict,
                shifted: case.gold_legal.verdict() != verdict,
                prediction,
                abduction: (verdict == Verdict::Neutral).then(|| summarize(case, k)),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut per_case = rows;
    per_case.sort_by(|a, b| a.id.cmp(&b.id));

    let mut confusion = Matrix::zeros(&LABELS, &LABELS);
    let mut tag_counts: BTreeMap<FailureTag, usize> = FailureTag::ALL.iter().map(|t| (*t, 0)).collect();
    let mut reward_total = 0i64;
    let mut missing = Vec::new();
    let mut inconsistent = Vec::new();
    let mut verdict_counts: BTreeMap<Verdict, usize> = Verdict::ALL.iter().map(|v| (*v, 0)).collect();
    for row in &per_case {
        *verdict_counts.get_mut(&row.verdict).unwrap() += 1;
        if row.verdict == Verdict::PremiseInconsistent {
            inconsistent.push(row.id.clone());
        } else if !by_id.contains_key(row.id.as_str()) {
            missing.push(row.id.clone());
        }
        if let Some(p) = &row.prediction {
            let formal = Label::from_verdict(row.verdict).unwrap();
            confusion.counts[label_index(formal)][label_index(p.predicted)] += 1;
            for t in &p.tags {
                *tag_counts.get_mut(t).unwrap() += 1;
            }
            reward_total += i64::from(p.reward);
        }
    }

    let mut dominant_error: Option<Cell> = None;
    for (r, formal) in Label::ALL.iter().enumerate() {
        for (c, predicted) in Label::ALL.iter().enumerate() {
            let count = confusion.counts[r][c];
            if r != c && count > 0 && dominant_error.as_ref().is_none_or(|d| count > d.count) {
                dominant_error = Some(Cell {
                    formal: *formal,
                    predicted: *predicted,
                    count,
                });
            }
        }
    }

    let label_shifts = per_case.iter().filter(|r| r.shifted).count();
    let aggregates = Aggregates {
        cases: dataset.len(),
        verdict_counts,
        label_shifts,
        entailment_to_neutral: shift.entailment_to_neutral,
        entailment_to_neutral_proportion: shift.entailment_to_neutral_proportion,
        entailment_to_neutral_share_of_shifts: ratio(shift.entailment_to_neutral, label_shifts),
        matched_predictions: confusion.total(),
        missing_predictions: missing,
        premise_inconsistent: inconsistent,
        dominant_error,
        entailment_contradiction_confusions: confusion.counts[0][1] + confusion.counts[1][0],
        tag_counts,
        reward_total,
    };
    Ok(Report {
        shift_matrix: shift.matrix,
        confusion,
        per_case,
        aggregates,
    })
}

/// Aligned-column text rendering of a report.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let matrix = |out: &mut String, title: &str, m: &Matrix| {
        let width = m
            .rows
            .iter()
            .chain(&m.cols)
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max(title.len());
        let _ = write!(out, "{title:<width$}");
        for c in &m.cols {
            let _ = write!(out, "  {c:>width$}");
        }
        out.push('\n');
        for (r, row) in m.rows.iter().zip(&m.counts) {
            let _ = write!(out, "{r:<width$}");
            for n in row {
                let _ = write!(out, "  {n:>width$}");
            }
            out.push('\n');
        }
    };
    out.push_str("label shift (legal -> formal)\n");
    matrix(&mut out, "legal\\formal", &report.shift_matrix);
    out.push_str("\nconfusion (formal -> predicted)\n");
    matrix(&mut out, "formal\\pred", &report.confusion);

    out.push_str("\ncases\n");
    let id_width = report.per_case.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
    let _ = writeln!(
        out,
        "{:<id_width$}  {:<13}  {:<20}  {:<13}  {:>6}  tags",
        "id", "legal", "formal", "predicted", "reward"
    );
    for row in &report.per_case {
        let (pred, reward, tags) = match &row.prediction {
            Some(p) => (
                p.predicted.as_str(),
                p.reward.to_string(),
                p.tags.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(","),
            ),
            None => ("-", "-".into(), String::new()),
        };
        let _ = writeln!(
            out,
            "{:<id_width$}  {:<13}  {:<20}  {:<13}  {:>6}  {}",
            row.id,
            row.gold_legal.as_str(),
            row.verdict.as_str(),
            pred,
            reward,
            tags
        );
    }

    let a = &report.aggregates;
    out.push_str("\nsummary\n");
    let _ = writeln!(out, "cases                          {}", a.cases);
    let _ = writeln!(out, "label shifts                   {}", a.label_shifts);
    let _ = writeln!(
        out,
        "entailment -> neutral          {} ({:.3} of cases)",
        a.entailment_to_neutral, a.entailment_to_neutral_proportion
    );
    let _ = writeln!(out, "matched predictions            {}", a.matched_predictions);
    let _ = writeln!(out, "missing predictions            {}", a.missing_predictions.len());
    let _ = writeln!(
        out,
        "premise inconsistent           {}",
        a.premise_inconsistent.join(",")
    );
    match &a.dominant_error {
        Some(c) => {
            let _ = writeln!(
                out,
                "dominant error                 {} -> {} ({})",
                c.formal, c.predicted, c.count
            );
        }
        None => out.push_str("dominant error                 none\n"),
    }
    let _ = writeln!(
        out,
        "entailment <-> contradiction   {}",
        a.entailment_contradiction_confusions
    );
    for (tag, n) in &a.tag_counts {
        let _ = writeln!(out, "{:<30} {}", tag.as_str(), n);
    }
    let _ = writeln!(out, "reward total                   {}", a.reward_total);
    out
}

/// Predicts entailment for every case and claims formal grounding.
pub fn all_entailment_predictor(dataset: &[Case]) -> Vec<Prediction> {
    dataset
        .iter()
        .map(|c| Prediction {
            id: c.id.clone(),
            predicted: Label::Entailment,
            claims_formal: true,
            rationale: Some("constant entailment baseline".into()),
        })
        .collect()
}

/// Echoes the formal verdicts; inconsistent premises are answered neutral.
pub fn echo_verdict_predictor(verdicts: &[ClassifiedCase]) -> Vec<Prediction> {
    verdicts
        .iter()
        .map(|v| Prediction {
            id: v.case_id.clone(),
            predicted: Label::from_verdict(v.verdict).unwrap_or(Label::Neutral),
            claims_formal: true,
            rationale: Some("formal verdict".into()),
        })
        .collect()
}

/// The two refutation queries for a case: `P & !H` (empty iff entailed)
/// and `P & H` (empty iff contradicted).
pub fn query_clause_sets(case: &Case) -> [(&'static str, ClauseSet); 2] {
    let with = |h: Formula| {
        let parts = case.premise_forms.iter().cloned().chain([h]).collect();
        to_clauses(&Formula::and_all(parts))
    };
    [
        ("entail", with(!(case.hypothesis_form.clone()))),
        ("contra", with(case.hypothesis_form.clone())),
    ]
}
