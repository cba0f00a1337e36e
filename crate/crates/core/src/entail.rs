//! Strict three-way entailment from two refutation queries.
//!
//! With `P` the conjunction of the premise clauses: `P` unsatisfiable gives
//! `PremiseInconsistent`; `P & !H` unsatisfiable gives `Entailment`;
//! `P & H` unsatisfiable gives `Contradiction`; otherwise `Neutral`, with a
//! model of each side as evidence.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::{to_clauses, Formula, Model};
use crate::sat::{solve, SatResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Entailment,
    Contradiction,
    Neutral,
    PremiseInconsistent,
}

impl Verdict {
    pub const ALL: [Verdict; 4] = [
        Verdict::Entailment,
        Verdict::Contradiction,
        Verdict::Neutral,
        Verdict::PremiseInconsistent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Entailment => "entailment",
            Verdict::Contradiction => "contradiction",
            Verdict::Neutral => "neutral",
            Verdict::PremiseInconsistent => "premise_inconsistent",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Countermodels surfaced for a `Neutral` verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeutralWitnesses {
    /// Satisfies `P & H`.
    pub hypothesis_holds: Model,
    /// Satisfies `P & !H`.
    pub hypothesis_fails: Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<NeutralWitnesses>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedCase {
    pub case_id: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<NeutralWitnesses>,
}

impl ClassifiedCase {
    pub fn new(case_id: impl Into<String>, c: Classification) -> Self {
        Self {
            case_id: case_id.into(),
            verdict: c.verdict,
            witnesses: c.witnesses,
        }
    }
}

/// Satisfiability of the conjunction of `parts`.
pub fn check_sat(parts: &[&Formula]) -> SatResult {
    let f = Formula::and_all(parts.iter().map(|f| (*f).clone()).collect());
    solve(&to_clauses(&f))
}

pub fn classify(premise: &[Formula], hypothesis: &Formula) -> Classification {
    let mut parts: Vec<&Formula> = premise.iter().collect();
    if !check_sat(&parts).is_sat() {
        return Classification {
            verdict: Verdict::PremiseInconsistent,
            witnesses: None,
        };
    }

    let negated = !(hypothesis.clone());
    parts.push(&negated);
    let fails = check_sat(&parts);
    if !fails.is_sat() {
        return Classification {
            verdict: Verdict::Entailment,
            witnesses: None,
        };
    }

    parts.pop();
    parts.push(hypothesis);
    let holds = check_sat(&parts);
    if !holds.is_sat() {
        return Classification {
            verdict: Verdict::Contradiction,
            witnesses: None,
        };
    }

    let whole = Formula::and_all(premise.iter().cloned().chain([hypothesis.clone()]).collect());
    let complete = |r: SatResult| {
        let mut m = r.model.expect("sat result carries a model");
        m.complete_for(&whole);
        m
    };
    Classification {
        verdict: Verdict::Neutral,
        witnesses: Some(NeutralWitnesses {
            hypothesis_holds: complete(holds),
            hypothesis_fails: complete(fails),
        }),
    }
}
