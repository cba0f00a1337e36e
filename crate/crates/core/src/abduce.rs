//! Minimal-axiom abduction over a per-case candidate pool.
//!
//! For an undetermined case, finds every subset-minimal set `A` of pool
//! axioms (up to a cardinality bound) such that the premise together with
//! `A` stays consistent and settles the hypothesis in the requested
//! direction. Solutions are scored so that few, small axioms rank first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Axiom, Case};
use crate::entail::{check_sat, classify, Verdict};
use crate::logic::{as_text, Formula};

pub const DEFAULT_K: usize = 3;
pub const MAX_POOL: usize = 24;

/// Fixed question put to a reviewer before the axiom lines.
pub const REVIEW_QUESTION: &str =
    "Does standard contract law or the contractual context implicitly establish this assumption?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Entailment,
    Contradiction,
}

impl Target {
    pub const BOTH: [Target; 2] = [Target::Entailment, Target::Contradiction];

    pub fn verdict(self) -> Verdict {
        match self {
            Target::Entailment => Verdict::Entailment,
            Target::Contradiction => Verdict::Contradiction,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Entailment => "entailment",
            Target::Contradiction => "contradiction",
        }
    }
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "entailment" => Ok(Target::Entailment),
            "contradiction" => Ok(Target::Contradiction),
            other => Err(format!("unknown target `{other}`")),
        }
    }
}

/// Complexity weights: cardinality dominates node count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreWeights {
    pub per_axiom: u64,
    pub per_node: u64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self {
            per_axiom: 100,
            per_node: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    /// Sorted ascending.
    pub axiom_ids: Vec<String>,
    pub score: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbductionResult {
    pub case_id: String,
    pub target: Target,
    pub solutions: Vec<Solution>,
    pub exhaustive_up_to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalPair {
    pub case_id: String,
    pub axiom_ids: Vec<String>,
    #[serde(with = "as_text")]
    pub modified_hypothesis: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbductionError {
    #[error("case `{case_id}` is {verdict}, abduction needs a neutral case")]
    NotNeutral { case_id: String, verdict: Verdict },
    #[error("axiom pool of {size} exceeds the limit of {MAX_POOL}")]
    PoolTooLarge { size: usize },
    #[error("cardinality bound must be at least 1")]
    ZeroBound,
    #[error("an empty axiom set is not a solution")]
    EmptySolution,
    #[error("unknown axiom id `{0}`")]
    UnknownAxiomId(String),
    #[error("minimal pair for case `{case_id}` classified as {verdict}, expected entailment")]
    PairNotEntailed { case_id: String, verdict: Verdict },
}

/// `100·|A| + Σ node_count` under the default weights.
pub fn score(axioms: &[&Axiom]) -> Result<u64, AbductionError> {
    score_with(axioms, ScoreWeights::default())
}

pub fn score_with(axioms: &[&Axiom], weights: ScoreWeights) -> Result<u64, AbductionError> {
    if axioms.is_empty() {
        return Err(AbductionError::EmptySolution);
    }
    let nodes: u64 = axioms.iter().map(|a| a.formula.node_count() as u64).sum();
    Ok(weights.per_axiom * axioms.len() as u64 + weights.per_node * nodes)
}

pub fn abduce(case: &Case, target: Target, k: usize) -> Result<AbductionResult, AbductionError> {
    abduce_with(case, target, k, ScoreWeights::default())
}

pub fn abduce_with(
    case: &Case,
    target: Target,
    k: usize,
    weights: ScoreWeights,
) -> Result<AbductionResult, AbductionError> {
    if k == 0 {
        return Err(AbductionError::ZeroBound);
    }
    let pool = &case.axiom_pool;
    if pool.len() > MAX_POOL {
        return Err(AbductionError::PoolTooLarge { size: pool.len() });
    }
    let verdict = classify(&case.premise_forms, &case.hypothesis_form).verdict;
    if verdict != Verdict::Neutral {
        return Err(AbductionError::NotNeutral {
            case_id: case.id.clone(),
            verdict,
        });
    }

    let goal = match target {
        Target::Entailment => !(case.hypothesis_form.clone()),
        Target::Contradiction => case.hypothesis_form.clone(),
    };
    let qualifies = |mask: u32| {
        let mut parts: Vec<&Formula> = case.premise_forms.iter().collect();
        parts.extend(members(mask).map(|i| &pool[i].formula));
        let consistent_premise_len = parts.len();
        parts.push(&goal);
        // Settles the hypothesis first; consistency is only checked for sets
        // that pass, since most candidates fail the first test.
        !check_sat(&parts).is_sat() && check_sat(&parts[..consistent_premise_len]).is_sat()
    };

    // Increasing cardinality with superset pruning: anything that survives
    // pruning and qualifies has no qualifying proper subset.
    let mut found: Vec<u32> = Vec::new();
    for size in 1..=k.min(pool.len()) {
        for mask in combinations(pool.len(), size) {
            if found.iter().any(|f| f & mask == *f) {
                continue;
            }
            if qualifies(mask) {
                found.push(mask);
            }
        }
    }

    let mut solutions: Vec<Solution> = found
        .into_iter()
        .map(|mask| {
            let axioms: Vec<&Axiom> = members(mask).map(|i| &pool[i]).collect();
            let mut axiom_ids: Vec<String> = axioms.iter().map(|a| a.id.clone()).collect();
            axiom_ids.sort();
            Solution {
                score: score_with(&axioms, weights).expect("solutions are nonempty"),
                axiom_ids,
            }
        })
        .collect();
    solutions.sort_by(|a, b| a.score.cmp(&b.score).then_with(|| a.axiom_ids.cmp(&b.axiom_ids)));
    Ok(AbductionResult {
        case_id: case.id.clone(),
        target,
        solutions,
        exhaustive_up_to: k,
    })
}

fn members(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

/// All `size`-element subsets of `0..n` as bitmasks, in lexicographic
/// order of their index lists.
fn combinations(n: usize, size: usize) -> Vec<u32> {
    fn go(start: usize, n: usize, left: usize, mask: u32, out: &mut Vec<u32>) {
        if left == 0 {
            out.push(mask);
            return;
        }
        for i in start..=n - left {
            go(i + 1, n, left - 1, mask | 1 << i, out);
        }
    }
    let mut out = Vec::new();
    if size <= n {
        go(0, n, size, 0, &mut out);
    }
    out
}

fn resolve<'c>(case: &'c Case, ids: &[String]) -> Result<Vec<&'c Axiom>, AbductionError> {
    if ids.is_empty() {
        return Err(AbductionError::EmptySolution);
    }
    ids.iter()
        .map(|id| case.axiom(id).ok_or_else(|| AbductionError::UnknownAxiomId(id.clone())))
        .collect()
}

/// Rewrites the hypothesis as `(⋀ A) -> H` and confirms it is now entailed.
pub fn build_minimal_pair(case: &Case, axiom_ids: &[String]) -> Result<MinimalPair, AbductionError> {
    let mut ids = axiom_ids.to_vec();
    ids.sort();
    let axioms = resolve(case, &ids)?;
    let assumptions = Formula::and_all(axioms.iter().map(|a| a.formula.clone()).collect());
    let modified = Formula::implies(assumptions, case.hypothesis_form.clone());
    let verdict = classify(&case.premise_forms, &modified).verdict;
    if verdict != Verdict::Entailment {
        return Err(AbductionError::PairNotEntailed {
            case_id: case.id.clone(),
            verdict,
        });
    }
    Ok(MinimalPair {
        case_id: case.id.clone(),
        axiom_ids: ids,
        modified_hypothesis: modified,
    })
}

/// The reviewer question followed by one `- id: gloss | formula` line per
/// axiom, in id order.
pub fn review_question(case: &Case, axiom_ids: &[String]) -> Result<String, AbductionError> {
    let mut ids = axiom_ids.to_vec();
    ids.sort();
    let axioms = resolve(case, &ids)?;
    let mut out = String::from(REVIEW_QUESTION);
    for a in axioms {
        let gloss = a.gloss.replace(['\r', '\n'], " ");
        out.push_str(&format!("\n- {}: {} | {}", a.id, gloss.trim(), a.formula));
    }
    Ok(out)
}
