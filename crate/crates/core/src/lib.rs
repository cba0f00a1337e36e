//! Strict formal entailment over contract logic, minimal-axiom abduction for
//! undetermined cases, and an evaluation harness that measures how far
//! legal-interpretation labels drift from formally grounded ones.

pub mod abduce;
pub mod dataset;
pub mod entail;
pub mod harness;
pub mod logic;
pub mod review;
pub mod sat;

pub use abduce::{abduce, build_minimal_pair, review_question, AbductionResult, MinimalPair, Solution, Target};
pub use dataset::{load_dataset, load_predictions, Axiom, AxiomSource, Case, Label, Prediction};
pub use entail::{classify, ClassifiedCase, Verdict};
pub use harness::{evaluate, FailureTag, Report};
pub use logic::{parse, pretty, Formula};
pub use review::{Answer, ReviewEvent, ReviewService, ReviewStatus};
