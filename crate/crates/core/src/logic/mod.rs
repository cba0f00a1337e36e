//! The contract-logic language: ground propositional atoms plus integer
//! difference constraints under the usual connectives.

mod ast;
mod cnf;
mod desugar;
mod model;
mod parse;
mod pretty;

pub use ast::{is_identifier, ArithAtom, CmpOp, Formula, PropAtom, Term};
pub use cnf::{tseitin, ClauseSet, DiffAtom, SourceAtom};
pub use desugar::{desugar, is_desugared};
pub use model::Model;
pub use parse::{parse, ParseError, MAX_BOUND};
pub use pretty::pretty;

/// Desugars and encodes in one step.
pub fn to_clauses(f: &Formula) -> ClauseSet {
    tseitin(&desugar(f))
}

/// Serde adapter storing a formula as its concrete syntax.
pub mod as_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::{parse, Formula};

    pub fn serialize<S: Serializer>(f: &Formula, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(f)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(D::Error::custom)
    }
}
