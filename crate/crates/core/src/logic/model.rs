use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::{Formula, Term};

/// Truth values for propositional atoms (keyed by their concrete syntax)
/// and integer values for arithmetic variables. Missing entries read as
/// `false` and `0`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    pub props: BTreeMap<String, bool>,
    pub ints: BTreeMap<String, i64>,
}

impl Model {
    pub fn int_value(&self, term: &Term) -> i64 {
        match term {
            Term::Zero => 0,
            Term::Var(v) => self.ints.get(v).copied().unwrap_or(0),
        }
    }

    pub fn eval(&self, f: &Formula) -> bool {
        match f {
            Formula::Prop(p) => self.props.get(&p.to_string()).copied().unwrap_or(false),
            Formula::Arith(a) => {
                let diff = self.int_value(&a.left) as i128 - self.int_value(&a.right) as i128;
                a.op.holds(diff.clamp(i64::MIN as i128, i64::MAX as i128) as i64, a.bound)
            }
            Formula::True => true,
            Formula::False => false,
            Formula::Not(c) => !self.eval(c),
            Formula::And(cs) => cs.iter().all(|c| self.eval(c)),
            Formula::Or(cs) => cs.iter().any(|c| self.eval(c)),
            Formula::Implies(l, r) => !self.eval(l) || self.eval(r),
            Formula::Iff(l, r) => self.eval(l) == self.eval(r),
        }
    }

    /// Fills in defaults for every atom and variable of `f` that the model
    /// does not mention, so the model reads as a total assignment.
    pub fn complete_for(&mut self, f: &Formula) {
        for p in f.prop_atoms() {
            self.props.entry(p.to_string()).or_insert(false);
        }
        for v in f.int_vars() {
            self.ints.entry(v).or_insert(0);
        }
    }
}
