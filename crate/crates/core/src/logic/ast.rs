use std::collections::BTreeSet;
use std::fmt;

/// A ground propositional atom such as `ob_return(docs)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl PropAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn nullary(predicate: impl Into<String>) -> Self {
        Self::new(predicate, Vec::new())
    }
}

impl fmt::Display for PropAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

/// One side of a difference constraint. `Zero` is the distinguished
/// constant variable whose value is always 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Zero,
    Var(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Term::Zero => None,
            Term::Var(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

/// `left - right <op> bound` over the integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArithAtom {
    pub left: Term,
    pub right: Term,
    pub op: CmpOp,
    pub bound: i64,
}

impl ArithAtom {
    pub fn new(left: Term, right: Term, op: CmpOp, bound: i64) -> Self {
        Self { left, right, op, bound }
    }

    /// `var <op> bound`, i.e. `var - zero <op> bound`.
    pub fn unary(var: impl Into<String>, op: CmpOp, bound: i64) -> Self {
        Self::new(Term::var(var), Term::Zero, op, bound)
    }
}

/// Quantifier-free contract-logic formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Prop(PropAtom),
    Arith(ArithAtom),
    True,
    False,
    Not(Box<Formula>),
    /// At least two conjuncts.
    And(Vec<Formula>),
    /// At least two disjuncts.
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl std::ops::Not for Formula {
    type Output = Formula;

    fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }
}

impl Formula {
    pub fn atom(predicate: &str) -> Self {
        Formula::Prop(PropAtom::nullary(predicate))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Self {
        Formula::Iff(Box::new(lhs), Box::new(rhs))
    }

    /// Conjunction that respects the arity invariant: no children gives
    /// `true`, one child is returned as is.
    pub fn and_all(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction counterpart of [`Formula::and_all`].
    pub fn or_all(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    /// Number of AST nodes; atoms and connectives each count one.
    pub fn node_count(&self) -> usize {
        match self {
            Formula::Prop(_) | Formula::Arith(_) | Formula::True | Formula::False => 1,
            Formula::Not(c) => 1 + c.node_count(),
            Formula::And(cs) | Formula::Or(cs) => 1 + cs.iter().map(Formula::node_count).sum::<usize>(),
            Formula::Implies(l, r) | Formula::Iff(l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    pub fn prop_atoms(&self) -> BTreeSet<PropAtom> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |f| {
            if let Formula::Prop(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// Integer variable names (the `zero` constant excluded).
    pub fn int_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |f| {
            if let Formula::Arith(a) = f {
                for t in [&a.left, &a.right] {
                    if let Some(name) = t.name() {
                        out.insert(name.to_owned());
                    }
                }
            }
        });
        out
    }

    fn visit_atoms(&self, visit: &mut impl FnMut(&Formula)) {
        match self {
            Formula::Prop(_) | Formula::Arith(_) | Formula::True | Formula::False => visit(self),
            Formula::Not(c) => c.visit_atoms(visit),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.visit_atoms(visit)),
            Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.visit_atoms(visit);
                r.visit_atoms(visit);
            }
        }
    }
}

/// Checks the `[a-z_][a-z0-9_]*` identifier shape.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}
