//! Tseitin encoding into a clause set whose variables are tied back to
//! their source atoms.

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use super::ast::{ArithAtom, CmpOp, Formula, PropAtom, Term};
use super::desugar::desugar;

/// Primitive difference constraint `left - right <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffAtom {
    pub left: Term,
    pub right: Term,
    pub bound: i64,
}

impl DiffAtom {
    /// The constraint equivalent to this atom being false:
    /// `!(x - y <= c)` is `y - x <= -c - 1`.
    pub fn negated(&self) -> DiffAtom {
        DiffAtom {
            left: self.right.clone(),
            right: self.left.clone(),
            bound: -self.bound - 1,
        }
    }
}

impl fmt::Display for DiffAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        ArithAtom::new(self.left.clone(), self.right.clone(), CmpOp::Le, self.bound).fmt(f)
    }
}

/// What a clause-set variable stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SourceAtom {
    Prop(PropAtom),
    Diff(DiffAtom),
    /// Definition variable introduced by the encoding.
    Fresh,
}

impl fmt::Display for SourceAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceAtom::Prop(p) => p.fmt(f),
            SourceAtom::Diff(d) => d.fmt(f),
            SourceAtom::Fresh => f.write_str("<fresh>"),
        }
    }
}

/// CNF over variables `1..=num_vars`; literals are signed variable indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClauseSet {
    clauses: Vec<Vec<i32>>,
    atoms: Vec<SourceAtom>,
    index: BTreeMap<SourceAtom, u32>,
}

impl ClauseSet {
    pub fn num_vars(&self) -> u32 {
        self.atoms.len() as u32
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Source atom of a variable, `None` when out of range.
    pub fn atom(&self, var: u32) -> Option<&SourceAtom> {
        var.checked_sub(1).and_then(|i| self.atoms.get(i as usize))
    }

    pub fn var_of(&self, atom: &SourceAtom) -> Option<u32> {
        self.index.get(atom).copied()
    }

    /// Iterates `(var, atom)` for every variable, fresh ones included.
    pub fn atoms(&self) -> impl Iterator<Item = (u32, &SourceAtom)> {
        self.atoms.iter().enumerate().map(|(i, a)| (i as u32 + 1, a))
    }

    /// Variable for a source atom, allocated on first use. `Fresh` always
    /// allocates a new variable.
    pub fn var_for(&mut self, atom: SourceAtom) -> u32 {
        if atom == SourceAtom::Fresh {
            return self.fresh();
        }
        if let Some(&v) = self.index.get(&atom) {
            return v;
        }
        self.atoms.push(atom.clone());
        let v = self.num_vars();
        self.index.insert(atom, v);
        v
    }

    fn fresh(&mut self) -> u32 {
        self.atoms.push(SourceAtom::Fresh);
        self.num_vars()
    }

    /// Adds a clause, dropping duplicate literals and skipping tautologies.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = i32>) {
        let mut clause: Vec<i32> = Vec::new();
        for lit in lits {
            debug_assert!(lit != 0 && lit.unsigned_abs() <= self.num_vars());
            if clause.contains(&-lit) {
                return;
            }
            if !clause.contains(&lit) {
                clause.push(lit);
            }
        }
        self.clauses.push(clause);
    }

    /// DIMACS-style dump with `c` comment lines naming each variable.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        for (v, atom) in self.atoms() {
            let _ = writeln!(out, "c {v} {atom}");
        }
        let _ = writeln!(out, "p cnf {} {}", self.num_vars(), self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let _ = write!(out, "{lit} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

enum Enc {
    Const(bool),
    Lit(i32),
}

impl Enc {
    fn negate(self) -> Enc {
        match self {
            Enc::Const(b) => Enc::Const(!b),
            Enc::Lit(l) => Enc::Lit(-l),
        }
    }
}

/// Equisatisfiable CNF for `f`. Nodes that are not yet desugared are
/// desugared on the fly; constants are folded away, so a formula that folds
/// to `false` yields a single empty clause and one that folds to `true`
/// yields no clauses.
pub fn tseitin(f: &Formula) -> ClauseSet {
    let mut cs = ClauseSet::default();
    assert_top(&mut cs, f);
    cs
}

fn assert_top(cs: &mut ClauseSet, f: &Formula) {
    match f {
        Formula::And(children) => children.iter().for_each(|c| assert_top(cs, c)),
        Formula::Or(children) => {
            let mut lits = Vec::new();
            for c in children {
                match encode(cs, c) {
                    Enc::Const(true) => return,
                    Enc::Const(false) => {}
                    Enc::Lit(l) => lits.push(l),
                }
            }
            cs.add_clause(lits);
        }
        Formula::Iff(..) => assert_top(cs, &desugar(f)),
        Formula::Arith(a) if a.op != CmpOp::Le => assert_top(cs, &desugar(f)),
        _ => match encode(cs, f) {
            Enc::Const(true) => {}
            Enc::Const(false) => cs.add_clause([]),
            Enc::Lit(l) => cs.add_clause([l]),
        },
    }
}

fn encode(cs: &mut ClauseSet, f: &Formula) -> Enc {
    match f {
        Formula::True => Enc::Const(true),
        Formula::False => Enc::Const(false),
        Formula::Prop(p) => Enc::Lit(cs.var_for(SourceAtom::Prop(p.clone())) as i32),
        Formula::Arith(a) if a.op == CmpOp::Le => {
            let atom = DiffAtom {
                left: a.left.clone(),
                right: a.right.clone(),
                bound: a.bound,
            };
            Enc::Lit(cs.var_for(SourceAtom::Diff(atom)) as i32)
        }
        Formula::Arith(_) | Formula::Iff(..) => encode(cs, &desugar(f)),
        Formula::Not(c) => encode(cs, c).negate(),
        Formula::And(children) => {
            let mut lits = Vec::with_capacity(children.len());
            for c in children {
                match encode(cs, c) {
                    Enc::Const(false) => return Enc::Const(false),
                    Enc::Const(true) => {}
                    Enc::Lit(l) => lits.push(l),
                }
            }
            define_and(cs, lits)
        }
        Formula::Or(children) => {
            let mut lits = Vec::with_capacity(children.len());
            for c in children {
                match encode(cs, c) {
                    Enc::Const(true) => return Enc::Const(true),
                    Enc::Const(false) => {}
                    Enc::Lit(l) => lits.push(-l),
                }
            }
            // a | b is !(!a & !b)
            define_and(cs, lits).negate()
        }
        Formula::Implies(l, r) => {
            let lhs = encode(cs, l);
            let rhs = encode(cs, r);
            match (lhs, rhs) {
                (Enc::Const(false), _) | (_, Enc::Const(true)) => Enc::Const(true),
                (Enc::Const(true), rhs) => rhs,
                (Enc::Lit(a), Enc::Const(false)) => Enc::Lit(-a),
                (Enc::Lit(a), Enc::Lit(b)) => define_and(cs, vec![a, -b]).negate(),
            }
        }
    }
}

/// Fresh `g <-> (l1 & ... & ln)`.
fn define_and(cs: &mut ClauseSet, lits: Vec<i32>) -> Enc {
    match lits.as_slice() {
        [] => return Enc::Const(true),
        [l] => return Enc::Lit(*l),
        _ => {}
    }
    let g = cs.fresh() as i32;
    for &l in &lits {
        cs.add_clause([-g, l]);
    }
    cs.add_clause(std::iter::once(g).chain(lits.iter().map(|l| -l)));
    Enc::Lit(g)
}
