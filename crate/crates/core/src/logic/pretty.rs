use std::fmt::{self, Write};

use super::ast::{ArithAtom, Formula, Term};

// Binding strength: larger binds tighter.
const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const NOT: u8 = 5;
const ATOM: u8 = 6;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => IFF,
        Formula::Implies(..) => IMPLIES,
        Formula::Or(_) => OR,
        Formula::And(_) => AND,
        Formula::Not(_) => NOT,
        _ => ATOM,
    }
}

/// Renders a formula with the fewest parentheses that still parse back to
/// the same tree.
pub fn pretty(f: &Formula) -> String {
    f.to_string()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self)
    }
}

fn write_child(out: &mut fmt::Formatter<'_>, child: &Formula, parens: bool) -> fmt::Result {
    if parens {
        out.write_char('(')?;
        write_formula(out, child)?;
        out.write_char(')')
    } else {
        write_formula(out, child)
    }
}

fn write_formula(out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
    match f {
        Formula::Prop(p) => write!(out, "{p}"),
        Formula::Arith(a) => write!(out, "{a}"),
        Formula::True => out.write_str("true"),
        Formula::False => out.write_str("false"),
        Formula::Not(c) => {
            out.write_char('!')?;
            write_child(out, c, level(c) < NOT)
        }
        Formula::And(cs) | Formula::Or(cs) => {
            let (own, sep) = if matches!(f, Formula::And(_)) {
                (AND, " & ")
            } else {
                (OR, " | ")
            };
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.write_str(sep)?;
                }
                // A same-level child was parenthesized in the source, otherwise
                // the parser would have flattened it.
                write_child(out, c, level(c) <= own)?;
            }
            Ok(())
        }
        Formula::Implies(l, r) => {
            write_child(out, l, level(l) <= IMPLIES)?;
            out.write_str(" -> ")?;
            write_child(out, r, level(r) < IMPLIES)
        }
        Formula::Iff(l, r) => {
            write_child(out, l, level(l) < IFF)?;
            out.write_str(" <-> ")?;
            write_child(out, r, level(r) <= IFF)
        }
    }
}

impl fmt::Display for ArithAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = self.op.symbol();
        match (&self.left, &self.right) {
            (Term::Var(l), Term::Zero) => write!(f, "[{l} {op} {}]", self.bound),
            (Term::Var(l), Term::Var(r)) => write!(f, "[{l} - {r} {op} {}]", self.bound),
            (Term::Zero, Term::Var(r)) => write!(f, "[0 - {r} {op} {}]", self.bound),
            (Term::Zero, Term::Zero) => write!(f, "[0 {op} {}]", self.bound),
        }
    }
}
