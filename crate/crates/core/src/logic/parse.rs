//! Recursive-descent parser for the contract-logic concrete syntax.
//!
//! Precedence, tightest first: `!`, `&`, `|`, `->` (right-assoc), `<->`
//! (left-assoc). Arithmetic atoms are bracketed: `[x <= 30]`,
//! `[x - y < 7]`, `[0 - x <= -5]`.

use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{ArithAtom, CmpOp, Formula, PropAtom, Term};

/// Largest accepted magnitude for an arithmetic bound. Keeps the shifted
/// bounds produced by desugaring and the path sums of the difference solver
/// far from `i64` overflow.
pub const MAX_BOUND: i64 = 1_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("arithmetic atom at byte {offset} is not a difference constraint: {reason}")]
    ArithForm { offset: usize, reason: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::ArithForm { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Cmp(CmpOp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DoubleArrow => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::DoubleArrow, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("<=") {
            (Tok::Cmp(CmpOp::Le), 2)
        } else if rest.starts_with(">=") {
            (Tok::Cmp(CmpOp::Ge), 2)
        } else if rest.starts_with("!=") {
            (Tok::Cmp(CmpOp::Ne), 2)
        } else {
            match c {
                b'!' => (Tok::Bang, 1),
                b'&' => (Tok::Amp, 1),
                b'|' => (Tok::Pipe, 1),
                b'(' => (Tok::LParen, 1),
                b')' => (Tok::RParen, 1),
                b'[' => (Tok::LBracket, 1),
                b']' => (Tok::RBracket, 1),
                b',' => (Tok::Comma, 1),
                b'+' => (Tok::Plus, 1),
                b'-' => (Tok::Minus, 1),
                b'*' => (Tok::Star, 1),
                b'<' => (Tok::Cmp(CmpOp::Lt), 1),
                b'>' => (Tok::Cmp(CmpOp::Gt), 1),
                b'=' => (Tok::Cmp(CmpOp::Eq), 1),
                b'0'..=b'9' => {
                    let len = rest.bytes().take_while(u8::is_ascii_digit).count();
                    let value = rest[..len]
                        .parse::<i64>()
                        .ok()
                        .filter(|v| *v <= MAX_BOUND)
                        .ok_or_else(|| ParseError::ArithForm {
                            offset: start,
                            reason: format!("integer literal exceeds {MAX_BOUND}"),
                        })?;
                    (Tok::Int(value), len)
                }
                b'a'..=b'z' | b'_' => {
                    let len = rest
                        .bytes()
                        .take_while(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || *b == b'_')
                        .count();
                    (Tok::Ident(rest[..len].to_owned()), len)
                }
                _ => {
                    let found = rest.chars().next().unwrap();
                    return Err(ParseError::Syntax {
                        offset: start,
                        expected: vec!["a token".into()],
                        found: format!("character `{found}`"),
                    });
                }
            }
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

/// Parses one formula; the whole input must be consumed.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let f = p.iff()?;
    p.expect(&Tok::Eof, &["a binary connective", "end of input"])?;
    Ok(f)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| (*s).to_owned()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: &Tok, expected: &[&str]) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while self.eat(&Tok::DoubleArrow) {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while self.eat(&Tok::Pipe) {
            parts.push(self.conjunction()?);
        }
        Ok(Formula::or_all(parts))
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::Amp) {
            parts.push(self.unary()?);
        }
        Ok(Formula::and_all(parts))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Bang) {
            Ok(!(self.unary()?))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        const EXPECTED: &[&str] = &["identifier", "`true`", "`false`", "`!`", "`(`", "`[`"];
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(&Tok::RParen, &["`)`"])?;
                Ok(f)
            }
            Tok::LBracket => {
                let start = self.offset();
                self.bump();
                let atom = self.arith(start)?;
                self.expect(&Tok::RBracket, &["`]`"])?;
                Ok(Formula::Arith(atom))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => return Ok(Formula::True),
                    "false" => return Ok(Formula::False),
                    _ => {}
                }
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
                    loop {
                        match self.bump() {
                            Tok::Ident(a) => args.push(a),
                            _ => {
                                self.pos -= 1;
                                return Err(self.error(&["constant identifier"]));
                            }
                        }
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(&Tok::Comma, &["`,`", "`)`"])?;
                    }
                }
                Ok(Formula::Prop(PropAtom::new(name, args)))
            }
            _ => Err(self.error(EXPECTED)),
        }
    }

    fn arith(&mut self, start: usize) -> Result<ArithAtom, ParseError> {
        let mut lhs = LinearSum::default();
        self.sum(&mut lhs, 1)?;
        let op = match self.bump() {
            Tok::Cmp(op) => op,
            _ => {
                self.pos -= 1;
                return Err(self.error(&["`+`", "`-`", "comparison operator"]));
            }
        };
        // Move the right-hand side over: lhs - rhs <op> 0.
        self.sum(&mut lhs, -1)?;
        lhs.into_atom(op, start)
    }

    fn sum(&mut self, acc: &mut LinearSum, side: i64) -> Result<(), ParseError> {
        let mut sign = if self.eat(&Tok::Minus) {
            -1
        } else {
            self.eat(&Tok::Plus);
            1
        };
        loop {
            self.term(acc, sign * side)?;
            if self.eat(&Tok::Plus) {
                sign = 1;
            } else if self.eat(&Tok::Minus) {
                sign = -1;
            } else {
                return Ok(());
            }
        }
    }

    fn term(&mut self, acc: &mut LinearSum, sign: i64) -> Result<(), ParseError> {
        match self.bump() {
            Tok::Int(n) => {
                if self.eat(&Tok::Star) {
                    match self.bump() {
                        Tok::Ident(v) => acc.add_var(v, sign * n),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error(&["variable"]));
                        }
                    }
                } else {
                    acc.constant += sign * n;
                }
            }
            Tok::Ident(v) => {
                if self.eat(&Tok::Star) {
                    match self.bump() {
                        Tok::Int(n) => acc.add_var(v, sign * n),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error(&["integer"]));
                        }
                    }
                } else {
                    acc.add_var(v, sign);
                }
            }
            _ => {
                self.pos -= 1;
                return Err(self.error(&["integer", "variable"]));
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct LinearSum {
    coefficients: BTreeMap<String, i64>,
    constant: i64,
}

impl LinearSum {
    fn add_var(&mut self, name: String, coefficient: i64) {
        // `zero` names the constant-zero variable; it contributes nothing.
        if name != "zero" {
            *self.coefficients.entry(name).or_insert(0) += coefficient;
        }
    }

    fn into_atom(self, op: CmpOp, offset: usize) -> Result<ArithAtom, ParseError> {
        let form_err = |reason: String| ParseError::ArithForm { offset, reason };
        let vars: Vec<(String, i64)> = self.coefficients.into_iter().filter(|(_, c)| *c != 0).collect();
        if vars.len() > 2 {
            return Err(form_err(format!("{} variables, at most 2 allowed", vars.len())));
        }
        if let Some((v, c)) = vars.iter().find(|(_, c)| c.abs() != 1) {
            return Err(form_err(format!(
                "coefficient {c} on `{v}`, only unit coefficients allowed"
            )));
        }
        let bound = -self.constant;
        if bound.abs() > MAX_BOUND {
            return Err(form_err(format!("bound {bound} exceeds {MAX_BOUND}")));
        }
        let term = |v: &str| Term::Var(v.to_owned());
        let (left, right) = match vars.as_slice() {
            [] => (Term::Zero, Term::Zero),
            [(v, 1)] => (term(v), Term::Zero),
            [(v, _)] => (Term::Zero, term(v)),
            [(a, 1), (b, -1)] => (term(a), term(b)),
            [(a, -1), (b, 1)] => (term(b), term(a)),
            _ => return Err(form_err("both variables carry the same sign; not a difference".into())),
        };
        Ok(ArithAtom::new(left, right, op, bound))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(name: &str) -> Formula {
        Formula::atom(name)
    }

    #[test]
    fn conjunction_with_negation() {
        assert_eq!(parse("a & !b").unwrap(), Formula::And(vec![a("a"), !(a("b"))]));
    }

    #[test]
    fn deadline_implication() {
        let f = parse("ob_return(docs) -> [days <= 30]").unwrap();
        assert_eq!(
            f,
            Formula::implies(
                Formula::Prop(PropAtom::new("ob_return", vec!["docs".into()])),
                Formula::Arith(ArithAtom::unary("days", CmpOp::Le, 30)),
            )
        );
    }

    #[test]
    fn implication_is_right_associative() {
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            Formula::implies(a("a"), Formula::implies(a("b"), a("c")))
        );
    }

    #[test]
    fn iff_is_left_associative_and_loosest() {
        assert_eq!(
            parse("a <-> b -> c <-> d").unwrap(),
            Formula::iff(Formula::iff(a("a"), Formula::implies(a("b"), a("c"))), a("d"))
        );
    }

    #[test]
    fn precedence_and_flattening() {
        assert_eq!(
            parse("a & b | c & d & e").unwrap(),
            Formula::Or(vec![
                Formula::And(vec![a("a"), a("b")]),
                Formula::And(vec![a("c"), a("d"), a("e")]),
            ])
        );
        // Parentheses keep nesting explicit.
        assert_eq!(
            parse("(a & b) & c").unwrap(),
            Formula::And(vec![Formula::And(vec![a("a"), a("b")]), a("c")])
        );
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse("a&!b").unwrap(), parse("  a   &\n! b ").unwrap());
        assert_eq!(parse("p(x,y)").unwrap(), parse("p( x , y )").unwrap());
    }

    #[test]
    fn arithmetic_forms() {
        let atom = |s: &str| match parse(s).unwrap() {
            Formula::Arith(a) => a,
            other => panic!("not arithmetic: {other:?}"),
        };
        assert_eq!(
            atom("[x - y < 7]"),
            ArithAtom::new(Term::var("x"), Term::var("y"), CmpOp::Lt, 7)
        );
        assert_eq!(
            atom("[0 - x <= -5]"),
            ArithAtom::new(Term::Zero, Term::var("x"), CmpOp::Le, -5)
        );
        assert_eq!(
            atom("[x <= y + 3]"),
            ArithAtom::new(Term::var("x"), Term::var("y"), CmpOp::Le, 3)
        );
        assert_eq!(
            atom("[-y + x != 2]"),
            ArithAtom::new(Term::var("x"), Term::var("y"), CmpOp::Ne, 2)
        );
        assert_eq!(
            atom("[zero - x >= 1]"),
            ArithAtom::new(Term::Zero, Term::var("x"), CmpOp::Ge, 1)
        );
        assert_eq!(atom("[0 <= 3]"), ArithAtom::new(Term::Zero, Term::Zero, CmpOp::Le, 3));
        assert_eq!(
            atom("[x - x = 4]"),
            ArithAtom::new(Term::Zero, Term::Zero, CmpOp::Eq, 4)
        );
    }

    #[test]
    fn arithmetic_form_errors() {
        for bad in [
            "[x + y <= 3]",
            "[x - y + z <= 1]",
            "[2*x <= 3]",
            "[x + x <= 3]",
            "[x*3 > 0]",
        ] {
            match parse(bad) {
                Err(ParseError::ArithForm { offset, .. }) => assert_eq!(offset, 0, "{bad}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
        assert!(matches!(
            parse("[x <= 99999999999999999999]"),
            Err(ParseError::ArithForm { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_offset_and_expectations() {
        match parse("a & ") {
            Err(ParseError::Syntax {
                offset,
                expected,
                found,
            }) => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"identifier".to_string()));
                assert_eq!(found, "end of input");
            }
            other => panic!("{other:?}"),
        }
        match parse("(a | b") {
            Err(ParseError::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 6);
                assert_eq!(expected, vec!["`)`".to_string()]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(parse("a b").unwrap_err().offset(), 2);
        assert_eq!(parse("A").unwrap_err().offset(), 0);
        assert!(parse("p(a,)").is_err());
        assert!(parse("[x <= ]").is_err());
        assert!(parse("[x 3]").is_err());
    }

    #[test]
    fn constants_and_empty_args() {
        assert_eq!(
            parse("true | false").unwrap(),
            Formula::Or(vec![Formula::True, Formula::False])
        );
        assert_eq!(parse("p()").unwrap(), a("p"));
    }
}
