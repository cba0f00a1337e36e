use super::ast::{ArithAtom, CmpOp, Formula};

/// Rewrites `<->` into two implications and every arithmetic comparison into
/// `x - y <= c` form under integer semantics.
pub fn desugar(f: &Formula) -> Formula {
    match f {
        Formula::Prop(_) | Formula::True | Formula::False => f.clone(),
        Formula::Arith(a) => desugar_arith(a),
        Formula::Not(c) => !(desugar(c)),
        Formula::And(cs) => Formula::And(cs.iter().map(desugar).collect()),
        Formula::Or(cs) => Formula::Or(cs.iter().map(desugar).collect()),
        Formula::Implies(l, r) => Formula::implies(desugar(l), desugar(r)),
        Formula::Iff(l, r) => {
            let (l, r) = (desugar(l), desugar(r));
            Formula::And(vec![Formula::implies(l.clone(), r.clone()), Formula::implies(r, l)])
        }
    }
}

fn desugar_arith(a: &ArithAtom) -> Formula {
    let le = |left: &_, right: &_, bound: i64| {
        Formula::Arith(ArithAtom::new(
            Clone::clone(left),
            Clone::clone(right),
            CmpOp::Le,
            bound,
        ))
    };
    let (x, y, c) = (&a.left, &a.right, a.bound);
    match a.op {
        CmpOp::Le => le(x, y, c),
        CmpOp::Lt => le(x, y, c - 1),
        CmpOp::Ge => le(y, x, -c),
        CmpOp::Gt => le(y, x, -c - 1),
        CmpOp::Eq => Formula::And(vec![le(x, y, c), le(y, x, -c)]),
        CmpOp::Ne => Formula::Or(vec![le(x, y, c - 1), le(y, x, -c - 1)]),
    }
}

/// True when the formula contains no `<->` and only `<=` comparisons.
pub fn is_desugared(f: &Formula) -> bool {
    match f {
        Formula::Prop(_) | Formula::True | Formula::False => true,
        Formula::Arith(a) => a.op == CmpOp::Le,
        Formula::Not(c) => is_desugared(c),
        Formula::And(cs) | Formula::Or(cs) => cs.iter().all(is_desugared),
        Formula::Implies(l, r) => is_desugared(l) && is_desugared(r),
        Formula::Iff(..) => false,
    }
}
