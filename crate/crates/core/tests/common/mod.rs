//! Shared test support: a seeded formula generator, a proptest strategy and
//! brute-force oracles that share nothing with the library's evaluator or
//! solver.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use gapcheck_core::dataset::{load_dataset, Case};
use gapcheck_core::logic::{ArithAtom, CmpOp, Formula, PropAtom, Term};
use gapcheck_core::Verdict;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_CONST: i64 = 40;
pub const MAX_DEPTH: u32 = 6;
/// Integer range enumerated by the grid oracle. With at most two variables
/// and constants of magnitude at most 41 after strictness is removed, every
/// satisfiable constraint set has a solution within two edge lengths of 0.
pub const GRID: i64 = 90;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn toy() -> Vec<Case> {
    load_dataset(fixture("toy.jsonl")).expect("toy corpus loads")
}

pub fn prop_pool() -> Vec<PropAtom> {
    vec![
        PropAtom::nullary("s"),
        PropAtom::new("p", vec!["a".into()]),
        PropAtom::new("q", vec!["a".into(), "b".into()]),
        PropAtom::new("r", vec!["b".into()]),
    ]
}

pub const INT_VARS: [&str; 2] = ["x", "y"];

const OPS: [CmpOp; 6] = [CmpOp::Le, CmpOp::Lt, CmpOp::Ge, CmpOp::Gt, CmpOp::Eq, CmpOp::Ne];

/// Atom shapes the parser produces: `x`, `0 - x`, `x - y`, or `0`.
fn term_pair(choice: u32, a: usize, b: usize) -> (Term, Term) {
    let v = |i: usize| Term::var(INT_VARS[i]);
    match choice {
        0 => (v(a), Term::Zero),
        1 => (Term::Zero, v(a)),
        2 if a != b => (v(a), v(b)),
        2 => (v(a), Term::Zero),
        _ => (Term::Zero, Term::Zero),
    }
}

/// Seeded generator over at most four propositional atoms and two integer
/// variables.
pub struct FormulaGen {
    rng: ChaCha8Rng,
    props: Vec<PropAtom>,
}

impl FormulaGen {
    pub fn new(seed: u64) -> Self {
        FormulaGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            props: prop_pool(),
        }
    }

    fn leaf(&mut self) -> Formula {
        match self.rng.gen_range(0..20) {
            0 => Formula::True,
            1 => Formula::False,
            2..=10 => Formula::Prop(self.props[self.rng.gen_range(0..self.props.len())].clone()),
            _ => {
                let shape = match self.rng.gen_range(0..20) {
                    0 => 3,
                    n => n % 3,
                };
                let (left, right) = term_pair(shape, self.rng.gen_range(0..2), self.rng.gen_range(0..2));
                let op = OPS[self.rng.gen_range(0..OPS.len())];
                Formula::Arith(ArithAtom::new(
                    left,
                    right,
                    op,
                    self.rng.gen_range(-MAX_CONST..=MAX_CONST),
                ))
            }
        }
    }

    pub fn formula_at(&mut self, depth: u32) -> Formula {
        if depth == 0 || self.rng.gen_ratio(1, 4) {
            return self.leaf();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..6) {
            0 => Formula::Not(Box::new(self.formula_at(d))),
            1 | 2 => {
                let n = self.rng.gen_range(2..=3);
                let parts = (0..n).map(|_| self.formula_at(d)).collect();
                if self.rng.gen_bool(0.5) {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
            3 | 4 => Formula::Implies(Box::new(self.formula_at(d)), Box::new(self.formula_at(d))),
            _ => Formula::Iff(Box::new(self.formula_at(d)), Box::new(self.formula_at(d))),
        }
    }

    /// Half plain trees, half conjunctions of shallower trees (which are
    /// far more often unsatisfiable).
    pub fn formula(&mut self) -> Formula {
        if self.rng.gen_bool(0.5) {
            let depth = self.rng.gen_range(1..=MAX_DEPTH);
            return self.formula_at(depth);
        }
        let n = self.rng.gen_range(4..=8);
        let parts = (0..n)
            .map(|_| {
                let depth = self.rng.gen_range(1..=3);
                self.formula_at(depth)
            })
            .collect();
        Formula::And(parts)
    }

    /// A premise of one to three formulas and a hypothesis.
    pub fn problem(&mut self) -> (Vec<Formula>, Formula) {
        let n = self.rng.gen_range(1..=3);
        let premise = (0..n).map(|_| self.formula_at(3)).collect();
        (premise, self.formula_at(3))
    }
}

fn arb_leaf() -> impl Strategy<Value = Formula> {
    let props = prop_pool();
    prop_oneof![
        1 => Just(Formula::True),
        1 => Just(Formula::False),
        8 => prop::sample::select(props).prop_map(Formula::Prop),
        8 => (0u32..4, 0usize..2, 0usize..2, prop::sample::select(OPS.to_vec()), -MAX_CONST..=MAX_CONST)
            .prop_map(|(shape, a, b, op, c)| {
                let (l, r) = term_pair(shape, a, b);
                Formula::Arith(ArithAtom::new(l, r, op, c))
            }),
    ]
}

pub fn arb_formula() -> impl Strategy<Value = Formula> {
    arb_leaf().prop_recursive(MAX_DEPTH, 64, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::Iff(Box::new(a), Box::new(b))),
        ]
    })
}

/// Evaluation with caller-supplied atom valuations.
pub fn eval(f: &Formula, prop: &dyn Fn(&PropAtom) -> bool, arith: &dyn Fn(&ArithAtom) -> bool) -> bool {
    match f {
        Formula::Prop(p) => prop(p),
        Formula::Arith(a) => arith(a),
        Formula::True => true,
        Formula::False => false,
        Formula::Not(g) => !eval(g, prop, arith),
        Formula::And(gs) => gs.iter().all(|g| eval(g, prop, arith)),
        Formula::Or(gs) => gs.iter().any(|g| eval(g, prop, arith)),
        Formula::Implies(a, b) => !eval(a, prop, arith) || eval(b, prop, arith),
        Formula::Iff(a, b) => eval(a, prop, arith) == eval(b, prop, arith),
    }
}

pub fn term_value(t: &Term, ints: &BTreeMap<String, i64>) -> i64 {
    match t {
        Term::Zero => 0,
        Term::Var(v) => ints.get(v).copied().unwrap_or(0),
    }
}

pub fn arith_holds(a: &ArithAtom, ints: &BTreeMap<String, i64>) -> bool {
    let d = term_value(&a.left, ints) - term_value(&a.right, ints);
    let c = a.bound;
    match a.op {
        CmpOp::Le => d <= c,
        CmpOp::Lt => d < c,
        CmpOp::Ge => d >= c,
        CmpOp::Gt => d > c,
        CmpOp::Eq => d == c,
        CmpOp::Ne => d != c,
    }
}

/// Evaluates against concrete values; unknown atoms read as false / 0.
pub fn eval_in(f: &Formula, props: &BTreeMap<String, bool>, ints: &BTreeMap<String, i64>) -> bool {
    eval(f, &|p| props.get(&p.to_string()).copied().unwrap_or(false), &|a| {
        arith_holds(a, ints)
    })
}

#[derive(Default)]
struct Atoms {
    props: BTreeSet<PropAtom>,
    arith: Vec<ArithAtom>,
    vars: BTreeSet<String>,
}

fn collect(f: &Formula, out: &mut Atoms) {
    match f {
        Formula::Prop(p) => {
            out.props.insert(p.clone());
        }
        Formula::Arith(a) => {
            if !out.arith.contains(a) {
                out.arith.push(a.clone());
            }
            for t in [&a.left, &a.right] {
                if let Term::Var(v) = t {
                    out.vars.insert(v.clone());
                }
            }
        }
        Formula::True | Formula::False => {}
        Formula::Not(g) => collect(g, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect(g, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect(a, out);
            collect(b, out);
        }
    }
}

fn atoms_of(parts: &[&Formula]) -> Atoms {
    let mut atoms = Atoms::default();
    for f in parts {
        collect(f, &mut atoms);
    }
    atoms
}

fn holds_all(parts: &[&Formula], prop: &dyn Fn(&PropAtom) -> bool, arith: &dyn Fn(&ArithAtom) -> bool) -> bool {
    parts.iter().all(|f| eval(f, prop, arith))
}

pub type Witness = (BTreeMap<String, bool>, BTreeMap<String, i64>);

/// Enumerates every propositional assignment and every integer point in
/// `[-range, range]^vars`. At most two integer variables.
pub fn grid_model(parts: &[&Formula], range: i64) -> Option<Witness> {
    let atoms = atoms_of(parts);
    let vars: Vec<String> = atoms.vars.iter().cloned().collect();
    assert!(vars.len() <= 2, "grid oracle handles at most two integer variables");
    // One representative point per distinct truth vector of the arithmetic atoms.
    let index = |t: &Term| match t {
        Term::Zero => 0,
        Term::Var(v) => 1 + vars.iter().position(|w| w == v).unwrap(),
    };
    let compiled: Vec<(usize, usize, &ArithAtom)> = atoms
        .arith
        .iter()
        .map(|a| (index(&a.left), index(&a.right), a))
        .collect();
    let mut classes: BTreeMap<Vec<bool>, [i64; 3]> = BTreeMap::new();
    let span = |used: bool| if used { -range..=range } else { 0..=0 };
    for x in span(!vars.is_empty()) {
        for y in span(vars.len() > 1) {
            let point = [0, x, y];
            let key: Vec<bool> = compiled
                .iter()
                .map(|(l, r, a)| {
                    let d = point[*l] - point[*r];
                    let c = a.bound;
                    match a.op {
                        CmpOp::Le => d <= c,
                        CmpOp::Lt => d < c,
                        CmpOp::Ge => d >= c,
                        CmpOp::Gt => d > c,
                        CmpOp::Eq => d == c,
                        CmpOp::Ne => d != c,
                    }
                })
                .collect();
            classes.entry(key).or_insert(point);
        }
    }
    let classes: Vec<(Vec<bool>, BTreeMap<String, i64>)> = classes
        .into_iter()
        .map(|(key, point)| (key, vars.iter().cloned().zip(point[1..].iter().copied()).collect()))
        .collect();
    let props: Vec<PropAtom> = atoms.props.into_iter().collect();
    for bits in 0u64..(1 << props.len()) {
        let pv = |p: &PropAtom| {
            let i = props.iter().position(|q| q == p).unwrap();
            bits >> i & 1 == 1
        };
        for (key, ints) in &classes {
            debug_assert!(atoms.arith.iter().zip(key).all(|(a, v)| arith_holds(a, ints) == *v));
            let av = |a: &ArithAtom| key[atoms.arith.iter().position(|b| b == a).unwrap()];
            if holds_all(parts, &pv, &av) {
                let pm = props.iter().map(|p| (p.to_string(), pv(p))).collect();
                return Some((pm, ints.clone()));
            }
        }
    }
    None
}

pub fn grid_sat(parts: &[&Formula]) -> bool {
    grid_model(parts, GRID).is_some()
}

/// `u - v <= c` over node indices (0 is the zero variable).
type Constraint = (usize, usize, i64);

/// Alternatives (a disjunction of conjunctions) for one atom with a given
/// truth value.
fn literal(a: &ArithAtom, value: bool, node: &dyn Fn(&Term) -> usize) -> Vec<Vec<Constraint>> {
    let (l, r, c) = (node(&a.left), node(&a.right), a.bound);
    let le = |c: i64| vec![vec![(l, r, c)]];
    let ge = |c: i64| vec![vec![(r, l, -c)]];
    let eq = vec![vec![(l, r, c), (r, l, -c)]];
    let ne = vec![vec![(l, r, c - 1)], vec![(r, l, -c - 1)]];
    match (a.op, value) {
        (CmpOp::Le, true) | (CmpOp::Gt, false) => le(c),
        (CmpOp::Le, false) | (CmpOp::Gt, true) => ge(c + 1),
        (CmpOp::Lt, true) | (CmpOp::Ge, false) => le(c - 1),
        (CmpOp::Lt, false) | (CmpOp::Ge, true) => ge(c),
        (CmpOp::Eq, true) | (CmpOp::Ne, false) => eq,
        (CmpOp::Eq, false) | (CmpOp::Ne, true) => ne,
    }
}

/// All-pairs shortest paths; feasible iff no node reaches itself at
/// negative cost.
fn floyd_warshall_feasible(n: usize, constraints: &[Constraint]) -> bool {
    const INF: i64 = i64::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(u, v, c) in constraints {
        d[u][v] = d[u][v].min(c);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] < INF && d[k][j] < INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    (0..n).all(|i| d[i][i] >= 0)
}

fn feasible(n: usize, groups: &[Vec<Vec<Constraint>>], chosen: &mut Vec<Constraint>) -> bool {
    match groups.split_first() {
        None => floyd_warshall_feasible(n, chosen),
        Some((alts, rest)) => alts.iter().any(|alt| {
            let len = chosen.len();
            chosen.extend(alt);
            let ok = feasible(n, rest, chosen);
            chosen.truncate(len);
            ok
        }),
    }
}

/// Truth-table enumeration over every atom, with each arithmetic truth
/// assignment checked for integer feasibility. No bound on constants or
/// variable count.
pub fn atom_sat(parts: &[&Formula]) -> bool {
    let atoms = atoms_of(parts);
    let vars: Vec<String> = atoms.vars.iter().cloned().collect();
    let node = |t: &Term| match t {
        Term::Zero => 0,
        Term::Var(v) => 1 + vars.iter().position(|w| w == v).unwrap(),
    };
    let props: Vec<PropAtom> = atoms.props.into_iter().collect();
    let arith = &atoms.arith;
    assert!(props.len() + arith.len() <= 20, "truth table too large");
    for abits in 0u64..(1 << arith.len()) {
        let av = |a: &ArithAtom| abits >> arith.iter().position(|b| b == a).unwrap() & 1 == 1;
        let boolean_ok = (0u64..(1 << props.len())).any(|pbits| {
            let pv = |p: &PropAtom| pbits >> props.iter().position(|q| q == p).unwrap() & 1 == 1;
            holds_all(parts, &pv, &av)
        });
        if !boolean_ok {
            continue;
        }
        let groups: Vec<_> = arith.iter().map(|a| literal(a, av(a), &node)).collect();
        if feasible(vars.len() + 1, &groups, &mut Vec::new()) {
            return true;
        }
    }
    false
}

/// Three-way verdict from satisfiability alone.
pub fn oracle_verdict(premise: &[Formula], hypothesis: &Formula, sat: impl Fn(&[&Formula]) -> bool) -> Verdict {
    let mut parts: Vec<&Formula> = premise.iter().collect();
    if !sat(&parts) {
        return Verdict::PremiseInconsistent;
    }
    let negated = Formula::Not(Box::new(hypothesis.clone()));
    parts.push(&negated);
    if !sat(&parts) {
        return Verdict::Entailment;
    }
    parts.pop();
    parts.push(hypothesis);
    if !sat(&parts) {
        return Verdict::Contradiction;
    }
    Verdict::Neutral
}

/// Every subset of `0..n` as a sorted index list, in increasing size.
pub fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..(1 << n))
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    out.sort_by_key(|s: &Vec<usize>| s.len());
    out
}

pub fn node_count(f: &Formula) -> u64 {
    match f {
        Formula::Prop(_) | Formula::Arith(_) | Formula::True | Formula::False => 1,
        Formula::Not(g) => 1 + node_count(g),
        Formula::And(gs) | Formula::Or(gs) => 1 + gs.iter().map(node_count).sum::<u64>(),
        Formula::Implies(a, b) | Formula::Iff(a, b) => 1 + node_count(a) + node_count(b),
    }
}

/// Minimal qualifying axiom sets of size at most `k` by exhaustive subset
/// enumeration, as `(sorted ids, score)` ordered by score then ids.
pub fn brute_abduce(
    case: &Case,
    target: gapcheck_core::Target,
    k: usize,
    sat: impl Fn(&[&Formula]) -> bool,
) -> Vec<(Vec<String>, u64)> {
    let goal = match target {
        gapcheck_core::Target::Entailment => Formula::Not(Box::new(case.hypothesis_form.clone())),
        gapcheck_core::Target::Contradiction => case.hypothesis_form.clone(),
    };
    let pool = &case.axiom_pool;
    let qualifies = |s: &[usize]| {
        let mut parts: Vec<&Formula> = case.premise_forms.iter().collect();
        parts.extend(s.iter().map(|&i| &pool[i].formula));
        if !sat(&parts) {
            return false;
        }
        parts.push(&goal);
        !sat(&parts)
    };
    let subsets: Vec<Vec<usize>> = all_subsets(pool.len()).into_iter().filter(|s| !s.is_empty()).collect();
    let good: Vec<&Vec<usize>> = subsets.iter().filter(|s| s.len() <= k && qualifies(s)).collect();
    let mut out: Vec<(Vec<String>, u64)> = good
        .iter()
        .filter(|s| {
            !good
                .iter()
                .any(|t| t.len() < s.len() && t.iter().all(|i| s.contains(i)))
        })
        .map(|s| {
            let mut ids: Vec<String> = s.iter().map(|&i| pool[i].id.clone()).collect();
            ids.sort();
            let score = 100 * s.len() as u64 + s.iter().map(|&i| node_count(&pool[i].formula)).sum::<u64>();
            (ids, score)
        })
        .collect();
    out.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    out
}

/// Random neutral cases with small axiom pools drawn from the generator.
pub fn random_cases(seed: u64, count: usize, max_pool: usize) -> Vec<Case> {
    use gapcheck_core::dataset::{Axiom, AxiomSource, Label};
    let mut gen = FormulaGen::new(seed);
    let mut out = Vec::new();
    let mut n = 0;
    while out.len() < count {
        n += 1;
        let (premise_forms, hypothesis_form) = gen.problem();
        if oracle_verdict(&premise_forms, &hypothesis_form, grid_sat) != Verdict::Neutral {
            continue;
        }
        let size = 1 + (n % max_pool);
        let axiom_pool = (0..size)
            .map(|i| Axiom {
                id: format!("a{i}"),
                formula: gen.formula_at(2),
                gloss: format!("axiom {i}"),
                source: AxiomSource::Custom,
            })
            .collect();
        out.push(Case {
            id: format!("r{n:04}"),
            premise_text: String::new(),
            premise_forms,
            hypothesis_text: String::new(),
            hypothesis_form,
            gold_legal: Label::Neutral,
            axiom_pool,
        });
    }
    out
}

/// Whichever brute-force oracle is cheaper for these formulas: truth tables
/// when few atoms occur, the integer grid otherwise (two variables at most).
pub fn brute_sat(parts: &[&Formula]) -> bool {
    let atoms = atoms_of(parts);
    if atoms.props.len() + atoms.arith.len() <= 12 || atoms.vars.len() > 2 {
        atom_sat(parts)
    } else {
        grid_sat(parts)
    }
}
