mod common;

use std::collections::BTreeMap;

use common::{arb_formula, eval_in, grid_sat, prop_pool, FormulaGen};
use gapcheck_core::logic::{desugar, is_desugared, parse, pretty, tseitin, ClauseSet, DiffAtom, SourceAtom, Term};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pretty_then_parse_is_identity(f in arb_formula()) {
        let text = pretty(&f);
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert_eq!(pretty(&back), text);
    }

    #[test]
    fn desugaring_preserves_truth(
        f in arb_formula(),
        bits in 0u8..16,
        x in -64i64..=64,
        y in -64i64..=64,
    ) {
        let d = desugar(&f);
        prop_assert!(is_desugared(&d));
        let props: BTreeMap<String, bool> = prop_pool()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.to_string(), bits >> i & 1 == 1))
            .collect();
        let ints = BTreeMap::from([("x".to_string(), x), ("y".to_string(), y)]);
        prop_assert_eq!(eval_in(&f, &props, &ints), eval_in(&d, &props, &ints), "{} vs {}", f, d);
    }
}

fn term_node(t: &Term) -> usize {
    match t {
        Term::Zero => 0,
        Term::Var(v) if v == "x" => 1,
        Term::Var(_) => 2,
    }
}

/// Negative cycle check over nodes {0, x, y} by relaxing to a fixpoint.
fn diff_feasible(constraints: &[DiffAtom]) -> bool {
    let mut dist = [0i64; 3];
    for _ in 0..=3 {
        let mut changed = false;
        for c in constraints {
            let (l, r) = (term_node(&c.left), term_node(&c.right));
            // left - right <= bound: left <= right + bound
            if dist[r] + c.bound < dist[l] {
                dist[l] = dist[r] + c.bound;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

/// Enumerates every assignment of the clause-set variables.
fn cnf_sat(cs: &ClauseSet) -> bool {
    let n = cs.num_vars();
    (0u64..(1 << n)).any(|bits| {
        let value = |lit: i32| (bits >> (lit.unsigned_abs() - 1) & 1 == 1) == (lit > 0);
        if !cs.clauses().iter().all(|c| c.iter().any(|&l| value(l))) {
            return false;
        }
        let constraints: Vec<DiffAtom> = cs
            .atoms()
            .filter_map(|(v, a)| match a {
                SourceAtom::Diff(d) if value(v as i32) => Some(d.clone()),
                SourceAtom::Diff(d) => Some(d.negated()),
                _ => None,
            })
            .collect();
        diff_feasible(&constraints)
    })
}

#[test]
fn tseitin_is_equisatisfiable() {
    let mut gen = FormulaGen::new(0x7535_0001);
    let mut checked = 0;
    while checked < 400 {
        let f = gen.formula_at(3);
        let cs = tseitin(&desugar(&f));
        if cs.num_vars() > 16 {
            continue;
        }
        assert_eq!(cnf_sat(&cs), grid_sat(&[&f]), "{f}");
        checked += 1;
    }
}

#[test]
fn dimacs_header_matches_clause_set() {
    let mut gen = FormulaGen::new(0x7535_0002);
    for _ in 0..100 {
        let f = gen.formula();
        let cs = tseitin(&desugar(&f));
        let text = cs.to_dimacs();
        let header = text.lines().find(|l| l.starts_with("p cnf ")).expect("problem line");
        assert_eq!(header, format!("p cnf {} {}", cs.num_vars(), cs.clauses().len()));
        let body: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('c') && !l.starts_with('p'))
            .collect();
        assert_eq!(body.len(), cs.clauses().len());
        assert!(body.iter().all(|l| l.ends_with(" 0") || *l == "0"));
    }
}
