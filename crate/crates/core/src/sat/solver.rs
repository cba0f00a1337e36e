use thiserror::Error;

use crate::logic::{ClauseSet, DiffAtom, Model, SourceAtom};

use super::graph::DiffGraph;

/// Decision budget used by the test suites to guarantee termination.
pub const DEFAULT_DECISION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatResult {
    pub status: Status,
    /// Present iff `status == Sat`.
    pub model: Option<Model>,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("decision budget of {budget} exhausted")]
pub struct BudgetExceeded {
    pub budget: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub propagations: u64,
    pub theory_checks: u64,
    pub learned: u64,
}

struct Level {
    trail_start: usize,
    decision: i32,
    flipped: bool,
}

/// DPLL search with unit propagation and chronological backtracking; the
/// difference-logic theory is consulted at every propagation fixpoint and
/// contributes blocking clauses on negative cycles.
///
/// Branching is fixed: lowest unassigned variable first, `true` before
/// `false`.
pub struct Solver<'a> {
    cs: &'a ClauseSet,
    clauses: Vec<Vec<i32>>,
    values: Vec<Option<bool>>,
    trail: Vec<i32>,
    levels: Vec<Level>,
    diff_vars: Vec<(u32, &'a DiffAtom)>,
    budget: Option<u64>,
    stats: SolveStats,
}

/// Decides `cs` with no decision budget.
pub fn solve(cs: &ClauseSet) -> SatResult {
    Solver::new(cs)
        .run()
        .expect("unbounded search cannot exhaust its budget")
}

/// Decides `cs`, giving up after `budget` decisions.
pub fn try_solve(cs: &ClauseSet, budget: u64) -> Result<SatResult, BudgetExceeded> {
    Solver::new(cs).with_budget(budget).run()
}

impl<'a> Solver<'a> {
    pub fn new(cs: &'a ClauseSet) -> Self {
        let diff_vars = cs
            .atoms()
            .filter_map(|(v, a)| match a {
                SourceAtom::Diff(d) => Some((v, d)),
                _ => None,
            })
            .collect();
        Solver {
            cs,
            clauses: cs.clauses().to_vec(),
            values: vec![None; cs.num_vars() as usize + 1],
            trail: Vec::new(),
            levels: Vec::new(),
            diff_vars,
            budget: None,
            stats: SolveStats::default(),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    pub fn run(&mut self) -> Result<SatResult, BudgetExceeded> {
        let unsat = SatResult {
            status: Status::Unsat,
            model: None,
        };
        loop {
            if !self.propagate() {
                if !self.backtrack() {
                    return Ok(unsat);
                }
                continue;
            }
            if let Some(blocking) = self.theory_conflict() {
                self.stats.learned += 1;
                self.clauses.push(blocking);
                if !self.backtrack() {
                    return Ok(unsat);
                }
                continue;
            }
            let Some(var) = (1..self.values.len()).find(|&v| self.values[v].is_none()) else {
                return Ok(SatResult {
                    status: Status::Sat,
                    model: Some(self.model()),
                });
            };
            if let Some(budget) = self.budget {
                if self.stats.decisions >= budget {
                    return Err(BudgetExceeded { budget });
                }
            }
            self.stats.decisions += 1;
            let lit = var as i32;
            self.levels.push(Level {
                trail_start: self.trail.len(),
                decision: lit,
                flipped: false,
            });
            self.assign(lit);
        }
    }

    fn value(&self, lit: i32) -> Option<bool> {
        self.values[lit.unsigned_abs() as usize].map(|v| v == (lit > 0))
    }

    fn assign(&mut self, lit: i32) {
        self.values[lit.unsigned_abs() as usize] = Some(lit > 0);
        self.trail.push(lit);
    }

    /// Unit propagation to fixpoint; `false` on a falsified clause.
    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            for ci in 0..self.clauses.len() {
                let mut unit = None;
                let mut open = 0;
                let mut satisfied = false;
                for &lit in &self.clauses[ci] {
                    match self.value(lit) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open += 1;
                            unit = Some(lit);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match (open, unit) {
                    (0, _) => return false,
                    (1, Some(lit)) => {
                        self.assign(lit);
                        self.stats.propagations += 1;
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    /// Undoes to the deepest decision not yet flipped and flips it.
    fn backtrack(&mut self) -> bool {
        while let Some(level) = self.levels.pop() {
            for lit in self.trail.drain(level.trail_start..) {
                self.values[lit.unsigned_abs() as usize] = None;
            }
            if !level.flipped {
                self.levels.push(Level {
                    trail_start: self.trail.len(),
                    decision: -level.decision,
                    flipped: true,
                });
                self.assign(-level.decision);
                return true;
            }
        }
        false
    }

    /// Currently asserted difference literals as `(lit, constraint)`.
    fn asserted_constraints(&self) -> Vec<(i32, DiffAtom)> {
        self.diff_vars
            .iter()
            .filter_map(|&(v, atom)| {
                self.values[v as usize].map(|val| {
                    if val {
                        (v as i32, atom.clone())
                    } else {
                        (-(v as i32), atom.negated())
                    }
                })
            })
            .collect()
    }

    fn graph_of<'c>(constraints: impl IntoIterator<Item = &'c DiffAtom>) -> DiffGraph {
        let mut g = DiffGraph::new();
        for c in constraints {
            g.add_constraint(c);
        }
        g
    }

    /// Blocking clause for an infeasible set of asserted difference
    /// literals, greedily shrunk while the remainder stays infeasible.
    fn theory_conflict(&mut self) -> Option<Vec<i32>> {
        let asserted = self.asserted_constraints();
        if asserted.is_empty() {
            return None;
        }
        self.stats.theory_checks += 1;
        let cycle = Self::graph_of(asserted.iter().map(|(_, c)| c)).check_negative_cycle()?;
        let mut core: Vec<(i32, DiffAtom)> = cycle.into_iter().map(|e| asserted[e].clone()).collect();
        core.sort_by_key(|(lit, _)| lit.unsigned_abs());
        let mut i = 0;
        while i < core.len() {
            let still_infeasible =
                Self::graph_of(core.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, (_, c))| c))
                    .check_negative_cycle()
                    .is_some();
            if still_infeasible {
                core.remove(i);
            } else {
                i += 1;
            }
        }
        Some(core.into_iter().map(|(lit, _)| -lit).collect())
    }

    fn model(&self) -> Model {
        let mut model = Model::default();
        let mut graph = DiffGraph::new();
        for (v, atom) in self.cs.atoms() {
            let value = self.values[v as usize].unwrap_or(false);
            match atom {
                SourceAtom::Prop(p) => {
                    model.props.insert(p.to_string(), value);
                }
                SourceAtom::Diff(d) => {
                    for t in [&d.left, &d.right] {
                        graph.add_vertex(t.clone());
                    }
                    graph.add_constraint(&if value { d.clone() } else { d.negated() });
                }
                SourceAtom::Fresh => {}
            }
        }
        model.ints = graph
            .feasible_assignment()
            .expect("theory check accepted the full assignment");
        model
    }
}
