//! Difference-constraint graph. A constraint `x - y <= c` is the edge
//! `y -> x` with weight `c`; the constraint set is integer-feasible exactly
//! when the graph has no negative-weight cycle, and shortest-path distances
//! from a virtual source then give a satisfying assignment.

use std::collections::BTreeMap;

use crate::logic::{DiffAtom, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: Term,
    pub to: Term,
    pub weight: i64,
}

impl Edge {
    pub fn constraint(&self) -> DiffAtom {
        DiffAtom {
            left: self.to.clone(),
            right: self.from.clone(),
            bound: self.weight,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiffGraph {
    vertices: Vec<Term>,
    index: BTreeMap<Term, usize>,
    edges: Vec<(usize, usize, i64)>,
}

impl Default for DiffGraph {
    fn default() -> Self {
        let mut g = DiffGraph {
            vertices: Vec::new(),
            index: BTreeMap::new(),
            edges: Vec::new(),
        };
        g.add_vertex(Term::Zero);
        g
    }
}

enum BellmanFord {
    Feasible(Vec<i64>),
    NegativeCycle(Vec<usize>),
}

impl DiffGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, term: Term) -> usize {
        if let Some(&i) = self.index.get(&term) {
            return i;
        }
        self.vertices.push(term.clone());
        self.index.insert(term, self.vertices.len() - 1);
        self.vertices.len() - 1
    }

    /// Adds `left - right <= bound`; returns the edge index.
    pub fn add_constraint(&mut self, c: &DiffAtom) -> usize {
        let from = self.add_vertex(c.right.clone());
        let to = self.add_vertex(c.left.clone());
        self.edges.push((from, to, c.bound));
        self.edges.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, i: usize) -> Edge {
        let (from, to, weight) = self.edges[i];
        Edge {
            from: self.vertices[from].clone(),
            to: self.vertices[to].clone(),
            weight,
        }
    }

    /// Edge indices of a negative-weight cycle, in cycle order, or `None`
    /// when the constraints are consistent.
    pub fn check_negative_cycle(&self) -> Option<Vec<usize>> {
        match self.bellman_ford() {
            BellmanFord::Feasible(_) => None,
            BellmanFord::NegativeCycle(c) => Some(c),
        }
    }

    /// Integer values for every non-zero vertex satisfying all constraints,
    /// normalized so that `zero` maps to 0.
    pub fn feasible_assignment(&self) -> Option<BTreeMap<String, i64>> {
        let BellmanFord::Feasible(dist) = self.bellman_ford() else {
            return None;
        };
        let base = dist[self.index[&Term::Zero]];
        Some(
            self.vertices
                .iter()
                .zip(&dist)
                .filter_map(|(t, d)| t.name().map(|n| (n.to_owned(), d - base)))
                .collect(),
        )
    }

    fn bellman_ford(&self) -> BellmanFord {
        let n = self.vertices.len();
        // Every vertex starts at distance 0, as if reached from a virtual
        // source by a zero-weight edge.
        let mut dist = vec![0i64; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        for round in 0..=n {
            let mut last_relaxed = None;
            for (ei, &(u, v, w)) in self.edges.iter().enumerate() {
                let candidate = dist[u] + w;
                if candidate < dist[v] {
                    dist[v] = candidate;
                    pred[v] = Some(ei);
                    last_relaxed = Some(v);
                }
            }
            match last_relaxed {
                None => return BellmanFord::Feasible(dist),
                Some(v) if round == n => return BellmanFord::NegativeCycle(self.extract_cycle(v, &pred)),
                Some(_) => {}
            }
        }
        unreachable!("the final round either converges or reports a cycle")
    }

    fn extract_cycle(&self, start: usize, pred: &[Option<usize>]) -> Vec<usize> {
        // Walking back |V| steps from a vertex relaxed in the last round is
        // guaranteed to land on the cycle.
        let mut v = start;
        for _ in 0..self.vertices.len() {
            v = self.edges[pred[v].expect("relaxed vertex has a predecessor")].0;
        }
        let anchor = v;
        let mut cycle = Vec::new();
        loop {
            let ei = pred[v].expect("cycle vertex has a predecessor");
            cycle.push(ei);
            v = self.edges[ei].0;
            if v == anchor {
                break;
            }
        }
        cycle.reverse();
        cycle
    }
}
