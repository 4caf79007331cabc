//! The sparse HB graph: thread-successor edges plus an edge from every
//! release to the next acquire of the same lock. For distinct events,
//! `e1` happens before `e2` iff `e2` is reachable from `e1`.

use alloc::vec;
use alloc::vec::Vec;

use super::pairs::consecutive_conflicting_pairs;
use crate::report::{RaceKind, RaceReport};
use crate::trace::{Op, Trace};

const NO_EDGE: u32 = u32::MAX;

/// Every edge points forward in trace order, so trace order is a
/// topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HbGraph {
    succ: Vec<[u32; 2]>,
}

pub fn build_hb_graph(trace: &Trace) -> HbGraph {
    let mut succ = vec![[NO_EDGE; 2]; trace.len()];
    let mut last_in_thread = vec![NO_EDGE; trace.num_threads()];
    let mut last_release = vec![NO_EDGE; trace.num_locks()];
    for e in trace.events() {
        let id = e.id as u32;
        let t = e.thread.index();
        if last_in_thread[t] != NO_EDGE {
            succ[last_in_thread[t] as usize][0] = id;
        }
        last_in_thread[t] = id;
        match e.op {
            Op::Acquire(l) => {
                let r = core::mem::replace(&mut last_release[l.index()], NO_EDGE);
                if r != NO_EDGE {
                    succ[r as usize][1] = id;
                }
            }
            Op::Release(l) => last_release[l.index()] = id,
            Op::Read(_) | Op::Write(_) => {}
        }
    }
    HbGraph { succ }
}

impl HbGraph {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn successors(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[e]
            .iter()
            .filter(|&&s| s != NO_EDGE)
            .map(|&s| s as usize)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |e| self.successors(e).map(move |s| (e, s)))
    }

    /// Nodes reachable from `from` (including itself), ignoring nodes past
    /// `limit`.
    fn search(&self, from: usize, limit: usize, seen: &mut [bool], stack: &mut Vec<usize>) {
        stack.clear();
        seen[from] = true;
        stack.push(from);
        while let Some(u) = stack.pop() {
            for v in self.successors(u) {
                if v <= limit && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }

    /// Whether there is a (possibly empty) path from `from` to `to`.
    pub fn reachable(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        if to < from {
            return false;
        }
        let mut seen = vec![false; self.len()];
        self.search(from, to, &mut seen, &mut Vec::new());
        seen[to]
    }

    /// Reachability set of `from` as a dense boolean vector.
    pub fn descendants(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        self.search(from, self.len(), &mut seen, &mut Vec::new());
        seen
    }
}

/// Multi-connectivity: for each `(s, t)`, whether `t` is reachable from
/// `s`. One forward traversal per distinct source.
pub fn solve_mconn(graph: &HbGraph, pairs: &[(usize, usize)]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_unstable_by_key(|&i| pairs[i]);
    let mut out = vec![false; pairs.len()];
    let mut seen = vec![false; graph.len()];
    let mut touched: Vec<usize> = Vec::new();
    let mut stack = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let s = pairs[order[i]].0;
        let mut j = i;
        let mut limit = s;
        while j < order.len() && pairs[order[j]].0 == s {
            limit = limit.max(pairs[order[j]].1);
            j += 1;
        }
        graph.search(s, limit, &mut seen, &mut stack);
        touched.clear();
        touched.extend((s..=limit.min(graph.len() - 1)).filter(|&v| seen[v]));
        for &k in &order[i..j] {
            out[k] = seen[pairs[k].1];
        }
        for &v in &touched {
            seen[v] = false;
        }
        i = j;
    }
    out
}

/// Quadratic-time oracle: a race exists iff some consecutive conflicting
/// pair is connected in neither direction.
pub fn detect_hb_race_graph(trace: &Trace) -> Option<RaceReport> {
    let graph = build_hb_graph(trace);
    let pairs: Vec<(usize, usize)> = consecutive_conflicting_pairs(trace)
        .iter()
        .map(|p| (p.first, p.second))
        .collect();
    let reach = solve_mconn(&graph, &pairs);
    pairs
        .iter()
        .zip(reach)
        .find(|(_, r)| !r)
        .map(|(&(a, b), _)| {
            let x = trace.event(b).op.var().expect("pairs are accesses");
            RaceReport::new(RaceKind::HappensBefore, "hb-graph", a, b, x)
        })
}
