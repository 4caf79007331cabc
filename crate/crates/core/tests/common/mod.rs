//! Brute-force reference implementations used as oracles.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashSet;

use proptest::prelude::*;
use tracerace_core::gadgets::{gen_random_trace, RandomTraceParams};
use tracerace_core::{build_index, conflicting, LockId, Op, Trace};

/// Random well-formed traces with at most `max_events` events.
pub fn traces(
    max_events: usize,
    max_threads: usize,
    max_locks: usize,
    max_vars: usize,
) -> impl Strategy<Value = Trace> {
    (
        any::<u64>(),
        1..=max_events,
        1..=max_threads,
        0..=max_locks,
        1..=max_vars,
        0.0..0.45f64,
        0.1..0.9f64,
    )
        .prop_map(
            |(seed, events, threads, locks, vars, acquire_prob, write_prob)| {
                gen_random_trace(&RandomTraceParams {
                    events,
                    threads,
                    locks,
                    vars,
                    acquire_prob,
                    write_prob,
                    seed,
                })
            },
        )
}

/// `hb[i][j]` iff `i` happens before `j` (reflexive), by saturating the
/// thread-order and release-to-later-acquire edges.
pub fn hb_closure(trace: &Trace) -> Vec<Vec<bool>> {
    let n = trace.len();
    let ev = trace.events();
    let mut hb = vec![vec![false; n]; n];
    for j in 0..n {
        hb[j][j] = true;
        for i in 0..j {
            let edge = ev[i].thread == ev[j].thread
                || matches!((ev[i].op, ev[j].op), (Op::Release(a), Op::Acquire(b)) if a == b);
            if edge {
                for k in 0..=i {
                    if hb[k][i] {
                        hb[k][j] = true;
                    }
                }
            }
        }
    }
    hb
}

/// All HB races `(e1, e2)`, `e1 < e2`.
pub fn hb_races(trace: &Trace) -> Vec<(usize, usize)> {
    let hb = hb_closure(trace);
    let n = trace.len();
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if conflicting(trace, i, j) && !hb[i][j] {
                out.push((i, j));
            }
        }
    }
    out
}

/// Locks held by the thread of `e` when `e` executes, sorted.
pub fn held(trace: &Trace, e: usize) -> Vec<LockId> {
    let t = trace.event(e).thread;
    let mut stack: Vec<LockId> = Vec::new();
    for f in &trace.events()[..e] {
        if f.thread != t {
            continue;
        }
        match f.op {
            Op::Acquire(l) => stack.push(l),
            Op::Release(l) => stack.retain(|&m| m != l),
            _ => {}
        }
    }
    stack.sort_unstable();
    stack
}

pub fn held_disjoint(trace: &Trace, a: usize, b: usize) -> bool {
    let hb = held(trace, b);
    held(trace, a).iter().all(|l| !hb.contains(l))
}

/// Intersection of held sets over the accesses of each variable.
pub fn locksets(trace: &Trace) -> Vec<Vec<LockId>> {
    let mut sets: Vec<Vec<LockId>> = (0..trace.num_vars())
        .map(|_| (0..trace.num_locks()).map(LockId::from).collect())
        .collect();
    for e in trace.events() {
        if let Some(x) = e.op.var() {
            let h = held(trace, e.id);
            sets[x.index()].retain(|l| h.contains(l));
        }
    }
    sets
}

pub fn has_conflict(trace: &Trace, var: usize) -> bool {
    let ev = trace.events();
    (0..ev.len())
        .any(|j| (0..j).any(|i| conflicting(trace, i, j) && ev[i].op.var().unwrap().index() == var))
}

pub fn lockset_racy_vars(trace: &Trace) -> Vec<usize> {
    let sets = locksets(trace);
    (0..trace.num_vars())
        .filter(|&x| sets[x].is_empty() && has_conflict(trace, x))
        .collect()
}

/// Lock-cover races, smallest later event first, then smallest earlier.
pub fn lockcover_races(trace: &Trace) -> Vec<(usize, usize)> {
    let n = trace.len();
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if conflicting(trace, i, j) && held_disjoint(trace, i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Exhaustive search for a sync-preserving correct reordering in which
/// `e1` and `e2` are both next in their threads. Events are appended one
/// at a time from the thread fronts; an acquire needs its lock free and no
/// later acquire of that lock already placed, and a read needs the last
/// placed write to its variable to be its last write in the trace.
pub fn syncp_race_dfs(trace: &Trace, e1: usize, e2: usize) -> bool {
    if !conflicting(trace, e1, e2) {
        return false;
    }
    let idx = build_index(trace);
    let nt = trace.num_threads();
    let threads: Vec<Vec<usize>> = (0..nt)
        .map(|t| {
            idx.thread_events(tracerace_core::ThreadId::from(t))
                .to_vec()
        })
        .collect();
    let (t1, p1) = (trace.event(e1).thread.index(), idx.thread_position(e1));
    let (t2, p2) = (trace.event(e2).thread.index(), idx.thread_position(e2));
    let target = move |cut: &[usize]| cut[t1] == p1 && cut[t2] == p2;

    struct Search<'a> {
        trace: &'a Trace,
        threads: Vec<Vec<usize>>,
        last_write: Vec<Option<usize>>,
        writer: Vec<Option<usize>>,
        holder: Vec<Option<usize>>,
        placed: Vec<bool>,
        seen: HashSet<(Vec<usize>, Vec<Option<usize>>)>,
        forbidden: [usize; 2],
    }

    impl Search<'_> {
        fn go(&mut self, cut: &mut Vec<usize>, done: &dyn Fn(&[usize]) -> bool) -> bool {
            if done(cut) {
                return true;
            }
            if !self.seen.insert((cut.clone(), self.writer.clone())) {
                return false;
            }
            for t in 0..self.threads.len() {
                let Some(&e) = self.threads[t].get(cut[t]) else {
                    continue;
                };
                if self.forbidden.contains(&e) {
                    continue;
                }
                let ev = self.trace.event(e);
                let saved_writer = self.writer.clone();
                match ev.op {
                    Op::Acquire(l) => {
                        if self.holder[l.index()].is_some() {
                            continue;
                        }
                        let later = self.trace.events()[e + 1..]
                            .iter()
                            .any(|f| f.op == Op::Acquire(l) && self.placed[f.id]);
                        if later {
                            continue;
                        }
                        self.holder[l.index()] = Some(t);
                    }
                    Op::Release(l) => self.holder[l.index()] = None,
                    Op::Read(x) => {
                        if self.writer[x.index()] != self.last_write[e] {
                            continue;
                        }
                    }
                    Op::Write(x) => self.writer[x.index()] = Some(e),
                }
                self.placed[e] = true;
                cut[t] += 1;
                if self.go(cut, done) {
                    return true;
                }
                cut[t] -= 1;
                self.placed[e] = false;
                self.writer = saved_writer;
                match ev.op {
                    Op::Acquire(l) => self.holder[l.index()] = None,
                    Op::Release(l) => self.holder[l.index()] = Some(t),
                    _ => {}
                }
            }
            false
        }
    }

    let mut s = Search {
        trace,
        threads,
        last_write: (0..trace.len()).map(|e| idx.last_write(e)).collect(),
        writer: vec![None; trace.num_vars()],
        holder: vec![None; trace.num_locks()],
        placed: vec![false; trace.len()],
        seen: HashSet::new(),
        forbidden: [e1, e2],
    };
    let mut cut = vec![0; nt];
    s.go(&mut cut, &target)
}
