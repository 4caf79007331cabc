//! Sync-preserving races and an exact decision procedure for them.
//!
//! A reordering `ρ` is a sequence of distinct events of `σ`. It is correct
//! if it is closed under thread-prefixes (in thread order), well-formed and
//! every read observes the same write as in `σ`. It is sync-preserving if,
//! for every lock, its acquires appear in the same relative order as in
//! `σ`. A pair of conflicting events is a sync-preserving race if some
//! correct, sync-preserving `ρ` contains neither but enables both.
//!
//! The oracle computes, for each candidate pair, the least event set that
//! every such `ρ` must contain: start from the thread-prefixes strictly
//! before `e1` and `e2`, then repeatedly add the observed write of each
//! included read and the release of every included acquire that is not
//! the last included acquire of its lock. Every move is forced, so the
//! pair is a race iff the closure avoids both events, and the closure in
//! trace order is then a witness.

use alloc::vec;
use alloc::vec::Vec;

use crate::lockcover::HeldBits;
use crate::report::{RaceKind, RaceReport};
use crate::trace::{build_index, conflicting, DerivedIndex, Op, ThreadId, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ReorderingError {
    #[error("not a reordering: event {0} is not in the trace")]
    UnknownEvent(usize),
    #[error("not a reordering: event {0} appears twice")]
    Duplicate(usize),
    #[error("thread order violated: event {0} appears before an earlier event of its thread")]
    ThreadOrder(usize),
    #[error("not downward closed: event {0} is missing its thread predecessor")]
    NotPrefixClosed(usize),
    #[error("ill-formed: event {0} breaks lock semantics")]
    IllFormed(usize),
    #[error("lw violated: read {0} observes a different write")]
    ReadsFrom(usize),
    #[error("not sync-preserving: acquire {0} precedes an earlier acquire of its lock")]
    SyncOrder(usize),
    #[error("not a race candidate: event {0} is not an access")]
    NotAccess(usize),
    #[error("not a race candidate: events {0} and {1} do not conflict")]
    NotConflicting(usize, usize),
    #[error("not enabled: event {0} is in the reordering")]
    Contains(usize),
    #[error("not enabled: a thread predecessor of event {0} is missing")]
    NotEnabled(usize),
}

/// Checks that `rho` is a correct reordering of `trace`.
pub fn check_reordering(
    trace: &Trace,
    idx: &DerivedIndex,
    rho: &[usize],
) -> Result<(), ReorderingError> {
    let mut next = vec![0usize; trace.num_threads()];
    let mut placed = vec![false; trace.len()];
    let mut holder: Vec<Option<ThreadId>> = vec![None; trace.num_locks()];
    let mut last_write: Vec<Option<usize>> = vec![None; trace.num_vars()];
    for &e in rho {
        if e >= trace.len() {
            return Err(ReorderingError::UnknownEvent(e));
        }
        if placed[e] {
            return Err(ReorderingError::Duplicate(e));
        }
        placed[e] = true;
        let ev = trace.event(e);
        let t = ev.thread.index();
        let p = idx.thread_position(e);
        if p < next[t] {
            return Err(ReorderingError::ThreadOrder(e));
        }
        if p > next[t] {
            return Err(ReorderingError::NotPrefixClosed(e));
        }
        next[t] += 1;
        match ev.op {
            Op::Acquire(l) => {
                if holder[l.index()].is_some() {
                    return Err(ReorderingError::IllFormed(e));
                }
                holder[l.index()] = Some(ev.thread);
            }
            Op::Release(l) => {
                if holder[l.index()] != Some(ev.thread) {
                    return Err(ReorderingError::IllFormed(e));
                }
                holder[l.index()] = None;
            }
            Op::Read(x) => {
                if last_write[x.index()] != idx.last_write(e) {
                    return Err(ReorderingError::ReadsFrom(e));
                }
            }
            Op::Write(x) => last_write[x.index()] = Some(e),
        }
    }
    Ok(())
}

pub fn is_correct_reordering(trace: &Trace, rho: &[usize]) -> bool {
    check_reordering(trace, &build_index(trace), rho).is_ok()
}

fn check_sync_order(trace: &Trace, rho: &[usize]) -> Result<(), ReorderingError> {
    let mut last = vec![None; trace.num_locks()];
    for &e in rho {
        if let Op::Acquire(l) = trace.event(e).op {
            if last[l.index()].is_some_and(|a| a > e) {
                return Err(ReorderingError::SyncOrder(e));
            }
            last[l.index()] = Some(e);
        }
    }
    Ok(())
}

/// Whether the acquires of every lock appear in trace order. Assumes `rho`
/// only contains events of `trace`.
pub fn is_sync_preserving(trace: &Trace, rho: &[usize]) -> bool {
    check_sync_order(trace, rho).is_ok()
}

/// Checks that `rho` witnesses a sync-preserving race on `(e1, e2)`.
pub fn check_syncp_witness(
    trace: &Trace,
    rho: &[usize],
    e1: usize,
    e2: usize,
) -> Result<(), ReorderingError> {
    for e in [e1, e2] {
        if e >= trace.len() {
            return Err(ReorderingError::UnknownEvent(e));
        }
        if !trace.event(e).op.is_access() {
            return Err(ReorderingError::NotAccess(e));
        }
    }
    if !conflicting(trace, e1, e2) {
        return Err(ReorderingError::NotConflicting(e1, e2));
    }
    let idx = build_index(trace);
    check_reordering(trace, &idx, rho)?;
    check_sync_order(trace, rho)?;
    for e in [e1, e2] {
        if rho.contains(&e) {
            return Err(ReorderingError::Contains(e));
        }
        let ev = trace.event(e);
        let included = rho
            .iter()
            .filter(|&&f| trace.event(f).thread == ev.thread)
            .count();
        if included != idx.thread_position(e) {
            return Err(ReorderingError::NotEnabled(e));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("search budget of {budget} steps exceeded")]
pub struct BudgetExceeded {
    pub budget: u64,
}

/// A sync-preserving race with its witness reordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncpRace {
    pub report: RaceReport,
    pub witness: Vec<usize>,
}

struct Closure<'a> {
    trace: &'a Trace,
    idx: &'a DerivedIndex,
    cut: Vec<usize>,
    // Latest included acquire of each lock.
    latest: Vec<Option<usize>>,
    queue: Vec<usize>,
    steps: u64,
    budget: Option<u64>,
}

enum Outcome {
    Witness(Vec<usize>),
    Infeasible,
}

impl<'a> Closure<'a> {
    fn new(trace: &'a Trace, idx: &'a DerivedIndex, budget: Option<u64>) -> Self {
        Closure {
            trace,
            idx,
            cut: vec![0; trace.num_threads()],
            latest: vec![None; trace.num_locks()],
            queue: Vec::new(),
            steps: 0,
            budget,
        }
    }

    fn tick(&mut self) -> Result<(), BudgetExceeded> {
        self.steps += 1;
        match self.budget {
            Some(b) if self.steps > b => Err(BudgetExceeded { budget: b }),
            _ => Ok(()),
        }
    }

    /// Includes every event of `e`'s thread up to and including `e`.
    /// Returns false if that would include a forbidden event.
    fn include(&mut self, e: usize, forbidden: [usize; 2]) -> bool {
        let t = self.trace.event(e).thread;
        let want = self.idx.thread_position(e) + 1;
        let evs = self.idx.thread_events(t);
        let from = self.cut[t.index()];
        if want <= from {
            return true;
        }
        if evs[from..want].iter().any(|f| forbidden.contains(f)) {
            return false;
        }
        self.queue.extend_from_slice(&evs[from..want]);
        self.cut[t.index()] = want;
        true
    }

    fn run(&mut self, e1: usize, e2: usize) -> Result<Outcome, BudgetExceeded> {
        self.cut.fill(0);
        self.latest.fill(None);
        self.queue.clear();
        let forbidden = [e1, e2];
        for e in forbidden {
            let t = self.trace.event(e).thread;
            let p = self.idx.thread_position(e);
            if p > 0 {
                let prev = self.idx.thread_events(t)[p - 1];
                if !self.include(prev, forbidden) {
                    return Ok(Outcome::Infeasible);
                }
            }
        }
        while let Some(e) = self.queue.pop() {
            self.tick()?;
            match self.trace.event(e).op {
                Op::Read(_) => {
                    if let Some(w) = self.idx.last_write(e) {
                        if !self.include(w, forbidden) {
                            return Ok(Outcome::Infeasible);
                        }
                    }
                }
                Op::Acquire(l) => {
                    // Of the included acquires of l, all but the latest must
                    // be closed by their release.
                    let li = l.index();
                    let closed = match self.latest[li] {
                        Some(a) if self.idx.pos(a) > self.idx.pos(e) => e,
                        Some(a) => {
                            self.latest[li] = Some(e);
                            a
                        }
                        None => {
                            self.latest[li] = Some(e);
                            continue;
                        }
                    };
                    match self.idx.matching(closed) {
                        Some(r) if self.include(r, forbidden) => {}
                        _ => return Ok(Outcome::Infeasible),
                    }
                }
                Op::Release(_) | Op::Write(_) => {}
            }
        }
        let mut witness: Vec<usize> = (0..self.trace.num_threads())
            .flat_map(|t| {
                self.idx.thread_events(ThreadId::from(t))[..self.cut[t]]
                    .iter()
                    .copied()
            })
            .collect();
        witness.sort_unstable();
        Ok(Outcome::Witness(witness))
    }
}

/// Decides whether `(e1, e2)` is a sync-preserving race and returns a
/// witness if so.
pub fn syncp_witness(
    trace: &Trace,
    e1: usize,
    e2: usize,
    budget: Option<u64>,
) -> Result<Option<Vec<usize>>, BudgetExceeded> {
    if !conflicting(trace, e1, e2) {
        return Ok(None);
    }
    let idx = build_index(trace);
    let mut c = Closure::new(trace, &idx, budget);
    match c.run(e1, e2)? {
        Outcome::Witness(w) => Ok(Some(w)),
        Outcome::Infeasible => Ok(None),
    }
}

/// Searches all conflicting pairs, smallest later event first, then
/// smallest earlier event. `budget` bounds the total number of closure
/// steps.
pub fn detect_syncp_race_oracle(
    trace: &Trace,
    budget: Option<u64>,
) -> Result<Option<SyncpRace>, BudgetExceeded> {
    let idx = build_index(trace);
    // Both events of a race are enabled at the end of the witness, so they
    // cannot hold a common lock.
    let bits = HeldBits::new(trace);
    let accesses = bits.events();
    let mut c = Closure::new(trace, &idx, budget);
    for (j, &e2) in accesses.iter().enumerate() {
        for (i, &e1) in accesses[..j].iter().enumerate() {
            if !conflicting(trace, e1, e2) || !bits.disjoint(i, j) {
                continue;
            }
            c.tick()?;
            if let Outcome::Witness(witness) = c.run(e1, e2)? {
                let x = trace.event(e2).op.var().expect("access");
                return Ok(Some(SyncpRace {
                    report: RaceReport::new(RaceKind::SyncPreserving, "syncp-oracle", e1, e2, x),
                    witness,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::TraceBuilder;

    #[test]
    fn fixture_traces() {
        let b = sigma_b();
        let r = detect_syncp_race_oracle(&b, None).unwrap().unwrap();
        assert_eq!((r.report.first, r.report.second), (0, 5));
        assert_eq!(r.witness, [3, 4]);
        assert_eq!(check_syncp_witness(&b, &r.witness, 0, 5), Ok(()));

        let a = sigma_a();
        let r = detect_syncp_race_oracle(&a, None).unwrap().unwrap();
        assert_eq!((r.report.first, r.report.second), (1, 3));
        assert_eq!(r.witness, [0]);

        assert!(detect_syncp_race_oracle(&sigma_d(), None)
            .unwrap()
            .is_none());
    }

    #[test]
    fn sigma_c_needs_the_read_to_see_its_write() {
        // (e2, e7) would need e5, which reads from e2.
        let c = sigma_c();
        assert_eq!(syncp_witness(&c, 1, 6, None), Ok(None));
        assert!(detect_syncp_race_oracle(&c, None).unwrap().is_none());
    }

    #[test]
    fn sync_order_forces_releases() {
        // To enable r(x) in t2, its earlier section on l must follow t1's,
        // whose release comes after w(x).
        let t = TraceBuilder::new()
            .acq("t1", "l")
            .write("t1", "x")
            .rel("t1", "l")
            .acq("t2", "l")
            .rel("t2", "l")
            .read("t2", "x")
            .build()
            .unwrap();
        assert_eq!(syncp_witness(&t, 1, 5, None), Ok(None));
    }

    #[test]
    fn open_last_section_is_allowed() {
        let t = TraceBuilder::new()
            .write("t1", "x")
            .acq("t2", "l")
            .write("t2", "x")
            .rel("t2", "l")
            .build()
            .unwrap();
        let w = syncp_witness(&t, 0, 2, None).unwrap().unwrap();
        assert_eq!(w, [1]);
    }

    #[test]
    fn budget_is_enforced() {
        let b = sigma_b();
        assert_eq!(
            detect_syncp_race_oracle(&b, Some(1)),
            Err(BudgetExceeded { budget: 1 })
        );
    }

    #[test]
    fn reordering_checks() {
        let b = sigma_b();
        assert!(is_correct_reordering(&b, &[3, 4, 0, 1, 2]));
        assert!(!is_sync_preserving(&b, &[3, 4, 0, 1, 2]));
        assert!(is_sync_preserving(&b, &[0, 1, 2, 3]));
        assert!(!is_correct_reordering(&b, &[1]));
        assert!(!is_correct_reordering(&b, &[1, 3]));
        let c = sigma_c();
        // Read e5 would see no write.
        assert!(!is_correct_reordering(&c, &[3, 4]));
        assert_eq!(
            check_syncp_witness(&b, &[3, 4], 0, 4),
            Err(ReorderingError::NotAccess(4))
        );
        assert_eq!(
            check_syncp_witness(&b, &[3], 0, 5),
            Err(ReorderingError::NotEnabled(5))
        );
    }
}
