//! Events, traces, well-formedness and per-event derived indices.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            #[inline]
            fn from(i: usize) -> Self {
                $name(i as u32)
            }
        }
    };
}

dense_id!(
    /// Dense thread index in `[0, T)`.
    ThreadId
);
dense_id!(
    /// Dense lock index in `[0, L)`.
    LockId
);
dense_id!(
    /// Dense variable index in `[0, V)`.
    VarId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Acquire,
    Release,
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Acquire(LockId),
    Release(LockId),
    Read(VarId),
    Write(VarId),
}

impl Op {
    pub fn kind(self) -> OpKind {
        match self {
            Op::Acquire(_) => OpKind::Acquire,
            Op::Release(_) => OpKind::Release,
            Op::Read(_) => OpKind::Read,
            Op::Write(_) => OpKind::Write,
        }
    }

    pub fn lock(self) -> Option<LockId> {
        match self {
            Op::Acquire(l) | Op::Release(l) => Some(l),
            _ => None,
        }
    }

    pub fn var(self) -> Option<VarId> {
        match self {
            Op::Read(x) | Op::Write(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_access(self) -> bool {
        matches!(self, Op::Read(_) | Op::Write(_))
    }

    pub fn is_write(self) -> bool {
        matches!(self, Op::Write(_))
    }
}

/// One event of a trace. `id` is its position in trace order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub id: usize,
    pub thread: ThreadId,
    pub op: Op,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WellFormednessKind {
    /// Acquire of a lock currently held by another thread.
    Overlap,
    /// Acquire of a lock the thread already holds.
    Reentrant,
    /// Release of a lock the thread does not hold.
    UnmatchedRelease,
}

impl WellFormednessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WellFormednessKind::Overlap => "overlap",
            WellFormednessKind::Reentrant => "reentrant",
            WellFormednessKind::UnmatchedRelease => "unmatched-release",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("ill-formed trace at event {event}: {}", kind.as_str())]
pub struct WellFormednessError {
    pub event: usize,
    pub kind: WellFormednessKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error(transparent)]
    IllFormed(#[from] WellFormednessError),
    #[error("event {event} refers to an undeclared {what} index")]
    UnknownId { event: usize, what: &'static str },
}

/// Checks that for every lock the projection of `events` onto that lock is
/// an alternation `acq(t) rel(t) acq(t') rel(t') ...`, possibly ending with
/// an open acquire.
pub fn validate(events: &[Event]) -> Result<(), WellFormednessError> {
    let num_locks = events
        .iter()
        .filter_map(|e| e.op.lock())
        .map(|l| l.index() + 1)
        .max()
        .unwrap_or(0);
    let mut holder: Vec<Option<ThreadId>> = vec![None; num_locks];
    for (i, e) in events.iter().enumerate() {
        match e.op {
            Op::Acquire(l) => match holder[l.index()] {
                Some(t) if t == e.thread => {
                    return Err(WellFormednessError {
                        event: i,
                        kind: WellFormednessKind::Reentrant,
                    })
                }
                Some(_) => {
                    return Err(WellFormednessError {
                        event: i,
                        kind: WellFormednessKind::Overlap,
                    })
                }
                None => holder[l.index()] = Some(e.thread),
            },
            Op::Release(l) => {
                if holder[l.index()] != Some(e.thread) {
                    return Err(WellFormednessError {
                        event: i,
                        kind: WellFormednessKind::UnmatchedRelease,
                    });
                }
                holder[l.index()] = None;
            }
            Op::Read(_) | Op::Write(_) => {}
        }
    }
    Ok(())
}

/// An immutable, well-formed trace with its identifier tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    events: Vec<Event>,
    threads: Vec<String>,
    locks: Vec<String>,
    vars: Vec<String>,
}

impl Trace {
    /// Builds a trace from raw `(thread, op)` pairs. Identifier tables must
    /// cover every index used; event ids are assigned from positions.
    pub fn new(
        threads: Vec<String>,
        locks: Vec<String>,
        vars: Vec<String>,
        ops: impl IntoIterator<Item = (ThreadId, Op)>,
    ) -> Result<Trace, TraceError> {
        let events: Vec<Event> = ops
            .into_iter()
            .enumerate()
            .map(|(id, (thread, op))| Event { id, thread, op })
            .collect();
        for e in &events {
            if e.thread.index() >= threads.len() {
                return Err(TraceError::UnknownId {
                    event: e.id,
                    what: "thread",
                });
            }
            match e.op {
                Op::Acquire(l) | Op::Release(l) if l.index() >= locks.len() => {
                    return Err(TraceError::UnknownId {
                        event: e.id,
                        what: "lock",
                    })
                }
                Op::Read(x) | Op::Write(x) if x.index() >= vars.len() => {
                    return Err(TraceError::UnknownId {
                        event: e.id,
                        what: "variable",
                    })
                }
                _ => {}
            }
        }
        validate(&events)?;
        Ok(Trace {
            events,
            threads,
            locks,
            vars,
        })
    }

    pub fn empty() -> Trace {
        Trace {
            events: Vec::new(),
            threads: Vec::new(),
            locks: Vec::new(),
            vars: Vec::new(),
        }
    }

    #[inline]
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    #[inline]
    pub fn event(&self, id: usize) -> &Event {
        &self.events[id]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.events.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn num_threads(&self) -> usize {
        self.threads.len()
    }

    pub fn num_locks(&self) -> usize {
        self.locks.len()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn thread_name(&self, t: ThreadId) -> &str {
        &self.threads[t.index()]
    }

    pub fn lock_name(&self, l: LockId) -> &str {
        &self.locks[l.index()]
    }

    pub fn var_name(&self, x: VarId) -> &str {
        &self.vars[x.index()]
    }

    pub fn thread_names(&self) -> &[String] {
        &self.threads
    }

    pub fn lock_names(&self) -> &[String] {
        &self.locks
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    pub fn thread_by_name(&self, name: &str) -> Option<ThreadId> {
        self.threads
            .iter()
            .position(|n| n == name)
            .map(ThreadId::from)
    }

    pub fn lock_by_name(&self, name: &str) -> Option<LockId> {
        self.locks.iter().position(|n| n == name).map(LockId::from)
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|n| n == name).map(VarId::from)
    }

    /// Same events with `from` renamed to `to`; merges the two threads if
    /// `to` already exists. Fails if the merged trace is ill-formed.
    pub fn relabel_thread(&self, from: &str, to: &str) -> Result<Trace, TraceError> {
        let mut b = TraceBuilder::new();
        for e in &self.events {
            let name = self.thread_name(e.thread);
            let name = if name == from { to } else { name };
            let operand = match e.op {
                Op::Acquire(l) | Op::Release(l) => self.lock_name(l),
                Op::Read(x) | Op::Write(x) => self.var_name(x),
            };
            b.push(name, e.op.kind(), operand);
        }
        b.build()
    }
}

/// Incremental trace construction with name interning in first-occurrence
/// order.
#[derive(Debug, Default, Clone)]
pub struct TraceBuilder {
    threads: Interner,
    locks: Interner,
    vars: Interner,
    ops: Vec<(ThreadId, Op)>,
}

#[derive(Debug, Default, Clone)]
struct Interner {
    names: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }
}

impl TraceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, thread: &str, kind: OpKind, operand: &str) -> &mut Self {
        let t = ThreadId(self.threads.intern(thread));
        let op = match kind {
            OpKind::Acquire => Op::Acquire(LockId(self.locks.intern(operand))),
            OpKind::Release => Op::Release(LockId(self.locks.intern(operand))),
            OpKind::Read => Op::Read(VarId(self.vars.intern(operand))),
            OpKind::Write => Op::Write(VarId(self.vars.intern(operand))),
        };
        self.ops.push((t, op));
        self
    }

    pub fn acq(&mut self, thread: &str, lock: &str) -> &mut Self {
        self.push(thread, OpKind::Acquire, lock)
    }

    pub fn rel(&mut self, thread: &str, lock: &str) -> &mut Self {
        self.push(thread, OpKind::Release, lock)
    }

    pub fn read(&mut self, thread: &str, var: &str) -> &mut Self {
        self.push(thread, OpKind::Read, var)
    }

    pub fn write(&mut self, thread: &str, var: &str) -> &mut Self {
        self.push(thread, OpKind::Write, var)
    }

    /// `acq(lock) rel(lock)`.
    pub fn cs(&mut self, thread: &str, lock: &str) -> &mut Self {
        self.acq(thread, lock).rel(thread, lock)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn build(&self) -> Result<Trace, TraceError> {
        Trace::new(
            self.threads.names.clone(),
            self.locks.names.clone(),
            self.vars.names.clone(),
            self.ops.iter().copied(),
        )
    }
}

/// Per-event quantities shared by the detectors, computed in one forward
/// pass.
#[derive(Debug, Clone)]
pub struct DerivedIndex {
    matching: Vec<Option<usize>>,
    held_offsets: Vec<u32>,
    held_locks: Vec<LockId>,
    pos: Vec<u32>,
    last_write: Vec<Option<usize>>,
    thread_pos: Vec<u32>,
    thread_events: Vec<Vec<usize>>,
}

pub fn build_index(trace: &Trace) -> DerivedIndex {
    let n = trace.len();
    let mut matching = vec![None; n];
    let mut held_offsets = Vec::with_capacity(n + 1);
    let mut held_locks = Vec::new();
    let mut pos = vec![0u32; n];
    let mut last_write = vec![None; n];
    let mut thread_pos = vec![0u32; n];
    let mut thread_events = vec![Vec::new(); trace.num_threads()];

    let mut open: Vec<Option<usize>> = vec![None; trace.num_locks()];
    let mut acq_count = vec![0u32; trace.num_locks()];
    let mut rel_count = vec![0u32; trace.num_locks()];
    let mut last_writer: Vec<Option<usize>> = vec![None; trace.num_vars()];
    // Held locks per thread, kept sorted.
    let mut held: Vec<Vec<LockId>> = vec![Vec::new(); trace.num_threads()];

    held_offsets.push(0);
    for e in trace.events() {
        let t = e.thread.index();
        thread_pos[e.id] = thread_events[t].len() as u32;
        thread_events[t].push(e.id);
        match e.op {
            Op::Acquire(l) => {
                acq_count[l.index()] += 1;
                pos[e.id] = acq_count[l.index()];
                open[l.index()] = Some(e.id);
                let h = &mut held[t];
                let at = h.partition_point(|&m| m < l);
                h.insert(at, l);
                held_locks.extend_from_slice(h);
            }
            Op::Release(l) => {
                rel_count[l.index()] += 1;
                pos[e.id] = rel_count[l.index()];
                if let Some(a) = open[l.index()].take() {
                    matching[a] = Some(e.id);
                    matching[e.id] = Some(a);
                }
                let h = &mut held[t];
                held_locks.extend_from_slice(h);
                if let Ok(at) = h.binary_search(&l) {
                    h.remove(at);
                }
            }
            Op::Read(x) => {
                last_write[e.id] = last_writer[x.index()];
                held_locks.extend_from_slice(&held[t]);
            }
            Op::Write(x) => {
                last_writer[x.index()] = Some(e.id);
                held_locks.extend_from_slice(&held[t]);
            }
        }
        held_offsets.push(held_locks.len() as u32);
    }

    DerivedIndex {
        matching,
        held_offsets,
        held_locks,
        pos,
        last_write,
        thread_pos,
        thread_events,
    }
}

impl DerivedIndex {
    /// Matching release of an acquire, or matching acquire of a release.
    #[inline]
    pub fn matching(&self, e: usize) -> Option<usize> {
        self.matching[e]
    }

    /// Locks held by the event's thread when it executes (sorted). An
    /// acquire and its release are both inside their own critical section.
    #[inline]
    pub fn held_at(&self, e: usize) -> &[LockId] {
        &self.held_locks[self.held_offsets[e] as usize..self.held_offsets[e + 1] as usize]
    }

    pub fn holds(&self, e: usize, l: LockId) -> bool {
        self.held_at(e).binary_search(&l).is_ok()
    }

    /// 1-based rank of an acquire (release) among the acquires (releases)
    /// of its lock; 0 for accesses.
    #[inline]
    pub fn pos(&self, e: usize) -> u32 {
        self.pos[e]
    }

    /// The write observed by a read; `None` for writes, lock events and
    /// reads with no earlier write.
    #[inline]
    pub fn last_write(&self, e: usize) -> Option<usize> {
        self.last_write[e]
    }

    /// 0-based position of the event within its thread.
    #[inline]
    pub fn thread_position(&self, e: usize) -> usize {
        self.thread_pos[e] as usize
    }

    pub fn thread_events(&self, t: ThreadId) -> &[usize] {
        &self.thread_events[t.index()]
    }
}

/// Different threads, same variable, at least one write.
pub fn conflicting(trace: &Trace, e1: usize, e2: usize) -> bool {
    let (a, b) = (trace.event(e1), trace.event(e2));
    if a.thread == b.thread {
        return false;
    }
    match (a.op.var(), b.op.var()) {
        (Some(x), Some(y)) => x == y && (a.op.is_write() || b.op.is_write()),
        _ => false,
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}(t{} {:?})", self.id, self.thread.0, self.op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    #[test]
    fn minimal_critical_section() {
        let t = TraceBuilder::new()
            .acq("t1", "l")
            .write("t1", "x")
            .rel("t1", "l")
            .build()
            .unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!((t.num_threads(), t.num_locks(), t.num_vars()), (1, 1, 1));
    }

    #[test]
    fn validate_categories() {
        assert!(sigma_d().len() == 15);
        let err = TraceBuilder::new()
            .acq("t1", "l")
            .acq("t2", "l")
            .build()
            .unwrap_err();
        assert_eq!(
            err,
            TraceError::IllFormed(WellFormednessError {
                event: 1,
                kind: WellFormednessKind::Overlap
            })
        );
        let err = TraceBuilder::new()
            .acq("t1", "l")
            .acq("t1", "l")
            .build()
            .unwrap_err();
        assert_eq!(
            err,
            TraceError::IllFormed(WellFormednessError {
                event: 1,
                kind: WellFormednessKind::Reentrant
            })
        );
        let err = TraceBuilder::new().rel("t1", "l").build().unwrap_err();
        assert_eq!(
            err,
            TraceError::IllFormed(WellFormednessError {
                event: 0,
                kind: WellFormednessKind::UnmatchedRelease
            })
        );
        // Releasing someone else's lock.
        let err = TraceBuilder::new()
            .acq("t1", "l")
            .rel("t2", "l")
            .build()
            .unwrap_err();
        assert!(matches!(
            err,
            TraceError::IllFormed(WellFormednessError {
                kind: WellFormednessKind::UnmatchedRelease,
                ..
            })
        ));
    }

    #[test]
    fn held_locks_in_sigma_c() {
        let t = sigma_c();
        let idx = build_index(&t);
        let l = t.lock_by_name("l").unwrap();
        assert_eq!(idx.held_at(1), &[l]);
        assert_eq!(idx.held_at(6), &[] as &[LockId]);
        // Read e5 observes write e2.
        assert_eq!(idx.last_write(4), Some(1));
        assert_eq!(idx.last_write(1), None);
        assert_eq!(idx.matching(0), Some(2));
        assert_eq!(idx.matching(5), Some(3));
        assert_eq!(
            (idx.pos(0), idx.pos(3), idx.pos(2), idx.pos(5)),
            (1, 2, 1, 2)
        );
    }

    #[test]
    fn open_section_extends_to_end() {
        let t = TraceBuilder::new()
            .acq("t1", "l")
            .write("t1", "x")
            .read("t2", "x")
            .read("t1", "x")
            .build()
            .unwrap();
        let idx = build_index(&t);
        let l = LockId(0);
        assert!(idx.holds(1, l));
        assert!(!idx.holds(2, l));
        assert!(idx.holds(3, l));
        assert_eq!(idx.matching(0), None);
        assert_eq!(idx.last_write(2), Some(1));
    }

    #[test]
    fn conflicting_pairs() {
        let a = sigma_a();
        assert!(conflicting(&a, 1, 3));
        assert!(!conflicting(&a, 0, 3));
        let rr = TraceBuilder::new()
            .read("t1", "x")
            .read("t2", "x")
            .write("t1", "x")
            .write("t2", "y")
            .build()
            .unwrap();
        assert!(!conflicting(&rr, 0, 1));
        assert!(!conflicting(&rr, 2, 3));
        assert!(conflicting(&rr, 1, 2));
    }

    #[test]
    fn relabel_merges_threads() {
        let d = sigma_d();
        let merged = d.relabel_thread("t2", "t1").unwrap();
        assert_eq!(merged.num_threads(), 1);
        assert_eq!(merged.len(), d.len());
    }
}
