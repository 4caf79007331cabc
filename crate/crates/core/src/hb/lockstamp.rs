//! Lock-indexed timestamps.
//!
//! The acquire lockstamp of `e` maps each lock to the largest rank of an
//! acquire of that lock that happens before `e` (0 if none); the release
//! lockstamp maps it to the smallest rank of a release that `e` happens
//! before ([`INFINITY`] if none). For `e1` before `e2` in different threads,
//! `e1` happens before `e2` iff `acq(e2) ⋢ rel(e1)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::report::{RaceKind, RaceReport};
use crate::trace::{LockId, Op, ThreadId, Trace, VarId};

pub const INFINITY: u32 = u32::MAX;

/// A map from locks to `ℕ ∪ {∞}`, stored densely by lock index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lockstamp(Vec<u32>);

impl Lockstamp {
    /// All zeros.
    pub fn bottom(num_locks: usize) -> Self {
        Lockstamp(vec![0; num_locks])
    }

    /// All infinite.
    pub fn top(num_locks: usize) -> Self {
        Lockstamp(vec![INFINITY; num_locks])
    }

    pub fn from_slice(values: &[u32]) -> Self {
        Lockstamp(values.to_vec())
    }

    pub fn get(&self, l: LockId) -> u32 {
        self.0[l.index()]
    }

    pub fn set(&mut self, l: LockId, value: u32) {
        self.0[l.index()] = value;
    }

    pub fn join(&mut self, other: &Lockstamp) {
        join(&mut self.0, &other.0);
    }

    pub fn meet(&mut self, other: &Lockstamp) {
        meet(&mut self.0, &other.0);
    }

    /// Pointwise `≤`.
    pub fn le(&self, other: &Lockstamp) -> bool {
        stamp_le(&self.0, &other.0)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

#[inline]
fn join(dst: &mut [u32], src: &[u32]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = (*d).max(s);
    }
}

#[inline]
fn meet(dst: &mut [u32], src: &[u32]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = (*d).min(s);
    }
}

#[inline]
fn stamp_le(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// `acq2 ⊑ rel1`: with `acq2 = acq(e2)`, `rel1 = rel(e1)`, `e1` before `e2`
/// in another thread, this holds iff the two events are HB-unordered.
pub fn hb_unordered(acq2: &[u32], rel1: &[u32]) -> bool {
    stamp_le(acq2, rel1)
}

/// One lockstamp per event, flattened row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockstampTable {
    width: usize,
    data: Vec<u32>,
}

impl LockstampTable {
    pub fn row(&self, e: usize) -> &[u32] {
        &self.data[e * self.width..(e + 1) * self.width]
    }

    pub fn get(&self, e: usize, l: LockId) -> u32 {
        self.data[e * self.width + l.index()]
    }

    pub fn stamp(&self, e: usize) -> Lockstamp {
        Lockstamp::from_slice(self.row(e))
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Forward pass state: per-thread stamp, per-lock stamp of the last
/// release, per-lock acquire counter.
struct AcquirePass {
    width: usize,
    thread: Vec<u32>,
    lock: Vec<u32>,
    counter: Vec<u32>,
}

impl AcquirePass {
    fn new(trace: &Trace) -> Self {
        let width = trace.num_locks();
        AcquirePass {
            width,
            thread: vec![0; width * trace.num_threads()],
            lock: vec![0; width * width],
            counter: vec![0; width],
        }
    }

    /// Processes one event and returns its acquire lockstamp.
    #[inline]
    fn step(&mut self, t: ThreadId, op: Op) -> &[u32] {
        let w = self.width;
        let c = t.index() * w;
        match op {
            Op::Acquire(l) => {
                let li = l.index();
                self.counter[li] += 1;
                let ct = &mut self.thread[c..c + w];
                ct[li] = self.counter[li];
                join(ct, &self.lock[li * w..(li + 1) * w]);
            }
            Op::Release(l) => {
                let li = l.index();
                let (ct, lk) = (&self.thread[c..c + w], li * w);
                self.lock[lk..lk + w].copy_from_slice(ct);
            }
            Op::Read(_) | Op::Write(_) => {}
        }
        &self.thread[c..c + w]
    }
}

pub fn acquire_lockstamps(trace: &Trace) -> LockstampTable {
    let mut pass = AcquirePass::new(trace);
    let mut data = Vec::with_capacity(trace.len() * pass.width);
    for e in trace.events() {
        data.extend_from_slice(pass.step(e.thread, e.op));
    }
    LockstampTable {
        width: pass.width,
        data,
    }
}

/// Release lockstamps by a reverse pass: the acquire handler's role is
/// played by releases, with meets and a decreasing counter.
fn release_pass(trace: &Trace, mut emit: impl FnMut(usize, &[u32])) {
    let w = trace.num_locks();
    let mut thread = vec![INFINITY; w * trace.num_threads()];
    let mut lock = vec![INFINITY; w * w];
    let mut counter = vec![1u32; w];
    for e in trace.events() {
        if let Op::Release(l) = e.op {
            counter[l.index()] += 1;
        }
    }
    for e in trace.events().iter().rev() {
        let c = e.thread.index() * w;
        match e.op {
            Op::Release(l) => {
                let li = l.index();
                counter[li] -= 1;
                let ct = &mut thread[c..c + w];
                ct[li] = counter[li];
                meet(ct, &lock[li * w..(li + 1) * w]);
            }
            Op::Acquire(l) => {
                let li = l.index() * w;
                lock[li..li + w].copy_from_slice(&thread[c..c + w]);
            }
            Op::Read(_) | Op::Write(_) => {}
        }
        emit(e.id, &thread[c..c + w]);
    }
}

pub fn release_lockstamps(trace: &Trace) -> LockstampTable {
    let w = trace.num_locks();
    let mut data = vec![0u32; trace.len() * w];
    release_pass(trace, |e, row| {
        data[e * w..(e + 1) * w].copy_from_slice(row)
    });
    LockstampTable { width: w, data }
}

/// Per-variable state of the race check: the last write (its thread and
/// event) and the reads since then.
#[derive(Clone, Default)]
struct VarState {
    last_write: Option<(ThreadId, usize)>,
    reads: Vec<(ThreadId, usize)>,
}

/// Scans consecutive conflicting pairs, comparing the later event's acquire
/// stamp against the stored release stamps of earlier accesses.
struct Checker {
    vars: Vec<VarState>,
}

impl Checker {
    fn new(num_vars: usize) -> Self {
        Checker {
            vars: vec![VarState::default(); num_vars],
        }
    }

    /// Returns the earlier event of a race ending at `e`, if any.
    #[inline]
    fn step<'r>(
        &mut self,
        e: usize,
        t: ThreadId,
        x: VarId,
        is_write: bool,
        acq: &[u32],
        rel_of: impl Fn(usize) -> &'r [u32],
    ) -> Option<usize> {
        let s = &mut self.vars[x.index()];
        if let Some((tw, w)) = s.last_write {
            if tw != t && stamp_le(acq, rel_of(w)) {
                return Some(w);
            }
        }
        if is_write {
            for &(u, r) in &s.reads {
                if u != t && stamp_le(acq, rel_of(r)) {
                    return Some(r);
                }
            }
            s.last_write = Some((t, e));
            s.reads.clear();
        } else {
            s.reads.push((t, e));
        }
        None
    }
}

/// The race check over precomputed lockstamp tables. Stops at the first
/// race in trace order of the later event.
pub fn check_with_lockstamps(
    trace: &Trace,
    acq: &LockstampTable,
    rel: &LockstampTable,
) -> Option<RaceReport> {
    let mut checker = Checker::new(trace.num_vars());
    for e in trace.events() {
        if let Some(x) = e.op.var() {
            let hit = checker.step(e.id, e.thread, x, e.op.is_write(), acq.row(e.id), |f| {
                rel.row(f)
            });
            if let Some(f) = hit {
                return Some(RaceReport::new(
                    RaceKind::HappensBefore,
                    "hb-lockstamp",
                    f,
                    e.id,
                    x,
                ));
            }
        }
    }
    None
}

pub fn detect_hb_race_lockstamp(trace: &Trace) -> Option<RaceReport> {
    let acq = acquire_lockstamps(trace);
    let rel = release_lockstamps(trace);
    check_with_lockstamps(trace, &acq, &rel)
}

/// Same verdict as [`detect_hb_race_lockstamp`], but keeps release stamps
/// only for access events and computes acquire stamps on the fly.
pub fn detect_hb_race_lockstamp_streaming(trace: &Trace) -> Option<RaceReport> {
    let w = trace.num_locks();
    let mut slot = vec![u32::MAX; trace.len()];
    let mut accesses = 0usize;
    for e in trace.events() {
        if e.op.is_access() {
            slot[e.id] = accesses as u32;
            accesses += 1;
        }
    }
    let mut rel = vec![0u32; accesses * w];
    release_pass(trace, |e, row| {
        let s = slot[e];
        if s != u32::MAX {
            let s = s as usize * w;
            rel[s..s + w].copy_from_slice(row);
        }
    });
    let rel_of = |f: usize| {
        let s = slot[f] as usize * w;
        &rel[s..s + w]
    };

    let mut pass = AcquirePass::new(trace);
    let mut checker = Checker::new(trace.num_vars());
    for e in trace.events() {
        let acq = pass.step(e.thread, e.op);
        if let Some(x) = e.op.var() {
            if let Some(f) = checker.step(e.id, e.thread, x, e.op.is_write(), acq, rel_of) {
                return Some(RaceReport::new(
                    RaceKind::HappensBefore,
                    "hb-lockstamp",
                    f,
                    e.id,
                    x,
                ));
            }
        }
    }
    None
}
