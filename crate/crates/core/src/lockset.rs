//! Lock-set races: a variable with a conflicting write/access pair whose
//! accesses share no common held lock.
//!
//! [`lockset_of_variable`] computes the common lock set of one variable in
//! `O(N + L)` by keeping `B`, the running intersection, together with, per
//! thread `t`, the locks `C_t = complement(A_t) ∩ B` that `t` does not hold
//! but that are still in `B` (`A_t` is the set of locks `t` holds). An
//! access by `t` then only has to drop `C_t` from `B`, and every lock
//! leaves `B` at most once.

use alloc::vec;
use alloc::vec::Vec;

use crate::report::{RaceKind, RaceReport};
use crate::trace::{Event, LockId, Op, ThreadId, Trace, VarId};

/// A set over `[0, capacity)` with O(1) insert/remove and iteration in
/// O(len).
#[derive(Debug, Clone)]
struct SparseSet {
    dense: Vec<u32>,
    slot: Vec<u32>,
}

impl SparseSet {
    fn full(capacity: usize) -> Self {
        SparseSet {
            dense: (0..capacity as u32).collect(),
            slot: (0..capacity as u32).collect(),
        }
    }

    #[inline]
    fn contains(&self, i: usize) -> bool {
        let s = self.slot[i] as usize;
        s < self.dense.len() && self.dense[s] as usize == i
    }

    #[inline]
    fn remove(&mut self, i: usize) -> bool {
        if !self.contains(i) {
            return false;
        }
        let s = self.slot[i] as usize;
        let last = *self.dense.last().expect("non-empty");
        self.dense[s] = last;
        self.slot[last as usize] = s as u32;
        self.dense.pop();
        true
    }
}

/// Single-variable pass state for [`lockset_of_variable`].
#[derive(Debug, Clone)]
pub struct LocksetPass {
    var: VarId,
    holder: Vec<Option<ThreadId>>,
    common: SparseSet,
    // Candidates for C_t; may contain locks that re-entered A_t or left B.
    candidates: Vec<Vec<LockId>>,
    // Whether t has accessed the variable yet; before that C_t is implicit.
    seen: Vec<bool>,
    removals: usize,
}

impl LocksetPass {
    pub fn new(trace: &Trace, var: VarId) -> Self {
        LocksetPass {
            var,
            holder: vec![None; trace.num_locks()],
            common: SparseSet::full(trace.num_locks()),
            candidates: vec![Vec::new(); trace.num_threads()],
            seen: vec![false; trace.num_threads()],
            removals: 0,
        }
    }

    pub fn process(&mut self, e: &Event) {
        let t = e.thread;
        match e.op {
            Op::Acquire(l) => self.holder[l.index()] = Some(t),
            Op::Release(l) => {
                self.holder[l.index()] = None;
                if self.seen[t.index()] && self.common.contains(l.index()) {
                    self.candidates[t.index()].push(l);
                }
            }
            Op::Read(x) | Op::Write(x) if x == self.var => {
                if self.seen[t.index()] {
                    let cands = core::mem::take(&mut self.candidates[t.index()]);
                    for &l in &cands {
                        if self.holder[l.index()] != Some(t) && self.common.remove(l.index()) {
                            self.removals += 1;
                        }
                    }
                    self.candidates[t.index()] = cands;
                    self.candidates[t.index()].clear();
                } else {
                    // First access by t: intersect with A_t directly. Locks
                    // kept are held by t, so the scan is paid for by t's
                    // acquires or by removals.
                    self.seen[t.index()] = true;
                    let mut i = 0;
                    while i < self.common.dense.len() {
                        let l = self.common.dense[i] as usize;
                        if self.holder[l] != Some(t) {
                            self.common.remove(l);
                            self.removals += 1;
                        } else {
                            i += 1;
                        }
                    }
                }
            }
            Op::Read(_) | Op::Write(_) => {}
        }
    }

    /// `A_t`: locks held by `t` right now, sorted.
    pub fn held(&self, t: ThreadId) -> Vec<LockId> {
        (0..self.holder.len())
            .filter(|&l| self.holder[l] == Some(t))
            .map(LockId::from)
            .collect()
    }

    /// `B`: the intersection of held locks over accesses so far (all locks
    /// before the first access), sorted.
    pub fn common(&self) -> Vec<LockId> {
        let mut v: Vec<LockId> = self.common.dense.iter().map(|&l| LockId(l)).collect();
        v.sort_unstable();
        v
    }

    /// `C_t = complement(A_t) ∩ B`, sorted.
    pub fn pending(&self, t: ThreadId) -> Vec<LockId> {
        let mut v: Vec<LockId> = if self.seen[t.index()] {
            self.candidates[t.index()]
                .iter()
                .copied()
                .filter(|l| self.holder[l.index()] != Some(t) && self.common.contains(l.index()))
                .collect()
        } else {
            self.common
                .dense
                .iter()
                .map(|&l| LockId(l))
                .filter(|l| self.holder[l.index()] != Some(t))
                .collect()
        };
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Number of locks removed from `B` so far; never exceeds `L`.
    pub fn removals(&self) -> usize {
        self.removals
    }

    pub fn finish(self) -> Vec<LockId> {
        self.common()
    }
}

/// Intersection of the held-lock sets over all accesses of `var`; all
/// locks of the trace if `var` is never accessed.
pub fn lockset_of_variable(trace: &Trace, var: VarId) -> Vec<LockId> {
    let mut pass = LocksetPass::new(trace, var);
    for e in trace.events() {
        pass.process(e);
    }
    pass.finish()
}

/// Per-variable one-pass detection of a conflicting pair, keeping the first
/// occurrence of up to two distinct writer threads and two distinct
/// accessor threads.
#[derive(Debug, Clone, Copy, Default)]
struct ConflictTracker {
    writers: [Option<(ThreadId, usize)>; 2],
    accessors: [Option<(ThreadId, usize)>; 2],
}

impl ConflictTracker {
    fn other(slots: &[Option<(ThreadId, usize)>; 2], t: ThreadId) -> Option<usize> {
        slots
            .iter()
            .flatten()
            .find(|(u, _)| *u != t)
            .map(|&(_, e)| e)
    }

    fn remember(slots: &mut [Option<(ThreadId, usize)>; 2], t: ThreadId, e: usize) {
        if slots.iter().flatten().any(|(u, _)| *u == t) {
            return;
        }
        if let Some(s) = slots.iter_mut().find(|s| s.is_none()) {
            *s = Some((t, e));
        }
    }

    /// Records an access and returns an earlier event it conflicts with.
    fn access(&mut self, t: ThreadId, e: usize, is_write: bool) -> Option<usize> {
        let hit = if is_write {
            Self::other(&self.accessors, t)
        } else {
            Self::other(&self.writers, t)
        };
        if is_write {
            Self::remember(&mut self.writers, t, e);
        }
        Self::remember(&mut self.accessors, t, e);
        hit
    }
}

/// First conflicting pair of every variable, in one pass.
fn first_conflicts(trace: &Trace) -> Vec<Option<(usize, usize)>> {
    let mut trackers = vec![ConflictTracker::default(); trace.num_vars()];
    let mut found = vec![None; trace.num_vars()];
    for e in trace.events() {
        if let Some(x) = e.op.var() {
            if let Some(f) = trackers[x.index()].access(e.thread, e.id, e.op.is_write()) {
                found[x.index()].get_or_insert((f, e.id));
            }
        }
    }
    found
}

/// Common lock set of every variable by direct bit-vector intersection,
/// `O(N·L/64)`.
fn locksets_direct(trace: &Trace) -> Vec<Vec<LockId>> {
    let words = trace.num_locks().div_ceil(64);
    let mut held = vec![0u64; trace.num_threads() * words];
    let mut common = vec![!0u64; trace.num_vars() * words];
    for e in trace.events() {
        let h = e.thread.index() * words;
        match e.op {
            Op::Acquire(l) => held[h + l.index() / 64] |= 1 << (l.index() % 64),
            Op::Release(l) => held[h + l.index() / 64] &= !(1 << (l.index() % 64)),
            Op::Read(x) | Op::Write(x) => {
                let c = x.index() * words;
                for w in 0..words {
                    common[c + w] &= held[h + w];
                }
            }
        }
    }
    (0..trace.num_vars())
        .map(|x| {
            (0..trace.num_locks())
                .filter(|&l| common[x * words + l / 64] >> (l % 64) & 1 == 1)
                .map(LockId::from)
                .collect()
        })
        .collect()
}

/// Common lock set of every variable, choosing the per-variable linear pass
/// when `V ≤ L` and the direct intersection otherwise.
pub fn locksets(trace: &Trace) -> Vec<Vec<LockId>> {
    if trace.num_vars() <= trace.num_locks() {
        (0..trace.num_vars())
            .map(|x| lockset_of_variable(trace, VarId::from(x)))
            .collect()
    } else {
        locksets_direct(trace)
    }
}

/// Reports the lowest-index racy variable with its first conflicting pair.
pub fn detect_lockset_race(trace: &Trace) -> Option<RaceReport> {
    let conflicts = first_conflicts(trace);
    let sets = locksets(trace);
    (0..trace.num_vars()).find_map(|x| match conflicts[x] {
        Some((a, b)) if sets[x].is_empty() => Some(RaceReport::new(
            RaceKind::LockSet,
            "lockset",
            a,
            b,
            VarId::from(x),
        )),
        _ => None,
    })
}

/// Per-variable claim of a race-freeness certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarVerdict {
    ProtectedBy(LockId),
    NoConflictingPair,
    Racy,
}

/// One verdict per variable, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub verdicts: Vec<VarVerdict>,
}

impl Certificate {
    pub fn is_race_free(&self) -> bool {
        !self.verdicts.contains(&VarVerdict::Racy)
    }
}

/// Protected by the smallest-index common lock if there is one, otherwise
/// conflict-free or racy.
pub fn emit_certificate(trace: &Trace) -> Certificate {
    let conflicts = first_conflicts(trace);
    let sets = locksets(trace);
    let verdicts = (0..trace.num_vars())
        .map(|x| match (sets[x].first(), conflicts[x]) {
            (Some(&l), _) => VarVerdict::ProtectedBy(l),
            (None, None) => VarVerdict::NoConflictingPair,
            (None, Some(_)) => VarVerdict::Racy,
        })
        .collect();
    Certificate { verdicts }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CertificateRejection {
    #[error("certificate has {found} entries, trace has {expected} variables")]
    WrongLength { expected: usize, found: usize },
    #[error("variable {} is claimed racy", var.0)]
    ClaimsRace { var: VarId },
    #[error("variable {} claims lock {} which does not exist", var.0, lock.0)]
    UnknownLock { var: VarId, lock: LockId },
    #[error("variable {} claims lock {} but event {event} does not hold it", var.0, lock.0)]
    NotProtected {
        var: VarId,
        lock: LockId,
        event: usize,
    },
    #[error("variable {} claims no conflicts but events {first} and {second} conflict", var.0)]
    ConflictingPair {
        var: VarId,
        first: usize,
        second: usize,
    },
}

impl CertificateRejection {
    pub fn var(&self) -> Option<VarId> {
        match *self {
            CertificateRejection::WrongLength { .. } => None,
            CertificateRejection::ClaimsRace { var }
            | CertificateRejection::UnknownLock { var, .. }
            | CertificateRejection::NotProtected { var, .. }
            | CertificateRejection::ConflictingPair { var, .. } => Some(var),
        }
    }
}

/// Checks a race-freeness certificate in one pass over the trace.
pub fn verify_certificate(trace: &Trace, cert: &Certificate) -> Result<(), CertificateRejection> {
    if cert.verdicts.len() != trace.num_vars() {
        return Err(CertificateRejection::WrongLength {
            expected: trace.num_vars(),
            found: cert.verdicts.len(),
        });
    }
    for (x, v) in cert.verdicts.iter().enumerate() {
        match *v {
            VarVerdict::Racy => {
                return Err(CertificateRejection::ClaimsRace {
                    var: VarId::from(x),
                })
            }
            VarVerdict::ProtectedBy(lock) if lock.index() >= trace.num_locks() => {
                return Err(CertificateRejection::UnknownLock {
                    var: VarId::from(x),
                    lock,
                })
            }
            _ => {}
        }
    }
    let mut holder: Vec<Option<ThreadId>> = vec![None; trace.num_locks()];
    let mut trackers = vec![ConflictTracker::default(); trace.num_vars()];
    for e in trace.events() {
        match e.op {
            Op::Acquire(l) => holder[l.index()] = Some(e.thread),
            Op::Release(l) => holder[l.index()] = None,
            Op::Read(x) | Op::Write(x) => match cert.verdicts[x.index()] {
                VarVerdict::ProtectedBy(lock) => {
                    if holder[lock.index()] != Some(e.thread) {
                        return Err(CertificateRejection::NotProtected {
                            var: x,
                            lock,
                            event: e.id,
                        });
                    }
                }
                VarVerdict::NoConflictingPair => {
                    if let Some(f) = trackers[x.index()].access(e.thread, e.id, e.op.is_write()) {
                        return Err(CertificateRejection::ConflictingPair {
                            var: x,
                            first: f,
                            second: e.id,
                        });
                    }
                }
                VarVerdict::Racy => unreachable!("rejected above"),
            },
        }
    }
    Ok(())
}
