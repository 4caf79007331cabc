//! Lock-cover races: conflicting accesses whose held-lock sets are
//! disjoint. Held sets are packed bit-vectors, so each pair costs
//! `O(L/64)` and the detector `O(N²·L/64)` in the worst case.

use alloc::vec;
use alloc::vec::Vec;

use crate::gadgets::OvInstance;
use crate::report::{RaceKind, RaceReport};
use crate::trace::{LockId, Op, ThreadId, Trace};

/// Held-lock sets of every access event, one packed row each.
#[derive(Debug, Clone)]
pub struct HeldBits {
    words: usize,
    rows: Vec<u64>,
    events: Vec<usize>,
}

impl HeldBits {
    pub fn new(trace: &Trace) -> Self {
        let words = trace.num_locks().div_ceil(64).max(1);
        let mut held = vec![0u64; trace.num_threads() * words];
        let mut rows = Vec::new();
        let mut events = Vec::new();
        for e in trace.events() {
            let h = e.thread.index() * words;
            match e.op {
                Op::Acquire(l) => held[h + l.index() / 64] |= 1 << (l.index() % 64),
                Op::Release(l) => held[h + l.index() / 64] &= !(1 << (l.index() % 64)),
                Op::Read(_) | Op::Write(_) => {
                    rows.extend_from_slice(&held[h..h + words]);
                    events.push(e.id);
                }
            }
        }
        HeldBits {
            words,
            rows,
            events,
        }
    }

    /// Access events in trace order; row `i` belongs to `events()[i]`.
    pub fn events(&self) -> &[usize] {
        &self.events
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    pub fn disjoint(&self, i: usize, j: usize) -> bool {
        self.row(i).iter().zip(self.row(j)).all(|(a, b)| a & b == 0)
    }

    pub fn locks(&self, i: usize) -> Vec<LockId> {
        let row = self.row(i);
        (0..row.len() * 64)
            .filter(|&l| row[l / 64] >> (l % 64) & 1 == 1)
            .map(LockId::from)
            .collect()
    }
}

/// The lock-cover race with the smallest later event, ties broken by the
/// smallest earlier event.
pub fn detect_lockcover_race(trace: &Trace) -> Option<RaceReport> {
    let bits = HeldBits::new(trace);
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); trace.num_vars()];
    for (i, &e) in bits.events().iter().enumerate() {
        let x = trace.event(e).op.var().expect("access");
        by_var[x.index()].push(i);
    }
    let mut best: Option<(usize, usize)> = None;
    for rows in &by_var {
        'later: for (j, &b) in rows.iter().enumerate() {
            let eb = trace.event(bits.events()[b]);
            if best.is_some_and(|(s, _)| s <= eb.id) {
                break;
            }
            for &a in &rows[..j] {
                let ea = trace.event(bits.events()[a]);
                if ea.thread != eb.thread
                    && (ea.op.is_write() || eb.op.is_write())
                    && bits.disjoint(a, b)
                {
                    best = Some((eb.id, ea.id));
                    break 'later;
                }
            }
        }
    }
    best.map(|(b, a)| {
        let x = trace.event(b).op.var().expect("access");
        RaceReport::new(RaceKind::LockCover, "lockcover", a, b, x)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ExportError {
    #[error("events {first} and {second} access different variables")]
    MultipleVariables { first: usize, second: usize },
    #[error("trace has no access events")]
    NoAccesses,
}

/// An orthogonal-vectors instance equivalent to a single-variable trace,
/// with the access event behind every vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedOv {
    pub instance: OvInstance,
    pub events: Vec<usize>,
    /// Lock behind each of the leading coordinates.
    pub locks: Vec<LockId>,
}

/// Encodes each access as `held locks ++ one-hot thread ++ is-read`. Two
/// vectors are orthogonal iff their accesses hold no common lock, come from
/// different threads and are not both reads, i.e. iff they form a
/// lock-cover race. Only locks held by some access get a coordinate.
pub fn export_singlevar_to_ov(trace: &Trace) -> Result<ExportedOv, ExportError> {
    let bits = HeldBits::new(trace);
    let events = bits.events().to_vec();
    let first = *events.first().ok_or(ExportError::NoAccesses)?;
    let x = trace.event(first).op.var();
    if let Some(&e) = events.iter().find(|&&e| trace.event(e).op.var() != x) {
        return Err(ExportError::MultipleVariables { first, second: e });
    }
    let mut used = vec![false; trace.num_locks()];
    for i in 0..events.len() {
        for l in bits.locks(i) {
            used[l.index()] = true;
        }
    }
    let locks: Vec<LockId> = (0..trace.num_locks())
        .filter(|&l| used[l])
        .map(LockId::from)
        .collect();
    let threads = trace.num_threads();
    let vectors: Vec<Vec<bool>> = events
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let ev = trace.event(e);
            let row = bits.row(i);
            let mut v: Vec<bool> = locks
                .iter()
                .map(|l| row[l.index() / 64] >> (l.index() % 64) & 1 == 1)
                .collect();
            v.extend((0..threads).map(|t| ThreadId::from(t) == ev.thread));
            v.push(!ev.op.is_write());
            v
        })
        .collect();
    let instance = OvInstance::new(vec![vectors.clone(), vectors]).expect("uniform dimension");
    Ok(ExportedOv {
        instance,
        events,
        locks,
    })
}
