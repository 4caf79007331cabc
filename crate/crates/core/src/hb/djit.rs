//! Textbook vector-clock HB detector, `O(N·T)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::report::{RaceKind, RaceReport};
use crate::trace::{Op, Trace};

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Every conflicting pair.
    All,
    /// Only a read racing with an earlier write.
    WriteRead,
}

struct Djit {
    width: usize,
    clock: Vec<u32>,
    lock: Vec<u32>,
    // Per variable and thread: local time and event id of the last write
    // (resp. read) by that thread.
    write_time: Vec<u32>,
    write_id: Vec<usize>,
    read_time: Vec<u32>,
    read_id: Vec<usize>,
}

impl Djit {
    fn new(trace: &Trace) -> Self {
        let w = trace.num_threads();
        let mut clock = vec![0; w * w];
        for t in 0..w {
            clock[t * w + t] = 1;
        }
        Djit {
            width: w,
            clock,
            lock: vec![0; trace.num_locks() * w],
            write_time: vec![0; trace.num_vars() * w],
            write_id: vec![NONE; trace.num_vars() * w],
            read_time: vec![0; trace.num_vars() * w],
            read_id: vec![NONE; trace.num_vars() * w],
        }
    }

    /// Processes one event; returns an earlier event racing with it.
    fn step(&mut self, id: usize, t: usize, op: Op, mode: Mode) -> Option<usize> {
        let w = self.width;
        let c = t * w;
        match op {
            Op::Acquire(l) => {
                let lk = l.index() * w;
                for u in 0..w {
                    self.clock[c + u] = self.clock[c + u].max(self.lock[lk + u]);
                }
                None
            }
            Op::Release(l) => {
                let lk = l.index() * w;
                self.lock[lk..lk + w].copy_from_slice(&self.clock[c..c + w]);
                self.clock[c + t] += 1;
                None
            }
            Op::Read(x) => {
                let xv = x.index() * w;
                let hit = self.unordered(c, t, xv, &self.write_time, &self.write_id);
                self.read_time[xv + t] = self.clock[c + t];
                self.read_id[xv + t] = id;
                hit
            }
            Op::Write(x) => {
                let xv = x.index() * w;
                let hit = if mode == Mode::WriteRead {
                    None
                } else {
                    self.unordered(c, t, xv, &self.write_time, &self.write_id)
                        .or_else(|| self.unordered(c, t, xv, &self.read_time, &self.read_id))
                };
                self.write_time[xv + t] = self.clock[c + t];
                self.write_id[xv + t] = id;
                hit
            }
        }
    }

    #[inline]
    fn unordered(
        &self,
        c: usize,
        t: usize,
        xv: usize,
        time: &[u32],
        ids: &[usize],
    ) -> Option<usize> {
        (0..self.width)
            .filter(|&u| u != t && time[xv + u] > self.clock[c + u])
            .map(|u| ids[xv + u])
            .min()
    }
}

fn first_race(trace: &Trace, mode: Mode, algo: &'static str) -> Option<RaceReport> {
    let mut d = Djit::new(trace);
    for e in trace.events() {
        if let Some(f) = d.step(e.id, e.thread.index(), e.op, mode) {
            let x = e.op.var().expect("races end at accesses");
            return Some(RaceReport::new(RaceKind::HappensBefore, algo, f, e.id, x));
        }
    }
    None
}

pub fn detect_hb_race_djit(trace: &Trace) -> Option<RaceReport> {
    first_race(trace, Mode::All, "hb-djit")
}

/// A read HB-unordered with an earlier conflicting write.
pub fn detect_hb_write_read_race(trace: &Trace) -> Option<RaceReport> {
    first_race(trace, Mode::WriteRead, "hb-djit-wr")
}

/// Every event that forms an HB race with some earlier event, ascending.
pub fn hb_racy_events_djit(trace: &Trace) -> Vec<usize> {
    let mut d = Djit::new(trace);
    trace
        .events()
        .iter()
        .filter(|e| d.step(e.id, e.thread.index(), e.op, Mode::All).is_some())
        .map(|e| e.id)
        .collect()
}
