use alloc::vec;
use alloc::vec::Vec;

use crate::trace::{Op, ThreadId, Trace};

/// Conflicting accesses `first < second` with no write to their variable
/// strictly between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConsecutivePair {
    pub first: usize,
    pub second: usize,
}

/// All consecutive conflicting pairs, ordered by `second` then `first`.
/// A read is the earlier event of at most one pair and the later event of
/// at most one, and a write is the later event of at most one pair with a
/// write, so there are at most `2N`.
pub fn consecutive_conflicting_pairs(trace: &Trace) -> Vec<ConsecutivePair> {
    let mut last_write: Vec<Option<(ThreadId, usize)>> = vec![None; trace.num_vars()];
    let mut reads: Vec<Vec<(ThreadId, usize)>> = vec![Vec::new(); trace.num_vars()];
    let mut out = Vec::new();
    for e in trace.events() {
        match e.op {
            Op::Read(x) => {
                if let Some((tw, w)) = last_write[x.index()] {
                    if tw != e.thread {
                        out.push(ConsecutivePair {
                            first: w,
                            second: e.id,
                        });
                    }
                }
                reads[x.index()].push((e.thread, e.id));
            }
            Op::Write(x) => {
                let rs = &mut reads[x.index()];
                let mut here: Vec<usize> = rs
                    .iter()
                    .filter(|(t, _)| *t != e.thread)
                    .map(|&(_, r)| r)
                    .collect();
                if let Some((tw, w)) = last_write[x.index()] {
                    if tw != e.thread {
                        here.push(w);
                    }
                }
                here.sort_unstable();
                out.extend(here.into_iter().map(|first| ConsecutivePair {
                    first,
                    second: e.id,
                }));
                rs.clear();
                last_write[x.index()] = Some((e.thread, e.id));
            }
            Op::Acquire(_) | Op::Release(_) => {}
        }
    }
    out
}
