//! Happens-before race detection.
//!
//! Three independent deciders share the same verdict:
//! [`detect_hb_race_lockstamp`] (lock-indexed timestamps, `O(N·L)`),
//! [`detect_hb_race_djit`] (thread-indexed vector clocks, `O(N·T)`) and
//! [`detect_hb_race_graph`] (reachability in the sparse HB graph, quadratic).
//! [`detect_hb_race`] picks the cheaper of the first two.

mod djit;
mod graph;
mod lockstamp;
mod pairs;

pub use djit::{detect_hb_race_djit, detect_hb_write_read_race, hb_racy_events_djit};
pub use graph::{build_hb_graph, detect_hb_race_graph, solve_mconn, HbGraph};
pub use lockstamp::{
    acquire_lockstamps, check_with_lockstamps, detect_hb_race_lockstamp,
    detect_hb_race_lockstamp_streaming, hb_unordered, release_lockstamps, Lockstamp,
    LockstampTable, INFINITY,
};
pub use pairs::{consecutive_conflicting_pairs, ConsecutivePair};

use crate::report::RaceReport;
use crate::trace::Trace;

/// Which decider [`detect_hb_race`] chose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbStrategy {
    Lockstamp,
    Djit,
}

/// Lockstamps when there are fewer locks than threads, vector clocks
/// otherwise, for `O(N·min(T, L))` overall.
pub fn hb_strategy(trace: &Trace) -> HbStrategy {
    if trace.num_locks() < trace.num_threads() {
        HbStrategy::Lockstamp
    } else {
        HbStrategy::Djit
    }
}

pub fn detect_hb_race(trace: &Trace) -> Option<RaceReport> {
    match hb_strategy(trace) {
        HbStrategy::Lockstamp => detect_hb_race_lockstamp_streaming(trace),
        HbStrategy::Djit => detect_hb_race_djit(trace),
    }
}
