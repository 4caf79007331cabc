//! Small hand-written traces shared by the unit tests.

use crate::trace::{Trace, TraceBuilder};

/// Write-write race between `e2` and `e4` (1-based), unordered by HB.
pub fn sigma_a() -> Trace {
    TraceBuilder::new()
        .acq("t1", "l")
        .write("t1", "x")
        .rel("t1", "l")
        .write("t2", "x")
        .acq("t2", "l")
        .rel("t2", "l")
        .build()
        .unwrap()
}

/// `e1` and `e6` are HB-ordered through `l`, yet form a sync-preserving race.
pub fn sigma_b() -> Trace {
    TraceBuilder::new()
        .write("t1", "x")
        .acq("t1", "l")
        .rel("t1", "l")
        .acq("t2", "l")
        .rel("t2", "l")
        .write("t2", "x")
        .build()
        .unwrap()
}

/// Lock-cover race `(e2, e7)` only.
pub fn sigma_c() -> Trace {
    TraceBuilder::new()
        .acq("t1", "l")
        .write("t1", "x")
        .rel("t1", "l")
        .acq("t2", "l")
        .read("t2", "x")
        .rel("t2", "l")
        .write("t2", "x")
        .build()
        .unwrap()
}

/// Every pair of writes shares a lock, but no lock protects all of them.
pub fn sigma_d() -> Trace {
    TraceBuilder::new()
        .acq("t1", "l1")
        .acq("t1", "l2")
        .write("t1", "x")
        .rel("t1", "l2")
        .rel("t1", "l1")
        .acq("t2", "l2")
        .acq("t2", "l3")
        .write("t2", "x")
        .rel("t2", "l3")
        .rel("t2", "l2")
        .acq("t1", "l1")
        .acq("t1", "l3")
        .write("t1", "x")
        .rel("t1", "l3")
        .rel("t1", "l1")
        .build()
        .unwrap()
}
