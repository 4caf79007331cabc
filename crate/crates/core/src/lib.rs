//! Dynamic data-race detection over concurrent execution traces.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only algorithms:
//! the trace model and its derived indices, detectors for happens-before,
//! sync-preserving, lock-cover and lock-set races, and generators that turn
//! orthogonal-vectors and hitting-set instances into traces whose races
//! encode the instance's answer. File formats and the command-line driver
//! live in the `tracerace` crate.
//!
//! Events are identified by their 0-based position in the trace.

#![no_std]

extern crate alloc;

pub mod gadgets;
pub mod hb;
pub mod lockcover;
pub mod lockset;
pub mod report;
pub mod syncp;
pub mod trace;

pub use report::{RaceKind, RaceReport};
pub use trace::{
    build_index, conflicting, validate, DerivedIndex, Event, LockId, Op, OpKind, ThreadId, Trace,
    TraceBuilder, TraceError, VarId, WellFormednessError, WellFormednessKind,
};

#[cfg(test)]
pub(crate) mod fixtures;
