use core::fmt;

use crate::trace::VarId;

/// The race notion a detector decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RaceKind {
    HappensBefore,
    SyncPreserving,
    LockCover,
    LockSet,
}

impl RaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RaceKind::HappensBefore => "hb",
            RaceKind::SyncPreserving => "syncp",
            RaceKind::LockCover => "lockcover",
            RaceKind::LockSet => "lockset",
        }
    }
}

impl fmt::Display for RaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A detected race: the witness pair `first < second` (event ids), the
/// variable they access and the algorithm that found it.
///
/// For lock-set races the pair is a conflicting pair on `var`; the race
/// itself is a property of the whole variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaceReport {
    pub kind: RaceKind,
    pub first: usize,
    pub second: usize,
    pub var: VarId,
    pub algo: &'static str,
}

impl RaceReport {
    pub(crate) fn new(kind: RaceKind, algo: &'static str, a: usize, b: usize, var: VarId) -> Self {
        let (first, second) = if a <= b { (a, b) } else { (b, a) };
        RaceReport {
            kind,
            first,
            second,
            var,
            algo,
        }
    }
}
