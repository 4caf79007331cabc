//! Algorithm selection shared by `detect` and `bench`.

use std::time::Instant;

use clap::ValueEnum;
use tracerace_core::hb::{
    detect_hb_race, detect_hb_race_djit, detect_hb_race_graph, detect_hb_race_lockstamp_streaming,
};
use tracerace_core::lockcover::detect_lockcover_race;
use tracerace_core::lockset::detect_lockset_race;
use tracerace_core::syncp::{detect_syncp_race_oracle, BudgetExceeded};
use tracerace_core::{RaceKind, RaceReport, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    HbLockstamp,
    HbDjit,
    HbGraph,
    HbAuto,
    Lockset,
    Lockcover,
    SyncpOracle,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::HbLockstamp => "hb-lockstamp",
            Algo::HbDjit => "hb-djit",
            Algo::HbGraph => "hb-graph",
            Algo::HbAuto => "hb-auto",
            Algo::Lockset => "lockset",
            Algo::Lockcover => "lockcover",
            Algo::SyncpOracle => "syncp-oracle",
        }
    }

    pub fn kind(self) -> RaceKind {
        match self {
            Algo::HbLockstamp | Algo::HbDjit | Algo::HbGraph | Algo::HbAuto => {
                RaceKind::HappensBefore
            }
            Algo::Lockset => RaceKind::LockSet,
            Algo::Lockcover => RaceKind::LockCover,
            Algo::SyncpOracle => RaceKind::SyncPreserving,
        }
    }

    pub fn parse(s: &str) -> Result<Algo, String> {
        <Algo as ValueEnum>::from_str(s.trim(), false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub report: Option<RaceReport>,
    /// Witness reordering, for sync-preserving races.
    pub reordering: Option<Vec<usize>>,
}

pub fn run_algo(
    trace: &Trace,
    algo: Algo,
    budget: Option<u64>,
) -> Result<Detection, BudgetExceeded> {
    let report = match algo {
        Algo::HbLockstamp => detect_hb_race_lockstamp_streaming(trace),
        Algo::HbDjit => detect_hb_race_djit(trace),
        Algo::HbGraph => detect_hb_race_graph(trace),
        Algo::HbAuto => detect_hb_race(trace),
        Algo::Lockset => detect_lockset_race(trace),
        Algo::Lockcover => detect_lockcover_race(trace),
        Algo::SyncpOracle => {
            let race = detect_syncp_race_oracle(trace, budget)?;
            return Ok(Detection {
                report: race.as_ref().map(|r| r.report),
                reordering: race.map(|r| r.witness),
            });
        }
    };
    Ok(Detection {
        report,
        reordering: None,
    })
}

/// Runs the detector and returns its result with the elapsed wall-clock
/// time in milliseconds.
pub fn timed(
    trace: &Trace,
    algo: Algo,
    budget: Option<u64>,
) -> (Result<Detection, BudgetExceeded>, f64) {
    let start = Instant::now();
    let r = run_algo(trace, algo, budget);
    (r, start.elapsed().as_secs_f64() * 1e3)
}
