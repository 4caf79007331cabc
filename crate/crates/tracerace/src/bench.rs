//! `bench`: detector timings over generated traces, as CSV.
//!
//! A generator spec is `KIND[:key=value,...]`. For `random` the sweep value
//! is the number of events and the keys are `threads`, `locks`, `vars`,
//! `acquire_prob`, `write_prob` and `seed`. For the gadget kinds
//! (`ov-hb`, `ov-lockcover`, `ov3-syncp`, `hs-lockset`) the sweep value is
//! the number of vectors per part and the keys are `d`, `density` and
//! `seed`. Repetition `r` uses seed `seed + r`.

use std::fmt::Write as _;

use thiserror::Error;
use tracerace_core::gadgets::{
    gen_hs_to_lockset, gen_ov3_to_syncp, gen_ov_to_hb, gen_ov_to_lockcover, gen_random_trace,
    random_hs_instance, random_ov_instance, RandomTraceParams,
};
use tracerace_core::Trace;

use crate::detect::{timed, Algo};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Random,
    OvHb,
    OvLockcover,
    Ov3Syncp,
    HsLockset,
}

impl GenKind {
    pub fn parse(s: &str) -> Option<GenKind> {
        Some(match s {
            "random" => GenKind::Random,
            "ov-hb" => GenKind::OvHb,
            "ov-lockcover" => GenKind::OvLockcover,
            "ov3-syncp" => GenKind::Ov3Syncp,
            "hs-lockset" => GenKind::HsLockset,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub random: RandomTraceParams,
    pub d: usize,
    pub density: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("unknown generator {0:?}")]
    UnknownKind(String),
    #[error("bad generator option {0:?}")]
    BadOption(String),
}

impl GenSpec {
    pub fn parse(spec: &str) -> Result<GenSpec, SpecError> {
        let (kind, opts) = spec.split_once(':').unwrap_or((spec, ""));
        let kind = GenKind::parse(kind).ok_or_else(|| SpecError::UnknownKind(kind.to_string()))?;
        let mut g = GenSpec {
            kind,
            random: RandomTraceParams::default(),
            d: 8,
            density: 0.5,
            seed: 0,
        };
        for opt in opts.split(',').filter(|o| !o.is_empty()) {
            let bad = || SpecError::BadOption(opt.to_string());
            let (k, v) = opt.split_once('=').ok_or_else(bad)?;
            let int = || v.parse::<usize>().map_err(|_| bad());
            let float = || v.parse::<f64>().map_err(|_| bad());
            match (kind, k) {
                (_, "seed") => g.seed = v.parse().map_err(|_| bad())?,
                (GenKind::Random, "threads") => g.random.threads = int()?,
                (GenKind::Random, "locks") => g.random.locks = int()?,
                (GenKind::Random, "vars") => g.random.vars = int()?,
                (GenKind::Random, "acquire_prob") => g.random.acquire_prob = float()?,
                (GenKind::Random, "write_prob") => g.random.write_prob = float()?,
                (GenKind::Random, _) => return Err(bad()),
                (_, "d") => g.d = int()?,
                (_, "density") => g.density = float()?,
                _ => return Err(bad()),
            }
        }
        Ok(g)
    }

    /// The trace for sweep value `size` and seed offset `rep`.
    pub fn generate(&self, size: usize, rep: u64) -> Trace {
        let seed = self.seed.wrapping_add(rep);
        let n = size.max(1);
        let d = self.d.max(1);
        match self.kind {
            GenKind::Random => gen_random_trace(&RandomTraceParams {
                events: size,
                seed,
                ..self.random
            }),
            GenKind::OvHb => {
                gen_ov_to_hb(&random_ov_instance(2, n, d, self.density, seed)).expect("two parts")
            }
            GenKind::OvLockcover => {
                gen_ov_to_lockcover(&random_ov_instance(2, n, d, self.density, seed))
                    .expect("two parts")
            }
            GenKind::Ov3Syncp => {
                gen_ov3_to_syncp(&random_ov_instance(3, n, d, self.density, seed))
                    .expect("three parts")
                    .trace
            }
            GenKind::HsLockset => gen_hs_to_lockset(&random_hs_instance(n, d, self.density, seed)),
        }
    }
}

pub const CSV_HEADER: &str = "algo,N,T,L,V,rep,millis,race";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algo: Algo,
    pub events: usize,
    pub threads: usize,
    pub locks: usize,
    pub vars: usize,
    pub rep: usize,
    pub millis: f64,
    /// `true`, `false`, or `budget` if the search gave up.
    pub race: &'static str,
}

/// Generates one trace per `(size, rep)` and times every algorithm on it.
pub fn run_bench(
    algos: &[Algo],
    spec: &GenSpec,
    sweep: &[usize],
    reps: usize,
    budget: Option<u64>,
) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &size in sweep {
        for rep in 0..reps {
            let trace = spec.generate(size, rep as u64);
            for &algo in algos {
                let (result, millis) = timed(&trace, algo, budget);
                rows.push(BenchRow {
                    algo,
                    events: trace.len(),
                    threads: trace.num_threads(),
                    locks: trace.num_locks(),
                    vars: trace.num_vars(),
                    rep,
                    millis,
                    race: match result {
                        Ok(d) if d.report.is_some() => "true",
                        Ok(_) => "false",
                        Err(_) => "budget",
                    },
                });
            }
        }
    }
    rows
}

pub fn write_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.3},{}",
            r.algo.name(),
            r.events,
            r.threads,
            r.locks,
            r.vars,
            r.rep,
            r.millis,
            r.race
        );
    }
    out
}

/// Comma-separated list; empty input gives an empty list.
pub fn parse_list<T>(s: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(item)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let g = GenSpec::parse("random:threads=512,locks=2,seed=9").unwrap();
        assert_eq!(g.kind, GenKind::Random);
        assert_eq!((g.random.threads, g.random.locks, g.seed), (512, 2, 9));
        let g = GenSpec::parse("ov-lockcover:d=4").unwrap();
        assert_eq!((g.kind, g.d), (GenKind::OvLockcover, 4));
        assert!(GenSpec::parse("nope").is_err());
        assert!(GenSpec::parse("random:d=3").is_err());
        assert!(GenSpec::parse("random:threads").is_err());
    }

    #[test]
    fn empty_sweep_gives_header_only() {
        let g = GenSpec::parse("random").unwrap();
        let rows = run_bench(&[Algo::HbDjit], &g, &[], 3, None);
        assert_eq!(write_csv(&rows), "algo,N,T,L,V,rep,millis,race\n");
    }

    #[test]
    fn rows_per_size_rep_and_algo() {
        let g = GenSpec::parse("random:threads=3,locks=2,vars=2").unwrap();
        let rows = run_bench(&[Algo::HbDjit, Algo::HbLockstamp], &g, &[50, 100], 2, None);
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].events, 50);
        assert_eq!(rows[7].events, 100);
        for pair in rows.chunks(2) {
            assert_eq!(pair[0].race, pair[1].race);
        }
    }

    #[test]
    fn lists() {
        assert_eq!(
            parse_list("1, 2,3", |s| s.parse::<usize>().ok()),
            Some(vec![1, 2, 3])
        );
        assert_eq!(parse_list("", |s| s.parse::<usize>().ok()), Some(vec![]));
        assert_eq!(parse_list("1,x", |s| s.parse::<usize>().ok()), None);
    }
}
