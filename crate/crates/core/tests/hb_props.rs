#![allow(clippy::needless_range_loop)]

mod common;

use common::{hb_closure, hb_races, traces};
use proptest::prelude::*;
use tracerace_core::hb::{
    acquire_lockstamps, build_hb_graph, consecutive_conflicting_pairs, detect_hb_race,
    detect_hb_race_djit, detect_hb_race_graph, detect_hb_race_lockstamp,
    detect_hb_race_lockstamp_streaming, detect_hb_write_read_race, hb_racy_events_djit,
    hb_unordered, release_lockstamps, solve_mconn,
};
use tracerace_core::{conflicting, RaceReport, Trace};

fn check_report(trace: &Trace, races: &[(usize, usize)], r: Option<RaceReport>) {
    match r {
        None => assert!(races.is_empty(), "missed {races:?}"),
        Some(r) => {
            assert!(races.contains(&(r.first, r.second)), "bogus {r:?}");
            assert_eq!(Some(r.var), trace.event(r.second).op.var());
            // Every detector reports a race with the smallest later event.
            assert_eq!(r.second, races.iter().map(|p| p.1).min().unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn detectors_agree_with_closure(t in traces(60, 4, 4, 3)) {
        let races = hb_races(&t);
        check_report(&t, &races, detect_hb_race_lockstamp(&t));
        check_report(&t, &races, detect_hb_race_lockstamp_streaming(&t));
        check_report(&t, &races, detect_hb_race_djit(&t));
        check_report(&t, &races, detect_hb_race_graph(&t));
        check_report(&t, &races, detect_hb_race(&t));
    }

    #[test]
    fn racy_events_are_later_events_of_races(t in traces(60, 4, 4, 3)) {
        let mut expected: Vec<usize> = hb_races(&t).into_iter().map(|p| p.1).collect();
        expected.dedup();
        prop_assert_eq!(hb_racy_events_djit(&t), expected);
    }

    #[test]
    fn write_read_races(t in traces(60, 4, 4, 3)) {
        let wr: Vec<(usize, usize)> = hb_races(&t)
            .into_iter()
            .filter(|&(a, b)| t.event(a).op.is_write() && !t.event(b).op.is_write())
            .collect();
        match detect_hb_write_read_race(&t) {
            None => prop_assert!(wr.is_empty()),
            Some(r) => prop_assert!(wr.contains(&(r.first, r.second))),
        }
    }

    #[test]
    fn lockstamp_order_matches_closure(t in traces(50, 4, 4, 3)) {
        let hb = hb_closure(&t);
        let acq = acquire_lockstamps(&t);
        let rel = release_lockstamps(&t);
        for e2 in 0..t.len() {
            for e1 in 0..e2 {
                if t.event(e1).thread == t.event(e2).thread {
                    continue;
                }
                prop_assert_eq!(
                    hb_unordered(acq.row(e2), rel.row(e1)),
                    !hb[e1][e2],
                    "pair ({}, {})", e1, e2
                );
            }
        }
    }

    #[test]
    fn consecutive_pairs(t in traces(60, 4, 4, 3)) {
        let pairs = consecutive_conflicting_pairs(&t);
        prop_assert!(pairs.len() <= 2 * t.len());
        // Exactly the conflicting pairs with no write to the variable between.
        let mut expected = Vec::new();
        for b in 0..t.len() {
            for a in 0..b {
                if !conflicting(&t, a, b) {
                    continue;
                }
                let x = t.event(a).op.var();
                let between = t.events()[a + 1..b]
                    .iter()
                    .any(|e| e.op.is_write() && e.op.var() == x);
                if !between {
                    expected.push((a, b));
                }
            }
        }
        let got: Vec<(usize, usize)> = pairs.iter().map(|p| (p.first, p.second)).collect();
        prop_assert_eq!(&got, &expected);
        // A trace has an HB race iff one of these pairs is unordered.
        let hb = hb_closure(&t);
        prop_assert_eq!(
            got.iter().any(|&(a, b)| !hb[a][b]),
            !hb_races(&t).is_empty()
        );
    }

    #[test]
    fn graph_reachability(t in traces(50, 4, 4, 3)) {
        let hb = hb_closure(&t);
        let g = build_hb_graph(&t);
        let queries: Vec<(usize, usize)> = (0..t.len())
            .flat_map(|b| (0..b).map(move |a| (a, b)))
            .collect();
        let answers = solve_mconn(&g, &queries);
        for (&(a, b), &ans) in queries.iter().zip(&answers) {
            prop_assert_eq!(ans, hb[a][b], "({}, {})", a, b);
        }
    }
}
