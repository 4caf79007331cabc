mod common;

use common::{hb_races, lockcover_races, syncp_race_dfs, traces};
use proptest::prelude::*;
use tracerace_core::syncp::{check_syncp_witness, detect_syncp_race_oracle, syncp_witness};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closure_matches_exhaustive_search(t in traces(14, 3, 2, 2)) {
        for e2 in 0..t.len() {
            for e1 in 0..e2 {
                let w = syncp_witness(&t, e1, e2, None).unwrap();
                prop_assert_eq!(w.is_some(), syncp_race_dfs(&t, e1, e2), "pair ({}, {})", e1, e2);
                if let Some(w) = w {
                    prop_assert!(check_syncp_witness(&t, &w, e1, e2).is_ok());
                }
            }
        }
    }

    #[test]
    fn oracle_reports_first_race_with_valid_witness(t in traces(40, 4, 3, 3)) {
        let found = detect_syncp_race_oracle(&t, None).unwrap();
        let all: Vec<(usize, usize)> = lockcover_races(&t)
            .into_iter()
            .filter(|&(a, b)| syncp_witness(&t, a, b, None).unwrap().is_some())
            .collect();
        match found {
            None => prop_assert!(all.is_empty()),
            Some(r) => {
                prop_assert_eq!((r.report.first, r.report.second), all[0]);
                let checked = check_syncp_witness(&t, &r.witness, r.report.first, r.report.second);
                prop_assert!(checked.is_ok(), "{:?}", checked);
            }
        }
    }

    #[test]
    fn hb_race_implies_syncp_race(t in traces(40, 4, 3, 3)) {
        let syncp = detect_syncp_race_oracle(&t, None).unwrap();
        if !hb_races(&t).is_empty() {
            prop_assert!(syncp.is_some());
        }
        if syncp.is_some() {
            prop_assert!(!lockcover_races(&t).is_empty());
        }
    }
}
