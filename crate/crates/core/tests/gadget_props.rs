use proptest::prelude::*;
use tracerace_core::gadgets::{
    construct_ov3_witness, gen_hs_to_lockset, gen_ov3_to_syncp, gen_ov_to_hb, gen_ov_to_lockcover,
    random_hs_instance, random_ov_instance, solve_hs_bruteforce, solve_ov2_bruteforce,
    solve_ov3_bruteforce,
};
use tracerace_core::hb::detect_hb_write_read_race;
use tracerace_core::lockcover::detect_lockcover_race;
use tracerace_core::lockset::detect_lockset_race;
use tracerace_core::syncp::{check_syncp_witness, detect_syncp_race_oracle};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ov_to_hb(seed: u64, n in 1..6usize, d in 1..6usize, density in 0.2..0.8f64) {
        let inst = random_ov_instance(2, n, d, density, seed);
        let t = gen_ov_to_hb(&inst).unwrap();
        let sol = solve_ov2_bruteforce(&inst).unwrap();
        prop_assert_eq!(detect_hb_write_read_race(&t).is_some(), sol.is_some());
    }

    #[test]
    fn ov_to_lockcover(seed: u64, n in 1..8usize, d in 1..8usize, density in 0.2..0.8f64) {
        let inst = random_ov_instance(2, n, d, density, seed);
        let t = gen_ov_to_lockcover(&inst).unwrap();
        let sol = solve_ov2_bruteforce(&inst).unwrap();
        prop_assert_eq!(detect_lockcover_race(&t).is_some(), sol.is_some());
    }

    #[test]
    fn hs_to_lockset(seed: u64, n in 1..8usize, d in 1..8usize, density in 0.2..0.8f64) {
        let inst = random_hs_instance(n, d, density, seed);
        let t = gen_hs_to_lockset(&inst);
        prop_assert_eq!(detect_lockset_race(&t).is_some(), solve_hs_bruteforce(&inst).is_some());
    }

    #[test]
    fn ov3_to_syncp(seed: u64, n in 1..4usize, d in 1..4usize, density in 0.2..0.8f64) {
        let inst = random_ov_instance(3, n, d, density, seed);
        let g = gen_ov3_to_syncp(&inst).unwrap();
        let sol = solve_ov3_bruteforce(&inst).unwrap();
        let race = detect_syncp_race_oracle(&g.trace, None).unwrap();
        prop_assert_eq!(race.is_some(), sol.is_some());
        if let Some((a, b, c)) = sol {
            let w = construct_ov3_witness(&g, (a, b, c)).unwrap();
            let checked = check_syncp_witness(&g.trace, &w, g.layout.writes[a], g.layout.reads[b]);
            prop_assert!(checked.is_ok(), "{:?}", checked);
        }
    }
}
