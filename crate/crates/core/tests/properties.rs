use proptest::prelude::*;

use omex_core::demo::deviation_by_enumeration;
use omex_core::extractor::{deviation, random_view, SearchParams};
use omex_core::fingerprint::{decode_matching, encode_matching, EnumeratedSet};
use omex_core::offline::{
    construct_verified_offline_graph, hall_checkers, ExhaustiveHall, HallChecker, HallVerdict, MatchingHall,
    OfflineParams,
};
use omex_core::online::LayeredGraph;
use omex_core::ratio::Rational;
use omex_core::rng::SplitMix64;
use omex_core::{BipartiteGraph, Limits};

fn small_graph() -> impl Strategy<Value = BipartiteGraph> {
    (1usize..=12, 1usize..=6, 1usize..=3).prop_flat_map(|(left, right, deg)| {
        proptest::collection::vec(proptest::collection::vec(0..right, 1..=deg), left)
            .prop_map(move |nbrs| BipartiteGraph::new(4, right, deg, nbrs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hall_checkers_agree(g in small_graph(), s in 1usize..=12) {
        let limits = Limits::default();
        let a = ExhaustiveHall.check(&g, s, &limits).unwrap();
        let b = MatchingHall.check(&g, s, &limits).unwrap();
        prop_assert_eq!(a.is_ok(), b.is_ok());
        for checker in hall_checkers().iter() {
            if let HallVerdict::Witness { set, neighborhood } = checker.check(&g, s, &limits).unwrap() {
                prop_assert!(set.len() <= s);
                prop_assert!(neighborhood < set.len());
            }
        }
    }

    #[test]
    fn hall_is_monotone_in_s(g in small_graph(), s in 1usize..12) {
        let limits = Limits::default();
        let larger = ExhaustiveHall.check(&g, s + 1, &limits).unwrap();
        if larger.is_ok() {
            prop_assert!(ExhaustiveHall.check(&g, s, &limits).unwrap().is_ok());
        }
    }

    #[test]
    fn deviation_matches_enumeration(
        seed in any::<u64>(),
        n in 1u32..=3,
        m in 1u32..=3,
        d in 0u32..=3,
        mask in 1u32..256,
    ) {
        let p = SearchParams::new(n, 0, m, d, Rational::new(1, 4)).unwrap();
        let view = random_view(p, &mut SplitMix64::new(seed), &Limits::default()).unwrap();
        let set: Vec<usize> = (0..view.left_count()).filter(|&x| mask >> x & 1 == 1).collect();
        prop_assume!(!set.is_empty());
        prop_assert_eq!(deviation(&view, &set).unwrap(), deviation_by_enumeration(&view, &set));
    }

    #[test]
    fn matching_fingerprints_roundtrip(seed in any::<u64>(), order in Just((0usize..8).collect::<Vec<_>>()).prop_shuffle(), size in 1usize..=4) {
        let limits = Limits::default();
        let p = OfflineParams::new(3, 2, 1).unwrap();
        let base = construct_verified_offline_graph(p, seed, 1000, &ExhaustiveHall, &limits).unwrap().graph;
        let layered = LayeredGraph::new(base, 2, &ExhaustiveHall, &limits).unwrap();
        let set = EnumeratedSet::new("S", 2, order[..size].to_vec()).unwrap();
        for &a in &set.elements {
            let fp = encode_matching(&layered, &set, a).unwrap();
            prop_assert!(fp.within_bounds());
            prop_assert_eq!(decode_matching(&layered, &set, &fp).unwrap(), a);
        }
    }
}
