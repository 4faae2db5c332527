use proptest::prelude::*;
use tanglescan_core::cutorder::{self, AnnealOptions, Cutting, GreedyOptions};
use tanglescan_core::engine::{self, EngineOptions, Order};
use tanglescan_core::families::{braid_closure, braid_tangle, with_kink};
use tanglescan_core::oracle::{brute_force, brute_force_tangle_expansion};
use tanglescan_core::planar::{stats, Diagram, PlanarMap};
use tanglescan_core::skein::Mode;
use tanglescan_core::LaurentPoly;

fn braid() -> impl Strategy<Value = (usize, Vec<i32>)> {
    (2usize..=4).prop_flat_map(|s| {
        let letter = (1..s as i32, any::<bool>()).prop_map(|(i, pos)| if pos { i } else { -i });
        (Just(s), prop::collection::vec(letter, 0..=9))
    })
}

fn closure() -> impl Strategy<Value = Diagram> {
    braid().prop_map(|(s, w)| braid_closure(s, &w))
}

fn tangle() -> impl Strategy<Value = Diagram> {
    braid()
        .prop_filter("needs a crossing", |(_, w)| !w.is_empty())
        .prop_map(|(s, w)| braid_tangle(s, &w))
}

fn orders(seed: u64) -> Vec<Order> {
    vec![
        Order::Greedy(GreedyOptions::default()),
        Order::Greedy(GreedyOptions { lookahead: 2 }),
        Order::Exact,
        Order::Anneal(AnnealOptions {
            seed,
            iterations: 60,
            ..Default::default()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_matches_state_sum(d in closure(), seed in 0u64..1000) {
        for mode in [Mode::Bracket, Mode::Pkbp] {
            let want = brute_force(&d, mode).unwrap();
            for order in orders(seed) {
                let opts = EngineOptions::new(mode).with_order(order).deep();
                let r = engine::compute(&d, &opts).unwrap();
                prop_assert_eq!(&r.polynomial, &want);
                prop_assert!(r.checks.failed().is_empty(), "{:?}", r.checks.failed());
            }
        }
    }

    #[test]
    fn tangle_expansion_matches_state_sum(d in tangle(), seed in 0u64..1000) {
        let want = brute_force_tangle_expansion(&d, Mode::Bracket).unwrap();
        for order in orders(seed) {
            let r = engine::expand(&d, &EngineOptions::new(Mode::Bracket).with_order(order).deep()).unwrap();
            prop_assert_eq!(&r.expansion, &want);
            prop_assert!(r.checks.failed().is_empty());
        }
    }

    #[test]
    fn pkbp_has_no_cancellation(d in closure()) {
        let r = engine::compute_pkbp(&d, Order::default()).unwrap();
        prop_assert!(r.polynomial.all_positive());
        let s = stats(&d).unwrap();
        prop_assert!(r.raw.span() <= 4 * (s.n + s.c) as u64);
    }

    #[test]
    fn reidemeister_and_mirror(d in closure(), side in any::<bool>(), over in 0u8..2, pick in any::<prop::sample::Index>()) {
        let base = engine::compute_bracket(&d, Order::default()).unwrap().polynomial;
        let mirrored = engine::compute_bracket(&d.mirror(), Order::default()).unwrap().polynomial;
        prop_assert_eq!(mirrored, base.mirror());
        let split = engine::compute_bracket(&d.with_free_loops(1), Order::default()).unwrap().polynomial;
        prop_assert_eq!(split, base.mul(&LaurentPoly::delta()));
        if d.n() > 0 {
            let labels: Vec<u64> = d.crossings().iter().flat_map(|c| c.arcs).collect();
            let k = with_kink(&d, labels[pick.index(labels.len())], side, over);
            let q = engine::compute_bracket(&k, Order::default()).unwrap().polynomial.exact_div(&base).unwrap();
            prop_assert!(q == LaurentPoly::monomial(-1, 3) || q == LaurentPoly::monomial(-1, -3));
        }
    }

    #[test]
    fn girths_are_ordered_and_bounded(d in closure(), seed in 0u64..1000) {
        let map = PlanarMap::build(&d).unwrap();
        let g = cutorder::greedy(&map, GreedyOptions::default()).unwrap();
        let e = cutorder::exact(&map).unwrap();
        let a = cutorder::anneal(&map, &g, AnnealOptions { seed, iterations: 60, ..Default::default() }).unwrap();
        prop_assert!(e.girth <= a.girth && a.girth <= g.girth);
        prop_assert!(cutorder::within_sqrt_bound(d.n(), g.girth));
        for c in [&g, &e, &a] {
            let replay = c.validate(&map).unwrap();
            prop_assert_eq!(replay.girth, c.girth);
            let back = Cutting::from_json(&c.to_json().to_string()).unwrap();
            prop_assert_eq!(&back.steps, &c.steps);
        }
    }

    #[test]
    fn euler_relation(d in closure()) {
        let s = stats(&d).unwrap();
        prop_assert_eq!(s.i, s.n + s.c - s.g / 2);
    }
}
