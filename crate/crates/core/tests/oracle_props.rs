use fracdeg::graph::Graph;
use fracdeg::oracle::{
    all_perfect_covers, build_cover, check_dp_colorable, find_transversal, multipartite_bound,
    normalized_family_size, CoverSpec, DpStrategy, DpVerdict,
};
use proptest::prelude::*;

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let m = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), m).prop_map(move |bits| {
            let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            let edges: Vec<_> = pairs
                .zip(bits)
                .filter(|(_, b)| *b)
                .map(|(e, _)| e)
                .collect();
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_form_matches_all_perfect_covers(g in graph(4), a in 1usize..=2, b_pick in 0usize..2) {
        let b = 1 + b_pick.min(a - 1);
        let all_ok = all_perfect_covers(&g, a).all(|c| find_transversal(&c, b).is_some());
        let r = check_dp_colorable(&g, a, b, DpStrategy::ExhaustiveNormalized, u64::MAX).unwrap();
        prop_assert_eq!(r.family_size, normalized_family_size(&g, a));
        match r.verdict {
            DpVerdict::Holds => prop_assert!(all_ok),
            DpVerdict::Refuted(w) => {
                prop_assert!(!all_ok);
                prop_assert!(w.validate().is_ok());
                prop_assert!(find_transversal(&w, b).is_none());
            }
            DpVerdict::Inconclusive { .. } => prop_assert!(false, "exhaustive run was inconclusive"),
        }
    }

    #[test]
    fn transversals_are_independent(g in graph(6), a in 1usize..=4, b in 1usize..=2, seed in any::<u64>()) {
        prop_assume!(b <= a);
        let cover = build_cover(&g, a, &CoverSpec::Random { seed }).unwrap();
        if let Some(tr) = find_transversal(&cover, b) {
            prop_assert!(tr.validate(&cover, b));
        }
    }

    #[test]
    fn deleting_a_cross_edge_keeps_transversals(
        g in graph(5),
        a in 1usize..=3,
        seed in any::<u64>(),
        pick in any::<prop::sample::Index>(),
        c_pick in 0usize..3,
    ) {
        let edges: Vec<_> = g.edges().collect();
        prop_assume!(!edges.is_empty());
        let (u, v) = edges[pick.index(edges.len())];
        let cover = build_cover(&g, a, &CoverSpec::Random { seed }).unwrap();
        let smaller = cover.without_cross_edge(u, v, c_pick % a);
        prop_assert_eq!(smaller.cross_edge_count() + 1, cover.cross_edge_count());
        for b in 1..=a {
            if find_transversal(&cover, b).is_some() {
                prop_assert!(find_transversal(&smaller, b).is_some());
            }
        }
    }

    #[test]
    fn multipartite_residuals_vanish(parts in proptest::collection::vec(1usize..=8, 1..=5)) {
        let b = multipartite_bound(&parts).unwrap();
        prop_assert!(b.residuals.iter().all(|r| r.abs() <= 1e-10));
        prop_assert!(b.p_star.iter().all(|&p| p > 0.0 && p <= 1.0));
        prop_assert!((b.bound - 1.0 / b.p_star[0]).abs() <= 1e-9);
    }
}
