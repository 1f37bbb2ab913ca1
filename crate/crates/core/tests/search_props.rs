use std::collections::HashSet;

use fracdeg::engine::{apply_shadesave, is_legal_in_mode, verify_certificate, Mode, Op, State};
use fracdeg::graph::Graph;
use fracdeg::search::{decide_degenerate, decide_uniform, Answer, SearchConfig};
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

fn subsets(items: &[usize], max: usize) -> Vec<Vec<usize>> {
    (0u32..1 << items.len())
        .filter(|m| m.count_ones() as usize <= max)
        .map(|m| {
            (0..items.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| items[i])
                .collect()
        })
        .collect()
}

/// Plain depth-first search over every legal op, with a visited set and no
/// reductions or pruning.
fn reference(g: &Graph, st: &State, mode: Mode, seen: &mut HashSet<State>) -> bool {
    if st.is_finished() {
        return true;
    }
    if !seen.insert(st.clone()) {
        return false;
    }
    let max = match mode {
        Mode::Type3 => usize::MAX,
        Mode::Type4 => 1,
    };
    for u in st.alive().collect::<Vec<_>>() {
        let nbrs: Vec<_> = g
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&w| st.is_alive(w))
            .collect();
        for w in subsets(&nbrs, max) {
            let op = Op::with_saves(u, &w);
            if is_legal_in_mode(g, st, &op, mode).unwrap().is_legal()
                && reference(g, &apply_shadesave(g, st, &op).unwrap(), mode, seen)
            {
                return true;
            }
        }
    }
    false
}

fn decide(g: &Graph, s: u32, t: u32, mode: Mode) -> Answer {
    decide_uniform(g, s, t, &SearchConfig::with_mode(mode))
        .unwrap()
        .answer
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn agrees_with_reference(g in graph(5), s in 0u32..=3, t in 1u32..=2, type3 in any::<bool>()) {
        let mode = if type3 { Mode::Type3 } else { Mode::Type4 };
        let want = reference(&g, &State::uniform(g.n(), s, t).unwrap(), mode, &mut HashSet::new());
        let got = decide(&g, s, t, mode);
        prop_assert_eq!(got.is_yes(), want, "{:?}", g.edges().collect::<Vec<_>>());
        if let Answer::Yes(c) = got {
            prop_assert!(verify_certificate(&g, &c).verdict.is_complete());
            prop_assert!(c.required_mode() == Mode::Type4 || mode == Mode::Type3);
        }
        prop_assert!(!matches!(decide(&g, s, t, mode), Answer::BudgetExhausted));
    }

    #[test]
    fn nonuniform_agrees_with_reference(
        g in graph(4),
        st in proptest::collection::vec((0u32..=3, 1u32..=2), 4),
        type3 in any::<bool>(),
    ) {
        let mode = if type3 { Mode::Type3 } else { Mode::Type4 };
        let shield: Vec<u32> = st.iter().take(g.n()).map(|p| p.0).collect();
        let target: Vec<u32> = st.iter().take(g.n()).map(|p| p.1).collect();
        let start = State::new(shield.clone(), target.clone()).unwrap();
        let want = reference(&g, &start, mode, &mut HashSet::new());
        let got = decide_degenerate(&g, &shield, &target, &SearchConfig::with_mode(mode)).unwrap();
        prop_assert_eq!(got.answer.is_yes(), want);
    }

    #[test]
    fn answers_are_consistent(g in graph(5), s in 0u32..=3, t in 1u32..=2) {
        let yes4 = decide(&g, s, t, Mode::Type4).is_yes();
        let yes3 = decide(&g, s, t, Mode::Type3).is_yes();
        prop_assert!(!yes4 || yes3);
        if yes3 {
            prop_assert!(decide(&g, s + 1, t, Mode::Type3).is_yes());
            prop_assert!(decide(&g, 2 * s, 2 * t, Mode::Type3).is_yes());
        }
        if yes3 && t > 1 {
            prop_assert!(decide(&g, s, t - 1, Mode::Type3).is_yes());
        }
    }

    #[test]
    fn dominance_pruning_does_not_change_answers(g in graph(5), s in 0u32..=3, t in 1u32..=2) {
        let on = SearchConfig::default();
        let off = SearchConfig { dominance_pruning: false, ..on };
        let a = decide_uniform(&g, s, t, &on).unwrap().answer.is_yes();
        let b = decide_uniform(&g, s, t, &off).unwrap().answer.is_yes();
        prop_assert_eq!(a, b);
    }
}
