mod common;

use cpd_core::matching::matching_weight;
use cpd_core::max_weight_matching;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn is_matching(n: usize, edges: &[(usize, usize, i64)], chosen: &[usize]) -> bool {
    let mut used = vec![false; n];
    chosen.iter().all(|&k| {
        let (a, b, _) = edges[k];
        let fresh = !used[a] && !used[b];
        used[a] = true;
        used[b] = true;
        fresh
    })
}

#[test]
fn two_hundred_random_graphs_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let n = 2 + case % 9;
        let density = [0.3, 0.6, 0.9][case % 3];
        let edges = common::random_graph(&mut rng, n, density, 40);
        let chosen = max_weight_matching(n, &edges);
        assert!(is_matching(n, &edges, &chosen), "case {case}: not a matching");
        assert_eq!(
            matching_weight(&edges, &chosen),
            common::brute_matching_weight(n, &edges),
            "case {case}: {edges:?}"
        );
    }
}

#[test]
fn zero_weight_edges_never_chosen() {
    let edges = vec![(0, 1, 0), (2, 3, 5), (1, 2, 0)];
    assert_eq!(max_weight_matching(4, &edges), vec![1]);
}

#[test]
fn odd_cycle_with_pendant_needs_a_blossom() {
    // 5-cycle 0..4 plus pendant 5 on vertex 0
    let edges = vec![(0, 1, 6), (1, 2, 6), (2, 3, 6), (3, 4, 6), (4, 0, 6), (0, 5, 5)];
    let chosen = max_weight_matching(6, &edges);
    assert_eq!(matching_weight(&edges, &chosen), 17);
}

fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, i64)>)> {
    (1usize..=10).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let m = pairs.len();
        (
            Just(n),
            proptest::collection::vec(proptest::option::of(0i64..100), m).prop_map(move |ws| {
                pairs
                    .iter()
                    .zip(ws)
                    .filter_map(|(&(a, b), w)| w.map(|w| (a, b, w)))
                    .collect()
            }),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_exhaustive_optimum((n, edges) in graph()) {
        let chosen = max_weight_matching(n, &edges);
        prop_assert!(is_matching(n, &edges, &chosen));
        prop_assert_eq!(matching_weight(&edges, &chosen), common::brute_matching_weight(n, &edges));
    }

    #[test]
    fn deterministic((n, edges) in graph()) {
        prop_assert_eq!(max_weight_matching(n, &edges), max_weight_matching(n, &edges));
    }
}
