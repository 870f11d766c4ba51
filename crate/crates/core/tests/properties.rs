use proptest::prelude::*;

use isobisect::balance::{class_counts, p2_closure_check, verify_isomorphic_bisection, BalanceState};
use isobisect::census::census_pair;
use isobisect::coloring::*;
use isobisect::decompose::{heuristic_decompose, validate, Forest, HeuristicConfig};
use isobisect::graph6::{encode_graph6, parse_cubic};
use isobisect::harness::{random_cubic, run_pipeline, PipelineConfig};

fn cubic_order() -> impl Strategy<Value = usize> {
    (2usize..60).prop_map(|k| 2 * k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_cubic_is_cubic_and_round_trips(n in cubic_order(), seed in any::<u64>()) {
        let g = random_cubic(n, seed, true).unwrap();
        prop_assert!((0..n).all(|v| g.degree(v) == 3));
        prop_assert!(g.is_connected());
        let text = encode_graph6(&g);
        prop_assert_eq!(encode_graph6(&parse_cubic(&text).unwrap()), text);
    }

    #[test]
    fn decompositions_validate_and_colourings_are_proper(n in cubic_order(), seed in any::<u64>()) {
        let g = random_cubic(n, seed, true).unwrap();
        let pair = heuristic_decompose(&g, 5, 5, seed, &HeuristicConfig::default()).unwrap();
        let l1 = pair.max_len(Forest::F1);
        prop_assert!(validate(&g, &pair, l1.max(5), 5).is_ok());
        prop_assert_eq!(pair.edges(Forest::F1).len() + pair.edges(Forest::F2).len(), 3 * n / 2);
        let c = random_proper_coloring(&pair, seed);
        prop_assert!(c.is_proper_on(pair.edges(Forest::F1)));
        if let Ok(b) = make_bisection(&c, &pair) {
            prop_assert_eq!(b.coloring.imbalance(), 0);
            prop_assert!(b.coloring.is_proper_on(pair.edges(Forest::F1)));
        }
    }

    #[test]
    fn census_counts_every_vertex(n in cubic_order(), seed in any::<u64>(), bits in proptest::collection::vec(any::<bool>(), 120)) {
        let g = random_cubic(n, seed, true).unwrap();
        let c = VertexColoring::new((0..n).map(|v| if bits[v] { Color::Red } else { Color::Blue }).collect());
        let census = census_pair(&g, &c);
        let counts = class_counts(&g, &c);
        prop_assert_eq!(census.red.vertex_total(), counts.red);
        prop_assert_eq!(census.blue.vertex_total(), counts.blue);
        // 3|V_red| = 2 e_red + cut
        prop_assert_eq!(3 * counts.red, 2 * counts.red_edges + counts.cut);
        // exchanging colours exchanges the censuses
        let swapped = census_pair(&g, &c.opposite());
        prop_assert_eq!(swapped.red, census.blue);
        prop_assert_eq!(swapped.blue, census.red);
    }

    #[test]
    fn incremental_census_matches_recount(n in cubic_order(), seed in any::<u64>(), flips in proptest::collection::vec(any::<prop::sample::Index>(), 1..30)) {
        let g = random_cubic(n, seed, true).unwrap();
        let start = VertexColoring::new((0..n).map(|v| if v % 2 == 0 { Color::Red } else { Color::Blue }).collect());
        let mut state = BalanceState::new(&g, start);
        for f in flips {
            let v = f.index(n);
            let colour = state.coloring().get(v).opposite();
            state.recolour(&[(v, colour)]);
            prop_assert_eq!(state.census(), &census_pair(&g, state.coloring()));
        }
    }

    #[test]
    fn pipeline_outputs_pass_the_closure(n in cubic_order(), seed in any::<u64>()) {
        let g = random_cubic(n, seed, true).unwrap();
        let report = run_pipeline(&g, &PipelineConfig::new(seed)).unwrap();
        let c = report.coloring.unwrap();
        prop_assert!(p2_closure_check(&g, &c).is_ok());
        prop_assert!(verify_isomorphic_bisection(&g, &c.opposite()).is_ok());
    }

    #[test]
    fn mcdiarmid_matches_closed_form(n in 10u32..10_000_000) {
        let n = n as f64;
        let bound = mcdiarmid_bound(12.0, n, (n * n.ln()).sqrt());
        let closed = 2.0 * n.powf(-1.0 / 72.0);
        prop_assert!((bound - closed).abs() <= 1e-12 * closed);
    }
}
