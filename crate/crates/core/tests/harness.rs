use isobisect::balance::verify_isomorphic_bisection;
use isobisect::census::census_pair;
use isobisect::fixtures;
use isobisect::graph::CubicGraph;
use isobisect::graph6::{encode_graph6, parse_cubic};
use isobisect::harness::*;

#[test]
fn random_cubic_graphs_are_simple_connected_and_reproducible() {
    for (n, seed) in [(6, 0), (20, 3), (500, 7), (2048, 11)] {
        let g = random_cubic(n, seed, true).unwrap();
        assert_eq!(g.order(), n);
        assert_eq!(g.size(), 3 * n / 2);
        assert!(g.is_connected());
        assert!((0..n).all(|v| g.degree(v) == 3));
        let again = random_cubic(n, seed, true).unwrap();
        assert_eq!(encode_graph6(&g), encode_graph6(&again));
        // graph6 round trip
        assert_eq!(encode_graph6(&parse_cubic(&encode_graph6(&g)).unwrap()), encode_graph6(&g));
    }
    assert_ne!(encode_graph6(&random_cubic(100, 1, true).unwrap()), encode_graph6(&random_cubic(100, 2, true).unwrap()));
}

#[test]
fn random_cubic_rejects_bad_orders() {
    assert!(matches!(random_cubic(7, 0, true), Err(HarnessError::BadOrder(7))));
    assert!(matches!(random_cubic(2, 0, true), Err(HarnessError::BadOrder(2))));
}

fn report_json(g: &CubicGraph, seed: u64) -> String {
    serde_json::to_string(&run_pipeline(g, &PipelineConfig::new(seed)).unwrap()).unwrap()
}

#[test]
fn pipeline_reports_are_byte_identical_for_equal_seeds() {
    let g = random_cubic(1024, 5, true).unwrap();
    let a = report_json(&g, 9);
    assert_eq!(a, report_json(&g, 9));
    assert_ne!(a, report_json(&g, 10));
}

#[test]
fn pipeline_successes_reverify() {
    for seed in 0..4 {
        let g = random_cubic(2048, seed, true).unwrap();
        let report = run_pipeline(&g, &PipelineConfig::new(seed)).unwrap();
        assert!(report.success);
        let c = report.coloring.as_ref().unwrap();
        assert_eq!(c.imbalance(), 0);
        let census = census_pair(&g, c);
        assert_eq!(census.red, census.blue);
        assert_eq!(verify_isomorphic_bisection(&g, c).ok(), report.certificate);
    }
}

#[test]
fn pipeline_on_every_small_cubic_graph() {
    for n in [4, 6, 8, 10, 12] {
        for g in fixtures::connected_cubic(n) {
            let report = run_pipeline(&g, &PipelineConfig::new(1)).unwrap();
            assert!(verify_isomorphic_bisection(&g, report.coloring.as_ref().unwrap()).is_ok());
        }
    }
}

#[test]
fn experiment_records_serialise_and_summarise() {
    let (records, summary) = concentration_experiment(512, &[0, 1, 2], 5, 5, 2, 2);
    assert_eq!(records.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![0, 1, 2]);
    assert_eq!(summary.runs + summary.skipped, 3);
    for r in &records {
        assert_eq!(r.schema, RECORD_SCHEMA_VERSION);
        let text = serde_json::to_string(r).unwrap();
        let back: ExperimentRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, *r);
    }
    assert_eq!(summarise(512, 2, &records), summary);
    let again: Vec<_> = [0, 1, 2].iter().map(|&s| experiment_run(512, s, 5, 5, 2).outcome).collect();
    assert_eq!(again, records.iter().map(|r| r.outcome.clone()).collect::<Vec<_>>());
}
