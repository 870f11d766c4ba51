//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::time::Instant;

use isobisect::balance::{p2_closure_check, verify_isomorphic_bisection};
use isobisect::census::census_pair;
use isobisect::coloring::{centre_count_bound, mcdiarmid_bound, select_separated_centres};
use isobisect::decompose::{thomassen_decompose, validate, SearchOutcome};
use isobisect::fixtures;
use isobisect::graph::CubicGraph;
use isobisect::harness::{concentration_experiment, default_threads, random_cubic, run_pipeline, PipelineConfig};
use isobisect::oracle::{brute_force_bisection, exhaustive_reducer_search, REDUCER_REGION_LIMIT};
use isobisect::reducers::*;

use common::{case_c_ladder, collision_ladder, reducer_changes};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Every connected cubic graph on at most 14 vertices has an isomorphic
/// bisection.
fn bisections_up_to_14() -> Verdict {
    let expected = [(4, 1), (6, 2), (8, 5), (10, 19), (12, 85), (14, 509)];
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, count) in expected {
        let graphs = fixtures::connected_cubic(n);
        let found = graphs
            .iter()
            .filter(|g| {
                brute_force_bisection(g, 16)
                    .unwrap()
                    .is_some_and(|c| verify_isomorphic_bisection(g, &c).is_ok())
            })
            .count();
        ok &= graphs.len() == count && found == count;
        parts.push(format!("n={n}: {found}/{}", graphs.len()));
    }
    check(ok, parts.join(", "))
}

/// `(5, 5)` decompositions exist up to 12 vertices; `K_{3,3}` and the prism
/// have none with both bounds at 4.
fn decomposition_existence_and_tightness() -> Verdict {
    let mut total = 0;
    let mut found = 0;
    for n in [4, 6, 8, 10, 12] {
        for g in fixtures::connected_cubic(n) {
            total += 1;
            if let SearchOutcome::Found(pair) = thomassen_decompose(&g, 5, 5, 1 << 26) {
                found += usize::from(validate(&g, &pair, 5, 5).is_ok());
            }
        }
    }
    let k33 = thomassen_decompose(&fixtures::k33(), 4, 4, 1 << 26);
    let prism = thomassen_decompose(&fixtures::prism(), 4, 4, 1 << 26);
    let tight = k33 == SearchOutcome::Infeasible && prism == SearchOutcome::Infeasible;
    check(
        found == total && total == 112 && tight,
        format!("(5,5) found on {found}/{total}; K33 at (4,4): {k33:?}; prism at (4,4): {prism:?}"),
    )
}

/// `|r_{P_t} - b_{P_t}| <= 3 sqrt(n ln n)` for `t = 2..=6` after bisecting,
/// in at least 49 of 50 runs at `n = 10^4`.
fn concentration_envelope() -> Verdict {
    let n = 10_000;
    let seeds: Vec<u64> = (0..50).collect();
    let (records, summary) = concentration_experiment(n, &seeds, 5, 5, 2, default_threads());
    let bisected = records.iter().filter(|r| r.outcome.as_ref().is_some_and(|o| o.bisected)).count();
    check(
        summary.skipped == 0 && bisected == 50 && summary.within_post_envelope >= 49,
        format!(
            "{}/{} runs within {:.2}, max |D_t| for t=2..6 {:?}, bisected {bisected}, skipped {}",
            summary.within_post_envelope, summary.runs, summary.post_envelope, summary.max_discrepancy, summary.skipped
        ),
    )
}

/// Constructions certify on their fixtures, and the exhaustive oracle
/// confirms every dispatcher success on a region of at most 12 vertices.
fn reducer_certification() -> Verdict {
    let mut built: Vec<(String, CubicGraph, Reducer)> = Vec::new();
    let mut errors: Vec<String> = Vec::new();
    let mut keep = |label: String, g: &CubicGraph, r: Result<Reducer, String>| match r {
        Ok(r) => built.push((label, g.clone(), r)),
        Err(e) => errors.push(format!("{label}: {e}")),
    };
    let foster = fixtures::foster();
    for t in 3..=6 {
        keep(format!("geodesic foster t={t}"), &foster, geodesic_reducer(&foster, 0, t).map_err(|e| e.to_string()));
    }
    for m in [80, 120, 200] {
        let g = fixtures::bundled_circular_ladder(m).unwrap();
        let q = g.find_geodesic_of_length(0, 14, 14).unwrap();
        for t in 3..=6 {
            keep(format!("unbalanced CL{m} t={t}"), &g, unbalanced_reducer(&g, &q, t).map_err(|e| e.to_string()));
        }
        keep(format!("p3 CL{m}"), &g, find_p3_reducer(&g, 0, 50).map_err(|e| e.to_string()));
    }
    let coll = collision_ladder();
    for t in 3..=6 {
        let q: Vec<usize> = (4..=8 + t - 3).collect();
        keep(format!("chord collision-ladder t={t}"), &coll, chord_reducer(&coll, &q, 80, t).map_err(|e| e.to_string()));
    }
    let case_c = case_c_ladder();
    let rail: Vec<usize> = (0..21).collect();
    keep("p3 case (c) ladder".into(), &case_c, p3_case_c(&case_c, &rail, 5, false).map_err(|e| e.to_string()));
    for seed in 0..3 {
        let g = fixtures::tube(80, 4, seed);
        keep(format!("p3 tube{seed}"), &g, find_p3_reducer(&g, 0, 50).map_err(|e| e.to_string()));
        for t in 4..=6 {
            keep(format!("composite tube{seed} t={t}"), &g, composite_reducer(&g, 0, t, 50).map_err(|e| e.to_string()));
        }
    }
    let mut dispatched = Vec::new();
    // the case (c) ladder is a t = 3 fixture, too short for the t >= 4 routes
    let graphs: Vec<(String, CubicGraph)> = vec![
        ("foster".into(), foster.clone()),
        ("CL80".into(), fixtures::bundled_circular_ladder(80).unwrap()),
        ("CL120".into(), fixtures::bundled_circular_ladder(120).unwrap()),
        ("CL200".into(), fixtures::bundled_circular_ladder(200).unwrap()),
        ("collision-ladder".into(), coll.clone()),
        ("tube0".into(), fixtures::tube(80, 4, 0)),
        ("tube3".into(), fixtures::tube(80, 4, 3)),
    ];
    let orders = graphs.iter().map(|(name, g)| (name.clone(), g.clone(), 3..=6)).chain([("case-c-ladder".to_string(), case_c.clone(), 3..=3)]);
    for (name, g, ts) in orders {
        for t in ts {
            match find_reducer(&g, 0, t, 50) {
                Ok(r) => dispatched.push((format!("dispatch {name} t={t}"), g.clone(), r)),
                Err(e) => errors.push(format!("dispatch {name} t={t}: {e}")),
            }
        }
    }
    let mut uncertified = 0;
    for (label, g, r) in built.iter().chain(&dispatched) {
        if let Err(e) = verify_reducer(g, r) {
            uncertified += 1;
            errors.push(format!("{label}: {e}"));
        }
    }
    let mut confirmed = 0;
    let mut oracle_checked = 0;
    for (label, g, r) in &dispatched {
        if r.region.len() > REDUCER_REGION_LIMIT {
            continue;
        }
        oracle_checked += 1;
        let changes = reducer_changes(g, r);
        let found = exhaustive_reducer_search(g, &r.region, r.t).unwrap();
        if found.iter().any(|o| o.region == r.region && o.kind == r.kind && reducer_changes(g, o) == changes) {
            confirmed += 1;
        } else {
            errors.push(format!("{label}: oracle disagrees"));
        }
    }
    check(
        errors.is_empty() && uncertified == 0 && oracle_checked > 0,
        format!(
            "{} constructed + {} dispatched reducers, {uncertified} uncertified, oracle confirmed {confirmed}/{oracle_checked} regions <= {REDUCER_REGION_LIMIT}{}",
            built.len(),
            dispatched.len(),
            if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join("; ")) }
        ),
    )
}

/// Pipeline with fallback on random connected cubic graphs of order
/// `2^12..2^16`, ten seeds each: every success re-verifies independently.
fn end_to_end_soundness() -> Verdict {
    let mut false_successes = 0;
    let mut rates = Vec::new();
    let mut below_target = Vec::new();
    for k in 12..=16 {
        let n = 1usize << k;
        let mut successes = 0;
        for seed in 0..10 {
            let g = random_cubic(n, seed, true).unwrap();
            let Ok(report) = run_pipeline(&g, &PipelineConfig::new(seed)) else { continue };
            let Some(c) = report.coloring.as_ref().filter(|_| report.success) else { continue };
            let census = census_pair(&g, c);
            if c.imbalance() == 0 && census.red == census.blue && !census.red.has_oversized() {
                successes += 1;
            } else {
                false_successes += 1;
            }
        }
        if successes < 9 {
            below_target.push(n);
        }
        rates.push(format!("n={n}: {successes}/10"));
    }
    check(
        false_successes == 0,
        format!(
            "{}; false successes {false_successes}; success target 9/10 {}",
            rates.join(", "),
            if below_target.is_empty() { "met".to_string() } else { format!("missed at n = {below_target:?}") }
        ),
    )
}

/// McDiarmid closed form, greedy centre count and the `P_2` closure.
fn closed_forms() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [100.0, 1e4, 65536.0, 1e6, 1e9] {
        let bound = mcdiarmid_bound(12.0, n, (n * f64::ln(n)).sqrt());
        worst = worst.max((bound - 2.0 * f64::powf(n, -1.0 / 72.0)).abs() / bound);
    }
    let mut graphs: Vec<CubicGraph> = [4, 6, 8, 10, 12, 14].iter().flat_map(|&n| fixtures::connected_cubic(n)).collect();
    graphs.extend([fixtures::petersen(), fixtures::heawood(), fixtures::mcgee(), fixtures::foster()]);
    graphs.extend([40, 80, 120, 200].map(|m| fixtures::bundled_circular_ladder(m).unwrap()));
    let mut centre_failures = 0;
    for g in &graphs {
        for d in 0..=4 {
            if (select_separated_centres(g, d).len() as f64) < centre_count_bound(g.order(), d) {
                centre_failures += 1;
            }
        }
    }
    let mut closure_failures = 0;
    let mut outputs = 0;
    for g in graphs.iter().filter(|g| g.order() <= 14).chain(&graphs[graphs.len() - 8..]) {
        if let Ok(report) = run_pipeline(g, &PipelineConfig::new(3)) {
            outputs += 1;
            closure_failures += usize::from(p2_closure_check(g, report.coloring.as_ref().unwrap()).is_err());
        }
    }
    check(
        worst <= 1e-12 && centre_failures == 0 && closure_failures == 0 && outputs > 600,
        format!(
            "McDiarmid relative error {worst:.1e}; centre bound failures {centre_failures} over {} graphs x d=0..4; closure failures {closure_failures}/{outputs} outputs",
            graphs.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("1 bisections of all connected cubic graphs, n <= 14", bisections_up_to_14),
        ("2 decomposition existence and tightness", decomposition_existence_and_tightness),
        ("3 concentration envelope at n = 10^4", concentration_envelope),
        ("4 reducer certification", reducer_certification),
        ("5 end-to-end soundness, n = 2^12..2^16", end_to_end_soundness),
        ("6 closed-form checks", closed_forms),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.starts_with(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {name}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.1}s) {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
