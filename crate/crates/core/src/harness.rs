//! Random instances, the end-to-end pipeline and the concentration experiment.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::balance::{
    balance_all, greedy_repair, p2_closure_check, verify_isomorphic_bisection, BalanceConfig, BalanceStep,
    IsomorphismCertificate, RepairConfig,
};
use crate::census::census_pair;
use crate::coloring::{
    classify_balls, make_bisection, pair_opposite_balls, random_proper_coloring, select_separated_centres, Color,
    VertexColoring,
};
use crate::decompose::{heuristic_decompose, thomassen_decompose, HeuristicConfig, LinearForestPair, SearchOutcome};
use crate::graph::{CubicGraph, Graph, GraphError};

pub const RECORD_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("n = {0} must be even and at least 4")]
    BadOrder(usize),
    #[error("no simple{} pairing in {attempts} attempts", if *.connected { " connected" } else { "" })]
    RejectionCap { attempts: usize, connected: bool },
}

const REJECTION_CAP: usize = 10_000;

/// Pairing model: shuffle the `3n` half-edges and match them in consecutive
/// pairs, rejecting loops, multi-edges and (optionally) disconnected results.
pub fn random_cubic(n: usize, seed: u64, require_connected: bool) -> Result<CubicGraph, HarnessError> {
    if n < 4 || n % 2 == 1 {
        return Err(HarnessError::BadOrder(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..3 * n).map(|p| p / 3).collect();
    for _ in 0..REJECTION_CAP {
        points.shuffle(&mut rng);
        let edges: Vec<(usize, usize)> = points.chunks(2).map(|e| (e[0], e[1])).collect();
        let g = match CubicGraph::from_edges(n, &edges) {
            Ok(g) => g,
            Err(GraphError::SelfLoop(_)) | Err(GraphError::MultiEdge(..)) => continue,
            Err(e) => unreachable!("pairing produced {e}"),
        };
        if require_connected && !g.is_connected() {
            continue;
        }
        return Ok(g);
    }
    Err(HarnessError::RejectionCap { attempts: REJECTION_CAP, connected: require_connected })
}

// ----------------------------------------------------------------------------
// Pipeline
// ----------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallRadius {
    /// `radius_budget + 2`: every reducer domain found within the budget fits.
    Adaptive,
    Fixed(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub d: BallRadius,
    pub l1: usize,
    pub l2: usize,
    pub radius_budget: usize,
    pub fallback: bool,
    /// Components up to this order are decomposed by exhaustive search.
    pub exact_limit: usize,
    pub exact_budget: u64,
    pub heuristic: HeuristicConfig,
    pub repair: RepairConfig,
}

impl PipelineConfig {
    pub fn new(seed: u64) -> Self {
        PipelineConfig {
            seed,
            d: BallRadius::Adaptive,
            l1: 5,
            l2: 5,
            radius_budget: 50,
            fallback: true,
            exact_limit: 20,
            exact_budget: 1 << 24,
            heuristic: HeuristicConfig::default(),
            repair: RepairConfig { seed, ..RepairConfig::default() },
        }
    }

    pub fn radius(&self) -> usize {
        match self.d {
            BallRadius::Adaptive => self.radius_budget + 2,
            BallRadius::Fixed(d) => d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Decompose,
    Colour,
    Bisect,
    Balls,
    Balance,
    Repair,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// matched balls and reducer recolourings
    Balance,
    /// local-search fallback
    Repair,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub vertices: usize,
    pub stages: Vec<StageRecord>,
    pub route: Option<Route>,
    pub d: usize,
    pub centres: usize,
    pub kappa: Option<usize>,
    pub pairs: Option<usize>,
    /// imbalance of the random colouring
    pub delta_before: i64,
    /// `r_{P_t} - b_{P_t}`, `t = 1..=6`, after bisecting
    pub discrepancies: [i64; 6],
    pub steps: Vec<BalanceStep>,
    pub repair_flips: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub n: usize,
    pub seed: u64,
    pub success: bool,
    pub components: Vec<ComponentReport>,
    pub certificate: Option<IsomorphismCertificate>,
    pub coloring: Option<VertexColoring>,
}

#[derive(Clone, Debug, Error)]
#[error("{stage:?} stage failed: {diagnostics}")]
pub struct PipelineFailure {
    pub stage: Stage,
    pub diagnostics: String,
    pub report: PipelineReport,
}

fn decompose(g: &Graph, config: &PipelineConfig) -> Result<(LinearForestPair, String), String> {
    if g.order() <= config.exact_limit {
        match thomassen_decompose(g, config.l1, config.l2, config.exact_budget) {
            SearchOutcome::Found(p) => return Ok((p, "exact".into())),
            other => {
                let why = format!("exact search: {other:?}");
                return heuristic_decompose(g, config.l1, config.l2, config.seed, &config.heuristic)
                    .map(|p| (p, format!("heuristic after {why}")))
                    .map_err(|e| format!("{why}; {e}"));
            }
        }
    }
    heuristic_decompose(g, config.l1, config.l2, config.seed, &config.heuristic)
        .map(|p| (p, "heuristic".into()))
        .map_err(|e| e.to_string())
}

/// Flips the lowest-numbered vertices of the surplus colour.
fn balance_by_vertices(coloring: &VertexColoring) -> VertexColoring {
    let mut out = coloring.clone();
    let surplus = if coloring.imbalance() > 0 { Color::Red } else { Color::Blue };
    let mut excess = coloring.imbalance().unsigned_abs() / 2;
    for v in 0..out.len() {
        if excess == 0 {
            break;
        }
        if out.get(v) == surplus {
            out.flip(v);
            excess -= 1;
        }
    }
    out
}

fn run_component(g: &Graph, config: &PipelineConfig) -> (ComponentReport, Result<VertexColoring, (Stage, String)>) {
    let d = config.radius();
    let mut rep = ComponentReport {
        vertices: g.order(),
        stages: Vec::new(),
        route: None,
        d,
        centres: 0,
        kappa: None,
        pairs: None,
        delta_before: 0,
        discrepancies: [0; 6],
        steps: Vec::new(),
        repair_flips: None,
    };
    let record = |rep: &mut ComponentReport, stage, ok, detail: String| rep.stages.push(StageRecord { stage, ok, detail });

    let pair = match decompose(g, config) {
        Ok((p, how)) => {
            record(&mut rep, Stage::Decompose, true, how);
            p
        }
        Err(e) => {
            record(&mut rep, Stage::Decompose, false, e.clone());
            return (rep, Err((Stage::Decompose, e)));
        }
    };
    let coloring = random_proper_coloring(&pair, config.seed);
    rep.delta_before = coloring.imbalance();
    let detail = format!("imbalance {}", rep.delta_before);
    record(&mut rep, Stage::Colour, true, detail);

    let mut paper_failure: Option<(Stage, String)> = None;
    let start = match make_bisection(&coloring, &pair) {
        Ok(b) => {
            record(&mut rep, Stage::Bisect, true, format!("{} paths swapped", b.flipped_paths.len()));
            b.coloring
        }
        Err(e) => {
            record(&mut rep, Stage::Bisect, false, e.to_string());
            paper_failure = Some((Stage::Bisect, e.to_string()));
            balance_by_vertices(&coloring)
        }
    };
    rep.discrepancies = census_pair(g, &start).path_discrepancies();

    if paper_failure.is_none() {
        let centres = select_separated_centres(g, d);
        rep.centres = centres.len();
        match classify_balls(g, &start, &centres, d) {
            Err(e) => {
                record(&mut rep, Stage::Balls, false, e.to_string());
                paper_failure = Some((Stage::Balls, e.to_string()));
            }
            Ok(classes) => {
                let pairing = pair_opposite_balls(g, &classes, &start);
                rep.kappa = Some(classes.kappa());
                rep.pairs = Some(pairing.len());
                record(&mut rep, Stage::Balls, true, format!("{} classes, {} pairs", classes.kappa(), pairing.len()));
                match balance_all(g, &start, &pairing, &BalanceConfig { radius_budget: config.radius_budget }) {
                    Ok(out) => {
                        record(&mut rep, Stage::Balance, true, format!("{} steps", out.steps.len()));
                        rep.steps = out.steps;
                        rep.route = Some(Route::Balance);
                        return (rep, Ok(out.coloring));
                    }
                    Err(f) => {
                        rep.steps = f.steps.clone();
                        record(&mut rep, Stage::Balance, false, f.to_string());
                        paper_failure = Some((Stage::Balance, f.to_string()));
                    }
                }
            }
        }
    }
    let failure = paper_failure.expect("balance route returned early on success");
    if !config.fallback {
        return (rep, Err(failure));
    }
    match greedy_repair(g, &start, &pair, &config.repair) {
        Ok(out) => {
            record(&mut rep, Stage::Repair, true, format!("{} flips in {} iterations", out.flips, out.iterations));
            rep.repair_flips = Some(out.flips);
            rep.route = Some(Route::Repair);
            (rep, Ok(out.coloring))
        }
        Err(e) => {
            record(&mut rep, Stage::Repair, false, e.to_string());
            (rep, Err((Stage::Repair, format!("{}; after {:?}: {}", e, failure.0, failure.1))))
        }
    }
}

/// Decompose, colour, bisect, pair balls, balance and verify, each connected
/// component on its own; with `fallback` a failing component is handed to
/// [`greedy_repair`]. Success always carries a certificate for the whole graph.
pub fn run_pipeline(g: &CubicGraph, config: &PipelineConfig) -> Result<PipelineReport, PipelineFailure> {
    let n = g.order();
    let mut report =
        PipelineReport { n, seed: config.seed, success: false, components: Vec::new(), certificate: None, coloring: None };
    let mut colours = vec![Color::Blue; n];
    let mut failure: Option<(Stage, String)> = None;
    for (component, ids) in g.split_components() {
        let (rep, result) = run_component(&component, config);
        report.components.push(rep);
        match result {
            Ok(c) => {
                for (local, &v) in ids.iter().enumerate() {
                    colours[v] = c.get(local);
                }
            }
            Err(f) => {
                failure.get_or_insert(f);
            }
        }
    }
    if let Some((stage, diagnostics)) = failure {
        return Err(PipelineFailure { stage, diagnostics, report });
    }
    let coloring = VertexColoring::new(colours);
    let verified = p2_closure_check(g, &coloring)
        .map_err(|e| e.to_string())
        .and_then(|()| verify_isomorphic_bisection(g, &coloring).map_err(|e| e.to_string()));
    match verified {
        Ok(cert) => {
            report.success = true;
            report.certificate = Some(cert);
            report.coloring = Some(coloring);
            Ok(report)
        }
        Err(diagnostics) => Err(PipelineFailure { stage: Stage::Verify, diagnostics, report }),
    }
}

// ----------------------------------------------------------------------------
// Concentration experiment
// ----------------------------------------------------------------------------

/// `sqrt(n ln n)`.
pub fn sqrt_n_log_n(n: usize) -> f64 {
    let n = n as f64;
    (n * n.ln()).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema: u32,
    pub n: usize,
    pub seed: u64,
    /// `None` when decomposition failed and the seed was skipped
    pub outcome: Option<ExperimentOutcome>,
    pub error: Option<String>,
    pub micros: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    /// `|r_{P_t} - b_{P_t}|` for `t = 2..=6` after bisecting
    pub discrepancies: [u64; 5],
    /// imbalance of the random colouring before bisecting
    pub delta_before: i64,
    pub bisected: bool,
    pub l1_used: usize,
    pub d: usize,
    pub kappa: usize,
    pub pairs: usize,
    pub centres: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub n: usize,
    pub runs: usize,
    pub skipped: usize,
    pub sqrt_n_log_n: f64,
    pub pre_envelope: f64,
    pub post_envelope: f64,
    /// runs with every `|r_{P_t} - b_{P_t}|` inside the post envelope
    pub within_post_envelope: usize,
    /// runs with `|Δ| <= sqrt(n log n) / 10` before bisecting
    pub delta_within_tenth: usize,
    pub max_discrepancy: [u64; 5],
    pub max_delta: u64,
    pub d: usize,
    pub mean_kappa: f64,
    pub min_pairs: usize,
    /// `2^(-2d-5) n`
    pub pair_bound: f64,
}

/// One seed: random connected cubic graph, decomposition, random colouring,
/// bisection, path discrepancies and the ball-class count at radius `d`.
pub fn experiment_run(n: usize, seed: u64, l1: usize, l2: usize, d: usize) -> ExperimentRecord {
    let started = Instant::now();
    let run = || -> Result<ExperimentOutcome, String> {
        let g = random_cubic(n, seed, true).map_err(|e| e.to_string())?;
        let pair = heuristic_decompose(&g, l1, l2, seed, &HeuristicConfig::default()).map_err(|e| e.to_string())?;
        let coloring = random_proper_coloring(&pair, seed);
        let delta_before = coloring.imbalance();
        let (bisected, coloring) = match make_bisection(&coloring, &pair) {
            Ok(b) => (true, b.coloring),
            Err(_) => (false, coloring),
        };
        let disc = census_pair(&g, &coloring).path_discrepancies();
        let mut discrepancies = [0u64; 5];
        for t in 2..=6 {
            discrepancies[t - 2] = disc[t - 1].unsigned_abs();
        }
        let centres = select_separated_centres(&g, d);
        let classes = classify_balls(&g, &coloring, &centres, d).map_err(|e| e.to_string())?;
        let pairs = pair_opposite_balls(&g, &classes, &coloring).len();
        Ok(ExperimentOutcome {
            discrepancies,
            delta_before,
            bisected,
            l1_used: pair.max_len(crate::decompose::Forest::F1),
            d,
            kappa: classes.kappa(),
            pairs,
            centres: centres.len(),
        })
    };
    let (outcome, error) = match run() {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e)),
    };
    ExperimentRecord { schema: RECORD_SCHEMA_VERSION, n, seed, outcome, error, micros: started.elapsed().as_micros() }
}

/// Pure function of the records.
pub fn summarise(n: usize, d: usize, records: &[ExperimentRecord]) -> ExperimentSummary {
    let s = sqrt_n_log_n(n);
    let done: Vec<&ExperimentOutcome> = records.iter().filter_map(|r| r.outcome.as_ref()).collect();
    let mut max_discrepancy = [0u64; 5];
    for o in &done {
        for (m, &x) in max_discrepancy.iter_mut().zip(&o.discrepancies) {
            *m = (*m).max(x);
        }
    }
    ExperimentSummary {
        n,
        runs: done.len(),
        skipped: records.len() - done.len(),
        sqrt_n_log_n: s,
        pre_envelope: 2.0 * s,
        post_envelope: 3.0 * s,
        within_post_envelope: done.iter().filter(|o| o.discrepancies.iter().all(|&x| x as f64 <= 3.0 * s)).count(),
        delta_within_tenth: done.iter().filter(|o| o.delta_before.unsigned_abs() as f64 <= s / 10.0).count(),
        max_discrepancy,
        max_delta: done.iter().map(|o| o.delta_before.unsigned_abs()).max().unwrap_or(0),
        d,
        mean_kappa: if done.is_empty() { 0.0 } else { done.iter().map(|o| o.kappa as f64).sum::<f64>() / done.len() as f64 },
        min_pairs: done.iter().map(|o| o.pairs).min().unwrap_or(0),
        pair_bound: n as f64 * 2f64.powi(-(2 * d as i32) - 5),
    }
}

/// Runs the seeds on `threads` workers; records come back in seed order.
pub fn concentration_experiment(
    n: usize,
    seeds: &[u64],
    l1: usize,
    l2: usize,
    d: usize,
    threads: usize,
) -> (Vec<ExperimentRecord>, ExperimentSummary) {
    let records = parallel_map(seeds, threads, |&seed| experiment_run(n, seed, l1, l2, d));
    let summary = summarise(n, d, &records);
    (records, summary)
}

/// Applies `f` to every item on a small work queue; output order matches input.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, items.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("every item processed")).collect()
}

/// Worker count: available parallelism.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
