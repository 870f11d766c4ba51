use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use isobisect::balance::{p2_closure_check, verify_isomorphic_bisection};
use isobisect::census::census_pair;
use isobisect::coloring::{
    classify_balls, make_bisection, pair_opposite_balls, random_proper_coloring, select_separated_centres, Color,
    VertexColoring,
};
use isobisect::decompose::{heuristic_decompose, thomassen_decompose, HeuristicConfig, SearchOutcome};
use isobisect::graph::CubicGraph;
use isobisect::graph6::parse_cubic;
use isobisect::harness::{
    concentration_experiment, default_threads, random_cubic, run_pipeline, BallRadius, PipelineConfig,
};
use isobisect::oracle::{brute_force_bisection, verify_conjecture_stream, DEFAULT_BISECTION_LIMIT};
use isobisect::reducers::{find_reducer, verify_reducer, Reducer};

const EXIT_OK: u8 = 0;
const EXIT_NONEXISTENT: u8 = 2;
const EXIT_STAGE_FAILURE: u8 = 3;
const EXIT_INPUT: u8 = 4;

/// Isomorphic bisections of cubic graphs.
#[derive(Parser)]
#[command(name = "isobisect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Input {
    /// graph6 file, `-` for stdin; one graph per line
    #[arg(long, short, default_value = "-", conflicts_with = "random")]
    input: PathBuf,
    /// Use a random connected cubic graph on this many vertices instead
    #[arg(long)]
    random: Option<usize>,
    /// Seed for --random
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Split the edges into two linear forests
    Decompose {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 5)]
        l1: usize,
        #[arg(long, default_value_t = 5)]
        l2: usize,
        /// Exhaustive search instead of the randomised heuristic
        #[arg(long)]
        exact: bool,
        /// Node budget for --exact
        #[arg(long, default_value_t = 1 << 26)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random proper colouring of F1 and its bisection
    Color {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 5)]
        l1: usize,
        #[arg(long, default_value_t = 5)]
        l2: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Radius of the separated balls whose classes are counted
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Full pipeline with certification
    Pipeline {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ball radius; `adaptive` uses the reducer budget plus 2
        #[arg(long, default_value = "adaptive")]
        d: String,
        /// Reducer search radius around each ball centre
        #[arg(long, default_value_t = 50)]
        budget: usize,
        #[arg(long, default_value_t = 5)]
        l1: usize,
        #[arg(long, default_value_t = 5)]
        l2: usize,
        /// Fail instead of running the local-search repair
        #[arg(long)]
        no_fallback: bool,
        /// Write the coloured graph in DOT format here
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check a colouring (string of R/B letters) for an isomorphic bisection
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        coloring: String,
    },
    /// Exhaustive search for an isomorphic bisection
    Bruteforce {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_BISECTION_LIMIT)]
        limit: usize,
    },
    /// Brute-force every graph of a graph6 stream
    VerifyStream {
        #[arg(long, short, default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BISECTION_LIMIT)]
        limit: usize,
        /// Print only the totals
        #[arg(long)]
        summary: bool,
    },
    /// Find or check P_t-reducers
    Reducer {
        #[command(subcommand)]
        action: ReducerAction,
    },
    /// Discrepancy concentration over random graphs
    Experiment {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, default_value_t = 5)]
        l1: usize,
        #[arg(long, default_value_t = 5)]
        l2: usize,
        /// Ball radius for the class count
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Subcommand)]
enum ReducerAction {
    Find {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        vertex: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 50)]
        radius: usize,
    },
    /// Check a reducer JSON produced by `reducer find`
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        reducer: PathBuf,
    },
}

/// Input problems map to exit code 4.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn read_text(path: &PathBuf) -> Result<String> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map_err(|e| input_error(e.to_string()))?;
    } else {
        text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn load_graphs(input: &Input) -> Result<Vec<CubicGraph>> {
    if let Some(n) = input.random {
        return Ok(vec![random_cubic(n, input.graph_seed, true).map_err(|e| input_error(e.to_string()))?]);
    }
    let text = read_text(&input.input)?;
    let mut graphs = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        graphs.push(parse_cubic(line.trim()).map_err(|e| input_error(format!("line {}: {e}", i + 1)))?);
    }
    if graphs.is_empty() {
        bail!(input_error("no graph in input"));
    }
    Ok(graphs)
}

fn emit(value: serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, &value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    let mut code = EXIT_OK;
    match cli.command {
        Command::Decompose { input, l1, l2, exact, budget, seed } => {
            for g in load_graphs(&input)? {
                if exact {
                    match thomassen_decompose(&g, l1, l2, budget) {
                        SearchOutcome::Found(pair) => emit(json!({ "status": "found", "pair": pair }))?,
                        SearchOutcome::Infeasible => {
                            emit(json!({ "status": "infeasible", "l1": l1, "l2": l2 }))?;
                            code = code.max(EXIT_NONEXISTENT);
                        }
                        SearchOutcome::BudgetExhausted { nodes } => {
                            emit(json!({ "status": "budget_exhausted", "nodes": nodes }))?;
                            code = code.max(EXIT_STAGE_FAILURE);
                        }
                    }
                } else {
                    match heuristic_decompose(&g, l1, l2, seed, &HeuristicConfig::default()) {
                        Ok(pair) => emit(json!({ "status": "found", "pair": pair }))?,
                        Err(e) => {
                            emit(json!({ "status": "failed", "error": e.to_string() }))?;
                            code = code.max(EXIT_STAGE_FAILURE);
                        }
                    }
                }
            }
        }
        Command::Color { input, l1, l2, seed, d } => {
            for g in load_graphs(&input)? {
                let pair = heuristic_decompose(&g, l1, l2, seed, &HeuristicConfig::default())?;
                let coloring = random_proper_coloring(&pair, seed);
                let bisection = make_bisection(&coloring, &pair);
                let final_colouring = bisection.as_ref().map(|b| b.coloring.clone()).unwrap_or_else(|_| coloring.clone());
                let centres = select_separated_centres(&g, d);
                let balls = match classify_balls(&g, &final_colouring, &centres, d) {
                    Ok(classes) => {
                        let pairing = pair_opposite_balls(&g, &classes, &final_colouring);
                        json!({ "d": d, "centres": centres.len(), "kappa": classes.kappa(),
                                "histogram": classes.histogram(), "pairs": pairing.len() })
                    }
                    Err(e) => json!({ "d": d, "centres": centres.len(), "error": e.to_string() }),
                };
                emit(json!({
                    "balls": balls,
                    "n": g.order(),
                    "seed": seed,
                    "delta_before": coloring.imbalance(),
                    "bisection": bisection.as_ref().map(|b| b.flipped_paths.len()).map_err(|e| e.to_string()),
                    "discrepancies": census_pair(&g, &final_colouring).path_discrepancies(),
                    "coloring": final_colouring,
                }))?;
                if bisection.is_err() {
                    code = code.max(EXIT_STAGE_FAILURE);
                }
            }
        }
        Command::Pipeline { input, seed, d, budget, l1, l2, no_fallback, dot } => {
            let d = match d.as_str() {
                "adaptive" => BallRadius::Adaptive,
                s => BallRadius::Fixed(s.parse().map_err(|_| input_error(format!("--d {s}: expected a number or adaptive")))?),
            };
            let config = PipelineConfig { d, radius_budget: budget, l1, l2, fallback: !no_fallback, ..PipelineConfig::new(seed) };
            for g in load_graphs(&input)? {
                match run_pipeline(&g, &config) {
                    Ok(report) => {
                        if let (Some(path), Some(c)) = (&dot, &report.coloring) {
                            let fill = |v: usize| if c.get(v) == Color::Red { "red" } else { "lightblue" };
                            fs::write(path, g.to_dot(Some(&fill)))?;
                        }
                        emit(serde_json::to_value(&report)?)?;
                    }
                    Err(f) => {
                        emit(json!({ "success": false, "stage": f.stage, "diagnostics": f.diagnostics, "report": f.report }))?;
                        code = code.max(EXIT_STAGE_FAILURE);
                    }
                }
            }
        }
        Command::Verify { input, coloring } => {
            let c = VertexColoring::from_letters(coloring.trim()).ok_or_else(|| input_error("colouring must be R/B letters"))?;
            for g in load_graphs(&input)? {
                if c.len() != g.order() {
                    bail!(input_error(format!("colouring has {} letters for {} vertices", c.len(), g.order())));
                }
                match verify_isomorphic_bisection(&g, &c) {
                    Ok(cert) => {
                        let closure = p2_closure_check(&g, &c).map_err(|e| e.to_string());
                        emit(json!({ "isomorphic": true, "certificate": cert, "closure": closure }))?;
                    }
                    Err(e) => {
                        emit(json!({ "isomorphic": false, "refutation": e.to_string() }))?;
                        code = code.max(EXIT_STAGE_FAILURE);
                    }
                }
            }
        }
        Command::Bruteforce { input, limit } => {
            for g in load_graphs(&input)? {
                match brute_force_bisection(&g, limit).map_err(|e| input_error(e.to_string()))? {
                    Some(c) => emit(json!({ "n": g.order(), "exists": true, "coloring": c }))?,
                    None => {
                        emit(json!({ "n": g.order(), "exists": false }))?;
                        code = code.max(EXIT_NONEXISTENT);
                    }
                }
            }
        }
        Command::VerifyStream { input, limit, summary } => {
            let report = if input.as_os_str() == "-" {
                verify_conjecture_stream(io::stdin().lock(), limit)
            } else {
                let file = fs::File::open(&input).map_err(|e| input_error(format!("{}: {e}", input.display())))?;
                verify_conjecture_stream(BufReader::new(file), limit)
            };
            if !summary {
                for entry in &report.entries {
                    emit(serde_json::to_value(entry)?)?;
                }
            }
            emit(json!({ "totals": report.totals }))?;
            let t = &report.totals;
            eprintln!("{} graphs checked: {} with an isomorphic bisection, {} without, {} unreadable lines", t.graphs, t.found, t.none, t.errors);
            for (n, count) in &t.by_order {
                eprintln!("  n = {n}: {count}");
            }
            if report.totals.none > 0 {
                code = EXIT_NONEXISTENT;
            } else if report.totals.errors > 0 {
                code = EXIT_INPUT;
            }
        }
        Command::Reducer { action: ReducerAction::Find { input, vertex, t, radius } } => {
            for g in load_graphs(&input)? {
                if vertex >= g.order() {
                    bail!(input_error(format!("vertex {vertex} out of range")));
                }
                match find_reducer(&g, vertex, t, radius) {
                    Ok(r) => {
                        let cert = verify_reducer(&g, &r).expect("dispatcher returns certified reducers");
                        emit(json!({ "reducer": r, "certificate": cert }))?;
                    }
                    Err(f) => {
                        emit(json!({ "reducer": null, "attempts": f.attempts }))?;
                        code = code.max(EXIT_STAGE_FAILURE);
                    }
                }
            }
        }
        Command::Reducer { action: ReducerAction::Verify { input, reducer } } => {
            let text = read_text(&reducer)?;
            // accepts either a bare reducer or the output of `reducer find`
            let r: Reducer = serde_json::from_str(&text)
                .or_else(|_| {
                    let v: serde_json::Value = serde_json::from_str(&text)?;
                    serde_json::from_value(v["reducer"].clone())
                })
                .map_err(|e| input_error(format!("{}: {e}", reducer.display())))?;
            for g in load_graphs(&input)? {
                match verify_reducer(&g, &r) {
                    Ok(cert) => emit(json!({ "certified": true, "certificate": cert }))?,
                    Err(e) => {
                        emit(json!({ "certified": false, "violation": e.to_string() }))?;
                        code = code.max(EXIT_STAGE_FAILURE);
                    }
                }
            }
        }
        Command::Experiment { n, seeds, first_seed, l1, l2, d, threads } => {
            let seeds: Vec<u64> = (first_seed..first_seed + seeds).collect();
            let (records, summary) = concentration_experiment(n, &seeds, l1, l2, d, threads.unwrap_or_else(default_threads));
            for r in &records {
                emit(serde_json::to_value(r)?)?;
            }
            emit(json!({ "summary": summary }))?;
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::from(EXIT_STAGE_FAILURE)
            }
        }
    }
}
