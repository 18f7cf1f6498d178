//! `pmlab`: batch front door for the parity matching lab.
//!
//! Exit codes: 0 success / feasible / matching found; 1 certified negative
//! (infeasible, no such matching, verification failure); 2 usage error;
//! 3 enumeration or search cap exceeded.

mod reports;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use parity_matching::bounds::{
    build_parity_weight_matrix, hyperplane_bound, max_rectangle_value, nnmf_upper_bound,
    rectangle_cover_bound, uniform_over_violation_count, BoundsError, NnmfConfig, RectangleMode,
    WeightMatrix,
};
use parity_matching::enumerate::{
    brute_force_parity_decision, enumerate_exact_red, enumerate_labelings,
    enumerate_perfect_matchings, EnumCaps, EnumError,
};
use parity_matching::family::{
    all_front_subsets, build_verified_family, verify_family, PermutationFamily,
};
use parity_matching::labeling::{violation_count, Labeling, ParityTarget};
use parity_matching::matching::Matching;
use parity_matching::partition::{
    expected_n, labeling_respects, matching_respects, sample_full_violation, sample_three_violation,
};
use parity_matching::relaxation::{build_relaxation, lp_feasible, FeasibilityVerdict};
use parity_matching::seeding::child_seed;
use parity_matching::slack::{build_slack_matrix, read_csv, sidecar, write_csv, SlackMatrix};
use parity_matching::solver::{
    check_result, solve_parity_with_stats, NoMatchingWitness, ParityResult,
};
use parity_matching::{ColoredBipartiteGraph, Rat, Side};

use reports::*;

#[derive(Parser)]
#[command(
    name = "pmlab",
    version,
    about = "Red/blue bipartite parity matching lab"
)]
struct Cli {
    /// Worker thread count (default: PMLAB_THREADS or available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Odd,
    Even,
}

impl From<ParityArg> for ParityTarget {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Odd => ParityTarget::Odd,
            ParityArg::Even => ParityTarget::Even,
        }
    }
}

#[derive(Args)]
struct CapsArgs {
    /// Matching enumeration cap (largest side size).
    #[arg(long, default_value_t = 8)]
    cap_enum: usize,
    /// Labeling enumeration cap (total vertex count).
    #[arg(long, default_value_t = 24)]
    cap_labelings: usize,
}

impl CapsArgs {
    fn caps(&self) -> EnumCaps {
        EnumCaps {
            max_matching_n: self.cap_enum,
            max_labeling_vertices: self.cap_labelings,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Find a perfect matching of the requested red parity, or emit a
    /// labeling certificate that none exists.
    Solve {
        #[arg(long, value_enum)]
        parity: ParityArg,
        /// Include wall-clock timing in the report (off by default so
        /// replays are byte-identical).
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        graph: PathBuf,
    },
    /// Decide by enumeration whether a perfect matching with exactly k red
    /// edges exists.
    Exact {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        caps: CapsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        graph: PathBuf,
    },
    /// Enumerate perfect matchings, exact-k matchings, or labelings.
    Enumerate {
        #[arg(long, value_enum)]
        what: EnumerateWhat,
        /// Graph file; alternatively use --complete-double.
        #[arg(long, conflicts_with = "complete_double")]
        graph: Option<PathBuf>,
        /// Use the canonical complete double graph on n pairs.
        #[arg(long)]
        complete_double: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "odd")]
        parity: ParityArg,
        /// Emit only counts instead of full listings.
        #[arg(long)]
        count_only: bool,
        #[command(flatten)]
        caps: CapsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the labeling relaxation LP and decide feasibility exactly.
    Relax {
        #[arg(long, value_enum)]
        parity: ParityArg,
        #[command(flatten)]
        caps: CapsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        graph: PathBuf,
    },
    /// Build the slack matrix (CSV plus JSON sidecar).
    Slack {
        #[arg(long, conflicts_with = "n")]
        graph: Option<PathBuf>,
        /// Complete double graph on n pairs.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "odd")]
        parity: ParityArg,
        #[arg(long)]
        include_degree_cols: bool,
        #[command(flatten)]
        caps: CapsArgs,
        /// CSV output path; the sidecar lands next to it. Stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nonnegative-rank bounds on a slack matrix read from CSV.
    Bounds {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        which: WhichBound,
        /// JSON weight-matrix file for the hyperplane bound.
        #[arg(long)]
        weight_file: Option<PathBuf>,
        /// Build the parity weight matrix with uniform distributions.
        #[arg(long, conflicts_with = "weight_file")]
        parity_weights: bool,
        /// k parameter of the parity weight matrix.
        #[arg(long, default_value_t = 1)]
        kparam: usize,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: RectModeArg,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stream seeded samples of the violation distributions as JSON lines.
    Sample {
        /// Which distribution: 3 or 4k3.
        #[arg(long)]
        mu: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the alternative front-block generator (needs --family).
        #[arg(long)]
        alt: bool,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a verified permutation family and persist it as JSON.
    Family {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        retries: usize,
        /// Number of random verification sets for k >= 2 (k = 1 is
        /// verified exhaustively).
        #[arg(long, default_value_t = 100)]
        verify_sets: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a report, transcript, or family file.
    Verify { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumerateWhat {
    Pms,
    ExactK,
    Labelings,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichBound {
    Hyperplane,
    Cover,
    Nnmf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RectModeArg {
    Exhaustive,
    Local,
}

/// Errors mapped onto process exit codes.
enum Failure {
    Usage(String),
    Cap(String),
}

impl From<EnumError> for Failure {
    fn from(e: EnumError) -> Self {
        Failure::Cap(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("PMLAB_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_graph(path: &Path) -> Result<ColoredBipartiteGraph, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    ColoredBipartiteGraph::parse(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("report serialization");
    s.push('\n');
    s
}

fn run(cmd: Cmd) -> CmdResult {
    match cmd {
        Cmd::Solve {
            parity,
            timings,
            out,
            graph,
        } => cmd_solve(parity.into(), timings, out, &graph),
        Cmd::Exact {
            k,
            caps,
            out,
            graph,
        } => cmd_exact(k, &caps.caps(), out, &graph),
        Cmd::Enumerate {
            what,
            graph,
            complete_double,
            k,
            parity,
            count_only,
            caps,
            out,
        } => cmd_enumerate(
            what,
            graph,
            complete_double,
            k,
            parity.into(),
            count_only,
            &caps.caps(),
            out,
        ),
        Cmd::Relax {
            parity,
            caps,
            out,
            graph,
        } => cmd_relax(parity.into(), &caps.caps(), out, &graph),
        Cmd::Slack {
            graph,
            n,
            parity,
            include_degree_cols,
            caps,
            out,
        } => cmd_slack(
            graph,
            n,
            parity.into(),
            include_degree_cols,
            &caps.caps(),
            out,
        ),
        Cmd::Bounds {
            matrix,
            which,
            weight_file,
            parity_weights,
            kparam,
            mode,
            rank,
            restarts,
            tol,
            seed,
            out,
        } => cmd_bounds(
            &matrix,
            which,
            weight_file,
            parity_weights,
            kparam,
            mode,
            rank,
            restarts,
            tol,
            seed,
            out,
        ),
        Cmd::Sample {
            mu,
            k,
            m,
            count,
            seed,
            alt,
            family,
            out,
        } => cmd_sample(&mu, k, m, count, seed, alt, family, out),
        Cmd::Family {
            k,
            seed,
            retries,
            verify_sets,
            out,
        } => cmd_family(k, seed, retries, verify_sets, out),
        Cmd::Verify { file } => cmd_verify(&file),
    }
}

fn cmd_solve(parity: ParityTarget, timings: bool, out: Option<PathBuf>, path: &Path) -> CmdResult {
    let g = load_graph(path)?;
    let started = std::time::Instant::now();
    let (result, stats) = solve_parity_with_stats(&g, parity)
        .map_err(|e| Failure::Usage(format!("solver failed: {e}")))?;
    let pm_micros = timings.then(|| started.elapsed().as_micros());
    let (kind, matching, certificate, hall, code) = match &result {
        ParityResult::MatchingFound(m) => ("matching_found", Some(edges_out(m)), None, None, 0u8),
        ParityResult::Certificate(l) => ("certificate", None, Some(l.to_bitstring()), None, 1),
        ParityResult::NoPerfectMatching(w) => {
            let hall = match w {
                NoMatchingWitness::SideMismatch { .. } => None,
                NoMatchingWitness::Hall(h) => Some(HallOut {
                    side: match h.side {
                        Side::Left => "left".into(),
                        Side::Right => "right".into(),
                    },
                    set: h.set.clone(),
                    neighborhood: h.neighborhood.clone(),
                }),
            };
            ("no_perfect_matching", None, None, hall, 1)
        }
    };
    let report = SolveReport {
        schema_version: SCHEMA_VERSION,
        command: "solve".into(),
        config: SolveConfig {
            parity,
            input: path.display().to_string(),
        },
        graph: g.to_text(),
        kind: kind.into(),
        matching,
        certificate,
        hall_witness: hall,
        stats: SolveStatsOut {
            components: stats.components,
            relevant_edges: stats.relevant_edges,
            rotations: stats.rotations,
            pm_micros,
        },
    };
    emit(&out, &json_line(&report))?;
    Ok(code)
}

fn cmd_exact(k: usize, caps: &EnumCaps, out: Option<PathBuf>, path: &Path) -> CmdResult {
    let g = load_graph(path)?;
    let all = enumerate_perfect_matchings(&g, caps)?;
    let hits = enumerate_exact_red(&g, k, caps)?;
    let report = ExactReport {
        schema_version: SCHEMA_VERSION,
        command: "exact".into(),
        config: ExactConfig {
            k,
            input: path.display().to_string(),
            cap: caps.max_matching_n,
        },
        graph: g.to_text(),
        exists: !hits.is_empty(),
        count: hits.len(),
        example: hits.first().map(edges_out),
        checked: format!(
            "exhaustive enumeration of all {} perfect matchings",
            all.len()
        ),
    };
    let code = if report.exists { 0 } else { 1 };
    emit(&out, &json_line(&report))?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_enumerate(
    what: EnumerateWhat,
    graph: Option<PathBuf>,
    complete_double: Option<usize>,
    k: Option<usize>,
    parity: ParityTarget,
    count_only: bool,
    caps: &EnumCaps,
    out: Option<PathBuf>,
) -> CmdResult {
    let g = match (&graph, complete_double) {
        (Some(path), None) => load_graph(path)?,
        (None, Some(n)) => {
            ColoredBipartiteGraph::complete_double(n).map_err(|e| Failure::Usage(e.to_string()))?
        }
        _ => {
            return Err(Failure::Usage(
                "exactly one of --graph or --complete-double is required".into(),
            ))
        }
    };
    let mut lines = String::new();
    match what {
        EnumerateWhat::Pms | EnumerateWhat::ExactK => {
            let matchings = match what {
                EnumerateWhat::Pms => enumerate_perfect_matchings(&g, caps)?,
                EnumerateWhat::ExactK => {
                    let k = k.ok_or_else(|| {
                        Failure::Usage("--k is required for --what exact-k".into())
                    })?;
                    enumerate_exact_red(&g, k, caps)?
                }
                _ => unreachable!(),
            };
            if count_only {
                lines.push_str(&json_line(
                    &serde_json::json!({"schema_version": SCHEMA_VERSION, "count": matchings.len()}),
                ));
            } else {
                for (i, m) in matchings.iter().enumerate() {
                    lines.push_str(&json_line(&serde_json::json!({
                        "schema_version": SCHEMA_VERSION,
                        "index": i,
                        "red_count": m.red_count(),
                        "edges": edges_out(m),
                    })));
                }
            }
        }
        EnumerateWhat::Labelings => {
            let n = g.square_n().ok_or_else(|| {
                Failure::Usage("labeling enumeration requires a square graph".into())
            })?;
            let labelings = enumerate_labelings(n, parity, caps)?;
            if count_only {
                lines.push_str(&json_line(
                    &serde_json::json!({"schema_version": SCHEMA_VERSION, "count": labelings.len()}),
                ));
            } else {
                for (i, l) in labelings.iter().enumerate() {
                    lines.push_str(&json_line(&serde_json::json!({
                        "schema_version": SCHEMA_VERSION,
                        "index": i,
                        "bits": l.to_bitstring(),
                        "ones": l.ones_count(),
                    })));
                }
            }
        }
    }
    emit(&out, &lines)?;
    Ok(0)
}

fn cmd_relax(
    parity: ParityTarget,
    caps: &EnumCaps,
    out: Option<PathBuf>,
    path: &Path,
) -> CmdResult {
    let g = load_graph(path)?;
    let lp = build_relaxation(&g, parity, caps).map_err(|e| match e {
        parity_matching::relaxation::RelaxError::Enum(e) => Failure::Cap(e.to_string()),
        other => Failure::Usage(other.to_string()),
    })?;
    let verdict = lp_feasible(&lp);
    let witness = match &verdict {
        FeasibilityVerdict::Feasible { witness } => Some(
            witness
                .iter()
                .zip(g.edges())
                .filter(|(x, _)| !x.is_zero())
                .map(|(x, e)| WitnessCoordinate {
                    u: e.u + 1,
                    v: e.v + 1,
                    color: e.color,
                    value: x.to_string(),
                })
                .collect::<Vec<_>>(),
        ),
        FeasibilityVerdict::Infeasible => None,
    };
    // Infeasibility is accompanied by the solver's machine-checkable
    // negative certificate.
    let (certificate, hall_witness) = if verdict.is_feasible() {
        (None, None)
    } else {
        match solve_parity_with_stats(&g, parity)
            .map_err(|e| Failure::Usage(format!("solver failed: {e}")))?
            .0
        {
            ParityResult::Certificate(l) => (Some(l.to_bitstring()), None),
            ParityResult::NoPerfectMatching(NoMatchingWitness::Hall(h)) => (
                None,
                Some(HallOut {
                    side: match h.side {
                        Side::Left => "left".into(),
                        Side::Right => "right".into(),
                    },
                    set: h.set,
                    neighborhood: h.neighborhood,
                }),
            ),
            ParityResult::NoPerfectMatching(NoMatchingWitness::SideMismatch { .. }) => (None, None),
            ParityResult::MatchingFound(_) => {
                return Err(Failure::Usage(
                    "internal inconsistency: infeasible relaxation but a matching exists".into(),
                ))
            }
        }
    };
    let report = RelaxReport {
        schema_version: SCHEMA_VERSION,
        command: "relax".into(),
        config: RelaxConfig {
            parity,
            input: path.display().to_string(),
        },
        graph: g.to_text(),
        feasible: verdict.is_feasible(),
        variables: g.edges().len(),
        degree_rows: lp.degree_rows.len(),
        labeling_rows: lp.labeling_rows.len(),
        witness,
        certificate,
        hall_witness,
    };
    let code = if report.feasible { 0 } else { 1 };
    emit(&out, &json_line(&report))?;
    Ok(code)
}

fn cmd_slack(
    graph: Option<PathBuf>,
    n: Option<usize>,
    parity: ParityTarget,
    include_degree_cols: bool,
    caps: &EnumCaps,
    out: Option<PathBuf>,
) -> CmdResult {
    let g = match (&graph, n) {
        (Some(path), None) => load_graph(path)?,
        (None, Some(n)) => {
            ColoredBipartiteGraph::complete_double(n).map_err(|e| Failure::Usage(e.to_string()))?
        }
        _ => {
            return Err(Failure::Usage(
                "exactly one of --graph or --n is required".into(),
            ))
        }
    };
    let s = build_slack_matrix(&g, parity, include_degree_cols, caps).map_err(|e| match e {
        parity_matching::slack::SlackError::Enum(e) => Failure::Cap(e.to_string()),
        other => Failure::Usage(other.to_string()),
    })?;
    let mut csv = Vec::new();
    write_csv(&s, &mut csv).map_err(|e| Failure::Usage(e.to_string()))?;
    let csv = String::from_utf8(csv).expect("csv is utf8");
    match &out {
        Some(path) => {
            emit(&out, &csv)?;
            let side = sidecar(&s);
            let meta_path = path.with_extension("meta.json");
            fs::write(&meta_path, json_line(&side))
                .map_err(|e| Failure::Usage(format!("cannot write sidecar: {e}")))?;
        }
        None => {
            emit(&None, &csv)?;
        }
    }
    Ok(0)
}

fn read_matrix(path: &Path) -> Result<Vec<Vec<Rat>>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let (entries, _, _) = read_csv(text.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(entries)
}

/// Rebuilds a `SlackMatrix` shell around raw entries so the parity weight
/// builder can consume matrices loaded from CSV.
fn slack_shell(entries: Vec<Vec<Rat>>) -> SlackMatrix {
    SlackMatrix {
        n: 0,
        target: ParityTarget::Odd,
        rows: Vec::new(),
        cols: Vec::new(),
        degree_cols: 0,
        entries,
    }
}

fn map_bounds_err(e: BoundsError) -> Failure {
    match e {
        BoundsError::CapExceeded { .. } => Failure::Cap(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds(
    matrix: &Path,
    which: WhichBound,
    weight_file: Option<PathBuf>,
    parity_weights: bool,
    kparam: usize,
    mode: RectModeArg,
    rank: usize,
    restarts: usize,
    tol: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> CmdResult {
    let entries = read_matrix(matrix)?;
    let config = serde_json::json!({
        "matrix": matrix.display().to_string(),
        "kparam": kparam,
        "rank": rank,
        "restarts": restarts,
        "tol": tol,
        "seed": seed,
    });
    let report = match which {
        WhichBound::Hyperplane => {
            let w = match (&weight_file, parity_weights) {
                (Some(path), false) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| Failure::Usage(format!("cannot read weights: {e}")))?;
                    serde_json::from_str::<WeightMatrix>(&text)
                        .map_err(|e| Failure::Usage(format!("bad weight file: {e}")))?
                }
                (None, true) => {
                    let shell = slack_shell(entries.clone());
                    let mu3 = uniform_over_violation_count(&shell, 3);
                    let heavy = uniform_over_violation_count(&shell, 4 * kparam + 3);
                    build_parity_weight_matrix(&shell, kparam, &mu3, &heavy)
                        .map_err(map_bounds_err)?
                }
                _ => {
                    return Err(Failure::Usage(
                        "hyperplane bound needs --weight-file or --parity-weights".into(),
                    ))
                }
            };
            // Mode is informational here: the bound itself always uses the
            // exhaustive (exact) maximum.
            if matches!(mode, RectModeArg::Local) {
                let _ = max_rectangle_value(&w, RectangleMode::LocalSearch { restarts, seed })
                    .map_err(map_bounds_err)?;
            }
            let b = hyperplane_bound(&entries, &w).map_err(map_bounds_err)?;
            BoundsReport {
                schema_version: SCHEMA_VERSION,
                command: "bounds".into(),
                bound_name: "hyperplane".into(),
                config,
                value_num: Some(b.value.numer_string()),
                value_den: Some(b.value.denom_string()),
                witness: serde_json::json!({
                    "inner_product": b.inner_product.to_string(),
                    "sup_norm": b.sup_norm.to_string(),
                    "max_rectangle": b.max_rectangle.to_string(),
                    "rectangle_rows": b.rectangle.rows,
                    "rectangle_cols": b.rectangle.cols,
                }),
            }
        }
        WhichBound::Cover => {
            let value = rectangle_cover_bound(&entries).map_err(map_bounds_err)?;
            BoundsReport {
                schema_version: SCHEMA_VERSION,
                command: "bounds".into(),
                bound_name: "rectangle_cover".into(),
                config,
                value_num: Some(value.numer_string()),
                value_den: Some(value.denom_string()),
                witness: serde_json::Value::Null,
            }
        }
        WhichBound::Nnmf => {
            let outcome = nnmf_upper_bound(
                &entries,
                &NnmfConfig {
                    rank,
                    restarts,
                    tolerance: tol,
                    max_iters: 2000,
                    seed,
                },
            );
            BoundsReport {
                schema_version: SCHEMA_VERSION,
                command: "bounds".into(),
                bound_name: "nnmf_upper".into(),
                config,
                value_num: outcome.success.then(|| rank.to_string()),
                value_den: outcome.success.then(|| "1".to_string()),
                witness: serde_json::json!({
                    "success": outcome.success,
                    "best_error": outcome.best_error,
                    "restart_errors": outcome.restart_errors,
                }),
            }
        }
    };
    let code = match which {
        WhichBound::Nnmf if report.value_num.is_none() => 1,
        _ => 0,
    };
    emit(&out, &json_line(&report))?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    mu: &str,
    k: usize,
    m: usize,
    count: usize,
    seed: u64,
    alt: bool,
    family: Option<PathBuf>,
    out: Option<PathBuf>,
) -> CmdResult {
    let n = expected_n(k, m);
    let family = match (alt, family) {
        (true, Some(path)) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| Failure::Usage(format!("cannot read family: {e}")))?;
            Some(
                serde_json::from_str::<PermutationFamily>(&text)
                    .map_err(|e| Failure::Usage(format!("bad family file: {e}")))?,
            )
        }
        (true, None) => {
            return Err(Failure::Usage("--alt requires --family".into()));
        }
        (false, _) => None,
    };
    let mut lines = String::new();
    for i in 0..count {
        let draw_seed = child_seed(seed, i as u64);
        let line = match mu {
            "3" => {
                let s = match &family {
                    Some(f) => parity_matching::family::alternative_sample_three_violation(
                        n, k, m, f, draw_seed,
                    )
                    .map_err(|e| Failure::Usage(e.to_string()))?,
                    None => sample_three_violation(n, k, m, draw_seed)
                        .map_err(|e| Failure::Usage(e.to_string()))?,
                };
                debug_assert_eq!(s.violations, 3);
                SampleLine {
                    schema_version: SCHEMA_VERSION,
                    command: "sample".into(),
                    mu: "3".into(),
                    k,
                    m,
                    seed: draw_seed,
                    partition: PartitionOut::from(&s.triple.partition),
                    core: Some(s.triple.core.clone()),
                    tail: Some(s.triple.tail.clone()),
                    core_order: None,
                    matching: edges_out(&s.matching),
                    labeling: s.labeling.to_bitstring(),
                    violations: s.violations,
                }
            }
            "4k3" => {
                let s = sample_full_violation(n, k, m, draw_seed)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
                SampleLine {
                    schema_version: SCHEMA_VERSION,
                    command: "sample".into(),
                    mu: "4k3".into(),
                    k,
                    m,
                    seed: draw_seed,
                    partition: PartitionOut::from(&s.partition),
                    core: None,
                    tail: None,
                    core_order: Some(s.core_order.clone()),
                    matching: edges_out(&s.matching),
                    labeling: s.labeling.to_bitstring(),
                    violations: s.violations,
                }
            }
            other => {
                return Err(Failure::Usage(format!(
                    "--mu must be 3 or 4k3, got {other}"
                )))
            }
        };
        lines.push_str(&json_line(&line));
    }
    emit(&out, &lines)?;
    Ok(0)
}

fn cmd_family(
    k: usize,
    seed: u64,
    retries: usize,
    verify_sets: usize,
    out: Option<PathBuf>,
) -> CmdResult {
    let sets = verification_sets(k, seed, verify_sets);
    let (family, used) = build_verified_family(k, seed, &sets, retries)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    eprintln!("family verified after {used} retries");
    emit(&out, &json_line(&family))?;
    Ok(0)
}

/// k = 1 admits a single exhaustive collection; larger k gets seeded random
/// collections of the minimum certified size.
fn verification_sets(k: usize, seed: u64, how_many: usize) -> Vec<Vec<[usize; 3]>> {
    let all = all_front_subsets(k);
    if all.len() <= 10 * k || k == 1 {
        return vec![all];
    }
    use parity_matching::partition::random_permutation;
    use parity_matching::seeding::rng_from;
    let mut sets = Vec::with_capacity(how_many);
    for i in 0..how_many {
        let mut rng = rng_from(child_seed(seed, 1_000_000 + i as u64));
        let idx = random_permutation(all.len(), &mut rng);
        sets.push(idx[..10 * k].iter().map(|&i| all[i]).collect());
    }
    sets
}

fn cmd_verify(path: &Path) -> CmdResult {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut checked = 0usize;
    let mut failures: Vec<String> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Failure::Usage(format!("line {}: not JSON: {e}", lineno + 1)))?;
        let command = value
            .get("command")
            .and_then(|c| c.as_str())
            .map(str::to_owned);
        let outcome = match command.as_deref() {
            Some("solve") => verify_solve_line(line),
            Some("sample") => verify_sample_line(line),
            Some("relax") => verify_relax_line(line),
            None if value.get("entries").is_some() => verify_family_line(line),
            other => Err(format!("line {}: no verifier for {:?}", lineno + 1, other)),
        };
        checked += 1;
        if let Err(msg) = outcome {
            failures.push(format!("line {}: {msg}", lineno + 1));
        }
    }
    if checked == 0 {
        return Err(Failure::Usage("nothing to verify".into()));
    }
    if failures.is_empty() {
        println!("ok: {checked} record(s) verified");
        Ok(0)
    } else {
        for f in &failures {
            eprintln!("FAIL {f}");
        }
        Ok(1)
    }
}

fn verify_solve_line(line: &str) -> Result<(), String> {
    let report: SolveReport = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let g = ColoredBipartiteGraph::parse(&report.graph).map_err(|e| e.to_string())?;
    let target = report.config.parity;
    let result = match report.kind.as_str() {
        "matching_found" => {
            let edges = report
                .matching
                .as_ref()
                .ok_or("matching_found without matching")?;
            let m = Matching::new(edges_in(edges)).map_err(|e| e.to_string())?;
            ParityResult::MatchingFound(m)
        }
        "certificate" => {
            let bits = report
                .certificate
                .as_ref()
                .ok_or("certificate kind without bits")?;
            let l = Labeling::parse_bitstring(bits, target).map_err(|e| e.to_string())?;
            ParityResult::Certificate(l)
        }
        "no_perfect_matching" => match &report.hall_witness {
            Some(h) => ParityResult::NoPerfectMatching(NoMatchingWitness::Hall(
                parity_matching::matching::HallViolator {
                    side: h.side().ok_or("bad witness side")?,
                    set: h.set.clone(),
                    neighborhood: h.neighborhood.clone(),
                },
            )),
            None => ParityResult::NoPerfectMatching(NoMatchingWitness::SideMismatch {
                n_left: g.n_left(),
                n_right: g.n_right(),
            }),
        },
        other => return Err(format!("unknown kind {other}")),
    };
    check_result(&g, target, &result)
}

fn verify_sample_line(line: &str) -> Result<(), String> {
    let s: SampleLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let partition = s
        .partition
        .to_partition()
        .ok_or("invalid partition in transcript")?;
    let matching = Matching::new(edges_in(&s.matching)).map_err(|e| e.to_string())?;
    let labeling =
        Labeling::parse_bitstring(&s.labeling, ParityTarget::Odd).map_err(|e| e.to_string())?;
    let g = ColoredBipartiteGraph::complete_double(partition.n()).map_err(|e| e.to_string())?;
    let violations = violation_count(&g, &matching, &labeling).map_err(|e| e.to_string())?;
    if violations != s.violations {
        return Err(format!(
            "recorded {} violations, recomputed {violations}",
            s.violations
        ));
    }
    let expected = match s.mu.as_str() {
        "3" => 3,
        "4k3" => 4 * s.k + 3,
        other => return Err(format!("unknown mu {other}")),
    };
    if violations != expected {
        return Err(format!("expected {expected} violations, got {violations}"));
    }
    if !matching_respects(&partition, &matching) {
        return Err("matching does not respect the partition".into());
    }
    if !labeling_respects(&partition, &labeling) {
        return Err("labeling does not respect the partition".into());
    }
    Ok(())
}

fn verify_relax_line(line: &str) -> Result<(), String> {
    let report: RelaxReport = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let g = ColoredBipartiteGraph::parse(&report.graph).map_err(|e| e.to_string())?;
    let caps = EnumCaps::default();
    if report.feasible {
        let coords = report.witness.as_ref().ok_or("feasible without witness")?;
        let lp = build_relaxation(&g, report.config.parity, &caps).map_err(|e| e.to_string())?;
        let mut witness = vec![Rat::zero(); g.edges().len()];
        for c in coords {
            let e = parity_matching::Edge::new(c.u - 1, c.v - 1, c.color);
            let idx = g
                .edge_index(&e)
                .ok_or_else(|| format!("witness edge ({},{}) not in graph", c.u, c.v))?;
            witness[idx] = c.value.parse::<Rat>().map_err(|e| e.to_string())?;
        }
        parity_matching::relaxation::verify_witness(&lp, &witness)
    } else {
        // The embedded negative certificate is checked first, then the
        // verdict is re-established by the exact solver and cross-checked
        // against brute force when within cap.
        match (&report.certificate, &report.hall_witness) {
            (Some(bits), _) => {
                let l = Labeling::parse_bitstring(bits, report.config.parity)
                    .map_err(|e| e.to_string())?;
                check_result(&g, report.config.parity, &ParityResult::Certificate(l))?;
            }
            (None, Some(h)) => {
                let witness = parity_matching::matching::HallViolator {
                    side: h.side().ok_or("bad witness side")?,
                    set: h.set.clone(),
                    neighborhood: h.neighborhood.clone(),
                };
                if !witness.check(&g) {
                    return Err("Hall violator fails to check".into());
                }
            }
            (None, None) => {
                if g.n_left() == g.n_right() {
                    return Err("infeasible report without a certificate".into());
                }
            }
        }
        let lp = build_relaxation(&g, report.config.parity, &caps).map_err(|e| e.to_string())?;
        if lp_feasible(&lp).is_feasible() {
            return Err("re-solve found the relaxation feasible".into());
        }
        if g.n_left() <= caps.max_matching_n
            && brute_force_parity_decision(&g, report.config.parity, &caps)
                .map_err(|e| e.to_string())?
        {
            return Err("brute force found a matching of the requested parity".into());
        }
        Ok(())
    }
}

fn verify_family_line(line: &str) -> Result<(), String> {
    let family: PermutationFamily = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let sets = verification_sets(family.k, family.seed, 100);
    match verify_family(&family, &sets) {
        Ok(true) => Ok(()),
        Ok(false) => Err("family fails the split property".into()),
        Err(e) => Err(e.to_string()),
    }
}
