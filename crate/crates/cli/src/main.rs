use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gknn::error::{Error, Result};
use gknn::experiment::{run_rate_experiment, run_speed_benchmark, speed_instance, timings_csv};
use gknn::geodesic::{load_neighbor_table, save_neighbor_table};
use gknn::graph::{load_graph, save_graph};
use gknn::io::{read_distance_matrix_csv, read_labels_csv, read_points};
use gknn::manifold::{check_distance_approximation, sample_dataset, ResponseModel};
use gknn::regression::{regress_inductive, save_estimates};
use gknn::{
    build_graph, geodesic_knn, memory_estimate, regress_transductive, Algorithm, EdgeRule,
    ExperimentConfig, Metric, PointCloud, RegressionWeights, SpatialIndex, SyntheticManifold,
    WeightScheme,
};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\ngraph format: gknn-graph v1\npoints format: GKNN binary v1"
);

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_ABORT: u8 = 3;

/// Geodesic k-nearest-labeled-neighbor search and regression.
#[derive(Parser)]
#[command(name = "gknn", version = VERSION)]
struct Cli {
    /// Worker threads (default: all cores, except 1 for gknn and regress).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a neighborhood graph from points or a distance matrix.
    BuildGraph(BuildGraphArgs),
    /// Find the k nearest labeled vertices of every vertex.
    Gknn(GknnArgs),
    /// Average labeled responses over a neighbor table.
    Regress(RegressArgs),
    /// Compare graph distances with exact geodesics on a synthetic manifold.
    CheckDistances(CheckDistancesArgs),
    /// Run a rate experiment described by a JSON config.
    Experiment(ExperimentArgs),
    /// Time naive, alg1 and alg2 on one synthetic instance.
    Bench(BenchArgs),
}

#[derive(Args)]
struct BuildGraphArgs {
    /// Points file (CSV or GKNN binary).
    #[arg(long, required_unless_present = "distance_matrix")]
    points: Option<PathBuf>,
    /// Precomputed N×N distance matrix CSV.
    #[arg(long)]
    distance_matrix: Option<PathBuf>,
    /// `euclidean`, `minkowski:P,Q` or `precomputed`.
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    /// `cutoff:R` or `knn:K`.
    #[arg(long)]
    rule: EdgeRule,
    /// `raw`, `affine` or `affine:EPS`.
    #[arg(long, default_value = "raw")]
    weights: WeightScheme,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GknnArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "alg2")]
    algorithm: Algorithm,
    #[arg(long)]
    out: PathBuf,
    /// Write queue counters, wall time and the memory bound as JSON.
    #[arg(long)]
    stats_json: Option<PathBuf>,
}

#[derive(Args)]
struct RegressArgs {
    /// Neighbor table written by `gknn`.
    #[arg(long)]
    neighbors: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// `uniform` or `exp2`.
    #[arg(long, default_value = "uniform")]
    weights: RegressionWeights,
    /// Per-vertex estimates CSV.
    #[arg(long)]
    out: PathBuf,
    /// Points the graph was built from, needed for `--queries`.
    #[arg(long, requires = "queries")]
    points: Option<PathBuf>,
    /// Out-of-sample points, routed through their nearest stored point.
    #[arg(long, requires_all = ["points", "query_out"])]
    queries: Option<PathBuf>,
    #[arg(long, requires = "queries")]
    query_out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckDistancesArgs {
    /// `circle:R`, `swissroll:TURNS,WIDTH,RADIUS` or `torus:R,r`.
    #[arg(long)]
    manifold: SyntheticManifold,
    /// Number of sampled points.
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    rule: EdgeRule,
    #[arg(long, default_value = "raw")]
    weights: WeightScheme,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 when the in-bounds fraction is below this.
    #[arg(long)]
    min_fraction: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "swissroll:1.5,0.22,0.035")]
    manifold: SyntheticManifold,
    #[arg(long, default_value_t = 50_000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    labeled: usize,
    #[arg(long, default_value_t = 7)]
    k: usize,
    #[arg(long, default_value = "knn:4")]
    rule: EdgeRule,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timing table CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) => EXIT_USAGE,
            Error::Aborted(_) => EXIT_ABORT,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let serial = matches!(cli.command, Command::Gknn(_) | Command::Regress(_));
    let threads = match cli.threads {
        Some(0) => return Err(usage("--threads must be >= 1")),
        Some(t) => t,
        None if serial => 1,
        None => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| usage(e.to_string()))?;

    match cli.command {
        Command::BuildGraph(a) => build_graph_cmd(a),
        Command::Gknn(a) => gknn_cmd(a),
        Command::Regress(a) => regress_cmd(a),
        Command::CheckDistances(a) => check_distances_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
        Command::Bench(a) => bench_cmd(a),
    }
}

fn build_graph_cmd(a: BuildGraphArgs) -> Result<(), Failure> {
    if a.metric == Metric::Precomputed && a.distance_matrix.is_none() {
        return Err(usage("--metric precomputed needs --distance-matrix"));
    }
    if a.metric != Metric::Precomputed && a.points.is_none() {
        return Err(usage("coordinate metrics need --points"));
    }
    a.rule.validate()?;
    a.weights.validate()?;

    let mut cloud = match &a.points {
        Some(p) => Some(read_points(p)?),
        None => None,
    };
    if let Some(path) = &a.distance_matrix {
        let matrix = read_distance_matrix_csv(path)?;
        cloud = Some(match cloud {
            Some(c) => c.with_distance_matrix(matrix)?,
            None => PointCloud::from_distance_matrix(matrix),
        });
    }
    let cloud = cloud.expect("points or matrix present");
    let g = build_graph(&cloud, a.metric, a.rule, a.weights)?;
    save_graph(&g, &a.out)?;
    eprintln!(
        "graph: {} vertices, {} edges -> {}",
        g.num_vertices(),
        g.num_edges(),
        a.out.display()
    );
    Ok(())
}

fn gknn_cmd(a: GknnArgs) -> Result<(), Failure> {
    if a.k == 0 {
        return Err(usage("--k must be >= 1"));
    }
    let g = load_graph(&a.graph)?;
    let labels = read_labels_csv(&a.labels)?;
    let (table, stats) = geodesic_knn(a.algorithm, &g, &labels, a.k)?;
    save_neighbor_table(&table, &a.out)?;
    if let Some(path) = &a.stats_json {
        let report = json!({
            "algorithm": a.algorithm,
            "k": a.k,
            "num_vertices": g.num_vertices(),
            "num_directed_edges": g.num_directed_edges(),
            "num_labeled": labels.len(),
            "stats": stats,
            "memory_estimate": memory_estimate(&g, labels.len(), a.k),
        });
        write_json(path, &report)?;
    }
    eprintln!(
        "{}: {} pops ({} stale), peak queue {}, {:.3}s",
        a.algorithm.name(),
        stats.pops,
        stats.stale_pops,
        stats.peak_queue_len,
        stats.wall_time_secs
    );
    if stats.order_violations > 0 {
        return Err(Error::Aborted(format!(
            "{} pops out of priority order",
            stats.order_violations
        ))
        .into());
    }
    Ok(())
}

fn regress_cmd(a: RegressArgs) -> Result<(), Failure> {
    let table = load_neighbor_table(&a.neighbors)?;
    let labels = read_labels_csv(&a.labels)?;
    labels.check_vertices(table.num_vertices())?;
    let estimates = regress_transductive(&table, &labels, a.weights)?;
    save_estimates(&estimates, &a.out)?;
    if estimates.missing_count() > 0 {
        eprintln!(
            "warning: {} vertices have no labeled vertex in reach",
            estimates.missing_count()
        );
    }

    if let (Some(points), Some(queries), Some(query_out)) = (&a.points, &a.queries, &a.query_out) {
        let cloud = read_points(points)?;
        let queries = read_points(queries)?;
        if cloud.len() != table.num_vertices() {
            return Err(Error::InvalidParameter(format!(
                "{} points but the neighbor table has {} vertices",
                cloud.len(),
                table.num_vertices()
            ))
            .into());
        }
        if queries.dim() != cloud.dim() {
            return Err(Error::DimensionMismatch {
                expected: cloud.dim(),
                got: queries.dim(),
            }
            .into());
        }
        let index = SpatialIndex::build(&cloud)?;
        let mut out = String::from("query,estimate,flag\n");
        for (i, q) in queries.points().enumerate() {
            match regress_inductive(q, &index, &estimates) {
                Ok(y) => out.push_str(&format!("{i},{y:?},ok\n")),
                Err(Error::Unreachable(_)) => out.push_str(&format!("{i},,none\n")),
                Err(e) => return Err(e.into()),
            }
        }
        write(query_out, out)?;
    }
    Ok(())
}

fn check_distances_cmd(a: CheckDistancesArgs) -> Result<(), Failure> {
    if a.samples < 2 {
        return Err(usage("--samples must be >= 2"));
    }
    let response = ResponseModel {
        lipschitz: 1.0,
        sigma: 0.0,
    };
    let data = sample_dataset(&a.manifold, &response, a.samples, 0, a.seed)?;
    let g = build_graph(&data.cloud, Metric::Euclidean, a.rule, a.weights)?;
    let check = check_distance_approximation(&g, &data.oracle, a.delta, a.pairs, a.seed)?;
    println!(
        "fraction in [1-{d}, 1+{d}]: {:.4} over {} pairs ({} disconnected)",
        check.fraction_in_bounds,
        check.pairs_evaluated,
        check.disconnected,
        d = a.delta
    );
    if let Some(path) = &a.out {
        write_json(
            path,
            &json!({
                "manifold": a.manifold,
                "samples": a.samples,
                "rule": a.rule,
                "weights": a.weights,
                "delta": a.delta,
                "seed": a.seed,
                "num_edges": g.num_edges(),
                "check": check,
            }),
        )?;
    }
    if let Some(min) = a.min_fraction {
        if check.fraction_in_bounds < min {
            return Err(Error::Aborted(format!(
                "in-bounds fraction {} below {min}",
                check.fraction_in_bounds
            ))
            .into());
        }
    }
    Ok(())
}

fn experiment_cmd(a: ExperimentArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.config).map_err(|e| Error::Io {
        path: a.config.clone(),
        source: e,
    })?;
    let config = ExperimentConfig::from_json(&text).map_err(|e| match e {
        Error::Json(j) => Error::Parse {
            path: a.config.clone(),
            line: j.line(),
            msg: j.to_string(),
        },
        other => other,
    })?;
    fs::create_dir_all(&a.out).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    let (report, timings) = run_rate_experiment(&config)?;
    write(&a.out.join("report.json"), report.to_json()?)?;
    write(&a.out.join("cells.csv"), report.cells_csv())?;
    write(&a.out.join("summary.csv"), report.summary_csv())?;
    write(&a.out.join("slopes.csv"), report.slopes_csv())?;
    write(&a.out.join("timings.csv"), timings_csv(&timings))?;
    for s in &report.slopes {
        match s.slope_geodesic {
            Some(v) => println!("m={}: slope {v:.4} (target {:.4})", s.m, s.target),
            None => println!("m={}: slope unavailable", s.m),
        }
    }
    if report.aborted_cells > 0 {
        return Err(Error::Aborted(format!(
            "{} cells aborted for unreachable test points; see cells.csv",
            report.aborted_cells
        ))
        .into());
    }
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> Result<(), Failure> {
    if a.k == 0 || a.labeled == 0 {
        return Err(usage("--k and --labeled must be >= 1"));
    }
    let (g, labels) = speed_instance(&a.manifold, a.samples, a.labeled, a.rule, a.seed)?;
    let report = run_speed_benchmark(&g, &labels, a.k)?;
    print!("{}", report.to_csv());
    if let Some(path) = &a.out {
        write(path, report.to_csv())?;
    }
    if let Some(path) = &a.json {
        write_json(path, &report)?;
    }
    if !report.tables_agree {
        return Err(Error::Aborted("neighbor tables differ between algorithms".into()).into());
    }
    Ok(())
}
