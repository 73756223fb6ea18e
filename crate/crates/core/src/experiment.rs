//! Experiment drivers on synthetic manifolds.
//!
//! [`run_rate_experiment`] sweeps a grid of labeled (`n`) and unlabeled
//! (`m`) sample sizes, measures the test MSE of the geodesic kNN regressor
//! against the Euclidean kNN baseline, and fits the log-log slope of MSE
//! versus `n`. [`run_speed_benchmark`] times the three geodesic kNN routes on
//! one instance.
//!
//! Every cell draws its data from a ChaCha8 stream seeded by
//! `(config.seed, n, rep)`, so a report is a pure function of its config.
//! The stream does not depend on `m`: cells that differ only in `m` share
//! labeled points, noise and test points.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{geodesic_knn, Algorithm, LabelSet, NeighborTable, RunStats};
use crate::graph::{build_graph, EdgeRule, Graph, WeightScheme};
use crate::manifold::{
    check_distance_approximation, sample_dataset, sample_points, DistanceCheck, ResponseModel,
    SyntheticManifold,
};
use crate::metric_space::{Metric, SpatialIndex};
use crate::regression::{regress_transductive, EuclideanKnnRegressor, RegressionWeights};

pub const RNG_NAME: &str = "ChaCha8Rng";

/// A cell is aborted when more than this fraction of its test points have
/// no estimate.
pub const MAX_UNREACHABLE_FRACTION: f64 = 0.1;

/// Number of neighbors used by both regressors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KChoice {
    Fixed(usize),
    /// `"auto"`: `k = ⌈n^(2/(2+d))⌉` with `d` the intrinsic dimension.
    Auto(AutoK),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoK {
    Auto,
}

impl KChoice {
    pub fn resolve(&self, n: usize, intrinsic_dim: usize) -> usize {
        match *self {
            KChoice::Fixed(k) => k,
            KChoice::Auto(_) => rate_optimal_k(n, intrinsic_dim),
        }
    }
}

/// `⌈n^(2/(2+d))⌉`.
pub fn rate_optimal_k(n: usize, intrinsic_dim: usize) -> usize {
    let k = (n as f64).powf(2.0 / (2.0 + intrinsic_dim as f64)).ceil() as usize;
    k.max(1)
}

/// Minimax exponent `−2/(2+d)`.
pub fn rate_exponent(intrinsic_dim: usize) -> f64 {
    -2.0 / (2.0 + intrinsic_dim as f64)
}

fn default_test_points() -> usize {
    1000
}

fn default_delta() -> f64 {
    0.1
}

fn default_algorithm() -> Algorithm {
    Algorithm::Alg2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: SyntheticManifold,
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub k: KChoice,
    pub graph_rule: EdgeRule,
    #[serde(default)]
    pub weight_scheme: WeightScheme,
    pub sigma: f64,
    pub lipschitz: f64,
    pub repetitions: usize,
    pub seed: u64,
    #[serde(default)]
    pub regression_weights: RegressionWeights,
    #[serde(default = "default_test_points")]
    pub test_points: usize,
    /// Pairs sampled per `(n, m)` cell for the distance-ratio check
    /// (0 disables it).
    #[serde(default)]
    pub distance_pairs: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.manifold.validate()?;
        self.graph_rule.validate()?;
        self.weight_scheme.validate()?;
        self.response().validate()?;
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return bad("n_values must be nonempty and all >= 1");
        }
        if self.m_values.is_empty() {
            return bad("m_values must be nonempty");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1");
        }
        if self.test_points == 0 {
            return bad("test_points must be >= 1");
        }
        if self.k == KChoice::Fixed(0) {
            return bad("k must be >= 1");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if let EdgeRule::SymmetricKnn { k } = self.graph_rule {
            let smallest =
                self.n_values.iter().min().unwrap() + self.m_values.iter().min().unwrap();
            if k >= smallest {
                return Err(Error::InvalidParameter(format!(
                    "graph k = {k} needs more than {smallest} points"
                )));
            }
        }
        Ok(())
    }

    pub fn response(&self) -> ResponseModel {
        ResponseModel {
            lipschitz: self.lipschitz,
            sigma: self.sigma,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}

/// SplitMix64 finalizer, used to derive independent per-cell seeds.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn cell_seed(seed: u64, n: usize, rep: usize, stream: u64) -> u64 {
    mix(mix(mix(seed ^ stream.wrapping_mul(0xA24B_AED4_963E_E407)) ^ n as u64) ^ rep as u64)
}

const DATA_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;
const PAIR_STREAM: u64 = 3;

/// Queue counters without wall time, so reports stay deterministic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QueueCounters {
    pub pops: u64,
    pub stale_pops: u64,
    pub inserts: u64,
    pub decreases: u64,
    pub peak_queue_len: u64,
    pub order_violations: u64,
}

impl From<&RunStats> for QueueCounters {
    fn from(s: &RunStats) -> Self {
        Self {
            pops: s.pops,
            stale_pops: s.stale_pops,
            inserts: s.inserts,
            decreases: s.decreases,
            peak_queue_len: s.peak_queue_len,
            order_violations: s.order_violations,
        }
    }
}

impl QueueCounters {
    fn add(&mut self, o: &QueueCounters) {
        self.pops += o.pops;
        self.stale_pops += o.stale_pops;
        self.inserts += o.inserts;
        self.decreases += o.decreases;
        self.peak_queue_len = self.peak_queue_len.max(o.peak_queue_len);
        self.order_violations += o.order_violations;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub m: usize,
    pub rep: usize,
    pub k: usize,
    /// Test MSE of the geodesic regressor; `None` when the cell aborted.
    pub mse_geodesic: Option<f64>,
    pub mse_euclidean: f64,
    pub unreachable_test_points: usize,
    pub unreachable_vertices: usize,
    pub num_edges: usize,
    pub queue: QueueCounters,
    pub abort_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub repetitions_ok: usize,
    pub repetitions_aborted: usize,
    pub mean_mse_geodesic: Option<f64>,
    pub stderr_mse_geodesic: Option<f64>,
    pub mean_mse_euclidean: f64,
    pub stderr_mse_euclidean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub m: usize,
    /// OLS slope of `ln(mean MSE)` against `ln n` for the geodesic regressor.
    pub slope_geodesic: Option<f64>,
    pub slope_euclidean: Option<f64>,
    /// `−2/(2+d)`.
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub check: DistanceCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rng: String,
    pub intrinsic_dim: usize,
    pub cells: Vec<CellResult>,
    pub summary: Vec<CellSummary>,
    pub slopes: Vec<SlopeFit>,
    pub distance_checks: Vec<DistanceSummary>,
    pub queue_totals: QueueCounters,
    pub aborted_cells: usize,
}

/// Per-cell wall times, reported separately from the deterministic report.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTiming {
    pub n: usize,
    pub m: usize,
    pub rep: usize,
    pub graph_secs: f64,
    pub knn_secs: f64,
    pub total_secs: f64,
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn mean_and_stderr(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let stderr = if xs.len() > 1 {
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Some((mean, stderr))
}

fn run_cell(
    config: &ExperimentConfig,
    n: usize,
    m: usize,
    rep: usize,
) -> Result<(CellResult, CellTiming)> {
    let start = Instant::now();
    let d = config.manifold.intrinsic_dim();
    let k = config.k.resolve(n, d);
    let data = sample_dataset(
        &config.manifold,
        &config.response(),
        n,
        m,
        cell_seed(config.seed, n, rep, DATA_STREAM),
    )?;

    let graph_start = Instant::now();
    let graph = build_graph(
        &data.cloud,
        Metric::Euclidean,
        config.graph_rule,
        config.weight_scheme,
    )?;
    let graph_secs = graph_start.elapsed().as_secs_f64();

    let (table, stats) = geodesic_knn(config.algorithm, &graph, &data.labels, k)?;
    let estimates = regress_transductive(&table, &data.labels, config.regression_weights)?;

    let mut test_rng = ChaCha8Rng::seed_from_u64(cell_seed(config.seed, n, rep, TEST_STREAM));
    let tests = sample_points(&config.manifold, config.test_points, &mut test_rng);
    let index = SpatialIndex::build(&data.cloud)?;
    let baseline =
        EuclideanKnnRegressor::fit(&data.cloud, &data.labels, k, config.regression_weights)?;

    let (mut se_geo, mut se_euc, mut unreachable) = (0.0, 0.0, 0usize);
    for (param, x) in &tests {
        let truth = config.response().eval(&config.manifold, *param);
        let (nearest, _) = index.nearest(x)?;
        match estimates.get(nearest) {
            Some(est) => se_geo += (est - truth) * (est - truth),
            None => unreachable += 1,
        }
        let base = baseline.predict(x)?;
        se_euc += (base - truth) * (base - truth);
    }

    let reached = tests.len() - unreachable;
    let abort_reason =
        (unreachable as f64 > MAX_UNREACHABLE_FRACTION * tests.len() as f64).then(|| {
            format!(
                "{unreachable} of {} test points have no labeled vertex in their component",
                tests.len()
            )
        });
    let mse_geodesic = match abort_reason {
        None if reached > 0 => Some(se_geo / reached as f64),
        _ => None,
    };

    let cell = CellResult {
        n,
        m,
        rep,
        k,
        mse_geodesic,
        mse_euclidean: se_euc / tests.len() as f64,
        unreachable_test_points: unreachable,
        unreachable_vertices: estimates.missing_count(),
        num_edges: graph.num_edges(),
        queue: QueueCounters::from(&stats),
        abort_reason,
    };
    let timing = CellTiming {
        n,
        m,
        rep,
        graph_secs,
        knn_secs: stats.wall_time_secs,
        total_secs: start.elapsed().as_secs_f64(),
    };
    Ok((cell, timing))
}

fn run_distance_check(config: &ExperimentConfig, n: usize, m: usize) -> Result<DistanceSummary> {
    let data = sample_dataset(
        &config.manifold,
        &config.response(),
        n,
        m,
        cell_seed(config.seed, n, 0, DATA_STREAM),
    )?;
    let graph = build_graph(
        &data.cloud,
        Metric::Euclidean,
        config.graph_rule,
        config.weight_scheme,
    )?;
    let check = check_distance_approximation(
        &graph,
        &data.oracle,
        config.delta,
        config.distance_pairs,
        cell_seed(config.seed, n, m, PAIR_STREAM),
    )?;
    Ok(DistanceSummary {
        n,
        m,
        delta: config.delta,
        check,
    })
}

/// Runs every `(n, m, rep)` cell (in parallel on the current rayon pool) and
/// assembles the report. Cells with too many unreachable test points are
/// kept in the report with an `abort_reason` and excluded from the means.
pub fn run_rate_experiment(
    config: &ExperimentConfig,
) -> Result<(ExperimentReport, Vec<CellTiming>)> {
    config.validate()?;
    let mut grid = Vec::new();
    for &n in &config.n_values {
        for &m in &config.m_values {
            for rep in 0..config.repetitions {
                grid.push((n, m, rep));
            }
        }
    }
    let outcomes: Vec<(CellResult, CellTiming)> = grid
        .par_iter()
        .map(|&(n, m, rep)| run_cell(config, n, m, rep))
        .collect::<Result<_>>()?;
    let (cells, timings): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();

    let mut summary = Vec::new();
    for &n in &config.n_values {
        for &m in &config.m_values {
            let group: Vec<&CellResult> = cells.iter().filter(|c| c.n == n && c.m == m).collect();
            let geo: Vec<f64> = group.iter().filter_map(|c| c.mse_geodesic).collect();
            let euc: Vec<f64> = group.iter().map(|c| c.mse_euclidean).collect();
            let (mean_euc, se_euc) = mean_and_stderr(&euc).expect("repetitions >= 1");
            let geo_stats = mean_and_stderr(&geo);
            summary.push(CellSummary {
                n,
                m,
                k: group[0].k,
                repetitions_ok: geo.len(),
                repetitions_aborted: group.len() - geo.len(),
                mean_mse_geodesic: geo_stats.map(|s| s.0),
                stderr_mse_geodesic: geo_stats.map(|s| s.1),
                mean_mse_euclidean: mean_euc,
                stderr_mse_euclidean: se_euc,
            });
        }
    }

    let d = config.manifold.intrinsic_dim();
    let slopes = config
        .m_values
        .iter()
        .map(|&m| {
            let rows: Vec<&CellSummary> = summary.iter().filter(|s| s.m == m).collect();
            let fit = |pick: &dyn Fn(&CellSummary) -> Option<f64>| {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter_map(|s| {
                        pick(s)
                            .filter(|&v| v > 0.0)
                            .map(|v| ((s.n as f64).ln(), v.ln()))
                    })
                    .collect();
                if pts.len() < rows.len() {
                    return None;
                }
                let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
                ols_slope(&xs, &ys)
            };
            SlopeFit {
                m,
                slope_geodesic: fit(&|s| s.mean_mse_geodesic),
                slope_euclidean: fit(&|s| Some(s.mean_mse_euclidean)),
                target: rate_exponent(d),
            }
        })
        .collect();

    let distance_checks = if config.distance_pairs > 0 {
        let pairs: Vec<(usize, usize)> = config
            .n_values
            .iter()
            .flat_map(|&n| config.m_values.iter().map(move |&m| (n, m)))
            .collect();
        pairs
            .par_iter()
            .map(|&(n, m)| run_distance_check(config, n, m))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let mut queue_totals = QueueCounters::default();
    for c in &cells {
        queue_totals.add(&c.queue);
    }
    let aborted_cells = cells.iter().filter(|c| c.abort_reason.is_some()).count();

    Ok((
        ExperimentReport {
            config: config.clone(),
            rng: RNG_NAME.into(),
            intrinsic_dim: d,
            cells,
            summary,
            slopes,
            distance_checks,
            queue_totals,
            aborted_cells,
        },
        timings,
    ))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn cells_csv(&self) -> String {
        let mut out = String::from(
            "n,m,rep,k,mse_geodesic,mse_euclidean,unreachable_test_points,unreachable_vertices,num_edges,pops,stale_pops,inserts,decreases,peak_queue_len,aborted\n",
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:?},{},{},{},{},{},{},{},{},{}",
                c.n,
                c.m,
                c.rep,
                c.k,
                opt(c.mse_geodesic),
                c.mse_euclidean,
                c.unreachable_test_points,
                c.unreachable_vertices,
                c.num_edges,
                c.queue.pops,
                c.queue.stale_pops,
                c.queue.inserts,
                c.queue.decreases,
                c.queue.peak_queue_len,
                c.abort_reason.is_some()
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "n,m,k,repetitions_ok,repetitions_aborted,mean_mse_geodesic,stderr_mse_geodesic,mean_mse_euclidean,stderr_mse_euclidean\n",
        );
        for s in &self.summary {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{:?},{:?}",
                s.n,
                s.m,
                s.k,
                s.repetitions_ok,
                s.repetitions_aborted,
                opt(s.mean_mse_geodesic),
                opt(s.stderr_mse_geodesic),
                s.mean_mse_euclidean,
                s.stderr_mse_euclidean
            );
        }
        out
    }

    pub fn slopes_csv(&self) -> String {
        let mut out = String::from("m,slope_geodesic,slope_euclidean,target\n");
        for s in &self.slopes {
            let _ = writeln!(
                out,
                "{},{},{},{:?}",
                s.m,
                opt(s.slope_geodesic),
                opt(s.slope_euclidean),
                s.target
            );
        }
        out
    }

    pub fn summary_for(&self, n: usize, m: usize) -> Option<&CellSummary> {
        self.summary.iter().find(|s| s.n == n && s.m == m)
    }
}

pub fn timings_csv(timings: &[CellTiming]) -> String {
    let mut out = String::from("n,m,rep,graph_secs,knn_secs,total_secs\n");
    for t in timings {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6}",
            t.n, t.m, t.rep, t.graph_secs, t.knn_secs, t.total_secs
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedRow {
    pub algorithm: Algorithm,
    pub wall_time_secs: f64,
    /// Naive wall time divided by this row's wall time.
    pub speedup_vs_naive: f64,
    pub stats: RunStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedReport {
    pub num_vertices: usize,
    pub num_directed_edges: usize,
    pub num_labeled: usize,
    pub k: usize,
    pub rows: Vec<SpeedRow>,
    /// All three routes produced the same table.
    pub tables_agree: bool,
    /// `min(n·|V|, n + k·|E_dir|)`.
    pub alg1_pop_bound: u64,
    /// `k·|V|`.
    pub alg2_pop_bound: u64,
}

impl SpeedReport {
    pub fn row(&self, algorithm: Algorithm) -> &SpeedRow {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm)
            .expect("all algorithms benchmarked")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "algorithm,num_vertices,num_directed_edges,num_labeled,k,wall_time_secs,speedup_vs_naive,pops,stale_pops,inserts,decreases,peak_queue_len,pop_bound\n",
        );
        for r in &self.rows {
            let bound = match r.algorithm {
                Algorithm::Alg1 => self.alg1_pop_bound.to_string(),
                Algorithm::Alg2 => self.alg2_pop_bound.to_string(),
                Algorithm::Naive => String::new(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6},{:.3},{},{},{},{},{},{}",
                r.algorithm.name(),
                self.num_vertices,
                self.num_directed_edges,
                self.num_labeled,
                self.k,
                r.wall_time_secs,
                r.speedup_vs_naive,
                r.stats.pops,
                r.stats.stale_pops,
                r.stats.inserts,
                r.stats.decreases,
                r.stats.peak_queue_len,
                bound
            );
        }
        out
    }
}

/// Pop-count bound for the pair-queue route: `min(n·|V|, n + k·|E_dir|)`.
pub fn alg1_pop_bound(g: &Graph, n: usize, k: usize) -> u64 {
    let by_pairs = n as u64 * g.num_vertices() as u64;
    let by_edges = n as u64 + k as u64 * g.num_directed_edges() as u64;
    by_pairs.min(by_edges)
}

/// Pop-count bound for the per-vertex-queue route: `k·|V|`.
pub fn alg2_pop_bound(g: &Graph, k: usize) -> u64 {
    k as u64 * g.num_vertices() as u64
}

/// Runs naive, alg1 and alg2 on the same input and tabulates their cost.
pub fn run_speed_benchmark(g: &Graph, labels: &LabelSet, k: usize) -> Result<SpeedReport> {
    let mut tables: Vec<NeighborTable> = Vec::new();
    let mut rows = Vec::new();
    for algorithm in Algorithm::ALL {
        let (table, stats) = geodesic_knn(algorithm, g, labels, k)?;
        tables.push(table);
        rows.push(SpeedRow {
            algorithm,
            wall_time_secs: stats.wall_time_secs,
            speedup_vs_naive: 0.0,
            stats,
        });
    }
    let naive_secs = rows[0].wall_time_secs;
    for r in &mut rows {
        r.speedup_vs_naive = naive_secs / r.wall_time_secs.max(f64::MIN_POSITIVE);
    }
    let tables_agree = tables[1] == tables[0] && tables[2] == tables[0];
    Ok(SpeedReport {
        num_vertices: g.num_vertices(),
        num_directed_edges: g.num_directed_edges(),
        num_labeled: labels.len(),
        k,
        rows,
        tables_agree,
        alg1_pop_bound: alg1_pop_bound(g, labels.len(), k),
        alg2_pop_bound: alg2_pop_bound(g, k),
    })
}

/// Samples `num_points` from a manifold, builds the graph, and labels the
/// first `num_labeled` points (which are i.i.d., so a uniform random subset).
pub fn speed_instance(
    manifold: &SyntheticManifold,
    num_points: usize,
    num_labeled: usize,
    rule: EdgeRule,
    seed: u64,
) -> Result<(Graph, LabelSet)> {
    if num_labeled > num_points {
        return Err(Error::InvalidParameter(format!(
            "cannot label {num_labeled} of {num_points} points"
        )));
    }
    let response = ResponseModel {
        lipschitz: 1.0,
        sigma: 0.0,
    };
    let data = sample_dataset(
        manifold,
        &response,
        num_labeled,
        num_points - num_labeled,
        seed,
    )?;
    let graph = build_graph(
        &data.cloud,
        Metric::Euclidean,
        rule,
        WeightScheme::RawDistance,
    )?;
    Ok((graph, data.labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            manifold: SyntheticManifold::SwissRoll {
                turns: 1.5,
                width: 0.5,
                radius: 1.0,
            },
            n_values: vec![20, 40],
            m_values: vec![0, 300],
            k: KChoice::Auto(AutoK::Auto),
            graph_rule: EdgeRule::SymmetricKnn { k: 6 },
            weight_scheme: WeightScheme::RawDistance,
            sigma: 0.1,
            lipschitz: 1.0,
            repetitions: 2,
            seed: 42,
            regression_weights: RegressionWeights::Uniform,
            test_points: 50,
            distance_pairs: 20,
            delta: 0.1,
            algorithm: Algorithm::Alg2,
        }
    }

    #[test]
    fn auto_k() {
        assert_eq!(rate_optimal_k(50, 2), 8);
        assert_eq!(rate_optimal_k(100, 2), 10);
        assert_eq!(rate_optimal_k(800, 2), 29);
        assert_eq!(rate_optimal_k(1, 2), 1);
        assert_eq!(rate_exponent(2), -0.5);
    }

    #[test]
    fn ols_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.5 * x + 2.0).collect();
        assert!((ols_slope(&xs, &ys).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(ols_slope(&[1.0], &[1.0]), None);
        assert_eq!(ols_slope(&[1.0, 1.0], &[1.0, 2.0]), None);
    }

    #[test]
    fn config_json_round_trip() {
        let config = small_config();
        let text = serde_json::to_string(&config).unwrap();
        assert!(text.contains("\"k\":\"auto\""));
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), config);
        let fixed = text.replace("\"k\":\"auto\"", "\"k\":3");
        assert_eq!(
            ExperimentConfig::from_json(&fixed).unwrap().k,
            KChoice::Fixed(3)
        );
        let unknown = text.replace("\"seed\"", "\"bogus\":1,\"seed\"");
        assert!(ExperimentConfig::from_json(&unknown).is_err());
        let zero_reps = text.replace("\"repetitions\":2", "\"repetitions\":0");
        assert!(ExperimentConfig::from_json(&zero_reps).is_err());
    }

    #[test]
    fn report_is_deterministic_and_complete() {
        let config = small_config();
        let (a, timings) = run_rate_experiment(&config).unwrap();
        let (b, _) = run_rate_experiment(&config).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.cells.len(), 8);
        assert_eq!(timings.len(), 8);
        assert_eq!(a.summary.len(), 4);
        assert_eq!(a.slopes.len(), 2);
        assert_eq!(a.distance_checks.len(), 4);
        for c in &a.cells {
            assert!(c.mse_euclidean >= 0.0);
            assert!(c.mse_geodesic.unwrap() >= 0.0);
        }
        for d in &a.distance_checks {
            assert!((0.0..=1.0).contains(&d.check.fraction_in_bounds));
        }
        // labeled data and test points do not depend on m
        for n in [20, 40] {
            assert_eq!(
                a.summary_for(n, 0).unwrap().mean_mse_euclidean,
                a.summary_for(n, 300).unwrap().mean_mse_euclidean
            );
        }
        assert_eq!(a.queue_totals.order_violations, 0);
    }

    #[test]
    fn noiseless_dense_labels_converge() {
        let mut config = small_config();
        config.sigma = 0.0;
        config.k = KChoice::Fixed(1);
        config.n_values = vec![100, 400, 1600];
        config.m_values = vec![0];
        config.repetitions = 3;
        config.test_points = 200;
        config.distance_pairs = 0;
        let (report, _) = run_rate_experiment(&config).unwrap();
        let mse: Vec<f64> = report
            .summary
            .iter()
            .map(|s| s.mean_mse_geodesic.unwrap())
            .collect();
        assert!(mse[0] > mse[1] && mse[1] > mse[2], "{mse:?}");
    }

    #[test]
    fn unreachable_cells_abort() {
        // cutoff far below the sample spacing: nearly every vertex isolated
        let mut config = small_config();
        config.graph_rule = EdgeRule::Cutoff { r: 1e-6 };
        config.m_values = vec![500];
        config.repetitions = 1;
        config.distance_pairs = 0;
        let (report, _) = run_rate_experiment(&config).unwrap();
        assert_eq!(report.aborted_cells, 2);
        assert!(report.cells.iter().all(|c| c.mse_geodesic.is_none()));
        assert!(report.slopes[0].slope_geodesic.is_none());
    }

    #[test]
    fn speed_benchmark_small() {
        let roll = SyntheticManifold::SwissRoll {
            turns: 1.5,
            width: 0.5,
            radius: 1.0,
        };
        let (g, labels) =
            speed_instance(&roll, 2000, 50, EdgeRule::SymmetricKnn { k: 4 }, 3).unwrap();
        let report = run_speed_benchmark(&g, &labels, 7).unwrap();
        assert!(report.tables_agree);
        assert!(report.row(Algorithm::Alg1).stats.pops <= report.alg1_pop_bound);
        assert!(report.row(Algorithm::Alg2).stats.pops <= report.alg2_pop_bound);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(1).unwrap().starts_with("naive,"));
    }
}
