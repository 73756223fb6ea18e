//! Undirected weighted neighborhood graphs.
//!
//! Vertices are the points of a [`PointCloud`]; edges come from one of two
//! rules: a distance cutoff (`d < r`) or the symmetrized kNN rule (an edge
//! whenever either endpoint is among the other's `k` nearest). Storage is
//! CSR with per-vertex neighbor lists sorted by id.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::format_sig;
use crate::metric_space::{Metric, PointCloud, SpatialIndex};

pub const GRAPH_FORMAT_VERSION: &str = "gknn-graph v1";

/// Default shift used by [`WeightScheme::AffineShift`] when none is given.
pub const DEFAULT_AFFINE_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeRule {
    Cutoff { r: f64 },
    SymmetricKnn { k: usize },
}

impl EdgeRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EdgeRule::Cutoff { r } if !(r > 0.0) || !r.is_finite() => Err(Error::InvalidParameter(
                format!("cutoff radius must be > 0, got {r}"),
            )),
            EdgeRule::SymmetricKnn { k: 0 } => {
                Err(Error::InvalidParameter("graph k must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Parses `cutoff:<r>` or `knn:<k>`.
impl FromStr for EdgeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s.split_once(':').ok_or_else(|| {
            Error::InvalidParameter(format!("edge rule `{s}`: expected kind:value"))
        })?;
        let bad = || Error::InvalidParameter(format!("edge rule `{s}`: bad value `{value}`"));
        let rule = match kind {
            "cutoff" => EdgeRule::Cutoff {
                r: value.parse().map_err(|_| bad())?,
            },
            "knn" => EdgeRule::SymmetricKnn {
                k: value.parse().map_err(|_| bad())?,
            },
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "edge rule `{s}`: unknown kind `{kind}`"
                )))
            }
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// Maps a point distance to an edge weight.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    #[default]
    RawDistance,
    /// `w = 1 + epsilon * d`; `epsilon = 0` gives hop-count geodesics.
    AffineShift { epsilon: f64 },
}

impl WeightScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightScheme::AffineShift { epsilon } if !(epsilon >= 0.0) || !epsilon.is_finite() => {
                Err(Error::InvalidParameter(format!(
                    "affine epsilon must be >= 0, got {epsilon}"
                )))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, d: f64) -> f64 {
        match *self {
            WeightScheme::RawDistance => d,
            WeightScheme::AffineShift { epsilon } => 1.0 + epsilon * d,
        }
    }
}

/// Parses `raw`, `affine` or `affine:<epsilon>`.
impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let scheme = match s.split_once(':') {
            None if s == "raw" => WeightScheme::RawDistance,
            None if s == "affine" => WeightScheme::AffineShift {
                epsilon: DEFAULT_AFFINE_EPSILON,
            },
            Some(("affine", eps)) => WeightScheme::AffineShift {
                epsilon: eps.parse().map_err(|_| {
                    Error::InvalidParameter(format!("weight scheme `{s}`: bad epsilon"))
                })?,
            },
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown weight scheme `{s}` (expected raw, affine or affine:<eps>)"
                )))
            }
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// Immutable undirected graph in CSR layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    min_weight: f64,
}

impl Graph {
    /// Builds a graph from undirected edges `(i, j, w)`, each listed once in
    /// either orientation. Rejects self-loops, out-of-range ids, non-finite
    /// weights and repeated pairs. Negative weights are stored as given so
    /// externally produced files can be loaded; the shortest-path routines
    /// reject them.
    pub fn from_edges(num_vertices: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut directed: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len() * 2);
        for &(i, j, w) in edges {
            if i >= num_vertices || j >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) references a vertex >= {num_vertices}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {i}")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) has non-finite weight {w}"
                )));
            }
            directed.push((i, j, w));
            directed.push((j, i, w));
        }
        directed.sort_unstable_by_key(|e| (e.0, e.1));
        if let Some(w) = directed
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::InvalidGraph(format!(
                "edge ({}, {}) listed more than once",
                w[0].0.min(w[0].1),
                w[0].0.max(w[0].1)
            )));
        }
        Ok(Self::from_sorted_directed(num_vertices, directed))
    }

    fn from_sorted_directed(num_vertices: usize, directed: Vec<(usize, usize, f64)>) -> Self {
        let mut offsets = vec![0usize; num_vertices + 1];
        for &(i, _, _) in &directed {
            offsets[i + 1] += 1;
        }
        for v in 0..num_vertices {
            offsets[v + 1] += offsets[v];
        }
        let min_weight = directed.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        let (targets, weights) = directed.into_iter().map(|(_, j, w)| (j, w)).unzip();
        Self {
            offsets,
            targets,
            weights,
            min_weight,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Undirected edge count.
    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    /// Directed edge count (each undirected edge twice).
    pub fn num_directed_edges(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// `(neighbor, weight)` pairs of `v`, sorted by neighbor id.
    #[inline]
    pub fn neighbors(&self, v: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Smallest edge weight, `+inf` for an edgeless graph.
    pub fn min_weight(&self) -> f64 {
        self.min_weight
    }

    /// First edge with a negative weight, if any.
    pub fn find_negative_edge(&self) -> Option<(usize, usize, f64)> {
        if self.min_weight >= 0.0 {
            return None;
        }
        self.edges().find(|e| e.2 < 0.0)
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_vertices()).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| i < j)
                .map(move |(j, w)| (i, j, w))
        })
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|pos| self.weights[range.start + pos])
    }

    /// Text edge list: `gknn-graph v1 <N> <E>` then `<i> <j> <w>` with `i < j`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 * (self.num_edges() + 1));
        let _ = writeln!(
            out,
            "{GRAPH_FORMAT_VERSION} {} {}",
            self.num_vertices(),
            self.num_edges()
        );
        for (i, j, w) in self.edges() {
            let _ = writeln!(out, "{i} {j} {}", format_sig(w, 17));
        }
        out
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
        let rest = header.strip_prefix(GRAPH_FORMAT_VERSION).ok_or_else(|| {
            Error::parse(
                path,
                1,
                format!("expected `{GRAPH_FORMAT_VERSION} <N> <E>` header"),
            )
        })?;
        let counts: Vec<&str> = rest.split_whitespace().collect();
        let [n, e] = counts.as_slice() else {
            return Err(Error::parse(
                path,
                1,
                "header must carry vertex and edge counts",
            ));
        };
        let n: usize = n
            .parse()
            .map_err(|_| Error::parse(path, 1, format!("bad vertex count `{n}`")))?;
        let e: usize = e
            .parse()
            .map_err(|_| Error::parse(path, 1, format!("bad edge count `{e}`")))?;

        let mut edges = Vec::with_capacity(e);
        for (lineno, line) in lines {
            let lineno = lineno + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [i, j, w] = fields.as_slice() else {
                return Err(Error::parse(path, lineno, "expected `<i> <j> <weight>`"));
            };
            let i: usize = i
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad vertex id `{i}`")))?;
            let j: usize = j
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad vertex id `{j}`")))?;
            let w: f64 = w
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad weight `{w}`")))?;
            if i >= j {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("edge ({i}, {j}) must be listed with i < j"),
                ));
            }
            edges.push((i, j, w));
        }
        if edges.len() != e {
            return Err(Error::parse(
                path,
                1,
                format!("header announces {e} edges, file has {}", edges.len()),
            ));
        }
        Graph::from_edges(n, &edges).map_err(|err| Error::parse(path, 0, err.to_string()))
    }
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, g.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Graph::from_text(&text, path)
}

fn check_cloud(cloud: &PointCloud, metric: Metric, scheme: WeightScheme) -> Result<()> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    metric.validate()?;
    scheme.validate()?;
    match metric {
        Metric::Precomputed if cloud.distance_matrix().is_none() => {
            Err(Error::MissingDistanceMatrix)
        }
        Metric::Precomputed => Ok(()),
        _ if !cloud.has_coordinates() => Err(Error::MissingCoordinates),
        _ => Ok(()),
    }
}

fn pair_distance(metric: Metric, cloud: &PointCloud, i: usize, j: usize) -> f64 {
    match metric {
        Metric::Precomputed => cloud.distance_matrix().expect("checked").get(i, j),
        _ => metric.eval(cloud.point(i), cloud.point(j)),
    }
}

fn can_use_index(cloud: &PointCloud, metric: Metric) -> bool {
    metric.is_euclidean()
        && cloud.has_coordinates()
        && cloud.dim() <= crate::metric_space::KD_TREE_MAX_DIM
}

/// Edge `(i, j)` for every pair with `d(x_i, x_j) < r`.
pub fn build_cutoff_graph(
    cloud: &PointCloud,
    metric: Metric,
    r: f64,
    scheme: WeightScheme,
) -> Result<Graph> {
    EdgeRule::Cutoff { r }.validate()?;
    check_cloud(cloud, metric, scheme)?;
    let n = cloud.len();

    let per_vertex: Vec<Vec<(usize, f64)>> = if can_use_index(cloud, metric) {
        let index = SpatialIndex::build(cloud)?;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let p = cloud.point(i);
                index
                    .range_query(p, r)
                    .expect("radius validated")
                    .into_iter()
                    .filter(|&j| j != i)
                    .map(|j| (j, pair_distance(metric, cloud, i, j)))
                    .collect()
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (j, pair_distance(metric, cloud, i, j)))
                    .filter(|&(_, d)| d < r)
                    .collect()
            })
            .collect()
    };

    let directed = per_vertex
        .into_iter()
        .enumerate()
        .flat_map(|(i, nbrs)| nbrs.into_iter().map(move |(j, d)| (i, j, scheme.apply(d))))
        .collect();
    Ok(Graph::from_sorted_directed(n, directed))
}

/// Ids of the `k` nearest other points of `i`, ties broken by id.
fn nearest_others(
    cloud: &PointCloud,
    metric: Metric,
    index: Option<&SpatialIndex>,
    i: usize,
    k: usize,
) -> Vec<usize> {
    match index {
        Some(index) => {
            let found = index.knn_query(cloud.point(i), k + 1).expect("k validated");
            let mut ids: Vec<usize> = found
                .into_iter()
                .map(|(j, _)| j)
                .filter(|&j| j != i)
                .collect();
            ids.truncate(k);
            ids
        }
        None => {
            let mut all: Vec<(f64, usize)> = (0..cloud.len())
                .filter(|&j| j != i)
                .map(|j| (pair_distance(metric, cloud, i, j), j))
                .collect();
            let by_key =
                |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if all.len() > k {
                all.select_nth_unstable_by(k, by_key);
                all.truncate(k);
            }
            all.into_iter().map(|(_, j)| j).collect()
        }
    }
}

/// Edge `(i, j)` whenever `j` is among the `k` nearest of `i` or vice versa.
pub fn build_symmetric_knn_graph(
    cloud: &PointCloud,
    metric: Metric,
    k: usize,
    scheme: WeightScheme,
) -> Result<Graph> {
    EdgeRule::SymmetricKnn { k }.validate()?;
    check_cloud(cloud, metric, scheme)?;
    let n = cloud.len();
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "graph k = {k} must be smaller than the number of points ({n})"
        )));
    }

    let index = if can_use_index(cloud, metric) {
        Some(SpatialIndex::build(cloud)?)
    } else {
        None
    };
    let lists: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| nearest_others(cloud, metric, index.as_ref(), i, k))
        .collect();

    let mut pairs: Vec<(usize, usize)> = lists
        .iter()
        .enumerate()
        .flat_map(|(i, nbrs)| nbrs.iter().flat_map(move |&j| [(i, j), (j, i)]))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let directed = pairs
        .into_iter()
        .map(|(i, j)| {
            // weight from the lower id so both directions agree bit-for-bit
            let d = pair_distance(metric, cloud, i.min(j), i.max(j));
            (i, j, scheme.apply(d))
        })
        .collect();
    Ok(Graph::from_sorted_directed(n, directed))
}

/// Dispatches on [`EdgeRule`].
pub fn build_graph(
    cloud: &PointCloud,
    metric: Metric,
    rule: EdgeRule,
    scheme: WeightScheme,
) -> Result<Graph> {
    match rule {
        EdgeRule::Cutoff { r } => build_cutoff_graph(cloud, metric, r, scheme),
        EdgeRule::SymmetricKnn { k } => build_symmetric_knn_graph(cloud, metric, k, scheme),
    }
}
