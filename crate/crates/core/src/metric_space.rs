//! Point storage, distance metrics and exact spatial queries.
//!
//! A [`PointCloud`] carries coordinates, a precomputed distance matrix, or
//! both. [`SpatialIndex`] answers Euclidean range and k-nearest queries
//! exactly: results are identical to a brute-force scan, including the
//! ascending-id tie-break.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Above this ambient dimension the index degrades to a linear scan.
pub const KD_TREE_MAX_DIM: usize = 16;

const LEAF_SIZE: usize = 12;

/// Symmetric N×N matrix with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidDistanceMatrix(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidDistanceMatrix(format!(
                    "diagonal entry ({i}, {i}) is {}",
                    data[i * n + i]
                )));
            }
            for j in 0..n {
                let d = data[i * n + j];
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(Error::InvalidDistanceMatrix(format!(
                        "entry ({i}, {j}) = {d} is not a finite nonnegative number"
                    )));
                }
                if d != data[j * n + i] {
                    return Err(Error::InvalidDistanceMatrix(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// N points of common dimension D, optionally with a precomputed distance
/// matrix. A cloud built only from a matrix has no coordinates (`dim() == 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    len: usize,
    dim: usize,
    coords: Vec<f64>,
    dist_matrix: Option<DistanceMatrix>,
}

impl PointCloud {
    /// Builds a cloud from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "point dimension must be >= 1".into(),
            ));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coordinate {bad}"
            )));
        }
        Ok(Self {
            len: coords.len() / dim,
            dim,
            coords,
            dist_matrix: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::from_flat(dim, coords)
    }

    /// A cloud known only through its pairwise distances.
    pub fn from_distance_matrix(matrix: DistanceMatrix) -> Self {
        Self {
            len: matrix.len(),
            dim: 0,
            coords: Vec::new(),
            dist_matrix: Some(matrix),
        }
    }

    pub fn with_distance_matrix(mut self, matrix: DistanceMatrix) -> Result<Self> {
        if matrix.len() != self.len {
            return Err(Error::InvalidDistanceMatrix(format!(
                "matrix covers {} points, cloud has {}",
                matrix.len(),
                self.len
            )));
        }
        self.dist_matrix = Some(matrix);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Ambient dimension, or 0 for a matrix-only cloud.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_coordinates(&self) -> bool {
        self.dim > 0
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn distance_matrix(&self) -> Option<&DistanceMatrix> {
        self.dist_matrix.as_ref()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.len).map(move |i| self.point(i))
    }
}

/// Distance function on a point cloud.
///
/// `Minkowski { p, q }` is `‖a − b‖_p^q`. With `q = 1` this is a metric; for
/// other `q` the triangle inequality may fail, but shortest-path sums over a
/// graph built from it remain well defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Minkowski { p: f64, q: f64 },
    Euclidean,
    Precomputed,
}

impl Metric {
    pub fn validate(&self) -> Result<()> {
        if let Metric::Minkowski { p, q } = *self {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "Minkowski exponent p must be finite and >= 1, got {p}"
                )));
            }
            if !(q > 0.0) || !q.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "Minkowski power q must be finite and > 0, got {q}"
                )));
            }
        }
        Ok(())
    }

    /// True when the metric is (numerically) the plain Euclidean distance,
    /// so the spatial index can serve it.
    pub fn is_euclidean(&self) -> bool {
        match *self {
            Metric::Euclidean => true,
            Metric::Minkowski { p, q } => p == 2.0 && q == 1.0,
            Metric::Precomputed => false,
        }
    }

    /// Distance between two coordinate vectors. Not defined for
    /// [`Metric::Precomputed`], which only addresses stored points.
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Metric::Euclidean => euclidean(a, b),
            Metric::Minkowski { p, q } => minkowski(a, b, p, q),
            Metric::Precomputed => panic!("precomputed metric has no coordinate form"),
        }
    }
}

/// `euclidean`, `precomputed` or `minkowski:P,Q`.
impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad metric `{s}`"));
        let metric = match s {
            "euclidean" => Metric::Euclidean,
            "precomputed" => Metric::Precomputed,
            _ => {
                let args = s.strip_prefix("minkowski:").ok_or_else(bad)?;
                let (p, q) = args.split_once(',').ok_or_else(bad)?;
                Metric::Minkowski {
                    p: p.trim().parse().map_err(|_| bad())?,
                    q: q.trim().parse().map_err(|_| bad())?,
                }
            }
        };
        metric.validate()?;
        Ok(metric)
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

#[inline]
fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

fn minkowski(a: &[f64], b: &[f64], p: f64, q: f64) -> f64 {
    if p == 2.0 {
        let ss = squared_euclidean(a, b);
        return if q == 1.0 {
            ss.sqrt()
        } else if q == 2.0 {
            ss
        } else {
            ss.powf(q / 2.0)
        };
    }
    if p == 1.0 {
        let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
        return if q == 1.0 { s } else { s.powf(q) };
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum();
    s.powf(q / p)
}

/// Distance between stored points `i` and `j`.
pub fn distance(metric: Metric, cloud: &PointCloud, i: usize, j: usize) -> Result<f64> {
    for idx in [i, j] {
        if idx >= cloud.len() {
            return Err(Error::IndexOutOfRange {
                index: idx,
                len: cloud.len(),
            });
        }
    }
    metric.validate()?;
    match metric {
        Metric::Precomputed => cloud
            .distance_matrix()
            .map(|m| m.get(i, j))
            .ok_or(Error::MissingDistanceMatrix),
        _ => {
            if !cloud.has_coordinates() {
                return Err(Error::MissingCoordinates);
            }
            Ok(metric.eval(cloud.point(i), cloud.point(j)))
        }
    }
}

/// Candidate ordered by (distance, id); the max-heap keeps the worst on top.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist: f64,
    id: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Exact Euclidean spatial index: a k-d tree for `D <= KD_TREE_MAX_DIM`,
/// a linear scan otherwise.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    dim: usize,
    len: usize,
    coords: Vec<f64>,
    /// Point ids, permuted so every leaf owns a contiguous range.
    perm: Vec<usize>,
    nodes: Vec<Node>,
    /// Per-node bounding box, `[lo_0..lo_D, hi_0..hi_D]`.
    bounds: Vec<f64>,
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if !cloud.has_coordinates() {
            return Err(Error::MissingCoordinates);
        }
        let mut index = Self {
            dim: cloud.dim(),
            len: cloud.len(),
            coords: cloud.coords().to_vec(),
            perm: (0..cloud.len()).collect(),
            nodes: Vec::new(),
            bounds: Vec::new(),
        };
        if index.uses_tree() {
            index.build_node(0, index.len);
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether queries go through the tree rather than a linear scan.
    pub fn uses_tree(&self) -> bool {
        self.dim <= KD_TREE_MAX_DIM
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let dim = self.dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &p in &self.perm[start..end] {
            for (a, &c) in self.coords[p * dim..(p + 1) * dim].iter().enumerate() {
                lo[a] = lo[a].min(c);
                hi[a] = hi[a].max(c);
            }
        }
        let node_id = self.nodes.len();
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);

        let (split_dim, spread) =
            (0..dim)
                .map(|a| (a, hi[a] - lo[a]))
                .fold((0, f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                });
        if end - start <= LEAF_SIZE || spread <= 0.0 {
            self.nodes.push(Node::Leaf { start, end });
            return node_id;
        }

        self.nodes.push(Node::Leaf { start, end });
        let mid = start + (end - start) / 2;
        let coords = &self.coords;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coords[a * dim + split_dim]
                .total_cmp(&coords[b * dim + split_dim])
                .then(a.cmp(&b))
        });
        let value = self.coords[self.perm[mid] * dim + split_dim];
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[node_id] = Node::Split {
            dim: split_dim,
            value,
            left,
            right,
        };
        node_id
    }

    /// Lower bound on the distance from `center` to any point in the node box.
    #[inline]
    fn box_distance(&self, node: usize, center: &[f64]) -> f64 {
        let base = node * 2 * self.dim;
        let lo = &self.bounds[base..base + self.dim];
        let hi = &self.bounds[base + self.dim..base + 2 * self.dim];
        let mut ss = 0.0;
        for a in 0..self.dim {
            let c = center[a];
            let gap = if c < lo[a] {
                c - lo[a]
            } else if c > hi[a] {
                c - hi[a]
            } else {
                0.0
            };
            ss += gap * gap;
        }
        ss.sqrt()
    }

    fn check_center(&self, center: &[f64]) -> Result<()> {
        if center.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: center.len(),
            });
        }
        Ok(())
    }

    /// Ids of all points strictly closer than `r` to `center`, ascending.
    pub fn range_query(&self, center: &[f64], r: f64) -> Result<Vec<usize>> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "range radius must be > 0, got {r}"
            )));
        }
        self.check_center(center)?;
        let mut out = Vec::new();
        if self.uses_tree() {
            self.range_rec(0, center, r, &mut out);
        } else {
            out.extend((0..self.len).filter(|&i| euclidean(center, self.point(i)) < r));
        }
        out.sort_unstable();
        Ok(out)
    }

    fn range_rec(&self, node: usize, center: &[f64], r: f64, out: &mut Vec<usize>) {
        if self.box_distance(node, center) >= r {
            return;
        }
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &p in &self.perm[start..end] {
                    if euclidean(center, self.point(p)) < r {
                        out.push(p);
                    }
                }
            }
            Node::Split { left, right, .. } => {
                self.range_rec(left, center, r, out);
                self.range_rec(right, center, r, out);
            }
        }
    }

    /// The `k` nearest points to `center` as `(id, distance)`, ascending by
    /// distance with ties broken by smaller id. Returns fewer than `k` when
    /// the index holds fewer points.
    pub fn knn_query(&self, center: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        self.check_center(center)?;
        let k = k.min(self.len);
        let mut heap = BinaryHeap::with_capacity(k + 1);
        if self.uses_tree() {
            self.knn_rec(0, center, k, &mut heap);
        } else {
            for i in 0..self.len {
                offer(
                    &mut heap,
                    k,
                    Candidate {
                        dist: euclidean(center, self.point(i)),
                        id: i,
                    },
                );
            }
        }
        let mut out: Vec<_> = heap.into_vec();
        out.sort_unstable();
        Ok(out.into_iter().map(|c| (c.id, c.dist)).collect())
    }

    /// Nearest stored point to `center` (smallest id among equidistant points).
    pub fn nearest(&self, center: &[f64]) -> Result<(usize, f64)> {
        Ok(self.knn_query(center, 1)?[0])
    }

    fn knn_rec(&self, node: usize, center: &[f64], k: usize, heap: &mut BinaryHeap<Candidate>) {
        if heap.len() == k {
            // Equal bounds must still be visited: an equidistant point with a
            // smaller id would win the tie.
            if self.box_distance(node, center) > heap.peek().map_or(f64::INFINITY, |c| c.dist) {
                return;
            }
        }
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &p in &self.perm[start..end] {
                    offer(
                        heap,
                        k,
                        Candidate {
                            dist: euclidean(center, self.point(p)),
                            id: p,
                        },
                    );
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let (near, far) = if center[dim] < value {
                    (left, right)
                } else {
                    (right, left)
                };
                self.knn_rec(near, center, k, heap);
                self.knn_rec(far, center, k, heap);
            }
        }
    }
}

#[inline]
fn offer(heap: &mut BinaryHeap<Candidate>, k: usize, cand: Candidate) {
    if heap.len() < k {
        heap.push(cand);
    } else if let Some(mut worst) = heap.peek_mut() {
        if cand < *worst {
            *worst = cand;
        }
    }
}
