//! kNN regression on top of a [`NeighborTable`].
//!
//! Transductive estimates average the responses of each vertex's nearest
//! labeled vertices; an out-of-sample query takes the estimate of its
//! Euclidean-nearest stored point. The supervised baseline does plain kNN
//! regression in ambient space over the labeled points only.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{LabelSet, NeighborTable};
use crate::metric_space::{PointCloud, SpatialIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionWeights {
    #[default]
    Uniform,
    /// The i-th nearest neighbor (1-based) gets weight ∝ 2^-i, normalized
    /// over the neighbors actually present.
    #[serde(rename = "exp2")]
    ExponentialDecay,
}

impl FromStr for RegressionWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(RegressionWeights::Uniform),
            "exp2" => Ok(RegressionWeights::ExponentialDecay),
            _ => Err(Error::InvalidParameter(format!(
                "unknown regression weights `{s}` (expected uniform or exp2)"
            ))),
        }
    }
}

impl RegressionWeights {
    /// Weighted mean of responses listed in ascending distance order.
    /// `None` for an empty list.
    pub fn combine(&self, ys: &[f64]) -> Option<f64> {
        let (lo, hi) = ys
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                (lo.min(y), hi.max(y))
            });
        let value = match self {
            RegressionWeights::Uniform => ys.iter().sum::<f64>() / ys.len() as f64,
            RegressionWeights::ExponentialDecay => {
                let mut w = 1.0;
                let (mut num, mut den) = (0.0, 0.0);
                for &y in ys {
                    w *= 0.5;
                    num += w * y;
                    den += w;
                }
                num / den
            }
        };
        // rounding can push a mean of equal values just past them
        (!ys.is_empty()).then(|| value.clamp(lo, hi))
    }
}

/// Per-vertex estimates; `None` marks a vertex with no labeled vertex in
/// its connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionEstimate {
    values: Vec<Option<f64>>,
}

impl RegressionEstimate {
    pub fn from_values(values: Vec<Option<f64>>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<f64> {
        self.values.get(v).copied().flatten()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// CSV `vertex,estimate,flag`; flag is `ok` or `none` (estimate empty).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,estimate,flag\n");
        for (v, value) in self.values.iter().enumerate() {
            match value {
                Some(x) => {
                    let _ = writeln!(out, "{v},{x:?},ok");
                }
                None => {
                    let _ = writeln!(out, "{v},,none");
                }
            }
        }
        out
    }
}

pub fn save_estimates(est: &RegressionEstimate, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, est.to_csv()).map_err(|e| Error::io(path, e))
}

/// Geodesic kNN regression at every vertex of the table.
pub fn regress_transductive(
    table: &NeighborTable,
    labels: &LabelSet,
    weights: RegressionWeights,
) -> Result<RegressionEstimate> {
    let mut ys = Vec::new();
    let values = table
        .lists()
        .iter()
        .map(|list| {
            ys.clear();
            for nb in list {
                ys.push(
                    labels
                        .response(nb.seed)
                        .ok_or(Error::UnknownSeed(nb.seed))?,
                );
            }
            Ok(weights.combine(&ys))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegressionEstimate { values })
}

/// Estimate at an out-of-sample point: the estimate of its Euclidean
/// nearest stored point.
pub fn regress_inductive(
    query: &[f64],
    index: &SpatialIndex,
    estimates: &RegressionEstimate,
) -> Result<f64> {
    if estimates.len() != index.len() {
        return Err(Error::InvalidParameter(format!(
            "{} estimates for an index over {} points",
            estimates.len(),
            index.len()
        )));
    }
    let (nearest, _) = index.nearest(query)?;
    estimates.get(nearest).ok_or(Error::Unreachable(nearest))
}

/// Classical kNN regression in ambient space using only labeled points.
pub struct EuclideanKnnRegressor {
    index: SpatialIndex,
    responses: Vec<f64>,
    k: usize,
    weights: RegressionWeights,
}

impl EuclideanKnnRegressor {
    pub fn fit(
        cloud: &PointCloud,
        labels: &LabelSet,
        k: usize,
        weights: RegressionWeights,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if labels.is_empty() {
            return Err(Error::EmptyLabelSet);
        }
        labels.check_vertices(cloud.len())?;
        if !cloud.has_coordinates() {
            return Err(Error::MissingCoordinates);
        }
        // labeled ids are ascending, so local ids keep the global tie order
        let mut coords = Vec::with_capacity(labels.len() * cloud.dim());
        for &id in labels.ids() {
            coords.extend_from_slice(cloud.point(id));
        }
        let labeled = PointCloud::from_flat(cloud.dim(), coords)?;
        Ok(Self {
            index: SpatialIndex::build(&labeled)?,
            responses: labels.responses().to_vec(),
            k,
            weights,
        })
    }

    pub fn predict(&self, query: &[f64]) -> Result<f64> {
        let ys: Vec<f64> = self
            .index
            .knn_query(query, self.k)?
            .into_iter()
            .map(|(i, _)| self.responses[i])
            .collect();
        Ok(self
            .weights
            .combine(&ys)
            .expect("at least one labeled point"))
    }
}

pub fn euclidean_knn_regress<Q: AsRef<[f64]>>(
    cloud: &PointCloud,
    labels: &LabelSet,
    k: usize,
    weights: RegressionWeights,
    queries: &[Q],
) -> Result<Vec<f64>> {
    let model = EuclideanKnnRegressor::fit(cloud, labels, k, weights)?;
    queries.iter().map(|q| model.predict(q.as_ref())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::Neighbor;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(lists: Vec<Vec<(usize, f64)>>) -> NeighborTable {
        NeighborTable::from_lists(
            lists
                .into_iter()
                .map(|l| {
                    l.into_iter()
                        .map(|(seed, dist)| Neighbor { seed, dist })
                        .collect()
                })
                .collect(),
        )
    }

    #[test]
    fn single_neighbor() {
        let labels = LabelSet::new([(0, 4.2)]).unwrap();
        let est = regress_transductive(
            &table(vec![vec![(0, 0.0)]]),
            &labels,
            RegressionWeights::Uniform,
        )
        .unwrap();
        assert_eq!(est.get(0), Some(4.2));
    }

    #[test]
    fn uniform_and_exponential_means() {
        let labels = LabelSet::new([(0, 1.0), (1, 3.0), (2, 5.0)]).unwrap();
        let t = table(vec![
            vec![(0, 0.1), (1, 0.2), (2, 0.3)],
            vec![(0, 0.1), (1, 0.2)],
            vec![],
        ]);
        let uni = regress_transductive(&t, &labels, RegressionWeights::Uniform).unwrap();
        assert_eq!(uni.get(0), Some(3.0));
        assert_eq!(uni.get(2), None);
        assert_eq!(uni.missing_count(), 1);
        let exp = regress_transductive(&t, &labels, RegressionWeights::ExponentialDecay).unwrap();
        assert!((exp.get(1).unwrap() - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_seed_is_an_error() {
        let labels = LabelSet::new([(0, 1.0)]).unwrap();
        assert!(matches!(
            regress_transductive(
                &table(vec![vec![(7, 0.0)]]),
                &labels,
                RegressionWeights::Uniform
            ),
            Err(Error::UnknownSeed(7))
        ));
    }

    #[test]
    fn csv_output() {
        let est = RegressionEstimate::from_values(vec![Some(0.5), None]);
        assert_eq!(est.to_csv(), "vertex,estimate,flag\n0,0.5,ok\n1,,none\n");
    }

    fn line_index(xs: &[f64]) -> SpatialIndex {
        let cloud = PointCloud::from_rows(&xs.iter().map(|&x| [x]).collect::<Vec<_>>()).unwrap();
        SpatialIndex::build(&cloud).unwrap()
    }

    #[test]
    fn inductive_lookup() {
        let index = line_index(&[0.0, 1.0, 3.0]);
        let est = RegressionEstimate::from_values(vec![Some(10.0), Some(20.0), None]);
        assert_eq!(regress_inductive(&[1.0], &index, &est).unwrap(), 20.0);
        assert_eq!(regress_inductive(&[0.4], &index, &est).unwrap(), 10.0);
        // equidistant from 0 and 1: smaller id wins
        assert_eq!(regress_inductive(&[0.5], &index, &est).unwrap(), 10.0);
        assert!(matches!(
            regress_inductive(&[2.9], &index, &est),
            Err(Error::Unreachable(2))
        ));
    }

    #[test]
    fn inductive_matches_brute_force_lookup() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<[f64; 2]> = (0..300).map(|_| [rng.random(), rng.random()]).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let index = SpatialIndex::build(&cloud).unwrap();
        let est = RegressionEstimate::from_values((0..300).map(|i| Some(i as f64)).collect());
        for _ in 0..100 {
            let q = [rng.random::<f64>(), rng.random::<f64>()];
            let best = (0..300)
                .min_by(|&a, &b| {
                    crate::metric_space::euclidean(&q, &rows[a])
                        .total_cmp(&crate::metric_space::euclidean(&q, &rows[b]))
                        .then(a.cmp(&b))
                })
                .unwrap();
            assert_eq!(regress_inductive(&q, &index, &est).unwrap(), best as f64);
        }
    }

    #[test]
    fn euclidean_baseline() {
        let cloud = PointCloud::from_rows(&[[0.0], [1.0], [2.0], [10.0]]).unwrap();
        let labels = LabelSet::new([(0, 1.0), (2, 2.0), (3, 6.0)]).unwrap();
        let q = [[0.9], [9.0]];
        let all =
            euclidean_knn_regress(&cloud, &labels, 3, RegressionWeights::Uniform, &q).unwrap();
        assert_eq!(all, vec![3.0, 3.0]);
        let nn = euclidean_knn_regress(&cloud, &labels, 1, RegressionWeights::Uniform, &q).unwrap();
        assert_eq!(nn, vec![1.0, 6.0]);
        assert!(euclidean_knn_regress(&cloud, &labels, 0, RegressionWeights::Uniform, &q).is_err());
        let none = LabelSet::new([]).unwrap();
        assert!(matches!(
            euclidean_knn_regress(&cloud, &none, 1, RegressionWeights::Uniform, &q),
            Err(Error::EmptyLabelSet)
        ));
    }

    #[test]
    fn euclidean_baseline_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows: Vec<[f64; 3]> = (0..200)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let labels = LabelSet::new((0..200).step_by(3).map(|i| (i, rng.random::<f64>()))).unwrap();
        let queries: Vec<[f64; 3]> = (0..50)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect();
        for weights in [
            RegressionWeights::Uniform,
            RegressionWeights::ExponentialDecay,
        ] {
            let got = euclidean_knn_regress(&cloud, &labels, 5, weights, &queries).unwrap();
            for (q, g) in queries.iter().zip(got) {
                let mut by_dist: Vec<(f64, usize, f64)> = labels
                    .iter()
                    .map(|(id, y)| (crate::metric_space::euclidean(q, &rows[id]), id, y))
                    .collect();
                by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let ys: Vec<f64> = by_dist[..5].iter().map(|t| t.2).collect();
                let expected = match weights {
                    RegressionWeights::Uniform => ys.iter().sum::<f64>() / 5.0,
                    RegressionWeights::ExponentialDecay => {
                        let w: Vec<f64> = (1..=5).map(|i| 0.5f64.powi(i)).collect();
                        ys.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / w.iter().sum::<f64>()
                    }
                };
                assert!((g - expected).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn estimates_are_convex_combinations(
            ys in proptest::collection::vec(-1e3f64..1e3, 1..30),
            exp in any::<bool>(),
        ) {
            let w = if exp { RegressionWeights::ExponentialDecay } else { RegressionWeights::Uniform };
            let est = w.combine(&ys).unwrap();
            let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= est && est <= hi);
        }

        #[test]
        fn estimates_are_affine_equivariant(
            ys in proptest::collection::vec(-1e3f64..1e3, 1..30),
            scale in -1e2f64..1e2,
            shift in -1e3f64..1e3,
            exp in any::<bool>(),
        ) {
            let w = if exp { RegressionWeights::ExponentialDecay } else { RegressionWeights::Uniform };
            let moved: Vec<f64> = ys.iter().map(|y| scale * y + shift).collect();
            let lhs = w.combine(&moved).unwrap();
            let rhs = scale * w.combine(&ys).unwrap() + shift;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs() + scale.abs() * 1e3));
        }

        #[test]
        fn exponential_tail_bound(ys in proptest::collection::vec(0.0f64..1.0, 20..=20)) {
            let w = RegressionWeights::ExponentialDecay;
            let f_d = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - ys.iter().cloned().fold(f64::INFINITY, f64::min);
            let bound = f_d * 2f64.powi(-7) / (1.0 - 2f64.powi(-7));
            let diff = (w.combine(&ys[..7]).unwrap() - w.combine(&ys).unwrap()).abs();
            prop_assert!(diff <= bound + 1e-12);
        }
    }
}
