//! Geodesic k-nearest-neighbor search and regression on neighborhood graphs.
//!
//! Points live in a [`PointCloud`]; [`build_graph`] turns them into a
//! weighted [`Graph`] whose shortest paths approximate geodesic distance.
//! [`geodesic_knn`] finds, for every vertex, its `k` nearest labeled vertices
//! in graph distance, and [`regress_transductive`] averages their responses.
//! The [`manifold`] and [`experiment`] modules provide synthetic data with
//! known geodesics and the drivers used to study convergence.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod fmt;
pub mod geodesic;
pub mod graph;
pub mod io;
pub mod manifold;
pub mod metric_space;
pub mod regression;

pub use error::{Error, Result};
pub use experiment::{
    run_rate_experiment, run_speed_benchmark, speed_instance, ExperimentConfig, ExperimentReport,
    KChoice, SpeedReport,
};
pub use geodesic::{
    dijkstra, geodesic_knn, geodesic_knn_alg1, geodesic_knn_alg2, memory_estimate,
    naive_multi_dijkstra, Algorithm, LabelSet, MemoryEstimate, Neighbor, NeighborTable, RunStats,
};
pub use graph::{build_graph, EdgeRule, Graph, WeightScheme};
pub use manifold::{
    check_distance_approximation, sample_dataset, Dataset, GeodesicOracle, ResponseModel,
    SyntheticManifold,
};
pub use metric_space::{distance, DistanceMatrix, Metric, PointCloud, SpatialIndex};
pub use regression::{
    euclidean_knn_regress, regress_inductive, regress_transductive, EuclideanKnnRegressor,
    RegressionEstimate, RegressionWeights,
};
