//! Synthetic manifolds with exact geodesic distances.
//!
//! Each manifold is described by a 1- or 2-D parameter on which the
//! intrinsic (geodesic) distance has a closed form:
//!
//! * `Circle`: arc length on a circle in ℝ².
//! * `SwissRoll`: an Archimedean spiral strip in ℝ³. The strip is an
//!   isometric embedding of a flat rectangle, so parameterizing by
//!   (arc length, height) makes geodesics straight lines in the unrolled
//!   rectangle.
//! * `FlatTorusEmbedding`: the flat torus `(R cos u, R sin u, r cos v,
//!   r sin v)` in ℝ⁴, an isometric embedding of the flat metric, so
//!   geodesics follow from wrapped angle differences.
//!
//! Samples are drawn uniformly with respect to the intrinsic area.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{Dijkstra, LabelSet, RunStats};
use crate::graph::Graph;
use crate::metric_space::PointCloud;

/// Intrinsic coordinates of a sample (unused trailing entries are 0).
pub type Param = [f64; 2];

/// Start angle of the swiss-roll spiral.
const SWISS_ROLL_START: f64 = 1.5 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticManifold {
    Circle {
        radius: f64,
    },
    /// Spiral `ρ(θ) = radius · θ / θ_end` for `θ ∈ [1.5π, 1.5π + 2π·turns]`,
    /// extruded along the y axis over `[0, width]`.
    SwissRoll {
        turns: f64,
        width: f64,
        radius: f64,
    },
    FlatTorusEmbedding {
        big_r: f64,
        small_r: f64,
    },
}

impl SyntheticManifold {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be > 0, got {x}"
                )))
            }
        };
        match *self {
            SyntheticManifold::Circle { radius } => positive("circle radius", radius),
            SyntheticManifold::SwissRoll {
                turns,
                width,
                radius,
            } => {
                positive("swiss roll turns", turns)?;
                positive("swiss roll width", width)?;
                positive("swiss roll radius", radius)
            }
            SyntheticManifold::FlatTorusEmbedding { big_r, small_r } => {
                positive("torus R", big_r)?;
                positive("torus r", small_r)
            }
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            SyntheticManifold::Circle { .. } => 1,
            _ => 2,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            SyntheticManifold::Circle { .. } => 2,
            SyntheticManifold::SwissRoll { .. } => 3,
            SyntheticManifold::FlatTorusEmbedding { .. } => 4,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            SyntheticManifold::Circle { radius } => PI * radius,
            SyntheticManifold::SwissRoll { width, .. } => {
                let len = self.swiss_roll_length();
                len.hypot(width)
            }
            SyntheticManifold::FlatTorusEmbedding { big_r, small_r } => {
                (PI * big_r).hypot(PI * small_r)
            }
        }
    }

    /// Intrinsic measure: length for the circle, area otherwise.
    pub fn volume(&self) -> f64 {
        match *self {
            SyntheticManifold::Circle { radius } => TAU * radius,
            SyntheticManifold::SwissRoll { width, .. } => self.swiss_roll_length() * width,
            SyntheticManifold::FlatTorusEmbedding { big_r, small_r } => TAU * big_r * TAU * small_r,
        }
    }

    fn swiss_roll_spiral(&self) -> (f64, f64, f64) {
        match *self {
            SyntheticManifold::SwissRoll { turns, radius, .. } => {
                let end = SWISS_ROLL_START + TAU * turns;
                (radius / end, SWISS_ROLL_START, end)
            }
            _ => unreachable!("not a swiss roll"),
        }
    }

    /// Unrolled length of the swiss-roll strip.
    fn swiss_roll_length(&self) -> f64 {
        let (a, start, end) = self.swiss_roll_spiral();
        spiral_arc(a, end) - spiral_arc(a, start)
    }

    /// Draws an intrinsic parameter uniformly with respect to the manifold
    /// measure.
    pub fn sample_param<R: Rng + ?Sized>(&self, rng: &mut R) -> Param {
        match *self {
            SyntheticManifold::Circle { radius } => [rng.random::<f64>() * TAU * radius, 0.0],
            SyntheticManifold::SwissRoll { width, .. } => {
                let s = rng.random::<f64>() * self.swiss_roll_length();
                [s, rng.random::<f64>() * width]
            }
            SyntheticManifold::FlatTorusEmbedding { .. } => {
                [rng.random::<f64>() * TAU, rng.random::<f64>() * TAU]
            }
        }
    }

    /// Ambient coordinates of an intrinsic parameter.
    pub fn embed(&self, p: Param) -> Vec<f64> {
        match *self {
            SyntheticManifold::Circle { radius } => {
                let t = p[0] / radius;
                vec![radius * t.cos(), radius * t.sin()]
            }
            SyntheticManifold::SwissRoll { .. } => {
                let (a, start, end) = self.swiss_roll_spiral();
                let theta = invert_spiral_arc(a, spiral_arc(a, start) + p[0], start, end);
                let rho = a * theta;
                vec![rho * theta.cos(), p[1], rho * theta.sin()]
            }
            SyntheticManifold::FlatTorusEmbedding { big_r, small_r } => vec![
                big_r * p[0].cos(),
                big_r * p[0].sin(),
                small_r * p[1].cos(),
                small_r * p[1].sin(),
            ],
        }
    }

    /// Exact geodesic distance between two intrinsic parameters.
    pub fn geodesic(&self, a: Param, b: Param) -> f64 {
        match *self {
            SyntheticManifold::Circle { radius } => {
                let arc = wrapped(a[0] / radius - b[0] / radius);
                radius * arc
            }
            SyntheticManifold::SwissRoll { .. } => (a[0] - b[0]).hypot(a[1] - b[1]),
            SyntheticManifold::FlatTorusEmbedding { big_r, small_r } => {
                (big_r * wrapped(a[0] - b[0])).hypot(small_r * wrapped(a[1] - b[1]))
            }
        }
    }

    /// A response function that is 1-Lipschitz with respect to
    /// [`geodesic`](Self::geodesic).
    pub fn base_response(&self, p: Param) -> f64 {
        match *self {
            SyntheticManifold::Circle { radius } => radius * (p[0] / radius).sin(),
            SyntheticManifold::SwissRoll { .. } => p[0],
            SyntheticManifold::FlatTorusEmbedding { big_r, .. } => big_r * p[0].sin(),
        }
    }
}

/// `circle:R`, `swissroll:TURNS,WIDTH,RADIUS` or `torus:R,r`.
impl FromStr for SyntheticManifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad manifold `{s}`"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let args: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let manifold = match (kind, args.as_slice()) {
            ("circle", &[radius]) => SyntheticManifold::Circle { radius },
            ("swissroll", &[turns, width, radius]) => SyntheticManifold::SwissRoll {
                turns,
                width,
                radius,
            },
            ("torus", &[big_r, small_r]) => {
                SyntheticManifold::FlatTorusEmbedding { big_r, small_r }
            }
            _ => return Err(bad()),
        };
        manifold.validate()?;
        Ok(manifold)
    }
}

/// Angular difference folded into `[0, π]`.
fn wrapped(delta: f64) -> f64 {
    let d = delta.rem_euclid(TAU);
    d.min(TAU - d)
}

/// Arc length of `ρ = aθ` from 0 to θ.
fn spiral_arc(a: f64, theta: f64) -> f64 {
    0.5 * a * (theta * (1.0 + theta * theta).sqrt() + theta.asinh())
}

/// θ in `[lo, hi]` with `spiral_arc(a, θ) = target` (Newton with bisection
/// fallback).
fn invert_spiral_arc(a: f64, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = spiral_arc(a, theta) - target;
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            hi = theta;
        } else {
            lo = theta;
        }
        let newton = theta - f / (a * (1.0 + theta * theta).sqrt());
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == theta {
            break;
        }
        theta = next;
    }
    theta
}

/// `f = L · base_response`, observed with Gaussian noise of standard
/// deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseModel {
    pub lipschitz: f64,
    pub sigma: f64,
}

impl ResponseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.lipschitz >= 0.0) || !self.lipschitz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Lipschitz constant must be >= 0, got {}",
                self.lipschitz
            )));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn eval(&self, manifold: &SyntheticManifold, p: Param) -> f64 {
        self.lipschitz * manifold.base_response(p)
    }
}

/// Exact geodesic distances between the points of a sampled dataset.
#[derive(Debug, Clone)]
pub struct GeodesicOracle {
    manifold: SyntheticManifold,
    params: Vec<Param>,
}

impl GeodesicOracle {
    pub fn new(manifold: SyntheticManifold, params: Vec<Param>) -> Self {
        Self { manifold, params }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.manifold.geodesic(self.params[i], self.params[j])
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn manifold(&self) -> &SyntheticManifold {
        &self.manifold
    }
}

/// `n` labeled points (ids `0..n`) followed by `m` unlabeled points.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub cloud: PointCloud,
    pub labels: LabelSet,
    /// Noise-free response at every point.
    pub truth: Vec<f64>,
    pub oracle: GeodesicOracle,
}

/// Draws `n + m` points i.i.d. from the manifold measure and labels the
/// first `n` with `y = f(x) + N(0, σ²)`.
///
/// The random stream is consumed as: labeled parameters, labeled noise,
/// unlabeled parameters. For a fixed seed the labeled part therefore does
/// not depend on `m`, and the unlabeled points for a smaller `m` are a
/// prefix of those for a larger one.
pub fn sample_dataset(
    manifold: &SyntheticManifold,
    response: &ResponseModel,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<Dataset> {
    manifold.validate()?;
    response.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "need at least one labeled point".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params: Vec<Param> = (0..n).map(|_| manifold.sample_param(&mut rng)).collect();
    let noise = Normal::new(0.0, response.sigma).expect("sigma validated");
    let noises: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
    params.extend((0..m).map(|_| manifold.sample_param(&mut rng)));

    let truth: Vec<f64> = params.iter().map(|&p| response.eval(manifold, p)).collect();
    let labels = LabelSet::new((0..n).map(|i| (i, truth[i] + noises[i])))?;
    let mut coords = Vec::with_capacity(params.len() * manifold.ambient_dim());
    for &p in &params {
        coords.extend(manifold.embed(p));
    }
    let cloud = PointCloud::from_flat(manifold.ambient_dim(), coords)?;
    Ok(Dataset {
        cloud,
        labels,
        truth,
        oracle: GeodesicOracle::new(*manifold, params),
    })
}

/// Fresh on-manifold points, returned as (parameter, ambient coordinates).
pub fn sample_points<R: Rng + ?Sized>(
    manifold: &SyntheticManifold,
    count: usize,
    rng: &mut R,
) -> Vec<(Param, Vec<f64>)> {
    (0..count)
        .map(|_| {
            let p = manifold.sample_param(rng);
            (p, manifold.embed(p))
        })
        .collect()
}

/// Outcome of comparing graph distances with geodesic distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceCheck {
    /// Fraction of evaluated pairs with `d_G / d_M ∈ [1 − δ, 1 + δ]`.
    pub fraction_in_bounds: f64,
    pub pairs_evaluated: usize,
    /// Pairs dropped because `d_M < 1e-9`.
    pub pairs_skipped: usize,
    /// Evaluated pairs with no connecting path (counted out of bounds).
    pub disconnected: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

pub const MIN_GEODESIC_FOR_RATIO: f64 = 1e-9;

/// Samples `pair_sample` vertex pairs uniformly (distinct endpoints) and
/// reports how many satisfy the two-sided ratio bound.
pub fn check_distance_approximation(
    g: &Graph,
    oracle: &GeodesicOracle,
    delta: f64,
    pair_sample: usize,
    seed: u64,
) -> Result<DistanceCheck> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let n = g.num_vertices();
    if oracle.len() != n {
        return Err(Error::InvalidParameter(format!(
            "oracle covers {} points, graph has {n} vertices",
            oracle.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    if let Some((u, v, weight)) = g.find_negative_edge() {
        return Err(Error::NegativeWeight { u, v, weight });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = (0..pair_sample)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (i, j)
        })
        .collect();
    pairs.sort_unstable();

    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, j) in pairs {
        match groups.last_mut() {
            Some((src, targets)) if *src == i => targets.push(j),
            _ => groups.push((i, vec![j])),
        }
    }

    let ratios: Vec<Vec<Option<f64>>> = groups
        .par_iter()
        .map_init(
            || Dijkstra::new(g),
            |dijkstra, (src, targets)| {
                let mut stats = RunStats::default();
                let dist = dijkstra.run(*src, &mut stats);
                targets
                    .iter()
                    .map(|&t| {
                        let dm = oracle.distance(*src, t);
                        (dm >= MIN_GEODESIC_FOR_RATIO).then(|| dist[t] / dm)
                    })
                    .collect()
            },
        )
        .collect();

    let mut check = DistanceCheck {
        fraction_in_bounds: 0.0,
        pairs_evaluated: 0,
        pairs_skipped: 0,
        disconnected: 0,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
    };
    let mut inside = 0usize;
    for ratio in ratios.into_iter().flatten() {
        let Some(ratio) = ratio else {
            check.pairs_skipped += 1;
            continue;
        };
        check.pairs_evaluated += 1;
        if ratio.is_infinite() {
            check.disconnected += 1;
            continue;
        }
        check.min_ratio = check.min_ratio.min(ratio);
        check.max_ratio = check.max_ratio.max(ratio);
        if (1.0 - delta..=1.0 + delta).contains(&ratio) {
            inside += 1;
        }
    }
    if check.pairs_evaluated > 0 {
        check.fraction_in_bounds = inside as f64 / check.pairs_evaluated as f64;
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_cutoff_graph, WeightScheme};
    use crate::metric_space::{euclidean, Metric};

    const ROLL: SyntheticManifold = SyntheticManifold::SwissRoll {
        turns: 1.5,
        width: 0.5,
        radius: 1.0,
    };
    const TORUS: SyntheticManifold = SyntheticManifold::FlatTorusEmbedding {
        big_r: 1.0,
        small_r: 0.5,
    };

    #[test]
    fn antipodal_circle_points() {
        let c = SyntheticManifold::Circle { radius: 1.0 };
        assert!((c.geodesic([0.0, 0.0], [PI, 0.0]) - PI).abs() < 1e-15);
        assert!((c.geodesic([0.1, 0.0], [TAU - 0.1, 0.0]) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn noiseless_labels_equal_truth() {
        let resp = ResponseModel {
            lipschitz: 2.0,
            sigma: 0.0,
        };
        let ds = sample_dataset(&ROLL, &resp, 20, 30, 1).unwrap();
        assert_eq!(ds.cloud.len(), 50);
        assert_eq!(ds.labels.len(), 20);
        for (id, y) in ds.labels.iter() {
            assert_eq!(y, ds.truth[id]);
        }
    }

    #[test]
    fn labeled_part_independent_of_m() {
        let resp = ResponseModel {
            lipschitz: 1.0,
            sigma: 0.1,
        };
        let small = sample_dataset(&ROLL, &resp, 10, 5, 7).unwrap();
        let big = sample_dataset(&ROLL, &resp, 10, 50, 7).unwrap();
        assert_eq!(small.labels, big.labels);
        assert_eq!(small.cloud.coords(), &big.cloud.coords()[..15 * 3]);
    }

    #[test]
    fn invalid_parameters() {
        let resp = ResponseModel {
            lipschitz: 1.0,
            sigma: 0.0,
        };
        let bad = SyntheticManifold::Circle { radius: -1.0 };
        assert!(sample_dataset(&bad, &resp, 1, 0, 0).is_err());
        assert!(sample_dataset(&ROLL, &resp, 0, 5, 0).is_err());
        let noisy = ResponseModel {
            lipschitz: 1.0,
            sigma: -1.0,
        };
        assert!(sample_dataset(&ROLL, &noisy, 1, 0, 0).is_err());
    }

    #[test]
    fn samples_lie_on_manifold() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, _, _) = ROLL.swiss_roll_spiral();
        for (p, x) in sample_points(&ROLL, 500, &mut rng) {
            let rho = x[0].hypot(x[2]);
            let theta = rho / a;
            // the point's angle must agree with its radius on the spiral
            let expected = [rho * theta.cos(), rho * theta.sin()];
            assert!((expected[0] - x[0]).abs() <= 1e-12 * rho.max(1.0));
            assert!((expected[1] - x[2]).abs() <= 1e-12 * rho.max(1.0));
            // and its arc length must match the parameter
            let s = spiral_arc(a, theta) - spiral_arc(a, SWISS_ROLL_START);
            assert!((s - p[0]).abs() <= 1e-12 * ROLL.swiss_roll_length());
            assert_eq!(x[1], p[1]);
        }
        for (_, x) in sample_points(&TORUS, 200, &mut rng) {
            assert!((x[0].hypot(x[1]) - 1.0).abs() < 1e-12);
            assert!((x[2].hypot(x[3]) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn geodesic_dominates_chord() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for manifold in [SyntheticManifold::Circle { radius: 2.0 }, ROLL, TORUS] {
            let pts = sample_points(&manifold, 400, &mut rng);
            for pair in pts.chunks(2) {
                let dm = manifold.geodesic(pair[0].0, pair[1].0);
                let chord = euclidean(&pair[0].1, &pair[1].1);
                assert!(
                    chord <= dm * (1.0 + 1e-12) + 1e-12,
                    "{manifold:?}: {chord} > {dm}"
                );
                assert!(dm <= manifold.diameter() + 1e-12);
            }
        }
    }

    #[test]
    fn swiss_roll_local_isometry() {
        // nearby points: geodesic ≈ chord
        let (x1, x2) = ([0.3, 0.2], [0.3005, 0.2003]);
        let d = ROLL.geodesic(x1, x2);
        let chord = euclidean(&ROLL.embed(x1), &ROLL.embed(x2));
        assert!((d - chord).abs() < 1e-6 * d);
    }

    #[test]
    fn lipschitz_audit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let resp = ResponseModel {
            lipschitz: 3.0,
            sigma: 0.0,
        };
        for manifold in [SyntheticManifold::Circle { radius: 1.5 }, ROLL, TORUS] {
            for _ in 0..10_000 {
                let a = manifold.sample_param(&mut rng);
                let b = manifold.sample_param(&mut rng);
                let df = (resp.eval(&manifold, a) - resp.eval(&manifold, b)).abs();
                assert!(df <= 3.0 * manifold.geodesic(a, b) + 1e-9);
            }
        }
    }

    #[test]
    fn noise_is_centered() {
        let resp = ResponseModel {
            lipschitz: 1.0,
            sigma: 0.5,
        };
        let ds = sample_dataset(
            &SyntheticManifold::Circle { radius: 1.0 },
            &resp,
            100_000,
            0,
            9,
        )
        .unwrap();
        let mean: f64 = ds.labels.iter().map(|(i, y)| y - ds.truth[i]).sum::<f64>() / 1e5;
        assert!(mean.abs() <= 3.0 * 0.5 / 1e5f64.sqrt());
    }

    #[test]
    fn exact_weights_give_unit_ratios() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let circle = SyntheticManifold::Circle { radius: 1.0 };
        let params: Vec<Param> = (0..40).map(|_| circle.sample_param(&mut rng)).collect();
        let oracle = GeodesicOracle::new(circle, params);
        let mut edges = Vec::new();
        for i in 0..40 {
            for j in i + 1..40 {
                edges.push((i, j, oracle.distance(i, j)));
            }
        }
        let g = Graph::from_edges(40, &edges).unwrap();
        for delta in [0.001, 0.1, 0.5] {
            let check = check_distance_approximation(&g, &oracle, delta, 500, 1).unwrap();
            assert_eq!(check.fraction_in_bounds, 1.0);
            assert_eq!(check.pairs_evaluated, 500);
        }
    }

    #[test]
    fn dense_and_sparse_circle() {
        let circle = SyntheticManifold::Circle { radius: 1.0 };
        let resp = ResponseModel {
            lipschitz: 1.0,
            sigma: 0.0,
        };
        let dense = sample_dataset(&circle, &resp, 2000, 0, 11).unwrap();
        let g = build_cutoff_graph(
            &dense.cloud,
            Metric::Euclidean,
            0.1,
            WeightScheme::RawDistance,
        )
        .unwrap();
        let check = check_distance_approximation(&g, &dense.oracle, 0.1, 2000, 12).unwrap();
        assert!(check.fraction_in_bounds >= 0.99, "{check:?}");

        let sparse = sample_dataset(&circle, &resp, 10, 0, 11).unwrap();
        let g = build_cutoff_graph(
            &sparse.cloud,
            Metric::Euclidean,
            0.1,
            WeightScheme::RawDistance,
        )
        .unwrap();
        let check = check_distance_approximation(&g, &sparse.oracle, 0.1, 500, 12).unwrap();
        assert!(check.fraction_in_bounds < 0.5, "{check:?}");
        assert!(check.disconnected > 0);
    }

    #[test]
    fn check_rejects_bad_delta() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let oracle = GeodesicOracle::new(
            SyntheticManifold::Circle { radius: 1.0 },
            vec![[0.0, 0.0], [1.0, 0.0]],
        );
        assert!(check_distance_approximation(&g, &oracle, 0.0, 10, 0).is_err());
        assert!(check_distance_approximation(&g, &oracle, 1.0, 10, 0).is_err());
    }

    #[test]
    fn parse_manifold() {
        assert_eq!(
            "circle:1".parse::<SyntheticManifold>().unwrap(),
            SyntheticManifold::Circle { radius: 1.0 }
        );
        assert_eq!(
            "swissroll:1.5,0.22,0.035"
                .parse::<SyntheticManifold>()
                .unwrap(),
            ROLL_SMALL
        );
        assert_eq!(
            "torus:1,0.5".parse::<SyntheticManifold>().unwrap(),
            SyntheticManifold::FlatTorusEmbedding {
                big_r: 1.0,
                small_r: 0.5
            }
        );
        for bad in ["circle", "circle:-1", "circle:1,2", "sphere:1", "torus:1,x"] {
            assert!(bad.parse::<SyntheticManifold>().is_err(), "{bad}");
        }
    }

    const ROLL_SMALL: SyntheticManifold = SyntheticManifold::SwissRoll {
        turns: 1.5,
        width: 0.22,
        radius: 0.035,
    };
}
