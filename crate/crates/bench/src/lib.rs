//! Shared inputs for the criterion benchmarks.

use gknn::{speed_instance, EdgeRule, Graph, LabelSet, SyntheticManifold};

pub const ROLL: SyntheticManifold = SyntheticManifold::SwissRoll {
    turns: 1.5,
    width: 0.22,
    radius: 0.035,
};

/// Swiss-roll samples joined by a symmetric 4-NN graph, with the first
/// `labeled` samples labeled.
pub fn roll_instance(points: usize, labeled: usize) -> (Graph, LabelSet) {
    speed_instance(&ROLL, points, labeled, EdgeRule::SymmetricKnn { k: 4 }, 1)
        .expect("valid benchmark instance")
}
