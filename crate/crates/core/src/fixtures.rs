//! Hand-built feature sets shipped with the crate.

use crate::board::{Turn, Walk};
use crate::features::{Element, Feature, FeatureSet};

/// Handcrafted Yavalath features: one pattern that completes a line of four
/// (weight +3000) and the two patterns that complete a bare line of three
/// (weight −1000 each). Positions are along one hex axis; rotations and
/// reflections at instantiation cover every direction.
pub fn yavalath_handcrafted() -> (FeatureSet, Vec<f64>) {
    let east = || Walk::of(vec![Turn::new(1, 6)]);
    let west = || Walk::of(vec![Turn::new(2, 3)]);
    let west_west = || Walk::of(vec![Turn::new(2, 3), Turn::zero()]);
    let friendly = |w: Walk| (w, Element::Friendly);

    // x x + x — playing the gap makes four in a row.
    let win = Feature::new(
        None,
        Walk::empty(),
        vec![friendly(west_west()), friendly(west()), friendly(east())],
    )
    .expect("distinct walks");
    // x x + — playing extends two in a row to a losing three.
    let loss_end = Feature::new(
        None,
        Walk::empty(),
        vec![friendly(west_west()), friendly(west())],
    )
    .expect("distinct walks");
    // x + x — playing the middle gap makes a losing three.
    let loss_gap = Feature::new(
        None,
        Walk::empty(),
        vec![friendly(west()), friendly(east())],
    )
    .expect("distinct walks");

    let set: FeatureSet = [win, loss_end, loss_gap].into_iter().collect();
    (set, vec![3000.0, -1000.0, -1000.0])
}
