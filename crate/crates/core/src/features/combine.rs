//! Merging two co-active feature instances into one feature.
//!
//! The merged feature lives in the first instance's frame: its pattern is
//! kept verbatim and each of the second instance's resolved tests is
//! re-expressed as a walk that, instantiated at the first instance's
//! grounding, resolves to the same position.

use crate::board::{BoardGraph, ResolvedPosition, Turn, VertexId, Walk};
use crate::features::{Feature, FeatureInstance, FeatureSet};

/// Combines the patterns of two instances that were active together for the
/// same state-action pair. Returns `None` when two requirements conflict at
/// one walk (the pair is incompatible, not an error).
pub fn combine_instances(
    features: &FeatureSet,
    board: &BoardGraph,
    i: &FeatureInstance,
    j: &FeatureInstance,
) -> Option<Feature> {
    debug_assert_eq!(
        (i.action_from, i.action_to),
        (j.action_from, j.action_to),
        "constituents must share a resolved action"
    );
    let fi = features.get(i.feature);
    let fj = features.get(j.feature);

    let mut pattern = fi.pattern().to_vec();
    for (req_idx, &(pos, element)) in j.tests.iter().enumerate() {
        let j_walk = &fj.pattern()[req_idx].0;
        // Same-anchor pairs (every pair whose action walks have at most one
        // step, which covers the shipped games) replay `j`'s own walk shape.
        // Re-encoding through a shortest walk would change the tested cells
        // at rotations that are not lattice isometries, breaking the rule
        // that a combined feature is active only where both constituents
        // are.
        let walk = if i.anchor == j.anchor {
            translate_replayed(board, i, j, j_walk)?
        } else {
            match pos {
                ResolvedPosition::At(v) => translate_position(board, i, v)?,
                ResolvedPosition::OffBoard => translate_replayed(board, i, j, j_walk)?,
            }
        };
        pattern.push((walk, element));
    }
    Feature::new(fi.action_from().cloned(), fi.action_to().clone(), pattern)
}

fn apply_reflection(t: Turn, reflect: bool) -> Turn {
    if reflect {
        t.negate()
    } else {
        t
    }
}

/// Re-expresses a rotation-0 walk so that resolving it under `(rotation,
/// reflect)` follows the original path: the first turn absorbs the rotation
/// offset and every turn is pre-negated when the grounding reflects.
fn reframe(walk: Walk, rotation: Turn, reflect: bool) -> Walk {
    let turns = walk
        .turns()
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let adjusted = if k == 0 { t - rotation } else { t };
            apply_reflection(adjusted, reflect)
        })
        .collect();
    Walk(turns)
}

/// Geodesic walk from `i`'s anchor to an on-board position, expressed in
/// `i`'s frame. Used for cross-anchor pairs, where no shared frame exists to
/// replay shapes in.
fn translate_position(board: &BoardGraph, i: &FeatureInstance, target: VertexId) -> Option<Walk> {
    let base = board.canonical_walk(i.anchor, target).ok()?;
    Some(reframe(base, i.rotation, i.reflect))
}

/// Walks to `j`'s anchor (empty bridge for same-anchor pairs) and then
/// replays `j`'s original test walk shape, with the first replayed turn
/// adjusted from the arrival direction into `j`'s frame.
fn translate_replayed(
    board: &BoardGraph,
    i: &FeatureInstance,
    j: &FeatureInstance,
    j_walk: &Walk,
) -> Option<Walk> {
    let (bridge, arrival_dir) = board.canonical_walk_with_dir(i.anchor, j.anchor).ok()?;
    let arrival = if bridge.is_empty() {
        i.rotation
    } else {
        Turn::new(arrival_dir, board.slot_count(j.anchor) as i64)
    };
    let mut turns = reframe(bridge, i.rotation, i.reflect).0;
    if let Some((&first_turn, rest)) = j_walk.turns().split_first() {
        let first = apply_reflection(first_turn, j.reflect) + j.rotation - arrival;
        turns.push(apply_reflection(first, i.reflect));
        for &t in rest {
            turns.push(apply_reflection(apply_reflection(t, j.reflect), i.reflect));
        }
    }
    Some(Walk(turns))
}
