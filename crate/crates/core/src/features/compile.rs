//! Grounding features over a board: every (anchor, rotation, reflection)
//! instantiation with resolved positions, indexed by action for fast
//! activity queries.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::board::{BoardGraph, ResolvedPosition, Turn, VertexId, Walk};
use crate::features::{Element, FeatureSet};
use crate::game::{GameState, Move, Player};

/// One grounding of a feature: anchor, rotation and reflection, with the
/// action and every pattern requirement resolved to board positions.
/// `tests` parallels the feature's pattern order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureInstance {
    pub feature: u32,
    pub anchor: VertexId,
    pub rotation: Turn,
    pub reflect: bool,
    pub action_from: Option<VertexId>,
    pub action_to: VertexId,
    pub tests: Vec<(ResolvedPosition, Element)>,
}

/// A feature set compiled against one board. Immutable once built; queries
/// are pure and safe to share across searches.
#[derive(Debug, Clone)]
pub struct CompiledFeatureSet {
    features: FeatureSet,
    board: Arc<BoardGraph>,
    instances: Vec<FeatureInstance>,
    index: HashMap<(Option<VertexId>, VertexId), Vec<u32>>,
}

/// Enumerates all groundings whose action lands on-board, deduplicates
/// instances with identical resolved content, and indexes them by action.
///
/// Walks whose raw offsets are fractional resolve to position sets; each
/// combination of branch choices becomes its own instance.
/// Dedup key: feature id, resolved action, sorted resolved tests.
type InstanceKey = (u32, Option<VertexId>, VertexId, Vec<(ResolvedPosition, Element)>);

pub fn compile(features: &FeatureSet, board: &Arc<BoardGraph>) -> CompiledFeatureSet {
    let max = board.max_slot_count() as i64;
    let mut instances: Vec<FeatureInstance> = Vec::new();
    let mut seen: HashSet<InstanceKey> = HashSet::new();
    let mut index: HashMap<(Option<VertexId>, VertexId), Vec<u32>> = HashMap::new();

    for (fid, feature) in features.iter().enumerate() {
        for anchor in board.vertices() {
            for rot in 0..max {
                let rotation = Turn::new(rot, max);
                for reflect in [false, true] {
                    let resolve = |w: &Walk| -> Vec<ResolvedPosition> {
                        board
                            .resolve_walk(anchor, rotation, reflect, w)
                            .expect("grounding rotation is slot-aligned")
                            .into_iter()
                            .collect()
                    };
                    // Action positions: off-board landings can never match a
                    // real move, so those branches are dropped here.
                    let to_positions: Vec<VertexId> =
                        resolve(feature.action_to()).into_iter().filter_map(|p| p.vertex()).collect();
                    if to_positions.is_empty() {
                        continue;
                    }
                    let from_positions: Vec<Option<VertexId>> = match feature.action_from() {
                        None => vec![None],
                        Some(w) => {
                            let vs: Vec<Option<VertexId>> = resolve(w)
                                .into_iter()
                                .filter_map(|p| p.vertex().map(Some))
                                .collect();
                            if vs.is_empty() {
                                continue;
                            }
                            vs
                        }
                    };
                    let test_positions: Vec<Vec<ResolvedPosition>> =
                        feature.pattern().iter().map(|(w, _)| resolve(w)).collect();

                    let mut combos: Vec<Vec<(ResolvedPosition, Element)>> = vec![Vec::new()];
                    for (branches, (_, element)) in
                        test_positions.iter().zip(feature.pattern().iter())
                    {
                        let mut grown = Vec::with_capacity(combos.len() * branches.len());
                        for combo in &combos {
                            for &pos in branches {
                                let mut c = combo.clone();
                                c.push((pos, *element));
                                grown.push(c);
                            }
                        }
                        combos = grown;
                    }

                    for &action_from in &from_positions {
                        for &action_to in &to_positions {
                            for tests in &combos {
                                let mut key_tests = tests.clone();
                                key_tests.sort();
                                if !seen.insert((fid as u32, action_from, action_to, key_tests)) {
                                    continue;
                                }
                                let id = instances.len() as u32;
                                instances.push(FeatureInstance {
                                    feature: fid as u32,
                                    anchor,
                                    rotation,
                                    reflect,
                                    action_from,
                                    action_to,
                                    tests: tests.clone(),
                                });
                                index.entry((action_from, action_to)).or_default().push(id);
                            }
                        }
                    }
                }
            }
        }
    }

    CompiledFeatureSet { features: features.clone(), board: Arc::clone(board), instances, index }
}

/// One element test against a state, from the mover's perspective.
pub(crate) fn element_holds(
    s: &GameState,
    mover: Player,
    pos: ResolvedPosition,
    element: Element,
) -> bool {
    match pos {
        ResolvedPosition::OffBoard => element == Element::OffBoard,
        ResolvedPosition::At(v) => match element {
            Element::OffBoard => false,
            Element::Empty => s.is_empty(v),
            Element::Friendly => s.cell(v) == Some(mover),
            Element::Enemy => s.cell(v) == Some(mover.opponent()),
            Element::OwnedBy(n) => s.cell(v).is_some_and(|p| p.index() == n),
            // One piece type per player in the shipped games, so the item
            // index coincides with the owner index.
            Element::ItemIndex(n) => s.cell(v).is_some_and(|p| p.index() == n),
        },
    }
}

impl CompiledFeatureSet {
    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn board(&self) -> &Arc<BoardGraph> {
        &self.board
    }

    pub fn instances(&self) -> &[FeatureInstance] {
        &self.instances
    }

    pub fn instance(&self, id: u32) -> &FeatureInstance {
        &self.instances[id as usize]
    }

    /// Instances whose action matches `m` and whose every resolved test holds
    /// in `s`, evaluated from the mover's perspective. `m` must be legal.
    pub fn active_instances(&self, s: &GameState, m: &Move) -> Vec<u32> {
        let Some(candidates) = self.index.get(&(m.from, m.to)) else {
            return Vec::new();
        };
        candidates
            .iter()
            .copied()
            .filter(|&id| {
                self.instances[id as usize]
                    .tests
                    .iter()
                    .all(|&(pos, element)| element_holds(s, s.mover, pos, element))
            })
            .collect()
    }

    /// Sparse binary feature vector: ascending indices of features with at
    /// least one active instance. Simultaneous instantiations still yield a
    /// single 1 entry.
    pub fn active_features(&self, s: &GameState, m: &Move) -> Vec<u32> {
        let mut ids: Vec<u32> = self
            .active_instances(s, m)
            .into_iter()
            .map(|id| self.instances[id as usize].feature)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}
