//! Local-pattern features: a pattern of element requirements at walk-relative
//! positions plus a recommended action, instantiated over a board at every
//! anchor, rotation and reflection.

mod combine;
mod compile;
mod io;

pub use combine::combine_instances;
pub use compile::{compile, CompiledFeatureSet, FeatureInstance};
pub use io::{parse_feature_set, serialize_feature_set, FeatParseError};

use crate::board::{BoardGraph, Turn, Walk};
use crate::game::Game;

/// What a pattern position must hold. `Friendly`/`Enemy` are relative to the
/// mover; `OwnedBy`/`ItemIndex` are absolute and unused by the shipped games.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    OffBoard,
    Empty,
    Friendly,
    Enemy,
    OwnedBy(u8),
    ItemIndex(u8),
}

/// A relative pattern plus the action it recommends. Requirements are kept
/// sorted so structurally equal features compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feature {
    action_from: Option<Walk>,
    action_to: Walk,
    pattern: Vec<(Walk, Element)>,
}

impl Feature {
    /// Builds a feature with a normalized (sorted, deduplicated) pattern.
    /// Returns `None` when two requirements put conflicting elements on the
    /// same walk.
    pub fn new(
        action_from: Option<Walk>,
        action_to: Walk,
        mut pattern: Vec<(Walk, Element)>,
    ) -> Option<Feature> {
        pattern.sort();
        pattern.dedup();
        for pair in pattern.windows(2) {
            if pair[0].0 == pair[1].0 {
                return None;
            }
        }
        Some(Feature { action_from, action_to, pattern })
    }

    /// Feature with no requirements that recommends playing at its anchor;
    /// active for every legal placement.
    pub fn always_active() -> Feature {
        Feature { action_from: None, action_to: Walk::empty(), pattern: Vec::new() }
    }

    pub fn action_from(&self) -> Option<&Walk> {
        self.action_from.as_ref()
    }

    pub fn action_to(&self) -> &Walk {
        &self.action_to
    }

    pub fn pattern(&self) -> &[(Walk, Element)] {
        &self.pattern
    }

    /// True when `other`'s requirements are a subset of this feature's and
    /// the action walks agree.
    pub fn refines(&self, other: &Feature) -> bool {
        self.action_from == other.action_from
            && self.action_to == other.action_to
            && other.pattern.iter().all(|req| self.pattern.contains(req))
    }
}

/// Ordered, duplicate-free collection of features. Indices are stable:
/// features are only ever appended or pruned, never reordered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureSet {
    features: Vec<Feature>,
}

impl FeatureSet {
    pub fn new() -> FeatureSet {
        FeatureSet::default()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn get(&self, id: u32) -> &Feature {
        &self.features[id as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter()
    }

    pub fn contains(&self, f: &Feature) -> bool {
        self.features.contains(f)
    }

    /// Appends `f` unless a structurally equal feature is already present.
    /// Returns the new feature's index, or `None` on a duplicate.
    pub fn push_unique(&mut self, f: Feature) -> Option<u32> {
        if self.contains(&f) {
            None
        } else {
            self.features.push(f);
            Some(self.features.len() as u32 - 1)
        }
    }
}

impl FromIterator<Feature> for FeatureSet {
    fn from_iter<T: IntoIterator<Item = Feature>>(iter: T) -> Self {
        let mut fs = FeatureSet::new();
        for f in iter {
            fs.push_unique(f);
        }
        fs
    }
}

/// Atomic features for a game: each move-rule proto-feature extended with a
/// single extra element requirement, over all walks of at most two steps
/// (first turn fixed to 0, second ranging over slot-aligned fractions).
pub fn generate_atomic_features(game: &Game) -> FeatureSet {
    let board: &BoardGraph = game.board();
    let k = board.max_slot_count() as i64;

    let mut walks = vec![Walk::empty(), Walk::of(vec![Turn::zero()])];
    for j in 0..k {
        walks.push(Walk::of(vec![Turn::zero(), Turn::new(j, k)]));
    }
    let elements = [Element::Empty, Element::Friendly, Element::Enemy, Element::OffBoard];

    let mut set = FeatureSet::new();
    let protos = game.proto_features();
    for proto in &protos {
        set.push_unique(proto.clone());
    }
    for proto in &protos {
        for walk in &walks {
            for element in elements {
                let mut pattern = proto.pattern.clone();
                pattern.push((walk.clone(), element));
                if let Some(f) =
                    Feature::new(proto.action_from.clone(), proto.action_to.clone(), pattern)
                {
                    set.push_unique(f);
                }
            }
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{builtin_games, parse_game};

    fn game(name: &str) -> Game {
        let src = builtin_games().iter().find(|(n, _)| *n == name).unwrap().1;
        Game::new(parse_game(src).unwrap()).unwrap()
    }

    #[test]
    fn feature_normalization_sorts_and_rejects_conflicts() {
        let w0 = Walk::of(vec![Turn::zero()]);
        let f = Feature::new(
            None,
            Walk::empty(),
            vec![(w0.clone(), Element::Enemy), (Walk::empty(), Element::Empty)],
        )
        .unwrap();
        assert_eq!(f.pattern()[0].0, Walk::empty());
        assert_eq!(f.pattern()[1].0, w0.clone());

        let conflict = Feature::new(
            None,
            Walk::empty(),
            vec![(w0.clone(), Element::Enemy), (w0.clone(), Element::Friendly)],
        );
        assert!(conflict.is_none());

        // Same walk and element is a harmless duplicate, not a conflict.
        let dup = Feature::new(None, Walk::empty(), vec![(w0.clone(), Element::Enemy), (w0, Element::Enemy)])
            .unwrap();
        assert_eq!(dup.pattern().len(), 1);
    }

    #[test]
    fn tictactoe_atomic_count() {
        // k = 8: walks {}, {0}, {0,j/8} for 10 walks total; 4 elements each,
        // minus the four at {} that conflict with or duplicate the proto's
        // empty-anchor requirement, plus the proto itself.
        let g = game("tictactoe");
        let set = generate_atomic_features(&g);
        assert_eq!(set.len(), 37);
    }

    #[test]
    fn enemy_one_step_kept_friendly_at_anchor_dropped() {
        let g = game("tictactoe");
        let set = generate_atomic_features(&g);
        let anchor_empty = (Walk::empty(), Element::Empty);
        let enemy_ahead = Feature::new(
            None,
            Walk::empty(),
            vec![anchor_empty.clone(), (Walk::of(vec![Turn::zero()]), Element::Enemy)],
        )
        .unwrap();
        assert!(set.contains(&enemy_ahead));
        // A friendly piece on the anchor conflicts with playing there.
        assert!(!set
            .iter()
            .any(|f| f.pattern().contains(&(Walk::empty(), Element::Friendly))));
    }

    #[test]
    fn yavalath_atomic_count_uses_six_slots() {
        // k = 6: 8 walks, 4 elements, minus 4 at {}, plus the proto.
        let g = game("yavalath");
        let set = generate_atomic_features(&g);
        assert_eq!(set.len(), 8 * 4 - 4 + 1);
    }

    #[test]
    fn atomic_features_refine_a_proto() {
        for name in ["tictactoe", "breakthrough6", "yavalath"] {
            let g = game(name);
            let protos = g.proto_features();
            let set = generate_atomic_features(&g);
            for f in set.iter() {
                assert!(
                    protos.iter().any(|p| f.refines(p)),
                    "{name}: feature without proto root"
                );
            }
        }
    }
}
