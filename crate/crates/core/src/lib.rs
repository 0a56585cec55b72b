//! Feature-biased Monte Carlo tree search for small board games.
//!
//! The crate learns local-pattern features and linear policy weights from
//! self-play, uses them to bias MCTS selection and play-outs, and evaluates
//! the biased player against plain UCT.

pub mod board;
pub mod dsl;
pub mod evaluation;
pub mod features;
pub mod fixtures;
pub mod game;
pub mod policy;
pub mod search;
pub mod seeds;
pub mod training;

pub use board::{BoardError, BoardGraph, BoardKind, ResolvedPosition, Turn, VertexId, Walk};
pub use dsl::{builtin_games, parse_game, GameRules};
pub use features::{
    combine_instances, compile, generate_atomic_features, parse_feature_set,
    serialize_feature_set, CompiledFeatureSet, Element, Feature, FeatureInstance, FeatureSet,
};
pub use evaluation::{
    curve_csv, learning_curve, match_csv, measure_slowdown, play_match, slowdown_csv,
    wilson_interval, AgentSpec, CurveRow, EvalError, MatchConfig, MatchResult, SlowdownReport,
};
pub use game::{Game, GameError, GameState, Move, Player, Status};
pub use policy::{softmax, ActionDistribution, LinearPolicy, PolicySample};
pub use search::{
    biased_search, expert_distribution, final_move, greedy_move, run_search, uct_search,
    FinalMoveMode, SearchBudget, SearchMode, SearchTree,
};
pub use training::{
    discover_feature, pearson, prune, run_self_play, Discovery, DiscoveryStrategy,
    ExperienceBuffer, ExperienceTuple, TrainConfig, TrainingArtifacts,
};
