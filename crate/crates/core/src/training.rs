//! Self-play training: the experience buffer, per-move SGD against expert
//! visit distributions, per-game feature discovery under four strategies,
//! and feature-set pruning.

use std::collections::{HashMap, VecDeque};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::features::{
    combine_instances, compile, serialize_feature_set, CompiledFeatureSet, Feature, FeatureSet,
};
use crate::game::{Game, GameState, Move};
use crate::policy::{LinearPolicy, PolicySample};
use crate::search::{
    biased_search, expert_distribution, final_move, FinalMoveMode, SearchBudget, SearchMode,
    SearchTree,
};
use crate::seeds::derive_seed;

/// One state visited in self-play with its legal moves and the expert
/// distribution the search produced for it.
#[derive(Debug, Clone)]
pub struct ExperienceTuple {
    pub state: GameState,
    pub moves: Vec<Move>,
    pub expert: Vec<f64>,
}

/// Bounded FIFO of experience; old tuples are dropped to make room.
#[derive(Debug, Clone)]
pub struct ExperienceBuffer {
    ring: VecDeque<ExperienceTuple>,
    capacity: usize,
}

impl ExperienceBuffer {
    pub fn new(capacity: usize) -> ExperienceBuffer {
        assert!(capacity >= 1);
        ExperienceBuffer { ring: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn push(&mut self, tuple: ExperienceTuple) {
        if self.ring.len() == self.capacity {
            self.ring.pop_front();
        }
        self.ring.push_back(tuple);
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn get(&self, idx: usize) -> &ExperienceTuple {
        &self.ring[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ExperienceTuple> {
        self.ring.iter()
    }

    /// Uniform sample without replacement; the whole buffer when it holds
    /// fewer than `n` tuples.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<&ExperienceTuple> {
        let amount = n.min(self.ring.len());
        rand::seq::index::sample(rng, self.ring.len(), amount)
            .into_iter()
            .map(|i| &self.ring[i])
            .collect()
    }
}

/// Sample Pearson correlation; 0 when either input has zero variance.
/// Single-pass co-moment accumulation.
pub fn pearson(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len(), "pearson inputs must have equal length");
    assert!(u.len() >= 2, "pearson needs at least two points");
    let mut mean_u = 0.0;
    let mut mean_v = 0.0;
    let mut m2u = 0.0;
    let mut m2v = 0.0;
    let mut co = 0.0;
    for (k, (&x, &y)) in u.iter().zip(v).enumerate() {
        let n = (k + 1) as f64;
        let dx = x - mean_u;
        mean_u += dx / n;
        let dy = y - mean_v;
        mean_v += dy / n;
        m2u += dx * (x - mean_u);
        m2v += dy * (y - mean_v);
        co += dx * (y - mean_v);
    }
    if m2u <= 0.0 || m2v <= 0.0 {
        return 0.0;
    }
    co / (m2u * m2v).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscoveryStrategy {
    /// Random co-active instance pair anywhere in the batch.
    AddRandom,
    /// Random co-active pair at the state-action pair with the largest
    /// absolute apprentice error.
    CombineRandom,
    /// At that same state-action pair, an instance of the feature with the
    /// greatest absolute weight paired with a random co-active partner.
    CombineMax,
    /// The pair maximizing |r_err| · (1 − |r_constituent|) over the batch.
    CorrelationBased,
}

/// A discovered feature with the ids of its two constituents.
#[derive(Debug, Clone)]
pub struct Discovery {
    pub feature: Feature,
    pub constituents: (u32, u32),
}

/// One state-action point of the discovery batch.
struct SaPoint {
    error: f64,
    instances: Vec<u32>,
}

fn batch_points(
    batch: &[&ExperienceTuple],
    policy: &LinearPolicy,
    cfs: &CompiledFeatureSet,
) -> Vec<SaPoint> {
    let mut points = Vec::new();
    for tuple in batch {
        let dist = policy.distribution(cfs, &tuple.state, &tuple.moves);
        for (idx, mv) in tuple.moves.iter().enumerate() {
            points.push(SaPoint {
                error: dist.probs[idx] - tuple.expert[idx],
                instances: cfs.active_instances(&tuple.state, mv),
            });
        }
    }
    points
}

/// Tries ordered instance pairs until one combines into a feature not yet in
/// the set. The first instance of a pair anchors the merge.
fn first_valid_pair(
    pairs: &[(usize, usize, usize)],
    points: &[SaPoint],
    cfs: &CompiledFeatureSet,
) -> Option<Discovery> {
    for &(p, a, b) in pairs {
        let ia = cfs.instance(points[p].instances[a]);
        let ib = cfs.instance(points[p].instances[b]);
        let Some(feature) = combine_instances(cfs.features(), cfs.board(), ia, ib) else {
            continue;
        };
        if cfs.features().contains(&feature) {
            continue;
        }
        return Some(Discovery { feature, constituents: (ia.feature, ib.feature) });
    }
    None
}

fn all_pairs_at(point_idx: usize, point: &SaPoint) -> Vec<(usize, usize, usize)> {
    let n = point.instances.len();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                pairs.push((point_idx, a, b));
            }
        }
    }
    pairs
}

/// Proposes one new feature from a batch of experience, or `None` when no
/// candidate pair survives (never co-active, incompatible, or already
/// present).
pub fn discover_feature(
    strategy: DiscoveryStrategy,
    batch: &[&ExperienceTuple],
    policy: &LinearPolicy,
    cfs: &CompiledFeatureSet,
    rng: &mut ChaCha8Rng,
) -> Option<Discovery> {
    assert!(!batch.is_empty(), "discovery needs a nonempty batch");
    let points = batch_points(batch, policy, cfs);

    match strategy {
        DiscoveryStrategy::AddRandom => {
            let mut pairs: Vec<(usize, usize, usize)> = points
                .iter()
                .enumerate()
                .flat_map(|(p, point)| all_pairs_at(p, point))
                .collect();
            pairs.shuffle(rng);
            first_valid_pair(&pairs, &points, cfs)
        }
        DiscoveryStrategy::CombineRandom | DiscoveryStrategy::CombineMax => {
            let worst = points
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| {
                    a.error
                        .abs()
                        .partial_cmp(&b.error.abs())
                        .expect("errors are finite")
                })
                .map(|(idx, _)| idx)?;
            let point = &points[worst];
            let mut pairs = match strategy {
                DiscoveryStrategy::CombineRandom => all_pairs_at(worst, point),
                _ => {
                    // Anchor on an instance of the active feature with the
                    // greatest absolute weight; ties take the lower id.
                    let heaviest = point
                        .instances
                        .iter()
                        .map(|&id| cfs.instance(id).feature)
                        .max_by(|&fa, &fb| {
                            let wa = policy.weights[fa as usize].abs();
                            let wb = policy.weights[fb as usize].abs();
                            wa.partial_cmp(&wb)
                                .expect("weights are finite")
                                .then(fb.cmp(&fa))
                        })?;
                    let mut pairs = Vec::new();
                    for (a, &ia) in point.instances.iter().enumerate() {
                        if cfs.instance(ia).feature != heaviest {
                            continue;
                        }
                        for b in 0..point.instances.len() {
                            if a != b {
                                pairs.push((worst, a, b));
                            }
                        }
                    }
                    pairs
                }
            };
            pairs.shuffle(rng);
            first_valid_pair(&pairs, &points, cfs)
        }
        DiscoveryStrategy::CorrelationBased => discover_by_correlation(&points, cfs),
    }
}

fn discover_by_correlation(points: &[SaPoint], cfs: &CompiledFeatureSet) -> Option<Discovery> {
    if points.len() < 2 {
        return None;
    }
    // Feature-level activity vectors over all state-action points.
    let mut activity: HashMap<u32, Vec<f64>> = HashMap::new();
    let mut feature_sets: Vec<Vec<u32>> = Vec::with_capacity(points.len());
    for (idx, point) in points.iter().enumerate() {
        let mut feats: Vec<u32> =
            point.instances.iter().map(|&id| cfs.instance(id).feature).collect();
        feats.sort_unstable();
        feats.dedup();
        for &f in &feats {
            activity.entry(f).or_insert_with(|| vec![0.0; points.len()])[idx] = 1.0;
        }
        feature_sets.push(feats);
    }
    let errors: Vec<f64> = points.iter().map(|p| p.error).collect();

    // Candidate feature pairs must have an instance-level co-activation
    // witness somewhere in the batch.
    let mut candidates: HashMap<(u32, u32), ()> = HashMap::new();
    for (idx, feats) in feature_sets.iter().enumerate() {
        for (i, &fa) in feats.iter().enumerate() {
            for &fb in &feats[i..] {
                if fa == fb {
                    let count = points[idx]
                        .instances
                        .iter()
                        .filter(|&&id| cfs.instance(id).feature == fa)
                        .count();
                    if count < 2 {
                        continue;
                    }
                }
                candidates.insert((fa, fb), ());
            }
        }
    }

    let mut scored: Vec<(f64, u32, u32)> = candidates
        .keys()
        .map(|&(fa, fb)| {
            let ua = &activity[&fa];
            let ub = &activity[&fb];
            let both: Vec<f64> = ua.iter().zip(ub).map(|(a, b)| a * b).collect();
            let r_err = pearson(&errors, &both);
            let r_const = pearson(&both, ua).abs().max(pearson(&both, ub).abs());
            let score = r_err.abs() * (1.0 - r_const);
            debug_assert!((0.0..=1.0 + 1e-12).contains(&score), "score {score} out of range");
            (score, fa, fb)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("scores are finite")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    for (_, fa, fb) in scored {
        // Witness: first point where both features have distinct co-active
        // instances; first such instances anchor the merge.
        for point in points {
            let a_pos = point
                .instances
                .iter()
                .position(|&id| cfs.instance(id).feature == fa);
            let Some(a_pos) = a_pos else { continue };
            let b_pos = point
                .instances
                .iter()
                .enumerate()
                .position(|(k, &id)| k != a_pos && cfs.instance(id).feature == fb);
            let Some(b_pos) = b_pos else { continue };
            let ia = cfs.instance(point.instances[a_pos]);
            let ib = cfs.instance(point.instances[b_pos]);
            let Some(feature) = combine_instances(cfs.features(), cfs.board(), ia, ib) else {
                break;
            };
            if cfs.features().contains(&feature) {
                break;
            }
            return Some(Discovery { feature, constituents: (fa, fb) });
        }
    }
    None
}

/// Keeps the `k` features with the greatest absolute weights (ties take the
/// lower index), preserving their original order. Smaller sets are returned
/// unchanged.
pub fn prune(features: &FeatureSet, weights: &[f64], k: usize) -> (FeatureSet, Vec<f64>) {
    assert_eq!(features.len(), weights.len());
    if features.len() <= k {
        return (features.clone(), weights.to_vec());
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        weights[b]
            .abs()
            .partial_cmp(&weights[a].abs())
            .expect("weights are finite")
            .then(a.cmp(&b))
    });
    let mut keep: Vec<usize> = order.into_iter().take(k).collect();
    keep.sort_unstable();
    let kept_features: FeatureSet = keep
        .iter()
        .map(|&i| features.iter().nth(i).expect("index in range").clone())
        .collect();
    let kept_weights: Vec<f64> = keep.iter().map(|&i| weights[i]).collect();
    (kept_features, kept_weights)
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub strategy: DiscoveryStrategy,
    pub step_size: f64,
    pub l2: f64,
    pub sgd_batch: usize,
    pub discovery_batch: usize,
    pub buffer_capacity: usize,
    pub exploration: f64,
    pub budget: SearchBudget,
    pub games: u32,
    pub seed: u64,
    /// Game counts after which a checkpoint is recorded; the final game is
    /// always included.
    pub checkpoints: Vec<u32>,
    /// Disables discovery (retraining with a frozen feature set).
    pub freeze: bool,
}

impl TrainConfig {
    pub fn new(games: u32, budget: SearchBudget, seed: u64) -> TrainConfig {
        TrainConfig {
            strategy: DiscoveryStrategy::CorrelationBased,
            step_size: 0.05,
            l2: 1e-6,
            sgd_batch: 20,
            discovery_batch: 30,
            buffer_capacity: 200,
            exploration: 2f64.sqrt(),
            budget,
            games,
            seed,
            checkpoints: vec![1, 25, 50, 100, 200],
            freeze: false,
        }
    }
}

/// Per-game training log row.
#[derive(Debug, Clone)]
pub struct GameLog {
    pub game: u32,
    pub buffer_size: usize,
    pub feature_count: usize,
    pub mean_batch_loss: f64,
    /// Mean cross-entropy of the apprentice against the stored expert
    /// distributions over the whole buffer, after this game's updates.
    pub buffer_cross_entropy: f64,
    pub discovered: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DiscoveryRecord {
    pub game: u32,
    pub feature_index: u32,
    pub constituents: (u32, u32),
}

#[derive(Debug, Clone)]
pub struct TrainingArtifacts {
    pub features: FeatureSet,
    pub weights: Vec<f64>,
    /// (games of self-play, serialized feature file) per checkpoint.
    pub checkpoints: Vec<(u32, String)>,
    pub log: Vec<GameLog>,
    pub discoveries: Vec<DiscoveryRecord>,
}

impl TrainingArtifacts {
    /// Training log as CSV.
    pub fn log_csv(&self) -> String {
        let mut out = String::from("game,bufferSize,featureCount,meanBatchLoss,discovered\n");
        for row in &self.log {
            let discovered = row.discovered.as_deref().unwrap_or("");
            out.push_str(&format!(
                "{},{},{},{},\"{}\"\n",
                row.game, row.buffer_size, row.feature_count, row.mean_batch_loss, discovered
            ));
        }
        out
    }
}

fn describe_feature(f: &Feature) -> String {
    let text = serialize_feature_set(&[f.clone()].into_iter().collect(), &[0.0]);
    // Drop the weight field and trailing newline of the single line.
    text.trim_end()
        .split_once('\t')
        .map(|(_, rest)| rest.to_string())
        .unwrap_or_default()
}

/// Runs expert-iteration self-play: both seats search with the biased MCTS,
/// every move stores one experience tuple and applies one SGD update, final
/// moves are sampled from the expert distribution, and each game ends with
/// one feature-discovery attempt (unless frozen).
pub fn run_self_play(
    game: &Game,
    initial: Option<(FeatureSet, Vec<f64>)>,
    config: &TrainConfig,
) -> TrainingArtifacts {
    let (mut features, initial_weights) = match initial {
        Some((f, w)) => {
            assert_eq!(f.len(), w.len(), "initial weights must align with features");
            (f, w)
        }
        None => {
            let f = crate::features::generate_atomic_features(game);
            let w = vec![0.0; f.len()];
            (f, w)
        }
    };
    let mut cfs = compile(&features, &game.board_handle());
    let mut policy = LinearPolicy::with_weights(initial_weights, config.step_size, config.l2);
    let mut buffer = ExperienceBuffer::new(config.buffer_capacity);

    let mut artifacts = TrainingArtifacts {
        features: features.clone(),
        weights: policy.weights.clone(),
        checkpoints: Vec::new(),
        log: Vec::new(),
        discoveries: Vec::new(),
    };

    for g in 1..=config.games {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "train-game", g as u64));
        let mut state = game.initial_state();
        let mut trees: [Option<SearchTree>; 2] = [None, None];
        let mut pending: [Vec<Move>; 2] = [Vec::new(), Vec::new()];
        let mut batch_losses = Vec::new();

        while state.is_ongoing() {
            let seat = (state.mover.index() - 1) as usize;
            let mode = SearchMode::Biased {
                exploration: config.exploration,
                policy: &policy,
                features: &cfs,
            };
            let mut tree = match trees[seat].take() {
                Some(t) => t.advance(game, &pending[seat], &mode),
                None => SearchTree::new(game, state.clone(), &mode),
            };
            pending[seat].clear();

            let counts = biased_search(
                &mut tree,
                game,
                config.budget,
                config.exploration,
                &policy,
                &cfs,
                &mut rng,
            );
            let expert = expert_distribution(&counts);
            let moves: Vec<Move> = counts.iter().map(|&(m, _)| m).collect();
            buffer.push(ExperienceTuple { state: state.clone(), moves, expert });

            let batch: Vec<PolicySample> = buffer
                .sample(config.sgd_batch, &mut rng)
                .into_iter()
                .map(|t| PolicySample {
                    move_features: t
                        .moves
                        .iter()
                        .map(|m| cfs.active_features(&t.state, m))
                        .collect(),
                    target: t.expert.clone(),
                })
                .collect();
            let loss =
                batch.iter().map(|s| policy.loss(s)).sum::<f64>() / batch.len() as f64;
            batch_losses.push(loss);
            policy.sgd_update(&batch);

            let mv = final_move(&counts, FinalMoveMode::SampleVisits, &mut rng);
            pending[0].push(mv);
            pending[1].push(mv);
            trees[seat] = Some(tree);
            state = game.apply_move(&state, mv).expect("final move is legal");
        }

        let mut discovered = None;
        if !config.freeze {
            let batch = buffer.sample(config.discovery_batch, &mut rng);
            if let Some(found) = discover_feature(config.strategy, &batch, &policy, &cfs, &mut rng)
            {
                if let Some(idx) = features.push_unique(found.feature.clone()) {
                    policy.append_feature();
                    cfs = compile(&features, &game.board_handle());
                    discovered = Some(describe_feature(&found.feature));
                    artifacts.discoveries.push(DiscoveryRecord {
                        game: g,
                        feature_index: idx,
                        constituents: found.constituents,
                    });
                }
            }
        }

        let buffer_ce = buffer
            .iter()
            .map(|t| {
                let dist = policy.distribution(&cfs, &t.state, &t.moves);
                -t.expert
                    .iter()
                    .zip(&dist.probs)
                    .map(|(pi, pr)| pi * pr.ln())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / buffer.len() as f64;

        artifacts.log.push(GameLog {
            game: g,
            buffer_size: buffer.len(),
            feature_count: features.len(),
            mean_batch_loss: batch_losses.iter().sum::<f64>() / batch_losses.len().max(1) as f64,
            buffer_cross_entropy: buffer_ce,
            discovered,
        });

        if config.checkpoints.contains(&g) || g == config.games {
            artifacts
                .checkpoints
                .push((g, serialize_feature_set(&features, &policy.weights)));
        }
    }

    artifacts.features = features;
    artifacts.weights = policy.weights;
    artifacts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{builtin_games, parse_game};
    use crate::features::generate_atomic_features;

    fn game(name: &str) -> Game {
        let src = builtin_games().iter().find(|(n, _)| *n == name).unwrap().1;
        Game::new(parse_game(src).unwrap()).unwrap()
    }

    fn small_config(games: u32, seed: u64) -> TrainConfig {
        let mut c = TrainConfig::new(games, SearchBudget::Iterations(24), seed);
        c.strategy = DiscoveryStrategy::CorrelationBased;
        c
    }

    #[test]
    fn defaults_match_protocol() {
        let c = TrainConfig::new(10, SearchBudget::Iterations(100), 0);
        assert_eq!(c.step_size, 0.05);
        assert_eq!(c.l2, 1e-6);
        assert_eq!(c.sgd_batch, 20);
        assert_eq!(c.discovery_batch, 30);
        assert_eq!(c.buffer_capacity, 200);
        assert_eq!(c.checkpoints, vec![1, 25, 50, 100, 200]);
    }

    #[test]
    fn buffer_is_fifo_with_capacity() {
        let g = game("tictactoe");
        let s = g.initial_state();
        let moves = g.legal_moves(&s);
        let tuple = |tag: u32| ExperienceTuple {
            state: s.clone(),
            moves: moves.clone(),
            expert: {
                let mut e = vec![0.0; moves.len()];
                e[tag as usize % moves.len()] = 1.0;
                e
            },
        };
        let mut buf = ExperienceBuffer::new(200);
        for i in 0..201 {
            buf.push(tuple(i));
        }
        assert_eq!(buf.len(), 200);
        // The first tuple (peak at index 0) is gone; the oldest is tag 1.
        assert_eq!(buf.get(0).expert[1], 1.0);
    }

    #[test]
    fn pearson_reference_values() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-12);
        assert!(pearson(&[1.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 1.0, 0.0]).abs() < 1e-12);
        let r = pearson(&[1.0, 1.0, 0.0, 0.0], &[1.0, 1.0, 1.0, 0.0]);
        assert!((r - 2.0 / 12f64.sqrt()).abs() < 1e-12);
        // Zero variance on either side gives 0.
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), 0.0);
    }

    #[test]
    fn one_game_fills_buffer_with_one_tuple_per_move() {
        let g = game("tictactoe");
        let art = run_self_play(&g, None, &small_config(1, 3));
        let row = &art.log[0];
        assert!(row.buffer_size <= 9);
        assert!(row.buffer_size >= 5);
    }

    #[test]
    fn feature_count_grows_by_at_most_one_per_game() {
        let g = game("tictactoe");
        let initial = generate_atomic_features(&g).len();
        let art = run_self_play(&g, None, &small_config(5, 7));
        let mut prev = initial;
        for row in &art.log {
            assert!(row.feature_count == prev || row.feature_count == prev + 1);
            prev = row.feature_count;
        }
        assert_eq!(
            art.features.len(),
            initial + art.discoveries.len(),
            "one append per successful discovery"
        );
    }

    #[test]
    fn training_is_bit_reproducible() {
        let g = game("tictactoe");
        let a = run_self_play(&g, None, &small_config(3, 11));
        let b = run_self_play(&g, None, &small_config(3, 11));
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.checkpoints, b.checkpoints);
        assert_eq!(serialize_feature_set(&a.features, &a.weights),
                   serialize_feature_set(&b.features, &b.weights));
    }

    #[test]
    fn discovered_features_are_coactive_refinements() {
        let g = game("tictactoe");
        let art = run_self_play(&g, None, &small_config(6, 19));
        for d in &art.discoveries {
            let merged = art.features.iter().nth(d.feature_index as usize).unwrap();
            let a = art.features.iter().nth(d.constituents.0 as usize).unwrap();
            // The merged pattern contains the anchor constituent's pattern
            // verbatim and shares its action.
            assert!(merged.refines(a), "merged feature must refine its anchor");
        }
    }

    #[test]
    fn frozen_runs_never_change_the_feature_set() {
        let g = game("tictactoe");
        let fs = generate_atomic_features(&g);
        let w = vec![0.0; fs.len()];
        let mut config = small_config(3, 23);
        config.freeze = true;
        let art = run_self_play(&g, Some((fs.clone(), w)), &config);
        assert_eq!(art.features.len(), fs.len());
        assert!(art.discoveries.is_empty());
    }

    #[test]
    fn prune_keeps_top_weights_in_order() {
        let g = game("tictactoe");
        let fs = generate_atomic_features(&g);
        let n = fs.len();
        let weights: Vec<f64> = (0..n).map(|i| (i as f64) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let (kept, kept_w) = prune(&fs, &weights, 15);
        assert_eq!(kept.len(), 15);
        let min_kept = kept_w.iter().map(|w| w.abs()).fold(f64::INFINITY, f64::min);
        let dropped_max = weights[..n - 15].iter().map(|w| w.abs()).fold(0.0, f64::max);
        assert!(min_kept >= dropped_max);
        // Original order preserved: strictly increasing |w| here.
        for pair in kept_w.windows(2) {
            assert!(pair[0].abs() < pair[1].abs());
        }

        // k >= len is the identity.
        let (all, all_w) = prune(&fs, &weights, n + 5);
        assert_eq!(all.len(), n);
        assert_eq!(all_w, weights);

        // Signs are ignored and original order is preserved: weights
        // (3, -5, 1) at k = 2 keep the first two features as stored.
        let three: FeatureSet = fs.iter().take(3).cloned().collect();
        let (kept, kept_w) = prune(&three, &[3.0, -5.0, 1.0], 2);
        assert_eq!(kept_w, vec![3.0, -5.0]);
        assert_eq!(kept.iter().next(), fs.iter().next());
        assert_eq!(kept.iter().nth(1), fs.iter().nth(1));

        // Ties break toward the lower index.
        let tied: FeatureSet = fs.iter().take(3).cloned().collect();
        let (kept, kept_w) = prune(&tied, &[2.0, -2.0, 1.0], 2);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept_w, vec![2.0, -2.0]);
    }

    #[test]
    fn correlation_score_suppresses_redundant_pairs() {
        // A pair whose co-activity equals one constituent's activity has
        // |r_constituent| = 1, so its score is 0.
        let both = [1.0, 1.0, 0.0, 0.0];
        let same = pearson(&both, &both).abs();
        assert!((same - 1.0).abs() < 1e-12);
        let err = [0.4, -0.2, 0.1, 0.3];
        let score = pearson(&err, &both).abs() * (1.0 - same);
        assert!(score.abs() < 1e-12);
    }
}
