//! Monte Carlo tree search: UCB1 selection (plain UCT) and prior-weighted
//! PUCT selection biased by the linear policy, apprentice-guided play-out
//! first moves, tree reuse across plies, final-move selection, and the
//! greedy no-search player.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::features::CompiledFeatureSet;
use crate::game::{Game, GameState, Move, Player, Status};
use crate::policy::LinearPolicy;

/// Search effort: a fixed iteration count (deterministic) or a wall-clock
/// budget (used only for slowdown measurements).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchBudget {
    Iterations(u32),
    WallClock(Duration),
}

/// Selection and play-out flavour of a search.
#[derive(Clone, Copy)]
pub enum SearchMode<'a> {
    /// UCB1 selection, uniform-random play-outs.
    Uct { exploration: f64 },
    /// PUCT selection with apprentice priors; the first play-out move is
    /// sampled from the apprentice and its node joins the tree.
    Biased { exploration: f64, policy: &'a LinearPolicy, features: &'a CompiledFeatureSet },
}

#[derive(Debug, Clone)]
struct Edge {
    mv: Move,
    child: Option<usize>,
    visits: u64,
    value_sum: f64,
    prior: f64,
}

#[derive(Debug, Clone)]
struct Node {
    state: GameState,
    edges: Vec<Edge>,
    /// Iterations that selected an edge at this node.
    visit_sum: u64,
}

/// A search tree owned by one agent. Reusable across plies via
/// [`advance`](SearchTree::advance).
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<Node>,
    root: usize,
}

fn make_node(game: &Game, state: GameState, mode: &SearchMode) -> Node {
    let edges = if state.is_ongoing() {
        let moves = game.legal_moves(&state);
        let priors = match mode {
            SearchMode::Uct { .. } => vec![1.0 / moves.len() as f64; moves.len()],
            SearchMode::Biased { policy, features, .. } => {
                policy.distribution(features, &state, &moves).probs
            }
        };
        moves
            .into_iter()
            .zip(priors)
            .map(|(mv, prior)| Edge { mv, child: None, visits: 0, value_sum: 0.0, prior })
            .collect()
    } else {
        Vec::new()
    };
    Node { state, edges, visit_sum: 0 }
}

/// UCB1 choice over (visits, value_sum) edge statistics. Unvisited edges are
/// taken first, in move order.
pub fn ucb1_choose(stats: &[(u64, f64)], total: u64, exploration: f64) -> usize {
    if let Some(idx) = stats.iter().position(|&(n, _)| n == 0) {
        return idx;
    }
    let log_total = (total.max(1) as f64).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (idx, &(n, w)) in stats.iter().enumerate() {
        let score = w / n as f64 + exploration * (log_total / n as f64).sqrt();
        if score > best_score {
            best_score = score;
            best = idx;
        }
    }
    best
}

/// PUCT choice over (visits, value_sum, prior) edge statistics. An unvisited
/// edge contributes an estimated value of 0, so priors drive early selection;
/// ties keep the first edge in move order.
pub fn puct_choose(stats: &[(u64, f64, f64)], total: u64, exploration: f64) -> usize {
    let sqrt_total = (total as f64).sqrt();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (idx, &(n, w, prior)) in stats.iter().enumerate() {
        let q = if n > 0 { w / n as f64 } else { 0.0 };
        let score = q + exploration * prior * sqrt_total / (1.0 + n as f64);
        if score > best_score {
            best_score = score;
            best = idx;
        }
    }
    best
}

/// Score of a terminal status from `perspective`: win 1, tie 0.5, loss 0.
pub fn score_for(status: Status, perspective: Player) -> f64 {
    match status {
        Status::Win(p) if p == perspective => 1.0,
        Status::Win(_) => 0.0,
        Status::Tie => 0.5,
        Status::Ongoing => panic!("scoring a non-terminal status"),
    }
}

impl SearchTree {
    pub fn new(game: &Game, root_state: GameState, mode: &SearchMode) -> SearchTree {
        SearchTree { nodes: vec![make_node(game, root_state, mode)], root: 0 }
    }

    pub fn root_state(&self) -> &GameState {
        &self.nodes[self.root].state
    }

    /// Root visit counts in legal-move order.
    pub fn root_counts(&self) -> Vec<(Move, u64)> {
        self.nodes[self.root].edges.iter().map(|e| (e.mv, e.visits)).collect()
    }

    pub fn root_priors(&self) -> Vec<(Move, f64)> {
        self.nodes[self.root].edges.iter().map(|e| (e.mv, e.prior)).collect()
    }

    /// Moves the root down the played moves, keeping the matching subtree.
    /// A move without a materialized child yields a fresh root at the state
    /// reached by applying the remaining moves.
    pub fn advance(mut self, game: &Game, played: &[Move], mode: &SearchMode) -> SearchTree {
        let mut current = self.root;
        for (idx, mv) in played.iter().enumerate() {
            let child = self.nodes[current]
                .edges
                .iter()
                .find(|e| e.mv == *mv)
                .and_then(|e| e.child);
            match child {
                Some(c) => current = c,
                None => {
                    let mut state = self.nodes[current].state.clone();
                    for m in &played[idx..] {
                        state = game
                            .apply_move(&state, *m)
                            .expect("played moves must be legal from the old root");
                    }
                    return SearchTree::new(game, state, mode);
                }
            }
        }
        debug_assert_eq!(
            self.nodes[current]
                .edges
                .iter()
                .map(|e| e.mv)
                .collect::<Vec<_>>(),
            if self.nodes[current].state.is_ongoing() {
                game.legal_moves(&self.nodes[current].state)
            } else {
                Vec::new()
            },
            "reused root must agree with recomputed legal moves"
        );
        self.root = current;
        self
    }

    /// One MCTS iteration: select, expand, play out, backpropagate.
    fn iterate(&mut self, game: &Game, mode: &SearchMode, rng: &mut ChaCha8Rng) {
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut node_idx = self.root;

        let terminal_status = loop {
            if !self.nodes[node_idx].state.is_ongoing() {
                break self.nodes[node_idx].state.status;
            }
            let node = &self.nodes[node_idx];
            let edge_idx = match mode {
                SearchMode::Uct { exploration } => {
                    let stats: Vec<(u64, f64)> =
                        node.edges.iter().map(|e| (e.visits, e.value_sum)).collect();
                    ucb1_choose(&stats, node.visit_sum, *exploration)
                }
                SearchMode::Biased { exploration, .. } => {
                    let stats: Vec<(u64, f64, f64)> = node
                        .edges
                        .iter()
                        .map(|e| (e.visits, e.value_sum, e.prior))
                        .collect();
                    puct_choose(&stats, node.visit_sum, *exploration)
                }
            };
            path.push((node_idx, edge_idx));
            match self.nodes[node_idx].edges[edge_idx].child {
                Some(child) => node_idx = child,
                None => {
                    // Expand one node, then play out from it.
                    let state = game
                        .apply_move(&self.nodes[node_idx].state, self.nodes[node_idx].edges[edge_idx].mv)
                        .expect("tree edges hold legal moves");
                    let new_idx = self.nodes.len();
                    self.nodes.push(make_node(game, state, mode));
                    self.nodes[node_idx].edges[edge_idx].child = Some(new_idx);
                    break self.play_out(game, new_idx, mode, rng);
                }
            }
        };

        for (n, e) in path {
            let mover = self.nodes[n].state.mover;
            let edge = &mut self.nodes[n].edges[e];
            edge.visits += 1;
            edge.value_sum += score_for(terminal_status, mover);
            self.nodes[n].visit_sum += 1;
        }
    }

    /// Play-out from a freshly expanded node. In biased mode the first move
    /// is sampled from the apprentice distribution and its node is added to
    /// the tree (with statistics credited on this iteration); the remainder
    /// is uniform random.
    fn play_out(
        &mut self,
        game: &Game,
        from_idx: usize,
        mode: &SearchMode,
        rng: &mut ChaCha8Rng,
    ) -> Status {
        let mut state = match mode {
            SearchMode::Uct { .. } => self.nodes[from_idx].state.clone(),
            SearchMode::Biased { .. } => {
                if !self.nodes[from_idx].state.is_ongoing() {
                    return self.nodes[from_idx].state.status;
                }
                // Node priors are exactly the apprentice distribution.
                let edge_idx = sample_index(
                    &self.nodes[from_idx].edges.iter().map(|e| e.prior).collect::<Vec<_>>(),
                    rng,
                );
                let state = game
                    .apply_move(&self.nodes[from_idx].state, self.nodes[from_idx].edges[edge_idx].mv)
                    .expect("tree edges hold legal moves");
                let new_idx = self.nodes.len();
                self.nodes.push(make_node(game, state.clone(), mode));
                let mover = self.nodes[from_idx].state.mover;
                let edge = &mut self.nodes[from_idx].edges[edge_idx];
                edge.child = Some(new_idx);
                edge.visits += 1;
                self.nodes[from_idx].visit_sum += 1;
                // The edge value is settled once the play-out resolves.
                let status = self.finish_play_out(game, state, rng);
                self.nodes[from_idx].edges[edge_idx].value_sum += score_for(status, mover);
                return status;
            }
        };
        loop {
            if !state.is_ongoing() {
                return state.status;
            }
            let moves = game.legal_moves(&state);
            let mv = moves[rng.random_range(0..moves.len())];
            state = game.apply_move(&state, mv).expect("legal move");
        }
    }

    fn finish_play_out(&self, game: &Game, mut state: GameState, rng: &mut ChaCha8Rng) -> Status {
        loop {
            if !state.is_ongoing() {
                return state.status;
            }
            let moves = game.legal_moves(&state);
            let mv = moves[rng.random_range(0..moves.len())];
            state = game.apply_move(&state, mv).expect("legal move");
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_visit_sum(&self) -> u64 {
        self.nodes[self.root].visit_sum
    }
}

fn sample_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.random_range(0.0..1.0) * total;
    for (idx, w) in weights.iter().enumerate() {
        draw -= w;
        if draw <= 0.0 {
            return idx;
        }
    }
    weights.len() - 1
}

/// Runs the search for the given budget; returns completed iterations.
/// The root must be nonterminal.
pub fn run_search(
    tree: &mut SearchTree,
    game: &Game,
    mode: &SearchMode,
    budget: SearchBudget,
    rng: &mut ChaCha8Rng,
) -> u64 {
    assert!(tree.root_state().is_ongoing(), "search from a terminal root");
    match budget {
        SearchBudget::Iterations(n) => {
            assert!(n >= 1, "iteration budget must be at least 1");
            for _ in 0..n {
                tree.iterate(game, mode, rng);
            }
            n as u64
        }
        SearchBudget::WallClock(limit) => {
            let start = Instant::now();
            let mut done = 0;
            loop {
                tree.iterate(game, mode, rng);
                done += 1;
                if start.elapsed() >= limit {
                    return done;
                }
            }
        }
    }
}

/// Plain UCT search. Returns root visit counts in move order.
pub fn uct_search(
    tree: &mut SearchTree,
    game: &Game,
    budget: SearchBudget,
    exploration: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<(Move, u64)> {
    run_search(tree, game, &SearchMode::Uct { exploration }, budget, rng);
    tree.root_counts()
}

/// Feature-biased search: PUCT selection with apprentice priors and
/// apprentice-guided play-out first moves.
pub fn biased_search(
    tree: &mut SearchTree,
    game: &Game,
    budget: SearchBudget,
    exploration: f64,
    policy: &LinearPolicy,
    features: &CompiledFeatureSet,
    rng: &mut ChaCha8Rng,
) -> Vec<(Move, u64)> {
    run_search(
        tree,
        game,
        &SearchMode::Biased { exploration, policy, features },
        budget,
        rng,
    );
    tree.root_counts()
}

/// Normalized root visit counts, the expert distribution.
pub fn expert_distribution(counts: &[(Move, u64)]) -> Vec<f64> {
    let total: u64 = counts.iter().map(|&(_, n)| n).sum();
    assert!(total > 0, "expert distribution needs at least one visit");
    counts.iter().map(|&(_, n)| n as f64 / total as f64).collect()
}

/// How a searched move is turned into a played move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinalMoveMode {
    /// Sample from the expert distribution (self-play).
    SampleVisits,
    /// Maximum visit count, ties broken by move order (evaluation).
    ArgmaxVisits,
}

pub fn final_move(counts: &[(Move, u64)], mode: FinalMoveMode, rng: &mut ChaCha8Rng) -> Move {
    match mode {
        FinalMoveMode::ArgmaxVisits => {
            let mut best = 0;
            for (idx, &(_, n)) in counts.iter().enumerate() {
                if n > counts[best].1 {
                    best = idx;
                }
            }
            counts[best].0
        }
        FinalMoveMode::SampleVisits => {
            let pi = expert_distribution(counts);
            counts[sample_index(&pi, rng)].0
        }
    }
}

/// Highest-probability apprentice move without any search, deterministic
/// tie-break by move order.
pub fn greedy_move(
    policy: &LinearPolicy,
    features: &CompiledFeatureSet,
    game: &Game,
    s: &GameState,
) -> Move {
    let moves = game.legal_moves(s);
    let dist = policy.distribution(features, s, &moves);
    let mut best = 0;
    for (idx, &p) in dist.probs.iter().enumerate() {
        if p > dist.probs[best] {
            best = idx;
        }
    }
    dist.moves[best]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{builtin_games, parse_game};
    use crate::features::{compile, generate_atomic_features};
    use crate::fixtures::yavalath_handcrafted;
    use rand::SeedableRng;

    fn game(name: &str) -> Game {
        let src = builtin_games().iter().find(|(n, _)| *n == name).unwrap().1;
        Game::new(parse_game(src).unwrap()).unwrap()
    }

    #[test]
    fn single_iteration_expands_one_child() {
        let g = game("tictactoe");
        let mode = SearchMode::Uct { exploration: 2f64.sqrt() };
        let mut tree = SearchTree::new(&g, g.initial_state(), &mode);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let counts = uct_search(&mut tree, &g, SearchBudget::Iterations(1), 2f64.sqrt(), &mut rng);
        assert_eq!(counts.iter().map(|&(_, n)| n).sum::<u64>(), 1);
        assert_eq!(tree.node_count(), 2);
    }

    #[test]
    fn ucb1_prefers_underexplored_good_arm() {
        // Q = (0.5, 0.4), N = (10, 5), total 15, C = sqrt(2): the bonus makes
        // the second arm's score larger.
        let stats = [(10, 5.0), (5, 2.0)];
        assert_eq!(ucb1_choose(&stats, 15, 2f64.sqrt()), 1);
        // With tiny exploration the first arm's value dominates.
        assert_eq!(ucb1_choose(&stats, 15, 0.01), 0);
    }

    #[test]
    fn ucb1_takes_unvisited_first() {
        let stats = [(3, 3.0), (0, 0.0), (0, 0.0)];
        assert_eq!(ucb1_choose(&stats, 3, 2f64.sqrt()), 1);
    }

    #[test]
    fn puct_degenerate_root_picks_first() {
        let stats = [(0, 0.0, 0.25); 4];
        assert_eq!(puct_choose(&stats, 0, 2f64.sqrt()), 0);
    }

    #[test]
    fn puct_arithmetic_case() {
        // N = (1, 0), total 1, Q = (1, 0), p = (0.5, 0.5), C = sqrt(2):
        // scores (1 + sqrt2*0.5*1/2, sqrt2*0.5) = (1.354, 0.707).
        let stats = [(1, 1.0, 0.5), (0, 0.0, 0.5)];
        assert_eq!(puct_choose(&stats, 1, 2f64.sqrt()), 0);
    }

    #[test]
    fn puct_follows_concentrated_prior() {
        let stats = [(0, 0.0, 0.0), (0, 0.0, 1.0), (0, 0.0, 0.0)];
        assert_eq!(puct_choose(&stats, 5, 2f64.sqrt()), 1);
    }

    #[test]
    fn puct_argmax_invariant_under_prior_scaling() {
        // Scaling all priors by a positive constant and renormalizing leaves
        // the chosen move unchanged.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let k = rng.random_range(2..6);
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
            let z: f64 = raw.iter().sum();
            let stats: Vec<(u64, f64, f64)> = raw
                .iter()
                .map(|&p| {
                    let n = rng.random_range(0..20u64);
                    let w = n as f64 * rng.random_range(0.0..1.0);
                    (n, w, p / z)
                })
                .collect();
            let total: u64 = stats.iter().map(|s| s.0).sum();
            let scale = rng.random_range(0.1..10.0);
            let scaled_sum: f64 = stats.iter().map(|s| s.2 * scale).sum();
            let rescaled: Vec<(u64, f64, f64)> = stats
                .iter()
                .map(|&(n, w, p)| (n, w, p * scale / scaled_sum))
                .collect();
            assert_eq!(
                puct_choose(&stats, total, 2f64.sqrt()),
                puct_choose(&rescaled, total, 2f64.sqrt())
            );
        }
    }

    #[test]
    fn zero_weight_policy_gives_uniform_priors() {
        let g = game("tictactoe");
        let fs = generate_atomic_features(&g);
        let cfs = compile(&fs, &g.board_handle());
        let policy = LinearPolicy::zeros(fs.len(), 0.05, 1e-6);
        let mode = SearchMode::Biased { exploration: 2f64.sqrt(), policy: &policy, features: &cfs };
        let tree = SearchTree::new(&g, g.initial_state(), &mode);
        for (_, p) in tree.root_priors() {
            assert!((p - 1.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn handcrafted_priors_concentrate_on_winning_move() {
        let g = game("yavalath");
        let (fs, weights) = yavalath_handcrafted();
        let cfs = compile(&fs, &g.board_handle());
        let policy = LinearPolicy::with_weights(weights, 0.05, 1e-6);
        let at = |q: i32, r: i32| g.board().vertex_at((q, r)).unwrap();
        let mut contents = vec![None; g.board().vertex_count()];
        for q in [-2, -1, 1] {
            contents[at(q, 0).index()] = Some(crate::game::Player::P1);
        }
        for q in [-2, 0, 2] {
            contents[at(q, 2).index()] = Some(crate::game::Player::P2);
        }
        let s = g.state_from_cells(&contents, crate::game::Player::P1, 12).unwrap();
        let mode = SearchMode::Biased { exploration: 2f64.sqrt(), policy: &policy, features: &cfs };
        let tree = SearchTree::new(&g, s, &mode);
        let win = at(0, 0);
        let prior = tree
            .root_priors()
            .into_iter()
            .find(|(m, _)| m.to == win)
            .unwrap()
            .1;
        assert!(prior > 0.999, "prior on the winning move was {prior}");
    }

    #[test]
    fn visit_counts_sum_to_iteration_budget() {
        let g = game("tictactoe");
        let fs = generate_atomic_features(&g);
        let cfs = compile(&fs, &g.board_handle());
        let policy = LinearPolicy::zeros(fs.len(), 0.05, 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mode = SearchMode::Biased { exploration: 2f64.sqrt(), policy: &policy, features: &cfs };
        let mut tree = SearchTree::new(&g, g.initial_state(), &mode);
        let counts = biased_search(
            &mut tree,
            &g,
            SearchBudget::Iterations(257),
            2f64.sqrt(),
            &policy,
            &cfs,
            &mut rng,
        );
        assert_eq!(counts.iter().map(|&(_, n)| n).sum::<u64>(), 257);

        let mode = SearchMode::Uct { exploration: 2f64.sqrt() };
        let mut tree = SearchTree::new(&g, g.initial_state(), &mode);
        let counts = uct_search(&mut tree, &g, SearchBudget::Iterations(321), 2f64.sqrt(), &mut rng);
        assert_eq!(counts.iter().map(|&(_, n)| n).sum::<u64>(), 321);
    }

    #[test]
    fn search_is_deterministic_under_a_seed() {
        let g = game("tictactoe");
        let run = |seed: u64| -> Vec<(Move, u64)> {
            let mode = SearchMode::Uct { exploration: 2f64.sqrt() };
            let mut tree = SearchTree::new(&g, g.initial_state(), &mode);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            uct_search(&mut tree, &g, SearchBudget::Iterations(500), 2f64.sqrt(), &mut rng)
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn edge_values_stay_in_unit_interval() {
        let g = game("breakthrough6");
        let mode = SearchMode::Uct { exploration: 2f64.sqrt() };
        let mut tree = SearchTree::new(&g, g.initial_state(), &mode);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        uct_search(&mut tree, &g, SearchBudget::Iterations(400), 2f64.sqrt(), &mut rng);
        for node in &tree.nodes {
            for edge in &node.edges {
                if edge.visits > 0 {
                    let q = edge.value_sum / edge.visits as f64;
                    assert!((0.0..=1.0).contains(&q));
                }
            }
        }
    }

    #[test]
    fn expert_distribution_normalizes_counts() {
        let g = game("tictactoe");
        let v = |i| crate::board::VertexId(i);
        let counts = vec![(Move::place(v(0)), 3), (Move::place(v(1)), 1)];
        assert_eq!(expert_distribution(&counts), vec![0.75, 0.25]);
        let single = vec![(Move::place(v(0)), 7)];
        assert_eq!(expert_distribution(&single), vec![1.0]);
        let _ = g;
    }

    #[test]
    fn final_move_argmax_breaks_ties_by_order() {
        let v = |i| crate::board::VertexId(i);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let counts = vec![(Move::place(v(0)), 10), (Move::place(v(1)), 0)];
        assert_eq!(final_move(&counts, FinalMoveMode::ArgmaxVisits, &mut rng), Move::place(v(0)));
        let tied = vec![(Move::place(v(3)), 5), (Move::place(v(4)), 5)];
        assert_eq!(final_move(&tied, FinalMoveMode::ArgmaxVisits, &mut rng), Move::place(v(3)));
    }

    #[test]
    fn final_move_sampling_is_reproducible() {
        let v = |i| crate::board::VertexId(i);
        let counts: Vec<(Move, u64)> = (0..5).map(|i| (Move::place(v(i)), i as u64 + 1)).collect();
        let draw = |seed: u64| -> Vec<Move> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| final_move(&counts, FinalMoveMode::SampleVisits, &mut rng))
                .collect()
        };
        assert_eq!(draw(4), draw(4));
    }

    #[test]
    fn tree_reuse_keeps_grandchild_statistics() {
        let g = game("tictactoe");
        let mode = SearchMode::Uct { exploration: 2f64.sqrt() };
        let mut tree = SearchTree::new(&g, g.initial_state(), &mode);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let counts = uct_search(&mut tree, &g, SearchBudget::Iterations(600), 2f64.sqrt(), &mut rng);
        let first = final_move(&counts, FinalMoveMode::ArgmaxVisits, &mut rng);
        let root = tree.root;
        let child = tree.nodes[root].edges.iter().find(|e| e.mv == first).unwrap();
        let child_idx = child.child.unwrap();
        let reply = tree.nodes[child_idx].edges[0].mv;
        let grandchild_idx = tree.nodes[child_idx].edges[0].child;
        let expected_visits = tree.nodes[child_idx].edges[0]
            .child
            .map(|i| tree.nodes[i].visit_sum);

        let reused = tree.advance(&g, &[first, reply], &mode);
        if let (Some(gc), Some(ev)) = (grandchild_idx, expected_visits) {
            assert_eq!(reused.root, gc);
            assert_eq!(reused.root_visit_sum(), ev);
        }
        assert_eq!(
            reused.root_counts().iter().map(|&(m, _)| m).collect::<Vec<_>>(),
            g.legal_moves(reused.root_state())
        );
    }

    #[test]
    fn tree_reuse_missing_subtree_gives_fresh_root() {
        let g = game("tictactoe");
        let mode = SearchMode::Uct { exploration: 2f64.sqrt() };
        let mut tree = SearchTree::new(&g, g.initial_state(), &mode);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        uct_search(&mut tree, &g, SearchBudget::Iterations(2), 2f64.sqrt(), &mut rng);
        // With only two iterations most replies have no node.
        let moves = g.legal_moves(tree.root_state());
        let reused = tree.advance(&g, &[moves[0], moves[1]], &mode);
        assert_eq!(reused.root_visit_sum(), 0);
        assert_eq!(reused.root_state().move_count, 2);
    }

    #[test]
    fn greedy_plays_first_move_on_uniform_policy() {
        let g = game("tictactoe");
        let fs = generate_atomic_features(&g);
        let cfs = compile(&fs, &g.board_handle());
        let policy = LinearPolicy::zeros(fs.len(), 0.05, 1e-6);
        let s = g.initial_state();
        assert_eq!(greedy_move(&policy, &cfs, &g, &s), g.legal_moves(&s)[0]);
    }

    #[test]
    fn greedy_never_fails_on_single_move_states() {
        let g = game("tictactoe");
        let fs = generate_atomic_features(&g);
        let cfs = compile(&fs, &g.board_handle());
        let policy = LinearPolicy::zeros(fs.len(), 0.05, 1e-6);
        // Fill all but one cell without ending the game.
        let at = |x, y| g.board().vertex_at((x, y)).unwrap();
        let mut contents = vec![None; 9];
        let script = [
            ((1, 1), Player::P1),
            ((0, 0), Player::P2),
            ((2, 0), Player::P1),
            ((0, 2), Player::P2),
            ((0, 1), Player::P1),
            ((2, 1), Player::P2),
            ((1, 2), Player::P1),
            ((1, 0), Player::P2),
        ];
        for ((x, y), p) in script {
            contents[at(x, y).index()] = Some(p);
        }
        let s = g.state_from_cells(&contents, Player::P1, 8).unwrap();
        assert_eq!(g.legal_moves(&s).len(), 1);
        assert_eq!(greedy_move(&policy, &cfs, &g, &s).to, at(2, 2));
    }
}
