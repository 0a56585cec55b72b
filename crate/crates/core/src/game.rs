//! Game state, legal-move generation, move application and terminal
//! detection for the shipped rule set, plus the proto-features derived from
//! move rules.

use std::sync::Arc;

use thiserror::Error;

use crate::board::{BoardError, BoardGraph, BoardKind, Turn, VertexId, Walk};
use crate::dsl::{BoardSpec, CaptureMode, EndRule, GameRules, LineResult, MoveRule};
use crate::features::{Element, Feature};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("move is not legal in this state")]
    IllegalMove,
    #[error("state cell vector has the wrong length")]
    BadCells,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Player::P1 => 1,
            Player::P2 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ongoing,
    Win(Player),
    Tie,
}

/// A move: `from` is `None` for placement games, and a mover-owned vertex for
/// step games.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub from: Option<VertexId>,
    pub to: VertexId,
}

impl Move {
    pub fn place(to: VertexId) -> Move {
        Move { from: None, to }
    }

    pub fn step(from: VertexId, to: VertexId) -> Move {
        Move { from: Some(from), to }
    }
}

/// Immutable snapshot of a game in progress.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    cells: Vec<u8>, // 0 empty, 1 P1, 2 P2
    pub mover: Player,
    pub move_count: u32,
    pub status: Status,
}

impl GameState {
    pub fn cell(&self, v: VertexId) -> Option<Player> {
        match self.cells[v.index()] {
            0 => None,
            1 => Some(Player::P1),
            _ => Some(Player::P2),
        }
    }

    pub fn is_empty(&self, v: VertexId) -> bool {
        self.cells[v.index()] == 0
    }

    pub fn is_ongoing(&self) -> bool {
        self.status == Status::Ongoing
    }

    pub fn piece_count(&self, p: Player) -> usize {
        self.cells.iter().filter(|&&c| c == p.index()).count()
    }
}

/// Rules bound to their board graph.
#[derive(Debug, Clone)]
pub struct Game {
    rules: GameRules,
    board: Arc<BoardGraph>,
}

/// Square-board slot indices for the mover's forward directions:
/// (straight, diagonals).
fn forward_slots(p: Player) -> (usize, [usize; 2]) {
    match p {
        Player::P1 => (0, [1, 7]), // N, NE, NW
        Player::P2 => (4, [3, 5]), // S, SE, SW
    }
}

impl Game {
    pub fn new(rules: GameRules) -> Result<Game, BoardError> {
        let board = match rules.board {
            BoardSpec::Square { width, height } => BoardGraph::square(width, height)?,
            BoardSpec::HexRhombus { side } => BoardGraph::hex_rhombus(side)?,
            BoardSpec::HexHexagon { side } => BoardGraph::hex_hexagon(side)?,
        };
        Ok(Game { rules, board })
    }

    pub fn rules(&self) -> &GameRules {
        &self.rules
    }

    pub fn board(&self) -> &BoardGraph {
        &self.board
    }

    pub fn board_handle(&self) -> Arc<BoardGraph> {
        Arc::clone(&self.board)
    }

    pub fn initial_state(&self) -> GameState {
        let mut cells = vec![0u8; self.board.vertex_count()];
        if let MoveRule::StepForward { .. } = self.rules.move_rule {
            let BoardKind::Square { height, .. } = self.board.kind() else {
                unreachable!("step games ship on square boards");
            };
            for v in self.board.vertices() {
                let (_, y) = self.board.coord(v);
                if y < 2 {
                    cells[v.index()] = Player::P1.index();
                } else if y >= height as i32 - 2 {
                    cells[v.index()] = Player::P2.index();
                }
            }
        }
        GameState { cells, mover: Player::P1, move_count: 0, status: Status::Ongoing }
    }

    /// Builds a state from explicit cell contents, for setting up positions.
    pub fn state_from_cells(
        &self,
        contents: &[Option<Player>],
        mover: Player,
        move_count: u32,
    ) -> Result<GameState, GameError> {
        if contents.len() != self.board.vertex_count() {
            return Err(GameError::BadCells);
        }
        let cells = contents.iter().map(|c| c.map_or(0, Player::index)).collect();
        Ok(GameState { cells, mover, move_count, status: Status::Ongoing })
    }

    /// Legal moves in deterministic order, ascending by (from, to) index.
    /// Must not be called on a terminal state.
    pub fn legal_moves(&self, s: &GameState) -> Vec<Move> {
        assert!(s.is_ongoing(), "legal_moves called on a terminal state");
        let mut moves = Vec::new();
        match self.rules.move_rule {
            MoveRule::PlaceOnEmpty => {
                for v in self.board.vertices() {
                    if s.is_empty(v) {
                        moves.push(Move::place(v));
                    }
                }
            }
            MoveRule::StepForward { capture: CaptureMode::Diagonal } => {
                let (straight, diagonals) = forward_slots(s.mover);
                for from in self.board.vertices() {
                    if s.cell(from) != Some(s.mover) {
                        continue;
                    }
                    if let Some(to) = self.board.slot(from, straight) {
                        if s.is_empty(to) {
                            moves.push(Move::step(from, to));
                        }
                    }
                    for d in diagonals {
                        if let Some(to) = self.board.slot(from, d) {
                            if s.cell(to) != Some(s.mover) {
                                moves.push(Move::step(from, to));
                            }
                        }
                    }
                }
                moves.sort();
            }
        }
        moves
    }

    fn is_legal(&self, s: &GameState, m: Move) -> bool {
        if !s.is_ongoing() || !self.board.contains(m.to) {
            return false;
        }
        match self.rules.move_rule {
            MoveRule::PlaceOnEmpty => m.from.is_none() && s.is_empty(m.to),
            MoveRule::StepForward { capture: CaptureMode::Diagonal } => {
                let Some(from) = m.from else { return false };
                if !self.board.contains(from) || s.cell(from) != Some(s.mover) {
                    return false;
                }
                let (straight, diagonals) = forward_slots(s.mover);
                if self.board.slot(from, straight) == Some(m.to) {
                    s.is_empty(m.to)
                } else if diagonals.iter().any(|&d| self.board.slot(from, d) == Some(m.to)) {
                    s.cell(m.to) != Some(s.mover)
                } else {
                    false
                }
            }
        }
    }

    fn has_any_legal_move(&self, s: &GameState) -> bool {
        match self.rules.move_rule {
            MoveRule::PlaceOnEmpty => s.cells.contains(&0),
            MoveRule::StepForward { capture: CaptureMode::Diagonal } => {
                let (straight, diagonals) = forward_slots(s.mover);
                self.board.vertices().any(|from| {
                    s.cell(from) == Some(s.mover)
                        && (self
                            .board
                            .slot(from, straight)
                            .is_some_and(|to| s.is_empty(to))
                            || diagonals.iter().any(|&d| {
                                self.board
                                    .slot(from, d)
                                    .is_some_and(|to| s.cell(to) != Some(s.mover))
                            }))
                })
            }
        }
    }

    pub fn apply_move(&self, s: &GameState, m: Move) -> Result<GameState, GameError> {
        if !self.is_legal(s, m) {
            return Err(GameError::IllegalMove);
        }
        let mover = s.mover;
        let mut cells = s.cells.clone();
        if let Some(from) = m.from {
            cells[from.index()] = 0;
        }
        cells[m.to.index()] = mover.index();

        let mut next = GameState {
            cells,
            mover: mover.opponent(),
            move_count: s.move_count + 1,
            status: Status::Ongoing,
        };
        next.status = self.status_after(&next, mover, m.to);
        if next.status == Status::Ongoing && !self.has_any_legal_move(&next) {
            next.status = Status::Tie;
        }
        // The move cap applies last: an end rule firing on the capped move
        // still stands.
        if next.status == Status::Ongoing && next.move_count >= self.rules.move_cap {
            next.status = Status::Tie;
        }
        Ok(next)
    }

    /// End rules evaluated in listed order against the just-placed vertex.
    fn status_after(&self, s: &GameState, mover: Player, changed: VertexId) -> Status {
        for rule in &self.rules.end_rules {
            match rule {
                EndRule::Line { length, result } => {
                    if self.max_line_through(s, changed, mover) >= *length {
                        return match result {
                            LineResult::Win => Status::Win(mover),
                            LineResult::Loss => Status::Win(mover.opponent()),
                        };
                    }
                }
                EndRule::ReachOpposite => {
                    let BoardKind::Square { height, .. } = self.board.kind() else {
                        continue;
                    };
                    let target = match mover {
                        Player::P1 => height as i32 - 1,
                        Player::P2 => 0,
                    };
                    if self.board.coord(changed).1 == target {
                        return Status::Win(mover);
                    }
                }
                EndRule::ConnectSides => {
                    if self.connects_sides(s, mover, changed) {
                        return Status::Win(mover);
                    }
                }
                EndRule::NoPiecesLoss => {
                    if s.piece_count(mover.opponent()) == 0 {
                        return Status::Win(mover);
                    }
                }
            }
        }
        Status::Ongoing
    }

    /// Longest maximal line of `owner` pieces through `v`, over the board's
    /// line directions (opposite slot pairs).
    fn max_line_through(&self, s: &GameState, v: VertexId, owner: Player) -> u32 {
        let half = self.board.slot_count(v) / 2;
        let run = |dir: usize| -> u32 {
            let mut n = 0;
            let mut cur = v;
            while let Some(next) = self.board.slot(cur, dir) {
                if s.cell(next) != Some(owner) {
                    break;
                }
                n += 1;
                cur = next;
            }
            n
        };
        (0..half).map(|d| 1 + run(d) + run(d + half)).max().unwrap_or(1)
    }

    /// Flood fill from the placed piece over the mover's pieces, checking
    /// both of the mover's sides of the rhombus.
    fn connects_sides(&self, s: &GameState, mover: Player, start: VertexId) -> bool {
        let BoardKind::HexRhombus { side } = self.board.kind() else {
            return false;
        };
        let side = side as i32;
        let touches = |v: VertexId| -> (bool, bool) {
            let (q, r) = self.board.coord(v);
            match mover {
                Player::P1 => (r == 0, r == side - 1),
                Player::P2 => (q == 0, q == side - 1),
            }
        };
        let mut seen = vec![false; self.board.vertex_count()];
        let mut stack = vec![start];
        seen[start.index()] = true;
        let (mut lo, mut hi) = (false, false);
        while let Some(v) = stack.pop() {
            let (a, b) = touches(v);
            lo |= a;
            hi |= b;
            if lo && hi {
                return true;
            }
            for n in self.board.slots(v).iter().flatten() {
                if !seen[n.index()] && s.cell(*n) == Some(mover) {
                    seen[n.index()] = true;
                    stack.push(*n);
                }
            }
        }
        false
    }

    /// Features generated from the move rule; at least one is active for
    /// every legal move of the game.
    pub fn proto_features(&self) -> Vec<Feature> {
        match self.rules.move_rule {
            MoveRule::PlaceOnEmpty => {
                vec![Feature::new(
                    None,
                    Walk::empty(),
                    vec![(Walk::empty(), Element::Empty)],
                )
                .expect("single requirement cannot conflict")]
            }
            MoveRule::StepForward { capture: CaptureMode::Diagonal } => {
                let anchor_friendly = (Walk::empty(), Element::Friendly);
                let straight = Walk::of(vec![Turn::zero()]);
                let mut protos = vec![Feature::new(
                    Some(Walk::empty()),
                    straight.clone(),
                    vec![anchor_friendly.clone(), (straight, Element::Empty)],
                )
                .expect("disjoint positions cannot conflict")];
                // Diagonal destinations may be empty or hold an enemy; the
                // element vocabulary has no "not friendly", so the proto
                // leaves the destination unconstrained and legality provides
                // the guarantee.
                for eighth in [1, 7] {
                    protos.push(
                        Feature::new(
                            Some(Walk::empty()),
                            Walk::of(vec![Turn::new(eighth, 8)]),
                            vec![anchor_friendly.clone()],
                        )
                        .expect("single requirement cannot conflict"),
                    );
                }
                protos
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{builtin_games, parse_game};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn game(name: &str) -> Game {
        let src = builtin_games().iter().find(|(n, _)| *n == name).unwrap().1;
        Game::new(parse_game(src).unwrap()).unwrap()
    }

    #[test]
    fn tictactoe_initial_moves() {
        let g = game("tictactoe");
        assert_eq!(g.legal_moves(&g.initial_state()).len(), 9);
    }

    #[test]
    fn yavalath_initial_moves_cover_board() {
        let g = game("yavalath");
        assert_eq!(g.legal_moves(&g.initial_state()).len(), 61);
    }

    #[test]
    fn breakthrough_initial_moves_match_enumeration() {
        // Independent enumeration from the setup geometry: only the front
        // rank can move (the back rank is blocked by friendly pieces), with
        // one straight step per pawn plus in-bounds diagonals.
        for (name, w) in [("breakthrough6", 6i32), ("breakthrough8", 8i32)] {
            let g = game(name);
            let mut expected = Vec::new();
            for c in 0..w {
                for dc in [-1, 0, 1] {
                    let t = c + dc;
                    if (0..w).contains(&t) {
                        expected.push((
                            g.board().vertex_at((c, 1)).unwrap(),
                            g.board().vertex_at((t, 2)).unwrap(),
                        ));
                    }
                }
            }
            let moves = g.legal_moves(&g.initial_state());
            assert_eq!(moves.len(), expected.len(), "{name}");
            for (from, to) in expected {
                assert!(moves.contains(&Move::step(from, to)), "{name}");
            }
        }
        assert_eq!(game("breakthrough6").legal_moves(&game("breakthrough6").initial_state()).len(), 16);
        assert_eq!(game("breakthrough8").legal_moves(&game("breakthrough8").initial_state()).len(), 22);
    }

    #[test]
    fn legal_moves_are_sorted_and_deterministic() {
        let g = game("breakthrough6");
        let moves = g.legal_moves(&g.initial_state());
        let mut sorted = moves.clone();
        sorted.sort();
        assert_eq!(moves, sorted);
    }

    #[test]
    fn three_in_a_row_wins_tictactoe() {
        let g = game("tictactoe");
        let at = |x, y| g.board().vertex_at((x, y)).unwrap();
        let mut s = g.initial_state();
        for m in [
            Move::place(at(0, 0)), // P1
            Move::place(at(0, 1)), // P2
            Move::place(at(1, 0)), // P1
            Move::place(at(1, 1)), // P2
            Move::place(at(2, 0)), // P1 completes the bottom row
        ] {
            s = g.apply_move(&s, m).unwrap();
        }
        assert_eq!(s.status, Status::Win(Player::P1));
    }

    #[test]
    fn yavalath_line_rules() {
        let g = game("yavalath");
        let at = |q, r| g.board().vertex_at((q, r)).unwrap();
        // Mover completes x x _ x into a line of four: win.
        let mut cells = vec![None; g.board().vertex_count()];
        for q in [-2, -1, 1] {
            cells[at(q, 0).index()] = Some(Player::P1);
        }
        let s = g.state_from_cells(&cells, Player::P1, 6).unwrap();
        let won = g.apply_move(&s, Move::place(at(0, 0))).unwrap();
        assert_eq!(won.status, Status::Win(Player::P1));

        // Mover completes a bare line of three: loss.
        let mut cells = vec![None; g.board().vertex_count()];
        for q in [-2, -1] {
            cells[at(q, 0).index()] = Some(Player::P1);
        }
        let s = g.state_from_cells(&cells, Player::P1, 4).unwrap();
        let lost = g.apply_move(&s, Move::place(at(0, 0))).unwrap();
        assert_eq!(lost.status, Status::Win(Player::P2));
    }

    #[test]
    fn hex_connection_wins() {
        let g = game("hex7");
        let at = |q, r| g.board().vertex_at((q, r)).unwrap();
        // P1 connects r = 0 to r = 6 straight down the q = 3 file.
        let mut cells = vec![None; g.board().vertex_count()];
        for r in 0..6 {
            cells[at(3, r).index()] = Some(Player::P1);
        }
        let s = g.state_from_cells(&cells, Player::P1, 12).unwrap();
        let won = g.apply_move(&s, Move::place(at(3, 6))).unwrap();
        assert_eq!(won.status, Status::Win(Player::P1));

        // The same stones do not connect east-west for P2.
        let mut cells = vec![None; g.board().vertex_count()];
        for r in 0..6 {
            cells[at(3, r).index()] = Some(Player::P2);
        }
        let s = g.state_from_cells(&cells, Player::P2, 13).unwrap();
        let placed = g.apply_move(&s, Move::place(at(3, 6))).unwrap();
        assert_eq!(placed.status, Status::Ongoing);
    }

    #[test]
    fn breakthrough_reach_and_elimination() {
        let g = game("breakthrough6");
        let at = |x, y| g.board().vertex_at((x, y)).unwrap();

        let mut cells = vec![None; g.board().vertex_count()];
        cells[at(2, 4).index()] = Some(Player::P1);
        cells[at(0, 0).index()] = Some(Player::P2);
        let s = g.state_from_cells(&cells, Player::P1, 30).unwrap();
        let won = g.apply_move(&s, Move::step(at(2, 4), at(2, 5))).unwrap();
        assert_eq!(won.status, Status::Win(Player::P1));

        let mut cells = vec![None; g.board().vertex_count()];
        cells[at(2, 2).index()] = Some(Player::P1);
        cells[at(3, 3).index()] = Some(Player::P2);
        let s = g.state_from_cells(&cells, Player::P1, 30).unwrap();
        let captured = g.apply_move(&s, Move::step(at(2, 2), at(3, 3))).unwrap();
        assert_eq!(captured.status, Status::Win(Player::P1));
    }

    #[test]
    fn move_cap_declares_tie() {
        // The colouring by (x + 2y) mod 4 has runs of at most 2 in every line
        // direction, so scripted gomoku15 play reaches the cap.
        let g = game("gomoku15");
        let owner = |x: i32, y: i32| -> Player {
            if (x + 2 * y).rem_euclid(4) < 2 {
                Player::P1
            } else {
                Player::P2
            }
        };
        let mut p1_cells = Vec::new();
        let mut p2_cells = Vec::new();
        for v in g.board().vertices() {
            let (x, y) = g.board().coord(v);
            match owner(x, y) {
                Player::P1 => p1_cells.push(v),
                Player::P2 => p2_cells.push(v),
            }
        }
        let mut s = g.initial_state();
        let (mut i1, mut i2) = (0, 0);
        while s.is_ongoing() {
            let v = match s.mover {
                Player::P1 => {
                    i1 += 1;
                    p1_cells[i1 - 1]
                }
                Player::P2 => {
                    i2 += 1;
                    p2_cells[i2 - 1]
                }
            };
            s = g.apply_move(&s, Move::place(v)).unwrap();
        }
        assert_eq!(s.move_count, 100);
        assert_eq!(s.status, Status::Tie);
    }

    #[test]
    fn full_board_without_line_is_tie() {
        let g = game("tictactoe");
        let at = |x, y| g.board().vertex_at((x, y)).unwrap();
        // x o x / x o o / o x x filled in an order that never completes a line.
        let script = [
            (1, 1), // P1
            (0, 0), // P2
            (2, 0), // P1
            (0, 2), // P2
            (0, 1), // P1
            (2, 1), // P2
            (1, 2), // P1
            (1, 0), // P2
            (2, 2), // P1
        ];
        let mut s = g.initial_state();
        for (x, y) in script {
            s = g.apply_move(&s, Move::place(at(x, y))).unwrap();
        }
        assert_eq!(s.status, Status::Tie);
    }

    #[test]
    fn illegal_moves_rejected() {
        let g = game("tictactoe");
        let s = g.initial_state();
        let v = g.board().vertex_at((1, 1)).unwrap();
        let s = g.apply_move(&s, Move::place(v)).unwrap();
        assert_eq!(g.apply_move(&s, Move::place(v)).unwrap_err(), GameError::IllegalMove);

        let g = game("breakthrough6");
        let s = g.initial_state();
        let from = g.board().vertex_at((0, 1)).unwrap();
        let back = g.board().vertex_at((0, 0)).unwrap();
        assert_eq!(g.apply_move(&s, Move::step(from, back)).unwrap_err(), GameError::IllegalMove);
    }

    #[test]
    fn proto_feature_counts() {
        assert_eq!(game("tictactoe").proto_features().len(), 1);
        assert_eq!(game("yavalath").proto_features().len(), 1);
        assert_eq!(game("breakthrough6").proto_features().len(), 3);
    }

    #[test]
    fn distinct_moves_give_distinct_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for name in ["tictactoe", "breakthrough6", "yavalath"] {
            let g = game(name);
            let mut s = g.initial_state();
            for _ in 0..6 {
                if !s.is_ongoing() {
                    break;
                }
                let moves = g.legal_moves(&s);
                let states: Vec<GameState> =
                    moves.iter().map(|&m| g.apply_move(&s, m).unwrap()).collect();
                for i in 0..states.len() {
                    for j in i + 1..states.len() {
                        assert_ne!(states[i], states[j], "{name}");
                    }
                }
                s = states[rng.random_range(0..states.len())].clone();
            }
        }
    }

    #[test]
    fn equal_states_equal_move_lists() {
        let g = game("breakthrough6");
        let a = g.initial_state();
        let b = g.initial_state();
        assert_eq!(a, b);
        assert_eq!(g.legal_moves(&a), g.legal_moves(&b));
    }
}
