//! Board graphs with clockwise-ordered adjacency slots, and resolution of
//! walk-encoded relative positions (rotations, reflections, fractional-turn
//! rounding).
//!
//! Every vertex stores a fixed-length list of adjacency slots sorted
//! clockwise from a canonical direction; missing neighbours are kept as
//! off-board nulls so that walks can test for the board edge.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoardError {
    #[error("board dimensions must be at least 1")]
    InvalidDimensions,
    #[error("rotation {0} is not a multiple of 1/{1}")]
    InvalidRotation(Turn, usize),
    #[error("vertex {0:?} is not on the board")]
    InvalidVertex(VertexId),
    #[error("no walk connects the two vertices")]
    NoPath,
}

/// Index of a vertex in a [`BoardGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An exact clockwise turn, a rational fraction of a full revolution in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn(Ratio<i64>);

impl Turn {
    /// Builds `num/den` reduced and wrapped into [0, 1). Panics on `den == 0`.
    pub fn new(num: i64, den: i64) -> Turn {
        assert!(den != 0, "turn denominator must be nonzero");
        Turn(wrap_unit(Ratio::new(num, den)))
    }

    pub fn zero() -> Turn {
        Turn(Ratio::from_integer(0))
    }

    pub fn is_zero(self) -> bool {
        self.0 == Ratio::from_integer(0)
    }

    pub fn fraction(self) -> Ratio<i64> {
        self.0
    }

    /// Reflected turn: `(1 - t) mod 1`.
    pub fn negate(self) -> Turn {
        Turn(wrap_unit(-self.0))
    }
}

impl std::ops::Add for Turn {
    type Output = Turn;
    fn add(self, other: Turn) -> Turn {
        Turn(wrap_unit(self.0 + other.0))
    }
}

impl std::ops::Sub for Turn {
    type Output = Turn;
    fn sub(self, other: Turn) -> Turn {
        Turn(wrap_unit(self.0 - other.0))
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == Ratio::from_integer(0) {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

fn wrap_unit(r: Ratio<i64>) -> Ratio<i64> {
    r - r.floor()
}

/// A sequence of clockwise turns describing a relative path from an anchor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Walk(pub Vec<Turn>);

impl Walk {
    pub fn empty() -> Walk {
        Walk(Vec::new())
    }

    pub fn of(turns: impl Into<Vec<Turn>>) -> Walk {
        Walk(turns.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn turns(&self) -> &[Turn] {
        &self.0
    }
}

impl PartialOrd for Walk {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

// Shorter walks order first; equal lengths compare turn sequences.
impl Ord for Walk {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "]")
    }
}

/// Where a walk ends up: a vertex, or the single off-board sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResolvedPosition {
    OffBoard,
    At(VertexId),
}

impl ResolvedPosition {
    pub fn vertex(self) -> Option<VertexId> {
        match self {
            ResolvedPosition::At(v) => Some(v),
            ResolvedPosition::OffBoard => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoardKind {
    Square { width: u32, height: u32 },
    HexRhombus { side: u32 },
    HexHexagon { side: u32 },
}

/// Clockwise square-cell directions from north: N NE E SE S SW W NW.
const SQUARE_DIRS: [(i32, i32); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

/// Clockwise hex-cell directions in axial (q, r) coordinates, starting
/// north-east: NE E SE SW W NW.
const HEX_DIRS: [(i32, i32); 6] = [(1, -1), (1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1)];

/// Immutable playable-area graph. Adjacency slots are clockwise from a fixed
/// canonical direction and keep off-board nulls, so slot arithmetic is uniform
/// across the whole board.
#[derive(Debug, Clone)]
pub struct BoardGraph {
    kind: BoardKind,
    adjacency: Vec<Vec<Option<VertexId>>>,
    coords: Vec<(i32, i32)>,
    coord_index: HashMap<(i32, i32), VertexId>,
    max_slots: usize,
}

impl BoardGraph {
    fn from_coords(kind: BoardKind, coords: Vec<(i32, i32)>, dirs: &[(i32, i32)]) -> BoardGraph {
        let coord_index: HashMap<(i32, i32), VertexId> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, VertexId(i as u32)))
            .collect();
        let adjacency = coords
            .iter()
            .map(|&(x, y)| {
                dirs.iter()
                    .map(|&(dx, dy)| coord_index.get(&(x + dx, y + dy)).copied())
                    .collect()
            })
            .collect();
        BoardGraph {
            kind,
            adjacency,
            coords,
            coord_index,
            max_slots: dirs.len(),
        }
    }

    /// Square-cell board: every vertex has the 8 clockwise slots
    /// N NE E SE S SW W NW, with off-board nulls at edges and corners.
    pub fn square(width: u32, height: u32) -> Result<Arc<BoardGraph>, BoardError> {
        if width < 1 || height < 1 {
            return Err(BoardError::InvalidDimensions);
        }
        let mut coords = Vec::with_capacity((width * height) as usize);
        for y in 0..height as i32 {
            for x in 0..width as i32 {
                coords.push((x, y));
            }
        }
        Ok(Arc::new(BoardGraph::from_coords(
            BoardKind::Square { width, height },
            coords,
            &SQUARE_DIRS,
        )))
    }

    /// Hexagonal cells arranged in an n-by-n rhombus (axial coordinates),
    /// the Hex board. Six clockwise slots per vertex.
    pub fn hex_rhombus(side: u32) -> Result<Arc<BoardGraph>, BoardError> {
        if side < 1 {
            return Err(BoardError::InvalidDimensions);
        }
        let mut coords = Vec::with_capacity((side * side) as usize);
        for r in 0..side as i32 {
            for q in 0..side as i32 {
                coords.push((q, r));
            }
        }
        Ok(Arc::new(BoardGraph::from_coords(
            BoardKind::HexRhombus { side },
            coords,
            &HEX_DIRS,
        )))
    }

    /// Hexagonal cells arranged in a regular hexagon with `side` cells per
    /// edge, the Yavalath board: 3·side·(side−1)+1 vertices.
    pub fn hex_hexagon(side: u32) -> Result<Arc<BoardGraph>, BoardError> {
        if side < 1 {
            return Err(BoardError::InvalidDimensions);
        }
        let radius = side as i32 - 1;
        let mut coords = Vec::new();
        for r in -radius..=radius {
            let q_lo = (-radius).max(-radius - r);
            let q_hi = radius.min(radius - r);
            for q in q_lo..=q_hi {
                coords.push((q, r));
            }
        }
        Ok(Arc::new(BoardGraph::from_coords(
            BoardKind::HexHexagon { side },
            coords,
            &HEX_DIRS,
        )))
    }

    pub fn kind(&self) -> BoardKind {
        self.kind
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.adjacency.len() as u32).map(VertexId)
    }

    pub fn slot_count(&self, v: VertexId) -> usize {
        self.adjacency[v.index()].len()
    }

    pub fn max_slot_count(&self) -> usize {
        self.max_slots
    }

    pub fn slot(&self, v: VertexId, slot: usize) -> Option<VertexId> {
        self.adjacency[v.index()][slot]
    }

    pub fn slots(&self, v: VertexId) -> &[Option<VertexId>] {
        &self.adjacency[v.index()]
    }

    /// Layout coordinate of a vertex: (x, y) on square boards (y north),
    /// axial (q, r) on hex boards.
    pub fn coord(&self, v: VertexId) -> (i32, i32) {
        self.coords[v.index()]
    }

    pub fn vertex_at(&self, coord: (i32, i32)) -> Option<VertexId> {
        self.coord_index.get(&coord).copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.adjacency.len()
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), BoardError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(BoardError::InvalidVertex(v))
        }
    }

    /// Slot of `at` that points back to `from`. Adjacency symmetry guarantees
    /// existence for any edge actually traversed.
    fn back_slot(&self, at: VertexId, from: VertexId) -> usize {
        self.adjacency[at.index()]
            .iter()
            .position(|s| *s == Some(from))
            .expect("adjacency must be symmetric")
    }

    /// Resolves a walk from `anchor` under the given rotation and reflection.
    ///
    /// Fractional raw slot offsets branch into both floor and ceil roundings;
    /// the result is the set of final positions over all branches. A branch
    /// stepping through an off-board slot ends at the off-board sentinel.
    pub fn resolve_walk(
        &self,
        anchor: VertexId,
        rotation: Turn,
        reflect: bool,
        walk: &Walk,
    ) -> Result<BTreeSet<ResolvedPosition>, BoardError> {
        self.check_vertex(anchor)?;
        let max = self.max_slots as i64;
        if !(rotation.fraction() * max).is_integer() {
            return Err(BoardError::InvalidRotation(rotation, self.max_slots));
        }

        let mut results: BTreeSet<ResolvedPosition> = BTreeSet::new();
        if walk.is_empty() {
            results.insert(ResolvedPosition::At(anchor));
            return Ok(results);
        }

        // Branch states: (position, integral direction slot).
        let sc0 = self.slot_count(anchor) as i64;
        let mut states: BTreeSet<(VertexId, i64)> = branch_offsets(
            rotation.fraction() * sc0,
            sc0,
        )
        .into_iter()
        .map(|d| (anchor, d))
        .collect();

        for turn in walk.turns() {
            let used = if reflect { turn.negate() } else { *turn };
            let mut next: BTreeSet<(VertexId, i64)> = BTreeSet::new();
            for (pos, dir) in states {
                let sc = self.slot_count(pos) as i64;
                let raw = Ratio::from_integer(dir) + used.fraction() * sc;
                for slot in branch_offsets(raw, sc) {
                    match self.adjacency[pos.index()][slot as usize] {
                        None => {
                            results.insert(ResolvedPosition::OffBoard);
                        }
                        Some(neighbor) => {
                            let back = self.back_slot(neighbor, pos) as i64;
                            let nsc = self.slot_count(neighbor) as i64;
                            let ahead = Ratio::new(2 * back + nsc, 2);
                            for nd in branch_offsets(ahead, nsc) {
                                next.insert((neighbor, nd));
                            }
                        }
                    }
                }
            }
            states = next;
        }
        for (pos, _) in states {
            results.insert(ResolvedPosition::At(pos));
        }
        Ok(results)
    }

    /// Shortest walk from `from` to `to` using only integral turn offsets,
    /// ties broken by lexicographically smallest turn sequence.
    pub fn canonical_walk(&self, from: VertexId, to: VertexId) -> Result<Walk, BoardError> {
        self.canonical_walk_with_dir(from, to).map(|(w, _)| w)
    }

    /// As [`canonical_walk`](Self::canonical_walk), also reporting the
    /// direction slot in effect on arrival (0 for the empty walk).
    pub(crate) fn canonical_walk_with_dir(
        &self,
        from: VertexId,
        to: VertexId,
    ) -> Result<(Walk, i64), BoardError> {
        self.check_vertex(from)?;
        self.check_vertex(to)?;
        if from == to {
            return Ok((Walk::empty(), 0));
        }

        // BFS over (vertex, direction) states. Expanding turns in increasing
        // order makes the first discovery of any state the lexicographically
        // smallest shortest walk to it.
        let mut parents: HashMap<(VertexId, i64), ((VertexId, i64), Turn)> = HashMap::new();
        let mut queue: VecDeque<(VertexId, i64)> = VecDeque::new();
        let start = (from, 0i64);
        queue.push_back(start);
        parents.insert(start, (start, Turn::zero()));

        while let Some((pos, dir)) = queue.pop_front() {
            let sc = self.slot_count(pos) as i64;
            for j in 0..sc {
                let turn = Turn::new(j, sc);
                let slot = (dir + j).rem_euclid(sc);
                let Some(neighbor) = self.adjacency[pos.index()][slot as usize] else {
                    continue;
                };
                let back = self.back_slot(neighbor, pos) as i64;
                let nsc = self.slot_count(neighbor) as i64;
                // Shipped boards have even degree; odd degrees would branch
                // here, which BFS over single states cannot represent.
                debug_assert!(nsc % 2 == 0, "canonical walks need even slot counts");
                let ndir = (back + nsc / 2).rem_euclid(nsc);
                let state = (neighbor, ndir);
                if parents.contains_key(&state) {
                    continue;
                }
                parents.insert(state, ((pos, dir), turn));
                if neighbor == to {
                    let mut turns = Vec::new();
                    let mut cur = state;
                    while cur != start {
                        let (prev, t) = parents[&cur];
                        turns.push(t);
                        cur = prev;
                    }
                    turns.reverse();
                    return Ok((Walk(turns), ndir));
                }
                queue.push_back(state);
            }
        }
        Err(BoardError::NoPath)
    }
}

/// Integral slot offsets for a raw rational offset: the value itself when
/// integral, otherwise both floor and ceil, reduced modulo `slot_count`.
fn branch_offsets(raw: Ratio<i64>, slot_count: i64) -> Vec<i64> {
    if raw.is_integer() {
        vec![raw.to_integer().rem_euclid(slot_count)]
    } else {
        let lo = raw.floor().to_integer().rem_euclid(slot_count);
        let hi = raw.ceil().to_integer().rem_euclid(slot_count);
        if lo == hi {
            vec![lo]
        } else {
            vec![lo, hi]
        }
    }
}
