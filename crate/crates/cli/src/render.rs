//! Text rendering of a feature's pattern on its board geometry.

use std::collections::BTreeMap;

use fmcts_core::{
    BoardKind, Element, Feature, Game, ResolvedPosition, Turn, VertexId, Walk,
};

fn element_char(e: Element) -> char {
    match e {
        Element::OffBoard => '#',
        Element::Empty => '.',
        Element::Friendly => 'F',
        Element::Enemy => 'E',
        Element::OwnedBy(n) => char::from_digit(n as u32 % 10, 10).unwrap_or('?'),
        Element::ItemIndex(_) => 'i',
    }
}

/// Display cell of a vertex: hex rows shear by the axial r coordinate so
/// neighbours sit visually adjacent; square rows put north on top.
fn display_cell(game: &Game, v: VertexId) -> (i32, i32) {
    let (x, y) = game.board().coord(v);
    match game.board().kind() {
        BoardKind::Square { height, .. } => (height as i32 - 1 - y, 2 * x),
        BoardKind::HexRhombus { .. } | BoardKind::HexHexagon { .. } => (y, 2 * x + y),
    }
}

fn central_anchor(game: &Game) -> VertexId {
    let coord = match game.board().kind() {
        BoardKind::Square { width, height } => (width as i32 / 2, height as i32 / 2),
        BoardKind::HexRhombus { side } => (side as i32 / 2, side as i32 / 2),
        BoardKind::HexHexagon { .. } => (0, 0),
    };
    game.board().vertex_at(coord).expect("board centre exists")
}

/// Renders the pattern anchored at the board centre with rotation 0 and no
/// reflection, one character per cell, plus notes for off-board tests.
pub fn render_feature(game: &Game, feature: &Feature) -> String {
    let anchor = central_anchor(game);
    let resolve = |walk: &Walk| -> Vec<ResolvedPosition> {
        game.board()
            .resolve_walk(anchor, Turn::zero(), false, walk)
            .expect("zero rotation is always valid")
            .into_iter()
            .collect()
    };

    let mut marks: BTreeMap<(i32, i32), char> = BTreeMap::new();
    let mut notes: Vec<String> = Vec::new();

    for (walk, element) in feature.pattern() {
        for pos in resolve(walk) {
            match pos {
                ResolvedPosition::At(v) => {
                    marks.insert(display_cell(game, v), element_char(*element));
                }
                ResolvedPosition::OffBoard => {
                    notes.push(format!("  off-board along {walk}"));
                }
            }
        }
    }
    // Action markers drawn last so they stay visible.
    if let Some(from_walk) = feature.action_from() {
        for pos in resolve(from_walk) {
            if let ResolvedPosition::At(v) = pos {
                marks.insert(display_cell(game, v), 'o');
            }
        }
    }
    for pos in resolve(feature.action_to()) {
        if let ResolvedPosition::At(v) = pos {
            marks.insert(display_cell(game, v), '+');
        }
    }

    let rows: Vec<i32> = marks.keys().map(|&(r, _)| r).collect();
    let cols: Vec<i32> = marks.keys().map(|&(_, c)| c).collect();
    let (rmin, rmax) = (*rows.iter().min().unwrap(), *rows.iter().max().unwrap());
    let (cmin, cmax) = (*cols.iter().min().unwrap(), *cols.iter().max().unwrap());

    // Unmarked board cells inside the box give the pattern its context.
    let mut background: BTreeMap<(i32, i32), char> = BTreeMap::new();
    for v in game.board().vertices() {
        let cell = display_cell(game, v);
        if (rmin..=rmax).contains(&cell.0) && (cmin..=cmax).contains(&cell.1) {
            background.insert(cell, '\u{b7}');
        }
    }
    background.extend(marks);

    let mut out = String::new();
    for r in rmin..=rmax {
        let mut line = String::new();
        for c in cmin..=cmax {
            line.push(background.get(&(r, c)).copied().unwrap_or(' '));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    for note in notes {
        out.push_str(&note);
        out.push('\n');
    }
    out
}
