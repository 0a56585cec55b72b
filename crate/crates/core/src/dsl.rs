//! Parser for the `.lud-mini` game-description language: a small
//! parenthesized rule language covering the shipped games.
//!
//! Grammar:
//!
//! ```text
//! (game <name>
//!   (players 2)
//!   (board <spec>)            spec: (square w [h]) | (hex-rhombus n) | (hex-hexagon r)
//!   [(equipment ...)]         accepted, contents ignored
//!   (rules
//!     (moves <moveRule>)      (to Mover (empty)) | (step forward capture:diagonal)
//!     (end <endRule>+)))      (line length:k win|loss) | (reach-opposite win)
//!                             | (connect-sides win) | (no-pieces loss)
//! ```

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Loc {
    pub offset: usize,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DslError {
    #[error("{loc}: {msg}")]
    Lex { loc: Loc, msg: String },
    #[error("{loc}: unknown ludeme `{label}`")]
    UnknownLudeme { loc: Loc, label: String },
    #[error("{loc}: `{label}` expects {expected}, found {found}")]
    Arity {
        loc: Loc,
        label: String,
        expected: String,
        found: usize,
    },
    #[error("{loc}: unsupported construct: {msg}")]
    Unsupported { loc: Loc, msg: String },
}

/// A node of the parsed description tree.
#[derive(Debug, Clone)]
pub enum Ludeme {
    Node {
        label: String,
        children: Vec<Ludeme>,
        loc: Loc,
    },
    Int {
        value: i64,
        loc: Loc,
    },
    Str {
        value: String,
        loc: Loc,
    },
    Word {
        value: String,
        loc: Loc,
    },
    Key {
        name: String,
        value: Box<Ludeme>,
        loc: Loc,
    },
}

impl Ludeme {
    pub fn loc(&self) -> Loc {
        match self {
            Ludeme::Node { loc, .. }
            | Ludeme::Int { loc, .. }
            | Ludeme::Str { loc, .. }
            | Ludeme::Word { loc, .. }
            | Ludeme::Key { loc, .. } => *loc,
        }
    }

    fn describe(&self) -> String {
        match self {
            Ludeme::Node { label, .. } => format!("({label} ...)"),
            Ludeme::Int { value, .. } => format!("{value}"),
            Ludeme::Str { value, .. } => format!("\"{value}\""),
            Ludeme::Word { value, .. } => value.clone(),
            Ludeme::Key { name, .. } => format!("{name}:..."),
        }
    }
}

// Structural equality ignores source locations.
impl PartialEq for Ludeme {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Ludeme::Node { label: a, children: ca, .. },
                Ludeme::Node { label: b, children: cb, .. },
            ) => a == b && ca == cb,
            (Ludeme::Int { value: a, .. }, Ludeme::Int { value: b, .. }) => a == b,
            (Ludeme::Str { value: a, .. }, Ludeme::Str { value: b, .. }) => a == b,
            (Ludeme::Word { value: a, .. }, Ludeme::Word { value: b, .. }) => a == b,
            (
                Ludeme::Key { name: a, value: va, .. },
                Ludeme::Key { name: b, value: vb, .. },
            ) => a == b && va == vb,
            _ => false,
        }
    }
}

impl Eq for Ludeme {}

impl fmt::Display for Ludeme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ludeme::Node { label, children, .. } => {
                write!(f, "({label}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
            Ludeme::Int { value, .. } => write!(f, "{value}"),
            Ludeme::Str { value, .. } => write!(f, "\"{value}\""),
            Ludeme::Word { value, .. } => write!(f, "{value}"),
            Ludeme::Key { name, value, .. } => write!(f, "{name}:{value}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoardSpec {
    Square { width: u32, height: u32 },
    HexRhombus { side: u32 },
    HexHexagon { side: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaptureMode {
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveRule {
    /// Place a piece on any empty vertex.
    PlaceOnEmpty,
    /// Step one cell toward the opponent: straight to an empty cell, or
    /// diagonally to a cell not holding a friendly piece.
    StepForward { capture: CaptureMode },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineResult {
    Win,
    Loss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndRule {
    Line { length: u32, result: LineResult },
    ReachOpposite,
    ConnectSides,
    NoPiecesLoss,
}

/// Move cap applied to every shipped game; a capped game is a tie.
pub const MOVE_CAP: u32 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameRules {
    pub name: String,
    pub board: BoardSpec,
    pub move_rule: MoveRule,
    pub end_rules: Vec<EndRule>,
    pub move_cap: u32,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    Int(i64),
    Str(String),
    Atom(String), // word or name:value keyword
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, bytes: src.as_bytes(), pos: 0 }
    }

    fn loc_at(&self, offset: usize) -> Loc {
        let mut line = 1u32;
        let mut col = 1u32;
        for b in self.bytes[..offset.min(self.bytes.len())].iter() {
            if *b == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        Loc { offset, line, col }
    }

    fn error(&self, offset: usize, msg: impl Into<String>) -> DslError {
        DslError::Lex { loc: self.loc_at(offset), msg: msg.into() }
    }

    fn tokens(mut self) -> Result<Vec<(Token, usize)>, DslError> {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'(' => {
                    out.push((Token::LParen, self.pos));
                    self.pos += 1;
                }
                b')' => {
                    out.push((Token::RParen, self.pos));
                    self.pos += 1;
                }
                b'"' => {
                    let start = self.pos;
                    self.pos += 1;
                    let begin = self.pos;
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'"' {
                        if self.bytes[self.pos] == b'\n' {
                            return Err(self.error(start, "unterminated string"));
                        }
                        self.pos += 1;
                    }
                    if self.pos >= self.bytes.len() {
                        return Err(self.error(start, "unterminated string"));
                    }
                    let s = self.src[begin..self.pos].to_string();
                    self.pos += 1;
                    out.push((Token::Str(s), start));
                }
                _ if is_atom_byte(b) => {
                    let start = self.pos;
                    while self.pos < self.bytes.len() && is_atom_byte(self.bytes[self.pos]) {
                        self.pos += 1;
                    }
                    let text = &self.src[start..self.pos];
                    if let Ok(n) = text.parse::<i64>() {
                        out.push((Token::Int(n), start));
                    } else {
                        out.push((Token::Atom(text.to_string()), start));
                    }
                }
                _ => {
                    return Err(self.error(
                        self.pos,
                        format!("unexpected character {:?}", self.src[self.pos..].chars().next().unwrap()),
                    ));
                }
            }
        }
        Ok(out)
    }
}

fn is_atom_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b':' | b'.')
}

// ---------------------------------------------------------------------------
// Tree parser and printer
// ---------------------------------------------------------------------------

/// Parses source text into a single description tree.
pub fn parse_tree(src: &str) -> Result<Ludeme, DslError> {
    let lexer = Lexer::new(src);
    let make_loc = |offset: usize| Lexer::new(src).loc_at(offset);
    let tokens = lexer.tokens()?;
    let mut pos = 0usize;
    let tree = parse_node(src, &tokens, &mut pos)?;
    if pos != tokens.len() {
        let (_, off) = tokens[pos];
        return Err(DslError::Lex { loc: make_loc(off), msg: "trailing input after description".into() });
    }
    Ok(tree)
}

fn parse_node(src: &str, tokens: &[(Token, usize)], pos: &mut usize) -> Result<Ludeme, DslError> {
    let loc_at = |offset: usize| Lexer::new(src).loc_at(offset);
    let Some((tok, off)) = tokens.get(*pos) else {
        let end = src.len();
        return Err(DslError::Lex { loc: loc_at(end), msg: "unexpected end of input".into() });
    };
    let loc = loc_at(*off);
    match tok {
        Token::LParen => {
            *pos += 1;
            let Some((label_tok, label_off)) = tokens.get(*pos) else {
                return Err(DslError::Lex { loc: loc_at(src.len()), msg: "unexpected end of input".into() });
            };
            let label = match label_tok {
                Token::Atom(a) if !a.contains(':') => a.clone(),
                Token::Str(s) => s.clone(),
                _ => {
                    return Err(DslError::Lex {
                        loc: loc_at(*label_off),
                        msg: "expected a label after `(`".into(),
                    })
                }
            };
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some((Token::RParen, _)) => {
                        *pos += 1;
                        return Ok(Ludeme::Node { label, children, loc });
                    }
                    Some(_) => children.push(parse_node(src, tokens, pos)?),
                    None => {
                        return Err(DslError::Lex {
                            loc: loc_at(src.len()),
                            msg: format!("missing `)` for `({label}`"),
                        })
                    }
                }
            }
        }
        Token::RParen => Err(DslError::Lex { loc, msg: "unexpected `)`".into() }),
        Token::Int(v) => {
            *pos += 1;
            Ok(Ludeme::Int { value: *v, loc })
        }
        Token::Str(s) => {
            *pos += 1;
            Ok(Ludeme::Str { value: s.clone(), loc })
        }
        Token::Atom(a) => {
            *pos += 1;
            if let Some(idx) = a.find(':') {
                let name = a[..idx].to_string();
                let rest = &a[idx + 1..];
                if name.is_empty() || rest.is_empty() || rest.contains(':') {
                    return Err(DslError::Lex { loc, msg: format!("malformed keyword `{a}`") });
                }
                let value = if let Ok(n) = rest.parse::<i64>() {
                    Ludeme::Int { value: n, loc }
                } else {
                    Ludeme::Word { value: rest.to_string(), loc }
                };
                Ok(Ludeme::Key { name, value: Box::new(value), loc })
            } else {
                Ok(Ludeme::Word { value: a.clone(), loc })
            }
        }
    }
}

/// Canonical single-line rendering; `parse_tree(print_tree(t))` equals `t`.
pub fn print_tree(tree: &Ludeme) -> String {
    tree.to_string()
}

// ---------------------------------------------------------------------------
// Lowering to GameRules
// ---------------------------------------------------------------------------

/// Parses a game description into rules for the engine.
pub fn parse_game(src: &str) -> Result<GameRules, DslError> {
    let tree = parse_tree(src)?;
    lower_game(&tree)
}

fn lower_game(tree: &Ludeme) -> Result<GameRules, DslError> {
    let (label, children, loc) = expect_node(tree)?;
    if label != "game" {
        return Err(DslError::UnknownLudeme { loc, label: label.to_string() });
    }
    let Some(Ludeme::Str { value: name, .. }) = children.first() else {
        return Err(DslError::Arity {
            loc,
            label: "game".into(),
            expected: "a quoted name as its first child".into(),
            found: children.len(),
        });
    };

    let mut board = None;
    let mut move_rule = None;
    let mut end_rules = Vec::new();
    let mut players_seen = false;

    for child in &children[1..] {
        let (clabel, cchildren, cloc) = expect_node(child)?;
        match clabel {
            "players" => {
                players_seen = true;
                match cchildren {
                    [Ludeme::Int { value: 2, .. }] => {}
                    [Ludeme::Int { value: n, loc, .. }] => {
                        return Err(DslError::Unsupported {
                            loc: *loc,
                            msg: format!("only 2-player games are supported, got {n}"),
                        })
                    }
                    _ => {
                        return Err(DslError::Arity {
                            loc: cloc,
                            label: "players".into(),
                            expected: "one integer".into(),
                            found: cchildren.len(),
                        })
                    }
                }
            }
            "board" => match cchildren {
                [spec] => board = Some(lower_board(spec)?),
                _ => {
                    return Err(DslError::Arity {
                        loc: cloc,
                        label: "board".into(),
                        expected: "one board spec".into(),
                        found: cchildren.len(),
                    })
                }
            },
            // Equipment is accepted for compatibility and otherwise ignored.
            "equipment" => {}
            "rules" => {
                for r in cchildren {
                    let (rlabel, rchildren, rloc) = expect_node(r)?;
                    match rlabel {
                        "moves" => match rchildren {
                            [m] => move_rule = Some(lower_move_rule(m)?),
                            _ => {
                                return Err(DslError::Arity {
                                    loc: rloc,
                                    label: "moves".into(),
                                    expected: "one move rule".into(),
                                    found: rchildren.len(),
                                })
                            }
                        },
                        "end" => {
                            if rchildren.is_empty() {
                                return Err(DslError::Arity {
                                    loc: rloc,
                                    label: "end".into(),
                                    expected: "at least one end rule".into(),
                                    found: 0,
                                });
                            }
                            for e in rchildren {
                                end_rules.push(lower_end_rule(e)?);
                            }
                        }
                        other => {
                            return Err(DslError::UnknownLudeme { loc: rloc, label: other.to_string() })
                        }
                    }
                }
            }
            other => return Err(DslError::UnknownLudeme { loc: cloc, label: other.to_string() }),
        }
    }

    if !players_seen {
        return Err(DslError::Arity {
            loc,
            label: "game".into(),
            expected: "a (players 2) block".into(),
            found: children.len(),
        });
    }
    let Some(board) = board else {
        return Err(DslError::Arity {
            loc,
            label: "game".into(),
            expected: "a (board ...) block".into(),
            found: children.len(),
        });
    };
    let Some(move_rule) = move_rule else {
        return Err(DslError::Arity {
            loc,
            label: "game".into(),
            expected: "a (moves ...) rule".into(),
            found: children.len(),
        });
    };
    if end_rules.is_empty() {
        return Err(DslError::Arity {
            loc,
            label: "game".into(),
            expected: "at least one end rule".into(),
            found: children.len(),
        });
    }

    Ok(GameRules {
        name: name.clone(),
        board,
        move_rule,
        end_rules,
        move_cap: MOVE_CAP,
    })
}

fn expect_node(tree: &Ludeme) -> Result<(&str, &[Ludeme], Loc), DslError> {
    match tree {
        Ludeme::Node { label, children, loc } => Ok((label, children, *loc)),
        other => Err(DslError::Unsupported {
            loc: other.loc(),
            msg: format!("expected a (...) form, found {}", other.describe()),
        }),
    }
}

fn positive_int(node: &Ludeme, what: &str) -> Result<u32, DslError> {
    match node {
        Ludeme::Int { value, loc } if *value >= 1 && *value <= u32::MAX as i64 => Ok(*value as u32),
        other => Err(DslError::Unsupported {
            loc: other.loc(),
            msg: format!("{what} must be a positive integer, found {}", other.describe()),
        }),
    }
}

fn lower_board(spec: &Ludeme) -> Result<BoardSpec, DslError> {
    let (label, children, loc) = expect_node(spec)?;
    match label {
        "square" => match children {
            [n] => {
                let n = positive_int(n, "board size")?;
                Ok(BoardSpec::Square { width: n, height: n })
            }
            [w, h] => Ok(BoardSpec::Square {
                width: positive_int(w, "board width")?,
                height: positive_int(h, "board height")?,
            }),
            _ => Err(DslError::Arity {
                loc,
                label: "square".into(),
                expected: "one or two integers".into(),
                found: children.len(),
            }),
        },
        "hex-rhombus" => match children {
            [n] => Ok(BoardSpec::HexRhombus { side: positive_int(n, "board size")? }),
            _ => Err(DslError::Arity {
                loc,
                label: "hex-rhombus".into(),
                expected: "one integer".into(),
                found: children.len(),
            }),
        },
        "hex-hexagon" => match children {
            [n] => Ok(BoardSpec::HexHexagon { side: positive_int(n, "board size")? }),
            _ => Err(DslError::Arity {
                loc,
                label: "hex-hexagon".into(),
                expected: "one integer".into(),
                found: children.len(),
            }),
        },
        other => Err(DslError::UnknownLudeme { loc, label: other.to_string() }),
    }
}

fn lower_move_rule(rule: &Ludeme) -> Result<MoveRule, DslError> {
    let (label, children, loc) = expect_node(rule)?;
    match label {
        "to" => {
            // (to Mover (empty))
            match children {
                [Ludeme::Word { value, .. }, inner] if value == "Mover" => {
                    let (ilabel, ichildren, iloc) = expect_node(inner)?;
                    if ilabel == "empty" && ichildren.is_empty() {
                        Ok(MoveRule::PlaceOnEmpty)
                    } else {
                        Err(DslError::Unsupported {
                            loc: iloc,
                            msg: format!("unsupported destination `{ilabel}`"),
                        })
                    }
                }
                _ => Err(DslError::Arity {
                    loc,
                    label: "to".into(),
                    expected: "`Mover (empty)`".into(),
                    found: children.len(),
                }),
            }
        }
        "step" => match children {
            [Ludeme::Word { value: dirs, loc: dloc }, Ludeme::Key { name, value, loc: kloc }] => {
                if dirs != "forward" {
                    return Err(DslError::Unsupported {
                        loc: *dloc,
                        msg: format!("unsupported step directions `{dirs}`"),
                    });
                }
                if name != "capture" {
                    return Err(DslError::Unsupported {
                        loc: *kloc,
                        msg: format!("unsupported step option `{name}`"),
                    });
                }
                match value.as_ref() {
                    Ludeme::Word { value: v, .. } if v == "diagonal" => {
                        Ok(MoveRule::StepForward { capture: CaptureMode::Diagonal })
                    }
                    other => Err(DslError::Unsupported {
                        loc: other.loc(),
                        msg: format!("unsupported capture mode {}", other.describe()),
                    }),
                }
            }
            _ => Err(DslError::Arity {
                loc,
                label: "step".into(),
                expected: "directions and capture:<mode>".into(),
                found: children.len(),
            }),
        },
        other => Err(DslError::UnknownLudeme { loc, label: other.to_string() }),
    }
}

fn lower_end_rule(rule: &Ludeme) -> Result<EndRule, DslError> {
    let (label, children, loc) = expect_node(rule)?;
    let expect_word = |node: &Ludeme, allowed: &[&str]| -> Result<String, DslError> {
        match node {
            Ludeme::Word { value, .. } if allowed.contains(&value.as_str()) => Ok(value.clone()),
            other => Err(DslError::Unsupported {
                loc: other.loc(),
                msg: format!("expected one of {allowed:?}, found {}", other.describe()),
            }),
        }
    };
    match label {
        "line" => match children {
            [Ludeme::Key { name, value, .. }, result] if name == "length" => {
                let length = positive_int(value, "line length")?;
                let result = match expect_word(result, &["win", "loss"])?.as_str() {
                    "win" => LineResult::Win,
                    _ => LineResult::Loss,
                };
                Ok(EndRule::Line { length, result })
            }
            _ => Err(DslError::Arity {
                loc,
                label: "line".into(),
                expected: "length:<k> and win|loss".into(),
                found: children.len(),
            }),
        },
        "reach-opposite" => match children {
            [w] => {
                expect_word(w, &["win"])?;
                Ok(EndRule::ReachOpposite)
            }
            _ => Err(DslError::Arity {
                loc,
                label: "reach-opposite".into(),
                expected: "`win`".into(),
                found: children.len(),
            }),
        },
        "connect-sides" => match children {
            [w] => {
                expect_word(w, &["win"])?;
                Ok(EndRule::ConnectSides)
            }
            _ => Err(DslError::Arity {
                loc,
                label: "connect-sides".into(),
                expected: "`win`".into(),
                found: children.len(),
            }),
        },
        "no-pieces" => match children {
            [w] => {
                expect_word(w, &["loss"])?;
                Ok(EndRule::NoPiecesLoss)
            }
            _ => Err(DslError::Arity {
                loc,
                label: "no-pieces".into(),
                expected: "`loss`".into(),
                found: children.len(),
            }),
        },
        other => Err(DslError::UnknownLudeme { loc, label: other.to_string() }),
    }
}

// ---------------------------------------------------------------------------
// Built-in games
// ---------------------------------------------------------------------------

const TICTACTOE: &str = r#"
(game "Tic-Tac-Toe"
  (players 2)
  (board (square 3))
  (equipment (piece "Disc") (piece "Cross"))
  (rules
    (moves (to Mover (empty)))
    (end (line length:3 win))))
"#;

const GOMOKU9: &str = r#"
(game "Gomoku"
  (players 2)
  (board (square 9))
  (rules
    (moves (to Mover (empty)))
    (end (line length:5 win))))
"#;

const GOMOKU15: &str = r#"
(game "Gomoku"
  (players 2)
  (board (square 15))
  (rules
    (moves (to Mover (empty)))
    (end (line length:5 win))))
"#;

const HEX7: &str = r#"
(game "Hex"
  (players 2)
  (board (hex-rhombus 7))
  (rules
    (moves (to Mover (empty)))
    (end (connect-sides win))))
"#;

const HEX11: &str = r#"
(game "Hex"
  (players 2)
  (board (hex-rhombus 11))
  (rules
    (moves (to Mover (empty)))
    (end (connect-sides win))))
"#;

const YAVALATH: &str = r#"
(game "Yavalath"
  (players 2)
  (board (hex-hexagon 5))
  (rules
    (moves (to Mover (empty)))
    (end (line length:4 win) (line length:3 loss))))
"#;

const BREAKTHROUGH6: &str = r#"
(game "Breakthrough"
  (players 2)
  (board (square 6))
  (rules
    (moves (step forward capture:diagonal))
    (end (reach-opposite win) (no-pieces loss))))
"#;

const BREAKTHROUGH8: &str = r#"
(game "Breakthrough"
  (players 2)
  (board (square 8))
  (rules
    (moves (step forward capture:diagonal))
    (end (reach-opposite win) (no-pieces loss))))
"#;

/// Built-in descriptions, name to source text, sorted by name.
pub fn builtin_games() -> &'static [(&'static str, &'static str)] {
    &[
        ("breakthrough6", BREAKTHROUGH6),
        ("breakthrough8", BREAKTHROUGH8),
        ("gomoku15", GOMOKU15),
        ("gomoku9", GOMOKU9),
        ("hex11", HEX11),
        ("hex7", HEX7),
        ("tictactoe", TICTACTOE),
        ("yavalath", YAVALATH),
    ]
}
