//! Text format for game files (TOML).
//!
//! ```toml
//! states = 3
//! controller = ["P1", "P1", "P2"]
//!
//! [[entries]]
//! state = 1        # 1-indexed state label
//! a1 = 1           # acting player's 1-indexed action (a2 for P2 states)
//! reward = 5.0
//! next = ["1/2", "1/2", "0"]   # decimals or "p/q" rationals
//! ```
//!
//! The dummy player's action field may be omitted. See `docs/game-format.md`
//! for the full schema.

use serde::Deserialize;
use thiserror::Error;

use super::{validate_game, GameError, Player, StochasticGame};

#[derive(Debug, Clone, Error)]
pub enum FormatError {
    #[error("SyntaxError line={line} column={column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("bad number {text:?}: {reason}")]
    Number { text: String, reason: String },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// An unvalidated game description, as decoded from a game file.
#[derive(Debug, Clone)]
pub struct RawGame {
    pub states: usize,
    pub controller: Vec<Player>,
    pub entries: Vec<RawEntry>,
}

/// One (state, action) record: its reward and transition row.
#[derive(Debug, Clone)]
pub struct RawEntry {
    /// 1-indexed state label.
    pub state: usize,
    /// Player one's 1-indexed action label, if present.
    pub a1: Option<usize>,
    /// Player two's 1-indexed action label, if present.
    pub a2: Option<usize>,
    pub reward: f64,
    pub next: Vec<f64>,
}

#[derive(Deserialize)]
struct FileGame {
    states: usize,
    controller: Vec<Player>,
    #[serde(default)]
    entries: Vec<FileEntry>,
}

#[derive(Deserialize)]
struct FileEntry {
    state: usize,
    a1: Option<usize>,
    a2: Option<usize>,
    reward: Num,
    next: Vec<Num>,
}

/// A number literal: TOML integer/float, or a string holding a decimal or a
/// "p/q" rational.
#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    fn to_f64(&self) -> Result<f64, FormatError> {
        match self {
            Num::Int(i) => Ok(*i as f64),
            Num::Float(x) => Ok(*x),
            Num::Text(t) => parse_number(t),
        }
    }
}

/// Parses a decimal string or a "p/q" rational into a double.
pub fn parse_number(text: &str) -> Result<f64, FormatError> {
    let bad = |reason: &str| FormatError::Number { text: text.to_string(), reason: reason.to_string() };
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let p: f64 = num.trim().parse().map_err(|_| bad("numerator is not a number"))?;
        let q: f64 = den.trim().parse().map_err(|_| bad("denominator is not a number"))?;
        if q == 0.0 {
            return Err(bad("division by zero"));
        }
        Ok(p / q)
    } else {
        t.parse().map_err(|_| bad("not a decimal number"))
    }
}

/// Parses game-file text and validates the result.
pub fn parse_game(text: &str) -> Result<StochasticGame, FormatError> {
    let file: FileGame = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| position_of(text, span.start))
            .unwrap_or((0, 0));
        FormatError::Syntax { line, column, message: e.message().to_string() }
    })?;

    let mut entries = Vec::with_capacity(file.entries.len());
    for fe in &file.entries {
        let next = fe.next.iter().map(Num::to_f64).collect::<Result<Vec<_>, _>>()?;
        entries.push(RawEntry {
            state: fe.state,
            a1: fe.a1,
            a2: fe.a2,
            reward: fe.reward.to_f64()?,
            next,
        });
    }
    let raw = RawGame { states: file.states, controller: file.controller, entries };
    Ok(validate_game(&raw)?)
}

fn position_of(text: &str, byte: usize) -> (usize, usize) {
    let prefix = &text[..byte.min(text.len())];
    let line = prefix.bytes().filter(|&b| b == b'\n').count() + 1;
    let column = prefix.bytes().rev().take_while(|&b| b != b'\n').count() + 1;
    (line, column)
}

/// Serializes a game back to file text. Probabilities and rewards are written
/// as shortest round-tripping decimals, so `parse_game(serialize_game(g)) == g`
/// bit-exactly.
pub fn serialize_game(game: &StochasticGame) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    writeln!(out, "states = {}", game.num_states()).unwrap();
    let tags: Vec<String> = game.controllers().iter().map(|c| format!("\"{c}\"")).collect();
    writeln!(out, "controller = [{}]", tags.join(", ")).unwrap();

    for s in 0..game.num_states() {
        let owner = game.controller(s);
        for a in 0..game.num_actions(owner, s) {
            let (i, j) = match owner {
                Player::One => (a, 0),
                Player::Two => (0, a),
            };
            writeln!(out).unwrap();
            writeln!(out, "[[entries]]").unwrap();
            writeln!(out, "state = {}", s + 1).unwrap();
            match owner {
                Player::One => writeln!(out, "a1 = {}", a + 1).unwrap(),
                Player::Two => writeln!(out, "a2 = {}", a + 1).unwrap(),
            }
            writeln!(out, "reward = {:?}", game.reward(s, i, j)).unwrap();
            let row: Vec<String> = game.transition(s, i, j).iter().map(|p| format!("{p:?}")).collect();
            writeln!(out, "next = [{}]", row.join(", ")).unwrap();
        }
    }
    out
}
