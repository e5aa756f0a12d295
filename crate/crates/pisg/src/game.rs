//! Game model: validated perfect-information stochastic games and pure
//! stationary strategies.

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod format;

pub use format::{parse_game, serialize_game, FormatError, RawEntry, RawGame};

/// Row-sum tolerance for transition probability vectors.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// The two players. Player one maximizes the limiting-average reward,
/// player two minimizes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "P1")]
    One,
    #[serde(rename = "P2")]
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Player::One => write!(f, "P1"),
            Player::Two => write!(f, "P2"),
        }
    }
}

/// Validation errors for game descriptions. States and actions in messages
/// use the 1-indexed labels of the file format.
#[derive(Debug, Clone, Error)]
pub enum GameError {
    #[error("RowSumError state={state} action={action}: probabilities sum to {sum} (tolerance {ROW_SUM_TOL})")]
    RowSum { state: usize, action: usize, sum: f64 },
    #[error("NegativeProbability state={state} action={action} next={next}: {value}")]
    NegativeProbability { state: usize, action: usize, next: usize, value: f64 },
    #[error("PerfectInfoViolation state={state}: both players have at least two actions")]
    PerfectInfoViolation { state: usize },
    #[error("MissingEntry state={state} action={action}: no reward/transition record")]
    MissingEntry { state: usize, action: usize },
    #[error("DuplicateEntry state={state} action={action}: record appears more than once")]
    DuplicateEntry { state: usize, action: usize },
    #[error("state label {state} out of range 1..={num_states}")]
    StateOutOfRange { state: usize, num_states: usize },
    #[error("controller list has {got} entries, expected {expected}")]
    ControllerLength { got: usize, expected: usize },
    #[error("state {state}: transition vector has {got} entries, expected {expected}")]
    NextLength { state: usize, got: usize, expected: usize },
    #[error("state {state}: entry carries an action for the dummy player (label {action} > 1)")]
    DummyAction { state: usize, action: usize },
    #[error("state {state}: entry for the controlling player is missing its action label")]
    NoAction { state: usize },
    #[error("reward at state={state} action={action} is not finite")]
    NonFiniteReward { state: usize, action: usize },
    #[error("games need at least one state")]
    NoStates,
}

/// A validated perfect-information stochastic game.
///
/// States are 0-indexed internally. Each state is controlled by exactly one
/// player; the opponent is a dummy with a single action there, so action
/// pairs are indexed `(i, j)` with the dummy index pinned to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticGame {
    num_states: usize,
    controller: Vec<Player>,
    actions_p1: Vec<usize>,
    actions_p2: Vec<usize>,
    /// reward[s][i][j]
    reward: Vec<Vec<Vec<f64>>>,
    /// transition[s][i][j][s']
    transition: Vec<Vec<Vec<Vec<f64>>>>,
}

impl StochasticGame {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn controller(&self, state: usize) -> Player {
        self.controller[state]
    }

    pub fn controllers(&self) -> &[Player] {
        &self.controller
    }

    /// Number of actions for `player` in `state` (1 where the player is a dummy).
    pub fn num_actions(&self, player: Player, state: usize) -> usize {
        match player {
            Player::One => self.actions_p1[state],
            Player::Two => self.actions_p2[state],
        }
    }

    pub fn reward(&self, state: usize, i: usize, j: usize) -> f64 {
        self.reward[state][i][j]
    }

    /// Transition law q(.|state, i, j) as a probability vector over states.
    pub fn transition(&self, state: usize, i: usize, j: usize) -> &[f64] {
        &self.transition[state][i][j]
    }

    /// Total pure stationary strategy count for `player` (product of action
    /// counts over controlled states).
    pub fn strategy_count(&self, player: Player) -> usize {
        (0..self.num_states)
            .filter(|&s| self.controller[s] == player)
            .map(|s| self.num_actions(player, s))
            .product()
    }
}

/// A pure stationary strategy: one action index per state for one player.
/// In states where the player is a dummy the index is forced to 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PureStationaryStrategy {
    pub player: Player,
    pub choice: Vec<usize>,
}

impl PureStationaryStrategy {
    /// Checks action indices against the game's action counts.
    pub fn is_valid_for(&self, game: &StochasticGame) -> bool {
        self.choice.len() == game.num_states()
            && (0..game.num_states()).all(|s| {
                if game.controller(s) == self.player {
                    self.choice[s] < game.num_actions(self.player, s)
                } else {
                    self.choice[s] == 0
                }
            })
    }

    /// 1-indexed action labels, as used by the file format and reports.
    pub fn labels(&self) -> Vec<usize> {
        self.choice.iter().map(|&a| a + 1).collect()
    }
}

/// Validates a raw game description into a [`StochasticGame`].
pub fn validate_game(raw: &RawGame) -> Result<StochasticGame, GameError> {
    let z1 = raw.states;
    if z1 == 0 {
        return Err(GameError::NoStates);
    }
    if raw.controller.len() != z1 {
        return Err(GameError::ControllerLength { got: raw.controller.len(), expected: z1 });
    }

    // First pass: discover per-state action counts from the entry records.
    let mut max_action = vec![0usize; z1];
    for entry in &raw.entries {
        if entry.state == 0 || entry.state > z1 {
            return Err(GameError::StateOutOfRange { state: entry.state, num_states: z1 });
        }
        let s = entry.state - 1;
        let owner = raw.controller[s];
        let (own, other) = match owner {
            Player::One => (entry.a1, entry.a2),
            Player::Two => (entry.a2, entry.a1),
        };
        if let Some(a) = other {
            if a != 1 {
                // A second action label on the dummy side means both players
                // would have >= 2 actions in this state.
                if a >= 2 {
                    return Err(GameError::PerfectInfoViolation { state: entry.state });
                }
                return Err(GameError::DummyAction { state: entry.state, action: a });
            }
        }
        let a = own.ok_or(GameError::NoAction { state: entry.state })?;
        if a == 0 {
            return Err(GameError::NoAction { state: entry.state });
        }
        max_action[s] = max_action[s].max(a);
    }

    let mut reward = Vec::with_capacity(z1);
    let mut transition = Vec::with_capacity(z1);
    let mut seen: Vec<Vec<bool>> = max_action.iter().map(|&m| vec![false; m]).collect();
    for s in 0..z1 {
        if max_action[s] == 0 {
            return Err(GameError::MissingEntry { state: s + 1, action: 1 });
        }
        let (m, n) = match raw.controller[s] {
            Player::One => (max_action[s], 1),
            Player::Two => (1, max_action[s]),
        };
        reward.push(vec![vec![0.0; n]; m]);
        transition.push(vec![vec![vec![0.0; z1]; n]; m]);
    }

    for entry in &raw.entries {
        let s = entry.state - 1;
        let owner = raw.controller[s];
        let own = match owner {
            Player::One => entry.a1,
            Player::Two => entry.a2,
        }
        .expect("checked in first pass");
        let a = own - 1;
        if seen[s][a] {
            return Err(GameError::DuplicateEntry { state: entry.state, action: own });
        }
        seen[s][a] = true;

        if entry.next.len() != z1 {
            return Err(GameError::NextLength { state: entry.state, got: entry.next.len(), expected: z1 });
        }
        if !entry.reward.is_finite() {
            return Err(GameError::NonFiniteReward { state: entry.state, action: own });
        }
        let mut sum = 0.0;
        for (t, &p) in entry.next.iter().enumerate() {
            if p < 0.0 || !p.is_finite() {
                return Err(GameError::NegativeProbability {
                    state: entry.state,
                    action: own,
                    next: t + 1,
                    value: p,
                });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(GameError::RowSum { state: entry.state, action: own, sum });
        }
        let (i, j) = match owner {
            Player::One => (a, 0),
            Player::Two => (0, a),
        };
        reward[s][i][j] = entry.reward;
        transition[s][i][j].copy_from_slice(&entry.next);
    }

    for s in 0..z1 {
        if let Some(a) = seen[s].iter().position(|&x| !x) {
            return Err(GameError::MissingEntry { state: s + 1, action: a + 1 });
        }
    }

    let actions_p1 = (0..z1)
        .map(|s| if raw.controller[s] == Player::One { max_action[s] } else { 1 })
        .collect();
    let actions_p2 = (0..z1)
        .map(|s| if raw.controller[s] == Player::Two { max_action[s] } else { 1 })
        .collect();

    Ok(StochasticGame {
        num_states: z1,
        controller: raw.controller.clone(),
        actions_p1,
        actions_p2,
        reward,
        transition,
    })
}

/// Enumerates all pure stationary strategies of `player`, in lexicographic
/// order of per-state action indices (the last controlled state varies
/// fastest). States where the player is a dummy are pinned to action 0.
pub fn enumerate_pure_strategies(game: &StochasticGame, player: Player) -> Vec<PureStationaryStrategy> {
    let controlled: Vec<usize> = (0..game.num_states())
        .filter(|&s| game.controller(s) == player)
        .collect();
    let total: usize = controlled.iter().map(|&s| game.num_actions(player, s)).product();

    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; controlled.len()];
    loop {
        let mut choice = vec![0usize; game.num_states()];
        for (pos, &s) in controlled.iter().enumerate() {
            choice[s] = digits[pos];
        }
        out.push(PureStationaryStrategy { player, choice });

        // Odometer increment, last controlled state least significant.
        let mut pos = controlled.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < game.num_actions(player, controlled[pos]) {
                break;
            }
            digits[pos] = 0;
        }
    }
}
