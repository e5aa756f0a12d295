//! Reference games and seeded random corpora for tests, benchmarks, and the
//! CLI's `compare --random` mode.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::game::{validate_game, Player, RawEntry, RawGame, StochasticGame};
use crate::markov::TransitionMatrix;
use crate::mdp::Mdp;

/// Three-state reference game: player one owns states 1-2 with two actions
/// each, player two owns state 3 with three actions.
pub fn example1() -> StochasticGame {
    let entries = vec![
        RawEntry { state: 1, a1: Some(1), a2: None, reward: 5.0, next: vec![0.5, 0.5, 0.0] },
        RawEntry { state: 1, a1: Some(2), a2: None, reward: 7.0, next: vec![0.0, 1.0, 0.0] },
        RawEntry { state: 2, a1: Some(1), a2: None, reward: 1.0, next: vec![1.0 / 3.0, 0.0, 2.0 / 3.0] },
        RawEntry { state: 2, a1: Some(2), a2: None, reward: 0.5, next: vec![0.0, 0.0, 1.0] },
        RawEntry { state: 3, a1: None, a2: Some(1), reward: 3.0, next: vec![0.0, 0.5, 0.5] },
        RawEntry { state: 3, a1: None, a2: Some(2), reward: 4.0, next: vec![1.0, 0.0, 0.0] },
        RawEntry { state: 3, a1: None, a2: Some(3), reward: 2.0, next: vec![0.5, 0.25, 0.25] },
    ];
    let raw = RawGame {
        states: 3,
        controller: vec![Player::One, Player::One, Player::Two],
        entries,
    };
    validate_game(&raw).expect("reference game is valid")
}

/// Four-state reference game: player one owns states 1-2, player two owns
/// states 3-4, two actions per controlled state.
pub fn example2() -> StochasticGame {
    let entries = vec![
        RawEntry { state: 1, a1: Some(1), a2: None, reward: 2.0, next: vec![0.5, 0.5, 0.0, 0.0] },
        RawEntry { state: 1, a1: Some(2), a2: None, reward: 3.0, next: vec![0.0, 1.0, 0.0, 0.0] },
        RawEntry { state: 2, a1: Some(1), a2: None, reward: 1.0, next: vec![1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0] },
        RawEntry { state: 2, a1: Some(2), a2: None, reward: 0.5, next: vec![0.0, 0.0, 1.0, 0.0] },
        RawEntry { state: 3, a1: None, a2: Some(1), reward: 5.0, next: vec![0.0, 0.0, 0.5, 0.5] },
        RawEntry { state: 3, a1: None, a2: Some(2), reward: 0.0, next: vec![0.0, 0.0, 1.0, 0.0] },
        RawEntry { state: 4, a1: None, a2: Some(1), reward: 11.0, next: vec![0.5, 0.0, 0.5, 0.0] },
        RawEntry { state: 4, a1: None, a2: Some(2), reward: 12.0, next: vec![1.0, 0.0, 0.0, 0.0] },
    ];
    let raw = RawGame {
        states: 4,
        controller: vec![Player::One, Player::One, Player::Two, Player::Two],
        entries,
    };
    validate_game(&raw).expect("reference game is valid")
}

#[derive(Debug, Clone)]
pub struct RandomGameParams {
    pub min_states: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub reward_lo: f64,
    pub reward_hi: f64,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        RandomGameParams {
            min_states: 1,
            max_states: 5,
            max_actions: 3,
            reward_lo: -10.0,
            reward_hi: 10.0,
        }
    }
}

/// A transition row with small-integer weights: deterministic with some
/// probability, otherwise a random support with rational entries. Zeros are
/// common, so reducible and periodic chains show up in the corpus.
fn random_row<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    if n == 1 || rng.gen_bool(0.3) {
        row[rng.gen_range(0..n)] = 1.0;
        return row;
    }
    let support = rng.gen_range(1..=n.min(4));
    let mut targets: Vec<usize> = (0..n).collect();
    targets.shuffle(rng);
    let weights: Vec<u32> = (0..support).map(|_| rng.gen_range(1..=4)).collect();
    let total: u32 = weights.iter().sum();
    for (t, w) in targets.into_iter().zip(weights) {
        row[t] = w as f64 / total as f64;
    }
    row
}

/// Draws a random perfect-information game.
pub fn random_game<R: Rng>(rng: &mut R, params: &RandomGameParams) -> StochasticGame {
    let n = rng.gen_range(params.min_states..=params.max_states);
    let controller: Vec<Player> =
        (0..n).map(|_| if rng.gen_bool(0.5) { Player::One } else { Player::Two }).collect();
    let mut entries = Vec::new();
    for s in 0..n {
        let actions = rng.gen_range(1..=params.max_actions);
        for a in 0..actions {
            let reward = rng.gen_range(params.reward_lo..params.reward_hi);
            let next = random_row(rng, n);
            let (a1, a2) = match controller[s] {
                Player::One => (Some(a + 1), None),
                Player::Two => (None, Some(a + 1)),
            };
            entries.push(RawEntry { state: s + 1, a1, a2, reward, next });
        }
    }
    let raw = RawGame { states: n, controller, entries };
    validate_game(&raw).expect("generated game is valid by construction")
}

/// Draws a random Markov matrix from a mix of constructions: dense rows,
/// permutations (periodic), closed-block reducible chains, absorbing-heavy
/// chains, and two-cycles.
pub fn random_markov_matrix<R: Rng>(rng: &mut R, max_states: usize) -> TransitionMatrix {
    let n = rng.gen_range(1..=max_states);
    let kind = rng.gen_range(0..5);
    let mut rows = Vec::with_capacity(n);
    match kind {
        0 => {
            for _ in 0..n {
                rows.push(random_row(rng, n));
            }
        }
        1 => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            for s in 0..n {
                let mut row = vec![0.0; n];
                row[order[s]] = 1.0;
                rows.push(row);
            }
        }
        2 => {
            // A closed block of k states; everything else may leak anywhere.
            let k = rng.gen_range(1..=n);
            for s in 0..n {
                if s < k {
                    let mut row = vec![0.0; n];
                    row[..k].copy_from_slice(&random_row(rng, k));
                    rows.push(row);
                } else {
                    rows.push(random_row(rng, n));
                }
            }
        }
        3 => {
            for s in 0..n {
                if rng.gen_bool(0.5) {
                    let mut row = vec![0.0; n];
                    row[s] = 1.0;
                    rows.push(row);
                } else {
                    rows.push(random_row(rng, n));
                }
            }
        }
        _ => {
            let mut s = 0;
            while s + 1 < n {
                let mut row = vec![0.0; n];
                row[s + 1] = 1.0;
                rows.push(row);
                let mut row = vec![0.0; n];
                row[s] = 1.0;
                rows.push(row);
                s += 2;
            }
            if s < n {
                rows.push(random_row(rng, n));
            }
        }
    }
    TransitionMatrix::new(rows).expect("generated rows are stochastic")
}

#[derive(Debug, Clone)]
pub struct RandomMdpParams {
    pub max_states: usize,
    pub max_actions: usize,
    /// Upper bound on the pure-policy count (action-count product).
    pub max_policies: usize,
    pub reward_lo: f64,
    pub reward_hi: f64,
}

impl Default for RandomMdpParams {
    fn default() -> Self {
        RandomMdpParams { max_states: 4, max_actions: 3, max_policies: 200, reward_lo: -10.0, reward_hi: 10.0 }
    }
}

/// Draws a random MDP, alternating orientation via the served player.
pub fn random_mdp<R: Rng>(rng: &mut R, params: &RandomMdpParams) -> Mdp {
    let n = rng.gen_range(1..=params.max_states);
    let mut actions = Vec::with_capacity(n);
    let mut product = 1usize;
    for _ in 0..n {
        let mut a = rng.gen_range(1..=params.max_actions);
        if product.saturating_mul(a) > params.max_policies {
            a = 1;
        }
        product *= a;
        actions.push(a);
    }
    let reward = actions
        .iter()
        .map(|&a| (0..a).map(|_| rng.gen_range(params.reward_lo..params.reward_hi)).collect())
        .collect();
    let transition = actions
        .iter()
        .map(|&a| (0..a).map(|_| random_row(rng, n)).collect())
        .collect();
    let player = if rng.gen_bool(0.5) { Player::One } else { Player::Two };
    Mdp { player, actions, reward, transition }
}
