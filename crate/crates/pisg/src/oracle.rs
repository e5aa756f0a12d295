//! Exhaustive-enumeration ground truth: payoff matrices over all pure
//! stationary strategy pairs, pure saddle points, the 2x2 saddle criterion,
//! and assembly of a single stationary pair from per-state saddles.

use thiserror::Error;

use crate::algorithm::{verify_optimality, SolutionReport};
use crate::game::{enumerate_pure_strategies, Player, PureStationaryStrategy, StochasticGame};
use crate::markov::{evaluate_pair, MarkovError};

/// Tie tolerance for saddle tests, tighter than the cross-pipeline 1e-6 so
/// floating-point ties never mask a genuine saddle.
pub const SADDLE_TOL: f64 = 1e-9;

/// Default cap on the number of strategy-pair evaluations.
pub const DEFAULT_EVALUATION_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("SizeLimit: {required} strategy-pair evaluations exceed the cap {cap}")]
    SizeLimit { required: usize, cap: usize },
    #[error("NoPureSaddle at initial state {initial_state} ({rows}x{cols} matrix)")]
    NoPureSaddle { initial_state: usize, rows: usize, cols: usize, matrix: Box<PayoffMatrix> },
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Limiting-average payoffs phi(initial_state, f_i, g_j) over every pure
/// stationary strategy pair, rows indexed by player one's strategies.
#[derive(Debug, Clone)]
pub struct PayoffMatrix {
    pub initial_state: usize,
    pub row_strategies: Vec<PureStationaryStrategy>,
    pub col_strategies: Vec<PureStationaryStrategy>,
    pub values: Vec<Vec<f64>>,
}

/// A located pure saddle point: the entry is the maximum of its column and
/// the minimum of its row (player one picks rows and maximizes).
#[derive(Debug, Clone, Copy)]
pub struct SaddleCertificate {
    pub row: usize,
    pub col: usize,
    pub value: f64,
    /// Smallest margin by which the row-min/col-max conditions hold; zero
    /// under ties, infinite when the matrix has no competing entries.
    pub slack: f64,
}

/// Value vectors of every pure strategy pair, evaluated once per pair (the
/// Cesàro matrix does not depend on the initial state, so all initial states
/// share one chain solve).
#[derive(Debug, Clone)]
pub struct PairValues {
    pub row_strategies: Vec<PureStationaryStrategy>,
    pub col_strategies: Vec<PureStationaryStrategy>,
    /// values[i][j][s] = phi(s, f_i, g_j)
    pub values: Vec<Vec<Vec<f64>>>,
}

impl PairValues {
    /// The payoff matrix seen from one initial state.
    pub fn matrix_for(&self, initial_state: usize) -> PayoffMatrix {
        PayoffMatrix {
            initial_state,
            row_strategies: self.row_strategies.clone(),
            col_strategies: self.col_strategies.clone(),
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v[initial_state]).collect())
                .collect(),
        }
    }
}

/// Evaluates every pure strategy pair, honoring `cap` on the number of chain
/// solves. Parallel when the `parallel` feature is on.
pub fn evaluate_all_pairs(game: &StochasticGame, cap: usize) -> Result<PairValues, OracleError> {
    #[cfg(feature = "parallel")]
    {
        evaluate_all_pairs_par(game, cap)
    }
    #[cfg(not(feature = "parallel"))]
    {
        evaluate_all_pairs_seq(game, cap)
    }
}

fn pair_lists(
    game: &StochasticGame,
    cap: usize,
) -> Result<(Vec<PureStationaryStrategy>, Vec<PureStationaryStrategy>), OracleError> {
    let required = game.strategy_count(Player::One) * game.strategy_count(Player::Two);
    if required > cap {
        return Err(OracleError::SizeLimit { required, cap });
    }
    Ok((
        enumerate_pure_strategies(game, Player::One),
        enumerate_pure_strategies(game, Player::Two),
    ))
}

pub fn evaluate_all_pairs_seq(game: &StochasticGame, cap: usize) -> Result<PairValues, OracleError> {
    let (fs, gs) = pair_lists(game, cap)?;
    let values = fs
        .iter()
        .map(|f| {
            gs.iter()
                .map(|g| Ok(evaluate_pair(game, f, g)?.value))
                .collect::<Result<Vec<_>, MarkovError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PairValues { row_strategies: fs, col_strategies: gs, values })
}

#[cfg(feature = "parallel")]
pub fn evaluate_all_pairs_par(game: &StochasticGame, cap: usize) -> Result<PairValues, OracleError> {
    use rayon::prelude::*;

    let (fs, gs) = pair_lists(game, cap)?;
    let flat = (0..fs.len() * gs.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / gs.len(), idx % gs.len());
            Ok(evaluate_pair(game, &fs[i], &gs[j])?.value)
        })
        .collect::<Result<Vec<_>, MarkovError>>()?;
    let mut values = Vec::with_capacity(fs.len());
    let mut it = flat.into_iter();
    for _ in 0..fs.len() {
        values.push(it.by_ref().take(gs.len()).collect());
    }
    Ok(PairValues { row_strategies: fs, col_strategies: gs, values })
}

/// Payoff matrix for one initial state over all pure pairs.
pub fn payoff_matrix(
    game: &StochasticGame,
    initial_state: usize,
    cap: usize,
) -> Result<PayoffMatrix, OracleError> {
    Ok(evaluate_all_pairs(game, cap)?.matrix_for(initial_state))
}

/// Finds a pure saddle point within [`SADDLE_TOL`], returning the
/// lexicographically first (row, col) among ties. Every validated
/// perfect-information game has one; absence is reported as an error for
/// inspection, never silently.
pub fn find_pure_saddle(matrix: &PayoffMatrix) -> Result<SaddleCertificate, OracleError> {
    let rows = matrix.values.len();
    let cols = matrix.values.first().map_or(0, Vec::len);
    let row_min: Vec<f64> = matrix.values.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let mut col_max = vec![f64::NEG_INFINITY; cols];
    for row in &matrix.values {
        for (j, &v) in row.iter().enumerate() {
            col_max[j] = col_max[j].max(v);
        }
    }
    for i in 0..rows {
        for j in 0..cols {
            let v = matrix.values[i][j];
            if v <= row_min[i] + SADDLE_TOL && v >= col_max[j] - SADDLE_TOL {
                let row_margin = (0..cols)
                    .filter(|&j2| j2 != j)
                    .map(|j2| matrix.values[i][j2] - v)
                    .fold(f64::INFINITY, f64::min);
                let col_margin = (0..rows)
                    .filter(|&i2| i2 != i)
                    .map(|i2| v - matrix.values[i2][j])
                    .fold(f64::INFINITY, f64::min);
                return Ok(SaddleCertificate { row: i, col: j, value: v, slack: row_margin.min(col_margin) });
            }
        }
    }
    Err(OracleError::NoPureSaddle {
        initial_state: matrix.initial_state,
        rows,
        cols,
        matrix: Box::new(matrix.clone()),
    })
}

/// A 2x2 submatrix without a pure saddle point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaddleFreeSubmatrix {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

/// Checks every 2x2 submatrix for a pure saddle point and reports the ones
/// that lack it. Empty on payoff matrices of valid perfect-information games.
pub fn check_shapley_2x2(matrix: &PayoffMatrix) -> Vec<SaddleFreeSubmatrix> {
    let rows = matrix.values.len();
    let cols = matrix.values.first().map_or(0, Vec::len);
    let mut violations = Vec::new();
    for r1 in 0..rows {
        for r2 in r1 + 1..rows {
            for c1 in 0..cols {
                for c2 in c1 + 1..cols {
                    let sub = [
                        [matrix.values[r1][c1], matrix.values[r1][c2]],
                        [matrix.values[r2][c1], matrix.values[r2][c2]],
                    ];
                    if !has_saddle_2x2(&sub) {
                        violations.push(SaddleFreeSubmatrix { rows: (r1, r2), cols: (c1, c2) });
                    }
                }
            }
        }
    }
    violations
}

fn has_saddle_2x2(sub: &[[f64; 2]; 2]) -> bool {
    for i in 0..2 {
        for j in 0..2 {
            let v = sub[i][j];
            let row_min = v <= sub[i][1 - j] + SADDLE_TOL;
            let col_max = v >= sub[1 - i][j] - SADDLE_TOL;
            if row_min && col_max {
                return true;
            }
        }
    }
    false
}

/// Builds one stationary pair from per-initial-state saddle pairs by taking
/// each pair's choice in its own initial state. Optimality of the assembled
/// pair for every initial state is a downstream check, not assumed here.
pub fn assemble_pair_from_rows(
    game: &StochasticGame,
    per_state_pairs: &[(PureStationaryStrategy, PureStationaryStrategy)],
) -> (PureStationaryStrategy, PureStationaryStrategy) {
    assert_eq!(per_state_pairs.len(), game.num_states());
    let f_choice = per_state_pairs.iter().enumerate().map(|(t, (f, _))| f.choice[t]).collect();
    let g_choice = per_state_pairs.iter().enumerate().map(|(t, (_, g))| g.choice[t]).collect();
    (
        PureStationaryStrategy { player: Player::One, choice: f_choice },
        PureStationaryStrategy { player: Player::Two, choice: g_choice },
    )
}

/// Full enumeration pipeline: payoff matrix and saddle per initial state,
/// pair assembly, and verification. The value vector collects the per-state
/// saddle values.
pub fn solve_by_enumeration(game: &StochasticGame, cap: usize) -> Result<SolutionReport, OracleError> {
    let pairs = evaluate_all_pairs(game, cap)?;
    let mut per_state = Vec::with_capacity(game.num_states());
    let mut value = Vec::with_capacity(game.num_states());
    for s in 0..game.num_states() {
        let matrix = pairs.matrix_for(s);
        let saddle = find_pure_saddle(&matrix)?;
        value.push(saddle.value);
        per_state.push((
            pairs.row_strategies[saddle.row].clone(),
            pairs.col_strategies[saddle.col].clone(),
        ));
    }
    let (f_star, g_star) = assemble_pair_from_rows(game, &per_state);
    let verification = verify_optimality(game, &f_star, &g_star)?;
    Ok(SolutionReport { f_star, g_star, value, verification, trace: None })
}
