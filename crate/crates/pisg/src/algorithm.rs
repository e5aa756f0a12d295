//! The best-response policy-improvement loop, saddle verification against
//! pure unilateral deviations, and a seeded play simulator.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{enumerate_pure_strategies, Player, PureStationaryStrategy, StochasticGame};
use crate::markov::{undiscounted_value, MarkovError};
use crate::mdp::{reduce_to_mdp, solve_average_optimal, MdpError};

/// Tolerance for gain-vector comparisons (convergence and verification).
pub const GAIN_TOL: f64 = 1e-6;

/// Default iteration cap for [`best_response_iteration`].
pub const DEFAULT_MAX_ITER: usize = 1000;

#[derive(Debug, Error)]
pub enum AlgorithmError {
    #[error("IterationCapExceeded after {} rounds", .0.rounds.len())]
    IterationCapExceeded(Box<IterationTrace>),
    #[error("CycleDetected after {} rounds: strategy pair repeated", .0.rounds.len())]
    CycleDetected(Box<IterationTrace>),
    #[error("initial strategy is not valid for player two in this game")]
    BadInitialStrategy,
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Starting point for the iteration: an explicit player-two strategy or a
/// seeded random one.
#[derive(Debug, Clone)]
pub enum InitialStrategy {
    Given(PureStationaryStrategy),
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    Converged,
    CycleDetected,
    IterationCap,
}

/// One round k of the loop: player two's current strategy, player one's best
/// response, both LP objectives and gain vectors.
#[derive(Debug, Clone)]
pub struct Round {
    pub g: PureStationaryStrategy,
    pub f: PureStationaryStrategy,
    /// Beta-weighted optimum of player one's MDP against `g`.
    pub p1_objective: f64,
    /// Beta-weighted optimum of player two's response MDP against `f`.
    pub p2_objective: f64,
    /// Gain vector of the pair (f, g).
    pub gain: Vec<f64>,
    /// Gain vector of player two's best response against `f`.
    pub response_gain: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub rounds: Vec<Round>,
    pub termination: TerminationReason,
}

/// A deviation that beats the candidate pair at some initial state.
#[derive(Debug, Clone)]
pub struct DeviationViolation {
    pub player: Player,
    pub strategy: PureStationaryStrategy,
    pub state: usize,
    /// By how much the deviation improves on the candidate value.
    pub amount: f64,
}

/// Outcome of checking a pair against every pure unilateral deviation.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub passed: bool,
    /// Value vector of the candidate pair.
    pub value: Vec<f64>,
    /// Per initial state: no deviation improves there.
    pub state_ok: Vec<bool>,
    pub worst: Option<DeviationViolation>,
    pub deviations_checked: usize,
}

/// The solved game: the strategy pair, its value vector, the verification
/// outcome, and (for the iterative pipeline) the round-by-round trace.
#[derive(Debug, Clone)]
pub struct SolutionReport {
    pub f_star: PureStationaryStrategy,
    pub g_star: PureStationaryStrategy,
    pub value: Vec<f64>,
    pub verification: VerificationReport,
    pub trace: Option<IterationTrace>,
}

/// Draws a uniformly random pure strategy for `player`.
pub fn random_strategy(game: &StochasticGame, player: Player, seed: u64) -> PureStationaryStrategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let choice = (0..game.num_states())
        .map(|s| {
            if game.controller(s) == player {
                rng.gen_range(0..game.num_actions(player, s))
            } else {
                0
            }
        })
        .collect();
    PureStationaryStrategy { player, choice }
}

/// Runs the alternating best-response loop: player one solves the
/// average-optimality LP of the game with `g_k` frozen; if `g_k` is already
/// average optimal against that response (gain vectors agree within
/// [`GAIN_TOL`]) the loop stops, otherwise player two's best response becomes
/// `g_{k+1}`. Every visited pair is recorded; a repeated pair terminates the
/// run with [`AlgorithmError::CycleDetected`]. On convergence the returned
/// report embeds a full [`VerificationReport`].
pub fn best_response_iteration(
    game: &StochasticGame,
    initial: InitialStrategy,
    max_iter: usize,
    beta: &[f64],
) -> Result<SolutionReport, AlgorithmError> {
    let mut g = match initial {
        InitialStrategy::Given(g) => {
            if g.player != Player::Two || !g.is_valid_for(game) {
                return Err(AlgorithmError::BadInitialStrategy);
            }
            g
        }
        InitialStrategy::Random { seed } => random_strategy(game, Player::Two, seed),
    };

    let mut visited: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    let mut rounds: Vec<Round> = Vec::new();

    for _ in 0..max_iter {
        let response_one = solve_average_optimal(&reduce_to_mdp(game, &g), beta)?;
        let f = response_one.policy;

        if !visited.insert((f.choice.clone(), g.choice.clone())) {
            return Err(AlgorithmError::CycleDetected(Box::new(IterationTrace {
                rounds,
                termination: TerminationReason::CycleDetected,
            })));
        }

        let response_two = solve_average_optimal(&reduce_to_mdp(game, &f), beta)?;

        let converged = response_one
            .gain
            .iter()
            .zip(&response_two.gain)
            .all(|(a, b)| (a - b).abs() <= GAIN_TOL);

        rounds.push(Round {
            g: g.clone(),
            f: f.clone(),
            p1_objective: response_one.objective,
            p2_objective: response_two.objective,
            gain: response_one.gain.clone(),
            response_gain: response_two.gain.clone(),
        });

        if converged {
            let trace = IterationTrace { rounds, termination: TerminationReason::Converged };
            let verification = verify_optimality(game, &f, &g)?;
            let value = verification.value.clone();
            return Ok(SolutionReport { f_star: f, g_star: g, value, verification, trace: Some(trace) });
        }
        g = response_two.policy;
    }

    Err(AlgorithmError::IterationCapExceeded(Box::new(IterationTrace {
        rounds,
        termination: TerminationReason::IterationCap,
    })))
}

/// Checks the saddle inequalities over all pure unilateral deviations:
/// no pure f may beat `f_star` against `g_star`, and no pure g may push the
/// value below `g_star`'s, at any initial state, beyond [`GAIN_TOL`].
pub fn verify_optimality(
    game: &StochasticGame,
    f_star: &PureStationaryStrategy,
    g_star: &PureStationaryStrategy,
) -> Result<VerificationReport, MarkovError> {
    #[cfg(feature = "parallel")]
    {
        verify_optimality_par(game, f_star, g_star)
    }
    #[cfg(not(feature = "parallel"))]
    {
        verify_optimality_seq(game, f_star, g_star)
    }
}

fn deviation_list(game: &StochasticGame) -> Vec<PureStationaryStrategy> {
    let mut deviations = enumerate_pure_strategies(game, Player::One);
    deviations.extend(enumerate_pure_strategies(game, Player::Two));
    deviations
}

/// Signed improvement of `deviation` over `value` per state (positive means
/// the deviating player gains).
fn deviation_margins(
    game: &StochasticGame,
    f_star: &PureStationaryStrategy,
    g_star: &PureStationaryStrategy,
    value: &[f64],
    deviation: &PureStationaryStrategy,
) -> Result<Vec<f64>, MarkovError> {
    let deviated = match deviation.player {
        Player::One => undiscounted_value(game, deviation, g_star)?,
        Player::Two => undiscounted_value(game, f_star, deviation)?,
    };
    Ok(deviated
        .iter()
        .zip(value)
        .map(|(dev, v)| match deviation.player {
            Player::One => dev - v,
            Player::Two => v - dev,
        })
        .collect())
}

fn merge_verification(
    value: Vec<f64>,
    deviations: Vec<PureStationaryStrategy>,
    margins: Vec<Vec<f64>>,
) -> VerificationReport {
    let n = value.len();
    let mut state_ok = vec![true; n];
    let mut worst: Option<DeviationViolation> = None;
    for (deviation, margin) in deviations.iter().zip(&margins) {
        for (s, &m) in margin.iter().enumerate() {
            if m > GAIN_TOL {
                state_ok[s] = false;
                if worst.as_ref().map_or(true, |w| m > w.amount) {
                    worst = Some(DeviationViolation {
                        player: deviation.player,
                        strategy: deviation.clone(),
                        state: s,
                        amount: m,
                    });
                }
            }
        }
    }
    VerificationReport {
        passed: worst.is_none(),
        value,
        state_ok,
        worst,
        deviations_checked: deviations.len(),
    }
}

pub fn verify_optimality_seq(
    game: &StochasticGame,
    f_star: &PureStationaryStrategy,
    g_star: &PureStationaryStrategy,
) -> Result<VerificationReport, MarkovError> {
    let value = undiscounted_value(game, f_star, g_star)?;
    let deviations = deviation_list(game);
    let margins = deviations
        .iter()
        .map(|d| deviation_margins(game, f_star, g_star, &value, d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_verification(value, deviations, margins))
}

#[cfg(feature = "parallel")]
pub fn verify_optimality_par(
    game: &StochasticGame,
    f_star: &PureStationaryStrategy,
    g_star: &PureStationaryStrategy,
) -> Result<VerificationReport, MarkovError> {
    use rayon::prelude::*;

    let value = undiscounted_value(game, f_star, g_star)?;
    let deviations = deviation_list(game);
    let margins = deviations
        .par_iter()
        .map(|d| deviation_margins(game, f_star, g_star, &value, d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_verification(value, deviations, margins))
}

/// Simulates `horizon` steps of play under a pure pair from `start_state`
/// with a seeded generator and returns the empirical average reward.
/// Bit-reproducible for a fixed seed.
pub fn simulate_play(
    game: &StochasticGame,
    f: &PureStationaryStrategy,
    g: &PureStationaryStrategy,
    start_state: usize,
    horizon: usize,
    seed: u64,
) -> f64 {
    assert!(horizon >= 1, "horizon must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = start_state;
    let mut total = 0.0;
    for _ in 0..horizon {
        let (i, j) = (f.choice[state], g.choice[state]);
        total += game.reward(state, i, j);
        let row = game.transition(state, i, j);
        let mut u: f64 = rng.gen();
        state = row.len() - 1;
        for (t, &p) in row.iter().enumerate() {
            if u < p {
                state = t;
                break;
            }
            u -= p;
        }
    }
    total / horizon as f64
}
