//! Solver library for zero-sum two-person perfect-information stochastic
//! games (PISGs) under the limiting-average (undiscounted) payoff criterion.
//!
//! A PISG assigns each state to exactly one player; the other player is a
//! dummy there with a single action. Such games admit optimal pure
//! stationary strategies, and this crate computes them two independent ways:
//!
//! * [`algorithm::best_response_iteration`] — the policy-improvement loop in
//!   which each player alternately solves the average-optimality linear
//!   program of their induced Markov decision process,
//! * [`oracle::solve_by_enumeration`] — exhaustive evaluation of every pure
//!   stationary strategy pair followed by a pure saddle-point search.
//!
//! The two pipelines cross-check each other; `verify_optimality` confirms any
//! candidate pair against all pure unilateral deviations.
//!
//! With the default `parallel` feature, payoff-matrix fills and deviation
//! checks fan out over a rayon thread pool; disabling the feature yields a
//! dependency-free sequential build with identical results.

pub mod algorithm;
pub mod game;
pub mod generate;
pub mod lp;
pub mod markov;
pub mod mdp;
pub mod oracle;

pub use game::{parse_game, serialize_game, Player, PureStationaryStrategy, StochasticGame};
pub use markov::TransitionMatrix;
