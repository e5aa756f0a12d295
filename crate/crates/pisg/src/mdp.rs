//! Reduction of a game to a single-controller MDP and the Hordijk
//! average-optimality linear program that solves it.

use thiserror::Error;

use crate::game::{Player, PureStationaryStrategy, StochasticGame};
use crate::lp::{solve_lp, LinearProgram, LpError, LpSolution, LpStatus, Sense};
use crate::markov::{chain_value, MarkovError, TransitionMatrix};

/// Support threshold: occupation/auxiliary variables at or below this are
/// treated as zero during policy extraction.
const SUPPORT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum MdpError {
    #[error("BadWeights: beta must be positive and sum to 1")]
    BadWeights,
    #[error("DegenerateExtraction state={state}: w and y rows are both zero")]
    DegenerateExtraction { state: usize },
    #[error("ObjectiveMismatch: lp objective {objective} vs beta-weighted gain {weighted}")]
    ObjectiveMismatch { objective: f64, weighted: f64 },
    #[error("average-optimality LP ended {0:?}, expected an optimum")]
    UnexpectedStatus(LpStatus),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// A finite Markov decision process, oriented by the game player it serves:
/// player one maximizes the limiting-average reward, player two minimizes it.
#[derive(Debug, Clone)]
pub struct Mdp {
    pub player: Player,
    pub actions: Vec<usize>,
    /// reward[s][a]
    pub reward: Vec<Vec<f64>>,
    /// transition[s][a][s']
    pub transition: Vec<Vec<Vec<f64>>>,
}

impl Mdp {
    pub fn num_states(&self) -> usize {
        self.actions.len()
    }

    pub fn orientation(&self) -> Sense {
        match self.player {
            Player::One => Sense::Maximize,
            Player::Two => Sense::Minimize,
        }
    }

    /// Number of pure stationary policies.
    pub fn policy_count(&self) -> usize {
        self.actions.iter().product()
    }

    /// All pure stationary policies, lexicographic, last state fastest.
    pub fn enumerate_policies(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.policy_count());
        let mut digits = vec![0usize; self.num_states()];
        loop {
            out.push(digits.clone());
            let mut pos = digits.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < self.actions[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// Limiting-average gain vector of a pure policy.
    pub fn policy_gain(&self, policy: &[usize]) -> Result<Vec<f64>, MarkovError> {
        let rows = (0..self.num_states()).map(|s| self.transition[s][policy[s]].clone()).collect();
        let rewards: Vec<f64> = (0..self.num_states()).map(|s| self.reward[s][policy[s]]).collect();
        let q = TransitionMatrix::new(rows)?;
        chain_value(&q, &rewards)
    }
}

/// Freezes one player's pure strategy and returns the opponent's MDP. In
/// states the free player controls, that player's actions carry over; in the
/// frozen player's states the single available action is the frozen choice.
pub fn reduce_to_mdp(game: &StochasticGame, frozen: &PureStationaryStrategy) -> Mdp {
    let free = frozen.player.opponent();
    let n = game.num_states();
    let mut actions = Vec::with_capacity(n);
    let mut reward = Vec::with_capacity(n);
    let mut transition = Vec::with_capacity(n);
    for s in 0..n {
        let count = if game.controller(s) == free { game.num_actions(free, s) } else { 1 };
        let mut r_row = Vec::with_capacity(count);
        let mut q_row = Vec::with_capacity(count);
        for a in 0..count {
            let (i, j) = match free {
                Player::One => (if game.controller(s) == free { a } else { 0 }, frozen.choice[s]),
                Player::Two => (frozen.choice[s], if game.controller(s) == free { a } else { 0 }),
            };
            r_row.push(game.reward(s, i, j));
            q_row.push(game.transition(s, i, j).to_vec());
        }
        actions.push(count);
        reward.push(r_row);
        transition.push(q_row);
    }
    Mdp { player: free, actions, reward, transition }
}

/// The average-optimality LP in occupation variables w and auxiliaries y,
/// with positive state weights beta summing to one. Built with sense
/// `Maximize`; for a minimizing player the costs are negated and the
/// reported objective's sign is restored afterwards.
#[derive(Debug, Clone)]
pub struct HordijkLp {
    pub program: LinearProgram,
    pub beta: Vec<f64>,
    player: Player,
    negated: bool,
    w_cols: Vec<Vec<usize>>,
    y_cols: Vec<Vec<usize>>,
}

impl HordijkLp {
    pub fn w_column(&self, state: usize, action: usize) -> usize {
        self.w_cols[state][action]
    }

    pub fn y_column(&self, state: usize, action: usize) -> usize {
        self.y_cols[state][action]
    }

    /// Undoes the internal cost negation used for minimizing players.
    pub fn restore_objective(&self, lp_objective: f64) -> f64 {
        if self.negated {
            -lp_objective
        } else {
            lp_objective
        }
    }
}

/// Builds the two equality families
///   sum_(s,a) (delta(s,s') - q(s'|s,a)) w_sa = 0            for every s'
///   sum_a w_s'a + sum_(s,a) (delta(s,s') - q(s'|s,a)) y_sa = beta_s'
/// with objective sum r(s,a) w_sa.
pub fn build_hordijk_lp(mdp: &Mdp, beta: &[f64]) -> Result<HordijkLp, MdpError> {
    let n = mdp.num_states();
    if beta.len() != n || beta.iter().any(|&b| b <= 0.0) {
        return Err(MdpError::BadWeights);
    }
    if (beta.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(MdpError::BadWeights);
    }

    let mut w_cols = Vec::with_capacity(n);
    let mut next = 0usize;
    for s in 0..n {
        w_cols.push((0..mdp.actions[s]).map(|a| next + a).collect::<Vec<_>>());
        next += mdp.actions[s];
    }
    let w_count = next;
    let y_cols: Vec<Vec<usize>> =
        w_cols.iter().map(|cols| cols.iter().map(|c| c + w_count).collect()).collect();
    let cols = 2 * w_count;

    let negated = mdp.orientation() == Sense::Minimize;
    let mut cost = vec![0.0; cols];
    for s in 0..n {
        for a in 0..mdp.actions[s] {
            cost[w_cols[s][a]] = if negated { -mdp.reward[s][a] } else { mdp.reward[s][a] };
        }
    }

    let mut constraints = Vec::with_capacity(2 * n);
    let mut rhs = Vec::with_capacity(2 * n);
    for target in 0..n {
        let mut row = vec![0.0; cols];
        for s in 0..n {
            for a in 0..mdp.actions[s] {
                let delta = if s == target { 1.0 } else { 0.0 };
                row[w_cols[s][a]] = delta - mdp.transition[s][a][target];
            }
        }
        constraints.push(row);
        rhs.push(0.0);
    }
    for target in 0..n {
        let mut row = vec![0.0; cols];
        for a in 0..mdp.actions[target] {
            row[w_cols[target][a]] = 1.0;
        }
        for s in 0..n {
            for a in 0..mdp.actions[s] {
                let delta = if s == target { 1.0 } else { 0.0 };
                row[y_cols[s][a]] = delta - mdp.transition[s][a][target];
            }
        }
        constraints.push(row);
        rhs.push(beta[target]);
    }

    let program = LinearProgram::new(Sense::Maximize, cost, constraints, rhs)?;
    Ok(HordijkLp { program, beta: beta.to_vec(), player: mdp.player, negated, w_cols, y_cols })
}

/// Reads the pure policy out of an optimal basic solution: in each state take
/// the action with the largest occupation w (ties to the lowest index); where
/// the whole w row is zero — the state is transient under the optimum — take
/// the largest auxiliary y instead.
pub fn extract_policy(
    solution: &LpSolution,
    hlp: &HordijkLp,
) -> Result<PureStationaryStrategy, MdpError> {
    let mut choice = Vec::with_capacity(hlp.w_cols.len());
    for (s, w_row) in hlp.w_cols.iter().enumerate() {
        let w_sum: f64 = w_row.iter().map(|&c| solution.x[c]).sum();
        let cols = if w_sum > SUPPORT_TOL { w_row } else { &hlp.y_cols[s] };
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for (a, &c) in cols.iter().enumerate() {
            if solution.x[c] > best_val {
                best_val = solution.x[c];
                best = a;
            }
        }
        if w_sum <= SUPPORT_TOL && best_val <= SUPPORT_TOL {
            return Err(MdpError::DegenerateExtraction { state: s + 1 });
        }
        choice.push(best);
    }
    Ok(PureStationaryStrategy { player: hlp.player, choice })
}

/// The extracted policy together with its gain vector and the LP optimum.
#[derive(Debug, Clone)]
pub struct AverageOptimal {
    pub policy: PureStationaryStrategy,
    pub gain: Vec<f64>,
    pub objective: f64,
}

/// Builds and solves the average-optimality LP, extracts the pure policy, and
/// evaluates its gain. The beta-weighted gain must reproduce the LP optimum
/// within 1e-6; a mismatch signals an extraction or solver bug.
pub fn solve_average_optimal(mdp: &Mdp, beta: &[f64]) -> Result<AverageOptimal, MdpError> {
    let hlp = build_hordijk_lp(mdp, beta)?;
    let solution = solve_lp(&hlp.program)?;
    if solution.status != LpStatus::Optimal {
        return Err(MdpError::UnexpectedStatus(solution.status));
    }
    let policy = extract_policy(&solution, &hlp)?;
    let gain = mdp.policy_gain(&policy.choice)?;
    let objective = hlp.restore_objective(solution.objective);
    let weighted: f64 = beta.iter().zip(&gain).map(|(b, g)| b * g).sum();
    if (objective - weighted).abs() > 1e-6 {
        return Err(MdpError::ObjectiveMismatch { objective, weighted });
    }
    Ok(AverageOptimal { policy, gain, objective })
}

/// Uniform weights 1/n.
pub fn uniform_beta(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{example1, example2};

    fn p2(choice: Vec<usize>) -> PureStationaryStrategy {
        PureStationaryStrategy { player: Player::Two, choice }
    }

    fn p1(choice: Vec<usize>) -> PureStationaryStrategy {
        PureStationaryStrategy { player: Player::One, choice }
    }

    #[test]
    fn example1_reduction_for_player_one() {
        let game = example1();
        let mdp = reduce_to_mdp(&game, &p2(vec![0, 0, 0]));
        assert_eq!(mdp.player, Player::One);
        assert_eq!(mdp.actions, vec![2, 2, 1]);
        assert_eq!(mdp.reward[0], vec![5.0, 7.0]);
        assert_eq!(mdp.reward[2], vec![3.0]);
        assert_eq!(mdp.transition[2][0], vec![0.0, 0.5, 0.5]);
    }

    #[test]
    fn example1_reduction_for_player_two() {
        let game = example1();
        let mdp = reduce_to_mdp(&game, &p1(vec![0, 0, 0]));
        assert_eq!(mdp.player, Player::Two);
        assert_eq!(mdp.orientation(), Sense::Minimize);
        assert_eq!(mdp.actions, vec![1, 1, 3]);
        assert_eq!(mdp.reward[0], vec![5.0]);
        assert_eq!(mdp.reward[2], vec![3.0, 4.0, 2.0]);
    }

    #[test]
    fn reduction_with_no_free_states() {
        let game = example1();
        // Freeze player one in a game where player two owns only state 3;
        // then freeze player two's only choice and check player one's MDP of
        // a game fully controlled by player two would be evaluation-only.
        let mdp = reduce_to_mdp(&game, &p1(vec![1, 1, 0]));
        assert_eq!(mdp.actions[0], 1);
        assert_eq!(mdp.reward[0], vec![7.0]);
    }

    #[test]
    fn hordijk_lp_shape() {
        let game = example1();
        let mdp = reduce_to_mdp(&game, &p2(vec![0, 0, 0]));
        let hlp = build_hordijk_lp(&mdp, &uniform_beta(3)).unwrap();
        assert_eq!(hlp.program.num_constraints(), 6);
        assert_eq!(hlp.program.num_vars(), 10);
        assert_eq!(hlp.w_column(0, 1), 1);
        assert_eq!(hlp.y_column(0, 0), 5);
    }

    #[test]
    fn bad_weights_rejected() {
        let game = example1();
        let mdp = reduce_to_mdp(&game, &p2(vec![0, 0, 0]));
        assert!(matches!(build_hordijk_lp(&mdp, &[0.5, 0.5, 0.5]), Err(MdpError::BadWeights)));
        assert!(matches!(build_hordijk_lp(&mdp, &[1.0, 0.0, 0.0]), Err(MdpError::BadWeights)));
        assert!(matches!(build_hordijk_lp(&mdp, &[1.0]), Err(MdpError::BadWeights)));
    }

    #[test]
    fn one_state_occupation_is_forced() {
        let mdp = Mdp {
            player: Player::One,
            actions: vec![1],
            reward: vec![vec![3.5]],
            transition: vec![vec![vec![1.0]]],
        };
        let result = solve_average_optimal(&mdp, &[1.0]).unwrap();
        assert!((result.objective - 3.5).abs() < 1e-9);
        assert_eq!(result.policy.choice, vec![0]);
        let hlp = build_hordijk_lp(&mdp, &[1.0]).unwrap();
        let sol = solve_lp(&hlp.program).unwrap();
        assert!((sol.x[hlp.w_column(0, 0)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn example1_first_lp() {
        let game = example1();
        let mdp = reduce_to_mdp(&game, &p2(vec![0, 0, 0]));
        let result = solve_average_optimal(&mdp, &uniform_beta(3)).unwrap();
        assert!((result.objective - 25.0 / 9.0).abs() < 1e-3, "objective {}", result.objective);
        // w-supported extraction: action 1 in both controlled states.
        assert_eq!(result.policy.choice, vec![0, 0, 0]);
        for g in &result.gain {
            assert!((g - 25.0 / 9.0).abs() < 1e-9);
        }
    }

    #[test]
    fn example1_minimizing_response_lp() {
        let game = example1();
        let mdp = reduce_to_mdp(&game, &p1(vec![0, 0, 0]));
        let result = solve_average_optimal(&mdp, &uniform_beta(3)).unwrap();
        assert!((result.objective - 25.0 / 9.0).abs() < 1e-3);
        assert_eq!(result.policy.choice, vec![0, 0, 0]);
    }

    #[test]
    fn example2_first_lp() {
        let game = example2();
        let mdp = reduce_to_mdp(&game, &p2(vec![0, 0, 0, 0]));
        let result = solve_average_optimal(&mdp, &uniform_beta(4)).unwrap();
        assert!((result.objective - 5.6875).abs() < 1e-3, "objective {}", result.objective);
        assert_eq!(result.policy.choice, vec![1, 1, 0, 0]);
        let hlp = build_hordijk_lp(&mdp, &uniform_beta(4)).unwrap();
        let sol = solve_lp(&hlp.program).unwrap();
        for (col, expect) in [
            (hlp.w_column(0, 1), 0.125),
            (hlp.w_column(1, 1), 0.125),
            (hlp.w_column(2, 0), 0.5),
            (hlp.w_column(3, 0), 0.25),
        ] {
            assert!((sol.x[col] - expect).abs() < 1e-9, "col {col}: {}", sol.x[col]);
        }
    }

    #[test]
    fn example2_minimizing_response_reaches_zero() {
        let game = example2();
        let mdp = reduce_to_mdp(&game, &p1(vec![1, 1, 0, 0]));
        let result = solve_average_optimal(&mdp, &uniform_beta(4)).unwrap();
        assert!(result.objective.abs() < 1e-9, "objective {}", result.objective);
        // The absorbing zero-reward action in state 3 is the best response.
        assert_eq!(result.policy.choice[2], 1);
        for g in &result.gain {
            assert!(g.abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_extraction_detected() {
        let game = example1();
        let mdp = reduce_to_mdp(&game, &p2(vec![0, 0, 0]));
        let hlp = build_hordijk_lp(&mdp, &uniform_beta(3)).unwrap();
        let fake = LpSolution {
            status: LpStatus::Optimal,
            x: vec![0.0; hlp.program.num_vars()],
            objective: 0.0,
            basis: vec![],
        };
        assert!(matches!(
            extract_policy(&fake, &hlp),
            Err(MdpError::DegenerateExtraction { state: 1 })
        ));
    }

    #[test]
    fn beta_choice_does_not_move_the_gain() {
        let game = example1();
        let mdp = reduce_to_mdp(&game, &p2(vec![0, 0, 0]));
        let uniform = solve_average_optimal(&mdp, &uniform_beta(3)).unwrap();
        let skewed = solve_average_optimal(&mdp, &[0.7, 0.2, 0.1]).unwrap();
        for (a, b) in uniform.gain.iter().zip(&skewed.gain) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn extracted_policy_dominates_on_a_multichain_mdp() {
        // Two absorbing states with different rewards plus a connector.
        let mdp = Mdp {
            player: Player::One,
            actions: vec![2, 1, 1],
            reward: vec![vec![0.0, 0.0], vec![4.0], vec![1.0]],
            transition: vec![
                vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]],
            ],
        };
        let result = solve_average_optimal(&mdp, &uniform_beta(3)).unwrap();
        assert_eq!(result.policy.choice[0], 0);
        assert!((result.gain[0] - 4.0).abs() < 1e-9);
        for policy in mdp.enumerate_policies() {
            let gain = mdp.policy_gain(&policy).unwrap();
            for (g_opt, g) in result.gain.iter().zip(&gain) {
                assert!(*g_opt >= g - 1e-6);
            }
        }
    }
}
