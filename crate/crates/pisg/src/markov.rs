//! Markov-chain evaluation of pure stationary strategy pairs: induced chain,
//! Cesàro limiting matrix, limiting-average value vector.

use thiserror::Error;

use crate::game::{PureStationaryStrategy, StochasticGame};

/// Pivot tolerance for the dense linear solves.
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Error)]
pub enum MarkovError {
    #[error("SingularSystem: linear solve failed (pivot below {PIVOT_TOL})")]
    SingularSystem,
    #[error("row {row} sums to {sum}, not a Markov matrix")]
    BadRow { row: usize, sum: f64 },
}

/// A row-stochastic matrix (rows sum to 1 within 1e-12).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, MarkovError> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MarkovError::BadRow { row: i, sum: f64::NAN });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > crate::game::ROW_SUM_TOL || row.iter().any(|&p| p < 0.0) {
                return Err(MarkovError::BadRow { row: i, sum });
            }
        }
        Ok(TransitionMatrix { rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Everything the limiting-average evaluation of one strategy pair produces.
#[derive(Debug, Clone)]
pub struct CesaroResult {
    /// Cesàro limit of the averaged powers of the induced chain.
    pub q_star: Vec<Vec<f64>>,
    /// Per-state immediate reward under the pair.
    pub reward_vec: Vec<f64>,
    /// value = q_star · reward_vec, one entry per initial state.
    pub value: Vec<f64>,
}

/// Builds the Markov chain a pure strategy pair induces on the game: row `s`
/// is q(.|s, f(s), g(s)) and the reward vector collects r(s, f(s), g(s)).
pub fn induced_chain(
    game: &StochasticGame,
    f: &PureStationaryStrategy,
    g: &PureStationaryStrategy,
) -> (TransitionMatrix, Vec<f64>) {
    let n = game.num_states();
    let mut rows = Vec::with_capacity(n);
    let mut rewards = Vec::with_capacity(n);
    for s in 0..n {
        let (i, j) = (f.choice[s], g.choice[s]);
        rows.push(game.transition(s, i, j).to_vec());
        rewards.push(game.reward(s, i, j));
    }
    let q = TransitionMatrix::new(rows).expect("validated game rows are stochastic");
    (q, rewards)
}

/// Computes the Cesàro limiting matrix Q* of a Markov matrix structurally:
/// communicating classes via strongly connected components, stationary
/// distribution per closed (recurrent) class, absorption probabilities for
/// transient states. Satisfies QQ* = Q*Q = Q*Q* = Q*.
pub fn cesaro_limit(q: &TransitionMatrix) -> Result<Vec<Vec<f64>>, MarkovError> {
    let n = q.dim();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|s| (0..n).filter(|&t| q.row(s)[t] > 0.0).collect())
        .collect();
    let components = strongly_connected_components(&adjacency);

    let mut component_of = vec![0usize; n];
    for (c, members) in components.iter().enumerate() {
        for &s in members {
            component_of[s] = c;
        }
    }
    // A component is closed (recurrent) iff no positive edge leaves it.
    let closed: Vec<bool> = components
        .iter()
        .enumerate()
        .map(|(c, members)| {
            members
                .iter()
                .all(|&s| adjacency[s].iter().all(|&t| component_of[t] == c))
        })
        .collect();

    let recurrent_classes: Vec<&Vec<usize>> = components
        .iter()
        .enumerate()
        .filter(|(c, _)| closed[*c])
        .map(|(_, members)| members)
        .collect();

    // Stationary distribution of each closed class: pi Q_R = pi, sum pi = 1.
    let mut stationary: Vec<Vec<f64>> = Vec::with_capacity(recurrent_classes.len());
    for members in &recurrent_classes {
        let r = members.len();
        let mut a = vec![vec![0.0; r]; r];
        for (col, &s) in members.iter().enumerate() {
            for (row, &t) in members.iter().enumerate() {
                a[row][col] = q.row(s)[t];
            }
        }
        // a = Q_R^T; subtract I, then replace the last row with the
        // normalization constraint.
        for (idx, row) in a.iter_mut().enumerate() {
            row[idx] -= 1.0;
        }
        a[r - 1] = vec![1.0; r];
        let mut rhs = vec![0.0; r];
        rhs[r - 1] = 1.0;
        let pi = solve_dense(a, vec![rhs])?.pop().unwrap();
        stationary.push(pi.into_iter().map(|p| if p < 0.0 { 0.0 } else { p }).collect());
    }

    let transient: Vec<usize> = (0..n).filter(|&s| !closed[component_of[s]]).collect();
    let mut transient_index = vec![usize::MAX; n];
    for (idx, &s) in transient.iter().enumerate() {
        transient_index[s] = idx;
    }

    // Hit probabilities h(s -> class k) for transient s: (I - Q_TT) H = B.
    let hit = if transient.is_empty() {
        Vec::new()
    } else {
        let t = transient.len();
        let mut a = vec![vec![0.0; t]; t];
        for (row, &s) in transient.iter().enumerate() {
            for (col, &u) in transient.iter().enumerate() {
                a[row][col] = -q.row(s)[u];
            }
            a[row][row] += 1.0;
        }
        let rhs: Vec<Vec<f64>> = recurrent_classes
            .iter()
            .map(|members| {
                transient
                    .iter()
                    .map(|&s| members.iter().map(|&u| q.row(s)[u]).sum())
                    .collect()
            })
            .collect();
        solve_dense(a, rhs)?
    };

    let mut q_star = vec![vec![0.0; n]; n];
    for s in 0..n {
        let c = component_of[s];
        if closed[c] {
            let k = recurrent_classes.iter().position(|m| component_of[m[0]] == c).unwrap();
            for (idx, &u) in recurrent_classes[k].iter().enumerate() {
                q_star[s][u] = stationary[k][idx];
            }
        } else {
            let ti = transient_index[s];
            for (k, members) in recurrent_classes.iter().enumerate() {
                let h = hit[k][ti];
                for (idx, &u) in members.iter().enumerate() {
                    q_star[s][u] += h * stationary[k][idx];
                }
            }
        }
    }
    for row in &mut q_star {
        for x in row.iter_mut() {
            if *x < 0.0 && *x >= -1e-12 {
                *x = 0.0;
            }
        }
    }
    Ok(q_star)
}

/// Limiting-average value of a chain with per-state rewards: (Q*) r.
pub fn chain_value(q: &TransitionMatrix, rewards: &[f64]) -> Result<Vec<f64>, MarkovError> {
    let q_star = cesaro_limit(q)?;
    Ok(mat_vec(&q_star, rewards))
}

/// Full evaluation of a strategy pair: induced chain, Q*, and value vector.
pub fn evaluate_pair(
    game: &StochasticGame,
    f: &PureStationaryStrategy,
    g: &PureStationaryStrategy,
) -> Result<CesaroResult, MarkovError> {
    let (q, reward_vec) = induced_chain(game, f, g);
    let q_star = cesaro_limit(&q)?;
    let value = mat_vec(&q_star, &reward_vec);
    Ok(CesaroResult { q_star, reward_vec, value })
}

/// Limiting-average payoff vector of the pair, one entry per initial state.
pub fn undiscounted_value(
    game: &StochasticGame,
    f: &PureStationaryStrategy,
    g: &PureStationaryStrategy,
) -> Result<Vec<f64>, MarkovError> {
    Ok(evaluate_pair(game, f, g)?.value)
}

pub(crate) fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

/// Solves A X = B by Gaussian elimination with partial pivoting for several
/// right-hand sides. `rhs` holds the right-hand sides as separate vectors and
/// the solutions come back in the same layout.
fn solve_dense(mut a: Vec<Vec<f64>>, mut rhs: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>, MarkovError> {
    let n = a.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col].abs() < PIVOT_TOL {
            return Err(MarkovError::SingularSystem);
        }
        a.swap(col, pivot_row);
        for b in rhs.iter_mut() {
            b.swap(col, pivot_row);
        }
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            for b in rhs.iter_mut() {
                b[row] -= factor * b[col];
            }
        }
    }
    for b in rhs.iter_mut() {
        for row in (0..n).rev() {
            let mut acc = b[row];
            for k in row + 1..n {
                acc -= a[row][k] * b[k];
            }
            b[row] = acc / a[row][row];
        }
    }
    Ok(rhs)
}

struct TarjanState {
    index: usize,
    indices: Vec<Option<usize>>,
    lowlinks: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    components: Vec<Vec<usize>>,
}

/// Tarjan's algorithm; components come back in reverse topological order.
fn strongly_connected_components(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut state = TarjanState {
        index: 0,
        indices: vec![None; n],
        lowlinks: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        components: Vec::new(),
    };
    for v in 0..n {
        if state.indices[v].is_none() {
            strong_connect(adjacency, &mut state, v);
        }
    }
    state.components
}

fn strong_connect(adjacency: &[Vec<usize>], state: &mut TarjanState, v: usize) {
    state.indices[v] = Some(state.index);
    state.lowlinks[v] = state.index;
    state.index += 1;
    state.stack.push(v);
    state.on_stack[v] = true;

    for &w in &adjacency[v] {
        if state.indices[w].is_none() {
            strong_connect(adjacency, state, w);
            state.lowlinks[v] = state.lowlinks[v].min(state.lowlinks[w]);
        } else if state.on_stack[w] {
            state.lowlinks[v] = state.lowlinks[v].min(state.indices[w].unwrap());
        }
    }

    if state.lowlinks[v] == state.indices[v].unwrap() {
        let mut component = Vec::new();
        loop {
            let w = state.stack.pop().unwrap();
            state.on_stack[w] = false;
            component.push(w);
            if w == v {
                break;
            }
        }
        component.sort_unstable();
        state.components.push(component);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Player;
    use crate::generate::{example1, example2};

    fn matrix(rows: Vec<Vec<f64>>) -> TransitionMatrix {
        TransitionMatrix::new(rows).unwrap()
    }

    fn strategy(player: Player, choice: Vec<usize>) -> PureStationaryStrategy {
        PureStationaryStrategy { player, choice }
    }

    fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        a.iter()
            .zip(b)
            .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Plain partial Cesàro average (1/(n+1)) sum of Q^m, m = 0..=n.
    fn power_average(q: &TransitionMatrix, n: usize) -> Vec<Vec<f64>> {
        let d = q.dim();
        let mut power: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut sum = power.clone();
        for _ in 1..=n {
            let mut next = vec![vec![0.0; d]; d];
            for i in 0..d {
                for k in 0..d {
                    let p = power[i][k];
                    if p == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        next[i][j] += p * q.row(k)[j];
                    }
                }
            }
            power = next;
            for i in 0..d {
                for j in 0..d {
                    sum[i][j] += power[i][j];
                }
            }
        }
        let scale = 1.0 / (n as f64 + 1.0);
        for row in &mut sum {
            for x in row.iter_mut() {
                *x *= scale;
            }
        }
        sum
    }

    #[test]
    fn identity_is_its_own_limit() {
        let q = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let q_star = cesaro_limit(&q).unwrap();
        assert_eq!(q_star, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn two_cycle_averages_to_half() {
        let q = matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let q_star = cesaro_limit(&q).unwrap();
        for row in &q_star {
            for &x in row {
                assert!((x - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn absorbing_state_collects_everything() {
        let q = matrix(vec![vec![1.0, 0.0], vec![0.5, 0.5]]);
        let q_star = cesaro_limit(&q).unwrap();
        assert!(max_abs_diff(&q_star, &vec![vec![1.0, 0.0], vec![1.0, 0.0]]) < 1e-12);
        let value = chain_value(&q, &[2.0, 7.0]).unwrap();
        assert!((value[0] - 2.0).abs() < 1e-12);
        assert!((value[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn example1_induced_chain_rows_and_rewards() {
        let game = example1();
        let f = strategy(Player::One, vec![0, 0, 0]);
        let g = strategy(Player::Two, vec![0, 0, 0]);
        let (q, rewards) = induced_chain(&game, &f, &g);
        assert_eq!(q.row(0), &[0.5, 0.5, 0.0]);
        assert_eq!(q.row(1), &[1.0 / 3.0, 0.0, 2.0 / 3.0]);
        assert_eq!(q.row(2), &[0.0, 0.5, 0.5]);
        assert_eq!(rewards, vec![5.0, 1.0, 3.0]);
    }

    #[test]
    fn example1_chain_matches_power_average() {
        let game = example1();
        let f = strategy(Player::One, vec![0, 0, 0]);
        let g = strategy(Player::Two, vec![0, 0, 0]);
        let (q, rewards) = induced_chain(&game, &f, &g);
        let q_star = cesaro_limit(&q).unwrap();
        // Irreducible chain: every row is the stationary distribution.
        let expected = [2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0];
        for row in &q_star {
            for (x, e) in row.iter().zip(expected) {
                assert!((x - e).abs() < 1e-12, "row {row:?}");
            }
        }
        let averaged = power_average(&q, 1_000_000);
        assert!(max_abs_diff(&q_star, &averaged) <= 1e-5);

        let value = mat_vec(&q_star, &rewards);
        for v in value {
            assert!((v - 25.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn example2_rewards_for_second_pair() {
        let game = example2();
        let f = strategy(Player::One, vec![1, 1, 0, 0]);
        let g = strategy(Player::Two, vec![0, 0, 0, 0]);
        let (_, rewards) = induced_chain(&game, &f, &g);
        assert_eq!(rewards, vec![3.0, 0.5, 5.0, 11.0]);
    }

    #[test]
    fn one_state_value_is_the_reward() {
        let q = matrix(vec![vec![1.0]]);
        let value = chain_value(&q, &[4.25]).unwrap();
        assert_eq!(value, vec![4.25]);
    }

    #[test]
    fn lemma_identities_hold_on_a_periodic_reducible_mix() {
        // States 0-1 form a 2-cycle, state 2 is absorbing, state 3 is
        // transient into both.
        let q = matrix(vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.25, 0.25, 0.5, 0.0],
        ]);
        let q_star = cesaro_limit(&q).unwrap();
        let qq = mat_mul(q.rows(), &q_star);
        let qsq = mat_mul(&q_star, q.rows());
        let qss = mat_mul(&q_star, &q_star);
        assert!(max_abs_diff(&qq, &q_star) <= 1e-9);
        assert!(max_abs_diff(&qsq, &q_star) <= 1e-9);
        assert!(max_abs_diff(&qss, &q_star) <= 1e-9);
        // Transient row: half the mass on the cycle, half on the absorber.
        assert!((q_star[3][0] - 0.25).abs() < 1e-12);
        assert!((q_star[3][1] - 0.25).abs() < 1e-12);
        assert!((q_star[3][2] - 0.5).abs() < 1e-12);
    }

    fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }
}
