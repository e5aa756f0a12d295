//! Dense two-phase primal simplex for standard-form linear programs
//! (equality constraints, nonnegative variables).

use thiserror::Error;

/// Pivot tolerance: tableau entries at or below this magnitude are treated as
/// zero when selecting pivots.
const PIVOT_TOL: f64 = 1e-11;
/// Feasibility tolerance for the phase-1 objective and residual checks.
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum LpError {
    #[error("NumericalBreakdown: pivot magnitudes below {PIVOT_TOL} with no recovery")]
    NumericalBreakdown,
    #[error("inconsistent program: {0}")]
    BadProgram(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// max/min c·x subject to A x = b, x >= 0.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub cost: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(
        sense: Sense,
        cost: Vec<f64>,
        constraints: Vec<Vec<f64>>,
        rhs: Vec<f64>,
    ) -> Result<Self, LpError> {
        let n = cost.len();
        let m = constraints.len();
        if m == 0 || n == 0 {
            return Err(LpError::BadProgram("empty constraint matrix".into()));
        }
        if rhs.len() != m || constraints.iter().any(|row| row.len() != n) {
            return Err(LpError::BadProgram("dimension mismatch".into()));
        }
        let finite = cost.iter().chain(rhs.iter()).chain(constraints.iter().flatten());
        if finite.clone().any(|x| !x.is_finite()) {
            return Err(LpError::BadProgram("non-finite entry".into()));
        }
        Ok(LinearProgram { sense, cost, constraints, rhs })
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }
}

/// Result of a solve. For `Infeasible`/`Unbounded` the point, objective and
/// basis are empty/NaN.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Basic variable index per remaining tableau row.
    pub basis: Vec<usize>,
}

/// Solves the program with a deterministic two-phase primal simplex using
/// Bland's anti-cycling rule. Tableau dumps go to `log::trace!`.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    Simplex::new(lp).solve()
}

struct Simplex {
    /// Constraint rows, each `n + m + 1` wide: structural columns, artificial
    /// columns, right-hand side.
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row, same width (last cell = -objective).
    cost_row: Vec<f64>,
    basis: Vec<usize>,
    n: usize,
    maximize: bool,
    cost: Vec<f64>,
}

impl Simplex {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_constraints();
        let maximize = lp.sense == Sense::Maximize;
        // Internally always minimize.
        let cost: Vec<f64> = if maximize { lp.cost.iter().map(|c| -c).collect() } else { lp.cost.clone() };

        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        for (i, src) in lp.constraints.iter().enumerate() {
            let flip = if lp.rhs[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for (j, &a) in src.iter().enumerate() {
                row[j] = flip * a;
            }
            row[n + i] = 1.0;
            row[width - 1] = flip * lp.rhs[i];
            rows.push(row);
        }
        let basis: Vec<usize> = (0..m).map(|i| n + i).collect();

        // Phase-1 reduced costs: minimize the artificial sum, so subtract
        // every constraint row from the artificial cost vector.
        let mut cost_row = vec![0.0; width];
        for j in n..n + m {
            cost_row[j] = 1.0;
        }
        for row in &rows {
            for (c, a) in cost_row.iter_mut().zip(row) {
                *c -= a;
            }
        }

        Simplex { rows, cost_row, basis, n, maximize, cost }
    }

    fn solve(mut self) -> Result<LpSolution, LpError> {
        // Phase 1.
        if self.iterate("phase1")? {
            return Err(LpError::NumericalBreakdown); // phase 1 cannot be unbounded
        }
        let phase1_objective = -self.cost_row[self.width() - 1];
        if phase1_objective > FEAS_TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NAN,
                basis: Vec::new(),
            });
        }
        self.remove_artificials()?;

        // Phase 2: rebuild reduced costs from the real objective.
        let width = self.width();
        self.cost_row = vec![0.0; width];
        self.cost_row[..self.n].copy_from_slice(&self.cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let c = self.cost[b];
            if c != 0.0 {
                let row = self.rows[i].clone();
                for (dst, a) in self.cost_row.iter_mut().zip(&row) {
                    *dst -= c * a;
                }
            }
        }
        if self.iterate("phase2")? {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective: f64::NAN,
                basis: Vec::new(),
            });
        }

        let mut x = vec![0.0; self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            let v = self.rows[i][width - 1];
            x[b] = if v < 0.0 && v >= -1e-12 { 0.0 } else { v };
        }
        let raw: f64 = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: if self.maximize { -raw } else { raw },
            x,
            basis: self.basis.clone(),
        })
    }

    fn width(&self) -> usize {
        self.rows[0].len()
    }

    /// Bland-rule simplex loop on the current tableau. Returns true when the
    /// entering column proves the program unbounded.
    fn iterate(&mut self, phase: &str) -> Result<bool, LpError> {
        let width = self.width();
        let mut iterations = 0usize;
        let cap = 10_000 * (width + self.rows.len());
        loop {
            self.trace(phase, iterations);
            // Bland: lowest-index column with a negative reduced cost.
            let entering = (0..width - 1).find(|&j| self.cost_row[j] < -PIVOT_TOL);
            let Some(col) = entering else { return Ok(false) };

            // Ratio test; ties resolved by the lowest basic variable index.
            let mut pivot: Option<(usize, f64)> = None;
            let mut degenerate_candidate = false;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a > PIVOT_TOL {
                    let ratio = row[width - 1] / a;
                    match pivot {
                        None => pivot = Some((i, ratio)),
                        Some((best_i, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[best_i])
                            {
                                pivot = Some((i, ratio));
                            }
                        }
                    }
                } else if a > 0.0 {
                    degenerate_candidate = true;
                }
            }
            let Some((row, _)) = pivot else {
                if degenerate_candidate {
                    // Improvement is indicated but every pivot is below
                    // tolerance.
                    return Err(LpError::NumericalBreakdown);
                }
                return Ok(true);
            };
            self.pivot(row, col);
            iterations += 1;
            if iterations > cap {
                return Err(LpError::NumericalBreakdown);
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.width();
        let inv = 1.0 / self.rows[row][col];
        for x in self.rows[row].iter_mut() {
            *x *= inv;
        }
        self.rows[row][col] = 1.0;
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col] == 0.0 {
                continue;
            }
            let factor = r[col];
            for j in 0..width {
                r[j] -= factor * pivot_row[j];
            }
            r[col] = 0.0;
        }
        let factor = self.cost_row[col];
        if factor != 0.0 {
            for j in 0..width {
                self.cost_row[j] -= factor * pivot_row[j];
            }
            self.cost_row[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// After phase 1: pivot zero-level artificial variables out of the basis,
    /// dropping rows that prove redundant.
    fn remove_artificials(&mut self) -> Result<(), LpError> {
        let width = self.width();
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.n {
                i += 1;
                continue;
            }
            let col = (0..self.n).find(|&j| self.rows[i][j].abs() > PIVOT_TOL);
            match col {
                Some(col) => self.pivot(i, col),
                None => {
                    // All structural coefficients vanish: redundant constraint.
                    if self.rows[i][width - 1].abs() > FEAS_TOL {
                        return Err(LpError::NumericalBreakdown);
                    }
                    self.rows.swap_remove(i);
                    self.basis.swap_remove(i);
                }
            }
        }
        // Blank out artificial columns so they can never re-enter.
        for row in &mut self.rows {
            for j in self.n..width - 1 {
                row[j] = 0.0;
            }
        }
        Ok(())
    }

    fn trace(&self, phase: &str, iteration: usize) {
        if !log::log_enabled!(log::Level::Trace) {
            return;
        }
        let mut dump = format!("{phase} iteration {iteration}, basis {:?}\n", self.basis);
        for row in &self.rows {
            dump.push_str(&format!("  {row:.<6?}\n"));
        }
        dump.push_str(&format!("  cost {:.6?}", self.cost_row));
        log::trace!("{dump}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(sense: Sense, c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> LpSolution {
        solve_lp(&LinearProgram::new(sense, c, a, b).unwrap()).unwrap()
    }

    #[test]
    fn one_constraint_maximum() {
        let sol = solve(Sense::Maximize, vec![1.0, 0.0], vec![vec![1.0, 1.0]], vec![1.0]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
        assert!(sol.x[1].abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x1 + x2 = 1 and x1 + x2 = 2 cannot both hold.
        let sol = solve(
            Sense::Maximize,
            vec![1.0, 1.0],
            vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            vec![1.0, 2.0],
        );
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // max x1 with x1 - x2 = 1: push x2 up forever.
        let sol = solve(Sense::Maximize, vec![1.0, 0.0], vec![vec![1.0, -1.0]], vec![1.0]);
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        // Second row is the first doubled; solution is unaffected.
        let sol = solve(
            Sense::Minimize,
            vec![2.0, 3.0],
            vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![1.0, 2.0],
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn solution_is_basic_and_feasible() {
        let lp = LinearProgram::new(
            Sense::Maximize,
            vec![3.0, 1.0, 2.0, 0.5],
            vec![vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 2.0, 0.0, 1.0]],
            vec![2.0, 1.5],
        )
        .unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        for (i, row) in lp.constraints.iter().enumerate() {
            let lhs: f64 = row.iter().zip(&sol.x).map(|(a, x)| a * x).sum();
            assert!((lhs - lp.rhs[i]).abs() <= 1e-9);
        }
        assert!(sol.x.iter().all(|&v| v >= 0.0));
        assert!(sol.x.iter().filter(|&&v| v > 0.0).count() <= lp.num_constraints());
        let cx: f64 = lp.cost.iter().zip(&sol.x).map(|(c, x)| c * x).sum();
        assert!((cx - sol.objective).abs() <= 1e-9);
    }

    #[test]
    fn deterministic_across_runs() {
        let lp = LinearProgram::new(
            Sense::Maximize,
            vec![1.0, 1.0, 1.0],
            vec![vec![1.0, 2.0, 0.5], vec![0.5, 0.0, 1.0]],
            vec![4.0, 2.0],
        )
        .unwrap();
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert_eq!(a.basis, b.basis);
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(LinearProgram::new(Sense::Maximize, vec![1.0], vec![vec![1.0, 2.0]], vec![1.0]).is_err());
        assert!(LinearProgram::new(Sense::Maximize, vec![f64::NAN], vec![vec![1.0]], vec![1.0]).is_err());
    }
}
