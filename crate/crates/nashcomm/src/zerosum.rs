//! Zero-sum game solver: maximin/minimax strategies and the unique game
//! value, to a fixed certificate tolerance.
//!
//! The solver runs a dense primal simplex on the classic transformation of a
//! matrix game into a linear program. Payoffs are shifted by +1 so the matrix
//! is strictly positive, then `max 1.w  s.t.  A'w <= 1, w >= 0` is solved;
//! the optimum gives the minimizer's strategy (`w` normalized), the dual
//! values read off the slack columns give the maximizer's strategy, and the
//! game value is recovered from the objective. Everything is self-contained
//! and deterministic: Dantzig pivoting with lowest-index tie-breaks, falling
//! back to Bland's rule if the basis stalls on degenerate pivots.

use thiserror::Error;

use crate::game::{GameError, Matrix, MixedStrategy};

/// Certificate tolerance of the solver.
pub const SOLVER_TOLERANCE: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;
const STALL_LIMIT: u32 = 50;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("simplex hit the {pivots}-pivot cap (certificate gap {gap:.3e})")]
    IterationLimit {
        pivots: usize,
        gap: f64,
        best: Box<ZeroSumSolution>,
    },
    #[error("optimal basis certificate gap {gap:.3e} exceeds tolerance")]
    CertificateGap { gap: f64 },
    #[error("simplex failed: {0}")]
    Numerical(&'static str),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Solution of the zero-sum game on matrix `A`: the row player maximizes
/// `x^T A y`, the column player minimizes it.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumSolution {
    /// Maximizer (row-side) security strategy.
    pub max_strategy: MixedStrategy,
    /// Minimizer (column-side) security strategy.
    pub min_strategy: MixedStrategy,
    /// The minimax value of the game.
    pub value: f64,
    /// Best pure response against `min_strategy` minus the worst pure
    /// response payoff `max_strategy` can be held to. Nonnegative, and at
    /// most [`SOLVER_TOLERANCE`] for a successful solve.
    pub certificate_gap: f64,
}

impl ZeroSumSolution {
    /// Strict comparison of the game value against a threshold.
    pub fn value_exceeds(&self, threshold: f64) -> bool {
        self.value > threshold
    }
}

/// Solves the zero-sum game `(A, -A)` for a square matrix with entries in
/// `[0, 1]`.
pub fn solve_zero_sum(a: &Matrix) -> Result<ZeroSumSolution, SolverError> {
    if !a.is_square() {
        return Err(GameError::NotSquare {
            context: "zero-sum matrix",
            n: a.rows(),
            rows: a.rows(),
            cols: a.cols(),
        }
        .into());
    }
    a.validate_unit_range("zero-sum matrix")?;
    let n = a.rows();

    // Constant games have a unique value and every strategy pair is optimal;
    // return the uniform pair for determinism.
    let (lo, hi) = (a.min_entry(), a.max_entry());
    if hi - lo <= f64::EPSILON {
        return Ok(ZeroSumSolution {
            max_strategy: MixedStrategy::uniform(n),
            min_strategy: MixedStrategy::uniform(n),
            value: lo,
            certificate_gap: 0.0,
        });
    }

    let mut simplex = Simplex::new(a);
    let cap = 10 * n * n;
    let pivots = simplex.run(cap)?;
    let solution = simplex.extract(a)?;
    if pivots >= cap && simplex.has_entering_column() {
        return Err(SolverError::IterationLimit {
            pivots,
            gap: solution.certificate_gap,
            best: Box::new(solution),
        });
    }
    if solution.certificate_gap > SOLVER_TOLERANCE {
        return Err(SolverError::CertificateGap {
            gap: solution.certificate_gap,
        });
    }
    Ok(solution)
}

/// Dense simplex tableau for `max 1.w  s.t.  (A+1)w <= 1, w >= 0`.
///
/// Layout: `n` constraint rows plus one objective row; columns `0..n` hold
/// `w`, `n..2n` the slacks, and `2n` the right-hand side.
struct Simplex {
    n: usize,
    width: usize,
    tableau: Vec<Vec<f64>>,
    basis: Vec<usize>,
    bland: bool,
    stalled: u32,
}

impl Simplex {
    fn new(a: &Matrix) -> Self {
        let n = a.rows();
        let width = 2 * n + 1;
        let mut tableau = vec![vec![0.0; width]; n + 1];
        for i in 0..n {
            for j in 0..n {
                tableau[i][j] = a.get(i, j) + 1.0;
            }
            tableau[i][n + i] = 1.0;
            tableau[i][width - 1] = 1.0;
        }
        for j in 0..n {
            tableau[n][j] = -1.0;
        }
        Simplex {
            n,
            width,
            tableau,
            basis: (n..2 * n).collect(),
            bland: false,
            stalled: 0,
        }
    }

    fn entering_column(&self) -> Option<usize> {
        let obj = &self.tableau[self.n];
        if self.bland {
            return (0..self.width - 1).find(|&j| obj[j] < -PIVOT_EPS);
        }
        let mut best: Option<usize> = None;
        for j in 0..self.width - 1 {
            if obj[j] < -PIVOT_EPS && best.is_none_or(|b| obj[j] < obj[b]) {
                best = Some(j);
            }
        }
        best
    }

    fn has_entering_column(&self) -> bool {
        self.entering_column().is_some()
    }

    fn leaving_row(&self, col: usize) -> Option<usize> {
        let rhs = self.width - 1;
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.n {
            let coeff = self.tableau[i][col];
            if coeff > PIVOT_EPS {
                let ratio = self.tableau[i][rhs] / coeff;
                let better = match best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < br - PIVOT_EPS
                            || (ratio < br + PIVOT_EPS && self.basis[i] < self.basis[bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.tableau[row][col];
        for v in self.tableau[row].iter_mut() {
            *v /= pivot;
        }
        for i in 0..=self.n {
            if i == row {
                continue;
            }
            let factor = self.tableau[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.width {
                self.tableau[i][j] -= factor * self.tableau[row][j];
            }
            self.tableau[i][col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Pivots until optimal or the cap is reached; returns the pivot count.
    fn run(&mut self, cap: usize) -> Result<usize, SolverError> {
        let rhs = self.width - 1;
        let mut pivots = 0;
        while pivots < cap {
            let Some(col) = self.entering_column() else {
                break;
            };
            let Some(row) = self.leaving_row(col) else {
                return Err(SolverError::Numerical("unbounded column in ratio test"));
            };
            let before = self.tableau[self.n][rhs];
            self.pivot(row, col);
            pivots += 1;
            let improvement = self.tableau[self.n][rhs] - before;
            if improvement <= f64::EPSILON {
                self.stalled += 1;
                if self.stalled >= STALL_LIMIT {
                    self.bland = true;
                }
            } else {
                self.stalled = 0;
            }
        }
        Ok(pivots)
    }

    /// Reads the primal/dual pair out of the tableau and certifies it on the
    /// original matrix.
    fn extract(&self, a: &Matrix) -> Result<ZeroSumSolution, SolverError> {
        let n = self.n;
        let rhs = self.width - 1;

        let mut w = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                w[b] = self.tableau[i][rhs].max(0.0);
            }
        }
        let sum_w: f64 = w.iter().sum();
        let mut u = vec![0.0; n];
        for i in 0..n {
            u[i] = self.tableau[n][n + i].max(0.0);
        }
        let sum_u: f64 = u.iter().sum();
        if sum_w <= PIVOT_EPS || sum_u <= PIVOT_EPS {
            return Err(SolverError::Numerical("vanishing normalization mass"));
        }

        let min_strategy = MixedStrategy::new(w)?;
        let max_strategy = MixedStrategy::new(u)?;
        let value = 1.0 / sum_w - 1.0;

        // Certificate on the original matrix: how much any pure row gains
        // against y*, and how low any pure column can hold x*.
        let mut best_row_response = f64::NEG_INFINITY;
        for i in 0..n {
            let v: f64 = (0..n)
                .map(|j| a.get(i, j) * min_strategy.prob(j))
                .sum();
            best_row_response = best_row_response.max(v);
        }
        let mut worst_column_response = f64::INFINITY;
        for j in 0..n {
            let v: f64 = (0..n)
                .map(|i| max_strategy.prob(i) * a.get(i, j))
                .sum();
            worst_column_response = worst_column_response.min(v);
        }
        let certificate_gap = (best_row_response - worst_column_response).max(0.0);

        Ok(ZeroSumSolution {
            max_strategy,
            min_strategy,
            value,
            certificate_gap,
        })
    }
}
