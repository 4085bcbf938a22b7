//! Core bimatrix-game types: payoff matrices, mixed strategies, strategy
//! profiles, and the two regret metrics (plain and well-supported) that the
//! rest of the crate treats as ground truth.
//!
//! Payoffs are unitless values in `[0, 1]`; rescaling a game into that range
//! is the caller's job. Indices are 0-based everywhere, including file
//! formats and the CLI. All types are immutable after construction and all
//! operations are pure functions, so everything here is safe to share across
//! threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Probability below which a pure strategy is treated as outside the support
/// when computing well-supported regret.
pub const SUPPORT_EPS: f64 = 1e-9;

/// Tolerance on the sum of a probability vector.
pub const STRATEGY_SUM_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("payoff {value} at ({row}, {col}) of {context} is outside [0, 1]")]
    PayoffOutOfRange {
        context: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("payoff matrix {context} must be {n}x{n}, got {rows}x{cols}")]
    NotSquare {
        context: &'static str,
        n: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),
}

/// Which side of the game a player occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Row,
    Col,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Row => Role::Col,
            Role::Col => Role::Row,
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Role::Row => write!(f, "row"),
            Role::Col => write!(f, "col"),
        }
    }
}

/// Which dimension of a matrix a strategy vector indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

/// Dense row-major matrix of `f64` payoffs. Rectangular matrices are allowed;
/// [`BimatrixGame`] enforces squareness where the game model requires it.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, GameError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(GameError::Empty);
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(GameError::Ragged {
                    row: i,
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn transposed(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Checks every entry lies in `[0, 1]`.
    pub fn validate_unit_range(&self, context: &'static str) -> Result<(), GameError> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if !(0.0..=1.0).contains(&v) || v.is_nan() {
                    return Err(GameError::PayoffOutOfRange {
                        context,
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Probability distribution over pure strategies. Construction normalizes the
/// weights; accessors expose the raw vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl MixedStrategy {
    /// Builds a strategy from nonnegative weights, normalizing them to sum
    /// to 1. Entries more negative than `-1e-12` are rejected; tiny negative
    /// dust from upstream arithmetic is clamped to zero.
    pub fn new(weights: Vec<f64>) -> Result<Self, GameError> {
        if weights.is_empty() {
            return Err(GameError::InvalidStrategy("empty weight vector".into()));
        }
        let mut probs = weights;
        for (i, w) in probs.iter_mut().enumerate() {
            if w.is_nan() || *w < -STRATEGY_SUM_EPS {
                return Err(GameError::InvalidStrategy(format!(
                    "weight {w} at index {i} is negative"
                )));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if sum <= 0.0 {
            return Err(GameError::InvalidStrategy(
                "weights sum to zero".into(),
            ));
        }
        for w in probs.iter_mut() {
            *w /= sum;
        }
        Ok(MixedStrategy { probs })
    }

    /// Point mass on pure strategy `index`.
    pub fn point(index: usize, dim: usize) -> Self {
        assert!(index < dim, "point mass index out of range");
        let mut probs = vec![0.0; dim];
        probs[index] = 1.0;
        MixedStrategy { probs }
    }

    pub fn uniform(dim: usize) -> Self {
        assert!(dim > 0, "uniform strategy needs a positive dimension");
        MixedStrategy {
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// Pure strategies carrying more than [`SUPPORT_EPS`] probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.probs[i] > SUPPORT_EPS)
            .collect()
    }

    /// Draws one pure strategy by inverse-CDF walk; the last index absorbs
    /// any floating-point residual.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.dim() - 1
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Vec<f64> {
        s.probs
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = GameError;

    fn try_from(v: Vec<f64>) -> Result<Self, GameError> {
        MixedStrategy::new(v)
    }
}

/// A pair of mixed strategies, one per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub row: MixedStrategy,
    pub col: MixedStrategy,
}

impl StrategyProfile {
    pub fn new(row: MixedStrategy, col: MixedStrategy) -> Self {
        StrategyProfile { row, col }
    }
}

/// Two-player game in normal form: square payoff matrices `R` (row player)
/// and `C` (column player) with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameRepr", into = "GameRepr")]
pub struct BimatrixGame {
    n: usize,
    row_payoffs: Matrix,
    col_payoffs: Matrix,
}

impl BimatrixGame {
    pub fn new(row_payoffs: Matrix, col_payoffs: Matrix) -> Result<Self, GameError> {
        let n = row_payoffs.rows();
        for (m, context) in [(&row_payoffs, "R"), (&col_payoffs, "C")] {
            if !m.is_square() || m.rows() != n {
                return Err(GameError::NotSquare {
                    context,
                    n,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
            m.validate_unit_range(context)?;
        }
        Ok(BimatrixGame {
            n,
            row_payoffs,
            col_payoffs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_matrix(&self) -> &Matrix {
        &self.row_payoffs
    }

    pub fn col_matrix(&self) -> &Matrix {
        &self.col_payoffs
    }

    pub fn matrix_for(&self, role: Role) -> &Matrix {
        match role {
            Role::Row => &self.row_payoffs,
            Role::Col => &self.col_payoffs,
        }
    }
}

/// Serialized form of a game; mirrors the on-disk game file.
#[derive(Serialize, Deserialize)]
struct GameRepr {
    n: usize,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
}

impl TryFrom<GameRepr> for BimatrixGame {
    type Error = GameError;

    fn try_from(repr: GameRepr) -> Result<Self, GameError> {
        let r = Matrix::from_rows(repr.r)?;
        let c = Matrix::from_rows(repr.c)?;
        let game = BimatrixGame::new(r, c)?;
        if game.n() != repr.n {
            return Err(GameError::DimensionMismatch {
                context: "game file field n",
                expected: repr.n,
                found: game.n(),
            });
        }
        Ok(game)
    }
}

impl From<BimatrixGame> for GameRepr {
    fn from(game: BimatrixGame) -> GameRepr {
        GameRepr {
            n: game.n,
            r: game.row_payoffs.to_rows(),
            c: game.col_payoffs.to_rows(),
        }
    }
}

/// Regret of both players at a profile, under both solution concepts.
///
/// `eps_ne` is the larger of the two plain regrets; `eps_wsne` is the largest
/// deficit of any supported pure strategy against the best response, so
/// `eps_wsne >= eps_ne` always (a weighted average cannot beat its maximum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub row_regret: f64,
    pub col_regret: f64,
    pub eps_ne: f64,
    pub eps_wsne: f64,
}

/// Expected payoffs of every pure strategy on the opposite axis of
/// `strategy`: with `Axis::Cols` the strategy weights columns and the result
/// has one entry per row (`A y`), with `Axis::Rows` it weights rows and the
/// result has one entry per column (`x^T A`).
pub fn pure_response_values(
    matrix: &Matrix,
    strategy: &MixedStrategy,
    strategy_axis: Axis,
) -> Result<Vec<f64>, GameError> {
    match strategy_axis {
        Axis::Cols => {
            if strategy.dim() != matrix.cols() {
                return Err(GameError::DimensionMismatch {
                    context: "strategy over columns",
                    expected: matrix.cols(),
                    found: strategy.dim(),
                });
            }
            let probs = strategy.probs();
            Ok((0..matrix.rows())
                .map(|i| {
                    matrix
                        .row(i)
                        .iter()
                        .zip(probs)
                        .map(|(a, p)| a * p)
                        .sum()
                })
                .collect())
        }
        Axis::Rows => {
            if strategy.dim() != matrix.rows() {
                return Err(GameError::DimensionMismatch {
                    context: "strategy over rows",
                    expected: matrix.rows(),
                    found: strategy.dim(),
                });
            }
            let mut out = vec![0.0; matrix.cols()];
            for (i, &p) in strategy.probs().iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (j, a) in matrix.row(i).iter().enumerate() {
                    out[j] += p * a;
                }
            }
            Ok(out)
        }
    }
}

/// Bilinear form `x^T A y`.
pub fn expected_payoff(
    x: &MixedStrategy,
    matrix: &Matrix,
    y: &MixedStrategy,
) -> Result<f64, GameError> {
    let row_values = pure_response_values(matrix, y, Axis::Cols)?;
    if x.dim() != matrix.rows() {
        return Err(GameError::DimensionMismatch {
            context: "strategy over rows",
            expected: matrix.rows(),
            found: x.dim(),
        });
    }
    Ok(x.probs()
        .iter()
        .zip(&row_values)
        .map(|(p, v)| p * v)
        .sum())
}

/// Payoff of `profile` to the player in `role`.
pub fn payoff(
    game: &BimatrixGame,
    profile: &StrategyProfile,
    role: Role,
) -> Result<f64, GameError> {
    expected_payoff(&profile.row, game.matrix_for(role), &profile.col)
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    (best, values[best])
}

/// Best pure response of the player in `role` (whose payoff matrix is
/// `matrix`) to the opponent's mixed strategy. Ties break to the lowest
/// index.
pub fn best_response(
    matrix: &Matrix,
    opponent: &MixedStrategy,
    role: Role,
) -> Result<(usize, f64), GameError> {
    let values = match role {
        Role::Row => pure_response_values(matrix, opponent, Axis::Cols)?,
        Role::Col => pure_response_values(matrix, opponent, Axis::Rows)?,
    };
    Ok(argmax(&values))
}

/// Largest deficit of a supported pure strategy relative to the best
/// response, given per-pure-strategy values and the playing distribution.
fn supported_deficit(values: &[f64], strategy: &MixedStrategy, best: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &p) in strategy.probs().iter().enumerate() {
        if p > SUPPORT_EPS {
            worst = worst.max(best - values[i]);
        }
    }
    worst
}

/// Evaluates both regret metrics of a profile with full knowledge of the
/// game.
pub fn regret_report(
    game: &BimatrixGame,
    profile: &StrategyProfile,
) -> Result<RegretReport, GameError> {
    let row_values = pure_response_values(game.row_matrix(), &profile.col, Axis::Cols)?;
    let col_values = pure_response_values(game.col_matrix(), &profile.row, Axis::Rows)?;
    if profile.row.dim() != game.n() {
        return Err(GameError::DimensionMismatch {
            context: "row strategy",
            expected: game.n(),
            found: profile.row.dim(),
        });
    }
    if profile.col.dim() != game.n() {
        return Err(GameError::DimensionMismatch {
            context: "col strategy",
            expected: game.n(),
            found: profile.col.dim(),
        });
    }

    let row_payoff: f64 = profile
        .row
        .probs()
        .iter()
        .zip(&row_values)
        .map(|(p, v)| p * v)
        .sum();
    let col_payoff: f64 = profile
        .col
        .probs()
        .iter()
        .zip(&col_values)
        .map(|(p, v)| p * v)
        .sum();

    let (_, row_best) = argmax(&row_values);
    let (_, col_best) = argmax(&col_values);

    let row_regret = (row_best - row_payoff).max(0.0);
    let col_regret = (col_best - col_payoff).max(0.0);
    let eps_ne = row_regret.max(col_regret);
    let eps_wsne = supported_deficit(&row_values, &profile.row, row_best)
        .max(supported_deficit(&col_values, &profile.col, col_best));

    Ok(RegretReport {
        row_regret,
        col_regret,
        eps_ne,
        eps_wsne,
    })
}

/// Total variation distance: half the L1 distance between the raw
/// probability vectors.
pub fn total_variation(a: &MixedStrategy, b: &MixedStrategy) -> Result<f64, GameError> {
    if a.dim() != b.dim() {
        return Err(GameError::DimensionMismatch {
            context: "total variation",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn matching_pennies() -> BimatrixGame {
        BimatrixGame::new(
            mat(&[&[1.0, 0.0], &[0.0, 1.0]]),
            mat(&[&[0.0, 1.0], &[1.0, 0.0]]),
        )
        .unwrap()
    }

    #[test]
    fn payoff_constant_matrix() {
        let g = BimatrixGame::new(Matrix::filled(3, 3, 0.5), Matrix::filled(3, 3, 0.5)).unwrap();
        let profile = StrategyProfile::new(
            MixedStrategy::new(vec![0.2, 0.3, 0.5]).unwrap(),
            MixedStrategy::uniform(3),
        );
        let v = payoff(&g, &profile, Role::Row).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn payoff_identity_pure_and_uniform() {
        let g = matching_pennies();
        let pure = StrategyProfile::new(MixedStrategy::point(0, 2), MixedStrategy::point(0, 2));
        assert_eq!(payoff(&g, &pure, Role::Row).unwrap(), 1.0);
        let uniform = StrategyProfile::new(MixedStrategy::uniform(2), MixedStrategy::uniform(2));
        assert!((payoff(&g, &uniform, Role::Row).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn payoff_dimension_mismatch_errors() {
        let g = matching_pennies();
        let profile = StrategyProfile::new(MixedStrategy::uniform(3), MixedStrategy::uniform(2));
        assert!(payoff(&g, &profile, Role::Row).is_err());
    }

    #[test]
    fn best_response_identity() {
        let r = Matrix::identity(2);
        let (idx, val) = best_response(&r, &MixedStrategy::point(0, 2), Role::Row).unwrap();
        assert_eq!((idx, val), (0, 1.0));
    }

    #[test]
    fn best_response_tie_breaks_low_index() {
        // Both rows evaluate to 0.5 against the uniform column strategy.
        let r = mat(&[&[0.2, 0.8], &[0.6, 0.4]]);
        let (idx, val) = best_response(&r, &MixedStrategy::uniform(2), Role::Row).unwrap();
        assert_eq!(idx, 0);
        assert!((val - 0.5).abs() < 1e-15);
    }

    #[test]
    fn best_response_all_ones_column() {
        let c = mat(&[&[0.0, 1.0], &[0.0, 1.0]]);
        for x in [
            MixedStrategy::uniform(2),
            MixedStrategy::point(0, 2),
            MixedStrategy::new(vec![0.9, 0.1]).unwrap(),
        ] {
            let (idx, val) = best_response(&c, &x, Role::Col).unwrap();
            assert_eq!((idx, val), (1, 1.0));
        }
    }

    #[test]
    fn regret_matching_pennies_uniform_is_equilibrium() {
        let g = matching_pennies();
        let profile = StrategyProfile::new(MixedStrategy::uniform(2), MixedStrategy::uniform(2));
        let report = regret_report(&g, &profile).unwrap();
        assert!(report.eps_ne.abs() < 1e-15);
        assert!(report.eps_wsne.abs() < 1e-15);
    }

    #[test]
    fn regret_matching_pennies_pure_profile() {
        let g = matching_pennies();
        let profile = StrategyProfile::new(MixedStrategy::point(0, 2), MixedStrategy::point(0, 2));
        let report = regret_report(&g, &profile).unwrap();
        assert_eq!(report.row_regret, 0.0);
        assert_eq!(report.col_regret, 1.0);
        assert_eq!(report.eps_ne, 1.0);
        assert_eq!(report.eps_wsne, 1.0);
    }

    #[test]
    fn regret_mutual_pure_best_response_is_zero() {
        let g = BimatrixGame::new(
            mat(&[&[1.0, 0.2], &[0.3, 0.4]]),
            mat(&[&[0.9, 0.1], &[0.5, 0.2]]),
        )
        .unwrap();
        let profile = StrategyProfile::new(MixedStrategy::point(0, 2), MixedStrategy::point(0, 2));
        let report = regret_report(&g, &profile).unwrap();
        assert_eq!(report.eps_ne, 0.0);
    }

    #[test]
    fn total_variation_examples() {
        let a = MixedStrategy::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(total_variation(&a, &a).unwrap(), 0.0);
        let e1 = MixedStrategy::point(0, 2);
        let e2 = MixedStrategy::point(1, 2);
        assert_eq!(total_variation(&e1, &e2).unwrap(), 1.0);
        assert!((total_variation(&a, &e1).unwrap() - 0.5).abs() < 1e-15);
        assert!(total_variation(&a, &MixedStrategy::uniform(3)).is_err());
    }

    #[test]
    fn game_rejects_out_of_range_payoffs() {
        let r = mat(&[&[1.5, 0.0], &[0.0, 1.0]]);
        let err = BimatrixGame::new(r, Matrix::identity(2)).unwrap_err();
        assert!(matches!(err, GameError::PayoffOutOfRange { row: 0, col: 0, .. }));
    }

    #[test]
    fn game_rejects_non_square() {
        let r = mat(&[&[0.1, 0.2, 0.3], &[0.4, 0.5, 0.6]]);
        assert!(matches!(
            BimatrixGame::new(r, Matrix::identity(2)).unwrap_err(),
            GameError::NotSquare { .. }
        ));
    }

    #[test]
    fn strategy_normalizes_and_validates() {
        let s = MixedStrategy::new(vec![2.0, 6.0]).unwrap();
        assert!((s.prob(0) - 0.25).abs() < 1e-15);
        assert!((s.probs().iter().sum::<f64>() - 1.0).abs() < STRATEGY_SUM_EPS);
        assert!(MixedStrategy::new(vec![-0.5, 1.0]).is_err());
        assert!(MixedStrategy::new(vec![0.0, 0.0]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
    }

    #[test]
    fn game_serde_round_trip() {
        let g = matching_pennies();
        let json = serde_json::to_string(&g).unwrap();
        let back: BimatrixGame = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn zero_regret_coincides_with_nash_inequalities() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);

        // Exact equilibrium: zero regret and the inequality set holds as is.
        let g = matching_pennies();
        let eq = StrategyProfile::new(MixedStrategy::uniform(2), MixedStrategy::uniform(2));
        assert_eq!(regret_report(&g, &eq).unwrap().eps_ne, 0.0);
        assert!(crate::oracle::nash_inequalities_hold(&g, &eq, 0.0));

        // Random profiles: the report and the brute-force inequality check
        // agree at the same tolerance.
        for trial in 0..200 {
            let n = 2 + trial % 5;
            let game = crate::generators::random_game(n, 500 + trial as u64);
            let profile = StrategyProfile::new(
                MixedStrategy::new((0..n).map(|_| rng.random::<f64>() + 1e-9).collect()).unwrap(),
                MixedStrategy::new((0..n).map(|_| rng.random::<f64>() + 1e-9).collect()).unwrap(),
            );
            let report = regret_report(&game, &profile).unwrap();
            assert_eq!(
                report.eps_ne <= 1e-9,
                crate::oracle::nash_inequalities_hold(&game, &profile, 1e-9),
                "trial {trial}: report {report:?}"
            );
        }
    }

    #[test]
    fn best_response_dominance_exhaustive_to_32() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(97);
        for n in 1..=32 {
            let game = crate::generators::random_game(n, 4_000 + n as u64);
            let y =
                MixedStrategy::new((0..n).map(|_| rng.random::<f64>() + 1e-9).collect()).unwrap();
            for (matrix, role, opponent) in [
                (game.row_matrix(), Role::Row, &y),
                (game.col_matrix(), Role::Col, &y),
            ] {
                let (_, best) = best_response(matrix, opponent, role).unwrap();
                let values = match role {
                    Role::Row => pure_response_values(matrix, opponent, Axis::Cols).unwrap(),
                    Role::Col => pure_response_values(matrix, opponent, Axis::Rows).unwrap(),
                };
                for v in values {
                    assert!(best >= v);
                }
            }
        }
    }

    fn strategy_strategy(dim: usize) -> impl Strategy<Value = MixedStrategy> {
        proptest::collection::vec(0.0f64..1.0, dim).prop_filter_map("zero mass", |w| {
            MixedStrategy::new(w.iter().map(|x| x + 1e-6).collect()).ok()
        })
    }

    fn game_strategy(n: usize) -> impl Strategy<Value = BimatrixGame> {
        (
            proptest::collection::vec(0.0f64..=1.0, n * n),
            proptest::collection::vec(0.0f64..=1.0, n * n),
        )
            .prop_map(move |(r, c)| {
                let rm = Matrix {
                    rows: n,
                    cols: n,
                    data: r,
                };
                let cm = Matrix {
                    rows: n,
                    cols: n,
                    data: c,
                };
                BimatrixGame::new(rm, cm).unwrap()
            })
    }

    proptest! {
        #[test]
        fn regret_ordering_invariant(
            g in (2usize..6).prop_flat_map(game_strategy),
        ) {
            let n = g.n();
            let profile = StrategyProfile::new(MixedStrategy::uniform(n), MixedStrategy::uniform(n));
            let rep = regret_report(&g, &profile).unwrap();
            prop_assert!(rep.eps_ne >= 0.0);
            prop_assert!(rep.eps_ne <= rep.eps_wsne + STRATEGY_SUM_EPS);
            prop_assert!(rep.eps_wsne <= 1.0 + STRATEGY_SUM_EPS);
        }

        #[test]
        fn best_response_dominates_all_pure_strategies(
            g in (2usize..8).prop_flat_map(game_strategy),
        ) {
            let n = g.n();
            let y = MixedStrategy::uniform(n);
            let (_, best) = best_response(g.row_matrix(), &y, Role::Row).unwrap();
            let values = pure_response_values(g.row_matrix(), &y, Axis::Cols).unwrap();
            for v in values {
                prop_assert!(best >= v);
            }
        }

        #[test]
        fn total_variation_is_a_metric(
            (a, b, c) in (2usize..7).prop_flat_map(|d| {
                (strategy_strategy(d), strategy_strategy(d), strategy_strategy(d))
            }),
        ) {
            let dab = total_variation(&a, &b).unwrap();
            let dba = total_variation(&b, &a).unwrap();
            let dac = total_variation(&a, &c).unwrap();
            let dcb = total_variation(&c, &b).unwrap();
            prop_assert!((dab - dba).abs() < 1e-15);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&dab));
            prop_assert!(dab <= dac + dcb + 1e-12);
            prop_assert!(total_variation(&a, &a).unwrap() == 0.0);
            prop_assert_eq!(dab == 0.0, a.probs() == b.probs());
        }
    }
}
