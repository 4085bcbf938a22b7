//! Brute-force reference implementations used by the test suites to check
//! the production code. Everything here recomputes from first principles
//! with plain loops; nothing routes through the solver or the protocol
//! machinery it is meant to audit.

use crate::game::{BimatrixGame, Matrix, MixedStrategy, StrategyProfile};

/// Row player's regret at `(x, y)` for an arbitrary (possibly rectangular)
/// payoff matrix: best pure row against `y` minus the achieved payoff.
pub fn row_regret(matrix: &Matrix, x: &MixedStrategy, y: &MixedStrategy) -> f64 {
    assert_eq!(x.dim(), matrix.rows(), "row strategy dimension");
    assert_eq!(y.dim(), matrix.cols(), "column strategy dimension");
    let mut best = f64::NEG_INFINITY;
    let mut achieved = 0.0;
    for i in 0..matrix.rows() {
        let mut v = 0.0;
        for j in 0..matrix.cols() {
            v += matrix.get(i, j) * y.prob(j);
        }
        best = best.max(v);
        achieved += x.prob(i) * v;
    }
    (best - achieved).max(0.0)
}

/// Checks the full set of Nash inequalities at a profile: no pure deviation
/// of either player gains more than `eps`.
pub fn nash_inequalities_hold(game: &BimatrixGame, profile: &StrategyProfile, eps: f64) -> bool {
    let n = game.n();
    let r = game.row_matrix();
    let c = game.col_matrix();
    let mut row_payoff = 0.0;
    let mut col_payoff = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = profile.row.prob(i) * profile.col.prob(j);
            row_payoff += w * r.get(i, j);
            col_payoff += w * c.get(i, j);
        }
    }
    for i in 0..n {
        let dev: f64 = (0..n).map(|j| r.get(i, j) * profile.col.prob(j)).sum();
        if dev > row_payoff + eps {
            return false;
        }
    }
    for j in 0..n {
        let dev: f64 = (0..n).map(|i| profile.row.prob(i) * c.get(i, j)).sum();
        if dev > col_payoff + eps {
            return false;
        }
    }
    true
}

/// Value of the 2x2 zero-sum game on `a` in closed form: a pure saddle point
/// if one exists, otherwise the mixing formula `(ad - bc) / (a - b - c + d)`.
pub fn zero_sum_value_2x2(m: &Matrix) -> f64 {
    assert!(m.rows() == 2 && m.cols() == 2);
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let maximin = (a.min(b)).max(c.min(d));
    let minimax = (a.max(c)).min(b.max(d));
    if (maximin - minimax).abs() < 1e-15 {
        return maximin;
    }
    (a * d - b * c) / (a - b - c + d)
}

/// Zero-sum value by enumerating equal-size support pairs and solving the
/// indifference equations (a Shapley-Snow kernel always exists, so some pair
/// passes). Intended for small `n`; cost grows as `4^n`.
pub fn zero_sum_value_by_support_enumeration(a: &Matrix) -> Option<f64> {
    assert!(a.is_square());
    let n = a.rows();
    let tol = 1e-9;
    for size in 1..=n {
        for row_support in subsets_of_size(n, size) {
            for col_support in subsets_of_size(n, size) {
                if let Some((x, y, v)) =
                    solve_kernel(a, &row_support, &col_support, tol)
                {
                    if kernel_is_equilibrium(a, &x, &y, v, tol) {
                        return Some(v);
                    }
                }
            }
        }
    }
    None
}

fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(start: usize, n: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, size, current, out);
            current.pop();
        }
    }
    rec(0, n, size, &mut current, &mut out);
    out
}

/// Solves for strategies supported on the given sets that make the opponent
/// indifferent across them, returning dense `(x, y, v)` on success.
fn solve_kernel(
    a: &Matrix,
    rows: &[usize],
    cols: &[usize],
    tol: f64,
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let s = rows.len();
    let n = a.rows();

    // Unknowns: y over `cols` and v. Equations: (Ay)_i = v on `rows`, sum = 1.
    let mut system = vec![vec![0.0; s + 2]; s + 1];
    for (ei, &i) in rows.iter().enumerate() {
        for (ej, &j) in cols.iter().enumerate() {
            system[ei][ej] = a.get(i, j);
        }
        system[ei][s] = -1.0;
    }
    for ej in 0..s {
        system[s][ej] = 1.0;
    }
    system[s][s + 1] = 1.0;
    let sol_y = gaussian_solve(system)?;
    let v = sol_y[s];

    // Same construction transposed for x.
    let mut system = vec![vec![0.0; s + 2]; s + 1];
    for (ej, &j) in cols.iter().enumerate() {
        for (ei, &i) in rows.iter().enumerate() {
            system[ej][ei] = a.get(i, j);
        }
        system[ej][s] = -1.0;
    }
    for ei in 0..s {
        system[s][ei] = 1.0;
    }
    system[s][s + 1] = 1.0;
    let sol_x = gaussian_solve(system)?;

    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for (ei, &i) in rows.iter().enumerate() {
        if sol_x[ei] < -tol {
            return None;
        }
        x[i] = sol_x[ei].max(0.0);
    }
    for (ej, &j) in cols.iter().enumerate() {
        if sol_y[ej] < -tol {
            return None;
        }
        y[j] = sol_y[ej].max(0.0);
    }
    if (sol_x[s] - v).abs() > 1e-6 {
        return None;
    }
    Some((x, y, v))
}

fn kernel_is_equilibrium(a: &Matrix, x: &[f64], y: &[f64], v: f64, tol: f64) -> bool {
    let n = a.rows();
    for i in 0..n {
        let payoff: f64 = (0..n).map(|j| a.get(i, j) * y[j]).sum();
        if payoff > v + tol {
            return false;
        }
    }
    for j in 0..n {
        let payoff: f64 = (0..n).map(|i| x[i] * a.get(i, j)).sum();
        if payoff < v - tol {
            return false;
        }
    }
    true
}

/// Gaussian elimination with partial pivoting on an augmented system
/// (last column is the right-hand side). Returns `None` when singular.
fn gaussian_solve(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let rows = m.len();
    let cols = m[0].len();
    debug_assert_eq!(cols, rows + 1);
    for p in 0..rows {
        let pivot_row = (p..rows).max_by(|&i, &j| {
            m[i][p].abs().partial_cmp(&m[j][p].abs()).unwrap()
        })?;
        if m[pivot_row][p].abs() < 1e-12 {
            return None;
        }
        m.swap(p, pivot_row);
        for i in 0..rows {
            if i == p {
                continue;
            }
            let factor = m[i][p] / m[p][p];
            if factor == 0.0 {
                continue;
            }
            for j in p..cols {
                let sub = factor * m[p][j];
                m[i][j] -= sub;
            }
        }
    }
    Some((0..rows).map(|i| m[i][cols - 1] / m[i][i]).collect())
}
