//! Adversarial and combinatorial game families, plus seeded random games.
//!
//! The star construction is [`SubsetMatrix`]: the 0/1 matrix with `n`
//! columns and one row per `k`-subset of the columns, `k = floor(sqrt(n))`.
//! Whatever distribution the row player commits to over its rows, some
//! column is covered with probability at most `k/n`, and a column player who
//! concentrates mass `p` there makes the row player regret nearly `p`. The
//! padded embedding plants the same gadget inside a larger square matrix and
//! adds a reward for abandoning it. Column indicator matrices give the
//! column player a single all-or-nothing column; paired with an identity
//! row matrix at size 2 they defeat every one-way well-supported procedure.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{BimatrixGame, GameError, Matrix, MixedStrategy};

/// Cap on the number of enumerated subset rows.
pub const DEFAULT_ROW_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("n must be at least 1")]
    EmptyDimension,
    #[error("subset matrix for n={n} needs {rows} rows, over the cap of {cap}")]
    RowCapExceeded { n: usize, rows: u128, cap: usize },
    #[error("column index {index} out of range for n={n}")]
    ColumnOutOfRange { index: usize, n: usize },
    #[error("infeasible host sets: {0}")]
    InfeasibleHosts(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// 0/1 matrix whose rows enumerate, in lexicographic order, every subset of
/// size `k = floor(sqrt(n))` of the `n` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetMatrix {
    n: usize,
    ones_per_row: usize,
    matrix: Matrix,
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul((n - k + i) as u128)?;
        acc /= i as u128;
    }
    Some(acc)
}

/// In-place advance to the lexicographically next `k`-subset of `0..n`;
/// false once the last subset is reached.
fn next_subset(support: &mut [usize], n: usize) -> bool {
    let k = support.len();
    for i in (0..k).rev() {
        if support[i] < i + n - k {
            support[i] += 1;
            for t in i + 1..k {
                support[t] = support[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

impl SubsetMatrix {
    pub fn new(n: usize) -> Result<Self, GeneratorError> {
        Self::with_row_cap(n, DEFAULT_ROW_CAP)
    }

    pub fn with_row_cap(n: usize, cap: usize) -> Result<Self, GeneratorError> {
        if n == 0 {
            return Err(GeneratorError::EmptyDimension);
        }
        let k = n.isqrt().max(1);
        let rows = binomial(n, k).filter(|&r| r <= cap as u128).ok_or(
            GeneratorError::RowCapExceeded {
                n,
                rows: binomial(n, k).unwrap_or(u128::MAX),
                cap,
            },
        )?;
        let rows = rows as usize;

        let mut matrix = Matrix::zeros(rows, n);
        let mut support: Vec<usize> = (0..k).collect();
        for row in 0..rows {
            for &j in &support {
                matrix.set(row, j, 1.0);
            }
            if row + 1 < rows {
                let advanced = next_subset(&mut support, n);
                debug_assert!(advanced, "ran out of subsets early");
            }
        }
        debug_assert!(!next_subset(&mut support.clone(), n));
        Ok(SubsetMatrix {
            n,
            ones_per_row: k,
            matrix,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `k = floor(sqrt(n))`, the number of ones in every row.
    pub fn ones_per_row(&self) -> usize {
        self.ones_per_row
    }

    pub fn row_count(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Coverage probability of every column under a row distribution: entry
    /// `j` is the probability that a row drawn from `x` has a 1 in column
    /// `j`. The entries sum to `k`.
    pub fn column_coverage(&self, x: &MixedStrategy) -> Vec<f64> {
        assert_eq!(x.dim(), self.row_count(), "row strategy dimension");
        let mut coverage = vec![0.0; self.n];
        for (i, &p) in x.probs().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, cov) in coverage.iter_mut().enumerate() {
                *cov += p * self.matrix.get(i, j);
            }
        }
        coverage
    }

    /// The least-covered column under `x` (lowest index on ties) and its
    /// coverage. The coverages sum to `k` over `n` columns, so the minimum
    /// is at most `k/n`.
    pub fn min_coverage_column(&self, x: &MixedStrategy) -> (usize, f64) {
        let coverage = self.column_coverage(x);
        let mut best = 0;
        for (j, &c) in coverage.iter().enumerate() {
            if c < coverage[best] {
                best = j;
            }
        }
        debug_assert!(coverage[best] <= self.ones_per_row as f64 / self.n as f64 + 1e-9);
        (best, coverage[best])
    }
}

/// All-or-nothing column matrix: 1 everywhere in column `col`, 0 elsewhere.
pub fn column_indicator(n: usize, col: usize) -> Result<Matrix, GeneratorError> {
    if n == 0 {
        return Err(GeneratorError::EmptyDimension);
    }
    if col >= n {
        return Err(GeneratorError::ColumnOutOfRange { index: col, n });
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m.set(i, col, 1.0);
    }
    Ok(m)
}

/// Square game pairing the identity row matrix with a column indicator.
/// At `n = 2` this is the family that defeats every one-way well-supported
/// procedure: any row strategy leaves some supported row paying zero
/// against the column the opponent is forced to play.
pub fn identity_indicator_game(n: usize, col: usize) -> Result<BimatrixGame, GeneratorError> {
    Ok(BimatrixGame::new(
        Matrix::identity(n),
        column_indicator(n, col)?,
    )?)
}

/// A square row-player matrix with a [`SubsetMatrix`] gadget embedded in
/// chosen host rows/columns. Rows outside the gadget pay zero everywhere;
/// rows inside it pay 1 on every column outside the gadget.
#[derive(Debug, Clone)]
pub struct PaddedSubsetGame {
    n: usize,
    matrix: Matrix,
    gadget_rows: Vec<usize>,
    gadget_cols: Vec<usize>,
    embedded: SubsetMatrix,
}

impl PaddedSubsetGame {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The full square row-player payoff matrix.
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Rows of the full matrix holding gadget rows, in gadget order.
    pub fn gadget_rows(&self) -> &[usize] {
        &self.gadget_rows
    }

    /// Columns of the full matrix holding gadget columns, in gadget order.
    pub fn gadget_cols(&self) -> &[usize] {
        &self.gadget_cols
    }

    pub fn embedded(&self) -> &SubsetMatrix {
        &self.embedded
    }

    /// Least-covered gadget column (as a full-matrix column index) under a
    /// full-matrix row strategy, measured by the unnormalized mass `x`
    /// places on gadget rows covering each gadget column.
    pub fn min_coverage_column(&self, x: &MixedStrategy) -> (usize, f64) {
        assert_eq!(x.dim(), self.n, "row strategy dimension");
        let m = self.embedded.matrix();
        let mut best = 0;
        let mut best_cov = f64::INFINITY;
        for (c, &full_col) in self.gadget_cols.iter().enumerate() {
            let mut cov = 0.0;
            for (r, &full_row) in self.gadget_rows.iter().enumerate() {
                cov += x.prob(full_row) * m.get(r, c);
            }
            if cov < best_cov {
                best_cov = cov;
                best = full_col;
            }
        }
        (best, best_cov)
    }
}

/// Embeds the largest subset gadget that fits in the given host sets inside
/// an all-zero `n x n` matrix. The first `binomial(n', k')` host rows and
/// first `n'` host columns (both in sorted order) carry the gadget; leftover
/// host rows behave like non-host rows (all zero) and leftover host columns
/// like non-host columns (paying 1 on gadget rows).
pub fn padded_subset_game(
    n: usize,
    host_rows: &[usize],
    host_cols: &[usize],
) -> Result<PaddedSubsetGame, GeneratorError> {
    if n == 0 {
        return Err(GeneratorError::EmptyDimension);
    }
    let rows = normalized_hosts(host_rows, n, "host rows")?;
    let cols = normalized_hosts(host_cols, n, "host columns")?;

    // Largest n' whose subset gadget fits the hosts.
    let mut chosen: Option<(usize, usize)> = None; // (n', row count)
    for candidate in 1..=cols.len() {
        let k = candidate.isqrt().max(1);
        match binomial(candidate, k) {
            Some(r) if r <= rows.len() as u128 => chosen = Some((candidate, r as usize)),
            _ => {}
        }
    }
    let Some((n_prime, gadget_row_count)) = chosen else {
        return Err(GeneratorError::InfeasibleHosts(format!(
            "no subset gadget fits {} host rows and {} host columns",
            rows.len(),
            cols.len()
        )));
    };
    let embedded = SubsetMatrix::new(n_prime)?;
    debug_assert_eq!(embedded.row_count(), gadget_row_count);

    let gadget_rows: Vec<usize> = rows[..gadget_row_count].to_vec();
    let gadget_cols: Vec<usize> = cols[..n_prime].to_vec();

    let mut matrix = Matrix::zeros(n, n);
    let in_gadget_col: Vec<bool> = {
        let mut mask = vec![false; n];
        for &c in &gadget_cols {
            mask[c] = true;
        }
        mask
    };
    for (r, &full_row) in gadget_rows.iter().enumerate() {
        for j in 0..n {
            if in_gadget_col[j] {
                let c = gadget_cols.iter().position(|&gc| gc == j).unwrap();
                matrix.set(full_row, j, embedded.matrix().get(r, c));
            } else {
                matrix.set(full_row, j, 1.0);
            }
        }
    }

    Ok(PaddedSubsetGame {
        n,
        matrix,
        gadget_rows,
        gadget_cols,
        embedded,
    })
}

fn normalized_hosts(
    hosts: &[usize],
    n: usize,
    what: &str,
) -> Result<Vec<usize>, GeneratorError> {
    if hosts.is_empty() {
        return Err(GeneratorError::InfeasibleHosts(format!("{what} are empty")));
    }
    let mut sorted = hosts.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(GeneratorError::InfeasibleHosts(format!(
                "{what} contain duplicate index {}",
                pair[0]
            )));
        }
    }
    if *sorted.last().unwrap() >= n {
        return Err(GeneratorError::InfeasibleHosts(format!(
            "{what} index {} out of range for n={n}",
            sorted.last().unwrap()
        )));
    }
    Ok(sorted)
}

/// Uniform random game: i.i.d. entries in `[0, 1)`, reproducible from the
/// seed (row matrix first, row-major order).
pub fn random_game(n: usize, seed: u64) -> BimatrixGame {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        Matrix::from_rows((0..n).map(|_| (0..n).map(|_| rng.random()).collect()).collect())
            .expect("non-empty")
    };
    let r = draw();
    let c = draw();
    BimatrixGame::new(r, c).expect("entries in range")
}
