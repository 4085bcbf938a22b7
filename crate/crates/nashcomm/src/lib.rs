//! Communication-bounded computation of approximate Nash equilibria.
//!
//! Two players each know their own payoff matrix of a bimatrix game and
//! nothing about the opponent's. They run an uncoupled protocol over a
//! bit-metered channel and each commit to a mixed strategy; the quality of
//! the resulting profile is graded by its regret (`eps_ne`) or by the
//! well-supported variant (`eps_wsne`), recomputed by a referee who sees
//! both matrices.
//!
//! The crate provides:
//!
//! - [`game`]: payoff matrices, mixed strategies, and regret evaluation;
//! - [`zerosum`]: a self-contained simplex solver for zero-sum games;
//! - [`engine`]: the metered-channel executor and deterministic replay;
//! - [`protocols`]: the protocol catalogue (`no-comm`, `dmp-oneway`,
//!   `polylog-ne`, `polylog-wsne`) and the sampled-strategy subroutine;
//! - [`generators`]: adversarial game families and seeded random games;
//! - [`harness`]: batch sweeps, CSV/JSON reports, and file formats;
//! - [`oracle`]: brute-force reference computations for the test suites.

pub mod engine;
pub mod game;
pub mod generators;
pub mod harness;
pub mod oracle;
pub mod protocols;
pub mod zerosum;

pub use engine::{
    run_protocol, ChannelMode, ChannelPolicy, Direction, ProtocolError, ProtocolOutcome,
    Transcript,
};
pub use game::{
    best_response, payoff, regret_report, total_variation, Axis, BimatrixGame, GameError, Matrix,
    MixedStrategy, RegretReport, Role, StrategyProfile,
};
pub use protocols::ProtocolParams;
pub use zerosum::{solve_zero_sum, ZeroSumSolution, SOLVER_TOLERANCE};
