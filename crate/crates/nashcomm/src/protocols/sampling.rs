//! Communicating a mixed strategy as a sample.
//!
//! Sending a full probability vector would cost a payoff-matrix-sized
//! message, so the polylog procedures transmit `k = ceil(ln n / delta^2)`
//! i.i.d. draws instead and let the receiver rebuild the empirical
//! distribution (probabilities are multiples of `1/k`). A Hoeffding bound
//! makes any fixed linear payoff of the empirical strategy land within
//! `delta` of the source's with probability at least `1 - 1/n^2` per draw
//! batch, so the sender checks the property it actually needs against its
//! own matrix and redraws on failure; cap exhaustion therefore signals a
//! bug, not bad luck.

use rand::Rng;

use crate::engine::{BitString, ProtocolError};
use crate::game::{pure_response_values, Axis, Matrix, MixedStrategy, Role};

use super::index_bits;

/// One batch of `k` draws and its empirical distribution.
#[derive(Debug, Clone)]
pub struct SampleDraw {
    pub draws: Vec<usize>,
    pub empirical: MixedStrategy,
}

/// Draws `k` pure strategies i.i.d. from `source` and forms the empirical
/// distribution over `source.dim()` strategies.
pub fn draw_empirical<R: Rng + ?Sized>(source: &MixedStrategy, k: usize, rng: &mut R) -> SampleDraw {
    assert!(k >= 1);
    let mut counts = vec![0.0; source.dim()];
    let mut draws = Vec::with_capacity(k);
    for _ in 0..k {
        let i = source.sample(rng);
        counts[i] += 1.0;
        draws.push(i);
    }
    let empirical = MixedStrategy::new(counts).expect("k draws always carry mass");
    SampleDraw { draws, empirical }
}

/// Acceptance event for a sampled strategy, checked by the sender against
/// its own payoff matrix only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeviationCheck {
    /// The sample is what the opponent will play: accept only if no pure
    /// response of mine gains more than `cap` against it.
    CapOpponentExposure { cap: f64 },
    /// The sample is what I will play: accept only if its worst-case payoff
    /// over the opponent's pure responses stays at or above `floor`.
    KeepSecurityLevel { floor: f64 },
}

impl DeviationCheck {
    /// Evaluates the event with full knowledge of `own_matrix`.
    /// `candidate_axis` is the matrix dimension the candidate indexes.
    pub fn holds(
        &self,
        own_matrix: &Matrix,
        candidate_axis: Axis,
        candidate: &MixedStrategy,
    ) -> bool {
        let values = pure_response_values(own_matrix, candidate, candidate_axis)
            .expect("sample dimension matches matrix");
        match *self {
            DeviationCheck::CapOpponentExposure { cap } => {
                values.iter().all(|&v| v <= cap)
            }
            DeviationCheck::KeepSecurityLevel { floor } => {
                values.iter().all(|&v| v >= floor)
            }
        }
    }
}

/// An accepted sample and how many attempts it took.
#[derive(Debug, Clone)]
pub struct AcceptedSample {
    pub draw: SampleDraw,
    pub attempts: u32,
}

/// Repeatedly draws `k`-samples from `source` until `check` holds, up to
/// `resample_cap` attempts.
pub fn sample_strategy<R: Rng + ?Sized>(
    source: &MixedStrategy,
    k: usize,
    own_matrix: &Matrix,
    candidate_axis: Axis,
    check: DeviationCheck,
    resample_cap: u32,
    role: Role,
    rng: &mut R,
) -> Result<AcceptedSample, ProtocolError> {
    for attempt in 1..=resample_cap {
        let draw = draw_empirical(source, k, rng);
        if check.holds(own_matrix, candidate_axis, &draw.empirical) {
            return Ok(AcceptedSample {
                draw,
                attempts: attempt,
            });
        }
    }
    Err(ProtocolError::ResampleCapExhausted {
        role,
        attempts: resample_cap,
    })
}

/// Encodes a draw list as `k` fixed-width big-endian indices.
pub fn encode_draws(draws: &[usize], n: usize) -> BitString {
    let width = index_bits(n);
    let mut bits = BitString::new();
    for &d in draws {
        debug_assert!(d < n);
        bits.push_index(d, width);
    }
    bits
}

/// Decodes `k` indices back into the empirical mixed strategy over `n` pure
/// strategies.
pub fn decode_empirical(
    payload: &BitString,
    n: usize,
    k: usize,
) -> Result<MixedStrategy, ProtocolError> {
    let width = index_bits(n);
    if payload.len() != k * width {
        return Err(ProtocolError::MalformedMessage(format!(
            "sample payload has {} bits, expected {}",
            payload.len(),
            k * width
        )));
    }
    let mut counts = vec![0.0; n];
    let mut reader = payload.reader();
    for _ in 0..k {
        let idx = reader.read_index(width).expect("length checked");
        if idx >= n {
            return Err(ProtocolError::MalformedMessage(format!(
                "sampled index {idx} out of range for n={n}"
            )));
        }
        counts[idx] += 1.0;
    }
    MixedStrategy::new(counts).map_err(ProtocolError::from)
}
