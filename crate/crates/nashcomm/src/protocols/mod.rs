//! The protocol catalogue: four uncoupled procedures for approximate Nash
//! equilibrium, each expressed as a pair of player state machines for the
//! engine, plus the sampled-strategy communication subroutine they share.
//!
//! | identifier      | channel            | guarantee                      |
//! |-----------------|--------------------|--------------------------------|
//! | `no-comm`       | none               | eps_ne <= 3/4                  |
//! | `dmp-oneway`    | column -> row      | eps_ne <= 1/2                  |
//! | `polylog-ne`    | two-way            | eps_ne <= alpha + delta        |
//! | `polylog-wsne`  | two-way            | eps_wsne <= alpha + delta      |
//!
//! The polylog entries default alpha to `(5 - sqrt(17)) / 2 ~ 0.438` for the
//! plain variant and `sqrt(3) - 1 ~ 0.732` for the well-supported variant,
//! and spend `2k·ceil(log2 n) + 2·ceil(log2 n) + 2` bits at most, where
//! `k = ceil(ln n / delta^2)` is the sample size.

mod dmp;
mod no_comm;
mod polylog;
pub mod sampling;

pub use dmp::DmpOneWay;
pub use no_comm::NoComm;
pub use polylog::{PolylogNe, PolylogWsne};

use serde::{Deserialize, Serialize};

use crate::engine::{ChannelPolicy, Protocol, ProtocolError};
use crate::zerosum::SOLVER_TOLERANCE;

/// Threshold optimized for the plain approximate-equilibrium procedure:
/// `(5 - sqrt(17)) / 2`.
pub fn default_ne_alpha() -> f64 {
    (5.0 - 17f64.sqrt()) / 2.0
}

/// Threshold optimized for the well-supported procedure: `sqrt(3) - 1`.
pub fn default_wsne_alpha() -> f64 {
    3f64.sqrt() - 1.0
}

/// Tunable parameters shared by the protocols. `alpha` only matters to the
/// polylog procedures; `delta` and `resample_cap` drive the sampling
/// subroutine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub alpha: f64,
    pub delta: f64,
    pub resample_cap: u32,
}

impl ProtocolParams {
    pub fn ne_defaults() -> Self {
        ProtocolParams {
            alpha: default_ne_alpha(),
            delta: 0.05,
            resample_cap: 100,
        }
    }

    pub fn wsne_defaults() -> Self {
        ProtocolParams {
            alpha: default_wsne_alpha(),
            delta: 0.05,
            resample_cap: 100,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ProtocolError::InvalidParams(format!(
                "alpha {} must be in (0, 1)",
                self.alpha
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(ProtocolError::InvalidParams(format!(
                "delta {} must be in (0, 1]",
                self.delta
            )));
        }
        if self.resample_cap == 0 {
            return Err(ProtocolError::InvalidParams(
                "resample_cap must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// All registered protocols.
pub fn registry() -> &'static [&'static dyn Protocol] {
    static REGISTRY: [&dyn Protocol; 4] = [&NoComm, &DmpOneWay, &PolylogNe, &PolylogWsne];
    &REGISTRY
}

/// Finds a protocol by its public identifier.
pub fn lookup(id: &str) -> Option<&'static dyn Protocol> {
    registry().iter().copied().find(|p| p.id() == id)
}

/// Default parameters appropriate for a protocol (polylog variants pick
/// their own alpha; the rest do not read the parameters at all).
pub fn default_params(id: &str) -> ProtocolParams {
    if id == PolylogWsne.id() {
        ProtocolParams::wsne_defaults()
    } else {
        ProtocolParams::ne_defaults()
    }
}

/// The loosest channel policy a protocol needs.
pub fn natural_policy(protocol: &dyn Protocol) -> ChannelPolicy {
    match protocol.required_channel() {
        crate::engine::ChannelMode::NoComm => ChannelPolicy::silent(),
        crate::engine::ChannelMode::OneWay(d) => ChannelPolicy::one_way(d),
        crate::engine::ChannelMode::TwoWay => ChannelPolicy::two_way(),
    }
}

/// Which regret metric a protocol's guarantee bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuaranteeMetric {
    EpsNe,
    EpsWsne,
}

/// A protocol's declared worst-case bound, with the small numerical
/// headroom the verification sweeps grant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guarantee {
    pub metric: GuaranteeMetric,
    pub threshold: f64,
}

/// Declared guarantee of a protocol under `params`.
pub fn guarantee(id: &str, params: &ProtocolParams) -> Option<Guarantee> {
    let polylog_bound = params.alpha + params.delta + 2.0 * SOLVER_TOLERANCE + 1e-6;
    match id {
        "no-comm" => Some(Guarantee {
            metric: GuaranteeMetric::EpsNe,
            threshold: 0.75 + 1e-9,
        }),
        "dmp-oneway" => Some(Guarantee {
            metric: GuaranteeMetric::EpsNe,
            threshold: 0.5 + 1e-9,
        }),
        "polylog-ne" => Some(Guarantee {
            metric: GuaranteeMetric::EpsNe,
            threshold: polylog_bound,
        }),
        "polylog-wsne" => Some(Guarantee {
            metric: GuaranteeMetric::EpsWsne,
            threshold: polylog_bound,
        }),
        _ => None,
    }
}

/// Encoding width of a pure-strategy index: `ceil(log2 n)` bits, with a
/// 1-bit floor so the degenerate single-strategy game still sends something.
pub fn index_bits(n: usize) -> usize {
    debug_assert!(n >= 1);
    let width = (usize::BITS - (n - 1).leading_zeros()) as usize;
    width.max(1)
}

/// Sample size of the mixed-strategy communication subroutine:
/// `ceil(ln n / delta^2)`, at least 1.
pub fn sample_count(n: usize, delta: f64) -> usize {
    let k = ((n as f64).ln() / (delta * delta)).ceil();
    (k as usize).max(1)
}

/// Exact bit cost of the polylog procedures; which case fired decides the
/// third message's size.
pub fn polylog_bits(n: usize, delta: f64, case_two: bool) -> u64 {
    let k = sample_count(n, delta) as u64;
    let width = index_bits(n) as u64;
    if case_two {
        2 + k * width + width
    } else {
        2 + 2 * k * width
    }
}

pub(crate) const CASE_ONE: &str = "case1";
pub(crate) const CASE_TWO_ROW: &str = "case2-row";
pub(crate) const CASE_TWO_COL: &str = "case2-col";
