//! One-way half-regret procedure.
//!
//! The row player anchors on row 0. The column player best-responds to that
//! row with a pure column `j`, transmits `j` in `ceil(log2 n)` bits, and
//! plays it. The row player then splits its mass between row 0 and its best
//! response to column `j`. Half of each player's relevant mass sits on a
//! best response, so neither regret can exceed 1/2 — and the only traffic is
//! the single column index.

use crate::engine::{
    Action, BitString, ChannelMode, Direction, Message, PlayerMachine, PlayerView, Protocol,
    ProtocolError,
};
use crate::game::{best_response, MixedStrategy, Role};
use crate::protocols::{index_bits, no_comm::half_mix, ProtocolParams};

pub struct DmpOneWay;

impl Protocol for DmpOneWay {
    fn id(&self) -> &'static str {
        "dmp-oneway"
    }

    fn required_channel(&self) -> ChannelMode {
        ChannelMode::OneWay(Direction::ColToRow)
    }

    fn build_player(
        &self,
        view: PlayerView,
        _params: &ProtocolParams,
    ) -> Result<Box<dyn PlayerMachine>, ProtocolError> {
        Ok(Box::new(DmpMachine {
            view,
            chosen: None,
        }))
    }
}

struct DmpMachine {
    view: PlayerView,
    chosen: Option<usize>,
}

impl PlayerMachine for DmpMachine {
    fn act(&mut self, inbox: &[Message]) -> Result<Action, ProtocolError> {
        let n = self.view.own_matrix.rows();
        let width = index_bits(n);
        match self.view.role {
            Role::Col => {
                if let Some(j) = self.chosen {
                    return Ok(Action::Output {
                        strategy: MixedStrategy::point(j, n),
                        case: None,
                    });
                }
                let anchor_row = MixedStrategy::point(0, n);
                let (j, _) = best_response(&self.view.own_matrix, &anchor_row, Role::Col)?;
                self.chosen = Some(j);
                let mut payload = BitString::new();
                payload.push_index(j, width);
                Ok(Action::Send(payload))
            }
            Role::Row => {
                let Some(message) = inbox.first() else {
                    return Ok(Action::Wait);
                };
                let j = message
                    .payload
                    .reader()
                    .read_index(width)
                    .filter(|&j| j < n && message.payload.len() == width)
                    .ok_or_else(|| {
                        ProtocolError::MalformedMessage(format!(
                            "expected a {width}-bit column index"
                        ))
                    })?;
                let (k, _) =
                    best_response(&self.view.own_matrix, &MixedStrategy::point(j, n), Role::Row)?;
                Ok(Action::Output {
                    strategy: half_mix(k, n),
                    case: None,
                })
            }
        }
    }
}
