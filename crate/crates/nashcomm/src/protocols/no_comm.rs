//! Zero-communication procedure.
//!
//! Each player splits probability evenly between its first pure strategy and
//! its best response to the opponent's first pure strategy (ties to the
//! lowest index). Whatever the opponent does, at least half of one's own
//! mass is anchored sensibly, which caps the regret of either player at 3/4.

use crate::engine::{
    Action, ChannelMode, Message, PlayerMachine, PlayerView, Protocol, ProtocolError,
};
use crate::game::{best_response, MixedStrategy, Role};
use crate::protocols::ProtocolParams;

pub struct NoComm;

impl Protocol for NoComm {
    fn id(&self) -> &'static str {
        "no-comm"
    }

    fn required_channel(&self) -> ChannelMode {
        ChannelMode::NoComm
    }

    fn build_player(
        &self,
        view: PlayerView,
        _params: &ProtocolParams,
    ) -> Result<Box<dyn PlayerMachine>, ProtocolError> {
        Ok(Box::new(NoCommMachine { view }))
    }
}

struct NoCommMachine {
    view: PlayerView,
}

/// Half the mass on pure strategy 0, half on `anchor`; collapses to a point
/// mass when `anchor` is 0 itself.
pub(super) fn half_mix(anchor: usize, n: usize) -> MixedStrategy {
    let mut weights = vec![0.0; n];
    weights[0] += 0.5;
    weights[anchor] += 0.5;
    MixedStrategy::new(weights).expect("valid mixture")
}

impl PlayerMachine for NoCommMachine {
    fn act(&mut self, _inbox: &[Message]) -> Result<Action, ProtocolError> {
        let n = match self.view.role {
            Role::Row => self.view.own_matrix.rows(),
            Role::Col => self.view.own_matrix.cols(),
        };
        // Best response to the opponent's first pure strategy: for the row
        // player that is column 0 of R, for the column player row 0 of C.
        let opponent_first = MixedStrategy::point(0, n);
        let (anchor, _) = best_response(&self.view.own_matrix, &opponent_first, self.view.role)?;
        Ok(Action::Output {
            strategy: half_mix(anchor, n),
            case: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_protocol, ChannelPolicy};
    use crate::game::{BimatrixGame, Matrix};
    use crate::protocols::ProtocolParams;

    fn run(game: &BimatrixGame) -> crate::engine::ProtocolOutcome {
        run_protocol(
            game,
            &NoComm,
            &ChannelPolicy::silent(),
            [1, 2],
            &ProtocolParams::ne_defaults(),
        )
        .unwrap()
    }

    #[test]
    fn constant_game_collapses_to_first_strategy() {
        let g = BimatrixGame::new(Matrix::filled(3, 3, 0.5), Matrix::filled(3, 3, 0.5)).unwrap();
        let outcome = run(&g);
        assert_eq!(outcome.profile.row, MixedStrategy::point(0, 3));
        assert_eq!(outcome.profile.col, MixedStrategy::point(0, 3));
        assert_eq!(outcome.report.eps_ne, 0.0);
        assert_eq!(outcome.transcript.bits_total(), 0);
    }

    #[test]
    fn anti_coordination_game_mixes() {
        let m = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let g = BimatrixGame::new(m.clone(), m).unwrap();
        let outcome = run(&g);
        // Both anchor on their best response to the opponent's first
        // strategy, which is index 1, giving the 50/50 mixture.
        assert_eq!(outcome.profile.row, MixedStrategy::uniform(2));
        assert_eq!(outcome.profile.col, MixedStrategy::uniform(2));
        assert!(outcome.report.eps_ne <= 0.75);
    }

    #[test]
    fn runs_under_any_policy() {
        let g = BimatrixGame::new(Matrix::identity(2), Matrix::identity(2)).unwrap();
        for policy in [
            ChannelPolicy::silent(),
            ChannelPolicy::two_way(),
            ChannelPolicy::one_way(crate::engine::Direction::ColToRow),
        ] {
            let outcome = run_protocol(&g, &NoComm, &policy, [0, 0], &ProtocolParams::ne_defaults())
                .unwrap();
            assert_eq!(outcome.transcript.bits_total(), 0);
        }
    }

    #[test]
    fn output_is_seed_independent() {
        let g = BimatrixGame::new(Matrix::identity(4), Matrix::identity(4)).unwrap();
        let a = run_protocol(&g, &NoComm, &ChannelPolicy::silent(), [1, 1], &ProtocolParams::ne_defaults()).unwrap();
        let b = run_protocol(&g, &NoComm, &ChannelPolicy::silent(), [99, 7], &ProtocolParams::ne_defaults()).unwrap();
        assert_eq!(a.profile, b.profile);
    }
}
