//! Engine-level contracts: structural information isolation, exact bit
//! accounting, and equivalence of silent protocols with isolated execution.

use nashcomm::engine::{run_protocol, Action, ChannelPolicy, PlayerView};
use nashcomm::game::{BimatrixGame, Matrix, MixedStrategy, Role};
use nashcomm::generators::{column_indicator, random_game};
use nashcomm::protocols::{lookup, natural_policy, ProtocolParams};

/// A player's outbound traffic must be a function of its own matrix, its
/// seed, and the opponent messages received so far. Running the same row
/// matrix against two different column matrices, the transcripts must agree
/// up to the first differing message, and that message must come from the
/// column player.
#[test]
fn row_player_cannot_see_column_matrix() {
    let r = random_game(6, 1).row_matrix().clone();
    let c_low = Matrix::filled(6, 6, 0.2);
    let c_high = column_indicator(6, 3).unwrap();
    let game_low = BimatrixGame::new(r.clone(), c_low).unwrap();
    let game_high = BimatrixGame::new(r, c_high).unwrap();

    for protocol_id in ["dmp-oneway", "polylog-ne", "polylog-wsne"] {
        let protocol = lookup(protocol_id).unwrap();
        let policy = natural_policy(protocol);
        let params = ProtocolParams::ne_defaults();
        let a = run_protocol(&game_low, protocol, &policy, [9, 9], &params).unwrap();
        let b = run_protocol(&game_high, protocol, &policy, [9, 9], &params).unwrap();

        let mut diverged = false;
        for (ma, mb) in a.transcript.messages.iter().zip(&b.transcript.messages) {
            if ma == mb {
                continue;
            }
            assert_eq!(
                ma.sender,
                Role::Col,
                "{protocol_id}: first transcript divergence came from the row player, \
                 whose inputs were identical"
            );
            diverged = true;
            break;
        }
        // These column matrices are chosen to force different column-player
        // behavior, so the transcripts cannot be fully identical.
        assert!(diverged, "{protocol_id}: transcripts unexpectedly identical");
    }
}

#[test]
fn bit_totals_are_additive_over_messages() {
    let game = random_game(12, 5);
    let protocol = lookup("polylog-ne").unwrap();
    let outcome = run_protocol(
        &game,
        protocol,
        &ChannelPolicy::two_way(),
        [3, 4],
        &ProtocolParams::ne_defaults(),
    )
    .unwrap();
    let (mut row_bits, mut col_bits) = (0u64, 0u64);
    for message in &outcome.transcript.messages {
        match message.sender {
            Role::Row => row_bits += message.payload.len() as u64,
            Role::Col => col_bits += message.payload.len() as u64,
        }
    }
    assert_eq!(outcome.transcript.bits_row_to_col, row_bits);
    assert_eq!(outcome.transcript.bits_col_to_row, col_bits);
    assert_eq!(outcome.transcript.bits_total(), row_bits + col_bits);
    // Rounds increase strictly across the run.
    for pair in outcome.transcript.messages.windows(2) {
        assert!(pair[0].round < pair[1].round);
    }
}

/// Under a silent policy, running the no-communication protocol through the
/// engine must match running each machine by itself.
#[test]
fn silent_protocol_matches_isolated_machines() {
    let game = random_game(7, 11);
    let protocol = lookup("no-comm").unwrap();
    let params = ProtocolParams::ne_defaults();
    let outcome = run_protocol(&game, protocol, &ChannelPolicy::silent(), [1, 2], &params).unwrap();

    let isolated = |role: Role, matrix: Matrix, seed: u64| -> MixedStrategy {
        let view = PlayerView {
            role,
            own_matrix: matrix,
            seed,
        };
        let mut machine = protocol.build_player(view, &params).unwrap();
        match machine.act(&[]).unwrap() {
            Action::Output { strategy, .. } => strategy,
            _ => panic!("silent machine must output immediately"),
        }
    };
    assert_eq!(
        outcome.profile.row,
        isolated(Role::Row, game.row_matrix().clone(), 1)
    );
    assert_eq!(
        outcome.profile.col,
        isolated(Role::Col, game.col_matrix().clone(), 2)
    );
}

/// Seed-independent protocols replay as true under any seeds.
#[test]
fn no_comm_replays_under_any_seeds() {
    let game = random_game(5, 3);
    let protocol = lookup("no-comm").unwrap();
    let params = ProtocolParams::ne_defaults();
    let policy = ChannelPolicy::silent();
    let outcome = run_protocol(&game, protocol, &policy, [1, 2], &params).unwrap();
    for seeds in [[1, 2], [77, 4], [0, 0]] {
        assert!(nashcomm::engine::replay(
            &outcome.transcript,
            &game,
            protocol,
            &policy,
            seeds,
            &params
        ));
    }
}
