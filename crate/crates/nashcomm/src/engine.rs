//! Uncoupled-protocol execution engine.
//!
//! Two player state machines run against each other over a bit-metered
//! channel. Each machine sees only its own payoff matrix (via [`PlayerView`])
//! and the messages the opponent sent, so information isolation is enforced
//! structurally: there is no way for a machine to reach the other matrix.
//! The engine alternates turns (row acts first), charges every transmitted
//! bit to its direction, enforces the channel policy, and finally grades the
//! produced strategy profile itself with full knowledge of both matrices —
//! players are never trusted to self-report regret.
//!
//! A run is sequential and deterministic given the seeds; distinct runs
//! share no state and may execute concurrently.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::game::{
    regret_report, BimatrixGame, GameError, Matrix, MixedStrategy, RegretReport, Role,
    StrategyProfile,
};
use crate::protocols::ProtocolParams;
use crate::zerosum::SolverError;

const MAX_TURNS: u64 = 10_000;
const STALL_TURNS: u32 = 8;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("protocol {protocol} requires channel {required}, policy allows {policy}")]
    PolicyIncompatible {
        protocol: String,
        required: ChannelMode,
        policy: ChannelMode,
    },
    #[error("{sender} exceeded the {budget}-bit budget at round {round} (would reach {attempted})")]
    BudgetExceeded {
        sender: Role,
        round: u64,
        attempted: u64,
        budget: u64,
    },
    #[error("{sender} sent on a blocked direction at round {round}")]
    DirectionBlocked { sender: Role, round: u64 },
    #[error("{sender} sent an empty payload at round {round}")]
    EmptyPayload { sender: Role, round: u64 },
    #[error("{role} exhausted {attempts} resampling attempts")]
    ResampleCapExhausted { role: Role, attempts: u32 },
    #[error("malformed message: {0}")]
    MalformedMessage(String),
    #[error("protocol stalled after {turns} turns")]
    Stalled { turns: u64 },
    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Direction of a message over the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    RowToCol,
    ColToRow,
}

impl Direction {
    pub fn from_sender(sender: Role) -> Direction {
        match sender {
            Role::Row => Direction::RowToCol,
            Role::Col => Direction::ColToRow,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::RowToCol => write!(f, "row-to-col"),
            Direction::ColToRow => write!(f, "col-to-row"),
        }
    }
}

/// What traffic the channel admits. The same type doubles as a protocol's
/// declared requirement: `NoComm` requires nothing, `OneWay(d)` requires that
/// direction to be open, `TwoWay` requires both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    TwoWay,
    OneWay(Direction),
    NoComm,
}

impl ChannelMode {
    /// Whether a policy in `self` admits a protocol requiring `need`.
    pub fn permits(self, need: ChannelMode) -> bool {
        match (self, need) {
            (ChannelMode::TwoWay, _) => true,
            (_, ChannelMode::NoComm) => true,
            (ChannelMode::OneWay(a), ChannelMode::OneWay(b)) => a == b,
            _ => false,
        }
    }

    pub fn allows_direction(self, direction: Direction) -> bool {
        match self {
            ChannelMode::TwoWay => true,
            ChannelMode::OneWay(d) => d == direction,
            ChannelMode::NoComm => false,
        }
    }

    pub fn parse(s: &str) -> Option<ChannelMode> {
        match s {
            "two-way" => Some(ChannelMode::TwoWay),
            "one-way-row-to-col" => Some(ChannelMode::OneWay(Direction::RowToCol)),
            "one-way-col-to-row" => Some(ChannelMode::OneWay(Direction::ColToRow)),
            "no-comm" => Some(ChannelMode::NoComm),
            _ => None,
        }
    }
}

impl std::fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChannelMode::TwoWay => write!(f, "two-way"),
            ChannelMode::OneWay(Direction::RowToCol) => write!(f, "one-way-row-to-col"),
            ChannelMode::OneWay(Direction::ColToRow) => write!(f, "one-way-col-to-row"),
            ChannelMode::NoComm => write!(f, "no-comm"),
        }
    }
}

impl Serialize for ChannelMode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ChannelMode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ChannelMode::parse(&s)
            .ok_or_else(|| D::Error::custom(format!("unknown channel mode `{s}`")))
    }
}

/// Channel policy: admissible directions plus an optional per-direction bit
/// budget, enforced before delivery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPolicy {
    pub mode: ChannelMode,
    pub budget_bits: Option<u64>,
}

impl ChannelPolicy {
    pub fn two_way() -> Self {
        ChannelPolicy {
            mode: ChannelMode::TwoWay,
            budget_bits: None,
        }
    }

    pub fn one_way(direction: Direction) -> Self {
        ChannelPolicy {
            mode: ChannelMode::OneWay(direction),
            budget_bits: None,
        }
    }

    pub fn silent() -> Self {
        ChannelPolicy {
            mode: ChannelMode::NoComm,
            budget_bits: None,
        }
    }

    pub fn with_budget(mut self, bits: u64) -> Self {
        self.budget_bits = Some(bits);
        self
    }
}

/// Everything a player machine is allowed to know at start: its role, its
/// own payoff matrix, and a private RNG seed.
#[derive(Debug, Clone)]
pub struct PlayerView {
    pub role: Role,
    pub own_matrix: Matrix,
    pub seed: u64,
}

/// A bit string with explicit length; the unit of communication accounting.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        BitString::default()
    }

    pub fn from_bit(bit: bool) -> Self {
        BitString { bits: vec![bit] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Appends `value` as a fixed-width big-endian field.
    pub fn push_index(&mut self, value: usize, width: usize) {
        debug_assert!(width == 64 || value < (1usize << width), "index overflows field");
        for shift in (0..width).rev() {
            self.bits.push((value >> shift) & 1 == 1);
        }
    }

    pub fn bit(&self, index: usize) -> Option<bool> {
        self.bits.get(index).copied()
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }

    /// Hex encoding, bits packed MSB-first; trailing pad bits are zero.
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for chunk in self.bits.chunks(4) {
            let mut nibble = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    nibble |= 1 << (3 - i);
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self, ProtocolError> {
        if hex.len() * 4 < len || hex.len() * 4 >= len + 4 {
            return Err(ProtocolError::MalformedMessage(format!(
                "hex payload `{hex}` does not match bit length {len}"
            )));
        }
        let mut bits = Vec::with_capacity(len);
        for c in hex.chars() {
            let nibble = c.to_digit(16).ok_or_else(|| {
                ProtocolError::MalformedMessage(format!("invalid hex digit `{c}`"))
            })? as u8;
            for i in 0..4 {
                if bits.len() < len {
                    bits.push(nibble & (1 << (3 - i)) != 0);
                }
            }
        }
        Ok(BitString { bits })
    }
}

/// Cursor reading fixed-width fields back out of a [`BitString`].
pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl BitReader<'_> {
    pub fn read_bit(&mut self) -> Option<bool> {
        let b = self.bits.bit(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    pub fn read_index(&mut self, width: usize) -> Option<usize> {
        if self.pos + width > self.bits.len() {
            return None;
        }
        let mut value = 0usize;
        for _ in 0..width {
            value = (value << 1) | self.read_bit()? as usize;
        }
        Some(value)
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

/// One transmitted message. Round indices are assigned by the engine and
/// strictly increase over the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: Role,
    pub round: u64,
    pub payload: BitString,
}

#[derive(Serialize, Deserialize)]
struct MessageRepr {
    sender: Role,
    round: u64,
    payload: String,
    bits: usize,
}

impl Serialize for Message {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MessageRepr {
            sender: self.sender,
            round: self.round,
            payload: self.payload.to_hex(),
            bits: self.payload.len(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Message {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MessageRepr::deserialize(deserializer)?;
        let payload = BitString::from_hex(&repr.payload, repr.bits)
            .map_err(|e| D::Error::custom(e.to_string()))?;
        Ok(Message {
            sender: repr.sender,
            round: repr.round,
            payload,
        })
    }
}

/// Ordered record of a run's messages with per-direction bit totals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub bits_row_to_col: u64,
    pub bits_col_to_row: u64,
}

impl Transcript {
    pub fn bits_total(&self) -> u64 {
        self.bits_row_to_col + self.bits_col_to_row
    }

    pub fn bits_in(&self, direction: Direction) -> u64 {
        match direction {
            Direction::RowToCol => self.bits_row_to_col,
            Direction::ColToRow => self.bits_col_to_row,
        }
    }
}

/// What a player machine does on its turn.
pub enum Action {
    /// Transmit one message to the opponent.
    Send(BitString),
    /// Nothing to do until more input arrives.
    Wait,
    /// Commit to a final mixed strategy; `case` tags which branch of the
    /// protocol produced it.
    Output {
        strategy: MixedStrategy,
        case: Option<String>,
    },
}

/// A player's half of a protocol. `act` is called once per turn with the
/// messages delivered since the machine's previous turn.
pub trait PlayerMachine {
    fn act(&mut self, inbox: &[Message]) -> Result<Action, ProtocolError>;
}

/// A registered protocol: a pair of player-machine constructors plus the
/// channel shape it needs.
pub trait Protocol: Sync {
    fn id(&self) -> &'static str;
    fn required_channel(&self) -> ChannelMode;
    fn build_player(
        &self,
        view: PlayerView,
        params: &ProtocolParams,
    ) -> Result<Box<dyn PlayerMachine>, ProtocolError>;
}

/// Result of a completed run. `report` is recomputed by the engine from both
/// matrices, never taken from the players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutcome {
    pub profile: StrategyProfile,
    pub transcript: Transcript,
    pub report: RegretReport,
    pub case_label: String,
}

/// Executes `protocol` on `game` under `policy`. `seeds[0]` seeds the row
/// player, `seeds[1]` the column player.
pub fn run_protocol(
    game: &BimatrixGame,
    protocol: &dyn Protocol,
    policy: &ChannelPolicy,
    seeds: [u64; 2],
    params: &ProtocolParams,
) -> Result<ProtocolOutcome, ProtocolError> {
    let required = protocol.required_channel();
    if !policy.mode.permits(required) {
        return Err(ProtocolError::PolicyIncompatible {
            protocol: protocol.id().to_string(),
            required,
            policy: policy.mode,
        });
    }

    let views = [
        PlayerView {
            role: Role::Row,
            own_matrix: game.row_matrix().clone(),
            seed: seeds[0],
        },
        PlayerView {
            role: Role::Col,
            own_matrix: game.col_matrix().clone(),
            seed: seeds[1],
        },
    ];
    let mut machines = [
        protocol.build_player(views[0].clone(), params)?,
        protocol.build_player(views[1].clone(), params)?,
    ];

    let roles = [Role::Row, Role::Col];
    let mut inboxes: [Vec<Message>; 2] = [Vec::new(), Vec::new()];
    let mut outputs: [Option<(MixedStrategy, Option<String>)>; 2] = [None, None];
    let mut transcript = Transcript::default();
    let mut round = 0u64;
    let mut stalled_turns = 0u32;

    let mut turn = 0u64;
    while outputs.iter().any(|o| o.is_none()) {
        if turn >= MAX_TURNS {
            return Err(ProtocolError::Stalled { turns: turn });
        }
        let current = (turn % 2) as usize;
        turn += 1;
        if outputs[current].is_some() {
            continue;
        }
        let inbox = std::mem::take(&mut inboxes[current]);
        let sender = roles[current];
        match machines[current].act(&inbox)? {
            Action::Send(payload) => {
                stalled_turns = 0;
                deliver(
                    &mut transcript,
                    policy,
                    sender,
                    round,
                    payload,
                    &mut inboxes[1 - current],
                )?;
                round += 1;
            }
            Action::Wait => {
                stalled_turns += 1;
                if stalled_turns >= STALL_TURNS {
                    return Err(ProtocolError::Stalled { turns: turn });
                }
            }
            Action::Output { strategy, case } => {
                stalled_turns = 0;
                if strategy.dim() != game.n() {
                    return Err(GameError::DimensionMismatch {
                        context: "player output",
                        expected: game.n(),
                        found: strategy.dim(),
                    }
                    .into());
                }
                outputs[current] = Some((strategy, case));
            }
        }
    }

    let (row_strategy, row_case) = outputs[0].take().unwrap();
    let (col_strategy, col_case) = outputs[1].take().unwrap();
    let profile = StrategyProfile::new(row_strategy, col_strategy);
    let report = regret_report(game, &profile)?;
    let case_label = row_case
        .or(col_case)
        .unwrap_or_else(|| protocol.id().to_string());

    Ok(ProtocolOutcome {
        profile,
        transcript,
        report,
        case_label,
    })
}

fn deliver(
    transcript: &mut Transcript,
    policy: &ChannelPolicy,
    sender: Role,
    round: u64,
    payload: BitString,
    peer_inbox: &mut Vec<Message>,
) -> Result<(), ProtocolError> {
    if payload.is_empty() {
        return Err(ProtocolError::EmptyPayload { sender, round });
    }
    let direction = Direction::from_sender(sender);
    if !policy.mode.allows_direction(direction) {
        return Err(ProtocolError::DirectionBlocked { sender, round });
    }
    let count = match direction {
        Direction::RowToCol => &mut transcript.bits_row_to_col,
        Direction::ColToRow => &mut transcript.bits_col_to_row,
    };
    let attempted = *count + payload.len() as u64;
    if let Some(budget) = policy.budget_bits {
        if attempted > budget {
            return Err(ProtocolError::BudgetExceeded {
                sender,
                round,
                attempted,
                budget,
            });
        }
    }
    *count = attempted;
    let message = Message {
        sender,
        round,
        payload,
    };
    transcript.messages.push(message.clone());
    peer_inbox.push(message);
    Ok(())
}

/// Re-executes a run and reports whether it reproduces `transcript`
/// bit-for-bit. Execution errors count as a failed replay.
pub fn replay(
    transcript: &Transcript,
    game: &BimatrixGame,
    protocol: &dyn Protocol,
    policy: &ChannelPolicy,
    seeds: [u64; 2],
    params: &ProtocolParams,
) -> bool {
    match run_protocol(game, protocol, policy, seeds, params) {
        Ok(outcome) => outcome.transcript == *transcript,
        Err(_) => false,
    }
}
