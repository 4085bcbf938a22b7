//! Two-way polylogarithmic-communication procedures.
//!
//! Both variants run the same schedule. Each player solves the zero-sum game
//! induced by its own matrix (the row player treats `R` as a game against an
//! adversary, the column player does the same with `C` transposed) and sends
//! one bit saying whether its security value clears the case threshold:
//! `alpha` for the plain variant, `alpha + delta` for the well-supported
//! one. The extra `delta` is where each variant banks the sampling loss it
//! can afford.
//!
//! Case 1 (neither flag set): each player samples the *adversary-side*
//! strategy of its own solution — the strategy that pins its own best
//! response near the zero-sum value — keeps resampling until the empirical
//! copy still caps its exposure at `min(alpha, value) + delta`, and
//! transmits the draws. Each player then plays the strategy it received, so
//! both regrets are at most `alpha + delta` by construction, and the cap
//! sits at least `delta` above every pure-response mean, which keeps the
//! per-attempt acceptance probability near one.
//!
//! Case 2 (some flag set; row wins a double flag): the flagged player
//! samples its maximin strategy, resampling until the empirical copy keeps a
//! worst-case payoff within `delta` of the computed value, and transmits it.
//! The opponent answers with a pure best response `j` and commits to it.
//! The flagged player then improves its sampled strategy against column `j`:
//! the plain variant moves exactly `alpha/2` of its mass from the
//! lowest-paying pure strategies onto the best response; the well-supported
//! variant instead evacuates every pure strategy paying less than
//! `beta - alpha`, where `beta` is the best-response value. Either shift
//! perturbs the opponent's payoffs by at most `alpha`, which is exactly what
//! the thresholds were optimized for.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{
    Action, BitString, ChannelMode, Message, PlayerMachine, PlayerView, Protocol, ProtocolError,
};
use crate::game::{pure_response_values, Axis, Matrix, MixedStrategy, Role};
use crate::zerosum::{solve_zero_sum, ZeroSumSolution};

use super::sampling::{decode_empirical, encode_draws, sample_strategy, DeviationCheck};
use super::{
    index_bits, sample_count, ProtocolParams, CASE_ONE, CASE_TWO_COL, CASE_TWO_ROW,
};

/// Plain approximate-equilibrium variant; `alpha` defaults to
/// `(5 - sqrt(17)) / 2`.
pub struct PolylogNe;

/// Well-supported variant; `alpha` defaults to `sqrt(3) - 1`.
pub struct PolylogWsne;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    ApproxNe,
    WellSupported,
}

impl Protocol for PolylogNe {
    fn id(&self) -> &'static str {
        "polylog-ne"
    }

    fn required_channel(&self) -> ChannelMode {
        ChannelMode::TwoWay
    }

    fn build_player(
        &self,
        view: PlayerView,
        params: &ProtocolParams,
    ) -> Result<Box<dyn PlayerMachine>, ProtocolError> {
        PolylogMachine::build(view, params, Variant::ApproxNe)
    }
}

impl Protocol for PolylogWsne {
    fn id(&self) -> &'static str {
        "polylog-wsne"
    }

    fn required_channel(&self) -> ChannelMode {
        ChannelMode::TwoWay
    }

    fn build_player(
        &self,
        view: PlayerView,
        params: &ProtocolParams,
    ) -> Result<Box<dyn PlayerMachine>, ProtocolError> {
        PolylogMachine::build(view, params, Variant::WellSupported)
    }
}

enum Phase {
    SendFlag,
    Decide,
    AwaitPeerSample,
    AwaitIndex,
    ReplyToSample,
    OutputPure { strategy: MixedStrategy },
}

struct PolylogMachine {
    view: PlayerView,
    variant: Variant,
    params: ProtocolParams,
    n: usize,
    k: usize,
    width: usize,
    rng: ChaCha8Rng,
    phase: Phase,
    buffer: std::collections::VecDeque<BitString>,
    solution: Option<ZeroSumSolution>,
    my_flag: bool,
    opp_flag: bool,
    sent_sample: Option<MixedStrategy>,
}

impl PolylogMachine {
    fn build(
        view: PlayerView,
        params: &ProtocolParams,
        variant: Variant,
    ) -> Result<Box<dyn PlayerMachine>, ProtocolError> {
        params.validate()?;
        let n = view.own_matrix.rows();
        let rng = ChaCha8Rng::seed_from_u64(view.seed);
        Ok(Box::new(PolylogMachine {
            n,
            k: sample_count(n, params.delta),
            width: index_bits(n),
            rng,
            view,
            variant,
            params: *params,
            phase: Phase::SendFlag,
            buffer: std::collections::VecDeque::new(),
            solution: None,
            my_flag: false,
            opp_flag: false,
            sent_sample: None,
        }))
    }

    /// The zero-sum game this player solves on its own: the row player
    /// maximizes `R`, the column player maximizes `C` over her columns,
    /// which is row-maximizing the transpose.
    fn own_game_matrix(&self) -> Matrix {
        match self.view.role {
            Role::Row => self.view.own_matrix.clone(),
            Role::Col => self.view.own_matrix.transposed(),
        }
    }

    /// Axis of `own_matrix` indexed by this player's strategies.
    fn own_axis(&self) -> Axis {
        match self.view.role {
            Role::Row => Axis::Rows,
            Role::Col => Axis::Cols,
        }
    }

    fn opponent_axis(&self) -> Axis {
        match self.view.role {
            Role::Row => Axis::Cols,
            Role::Col => Axis::Rows,
        }
    }

    fn solution(&self) -> &ZeroSumSolution {
        self.solution.as_ref().expect("solved in first turn")
    }

    /// Value above which a player flags itself as the case-2 sender. The
    /// plain variant flags above `alpha`: its case-2 shift tolerates a
    /// security level of `alpha - delta`. The well-supported shift bound
    /// needs the sampled security to stay above `alpha`, so that variant
    /// flags above `alpha + delta`.
    fn flag_threshold(&self) -> f64 {
        match self.variant {
            Variant::ApproxNe => self.params.alpha,
            Variant::WellSupported => self.params.alpha + self.params.delta,
        }
    }

    fn i_am_case_two_sender(&self) -> bool {
        match (self.my_flag, self.opp_flag) {
            (true, true) => self.view.role == Role::Row,
            (true, false) => true,
            _ => false,
        }
    }

    fn case_two_label(&self, flagged: Role) -> String {
        match flagged {
            Role::Row => CASE_TWO_ROW.to_string(),
            Role::Col => CASE_TWO_COL.to_string(),
        }
    }

    fn pop_message(&mut self, expected_bits: usize, what: &str) -> Result<BitString, ProtocolError> {
        let payload = self
            .buffer
            .pop_front()
            .expect("caller checked buffer is non-empty");
        if payload.len() != expected_bits {
            return Err(ProtocolError::MalformedMessage(format!(
                "{what}: got {} bits, expected {expected_bits}",
                payload.len()
            )));
        }
        Ok(payload)
    }

    /// Expected payoff of each of my pure strategies when the opponent
    /// commits to pure strategy `index`.
    fn payoffs_against_pure(&self, index: usize) -> Vec<f64> {
        let m = &self.view.own_matrix;
        match self.view.role {
            Role::Row => m.column(index),
            Role::Col => m.row(index).to_vec(),
        }
    }

    /// Case-2 improvement step of the flagged player.
    fn improved_strategy(&self, sample: &MixedStrategy, peer_pure: usize) -> MixedStrategy {
        let payoffs = self.payoffs_against_pure(peer_pure);
        let (target, beta) = lowest_index_argmax(&payoffs);
        match self.variant {
            Variant::ApproxNe => {
                shift_lowest_mass(sample, &payoffs, self.params.alpha / 2.0, target).0
            }
            Variant::WellSupported => {
                shift_mass_below(sample, &payoffs, beta - self.params.alpha, target).0
            }
        }
    }
}

fn lowest_index_argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    (best, values[best])
}

/// Moves exactly `amount` of probability mass onto `target`, draining pure
/// strategies in ascending payoff order (lowest index first on ties); the
/// boundary strategy may be drained partially. Returns the new strategy and
/// the mass moved, which always equals `amount` for `amount <= 1`.
pub fn shift_lowest_mass(
    strategy: &MixedStrategy,
    payoffs: &[f64],
    amount: f64,
    target: usize,
) -> (MixedStrategy, f64) {
    let mut order: Vec<usize> = (0..strategy.dim()).collect();
    order.sort_by(|&a, &b| payoffs[a].partial_cmp(&payoffs[b]).unwrap().then(a.cmp(&b)));
    let mut probs = strategy.probs().to_vec();
    let mut remaining = amount;
    let mut moved = 0.0;
    for i in order {
        if remaining <= 0.0 {
            break;
        }
        let take = probs[i].min(remaining);
        probs[i] -= take;
        remaining -= take;
        moved += take;
    }
    probs[target] += moved;
    (
        MixedStrategy::new(probs).expect("shift preserves mass"),
        moved,
    )
}

/// Moves every bit of mass sitting on pure strategies with payoff strictly
/// below `threshold` onto `target`. Returns the new strategy and the mass
/// moved.
pub fn shift_mass_below(
    strategy: &MixedStrategy,
    payoffs: &[f64],
    threshold: f64,
    target: usize,
) -> (MixedStrategy, f64) {
    let mut probs = strategy.probs().to_vec();
    let mut moved = 0.0;
    for i in 0..probs.len() {
        if i != target && payoffs[i] < threshold {
            moved += probs[i];
            probs[i] = 0.0;
        }
    }
    probs[target] += moved;
    (
        MixedStrategy::new(probs).expect("shift preserves mass"),
        moved,
    )
}

impl PlayerMachine for PolylogMachine {
    fn act(&mut self, inbox: &[Message]) -> Result<Action, ProtocolError> {
        for message in inbox {
            self.buffer.push_back(message.payload.clone());
        }
        loop {
            match &self.phase {
                Phase::SendFlag => {
                    let solution = solve_zero_sum(&self.own_game_matrix())?;
                    self.my_flag = solution.value > self.flag_threshold();
                    self.solution = Some(solution);
                    self.phase = Phase::Decide;
                    return Ok(Action::Send(BitString::from_bit(self.my_flag)));
                }
                Phase::Decide => {
                    if self.buffer.is_empty() {
                        return Ok(Action::Wait);
                    }
                    let flag = self.pop_message(1, "case flag")?;
                    self.opp_flag = flag.bit(0).unwrap();
                    if !self.my_flag && !self.opp_flag {
                        // Case 1: transmit a sampled copy of the strategy
                        // that pins my own exposure below the threshold. The
                        // cap keeps delta of slack over the pure-response
                        // means (all at most the zero-sum value) without
                        // exceeding alpha + delta.
                        let solution = self.solution();
                        let source = solution.min_strategy.clone();
                        let cap = self.params.alpha.min(solution.value) + self.params.delta;
                        let accepted = sample_strategy(
                            &source,
                            self.k,
                            &self.view.own_matrix,
                            self.opponent_axis(),
                            DeviationCheck::CapOpponentExposure { cap },
                            self.params.resample_cap,
                            self.view.role,
                            &mut self.rng,
                        )?;
                        self.phase = Phase::AwaitPeerSample;
                        return Ok(Action::Send(encode_draws(&accepted.draw.draws, self.n)));
                    }
                    if self.i_am_case_two_sender() {
                        let solution = self.solution();
                        let source = solution.max_strategy.clone();
                        let floor = solution.value - self.params.delta;
                        let accepted = sample_strategy(
                            &source,
                            self.k,
                            &self.view.own_matrix,
                            self.own_axis(),
                            DeviationCheck::KeepSecurityLevel { floor },
                            self.params.resample_cap,
                            self.view.role,
                            &mut self.rng,
                        )?;
                        self.sent_sample = Some(accepted.draw.empirical.clone());
                        self.phase = Phase::AwaitIndex;
                        return Ok(Action::Send(encode_draws(&accepted.draw.draws, self.n)));
                    }
                    self.phase = Phase::ReplyToSample;
                    continue;
                }
                Phase::ReplyToSample => {
                    if self.buffer.is_empty() {
                        return Ok(Action::Wait);
                    }
                    let payload = self.pop_message(self.k * self.width, "flagged sample")?;
                    let peer_sample = decode_empirical(&payload, self.n, self.k)?;
                    // Pure best response to the sampled strategy.
                    let values = pure_response_values(
                        &self.view.own_matrix,
                        &peer_sample,
                        self.opponent_axis(),
                    )?;
                    let (reply, _) = lowest_index_argmax(&values);
                    let mut payload = BitString::new();
                    payload.push_index(reply, self.width);
                    self.phase = Phase::OutputPure {
                        strategy: MixedStrategy::point(reply, self.n),
                    };
                    return Ok(Action::Send(payload));
                }
                Phase::OutputPure { strategy } => {
                    let flagged = self.view.role.other();
                    return Ok(Action::Output {
                        strategy: strategy.clone(),
                        case: Some(self.case_two_label(flagged)),
                    });
                }
                Phase::AwaitPeerSample => {
                    if self.buffer.is_empty() {
                        return Ok(Action::Wait);
                    }
                    let payload = self.pop_message(self.k * self.width, "case-1 sample")?;
                    let strategy = decode_empirical(&payload, self.n, self.k)?;
                    return Ok(Action::Output {
                        strategy,
                        case: Some(CASE_ONE.to_string()),
                    });
                }
                Phase::AwaitIndex => {
                    if self.buffer.is_empty() {
                        return Ok(Action::Wait);
                    }
                    let payload = self.pop_message(self.width, "best-response index")?;
                    let peer_pure = payload
                        .reader()
                        .read_index(self.width)
                        .filter(|&i| i < self.n)
                        .ok_or_else(|| {
                            ProtocolError::MalformedMessage("best-response index out of range".into())
                        })?;
                    let sample = self.sent_sample.take().expect("sample sent in case 2");
                    let strategy = self.improved_strategy(&sample, peer_pure);
                    return Ok(Action::Output {
                        strategy,
                        case: Some(self.case_two_label(self.view.role)),
                    });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_protocol, ChannelPolicy, ProtocolOutcome};
    use crate::game::{total_variation, BimatrixGame};
    use crate::generators::random_game;
    use crate::protocols::polylog_bits;

    fn run(
        game: &BimatrixGame,
        protocol: &dyn Protocol,
        params: &ProtocolParams,
        seeds: [u64; 2],
    ) -> ProtocolOutcome {
        run_protocol(game, protocol, &ChannelPolicy::two_way(), seeds, params).unwrap()
    }

    #[test]
    fn constant_game_lands_in_case_one_with_zero_regret() {
        let g = BimatrixGame::new(Matrix::filled(4, 4, 0.3), Matrix::filled(4, 4, 0.3)).unwrap();
        let outcome = run(&g, &PolylogNe, &ProtocolParams::ne_defaults(), [1, 2]);
        assert_eq!(outcome.case_label, "case1");
        assert_eq!(outcome.report.eps_ne, 0.0);
    }

    #[test]
    fn all_ones_row_triggers_case_two() {
        let mut r = Matrix::zeros(4, 4);
        for j in 0..4 {
            r.set(0, j, 1.0);
        }
        let g = BimatrixGame::new(r, random_game(4, 9).col_matrix().clone()).unwrap();
        let params = ProtocolParams::ne_defaults();
        let outcome = run(&g, &PolylogNe, &params, [5, 6]);
        assert_eq!(outcome.case_label, "case2-row");
        assert!(outcome.report.eps_ne <= params.alpha + params.delta + 1e-9);
    }

    #[test]
    fn case_two_shift_moves_exactly_half_alpha() {
        // Symmetric high-value game: the maximin strategy is the 50/50 mix
        // and its value 0.8 flags the row player. Whatever column comes
        // back, the best response holds roughly half the sampled mass, so
        // the drain pulls exactly alpha/2 from the other row.
        let r = Matrix::from_rows(vec![vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap();
        let g = BimatrixGame::new(r, random_game(2, 33).col_matrix().clone()).unwrap();
        let params = ProtocolParams::ne_defaults();
        let outcome = run(&g, &PolylogNe, &params, [7, 8]);
        assert_eq!(outcome.case_label, "case2-row");

        // Recover the transmitted sample from the transcript and compare.
        let k = sample_count(2, params.delta);
        let sample_msg = &outcome.transcript.messages[2];
        assert_eq!(sample_msg.sender, Role::Row);
        let sample = decode_empirical(&sample_msg.payload, 2, k).unwrap();
        let tv = total_variation(&sample, &outcome.profile.row).unwrap();
        assert!(
            (tv - params.alpha / 2.0).abs() < 1e-9,
            "moved {tv}, expected {}",
            params.alpha / 2.0
        );
    }

    #[test]
    fn wsne_case_two_shift_stays_below_half_alpha() {
        let mut r = Matrix::zeros(6, 6);
        for j in 0..6 {
            r.set(0, j, 1.0);
        }
        let g = BimatrixGame::new(r, random_game(6, 17).col_matrix().clone()).unwrap();
        let params = ProtocolParams::wsne_defaults();
        let outcome = run(&g, &PolylogWsne, &params, [11, 12]);
        assert_eq!(outcome.case_label, "case2-row");
        let k = sample_count(6, params.delta);
        let sample = decode_empirical(&outcome.transcript.messages[2].payload, 6, k).unwrap();
        let moved = total_variation(&sample, &outcome.profile.row).unwrap();
        // With beta = 1 the evacuated mass is at most (1 - alpha) / alpha,
        // which equals alpha / 2 at the default threshold.
        assert!(moved <= params.alpha / 2.0 + 1e-9);
        assert!(outcome.report.eps_wsne <= params.alpha + params.delta + 1e-9);
    }

    #[test]
    fn bit_count_matches_schedule() {
        let params = ProtocolParams::ne_defaults().with_delta(0.5);
        for seed in 0..20u64 {
            let g = random_game(16, 1000 + seed);
            let outcome = run(&g, &PolylogNe, &params, [seed, seed + 1]);
            let case_two = outcome.case_label.starts_with("case2");
            assert_eq!(
                outcome.transcript.bits_total(),
                polylog_bits(16, params.delta, case_two),
                "case {}",
                outcome.case_label
            );
            // 2·k·L + 2·L + 2 with k = 12, L = 4.
            assert!(outcome.transcript.bits_total() <= 2 * 12 * 4 + 4 + 4 + 2);
        }
    }

    #[test]
    fn guarantee_sweep_small() {
        let params = ProtocolParams::ne_defaults();
        let bound = params.alpha + params.delta + 2e-9 + 1e-6;
        for seed in 0..60u64 {
            let n = 4 + (seed as usize % 13);
            let g = random_game(n, 7_000 + seed);
            let outcome = run(&g, &PolylogNe, &params, [seed, seed ^ 0xabc]);
            assert!(
                outcome.report.eps_ne <= bound,
                "seed {seed} n {n}: {} > {bound} ({})",
                outcome.report.eps_ne,
                outcome.case_label
            );
            if outcome.case_label == "case2-row" {
                assert!(outcome.report.col_regret <= params.alpha + 1e-9);
            }
            if outcome.case_label == "case2-col" {
                assert!(outcome.report.row_regret <= params.alpha + 1e-9);
            }
        }
    }

    #[test]
    fn wsne_guarantee_sweep_small() {
        let params = ProtocolParams::wsne_defaults();
        let bound = params.alpha + params.delta + 2e-9 + 1e-6;
        for seed in 0..60u64 {
            let n = 4 + (seed as usize % 13);
            let g = random_game(n, 9_000 + seed);
            let outcome = run(&g, &PolylogWsne, &params, [seed, seed ^ 0x123]);
            assert!(
                outcome.report.eps_wsne <= bound,
                "seed {seed} n {n}: {} > {bound} ({})",
                outcome.report.eps_wsne,
                outcome.case_label
            );
        }
    }

    #[test]
    fn shift_lowest_mass_conserves_and_orders() {
        let s = MixedStrategy::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let payoffs = [0.9, 0.1, 0.1, 0.5];
        // Ties at payoff 0.1 drain index 1 before index 2.
        let (shifted, moved) = shift_lowest_mass(&s, &payoffs, 0.35, 0);
        assert!((moved - 0.35).abs() < 1e-15);
        assert!((shifted.prob(1) - 0.0).abs() < 1e-15);
        assert!((shifted.prob(2) - 0.15).abs() < 1e-15);
        assert!((shifted.prob(0) - 0.75).abs() < 1e-15);
        assert!((shifted.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_mass_below_evacuates_threshold() {
        let s = MixedStrategy::new(vec![0.25, 0.25, 0.25, 0.25]).unwrap();
        let payoffs = [1.0, 0.2, 0.6, 0.3];
        let (shifted, moved) = shift_mass_below(&s, &payoffs, 0.5, 0);
        assert!((moved - 0.5).abs() < 1e-15);
        assert_eq!(shifted.prob(1), 0.0);
        assert_eq!(shifted.prob(3), 0.0);
        assert!((shifted.prob(0) - 0.75).abs() < 1e-15);
        assert!((shifted.prob(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn replay_with_other_seed_diverges() {
        let g = random_game(12, 77);
        let params = ProtocolParams::ne_defaults();
        let a = run(&g, &PolylogNe, &params, [1, 2]);
        let b = run(&g, &PolylogNe, &params, [3, 4]);
        // Different sampling seeds produce different transcripts in general.
        assert_ne!(a.transcript, b.transcript);
    }
}
