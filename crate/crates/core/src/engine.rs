//! The market engine: iterated clearing-price dynamics run exactly, as
//! partition refinement of the state space.
//!
//! Each round, every player bids the conditional expectation of the payoff
//! given their private bit and the set of states consistent with all past
//! prices; the announced price is the average bid. Matching on the price
//! splits each knowledge block into sub-blocks, and a block that survives a
//! round unchanged is stationary forever, because the next split depends
//! only on the block itself. The engine stops there: that fixed point is the
//! common knowledge equilibrium.
//!
//! Bids are computed from the prior restricted to the block. Within a block
//! the bid of player `i` is affine in their spin, `β_i + γ_i·σ_i`, which is
//! what makes per-state prices cheap; the naive reference implementation in
//! [`crate::oracle`] instead carries full posterior arrays and exists to
//! cross-check this entire code path.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::partition::{Block, Partition};
use crate::prior::Prior;
use crate::rational::Rat;
use crate::security::Security;
use crate::state::{spin_of, state_count, SpinState};
use crate::trace::{RoundRecord, Trace};

fn check_same_n(g: &Security, prior: &Prior) -> Result<u32> {
    if g.n_players() != prior.n_players() {
        return Err(Error::InvalidArgument(format!(
            "security has {} players but prior has {}",
            g.n_players(),
            prior.n_players()
        )));
    }
    Ok(g.n_players())
}

fn check_spin(spin: i8) -> Result<()> {
    if spin == 1 || spin == -1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "spin must be +1 or -1, got {spin}"
        )))
    }
}

fn check_player(n: u32, player: usize) -> Result<()> {
    if player < n as usize {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "player index {player} out of range for {n} players"
        )))
    }
}

/// Expectation of the payoff over the block, conditional on player `player`
/// holding `spin`.
///
/// Errors when no state of the block matches the spin; for states actually
/// in the block and their own bits this cannot happen.
pub fn conditional_bid(
    g: &Security,
    prior: &Prior,
    block: &Block,
    player: usize,
    spin: i8,
) -> Result<Rat> {
    let n = check_same_n(g, prior)?;
    if block.n_players() != n {
        return Err(Error::InvalidArgument(
            "block dimension differs from security".into(),
        ));
    }
    check_player(n, player)?;
    check_spin(spin)?;

    let mut num = Rat::zero();
    let mut den = Rat::zero();
    for &s in block.members() {
        if spin_of(s, player) != spin {
            continue;
        }
        let m = prior.mass_bits(s);
        if g.payoff_bits(s) == 1 {
            num += &m;
        } else {
            num -= &m;
        }
        den += &m;
    }
    if den.is_zero() {
        return Err(Error::Precondition(format!(
            "no state in the block gives player {player} spin {spin}"
        )));
    }
    Ok(num / den)
}

/// Announced clearing price for a state of the block: the average of all
/// players' conditional bids at that state's spins.
pub fn clearing_price(g: &Security, prior: &Prior, block: &Block, s: &SpinState) -> Result<Rat> {
    let n = check_same_n(g, prior)?;
    if s.n_players() != n {
        return Err(Error::InvalidArgument(
            "state dimension differs from security".into(),
        ));
    }
    if !block.contains(s.bits()) {
        return Err(Error::Precondition(format!(
            "state {} is not a member of the block",
            s.bits()
        )));
    }
    let mut sum = Rat::zero();
    for player in 0..n as usize {
        sum += conditional_bid(g, prior, block, player, s.spin(player))?;
    }
    Ok(sum / Rat::from_int(n as i64))
}

/// Affine decomposition of player `player`'s bid over the block:
/// `bid(spin) = β + γ·spin` whenever both spins occur in the block.
///
/// When the block fixes the player's spin the decomposition degenerates; the
/// bid is then the unconditional block expectation and `γ = 0`.
pub fn beta_gamma(
    g: &Security,
    prior: &Prior,
    block: &Block,
    player: usize,
) -> Result<(Rat, Rat)> {
    let n = check_same_n(g, prior)?;
    if block.n_players() != n {
        return Err(Error::InvalidArgument(
            "block dimension differs from security".into(),
        ));
    }
    check_player(n, player)?;

    // Block sums: Σ P, Σ gP, Σ σ_i P, Σ g σ_i P.
    let mut m_all = Rat::zero();
    let mut g_all = Rat::zero();
    let mut m_i = Rat::zero();
    let mut g_i = Rat::zero();
    for &s in block.members() {
        let m = prior.mass_bits(s);
        let pay = g.payoff_bits(s);
        m_all += &m;
        if pay == 1 {
            g_all += &m;
        } else {
            g_all -= &m;
        }
        if spin_of(s, player) == 1 {
            m_i += &m;
            if pay == 1 {
                g_i += &m;
            } else {
                g_i -= &m;
            }
        } else {
            m_i -= &m;
            if pay == 1 {
                g_i -= &m;
            } else {
                g_i += &m;
            }
        }
    }

    let den_plus = &m_all + &m_i;
    let den_minus = &m_all - &m_i;
    if den_plus.is_zero() || den_minus.is_zero() {
        // single-spin block: unconditional expectation, zero slope
        return Ok((g_all / m_all, Rat::zero()));
    }
    let bid_plus = (&g_all + &g_i) / den_plus;
    let bid_minus = (&g_all - &g_i) / den_minus;
    let half = Rat::new(1, 2);
    let beta = &half * (&bid_plus + &bid_minus);
    let gamma = &half * (&bid_plus - &bid_minus);
    Ok((beta, gamma))
}

/// Per-block bid table over integer mass numerators: the engine's hot path.
pub(crate) struct BlockEval {
    n: usize,
    /// Bid of each player conditional on spin `+1`; `None` when no member
    /// of the block gives the player that spin.
    pub bid_plus: Vec<Option<Rat>>,
    pub bid_minus: Vec<Option<Rat>>,
    /// Sub-blocks keyed by announced price, in ascending price order;
    /// member lists stay sorted.
    pub groups: Vec<(Rat, Vec<u32>)>,
}

impl BlockEval {
    pub(crate) fn bid(&self, player: usize, spin: i8) -> Option<&Rat> {
        let side = if spin == 1 {
            &self.bid_plus
        } else {
            &self.bid_minus
        };
        side[player].as_ref()
    }

    /// Bid vector of one member state.
    pub(crate) fn state_bids(&self, bits: u32) -> Vec<Rat> {
        (0..self.n)
            .map(|i| {
                self.bid(i, spin_of(bits, i))
                    .expect("member state occupies its own slice")
                    .clone()
            })
            .collect()
    }

    pub(crate) fn state_price(&self, bits: u32) -> Rat {
        let sum: Rat = (0..self.n)
            .map(|i| {
                self.bid(i, spin_of(bits, i))
                    .expect("member state occupies its own slice")
                    .clone()
            })
            .sum();
        sum / Rat::from_int(self.n as i64)
    }
}

/// Computes all bids and the price-split of one block.
///
/// `pay` and `mass` are full per-state tables; `mass` holds strictly
/// positive integer numerators over a common denominator, which cancels in
/// every bid ratio.
pub(crate) fn eval_block(n: u32, pay: &[i8], mass: &[BigInt], members: &[u32]) -> BlockEval {
    let n = n as usize;
    let mut sum_m = BigInt::zero();
    let mut sum_gm = BigInt::zero();
    let mut sum_sm = vec![BigInt::zero(); n]; // Σ σ_i·m
    let mut sum_gsm = vec![BigInt::zero(); n]; // Σ g·σ_i·m
    for &s in members {
        let m = &mass[s as usize];
        let plus = pay[s as usize] == 1;
        sum_m += m;
        if plus {
            sum_gm += m;
        } else {
            sum_gm -= m;
        }
        for i in 0..n {
            if s >> i & 1 == 1 {
                sum_sm[i] += m;
                if plus {
                    sum_gsm[i] += m;
                } else {
                    sum_gsm[i] -= m;
                }
            } else {
                sum_sm[i] -= m;
                if plus {
                    sum_gsm[i] -= m;
                } else {
                    sum_gsm[i] += m;
                }
            }
        }
    }

    let ratio = |num: BigInt, den: BigInt| -> Option<Rat> {
        if den.is_zero() {
            None
        } else {
            Some(Rat::from_bigints(num, den).expect("nonzero denominator"))
        }
    };
    let mut bid_plus = Vec::with_capacity(n);
    let mut bid_minus = Vec::with_capacity(n);
    for i in 0..n {
        bid_plus.push(ratio(&sum_gm + &sum_gsm[i], &sum_m + &sum_sm[i]));
        bid_minus.push(ratio(&sum_gm - &sum_gsm[i], &sum_m - &sum_sm[i]));
    }

    let eval = BlockEval {
        n,
        bid_plus,
        bid_minus,
        groups: Vec::new(),
    };
    let mut by_price: BTreeMap<Rat, Vec<u32>> = BTreeMap::new();
    for &s in members {
        by_price.entry(eval.state_price(s)).or_default().push(s);
    }
    BlockEval {
        groups: by_price.into_iter().collect(),
        ..eval
    }
}

/// One global refinement round: every block splits into sub-blocks of equal
/// clearing price.
pub fn refine_partition(g: &Security, prior: &Prior, part: &Partition) -> Result<Partition> {
    let n = check_same_n(g, prior)?;
    if part.n_players() != n {
        return Err(Error::InvalidArgument(
            "partition dimension differs from security".into(),
        ));
    }
    let pay = g.table_values();
    let (mass, _) = prior.mass_numerators();
    let mut blocks = Vec::new();
    for block in part.blocks() {
        let eval = eval_block(n, &pay, &mass, block.members());
        for (_, members) in eval.groups {
            blocks.push(Block::from_sorted(n, members));
        }
    }
    Ok(Partition::from_blocks(n, part.round() + 1, blocks))
}

/// Runs the dynamics for one true state.
///
/// Starting from the full state space, each round records the true state's
/// block, the bids, and the announced price, then keeps the sub-block that
/// matches the price. The run stops at the first round whose announcement
/// leaves the block unchanged — prices and knowledge are constant from
/// there on — or after `max_rounds` rounds, in which case the trace carries
/// no equilibrium round. Stationarity is always reached within `2^N` rounds.
pub fn run_dynamics(
    g: &Security,
    prior: &Prior,
    true_state: &SpinState,
    max_rounds: u32,
) -> Result<Trace> {
    let n = check_same_n(g, prior)?;
    if true_state.n_players() != n {
        return Err(Error::InvalidArgument(
            "true state dimension differs from security".into(),
        ));
    }
    if max_rounds == 0 {
        return Err(Error::InvalidArgument("max_rounds must be at least 1".into()));
    }

    let pay = g.table_values();
    let (mass, _) = prior.mass_numerators();
    let sigma = true_state.bits();

    let mut block: Vec<u32> = (0..state_count(n) as u32).collect();
    let mut rounds = Vec::new();
    let mut equilibrium_round = None;
    for t in 1..=max_rounds {
        let eval = eval_block(n, &pay, &mass, &block);
        let bids = eval.state_bids(sigma);
        let stationary = eval.groups.len() == 1;
        let (price, sub) = eval
            .groups
            .into_iter()
            .find(|(_, members)| members.binary_search(&sigma).is_ok())
            .expect("true state belongs to one price group");
        rounds.push(RoundRecord {
            round: t,
            block_before: block,
            bids,
            price,
            block_after: sub.clone(),
        });
        block = sub;
        if stationary {
            equilibrium_round = Some(t);
            break;
        }
    }
    Ok(Trace::assemble(
        n,
        sigma,
        rounds,
        equilibrium_round,
        pay[sigma as usize],
    ))
}

/// Results of one shared refinement over every possible true state.
pub struct AllStates {
    /// Per-state traces, indexed by state bitmask.
    pub traces: Vec<Trace>,
    /// The stationary partition every chain ended in.
    pub final_partition: Partition,
    /// Rounds executed until the last block froze.
    pub rounds: u32,
}

impl AllStates {
    pub fn trace(&self, s: &SpinState) -> &Trace {
        &self.traces[s.bits() as usize]
    }
}

/// Runs the dynamics for all `2^N` true states at once.
///
/// All true states share the global refinement sequence, so one pass over
/// the partition produces every per-state trace; results are identical to
/// `2^N` independent [`run_dynamics`] calls. A block whose announcement
/// splits nothing is final: its members' traces close at that round and the
/// block joins the stationary partition.
pub fn run_all_states(g: &Security, prior: &Prior) -> Result<AllStates> {
    let n = check_same_n(g, prior)?;
    let size = state_count(n);
    let pay = g.table_values();
    let (mass, _) = prior.mass_numerators();

    let mut histories: Vec<Vec<RoundRecord>> = vec![Vec::new(); size];
    let mut closed_at: Vec<Option<u32>> = vec![None; size];
    let mut final_blocks: Vec<Block> = Vec::new();
    let mut active: Vec<Vec<u32>> = vec![(0..size as u32).collect()];
    let mut round = 0u32;

    while !active.is_empty() {
        round += 1;
        assert!(
            round as usize <= size + 1,
            "refinement failed to terminate within the state count"
        );
        let mut next = Vec::new();
        for members in active {
            let eval = eval_block(n, &pay, &mass, &members);
            let stationary = eval.groups.len() == 1;
            for (price, sub) in &eval.groups {
                for &s in sub {
                    histories[s as usize].push(RoundRecord {
                        round,
                        block_before: members.clone(),
                        bids: eval.state_bids(s),
                        price: price.clone(),
                        block_after: sub.clone(),
                    });
                }
            }
            if stationary {
                let (_, sub) = eval.groups.into_iter().next().expect("one group");
                for &s in &sub {
                    closed_at[s as usize] = Some(round);
                }
                final_blocks.push(Block::from_sorted(n, sub));
            } else {
                next.extend(eval.groups.into_iter().map(|(_, sub)| sub));
            }
        }
        active = next;
    }

    let traces = histories
        .into_iter()
        .enumerate()
        .map(|(s, rounds)| {
            let eq = closed_at[s];
            debug_assert!(eq.is_some(), "every chain reaches stationarity");
            Trace::assemble(n, s as u32, rounds, eq, pay[s])
        })
        .collect();
    Ok(AllStates {
        traces,
        final_partition: Partition::from_blocks(n, round, final_blocks),
        rounds: round,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor2() -> Security {
        Security::parity(2, 1, 0b11).unwrap()
    }

    fn majority3() -> Security {
        Security::threshold(
            3,
            vec![Rat::one(), Rat::one(), Rat::one()],
            Rat::one(),
        )
        .unwrap()
    }

    fn st(n: u32, bits: u32) -> SpinState {
        SpinState::new(n, bits).unwrap()
    }

    #[test]
    fn conditional_bid_examples() {
        let all2 = Block::full(2).unwrap();
        // XOR under the uniform prior: the other spin averages out
        let u = Prior::uniform(2).unwrap();
        assert_eq!(
            conditional_bid(&xor2(), &u, &all2, 0, 1).unwrap(),
            Rat::zero()
        );
        // full parity under p = 3/4: bid is the other player's mean spin
        let b = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        assert_eq!(
            conditional_bid(&xor2(), &b, &all2, 0, 1).unwrap(),
            Rat::new(1, 2)
        );
        // majority of three, uniform prior
        let all3 = Block::full(3).unwrap();
        let u3 = Prior::uniform(3).unwrap();
        assert_eq!(
            conditional_bid(&majority3(), &u3, &all3, 0, 1).unwrap(),
            Rat::new(1, 2)
        );
    }

    #[test]
    fn conditional_bid_empty_slice_is_precondition_error() {
        let b = Block::new(2, vec![0b11]).unwrap();
        let u = Prior::uniform(2).unwrap();
        let err = conditional_bid(&xor2(), &u, &b, 0, -1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
    }

    #[test]
    fn clearing_price_examples() {
        let all2 = Block::full(2).unwrap();
        let b = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        assert_eq!(
            clearing_price(&xor2(), &b, &all2, &st(2, 0b11)).unwrap(),
            Rat::new(1, 2)
        );
        assert_eq!(
            clearing_price(&xor2(), &b, &all2, &st(2, 0b01)).unwrap(),
            Rat::zero()
        );
        // constant security always clears at 1
        let c = Security::parity(2, 1, 0).unwrap();
        assert_eq!(
            clearing_price(&c, &b, &all2, &st(2, 0b10)).unwrap(),
            Rat::one()
        );
        // membership precondition
        let sub = Block::new(2, vec![0, 3]).unwrap();
        assert!(matches!(
            clearing_price(&xor2(), &b, &sub, &st(2, 1)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn beta_gamma_examples() {
        let all2 = Block::full(2).unwrap();
        let b = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        for player in 0..2 {
            assert_eq!(
                beta_gamma(&xor2(), &b, &all2, player).unwrap(),
                (Rat::zero(), Rat::new(1, 2))
            );
        }
        let c = Security::parity(2, 1, 0).unwrap();
        assert_eq!(
            beta_gamma(&c, &b, &all2, 0).unwrap(),
            (Rat::one(), Rat::zero())
        );
        let u = Prior::uniform(2).unwrap();
        assert_eq!(
            beta_gamma(&xor2(), &u, &all2, 1).unwrap(),
            (Rat::zero(), Rat::zero())
        );
        // degenerate block fixing player 0 to spin +1
        let fixed = Block::new(2, vec![0b01, 0b11]).unwrap();
        let (beta, gamma) = beta_gamma(&xor2(), &u, &fixed, 0).unwrap();
        assert_eq!(gamma, Rat::zero());
        assert_eq!(beta, Rat::zero()); // E[g] over {(+,-),(+,+)} is 0
    }

    #[test]
    fn refine_splits_by_price() {
        let b = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        let part = refine_partition(&xor2(), &b, &Partition::trivial(2).unwrap()).unwrap();
        assert_eq!(part.round(), 1);
        let members: Vec<&[u32]> = part.blocks().iter().map(|b| b.members()).collect();
        assert_eq!(members, vec![&[0][..], &[1, 2][..], &[3][..]]);
        part.validate().unwrap();

        // XOR under the uniform prior never splits
        let u = Prior::uniform(2).unwrap();
        let part = refine_partition(&xor2(), &u, &Partition::trivial(2).unwrap()).unwrap();
        assert_eq!(part.blocks().len(), 1);
    }

    #[test]
    fn run_dynamics_converging_parity() {
        let b = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        let trace = run_dynamics(&xor2(), &b, &st(2, 0b01), 8).unwrap();
        assert_eq!(trace.equilibrium_round, Some(2));
        assert_eq!(trace.rounds[0].price, Rat::zero());
        assert_eq!(trace.rounds[1].price, Rat::from_int(-1));
        assert!(trace.converged_to_truth);
    }

    #[test]
    fn run_dynamics_xor_uniform_stalls_at_zero() {
        let u = Prior::uniform(2).unwrap();
        let trace = run_dynamics(&xor2(), &u, &st(2, 0b11), 8).unwrap();
        assert_eq!(trace.equilibrium_round, Some(1));
        assert_eq!(trace.final_price, Rat::zero());
        assert!(!trace.converged_to_truth);
    }

    #[test]
    fn run_dynamics_majority() {
        let u = Prior::uniform(3).unwrap();
        let trace = run_dynamics(&majority3(), &u, &st(3, 0b011), 8).unwrap();
        assert_eq!(trace.rounds[0].price, Rat::new(1, 6));
        assert_eq!(trace.equilibrium_round, Some(2));
        assert_eq!(trace.final_price, Rat::one());
        assert!(trace.converged_to_truth);
    }

    #[test]
    fn run_dynamics_respects_round_budget() {
        let b = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        let trace = run_dynamics(&xor2(), &b, &st(2, 0b01), 1).unwrap();
        assert_eq!(trace.equilibrium_round, None);
        assert_eq!(trace.rounds.len(), 1);
        assert!(run_dynamics(&xor2(), &b, &st(2, 0), 0).is_err());
    }

    #[test]
    fn all_states_matches_single_runs() {
        let b = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        let all = run_all_states(&xor2(), &b).unwrap();
        assert_eq!(all.rounds, 2);
        for s in SpinState::all(2).unwrap() {
            let single = run_dynamics(&xor2(), &b, &s, 4).unwrap();
            assert_eq!(all.trace(&s), &single);
            assert!(single.converged_to_truth);
            assert!(single.equilibrium_round.unwrap() <= 2);
        }
        all.final_partition.validate().unwrap();
    }

    #[test]
    fn all_states_xor_uniform_never_converges() {
        let u = Prior::uniform(2).unwrap();
        let all = run_all_states(&xor2(), &u).unwrap();
        assert!(all.traces.iter().all(|t| !t.converged_to_truth));
        assert_eq!(all.final_partition.blocks().len(), 1);
    }

    #[test]
    fn all_states_majority_uniform_converges_within_three() {
        let u = Prior::uniform(3).unwrap();
        let all = run_all_states(&majority3(), &u).unwrap();
        for t in &all.traces {
            assert!(t.converged_to_truth);
            assert!(t.equilibrium_round.unwrap() <= 3);
        }
    }
}
