//! Naive reference implementation of the dynamics, for differential testing.
//!
//! This module transcribes the update rule directly: it keeps the external
//! observer's full posterior array, recomputes every hypothetical state's
//! clearing price from scratch each round, filters by the announced price,
//! and renormalizes. It shares no computation with [`crate::engine`] — no
//! integer mass numerators, no affine bid decomposition, no block bookkeeping
//! — so the two paths have independent failure modes. Cost is on the order
//! of `4^N` rational operations per round; keep `N` small.

use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::rational::Rat;
use crate::security::Security;
use crate::state::{spin_of, state_count, SpinState};
use crate::trace::{RoundRecord, Trace};

/// The external observer's posterior over states for one true state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionArray {
    masses: Vec<Rat>,
}

impl DistributionArray {
    /// The round-0 posterior: the prior itself.
    pub fn from_prior(prior: &Prior) -> Result<Self> {
        let n = prior.n_players();
        let masses = SpinState::all(n)?
            .map(|s| prior.mass(&s))
            .collect::<Result<Vec<_>>>()?;
        Ok(DistributionArray { masses })
    }

    pub fn masses(&self) -> &[Rat] {
        &self.masses
    }

    pub fn mass(&self, bits: u32) -> &Rat {
        &self.masses[bits as usize]
    }

    /// States with positive mass, ascending.
    pub fn support(&self) -> Vec<u32> {
        (0..self.masses.len() as u32)
            .filter(|&b| !self.masses[b as usize].is_zero())
            .collect()
    }

    /// Entries must be nonnegative and sum to exactly 1.
    pub fn validate(&self) -> Result<()> {
        let mut total = Rat::zero();
        for (b, m) in self.masses.iter().enumerate() {
            if *m < Rat::zero() {
                return Err(Error::Validation(format!("state {b} has negative mass {m}")));
            }
            total += m;
        }
        if !total.is_one() {
            return Err(Error::Validation(format!("masses sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Zeroes out states not in `keep` and renormalizes the survivors,
    /// preserving their mass ratios.
    fn filtered(&self, keep: &[u32]) -> DistributionArray {
        let mut survivor_total = Rat::zero();
        for &s in keep {
            survivor_total += &self.masses[s as usize];
        }
        let mut masses = vec![Rat::zero(); self.masses.len()];
        for &s in keep {
            masses[s as usize] = &self.masses[s as usize] / &survivor_total;
        }
        DistributionArray { masses }
    }
}

/// Literal transcription of the dynamics for one true state.
///
/// Produces the same trace format as [`crate::engine::run_dynamics`]; the
/// two must agree exactly on every input.
pub fn naive_run(
    g: &Security,
    prior: &Prior,
    true_state: &SpinState,
    max_rounds: u32,
) -> Result<Trace> {
    let n = g.n_players();
    if prior.n_players() != n || true_state.n_players() != n {
        return Err(Error::InvalidArgument(
            "security, prior, and true state must share the player count".into(),
        ));
    }
    if max_rounds == 0 {
        return Err(Error::InvalidArgument("max_rounds must be at least 1".into()));
    }
    let size = state_count(n);
    let sigma = true_state.bits();

    let payoff = |bits: u32| -> Rat {
        Rat::from(g.payoff_bits(bits))
    };

    let mut posterior = DistributionArray::from_prior(prior)?;
    let mut rounds = Vec::new();
    let mut equilibrium_round = None;

    for t in 1..=max_rounds {
        let support = posterior.support();
        debug_assert!(posterior.validate().is_ok());

        // Every state in the support carries the same posterior as the true
        // state, so its hypothetical price can be computed from this array;
        // states outside the support are already ruled out.
        let mut bids_of_sigma = Vec::new();
        let mut prices: Vec<(u32, Rat)> = Vec::with_capacity(support.len());
        for &cand in &support {
            let mut bid_sum = Rat::zero();
            let mut bids = Vec::with_capacity(n as usize);
            for i in 0..n as usize {
                // Player i's posterior: the observer's array conditioned on
                // the candidate's private bit.
                let mut num = Rat::zero();
                let mut den = Rat::zero();
                for h in 0..size as u32 {
                    if spin_of(h, i) == spin_of(cand, i) {
                        let m = posterior.mass(h);
                        num += &(&payoff(h) * m);
                        den += m;
                    }
                }
                let bid = num / den;
                bid_sum += &bid;
                bids.push(bid);
            }
            let price = bid_sum / Rat::from_int(n as i64);
            if cand == sigma {
                bids_of_sigma = bids;
            }
            prices.push((cand, price));
        }

        let announced = prices
            .iter()
            .find(|(cand, _)| *cand == sigma)
            .map(|(_, p)| p.clone())
            .expect("true state stays in the support");
        let keep: Vec<u32> = prices
            .iter()
            .filter(|(_, p)| *p == announced)
            .map(|(cand, _)| *cand)
            .collect();

        let stationary = keep.len() == support.len();
        rounds.push(RoundRecord {
            round: t,
            block_before: support,
            bids: bids_of_sigma,
            price: announced,
            block_after: keep.clone(),
        });
        posterior = posterior.filtered(&keep);
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
        g.payoff_bits(sigma),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn posterior_starts_at_the_prior_and_renormalizes() {
        let p = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        let d = DistributionArray::from_prior(&p).unwrap();
        d.validate().unwrap();
        assert_eq!(d.support(), vec![0, 1, 2, 3]);
        let filtered = d.filtered(&[1, 2]);
        filtered.validate().unwrap();
        assert_eq!(filtered.support(), vec![1, 2]);
        // ratios preserved: both surviving states had mass 3/16
        assert_eq!(filtered.mass(1), &Rat::new(1, 2));
        assert_eq!(filtered.mass(2), &Rat::new(1, 2));
    }

    #[test]
    fn xor_uniform_matches_engine_price_path() {
        let g = Security::parity(2, 1, 0b11).unwrap();
        let u = Prior::uniform(2).unwrap();
        let s = SpinState::new(2, 0b11).unwrap();
        let t = naive_run(&g, &u, &s, 8).unwrap();
        assert_eq!(t.equilibrium_round, Some(1));
        assert_eq!(t.final_price, Rat::zero());
        assert!(!t.converged_to_truth);
    }

    #[test]
    fn biased_parity_reaches_truth_in_two_rounds() {
        let g = Security::parity(2, 1, 0b11).unwrap();
        let p = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        for s in SpinState::all(2).unwrap() {
            let t = naive_run(&g, &p, &s, 8).unwrap();
            assert_eq!(t.equilibrium_round, Some(2));
            assert_eq!(&t.final_price, t.price_at_round(2));
            assert!(t.converged_to_truth);
        }
    }
}
