//! Per-run records of bids, clearing prices, and observer knowledge.

use serde::Serialize;

use crate::rational::Rat;

/// One announcement round as seen by the true state.
///
/// `price` is always the average of `bids`, and `block_after` is the subset
/// of `block_before` matching the announced price.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    /// 1-based round index; the round-`t` price is computed from round
    /// `t-1` information.
    pub round: u32,
    /// The true state's block before this round's announcement.
    pub block_before: Vec<u32>,
    /// Bid of each player, conditional on their private bit and the block.
    pub bids: Vec<Rat>,
    /// The announced clearing price.
    pub price: Rat,
    /// The true state's block after matching on this price.
    pub block_after: Vec<u32>,
}

/// Full history of one run of the dynamics for a fixed true state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub n: u32,
    /// Bitmask of the true state.
    pub true_state: u32,
    pub rounds: Vec<RoundRecord>,
    /// First round whose announcement left the block unchanged; `None` when
    /// the round budget ran out before stationarity.
    pub equilibrium_round: Option<u32>,
    /// Price of the last recorded round; prices are frozen from the
    /// equilibrium round onward.
    pub final_price: Rat,
    /// Whether `final_price` equals the true payoff `g(σ)`.
    pub converged_to_truth: bool,
}

impl Trace {
    pub(crate) fn assemble(
        n: u32,
        true_state: u32,
        rounds: Vec<RoundRecord>,
        equilibrium_round: Option<u32>,
        true_payoff: i8,
    ) -> Trace {
        let final_price = rounds
            .last()
            .map(|r| r.price.clone())
            .expect("a trace records at least one round");
        let converged_to_truth = final_price == Rat::from(true_payoff);
        Trace {
            n,
            true_state,
            rounds,
            equilibrium_round,
            final_price,
            converged_to_truth,
        }
    }

    /// Price announced at round `t ≥ 1`, with freezing: rounds past the end
    /// of the record repeat the last price.
    pub fn price_at_round(&self, t: u32) -> &Rat {
        assert!(t >= 1, "rounds are 1-based");
        let idx = (t as usize - 1).min(self.rounds.len() - 1);
        &self.rounds[idx].price
    }

    /// Canonical JSON encoding; used verbatim for differential comparisons.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&TraceRepr::from(self)).expect("trace serialization cannot fail")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(TraceRepr::from(self)).expect("trace serialization cannot fail")
    }

    pub fn csv_header() -> &'static str {
        "true_state,equilibrium_round,final_price,converged"
    }

    /// Compact one-line summary used by sweep outputs.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.true_state,
            self.equilibrium_round
                .map(|r| r.to_string())
                .unwrap_or_default(),
            self.final_price,
            self.converged_to_truth
        )
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "eq@{} price={} truth={}",
            self.equilibrium_round
                .map(|r| r.to_string())
                .unwrap_or_else(|| "none".into()),
            self.final_price.short(),
            self.converged_to_truth
        )
    }
}

/// Wire form: each round exposes the block as it stands after the
/// announcement (the block before round `t+1` is the block after round `t`,
/// and round 1 always starts from the full state space).
#[derive(Serialize)]
struct TraceRepr {
    n: u32,
    true_state: u32,
    rounds: Vec<RoundRepr>,
    equilibrium_round: Option<u32>,
    final_price: Rat,
    converged_to_truth: bool,
}

#[derive(Serialize)]
struct RoundRepr {
    round: u32,
    price: Rat,
    bids: Vec<Rat>,
    block: Vec<u32>,
}

impl From<&Trace> for TraceRepr {
    fn from(t: &Trace) -> Self {
        TraceRepr {
            n: t.n,
            true_state: t.true_state,
            rounds: t
                .rounds
                .iter()
                .map(|r| RoundRepr {
                    round: r.round,
                    price: r.price.clone(),
                    bids: r.bids.clone(),
                    block: r.block_after.clone(),
                })
                .collect(),
            equilibrium_round: t.equilibrium_round,
            final_price: t.final_price.clone(),
            converged_to_truth: t.converged_to_truth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_trace() -> Trace {
        Trace::assemble(
            2,
            1,
            vec![
                RoundRecord {
                    round: 1,
                    block_before: vec![0, 1, 2, 3],
                    bids: vec![Rat::new(1, 2), Rat::new(-1, 2)],
                    price: Rat::zero(),
                    block_after: vec![1, 2],
                },
                RoundRecord {
                    round: 2,
                    block_before: vec![1, 2],
                    bids: vec![Rat::from_int(-1), Rat::from_int(-1)],
                    price: Rat::from_int(-1),
                    block_after: vec![1, 2],
                },
            ],
            Some(2),
            -1,
        )
    }

    #[test]
    fn assemble_computes_final_price_and_verdict() {
        let t = demo_trace();
        assert_eq!(t.final_price, Rat::from_int(-1));
        assert!(t.converged_to_truth);
        assert_eq!(t.price_at_round(1), &Rat::zero());
        assert_eq!(t.price_at_round(2), &Rat::from_int(-1));
        // frozen past the end
        assert_eq!(t.price_at_round(7), &Rat::from_int(-1));
    }

    #[test]
    fn json_shape() {
        let t = demo_trace();
        let v = t.to_json_value();
        assert_eq!(v["rounds"][0]["price"], "0/1");
        assert_eq!(v["rounds"][0]["block"], serde_json::json!([1, 2]));
        assert_eq!(v["equilibrium_round"], 2);
        assert_eq!(v["converged_to_truth"], true);
    }

    #[test]
    fn csv_and_summary() {
        let t = demo_trace();
        assert_eq!(t.csv_row(), "1,2,-1/1,true");
        assert_eq!(t.summary(), "eq@2 price=-1 truth=true");
    }
}
