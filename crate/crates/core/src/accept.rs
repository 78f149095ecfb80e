//! Self-contained verification suites.
//!
//! Each suite checks one convergence guarantee or structural property of
//! the dynamics by exact computation at desk scale, and reports pass/fail
//! with the first few counterexamples. The suites are deterministic: every
//! randomized campaign draws from a fixed-seed generator.
//!
//! Suites:
//!
//! * **A1** — product-form (parity) securities under uniformly biased
//!   priors converge to the true payoff by round two.
//! * **A2** — the unbiased prior is the degenerate exception: full-product
//!   securities price at zero forever.
//! * **A3** — totally symmetric securities under totally symmetric priors
//!   with a nonzero covariance gap converge by round two.
//! * **A4** — weighted-threshold securities converge within `N` rounds for
//!   arbitrary full-support priors.
//! * **A5** — every run reaches equilibrium within `2^N - 1` rounds, and at
//!   equilibrium every conditional bid equals the clearing price.
//! * **A6** — the engine and the naive reference implementation produce
//!   byte-identical traces.
//! * **A7** — the XOR/uniform counterexample: equilibrium at round one,
//!   price zero, no state converges.
//! * **A8** — randomized structural property campaign (≥ 10⁴ cases).
//! * **A9** — a symmetric pair with zero covariance gap fails to converge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{gamma0, is_totally_symmetric, parity_decompose, recognize_threshold};
use crate::engine::{
    beta_gamma, clearing_price, conditional_bid, eval_block, refine_partition, run_all_states,
    run_dynamics, AllStates,
};
use crate::oracle::naive_run;
use crate::partition::{Block, Partition};
use crate::prior::Prior;
use crate::random::{
    random_parity, random_state, random_symmetric_prior, random_symmetric_security,
    random_table_prior, random_table_security, random_threshold_security,
};
use crate::rational::Rat;
use crate::security::Security;
use crate::state::{spin_of, state_count, SpinState};

const SEED_A1: u64 = 0xA1;
const SEED_A3: u64 = 0xA3;
const SEED_A4: u64 = 0xA4;
const SEED_A5: u64 = 0xA5;
const SEED_A6: u64 = 0xA6;
const SEED_A8: u64 = 0xA8;

/// How many counterexamples a suite keeps verbatim.
const FAILURE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::A1,
        Suite::A2,
        Suite::A3,
        Suite::A4,
        Suite::A5,
        Suite::A6,
        Suite::A7,
        Suite::A8,
        Suite::A9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::A1 => "A1",
            Suite::A2 => "A2",
            Suite::A3 => "A3",
            Suite::A4 => "A4",
            Suite::A5 => "A5",
            Suite::A6 => "A6",
            Suite::A7 => "A7",
            Suite::A8 => "A8",
            Suite::A9 => "A9",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name().eq_ignore_ascii_case(s.trim()))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub passed: bool,
    /// Checked cases: instance runs, instance pairs, or property samples,
    /// depending on the suite.
    pub cases: usize,
    /// Runs that went through the full structural audit.
    pub audited_runs: usize,
    /// Up to [`FAILURE_CAP`] counterexample descriptions.
    pub failures: Vec<String>,
    pub failure_count: usize,
    pub summary: String,
}

impl SuiteOutcome {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let mut line = format!("{} {} — {}", self.suite, verdict, self.summary);
        if !self.passed {
            line.push_str(&format!(" [{} failure(s)]", self.failure_count));
        }
        line
    }
}

struct Collector {
    suite: &'static str,
    cases: usize,
    audited_runs: usize,
    failures: Vec<String>,
    failure_count: usize,
}

impl Collector {
    fn new(suite: &'static str) -> Self {
        Collector {
            suite,
            cases: 0,
            audited_runs: 0,
            failures: Vec::new(),
            failure_count: 0,
        }
    }

    fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < FAILURE_CAP {
            self.failures.push(msg);
        }
    }

    fn merge(&mut self, results: Vec<CaseResult>) {
        for r in results {
            self.cases += r.cases;
            self.audited_runs += r.audited_runs;
            for msg in r.failures {
                self.fail(msg);
            }
        }
    }

    fn finish(self, summary: String) -> SuiteOutcome {
        SuiteOutcome {
            suite: self.suite,
            passed: self.failure_count == 0,
            cases: self.cases,
            audited_runs: self.audited_runs,
            failures: self.failures,
            failure_count: self.failure_count,
            summary,
        }
    }
}

#[derive(Default)]
struct CaseResult {
    cases: usize,
    audited_runs: usize,
    failures: Vec<String>,
}

impl CaseResult {
    fn one(failure: Option<String>) -> CaseResult {
        CaseResult {
            cases: 1,
            audited_runs: 0,
            failures: failure.into_iter().collect(),
        }
    }
}

fn is_sorted_subset(sub: &[u32], sup: &[u32]) -> bool {
    let mut it = sup.iter().copied();
    'outer: for x in sub.iter().copied() {
        for y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

/// Upper bound on the equilibrium round. Each refining round strictly grows
/// the block count and the very first announcement cannot isolate a single
/// state out of three or more (price level sets of an affine form pair up
/// under global spin flip), which caps chains at `2^N - 1` rounds for
/// `N ≥ 2`; the two-state space at `N = 1` genuinely needs two rounds.
fn equilibrium_bound(n: u32) -> u32 {
    if n >= 2 {
        (1u32 << n) - 1
    } else {
        2
    }
}

/// Structural audit of one full run: refinement monotone, true state always
/// a member, prices within `[-1, 1]` and equal to the mean bid, partition a
/// disjoint cover, equilibrium in bound, and consensus at the fixed point.
fn audit_run(g: &Security, prior: &Prior, all: &AllStates) -> Result<(), String> {
    let n = g.n_players();
    let bound = equilibrium_bound(n);
    for trace in &all.traces {
        let sigma = trace.true_state;
        let eq = trace
            .equilibrium_round
            .ok_or_else(|| format!("state {sigma}: no equilibrium recorded"))?;
        if eq > bound {
            return Err(format!(
                "state {sigma}: equilibrium at round {eq} exceeds bound {bound}"
            ));
        }
        let mut prev_after: Option<&[u32]> = None;
        for r in &trace.rounds {
            if !is_sorted_subset(&r.block_after, &r.block_before) {
                return Err(format!(
                    "state {sigma} round {}: block not shrinking",
                    r.round
                ));
            }
            if r.block_before.binary_search(&sigma).is_err()
                || r.block_after.binary_search(&sigma).is_err()
            {
                return Err(format!(
                    "state {sigma} round {}: true state dropped from its block",
                    r.round
                ));
            }
            if let Some(prev) = prev_after {
                if prev != r.block_before.as_slice() {
                    return Err(format!(
                        "state {sigma} round {}: chain discontinuity",
                        r.round
                    ));
                }
            }
            prev_after = Some(&r.block_after);
            let one = Rat::one();
            if r.price.abs() > one || r.bids.iter().any(|b| b.abs() > one) {
                return Err(format!(
                    "state {sigma} round {}: bid or price outside [-1, 1]",
                    r.round
                ));
            }
            let mean: Rat =
                r.bids.iter().cloned().sum::<Rat>() / Rat::from_int(n as i64);
            if mean != r.price {
                return Err(format!(
                    "state {sigma} round {}: price is not the mean bid",
                    r.round
                ));
            }
        }
        let last = trace.rounds.last().expect("nonempty trace");
        if last.block_after != last.block_before {
            return Err(format!("state {sigma}: final round still refines"));
        }
    }
    all.final_partition
        .validate()
        .map_err(|e| format!("final partition invalid: {e}"))?;
    consensus_fast(g, prior, &all.final_partition)
}

/// Consensus at the fixed point, via the engine's block evaluation: within
/// every final block each available conditional bid must equal the common
/// clearing price.
fn consensus_fast(g: &Security, prior: &Prior, partition: &Partition) -> Result<(), String> {
    let n = g.n_players();
    let pay = g.table_values();
    let (mass, _) = prior.mass_numerators();
    for block in partition.blocks() {
        let eval = eval_block(n, &pay, &mass, block.members());
        if eval.groups.len() != 1 {
            return Err(format!(
                "final block {:?} splits again",
                block.members()
            ));
        }
        let price = &eval.groups[0].0;
        for player in 0..n as usize {
            for spin in [1i8, -1] {
                if let Some(bid) = eval.bid(player, spin) {
                    if bid != price {
                        return Err(format!(
                            "block {:?}: bid of player {player} at spin {spin} is {bid}, price {price}",
                            block.members()
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Audited batch run used by every convergence campaign; `extra` receives
/// the run for suite-specific per-state checks.
fn audited_case<F>(g: &Security, prior: &Prior, extra: F) -> CaseResult
where
    F: FnOnce(&AllStates) -> Result<(), String>,
{
    let outcome = (|| -> Result<(), String> {
        let all = run_all_states(g, prior).map_err(|e| e.to_string())?;
        audit_run(g, prior, &all)?;
        extra(&all)
    })();
    CaseResult {
        cases: 1,
        audited_runs: 1,
        failures: outcome.err().into_iter().collect(),
    }
}

fn check_round_two_truth(all: &AllStates) -> Result<(), String> {
    for t in &all.traces {
        let eq = t.equilibrium_round.expect("audited run");
        if !t.converged_to_truth || eq > 2 {
            return Err(format!(
                "state {}: {} (expected truth by round 2)",
                t.true_state,
                t.summary()
            ));
        }
        if t.price_at_round(2) != &t.final_price {
            return Err(format!("state {}: price moved after round 2", t.true_state));
        }
    }
    Ok(())
}

fn instance_label(n: u32, what: &str, idx: usize) -> String {
    format!("n={n} {what}#{idx}")
}

fn suite_a1() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_A1);
    let biases = [
        Rat::new(1, 4),
        Rat::new(1, 3),
        Rat::new(2, 3),
        Rat::new(9, 10),
    ];
    let mut instances: Vec<(String, Security, Prior)> = Vec::new();
    for n in 2..=10u32 {
        let masks: Vec<(i8, u32)> = if n <= 6 {
            (0..state_count(n) as u32)
                .flat_map(|mask| [(1i8, mask), (-1i8, mask)])
                .collect()
        } else {
            (0..50)
                .map(|_| {
                    let mask = rng.gen_range(0..state_count(n) as u32);
                    let sign = if rng.gen::<bool>() { 1 } else { -1 };
                    (sign, mask)
                })
                .collect()
        };
        for (idx, (sign, mask)) in masks.into_iter().enumerate() {
            let g = Security::parity(n, sign, mask).expect("valid parity");
            for p in &biases {
                let prior = Prior::product_biased(n, p.clone()).expect("valid bias");
                instances.push((
                    format!("{} p={}", instance_label(n, "parity", idx), p),
                    g.clone(),
                    prior,
                ));
            }
        }
    }

    let mut col = Collector::new("A1");
    let states: usize = instances
        .iter()
        .map(|(_, g, _)| state_count(g.n_players()))
        .sum();
    let results: Vec<CaseResult> = instances
        .par_iter()
        .map(|(label, g, prior)| {
            let mut case = audited_case(g, prior, check_round_two_truth);
            for f in &mut case.failures {
                *f = format!("{label}: {f}");
            }
            case
        })
        .collect();
    col.merge(results);
    let summary = format!(
        "{} parity/biased-prior runs, {} states, all true by round 2",
        col.cases, states
    );
    col.finish(summary)
}

fn suite_a2() -> SuiteOutcome {
    let mut col = Collector::new("A2");
    let mut results = Vec::new();
    for n in 2..=8u32 {
        for sign in [1i8, -1] {
            let g = Security::parity(n, sign, (state_count(n) - 1) as u32).expect("full parity");
            let prior = Prior::uniform(n).expect("uniform");
            let label = format!("n={n} sign={sign}");
            let mut case = audited_case(&g, &prior, |all| {
                for t in &all.traces {
                    if t.converged_to_truth {
                        return Err(format!("state {} converged under p=1/2", t.true_state));
                    }
                    for r in &t.rounds {
                        if !r.price.is_zero() {
                            return Err(format!(
                                "state {} round {}: price {} is nonzero",
                                t.true_state, r.round, r.price
                            ));
                        }
                    }
                    if !t.final_price.is_zero() {
                        return Err(format!("state {}: nonzero final price", t.true_state));
                    }
                }
                Ok(())
            });
            for f in &mut case.failures {
                *f = format!("{label}: {f}");
            }
            results.push(case);
        }
    }
    col.merge(results);
    let summary = format!(
        "{} full-product/unbiased runs, price pinned at 0, no state converges",
        col.cases
    );
    col.finish(summary)
}

fn suite_a3() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_A3);
    let mut pairs: Vec<(String, Security, Prior)> = Vec::new();
    let mut filtered_out = 0usize;
    for n in 2..=8u32 {
        let securities: Vec<Security> = (0..50)
            .map(|_| random_symmetric_security(n, &mut rng))
            .collect();
        let priors: Vec<Prior> = (0..50)
            .map(|_| random_symmetric_prior(n, &mut rng))
            .collect();
        for (si, g) in securities.iter().enumerate() {
            for (pi, prior) in priors.iter().enumerate() {
                let signal = gamma0(g, prior).expect("symmetric by construction");
                if signal.covariance_gap.is_zero() {
                    filtered_out += 1;
                    continue;
                }
                pairs.push((
                    format!("n={n} sym#{si} prior#{pi}"),
                    g.clone(),
                    prior.clone(),
                ));
            }
        }
    }

    let mut col = Collector::new("A3");
    let results: Vec<CaseResult> = pairs
        .par_iter()
        .map(|(label, g, prior)| {
            let mut case = audited_case(g, prior, check_round_two_truth);
            for f in &mut case.failures {
                *f = format!("{label}: {f}");
            }
            case
        })
        .collect();
    col.merge(results);
    if col.cases == 0 {
        col.fail("covariance filter left no pairs to test".into());
    }
    let summary = format!(
        "{} symmetric pairs with nonzero covariance gap ({} filtered out), all true by round 2",
        col.cases, filtered_out
    );
    col.finish(summary)
}

fn suite_a4() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_A4);
    let mut pairs: Vec<(String, u32, Security, Prior)> = Vec::new();
    for n in 2..=8u32 {
        let securities: Vec<Security> = (0..30)
            .map(|_| random_threshold_security(n, &mut rng))
            .collect();
        let priors: Vec<Prior> = (0..100).map(|_| random_table_prior(n, &mut rng)).collect();
        for (si, g) in securities.iter().enumerate() {
            for (pi, prior) in priors.iter().enumerate() {
                pairs.push((
                    format!("n={n} thr#{si} prior#{pi}"),
                    n,
                    g.clone(),
                    prior.clone(),
                ));
            }
        }
    }

    let mut col = Collector::new("A4");
    let results: Vec<CaseResult> = pairs
        .par_iter()
        .map(|(label, n, g, prior)| {
            let n = *n;
            let mut case = audited_case(g, prior, |all| {
                for t in &all.traces {
                    if !t.converged_to_truth {
                        return Err(format!("state {}: {}", t.true_state, t.summary()));
                    }
                    // truth reached by round N and held from there on
                    for r in &t.rounds {
                        if r.round >= n && r.price != t.final_price {
                            return Err(format!(
                                "state {} round {}: price {} after the N-round deadline",
                                t.true_state, r.round, r.price
                            ));
                        }
                    }
                }
                Ok(())
            });
            for f in &mut case.failures {
                *f = format!("{label}: {f}");
            }
            case
        })
        .collect();
    col.merge(results);
    let summary = format!(
        "{} threshold/arbitrary-prior runs, all true within N rounds",
        col.cases
    );
    col.finish(summary)
}

/// Consensus check through the reference operations only.
fn consensus_reference(g: &Security, prior: &Prior, all: &AllStates) -> Result<(), String> {
    let n = g.n_players();
    for block in all.final_partition.blocks() {
        let first = SpinState::new(n, block.members()[0]).expect("member in range");
        let price = clearing_price(g, prior, block, &first).map_err(|e| e.to_string())?;
        for &s in block.members() {
            let state = SpinState::new(n, s).expect("member in range");
            let cp = clearing_price(g, prior, block, &state).map_err(|e| e.to_string())?;
            if cp != price {
                return Err(format!("states {} and {s} disagree on the final price", first.bits()));
            }
            for player in 0..n as usize {
                let bid = conditional_bid(g, prior, block, player, state.spin(player))
                    .map_err(|e| e.to_string())?;
                if bid != price {
                    return Err(format!(
                        "state {s}: player {player} bids {bid} against price {price} at equilibrium"
                    ));
                }
            }
        }
    }
    Ok(())
}

fn suite_a5(upstream: Option<&[SuiteOutcome]>) -> SuiteOutcome {
    let reran;
    let upstream = match upstream {
        Some(outcomes) => outcomes,
        None => {
            reran = vec![suite_a1(), suite_a2(), suite_a3(), suite_a4()];
            &reran
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(SEED_A5);
    let instances: Vec<(Security, Prior)> = (0..500)
        .map(|_| {
            let n = rng.gen_range(2..=6u32);
            (random_table_security(n, &mut rng), {
                random_table_prior(n, &mut rng)
            })
        })
        .collect();

    let mut col = Collector::new("A5");
    let results: Vec<CaseResult> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, (g, prior))| {
            let mut case = audited_case(g, prior, |all| consensus_reference(g, prior, all));
            for f in &mut case.failures {
                *f = format!("pair#{idx}: {f}");
            }
            case
        })
        .collect();
    col.merge(results);

    let mut upstream_runs = 0usize;
    for outcome in upstream {
        upstream_runs += outcome.audited_runs;
        if !outcome.passed {
            col.fail(format!(
                "upstream suite {} failed its structural audit",
                outcome.suite
            ));
        }
    }
    let summary = format!(
        "{} upstream runs audited (equilibrium/consensus) plus {} random pairs re-checked via reference bids",
        upstream_runs, col.cases
    );
    col.finish(summary)
}

fn suite_a6() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_A6);
    let instances: Vec<(Security, Prior, SpinState)> = (0..1000)
        .map(|_| {
            let n = rng.gen_range(2..=5u32);
            let g = random_table_security(n, &mut rng);
            let prior = random_table_prior(n, &mut rng);
            let state = random_state(n, &mut rng);
            (g, prior, state)
        })
        .collect();

    let mut col = Collector::new("A6");
    let results: Vec<CaseResult> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, (g, prior, state))| {
            let outcome = (|| -> Result<(), String> {
                let budget = state_count(g.n_players()) as u32;
                let fast = run_dynamics(g, prior, state, budget).map_err(|e| e.to_string())?;
                let naive = naive_run(g, prior, state, budget).map_err(|e| e.to_string())?;
                let fast_json = fast.to_json_string();
                let naive_json = naive.to_json_string();
                if fast_json != naive_json {
                    return Err(format!(
                        "instance {idx}: engine and reference traces differ\n  engine: {fast_json}\n  naive:  {naive_json}"
                    ));
                }
                Ok(())
            })();
            CaseResult::one(outcome.err())
        })
        .collect();
    col.merge(results);
    let summary = format!(
        "{} random instances, engine trace byte-identical to the naive reference",
        col.cases
    );
    col.finish(summary)
}

fn suite_a7() -> SuiteOutcome {
    let mut col = Collector::new("A7");
    let g = Security::parity(2, 1, 0b11).expect("xor");
    let prior = Prior::uniform(2).expect("uniform");
    let case = audited_case(&g, &prior, |all| {
        for t in &all.traces {
            if t.equilibrium_round != Some(1) {
                return Err(format!("state {}: equilibrium not at round 1", t.true_state));
            }
            if !t.final_price.is_zero() {
                return Err(format!("state {}: price {}", t.true_state, t.final_price));
            }
            if t.converged_to_truth {
                return Err(format!("state {} converged", t.true_state));
            }
        }
        Ok(())
    });
    col.merge(vec![case]);
    col.cases = 4; // one per true state
    col.finish("XOR/uniform: equilibrium at round 1, price 0, no state converges".into())
}

fn random_open_unit<R: Rng>(rng: &mut R) -> Rat {
    Rat::new(rng.gen_range(1..1000i64), 1000)
}

fn random_prior_mixed<R: Rng>(n: u32, rng: &mut R) -> Prior {
    match rng.gen_range(0..4u32) {
        0 => random_table_prior(n, rng),
        1 => random_symmetric_prior(n, rng),
        2 => Prior::product_biased(n, random_open_unit(rng)).expect("open unit"),
        _ => {
            let probs = (0..n).map(|_| random_open_unit(rng)).collect();
            Prior::product(n, probs).expect("open unit")
        }
    }
}

fn suite_a8() -> SuiteOutcome {
    let mut col = Collector::new("A8");
    let mut parts: Vec<(&'static str, usize)> = Vec::new();

    // Full structural audit of random dynamics runs.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED_A8);
        let instances: Vec<(Security, Prior)> = (0..1500)
            .map(|_| {
                let n = rng.gen_range(2..=8u32);
                (random_table_security(n, &mut rng), random_prior_mixed(n, &mut rng))
            })
            .collect();
        let results: Vec<CaseResult> = instances
            .par_iter()
            .map(|(g, prior)| audited_case(g, prior, |_| Ok(())))
            .collect();
        parts.push(("dynamics audits", results.len()));
        col.merge(results);
    }

    // Round-by-round refinement through the standalone operation.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED_A8 ^ 0x01);
        let mut results = Vec::new();
        for _ in 0..300 {
            let n = rng.gen_range(2..=6u32);
            let g = random_table_security(n, &mut rng);
            let prior = random_prior_mixed(n, &mut rng);
            let outcome = (|| -> Result<(), String> {
                let mut part = Partition::trivial(n).map_err(|e| e.to_string())?;
                for round in 1..=state_count(n) as u32 {
                    let next = refine_partition(&g, &prior, &part).map_err(|e| e.to_string())?;
                    next.validate().map_err(|e| e.to_string())?;
                    if !next.refines(&part) {
                        return Err("refinement not monotone".into());
                    }
                    if next.round() != round {
                        return Err("round counter mismatch".into());
                    }
                    let stationary = next.blocks().len() == part.blocks().len();
                    part = next;
                    if stationary {
                        break;
                    }
                }
                // the fixed point must match the batch engine's partition
                let all = run_all_states(&g, &prior).map_err(|e| e.to_string())?;
                let mut lhs: Vec<&[u32]> =
                    part.blocks().iter().map(|b| b.members()).collect();
                let mut rhs: Vec<&[u32]> = all
                    .final_partition
                    .blocks()
                    .iter()
                    .map(|b| b.members())
                    .collect();
                lhs.sort();
                rhs.sort();
                if lhs != rhs {
                    return Err("fixed point differs from batch engine".into());
                }
                Ok(())
            })();
            results.push(CaseResult::one(outcome.err()));
        }
        parts.push(("refinement chains", results.len()));
        col.merge(results);
    }

    // Affine bid identity on arbitrary blocks.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED_A8 ^ 0x02);
        let mut results = Vec::new();
        for _ in 0..2000 {
            let n = rng.gen_range(2..=8u32);
            let size = state_count(n) as u32;
            let g = random_table_security(n, &mut rng);
            let prior = random_prior_mixed(n, &mut rng);
            let mut members: Vec<u32> = (0..size).filter(|_| rng.gen::<bool>()).collect();
            if members.is_empty() {
                members.push(rng.gen_range(0..size));
            }
            let player = rng.gen_range(0..n as usize);
            let outcome = (|| -> Result<(), String> {
                let block = Block::new(n, members.clone()).map_err(|e| e.to_string())?;
                let (beta, gamma) =
                    beta_gamma(&g, &prior, &block, player).map_err(|e| e.to_string())?;
                let has_plus = members.iter().any(|&s| spin_of(s, player) == 1);
                let has_minus = members.iter().any(|&s| spin_of(s, player) == -1);
                if has_plus && has_minus {
                    let plus = conditional_bid(&g, &prior, &block, player, 1)
                        .map_err(|e| e.to_string())?;
                    let minus = conditional_bid(&g, &prior, &block, player, -1)
                        .map_err(|e| e.to_string())?;
                    if plus != &beta + &gamma || minus != &beta - &gamma {
                        return Err(format!(
                            "affine identity broken: ({beta}, {gamma}) vs bids ({plus}, {minus})"
                        ));
                    }
                } else {
                    let spin = if has_plus { 1 } else { -1 };
                    let bid = conditional_bid(&g, &prior, &block, player, spin)
                        .map_err(|e| e.to_string())?;
                    if !gamma.is_zero() || bid != beta {
                        return Err("degenerate block must give zero slope".into());
                    }
                }
                Ok(())
            })();
            results.push(CaseResult::one(outcome.err()));
        }
        parts.push(("affine bid identities", results.len()));
        col.merge(results);
    }

    // Classification round trips.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED_A8 ^ 0x03);
        let mut results = Vec::new();
        for _ in 0..1500 {
            let n = rng.gen_range(2..=10u32);
            let g = random_parity(n, &mut rng);
            let (sign, mask) = match g.form() {
                crate::security::SecurityForm::Parity { sign, mask } => (*sign, *mask),
                _ => unreachable!(),
            };
            let ok = parity_decompose(&g.to_table()) == Some((sign, mask));
            results.push(CaseResult::one(
                (!ok).then(|| format!("parity round trip failed for mask {mask:#b}")),
            ));
        }
        for _ in 0..1500 {
            let n = rng.gen_range(2..=10u32);
            let g = random_symmetric_security(n, &mut rng);
            let levels = match g.form() {
                crate::security::SecurityForm::Symmetric { levels } => levels.clone(),
                _ => unreachable!(),
            };
            let ok = is_totally_symmetric(&g.to_table()) == Some(levels);
            results.push(CaseResult::one(
                (!ok).then(|| "symmetric round trip failed".to_string()),
            ));
        }
        parts.push(("classification round trips", results.len()));
        col.merge(results);
    }

    // Threshold witnesses re-evaluate to the input security.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED_A8 ^ 0x04);
        let instances: Vec<Security> = (0..600)
            .map(|i| {
                let n = if i % 6 == 0 { 6 } else { rng.gen_range(2..=5u32) };
                random_threshold_security(n, &mut rng)
            })
            .collect();
        let results: Vec<CaseResult> = instances
            .par_iter()
            .map(|g| {
                let outcome = (|| -> Result<(), String> {
                    let n = g.n_players();
                    let table = g.to_table();
                    let Some((w, theta)) =
                        recognize_threshold(&table).map_err(|e| e.to_string())?
                    else {
                        return Err("recognizer refused a genuine threshold".into());
                    };
                    let rebuilt = Security::threshold(n, w, theta).map_err(|e| e.to_string())?;
                    if rebuilt.to_table() != table {
                        return Err("witness does not reproduce the payoff".into());
                    }
                    Ok(())
                })();
                CaseResult::one(outcome.err())
            })
            .collect();
        parts.push(("threshold witnesses", results.len()));
        col.merge(results);
    }

    // Prior mass properties.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED_A8 ^ 0x05);
        let mut results = Vec::new();
        for _ in 0..1500 {
            let n = rng.gen_range(2..=8u32);
            let prior = random_prior_mixed(n, &mut rng);
            let outcome = (|| -> Result<(), String> {
                let mut total = Rat::zero();
                for s in SpinState::all(n).map_err(|e| e.to_string())? {
                    let m = prior.mass(&s).map_err(|e| e.to_string())?;
                    if m <= Rat::zero() {
                        return Err(format!("state {} has mass {m}", s.bits()));
                    }
                    total += &m;
                }
                if !total.is_one() {
                    return Err(format!("masses sum to {total}"));
                }
                Ok(())
            })();
            results.push(CaseResult::one(outcome.err()));
        }
        // biased product and its level form agree on every state
        for _ in 0..300 {
            let n = rng.gen_range(2..=8u32);
            let p = random_open_unit(&mut rng);
            let outcome = (|| -> Result<(), String> {
                let biased = Prior::product_biased(n, p.clone()).map_err(|e| e.to_string())?;
                let q = Rat::one() - &p;
                let levels: Vec<Rat> = (0..=n).map(|k| p.pow(k) * q.pow(n - k)).collect();
                let leveled = Prior::symmetric_levels(n, levels).map_err(|e| e.to_string())?;
                for s in SpinState::all(n).map_err(|e| e.to_string())? {
                    if biased.mass(&s) != leveled.mass(&s) {
                        return Err(format!("forms disagree at state {}", s.bits()));
                    }
                }
                Ok(())
            })();
            results.push(CaseResult::one(outcome.err()));
        }
        parts.push(("prior mass checks", results.len()));
        col.merge(results);
    }

    // Rational arithmetic canonicalization.
    {
        use num_integer::Integer;
        use num_traits::One;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED_A8 ^ 0x06);
        let mut results = Vec::new();
        for _ in 0..1100 {
            let num = rng.gen_range(-1_000_000_000i64..=1_000_000_000);
            let den = loop {
                let d = rng.gen_range(-1_000_000_000i64..=1_000_000_000);
                if d != 0 {
                    break d;
                }
            };
            let other = Rat::new(
                rng.gen_range(-1000i64..=1000),
                rng.gen_range(1i64..=1000),
            );
            let outcome = (|| -> Result<(), String> {
                let r = Rat::new(num, den);
                for v in [&r + &other, &r - &other, &r * &other] {
                    if v.numer().gcd(v.denom()) != num_bigint::BigInt::one()
                        || v.denom() <= &num_bigint::BigInt::from(0)
                    {
                        return Err(format!("non-canonical result {v}"));
                    }
                }
                if (&r + &other) - &other != r {
                    return Err("add/sub not exact".into());
                }
                if !other.is_zero() && (&r * &other) / &other != r {
                    return Err("mul/div not exact".into());
                }
                let round: Rat = r.to_string().parse().map_err(|_| "reparse failed")?;
                if round != r {
                    return Err("string round trip failed".into());
                }
                Ok(())
            })();
            results.push(CaseResult::one(outcome.err()));
        }
        parts.push(("rational canonicalization", results.len()));
        col.merge(results);
    }

    let detail: Vec<String> = parts
        .iter()
        .map(|(name, count)| format!("{count} {name}"))
        .collect();
    let total = col.cases;
    if total < 10_000 {
        col.fail(format!("property campaign ran only {total} cases"));
    }
    let summary = format!("{total} property cases ({}), zero violations", detail.join(", "));
    col.finish(summary)
}

fn suite_a9() -> SuiteOutcome {
    let mut col = Collector::new("A9");
    let g = Security::parity(2, 1, 0b11).expect("xor");
    let prior = Prior::uniform(2).expect("uniform");
    let outcome = (|| -> Result<usize, String> {
        let signal = gamma0(&g, &prior).map_err(|e| e.to_string())?;
        if !signal.covariance_gap.is_zero() {
            return Err(format!(
                "instance does not have a zero covariance gap: {}",
                signal.covariance_gap
            ));
        }
        let all = run_all_states(&g, &prior).map_err(|e| e.to_string())?;
        let diverging = all
            .traces
            .iter()
            .filter(|t| !t.converged_to_truth)
            .count();
        if diverging == 0 {
            return Err("every state converged despite the zero gap".into());
        }
        Ok(diverging)
    })();
    col.cases = 1;
    let summary = match outcome {
        Ok(diverging) => format!(
            "zero covariance gap instance: {diverging}/4 states end away from the true payoff"
        ),
        Err(msg) => {
            col.fail(msg);
            "zero covariance gap instance".into()
        }
    };
    col.finish(summary)
}

/// Runs one suite. `A5` re-runs `A1`–`A4` internally to audit their runs;
/// use [`run_all`] to share that work.
pub fn run_suite(suite: Suite) -> SuiteOutcome {
    match suite {
        Suite::A1 => suite_a1(),
        Suite::A2 => suite_a2(),
        Suite::A3 => suite_a3(),
        Suite::A4 => suite_a4(),
        Suite::A5 => suite_a5(None),
        Suite::A6 => suite_a6(),
        Suite::A7 => suite_a7(),
        Suite::A8 => suite_a8(),
        Suite::A9 => suite_a9(),
    }
}

/// Runs every suite, feeding the A1–A4 outcomes into A5's audit.
pub fn run_all() -> Vec<SuiteOutcome> {
    let upstream = [suite_a1(), suite_a2(), suite_a3(), suite_a4()];
    let a5 = suite_a5(Some(&upstream));
    let [a1, a2, a3, a4] = upstream;
    vec![
        a1,
        a2,
        a3,
        a4,
        a5,
        suite_a6(),
        suite_a7(),
        suite_a8(),
        suite_a9(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!(Suite::parse("a4"), Some(Suite::A4));
        assert_eq!(Suite::parse(" A9 "), Some(Suite::A9));
        assert_eq!(Suite::parse("A10"), None);
    }

    #[test]
    fn quick_suites_pass() {
        for suite in [Suite::A7, Suite::A9] {
            let outcome = run_suite(suite);
            assert!(outcome.passed, "{}", outcome.line());
        }
    }
}
