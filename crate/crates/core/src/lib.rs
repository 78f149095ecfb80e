//! Exact simulation and analysis of an iterated clearing-price market over
//! Boolean securities.
//!
//! `N` players each hold one private bit (a spin in `{+1, -1}`); a traded
//! security pays `g(σ) ∈ {+1, -1}` as a function of the joint state. Every
//! round, each player bids the expected payoff conditional on their own bit
//! and everything revealed by past prices, the market announces the average
//! bid as the clearing price, and everyone — players and outside observers
//! alike — rules out the states inconsistent with that announcement. The
//! process is a partition refinement of the `2^N` joint states and always
//! reaches a fixed point where all bids agree with the price; whether that
//! price equals the true payoff depends on the structure of the security
//! and the prior.
//!
//! All arithmetic is exact rational: the dynamics test prices for *exact*
//! equality, so a single rounding error would corrupt the refinement. The
//! crate provides:
//!
//! * [`engine`] — the simulator, as per-block bid computation over integer
//!   mass numerators ([`engine::run_dynamics`], [`engine::run_all_states`]);
//! * [`oracle`] — a deliberately naive reference implementation carrying
//!   full posterior arrays, for differential testing;
//! * [`analysis`] — classification of securities (product-form, totally
//!   symmetric, weighted threshold via exact LP feasibility) and verdicts
//!   on guaranteed convergence;
//! * [`accept`] — the self-contained verification suites behind
//!   `infomarket verify`;
//! * a CLI (`infomarket`) driving runs, sweeps, and classification from
//!   JSON configs.

pub mod accept;
pub mod analysis;
pub mod commands;
pub mod config;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod partition;
pub mod prior;
pub mod random;
pub mod rational;
pub mod security;
pub mod state;
pub mod trace;

mod simplex;
mod wht;

pub use engine::{
    beta_gamma, clearing_price, conditional_bid, refine_partition, run_all_states, run_dynamics,
    AllStates,
};
pub use error::{Error, Result};
pub use partition::{Block, Partition};
pub use prior::{Prior, PriorForm};
pub use rational::Rat;
pub use security::{Security, SecurityForm};
pub use state::{SpinState, MAX_PLAYERS};
pub use trace::{RoundRecord, Trace};
