//! Common prior distributions over the joint state space.
//!
//! Every prior here has full support: the dynamics start from an arbitrary
//! true state, so each state must be assigned strictly positive mass.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::state::{check_player_count, state_count, SpinState};

/// Structured or tabulated prior form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PriorForm {
    /// Every player independently holds `+1` with the same probability `p`.
    ProductBiased { p: Rat },
    /// Independent players with per-player probabilities.
    Product { probs: Vec<Rat> },
    /// Mass `levels[k]` for every state with `k` plus-bits.
    SymmetricLevels { levels: Vec<Rat> },
    /// Direct per-state masses; index is the state bitmask.
    Table { masses: Vec<Rat> },
}

/// A validated common prior for `n` players.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PriorRepr", into = "PriorRepr")]
pub struct Prior {
    n: u32,
    form: PriorForm,
}

fn check_open_unit(p: &Rat, what: &str) -> Result<()> {
    if *p <= Rat::zero() || *p >= Rat::one() {
        return Err(Error::Validation(format!(
            "{what} must lie strictly between 0 and 1, got {p}"
        )));
    }
    Ok(())
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

impl Prior {
    pub fn product_biased(n: u32, p: Rat) -> Result<Self> {
        check_player_count(n)?;
        check_open_unit(&p, "bias p")?;
        Ok(Prior {
            n,
            form: PriorForm::ProductBiased { p },
        })
    }

    /// The uniform prior, i.e. bias `p = 1/2`.
    pub fn uniform(n: u32) -> Result<Self> {
        Prior::product_biased(n, Rat::new(1, 2))
    }

    /// Uniformly biased prior parametrized by the per-player mean spin
    /// `m = E[σ_i] ∈ (-1, 1)`, so `p = (1 + m)/2`.
    pub fn bias_from_magnetization(n: u32, m: Rat) -> Result<Self> {
        if m <= Rat::from_int(-1) || m >= Rat::one() {
            return Err(Error::Validation(format!(
                "magnetization must lie strictly between -1 and 1, got {m}"
            )));
        }
        Prior::product_biased(n, (Rat::one() + m) / Rat::from_int(2))
    }

    pub fn product(n: u32, probs: Vec<Rat>) -> Result<Self> {
        check_player_count(n)?;
        if probs.len() != n as usize {
            return Err(Error::InvalidArgument(format!(
                "product prior needs {n} probabilities, got {}",
                probs.len()
            )));
        }
        for (i, p) in probs.iter().enumerate() {
            check_open_unit(p, &format!("probability of player {}", i + 1))?;
        }
        Ok(Prior {
            n,
            form: PriorForm::Product { probs },
        })
    }

    pub fn symmetric_levels(n: u32, levels: Vec<Rat>) -> Result<Self> {
        check_player_count(n)?;
        if levels.len() != n as usize + 1 {
            return Err(Error::InvalidArgument(format!(
                "symmetric prior needs {} level masses for {n} players, got {}",
                n + 1,
                levels.len()
            )));
        }
        let mut total = Rat::zero();
        for (k, q) in levels.iter().enumerate() {
            if *q <= Rat::zero() {
                return Err(Error::Validation(format!(
                    "level {k} has non-positive mass {q}"
                )));
            }
            total += &(Rat::from_bigints(binomial(n, k as u32), BigInt::one())? * q);
        }
        if !total.is_one() {
            return Err(Error::Validation(format!(
                "level masses weighted by binomial counts sum to {total}, not 1"
            )));
        }
        Ok(Prior {
            n,
            form: PriorForm::SymmetricLevels { levels },
        })
    }

    pub fn table(n: u32, masses: Vec<Rat>) -> Result<Self> {
        check_player_count(n)?;
        if masses.len() != state_count(n) {
            return Err(Error::InvalidArgument(format!(
                "table prior needs {} masses for {n} players, got {}",
                state_count(n),
                masses.len()
            )));
        }
        let mut total = Rat::zero();
        for (b, q) in masses.iter().enumerate() {
            if *q <= Rat::zero() {
                return Err(Error::Validation(format!(
                    "state {b} has non-positive mass {q}"
                )));
            }
            total += q;
        }
        if !total.is_one() {
            return Err(Error::Validation(format!(
                "state masses sum to {total}, not 1"
            )));
        }
        Ok(Prior {
            n,
            form: PriorForm::Table { masses },
        })
    }

    pub fn n_players(&self) -> u32 {
        self.n
    }

    pub fn form(&self) -> &PriorForm {
        &self.form
    }

    /// Exact mass of one state.
    pub fn mass(&self, s: &SpinState) -> Result<Rat> {
        if s.n_players() != self.n {
            return Err(Error::InvalidArgument(format!(
                "state has {} players but prior has {}",
                s.n_players(),
                self.n
            )));
        }
        Ok(self.mass_bits(s.bits()))
    }

    pub(crate) fn mass_bits(&self, bits: u32) -> Rat {
        match &self.form {
            PriorForm::ProductBiased { p } => {
                let k = bits.count_ones();
                p.pow(k) * (Rat::one() - p).pow(self.n - k)
            }
            PriorForm::Product { probs } => {
                let mut m = Rat::one();
                for (i, p) in probs.iter().enumerate() {
                    if bits >> i & 1 == 1 {
                        m = m * p;
                    } else {
                        m = m * (Rat::one() - p);
                    }
                }
                m
            }
            PriorForm::SymmetricLevels { levels } => levels[bits.count_ones() as usize].clone(),
            PriorForm::Table { masses } => masses[bits as usize].clone(),
        }
    }

    /// Per-state masses as integer numerators over one common denominator.
    ///
    /// The numerators are strictly positive and sum to the denominator. Bid
    /// and price computations run on these integers: every bid is a ratio of
    /// mass sums, so the common denominator cancels.
    pub(crate) fn mass_numerators(&self) -> (Vec<BigInt>, BigInt) {
        let size = state_count(self.n);
        match &self.form {
            PriorForm::ProductBiased { p } => {
                let a = p.numer().clone();
                let d = p.denom().clone();
                let b = &d - &a;
                let n = self.n as usize;
                let mut pow_a = vec![BigInt::one()];
                let mut pow_b = vec![BigInt::one()];
                for k in 1..=n {
                    pow_a.push(&pow_a[k - 1] * &a);
                    pow_b.push(&pow_b[k - 1] * &b);
                }
                let nums = (0..size as u32)
                    .map(|bits| {
                        let k = bits.count_ones() as usize;
                        &pow_a[k] * &pow_b[n - k]
                    })
                    .collect();
                (nums, d.pow(self.n))
            }
            PriorForm::Product { probs } => {
                // Extend player by player: each step doubles the table.
                let mut nums = vec![BigInt::one()];
                let mut den = BigInt::one();
                for p in probs {
                    let a = p.numer();
                    let b = p.denom() - a;
                    let mut next = Vec::with_capacity(nums.len() * 2);
                    for v in &nums {
                        next.push(v * &b);
                    }
                    for v in &nums {
                        next.push(v * a);
                    }
                    nums = next;
                    den *= p.denom();
                }
                // The doubling above appends the new player's bit as the
                // highest bit, matching the bitmask encoding.
                (nums, den)
            }
            PriorForm::SymmetricLevels { levels } => {
                let den = levels
                    .iter()
                    .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
                let level_nums: Vec<BigInt> = levels
                    .iter()
                    .map(|q| q.numer() * (&den / q.denom()))
                    .collect();
                let nums = (0..size as u32)
                    .map(|bits| level_nums[bits.count_ones() as usize].clone())
                    .collect();
                (nums, den)
            }
            PriorForm::Table { masses } => {
                let den = masses
                    .iter()
                    .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
                let nums = masses
                    .iter()
                    .map(|q| q.numer() * (&den / q.denom()))
                    .collect();
                (nums, den)
            }
        }
    }
}

/// JSON wire form; rationals as `"num/den"` strings.
#[derive(Serialize, Deserialize)]
struct PriorRepr {
    n: u32,
    form: PriorFormRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum PriorFormRepr {
    ProductBiased { p: Rat },
    Product { p: Vec<Rat> },
    SymmetricLevels { levels: Vec<Rat> },
    Table { masses: Vec<Rat> },
}

impl TryFrom<PriorRepr> for Prior {
    type Error = Error;

    fn try_from(r: PriorRepr) -> Result<Self> {
        match r.form {
            PriorFormRepr::ProductBiased { p } => Prior::product_biased(r.n, p),
            PriorFormRepr::Product { p } => Prior::product(r.n, p),
            PriorFormRepr::SymmetricLevels { levels } => Prior::symmetric_levels(r.n, levels),
            PriorFormRepr::Table { masses } => Prior::table(r.n, masses),
        }
    }
}

impl From<Prior> for PriorRepr {
    fn from(p: Prior) -> Self {
        let form = match p.form {
            PriorForm::ProductBiased { p } => PriorFormRepr::ProductBiased { p },
            PriorForm::Product { probs } => PriorFormRepr::Product { p: probs },
            PriorForm::SymmetricLevels { levels } => PriorFormRepr::SymmetricLevels { levels },
            PriorForm::Table { masses } => PriorFormRepr::Table { masses },
        };
        PriorRepr { n: p.n, form }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn st(n: u32, bits: u32) -> SpinState {
        SpinState::new(n, bits).unwrap()
    }

    #[test]
    fn biased_masses() {
        // p = 3/4, N = 2, state (+,-): (3/4)(1/4) = 3/16
        let p = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        assert_eq!(p.mass(&st(2, 0b01)).unwrap(), Rat::new(3, 16));
        // uniform levels q_k = 1/4 give 1/4 everywhere
        let u = Prior::symmetric_levels(2, vec![Rat::new(1, 4); 3]).unwrap();
        assert_eq!(u.mass(&st(2, 0b10)).unwrap(), Rat::new(1, 4));
    }

    #[test]
    fn bias_from_magnetization_maps_mean_spin() {
        let p = Prior::bias_from_magnetization(3, Rat::new(1, 2)).unwrap();
        match p.form() {
            PriorForm::ProductBiased { p } => assert_eq!(*p, Rat::new(3, 4)),
            _ => panic!("expected biased form"),
        }
        let h0 = Prior::bias_from_magnetization(3, Rat::zero()).unwrap();
        match h0.form() {
            PriorForm::ProductBiased { p } => assert_eq!(*p, Rat::new(1, 2)),
            _ => panic!("expected biased form"),
        }
        assert!(Prior::bias_from_magnetization(3, Rat::one()).is_err());
        assert!(Prior::bias_from_magnetization(3, Rat::new(-5, 4)).is_err());
    }

    #[test]
    fn validation_reports_offending_entry() {
        // masses summing to 99/100
        let masses = vec![
            Rat::new(24, 100),
            Rat::new(25, 100),
            Rat::new(25, 100),
            Rat::new(25, 100),
        ];
        let err = Prior::table(2, masses).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");

        let err = Prior::table(
            2,
            vec![
                Rat::zero(),
                Rat::new(1, 2),
                Rat::new(1, 4),
                Rat::new(1, 4),
            ],
        )
        .unwrap_err();
        assert!(err.to_string().contains("state 0"), "{err}");

        let err = Prior::symmetric_levels(2, vec![Rat::new(1, 2); 3]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn masses_sum_to_one_exhaustively() {
        let priors = [
            Prior::product_biased(5, Rat::new(9, 10)).unwrap(),
            Prior::product(
                3,
                vec![Rat::new(1, 3), Rat::new(2, 7), Rat::new(9, 11)],
            )
            .unwrap(),
            Prior::symmetric_levels(
                3,
                vec![
                    Rat::new(1, 16),
                    Rat::new(1, 8),
                    Rat::new(1, 8),
                    Rat::new(3, 16),
                ],
            )
            .unwrap(),
        ];
        for p in &priors {
            let total: Rat = SpinState::all(p.n_players())
                .unwrap()
                .map(|s| p.mass(&s).unwrap())
                .sum();
            assert!(total.is_one(), "masses of {:?} sum to {total}", p.form());
        }
    }

    #[test]
    fn numerators_match_masses() {
        let priors = [
            Prior::product_biased(4, Rat::new(2, 5)).unwrap(),
            Prior::product(3, vec![Rat::new(1, 3), Rat::new(2, 7), Rat::new(9, 11)]).unwrap(),
            Prior::symmetric_levels(
                2,
                vec![Rat::new(1, 6), Rat::new(1, 4), Rat::new(1, 3)],
            )
            .unwrap(),
            Prior::table(
                2,
                vec![
                    Rat::new(1, 10),
                    Rat::new(1, 5),
                    Rat::new(3, 10),
                    Rat::new(2, 5),
                ],
            )
            .unwrap(),
        ];
        for p in &priors {
            let (nums, den) = p.mass_numerators();
            let mut sum = BigInt::zero();
            for (bits, num) in nums.iter().enumerate() {
                let expect = p.mass_bits(bits as u32);
                assert_eq!(
                    Rat::from_bigints(num.clone(), den.clone()).unwrap(),
                    expect
                );
                sum += num;
            }
            assert_eq!(sum, den);
        }
    }

    #[test]
    fn json_schema_round_trip() {
        let p = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"n":2,"form":{"type":"product_biased","p":"3/4"}}"#);
        assert_eq!(serde_json::from_str::<Prior>(&json).unwrap(), p);

        // malformed: does not normalize
        let bad = r#"{"n":1,"form":{"type":"table","masses":["1/2","1/4"]}}"#;
        assert!(serde_json::from_str::<Prior>(bad).is_err());
    }
}
