//! Securities: Boolean payoff functions over joint states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::state::{check_player_count, spin_of, state_count, SpinState};

/// Structured or tabulated payoff form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SecurityForm {
    /// `sign · ∏_{i ∈ mask} σ_i`; bit `i` of `mask` selects player `i`.
    Parity { sign: i8, mask: u32 },
    /// Payoff depends only on the number of `+1` spins: `levels[k]` for
    /// states with `k` plus-bits, `k = 0..=n`.
    Symmetric { levels: Vec<i8> },
    /// `+1` exactly when `Σ w_i σ_i ≥ θ` (boundary counts as `+1`).
    Threshold { weights: Vec<Rat>, theta: Rat },
    /// Direct lookup; index is the state bitmask.
    Table { values: Vec<i8> },
}

/// A traded security: `n` players and a payoff `g : {+1,-1}^n → {+1,-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SecurityRepr", into = "SecurityRepr")]
pub struct Security {
    n: u32,
    form: SecurityForm,
}

fn check_sign(sign: i8, what: &str) -> Result<()> {
    if sign == 1 || sign == -1 {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{what} must be +1 or -1, got {sign}"
        )))
    }
}

impl Security {
    pub fn parity(n: u32, sign: i8, mask: u32) -> Result<Self> {
        check_player_count(n)?;
        check_sign(sign, "parity sign")?;
        if mask as u64 >= 1u64 << n {
            return Err(Error::InvalidArgument(format!(
                "parity mask {mask:#b} selects players beyond {n}"
            )));
        }
        Ok(Security {
            n,
            form: SecurityForm::Parity { sign, mask },
        })
    }

    pub fn symmetric(n: u32, levels: Vec<i8>) -> Result<Self> {
        check_player_count(n)?;
        if levels.len() != n as usize + 1 {
            return Err(Error::InvalidArgument(format!(
                "symmetric security needs {} levels for {n} players, got {}",
                n + 1,
                levels.len()
            )));
        }
        for (k, &a) in levels.iter().enumerate() {
            check_sign(a, &format!("level {k}"))?;
        }
        Ok(Security {
            n,
            form: SecurityForm::Symmetric { levels },
        })
    }

    pub fn threshold(n: u32, weights: Vec<Rat>, theta: Rat) -> Result<Self> {
        check_player_count(n)?;
        if weights.len() != n as usize {
            return Err(Error::InvalidArgument(format!(
                "threshold security needs {n} weights, got {}",
                weights.len()
            )));
        }
        Ok(Security {
            n,
            form: SecurityForm::Threshold { weights, theta },
        })
    }

    pub fn table(n: u32, values: Vec<i8>) -> Result<Self> {
        check_player_count(n)?;
        if values.len() != state_count(n) {
            return Err(Error::InvalidArgument(format!(
                "table security needs {} values for {n} players, got {}",
                state_count(n),
                values.len()
            )));
        }
        for (b, &v) in values.iter().enumerate() {
            check_sign(v, &format!("table value at state {b}"))?;
        }
        Ok(Security {
            n,
            form: SecurityForm::Table { values },
        })
    }

    pub fn n_players(&self) -> u32 {
        self.n
    }

    pub fn form(&self) -> &SecurityForm {
        &self.form
    }

    /// The `±1` payoff `g(σ)`.
    pub fn payoff(&self, s: &SpinState) -> Result<i8> {
        if s.n_players() != self.n {
            return Err(Error::InvalidArgument(format!(
                "state has {} players but security has {}",
                s.n_players(),
                self.n
            )));
        }
        Ok(self.payoff_bits(s.bits()))
    }

    /// The 0/1 settlement value `(1 + g)/2`.
    pub fn original_payoff(&self, s: &SpinState) -> Result<Rat> {
        Ok(match self.payoff(s)? {
            1 => Rat::one(),
            _ => Rat::zero(),
        })
    }

    /// Payoff by state bitmask; callers guarantee `bits < 2^n`.
    pub(crate) fn payoff_bits(&self, bits: u32) -> i8 {
        match &self.form {
            SecurityForm::Parity { sign, mask } => {
                // Each selected player with spin -1 flips the product.
                let minus_count = (mask & !bits).count_ones();
                if minus_count % 2 == 0 {
                    *sign
                } else {
                    -sign
                }
            }
            SecurityForm::Symmetric { levels } => levels[bits.count_ones() as usize],
            SecurityForm::Threshold { weights, theta } => {
                let mut sum = Rat::zero();
                for (i, w) in weights.iter().enumerate() {
                    if spin_of(bits, i) == 1 {
                        sum += w;
                    } else {
                        sum -= w;
                    }
                }
                if sum >= *theta {
                    1
                } else {
                    -1
                }
            }
            SecurityForm::Table { values } => values[bits as usize],
        }
    }

    /// Full payoff table in bitmask index order.
    pub(crate) fn table_values(&self) -> Vec<i8> {
        match &self.form {
            SecurityForm::Table { values } => values.clone(),
            _ => (0..state_count(self.n) as u32)
                .map(|b| self.payoff_bits(b))
                .collect(),
        }
    }

    /// Re-expresses the security in table form.
    pub fn to_table(&self) -> Security {
        Security {
            n: self.n,
            form: SecurityForm::Table {
                values: self.table_values(),
            },
        }
    }
}

/// JSON wire form. Parity masks are serialized as sorted 1-based player
/// lists, matching the documented schema.
#[derive(Serialize, Deserialize)]
struct SecurityRepr {
    n: u32,
    form: FormRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum FormRepr {
    Parity { sign: i8, mask: Vec<u32> },
    Symmetric { levels: Vec<i8> },
    Threshold { w: Vec<Rat>, theta: Rat },
    Table { values: Vec<i8> },
}

impl TryFrom<SecurityRepr> for Security {
    type Error = Error;

    fn try_from(r: SecurityRepr) -> Result<Self> {
        match r.form {
            FormRepr::Parity { sign, mask } => {
                let mut bits = 0u32;
                for &player in &mask {
                    if player == 0 || player > r.n {
                        return Err(Error::InvalidArgument(format!(
                            "parity mask entry {player} out of range 1..={}",
                            r.n
                        )));
                    }
                    let bit = 1u32 << (player - 1);
                    if bits & bit != 0 {
                        return Err(Error::InvalidArgument(format!(
                            "parity mask lists player {player} twice"
                        )));
                    }
                    bits |= bit;
                }
                Security::parity(r.n, sign, bits)
            }
            FormRepr::Symmetric { levels } => Security::symmetric(r.n, levels),
            FormRepr::Threshold { w, theta } => Security::threshold(r.n, w, theta),
            FormRepr::Table { values } => Security::table(r.n, values),
        }
    }
}

impl From<Security> for SecurityRepr {
    fn from(s: Security) -> Self {
        let form = match s.form {
            SecurityForm::Parity { sign, mask } => FormRepr::Parity {
                sign,
                mask: (0..s.n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect(),
            },
            SecurityForm::Symmetric { levels } => FormRepr::Symmetric { levels },
            SecurityForm::Threshold { weights, theta } => FormRepr::Threshold { w: weights, theta },
            SecurityForm::Table { values } => FormRepr::Table { values },
        };
        SecurityRepr { n: s.n, form }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(n: u32, bits: u32) -> SpinState {
        SpinState::new(n, bits).unwrap()
    }

    #[test]
    fn parity_payoff() {
        // sign +1, players {1,2}: product of both spins
        let g = Security::parity(2, 1, 0b11).unwrap();
        assert_eq!(g.payoff(&st(2, 0b11)).unwrap(), 1);
        assert_eq!(g.payoff(&st(2, 0b01)).unwrap(), -1);
        // empty mask is the constant security
        let c = Security::parity(2, -1, 0).unwrap();
        assert_eq!(c.payoff(&st(2, 0b10)).unwrap(), -1);
    }

    #[test]
    fn threshold_payoff_boundary_counts_as_plus() {
        // majority of three with θ = 1: (+,+,-) sums to 1 ≥ 1
        let g = Security::threshold(
            3,
            vec![Rat::one(), Rat::one(), Rat::one()],
            Rat::one(),
        )
        .unwrap();
        assert_eq!(g.payoff(&st(3, 0b011)).unwrap(), 1);
        assert_eq!(g.payoff(&st(3, 0b001)).unwrap(), -1);
        // θ = 0 with a zero-sum state lands exactly on the boundary
        let h = Security::threshold(2, vec![Rat::one(), Rat::one()], Rat::zero()).unwrap();
        assert_eq!(h.payoff(&st(2, 0b01)).unwrap(), 1);
    }

    #[test]
    fn symmetric_payoff_selects_level_by_popcount() {
        let g = Security::symmetric(2, vec![1, -1, 1]).unwrap();
        assert_eq!(g.payoff(&st(2, 0b01)).unwrap(), -1);
        assert_eq!(g.payoff(&st(2, 0b11)).unwrap(), 1);
    }

    #[test]
    fn original_payoff_is_zero_one() {
        let g = Security::parity(2, 1, 0b11).unwrap();
        assert_eq!(g.original_payoff(&st(2, 0b11)).unwrap(), Rat::one());
        assert_eq!(g.original_payoff(&st(2, 0b01)).unwrap(), Rat::zero());
    }

    #[test]
    fn to_table_round_trips_payoff() {
        // XOR truth table in bitmask order 00,01,10,11
        let g = Security::parity(2, 1, 0b11).unwrap();
        let t = g.to_table();
        match t.form() {
            SecurityForm::Table { values } => assert_eq!(values, &vec![1, -1, -1, 1]),
            _ => panic!("expected table form"),
        }
        // majority: +1 exactly on popcount ≥ 2
        let m = Security::threshold(3, vec![1, 1, 1].into_iter().map(Rat::from_int).collect(), Rat::one())
            .unwrap()
            .to_table();
        for s in SpinState::all(3).unwrap() {
            let expect = if s.count_plus() >= 2 { 1 } else { -1 };
            assert_eq!(m.payoff(&s).unwrap(), expect);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = Security::parity(2, 1, 0b11).unwrap();
        assert!(g.payoff(&st(3, 0)).is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        let g = Security::parity(3, 1, 0b101).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(
            json,
            r#"{"n":3,"form":{"type":"parity","sign":1,"mask":[1,3]}}"#
        );
        let back: Security = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);

        let t: Security = serde_json::from_str(
            r#"{"n":2,"form":{"type":"threshold","w":["1/1","1/1"],"theta":"1/1"}}"#,
        )
        .unwrap();
        assert_eq!(t.payoff(&st(2, 0b11)).unwrap(), 1);

        // malformed: duplicate mask entry
        assert!(serde_json::from_str::<Security>(
            r#"{"n":2,"form":{"type":"parity","sign":1,"mask":[1,1]}}"#
        )
        .is_err());
        // malformed: non-sign table value
        assert!(serde_json::from_str::<Security>(
            r#"{"n":1,"form":{"type":"table","values":[1,2]}}"#
        )
        .is_err());
    }
}
