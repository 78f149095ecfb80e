//! Joint private-information states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the player count; every operation enumerating the state space
/// allocates `2^N` entries, so this keeps instances at desk scale.
pub const MAX_PLAYERS: u32 = 24;

pub(crate) fn check_player_count(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Validation("player count must be at least 1".into()));
    }
    if n > MAX_PLAYERS {
        return Err(Error::ResourceCap(format!(
            "player count {n} exceeds cap {MAX_PLAYERS}"
        )));
    }
    Ok(())
}

/// Number of joint states for `n` players.
pub fn state_count(n: u32) -> usize {
    1usize << n
}

/// One assignment of all private bits, packed into a bitmask: bit `i` set
/// means player `i` (0-based) holds the spin `+1`.
///
/// This encoding also serves as the table index everywhere a per-state array
/// appears (security tables, prior tables, trace blocks).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct SpinState {
    n: u32,
    bits: u32,
}

impl SpinState {
    pub fn new(n: u32, bits: u32) -> Result<Self> {
        check_player_count(n)?;
        if bits as u64 >= 1u64 << n {
            return Err(Error::InvalidArgument(format!(
                "state bitmask {bits} out of range for {n} players"
            )));
        }
        Ok(SpinState { n, bits })
    }

    /// Builds a state from explicit spins, e.g. `[1, -1, 1]`.
    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut bits = 0u32;
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => bits |= 1 << i,
                -1 => {}
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "spin of player {} must be +1 or -1, got {other}",
                        i + 1
                    )))
                }
            }
        }
        SpinState::new(spins.len() as u32, bits)
    }

    pub fn n_players(&self) -> u32 {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Spin of `player` (0-based), as `+1` or `-1`.
    pub fn spin(&self, player: usize) -> i8 {
        assert!(
            player < self.n as usize,
            "player {player} out of range for {} players",
            self.n
        );
        spin_of(self.bits, player)
    }

    /// Number of players holding `+1`.
    pub fn count_plus(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.n as usize).map(|i| self.spin(i)).collect()
    }

    /// All `2^n` states in bitmask order.
    pub fn all(n: u32) -> Result<impl Iterator<Item = SpinState>> {
        check_player_count(n)?;
        Ok((0..state_count(n) as u32).map(move |bits| SpinState { n, bits }))
    }
}

#[inline]
pub(crate) fn spin_of(bits: u32, player: usize) -> i8 {
    if bits >> player & 1 == 1 {
        1
    } else {
        -1
    }
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    n: u32,
    bits: u32,
}

impl TryFrom<StateRepr> for SpinState {
    type Error = Error;
    fn try_from(r: StateRepr) -> Result<Self> {
        SpinState::new(r.n, r.bits)
    }
}

impl From<SpinState> for StateRepr {
    fn from(s: SpinState) -> Self {
        StateRepr {
            n: s.n,
            bits: s.bits,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_matches_bit_convention() {
        // bits = 0b01 for N=2 is the state (+1, -1)
        let s = SpinState::new(2, 0b01).unwrap();
        assert_eq!(s.spin(0), 1);
        assert_eq!(s.spin(1), -1);
        assert_eq!(s.count_plus(), 1);
        assert_eq!(SpinState::from_spins(&[1, -1]).unwrap(), s);
    }

    #[test]
    fn bounds() {
        assert!(SpinState::new(0, 0).is_err());
        assert!(SpinState::new(25, 0).is_err());
        assert!(SpinState::new(2, 4).is_err());
        assert!(SpinState::new(24, (1 << 24) - 1).is_ok());
        assert!(SpinState::from_spins(&[1, 0]).is_err());
    }

    #[test]
    fn enumeration_order() {
        let all: Vec<u32> = SpinState::all(2).unwrap().map(|s| s.bits()).collect();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }
}
