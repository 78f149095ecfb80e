//! Fast Walsh transform over exact integers.

use num_bigint::BigInt;
use num_traits::One;

use crate::rational::Rat;
use crate::security::Security;

/// In-place butterfly: `v[s] ← Σ_b (-1)^{popcount(s & b)} v[b]`.
///
/// Values stay exact in an `i64`: inputs are `±1` and intermediate sums are
/// bounded by `2^N ≤ 2^24`.
fn butterfly(v: &mut [i64]) {
    let mut half = 1;
    while half < v.len() {
        for chunk in v.chunks_mut(2 * half) {
            for j in 0..half {
                let a = chunk[j];
                let b = chunk[j + half];
                chunk[j] = a + b;
                chunk[j + half] = a - b;
            }
        }
        half <<= 1;
    }
}

/// Raw integer correlations `Σ_σ g(σ)·χ_S(σ)` for every player subset `S`
/// (as a bitmask index); `χ_S(σ) = ∏_{i∈S} σ_i`.
pub(crate) fn raw_correlations(g: &Security) -> Vec<i64> {
    let mut v: Vec<i64> = g.table_values().iter().map(|&x| x as i64).collect();
    butterfly(&mut v);
    // The butterfly pairs bits of S with *set* bits of σ; the spin
    // convention pairs them with unset bits, which costs a sign per
    // selected player.
    for (s, value) in v.iter_mut().enumerate() {
        if (s as u32).count_ones() % 2 == 1 {
            *value = -*value;
        }
    }
    v
}

/// Exact Walsh spectrum of the payoff: coefficient of `χ_S` at index `S`,
/// i.e. `2^{-N} Σ_σ g(σ)·χ_S(σ)`.
pub fn walsh_spectrum(g: &Security) -> Vec<Rat> {
    let n = g.n_players();
    let den = BigInt::one() << n;
    raw_correlations(g)
        .into_iter()
        .map(|c| Rat::from_bigints(BigInt::from(c), den.clone()).expect("power of two"))
        .collect()
}

/// Naive spectrum by direct summation; the independent cross-check used by
/// tests against the butterfly.
#[cfg(test)]
pub(crate) fn walsh_spectrum_naive(g: &Security) -> Vec<Rat> {
    let n = g.n_players();
    let size = crate::state::state_count(n);
    let values = g.table_values();
    (0..size as u32)
        .map(|mask| {
            let mut sum = 0i64;
            for (bits, &v) in values.iter().enumerate() {
                let minus = (mask & !(bits as u32)).count_ones();
                let chi = if minus % 2 == 0 { 1 } else { -1 };
                sum += (v * chi) as i64;
            }
            Rat::from_bigints(BigInt::from(sum), BigInt::one() << n).unwrap()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_spectrum_is_a_single_top_coefficient() {
        let g = Security::parity(2, 1, 0b11).unwrap();
        let spec = walsh_spectrum(&g);
        assert_eq!(
            spec,
            vec![Rat::zero(), Rat::zero(), Rat::zero(), Rat::one()]
        );
    }

    #[test]
    fn butterfly_matches_direct_summation() {
        let g = Security::table(3, vec![1, -1, -1, 1, 1, 1, -1, -1]).unwrap();
        assert_eq!(walsh_spectrum(&g), walsh_spectrum_naive(&g));
        let m = Security::threshold(
            3,
            vec![Rat::one(), Rat::one(), Rat::one()],
            Rat::one(),
        )
        .unwrap();
        assert_eq!(walsh_spectrum(&m), walsh_spectrum_naive(&m));
    }

    #[test]
    fn majority_spectrum_concentrates_on_singletons() {
        let m = Security::threshold(
            3,
            vec![Rat::one(), Rat::one(), Rat::one()],
            Rat::one(),
        )
        .unwrap();
        let spec = walsh_spectrum(&m);
        for (mask, coeff) in spec.iter().enumerate() {
            if (mask as u32).count_ones() == 1 {
                assert_eq!(coeff, &Rat::new(1, 2));
            }
        }
    }
}
