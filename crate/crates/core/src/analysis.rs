//! Security and prior classification: structure detection and verdicts on
//! guaranteed round-two convergence.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prior::{Prior, PriorForm};
use crate::rational::Rat;
use crate::security::{Security, SecurityForm};
use crate::simplex::{nonneg_feasible, Feasibility};
use crate::state::{spin_of, state_count};
use crate::wht::raw_correlations;

pub use crate::wht::walsh_spectrum;

/// Largest player count accepted by the threshold recognizer; the
/// feasibility system has `2^N` constraints.
pub const THRESHOLD_RECOGNIZER_CAP: u32 = 12;

/// Level vector of a totally symmetric security: payoff per plus-count, or
/// `None` when two states of equal plus-count disagree.
pub fn is_totally_symmetric(g: &Security) -> Option<Vec<i8>> {
    let n = g.n_players();
    match g.form() {
        SecurityForm::Symmetric { levels } => return Some(levels.clone()),
        SecurityForm::Parity { sign, mask } => {
            // A parity over a proper nonempty subset takes both values on
            // some popcount level; only the constants and the full product
            // survive.
            let full = (state_count(n) - 1) as u32;
            if *mask != 0 && *mask != full {
                return None;
            }
            let levels = (0..=n)
                .map(|k| {
                    if *mask == 0 {
                        *sign
                    } else if (n - k) % 2 == 0 {
                        *sign
                    } else {
                        -sign
                    }
                })
                .collect();
            return Some(levels);
        }
        _ => {}
    }
    // Exhaustive check by popcount level.
    let mut levels: Vec<Option<i8>> = vec![None; n as usize + 1];
    for bits in 0..state_count(n) as u32 {
        let k = bits.count_ones() as usize;
        let v = g.payoff_bits(bits);
        match levels[k] {
            None => levels[k] = Some(v),
            Some(prev) if prev != v => return None,
            Some(_) => {}
        }
    }
    Some(levels.into_iter().map(|l| l.expect("level populated")).collect())
}

/// Recovers `(sign, mask)` when the payoff is exactly `sign·∏_{i∈mask} σ_i`.
///
/// Decided on the Walsh spectrum: a payoff is such a product precisely when
/// a single coefficient is nonzero with magnitude 1. Comparisons are exact
/// integer comparisons against `±2^N`; there is no tolerance.
pub fn parity_decompose(g: &Security) -> Option<(i8, u32)> {
    let n = g.n_players();
    let full = 1i64 << n;
    let mut witness = None;
    for (mask, corr) in raw_correlations(g).into_iter().enumerate() {
        if corr == 0 {
            continue;
        }
        if witness.is_some() || (corr != full && corr != -full) {
            return None;
        }
        witness = Some((if corr == full { 1 } else { -1 }, mask as u32));
    }
    witness
}

/// Searches for rational weights and a threshold realizing the payoff as
/// `+1 ⇔ Σ w_i σ_i ≥ θ`.
///
/// Feasibility of strict separation is decided exactly: the constraint
/// system asks for margin 1 on both sides (`Σ w_i σ_i − θ' ≥ 1` on plus
/// states, `≤ -1` on minus states), which is equivalent to strict
/// separation because the system scales. A returned witness uses
/// `θ = θ' + 1`, so the boundary convention never decides a state.
pub fn recognize_threshold(g: &Security) -> Result<Option<(Vec<Rat>, Rat)>> {
    let n = g.n_players();
    if n > THRESHOLD_RECOGNIZER_CAP {
        return Err(Error::ResourceCap(format!(
            "threshold recognition caps at {THRESHOLD_RECOGNIZER_CAP} players, got {n}"
        )));
    }
    let nu = n as usize;
    let values = g.table_values();

    // Variables: w_i = u_i - v_i and θ' = tp - tn, all nonnegative.
    let cols = 2 * nu + 2;
    let mut rows = Vec::with_capacity(values.len());
    for (bits, &v) in values.iter().enumerate() {
        let mut row = vec![0i64; cols];
        // plus state:  -Σ σ_i w_i + θ' ≤ -1
        // minus state:  Σ σ_i w_i - θ' ≤ -1
        let flip = v as i64;
        for i in 0..nu {
            let sigma = spin_of(bits as u32, i) as i64;
            row[i] = -sigma * flip;
            row[nu + i] = sigma * flip;
        }
        row[2 * nu] = flip;
        row[2 * nu + 1] = -flip;
        rows.push(row);
    }
    let rhs = vec![-1i64; values.len()];

    match nonneg_feasible(&rows, &rhs) {
        Feasibility::Infeasible => Ok(None),
        Feasibility::Feasible(x) => {
            let weights: Vec<Rat> = (0..nu).map(|i| &x[i] - &x[nu + i]).collect();
            let theta = &x[2 * nu] - &x[2 * nu + 1] + Rat::one();
            debug_assert_eq!(
                Security::threshold(n, weights.clone(), theta.clone())?.table_values(),
                values,
                "feasible witness must reproduce the payoff"
            );
            Ok(Some((weights, theta)))
        }
    }
}

/// Level masses of a permutation-invariant prior, or `None`.
pub fn is_symmetric_prior(p: &Prior) -> Option<Vec<Rat>> {
    let n = p.n_players();
    match p.form() {
        PriorForm::SymmetricLevels { levels } => return Some(levels.clone()),
        PriorForm::ProductBiased { p: bias } => {
            let q = Rat::one() - bias;
            return Some(
                (0..=n)
                    .map(|k| bias.pow(k) * q.pow(n - k))
                    .collect(),
            );
        }
        _ => {}
    }
    let mut levels: Vec<Option<Rat>> = vec![None; n as usize + 1];
    for bits in 0..state_count(n) as u32 {
        let k = bits.count_ones() as usize;
        let m = p.mass_bits(bits);
        match &levels[k] {
            None => levels[k] = Some(m),
            Some(prev) if *prev != m => return None,
            Some(_) => {}
        }
    }
    Some(levels.into_iter().map(|l| l.expect("level populated")).collect())
}

/// The payoff–spin covariance data deciding guaranteed round-two
/// convergence for symmetric instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gamma0 {
    /// `E[g·σ_1] − E[g]·E[σ_1]`; nonzero exactly when the first
    /// announcement separates states by their spin sum.
    pub covariance_gap: Rat,
    /// Slope `γ` of the round-one affine bid `β + γ·σ_i`, equal to the gap
    /// over `1 − E[σ_1]²`; shares its sign and zero set with the gap.
    pub slope: Rat,
}

/// Computes the covariance gap and round-one bid slope, validating that
/// neither depends on the player index.
///
/// The defining expectations are per-player quantities; for totally
/// symmetric securities and priors they coincide across players, and this
/// is checked rather than assumed. Errors name the first offending player.
pub fn gamma0(g: &Security, prior: &Prior) -> Result<Gamma0> {
    let n = g.n_players();
    if prior.n_players() != n {
        return Err(Error::InvalidArgument(format!(
            "security has {n} players but prior has {}",
            prior.n_players()
        )));
    }
    let nu = n as usize;
    let values = g.table_values();
    let (mass, den) = prior.mass_numerators();

    let mut sum_gm = BigInt::zero();
    let mut sum_sm = vec![BigInt::zero(); nu];
    let mut sum_gsm = vec![BigInt::zero(); nu];
    for (bits, m) in mass.iter().enumerate() {
        let plus = values[bits] == 1;
        if plus {
            sum_gm += m;
        } else {
            sum_gm -= m;
        }
        for i in 0..nu {
            if bits >> i & 1 == 1 {
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
    for i in 1..nu {
        if sum_gsm[i] != sum_gsm[0] || sum_sm[i] != sum_sm[0] {
            return Err(Error::Classification(format!(
                "covariance data differs between players 1 and {}; \
                 the security/prior pair is not totally symmetric",
                i + 1
            )));
        }
    }

    let e_g = Rat::from_bigints(sum_gm, den.clone())?;
    let e_s = Rat::from_bigints(sum_sm[0].clone(), den.clone())?;
    let e_gs = Rat::from_bigints(sum_gsm[0].clone(), den)?;
    let covariance_gap = &e_gs - &(&e_g * &e_s);
    // Full support keeps E[σ_1] strictly inside (-1, 1).
    let slope = &covariance_gap / &(Rat::one() - &e_s * &e_s);
    Ok(Gamma0 {
        covariance_gap,
        slope,
    })
}

/// Why round-two convergence is guaranteed for an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceRule {
    /// Product-form payoff with a uniformly biased prior away from 1/2.
    BiasedParity,
    /// Totally symmetric payoff and prior with a nonzero covariance gap.
    SymmetricCovariance,
}

/// Predicts guaranteed convergence to the true payoff by round two.
///
/// `None` means no rule applies — it is *not* a claim of non-convergence.
pub fn predict_round_two(g: &Security, prior: &Prior) -> Result<Option<ConvergenceRule>> {
    let n = g.n_players();
    if prior.n_players() != n {
        return Err(Error::InvalidArgument(format!(
            "security has {n} players but prior has {}",
            prior.n_players()
        )));
    }
    if parity_decompose(g).is_some() {
        if let PriorForm::ProductBiased { p } = prior.form() {
            if *p != Rat::new(1, 2) {
                return Ok(Some(ConvergenceRule::BiasedParity));
            }
        }
    }
    if is_totally_symmetric(g).is_some() && is_symmetric_prior(prior).is_some() {
        let signal = gamma0(g, prior)?;
        if !signal.covariance_gap.is_zero() {
            return Ok(Some(ConvergenceRule::SymmetricCovariance));
        }
    }
    Ok(None)
}

/// Parity witness in wire form: 1-based sorted player list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityWitness {
    pub sign: i8,
    pub mask: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdWitness {
    pub w: Vec<Rat>,
    pub theta: Rat,
}

/// Everything the classifier can say about a security (and optionally a
/// prior) before running any dynamics.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub n: u32,
    pub is_parity: Option<ParityWitness>,
    pub is_symmetric: Option<Vec<i8>>,
    /// False when the player count exceeds the recognizer cap.
    pub threshold_checked: bool,
    pub threshold_witness: Option<ThresholdWitness>,
    /// Covariance data; present when the pair is totally symmetric.
    pub covariance_gap: Option<Rat>,
    pub gamma0: Option<Rat>,
    pub predicted_round_two: bool,
    pub prediction_rule: Option<ConvergenceRule>,
}

/// Runs every classifier; prior-dependent fields stay empty without a
/// prior.
pub fn classify(g: &Security, prior: Option<&Prior>) -> Result<ClassificationReport> {
    let n = g.n_players();
    let is_parity = parity_decompose(g).map(|(sign, mask)| ParityWitness {
        sign,
        mask: (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect(),
    });
    let is_symmetric = is_totally_symmetric(g);
    let (threshold_checked, threshold_witness) = if n <= THRESHOLD_RECOGNIZER_CAP {
        (
            true,
            recognize_threshold(g)?.map(|(w, theta)| ThresholdWitness { w, theta }),
        )
    } else {
        (false, None)
    };

    let mut covariance_gap = None;
    let mut slope = None;
    let mut rule = None;
    if let Some(prior) = prior {
        rule = predict_round_two(g, prior)?;
        if is_symmetric.is_some() && is_symmetric_prior(prior).is_some() {
            let signal = gamma0(g, prior)?;
            covariance_gap = Some(signal.covariance_gap);
            slope = Some(signal.slope);
        }
    }
    Ok(ClassificationReport {
        n,
        is_parity,
        is_symmetric,
        threshold_checked,
        threshold_witness,
        covariance_gap,
        gamma0: slope,
        predicted_round_two: rule.is_some(),
        prediction_rule: rule,
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

    #[test]
    fn symmetric_detection() {
        assert_eq!(is_totally_symmetric(&xor2()), Some(vec![1, -1, 1]));
        let dictator = Security::parity(2, 1, 0b01).unwrap();
        assert_eq!(is_totally_symmetric(&dictator), None);
        assert_eq!(
            is_totally_symmetric(&majority3()),
            Some(vec![-1, -1, 1, 1])
        );
        // table form goes through the exhaustive path
        assert_eq!(
            is_totally_symmetric(&xor2().to_table()),
            Some(vec![1, -1, 1])
        );
    }

    #[test]
    fn parity_detection() {
        assert_eq!(parity_decompose(&xor2().to_table()), Some((1, 0b11)));
        let minus = Security::parity(3, -1, 0).unwrap().to_table();
        assert_eq!(parity_decompose(&minus), Some((-1, 0)));
        assert_eq!(parity_decompose(&majority3()), None);
    }

    #[test]
    fn parity_round_trip_small() {
        for n in 1..=5u32 {
            for mask in 0..(1u32 << n) {
                for sign in [1i8, -1] {
                    let g = Security::parity(n, sign, mask).unwrap().to_table();
                    assert_eq!(parity_decompose(&g), Some((sign, mask)));
                }
            }
        }
    }

    #[test]
    fn threshold_recognition() {
        let witness = recognize_threshold(&majority3()).unwrap().unwrap();
        let (w, theta) = witness;
        let rebuilt = Security::threshold(3, w, theta).unwrap();
        assert_eq!(rebuilt.table_values(), majority3().table_values());

        assert_eq!(recognize_threshold(&xor2()).unwrap(), None);

        let dictator = Security::parity(2, 1, 0b01).unwrap();
        let (w, theta) = recognize_threshold(&dictator).unwrap().unwrap();
        let rebuilt = Security::threshold(2, w, theta).unwrap();
        assert_eq!(rebuilt.table_values(), dictator.table_values());

        // constants are realizable thanks to the free threshold
        for sign in [1i8, -1] {
            let c = Security::parity(2, sign, 0).unwrap();
            let (w, theta) = recognize_threshold(&c).unwrap().unwrap();
            let rebuilt = Security::threshold(2, w, theta).unwrap();
            assert_eq!(rebuilt.table_values(), c.table_values());
        }
    }

    #[test]
    fn gamma0_values() {
        let uniform2 = Prior::uniform(2).unwrap();
        let signal = gamma0(&xor2(), &uniform2).unwrap();
        assert!(signal.covariance_gap.is_zero());
        assert!(signal.slope.is_zero());

        let biased = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        let signal = gamma0(&xor2(), &biased).unwrap();
        assert_eq!(signal.covariance_gap, Rat::new(3, 8));
        assert_eq!(signal.slope, Rat::new(1, 2));

        let uniform3 = Prior::uniform(3).unwrap();
        let signal = gamma0(&majority3(), &uniform3).unwrap();
        assert_eq!(signal.covariance_gap, Rat::new(1, 2));
        assert_eq!(signal.slope, Rat::new(1, 2));
    }

    #[test]
    fn gamma0_rejects_player_dependent_data() {
        let dictator = Security::parity(2, 1, 0b01).unwrap();
        let uniform = Prior::uniform(2).unwrap();
        let err = gamma0(&dictator, &uniform).unwrap_err();
        assert!(matches!(err, Error::Classification(_)), "{err}");
    }

    #[test]
    fn prior_symmetry_detection() {
        let biased = Prior::product_biased(2, Rat::new(3, 4)).unwrap();
        assert_eq!(
            is_symmetric_prior(&biased),
            Some(vec![Rat::new(1, 16), Rat::new(3, 16), Rat::new(9, 16)])
        );
        let skew = Prior::product(2, vec![Rat::new(1, 3), Rat::new(1, 2)]).unwrap();
        assert_eq!(is_symmetric_prior(&skew), None);
        let tbl = Prior::table(
            2,
            vec![
                Rat::new(1, 6),
                Rat::new(1, 4),
                Rat::new(1, 4),
                Rat::new(1, 3),
            ],
        )
        .unwrap();
        assert_eq!(
            is_symmetric_prior(&tbl),
            Some(vec![Rat::new(1, 6), Rat::new(1, 4), Rat::new(1, 3)])
        );
    }

    #[test]
    fn round_two_predictions() {
        let parity4 = Security::parity(4, 1, 0b1010).unwrap();
        let biased4 = Prior::product_biased(4, Rat::new(2, 3)).unwrap();
        assert_eq!(
            predict_round_two(&parity4, &biased4).unwrap(),
            Some(ConvergenceRule::BiasedParity)
        );

        let uniform2 = Prior::uniform(2).unwrap();
        assert_eq!(predict_round_two(&xor2(), &uniform2).unwrap(), None);

        let uniform3 = Prior::uniform(3).unwrap();
        assert_eq!(
            predict_round_two(&majority3(), &uniform3).unwrap(),
            Some(ConvergenceRule::SymmetricCovariance)
        );
    }

    #[test]
    fn classify_report_shape() {
        let report = classify(&majority3(), Some(&Prior::uniform(3).unwrap())).unwrap();
        assert!(report.is_parity.is_none());
        assert_eq!(report.is_symmetric, Some(vec![-1, -1, 1, 1]));
        assert!(report.threshold_checked);
        assert!(report.threshold_witness.is_some());
        assert_eq!(report.covariance_gap, Some(Rat::new(1, 2)));
        assert!(report.predicted_round_two);
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["prediction_rule"], "symmetric_covariance");
    }
}
