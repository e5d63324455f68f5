//! Probability estimation from counts, inversion back to the partner's
//! preparation, the count-fluctuation accuracy bound, and digit extraction.

use serde::{Deserialize, Serialize};

use crate::analytic::{ConclusiveQuad, PreparationParams};
use crate::error::{Error, Result};
use crate::sampling::CountTable;

/// Smallest |cos 2θ_own| the inversion will divide by. The preparation
/// ranges keep θ at least [`crate::analytic::THETA_MARGIN`] away from π/4,
/// which bounds the divisor below by sin(2·margin) ≈ 0.1987; a little slack
/// admits parameters sitting exactly on the margin.
pub const RECOVERY_DIVISOR_FLOOR: f64 = 0.198;

/// Guard against the φ inversion dividing by a vanishing
/// cosθ·sinθ product when the recovered θ lands on a pole.
const PHI_DIVISOR_FLOOR: f64 = 1e-9;

/// Which total the estimated probabilities are normalized to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by the number of pairs emitted.
    Sent,
    /// Divide by the number of pairs the receiving party announced
    /// (everything that survived the channel). The default: the receiver
    /// announces every reception, so this is known to both parties and
    /// keeps the estimates unbiased under loss.
    Received,
}

/// Estimate the conclusive quadruple `N_outcome / normalizer` from counts.
pub fn estimate_probabilities(
    counts: &CountTable,
    normalization: Normalization,
) -> Result<ConclusiveQuad> {
    let normalizer = match normalization {
        Normalization::Sent => counts.n_sent,
        Normalization::Received => counts.n_received,
    };
    if normalizer == 0 {
        return Err(Error::ZeroNormalizer);
    }
    let n = normalizer as f64;
    let [pp, pm, mp, mm] = counts.conclusive_counts();
    Ok(ConclusiveQuad {
        plus_plus: pp as f64 / n,
        plus_minus: pm as f64 / n,
        minus_plus: mp as f64 / n,
        minus_minus: mm as f64 / n,
    })
}

/// The partner parameters one party solves for, as cosines in [0, 1].
///
/// `reliable` is cleared whenever an inversion intermediate left its valid
/// domain before clamping (cos²θ outside [0, 1], |cos φ-sum| above 1, an
/// inversion divisor below its floor, or a θ pole that leaves φ undefined).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveredValues {
    pub cos_theta: f64,
    pub cos_phi: f64,
    pub reliable: bool,
    /// |cos 2θ_own| used as the θ-inversion divisor.
    pub divisor_margin: f64,
    /// The estimated cos(φ_own + φ_partner), kept for the degeneracy check.
    pub cos_phi_sum: f64,
}

/// Invert the conclusive quadruple to the partner's (cos θ, cos φ).
///
/// With `S` the symmetrized sum of the two distinct conclusive probabilities
/// and `Δ` their symmetrized difference:
///
/// - `cos²θ_partner = (4S − sin²θ_own) / cos 2θ_own`, clamped to [0, 1];
/// - `cos(φ_own + φ_partner) = 2Δ / (cosθ_own·sinθ_own·cosθ_p·sinθ_p)`,
///   clamped to [−1, 1], then resolved on the unique arccos branch (φ sums
///   lie in (0, π)) and shifted by φ_own.
pub fn recover_partner(own: &PreparationParams, quad: &ConclusiveQuad) -> RecoveredValues {
    let mut reliable = true;

    let divisor = (2.0 * own.theta()).cos();
    let divisor_margin = divisor.abs();
    if divisor_margin < RECOVERY_DIVISOR_FLOOR {
        reliable = false;
    }

    let sin_own_sq = own.theta().sin().powi(2);
    let four_s = 2.0 * quad.total();
    let cos_sq_raw = (four_s - sin_own_sq) / divisor;
    if !(0.0..=1.0).contains(&cos_sq_raw) {
        reliable = false;
    }
    let cos_sq = cos_sq_raw.clamp(0.0, 1.0);
    let cos_theta = cos_sq.sqrt();

    // cosθ_p·sinθ_p = √(c(1−c)) for the recovered c.
    let partner_product = (cos_sq * (1.0 - cos_sq)).max(0.0).sqrt();
    let own_product = own.theta().cos() * own.theta().sin();
    let phi_divisor = own_product * partner_product;

    let delta = quad.separation();
    let (cos_phi, cos_phi_sum) = if phi_divisor < PHI_DIVISOR_FLOOR {
        // Partner at a pole: φ is undefined.
        reliable = false;
        (0.0, 0.0)
    } else {
        let cos_phi_sum_raw = 2.0 * delta / phi_divisor;
        if cos_phi_sum_raw.abs() > 1.0 {
            reliable = false;
        }
        let cos_phi_sum = cos_phi_sum_raw.clamp(-1.0, 1.0);
        let phi_partner = cos_phi_sum.acos() - own.phi();
        let cos_phi_raw = phi_partner.cos();
        if !(0.0..=1.0).contains(&cos_phi_raw) {
            reliable = false;
        }
        (cos_phi_raw.clamp(0.0, 1.0), cos_phi_sum)
    };

    RecoveredValues {
        cos_theta,
        cos_phi,
        reliable,
        divisor_margin,
        cos_phi_sum,
    }
}

/// Half-width `√(2np(1−p))/n` of the count-fluctuation band, on the
/// probability scale. A count out of `n` trials at success probability `p`
/// concentrates within `np ± √(2np(1−p))`; dividing by `n` gives the
/// accuracy of the estimated probability, which scales as `1/√n`.
pub fn accuracy_halfwidth(n: u64, p: f64) -> f64 {
    debug_assert!(n >= 1);
    debug_assert!((0.0..=1.0).contains(&p));
    let n = n as f64;
    (2.0 * n * p * (1.0 - p)).sqrt() / n
}

/// First `num_digits` decimal digits of a value in [0, 1), by truncation
/// (never rounding, so no carry effects at cell boundaries).
pub fn extract_digits(value: f64, num_digits: usize) -> Result<String> {
    if !(0.0..1.0).contains(&value) {
        return Err(Error::ParameterRange {
            name: "value",
            value,
            range: "[0, 1)",
        });
    }
    Ok((1..=num_digits as i32).map(|k| digit_char(value, k)).collect())
}

/// The k-th decimal digit (1-based) of a value in [0, 1), by truncation.
pub fn digit_at(value: f64, k: usize) -> u8 {
    ((value * 10f64.powi(k as i32)).floor() as u64 % 10) as u8
}

fn digit_char(value: f64, k: i32) -> char {
    char::from_digit((value * 10f64.powi(k)).floor() as u32 % 10, 10).unwrap()
}

/// Whether the k-th truncation digit of `value` is stable across the whole
/// uncertainty interval `value ± halfwidth`: truncation guarantees a digit
/// only when the value sits at least `halfwidth` away from every digit
/// boundary at that level.
pub fn digit_reliable(value: f64, k: usize, halfwidth: f64) -> bool {
    let lo = (value - halfwidth).max(0.0);
    let hi = (value + halfwidth).min(1.0 - f64::EPSILON);
    let scale = 10f64.powi(k as i32);
    (lo * scale).floor() == (hi * scale).floor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::conclusive_probabilities;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

    fn counts_with(conclusive: [u64; 4], n_sent: u64, n_received: u64) -> CountTable {
        let mut counts = [[0u64; 4]; 4];
        counts[2][2] = conclusive[0];
        counts[2][3] = conclusive[1];
        counts[3][2] = conclusive[2];
        counts[3][3] = conclusive[3];
        CountTable {
            counts,
            n_sent,
            n_received,
            sender_conclusive: conclusive.iter().sum(),
            receiver_conclusive: conclusive.iter().sum(),
        }
    }

    #[test]
    fn estimate_is_plain_division() {
        let counts = counts_with([13, 0, 0, 0], 100, 100);
        let quad = estimate_probabilities(&counts, Normalization::Received).unwrap();
        assert_abs_diff_eq!(quad.plus_plus, 0.13, epsilon = 1e-15);
        assert_abs_diff_eq!(quad.plus_minus, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn estimate_zero_counts_and_zero_normalizer() {
        let counts = counts_with([0, 0, 0, 0], 50, 40);
        let quad = estimate_probabilities(&counts, Normalization::Received).unwrap();
        assert_eq!(quad.total(), 0.0);

        let empty = counts_with([0, 0, 0, 0], 50, 0);
        assert!(matches!(
            estimate_probabilities(&empty, Normalization::Received),
            Err(Error::ZeroNormalizer)
        ));
        assert!(estimate_probabilities(&empty, Normalization::Sent).is_ok());
    }

    #[test]
    fn recover_fixture_round_trip() {
        let own = PreparationParams::new(FRAC_PI_6, FRAC_PI_6).unwrap();
        let quad = ConclusiveQuad {
            plus_plus: 9.0 / 128.0,
            plus_minus: 3.0 / 128.0,
            minus_plus: 3.0 / 128.0,
            minus_minus: 9.0 / 128.0,
        };
        let rec = recover_partner(&own, &quad);
        assert!(rec.reliable);
        assert_abs_diff_eq!(rec.cos_theta, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(rec.cos_phi, FRAC_PI_6.cos(), epsilon = 1e-9);
        assert_abs_diff_eq!(rec.cos_phi_sum, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(rec.divisor_margin, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn recover_from_uniform_attack_quadruple() {
        // Uniform 1/16 entries: cos²θ = (0.5 − 0.25)/0.5 = 0.5 and the
        // φ-sum collapses to π/2, so the recovered φ is π/2 − φ_own.
        let own = PreparationParams::new(FRAC_PI_6, FRAC_PI_6).unwrap();
        let quad = ConclusiveQuad {
            plus_plus: 1.0 / 16.0,
            plus_minus: 1.0 / 16.0,
            minus_plus: 1.0 / 16.0,
            minus_minus: 1.0 / 16.0,
        };
        let rec = recover_partner(&own, &quad);
        assert_abs_diff_eq!(rec.cos_theta, 0.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(rec.cos_phi_sum, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.cos_phi, FRAC_PI_3.cos(), epsilon = 1e-12);
    }

    #[test]
    fn recover_flags_out_of_domain_intermediates() {
        let own = PreparationParams::new(FRAC_PI_6, FRAC_PI_6).unwrap();
        // Oversized probabilities push cos²θ above 1.
        let quad = ConclusiveQuad {
            plus_plus: 0.2,
            plus_minus: 0.2,
            minus_plus: 0.2,
            minus_minus: 0.2,
        };
        let rec = recover_partner(&own, &quad);
        assert!(!rec.reliable);
        assert!(rec.cos_theta <= 1.0);

        // All-zero quad: cos²θ = (0 − 0.25)/0.5 < 0.
        let zero = ConclusiveQuad {
            plus_plus: 0.0,
            plus_minus: 0.0,
            minus_plus: 0.0,
            minus_minus: 0.0,
        };
        let rec = recover_partner(&own, &zero);
        assert!(!rec.reliable);
        assert_eq!(rec.cos_theta, 0.0);
    }

    #[test]
    fn recover_flags_divisor_below_floor() {
        let own = PreparationParams::new(std::f64::consts::FRAC_PI_4 + 0.01, 0.4).unwrap();
        let quad = ConclusiveQuad {
            plus_plus: 0.07,
            plus_minus: 0.03,
            minus_plus: 0.03,
            minus_minus: 0.07,
        };
        let rec = recover_partner(&own, &quad);
        assert!(!rec.reliable);
        assert!(rec.divisor_margin < RECOVERY_DIVISOR_FLOOR);
    }

    #[test]
    fn recover_round_trip_on_random_admissible_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..500 {
            let alice = PreparationParams::sample_recovery_admissible(&mut rng);
            let bob = PreparationParams::sample_recovery_admissible(&mut rng);
            let quad = conclusive_probabilities(&alice, &bob);

            let by_alice = recover_partner(&alice, &quad);
            assert!(by_alice.reliable);
            assert_abs_diff_eq!(by_alice.cos_theta, bob.cos_theta(), epsilon = 1e-9);
            assert_abs_diff_eq!(by_alice.cos_phi, bob.cos_phi(), epsilon = 1e-9);

            let by_bob = recover_partner(&bob, &quad);
            assert!(by_bob.reliable);
            assert_abs_diff_eq!(by_bob.cos_theta, alice.cos_theta(), epsilon = 1e-9);
            assert_abs_diff_eq!(by_bob.cos_phi, alice.cos_phi(), epsilon = 1e-9);
        }
    }

    #[test]
    fn halfwidth_examples() {
        assert_eq!(accuracy_halfwidth(100, 0.0), 0.0);
        assert_abs_diff_eq!(accuracy_halfwidth(100, 0.125), 21.875f64.sqrt() / 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(accuracy_halfwidth(10_000, 0.125), 0.0046770717, epsilon = 1e-9);
        // 1/√n scaling.
        assert_abs_diff_eq!(
            accuracy_halfwidth(100, 0.125) / accuracy_halfwidth(10_000, 0.125),
            10.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn digit_extraction_examples() {
        assert_eq!(extract_digits(0.7342, 1).unwrap(), "7");
        assert_eq!(extract_digits(0.5, 2).unwrap(), "50");
        assert_eq!(extract_digits(0.8660, 1).unwrap(), "8");
        assert_eq!(extract_digits(0.0, 3).unwrap(), "000");
        assert!(extract_digits(1.0, 1).is_err());
        assert!(extract_digits(-0.2, 1).is_err());
    }

    #[test]
    fn digit_extraction_truncates_instead_of_rounding() {
        assert_eq!(extract_digits(0.199, 1).unwrap(), "1");
        assert_eq!(extract_digits(0.999, 2).unwrap(), "99");
        assert_eq!(digit_at(0.8660254, 2), 6);
    }

    #[test]
    fn digit_reliability_tracks_boundary_distance() {
        // 0.55 is 0.05 from both first-digit boundaries.
        assert!(digit_reliable(0.55, 1, 0.04));
        assert!(!digit_reliable(0.55, 1, 0.06));
        // Right at a boundary: never reliable.
        assert!(!digit_reliable(0.5, 1, 0.001));
        // Second digit is much more fragile at the same halfwidth.
        assert!(digit_reliable(0.555, 2, 0.004));
        assert!(!digit_reliable(0.555, 2, 0.04));
    }
}
