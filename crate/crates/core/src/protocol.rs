//! The five-step key-distribution session as a deterministic two-party state
//! machine over an announcement transcript.
//!
//! Per group: both parties pick fresh secret preparations, measure a group
//! of pairs, exchange announcements, estimate the conclusive quadruple, run
//! the accuracy / eavesdropping / φ-degeneracy checks, recover each other's
//! parameters, publicly compare a subset of the shared digits, and keep the
//! rest as key material. Each party's computation uses only its own secret
//! parameters plus the public transcript (counts, announcements, verdicts);
//! [`recover_partner`] takes exactly that.
//!
//! Randomness is split off the master seed by fixed stream numbers, so a
//! config reproduces its session byte for byte.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{attacked_probabilities, AttackConfig};
use crate::analytic::{honest_probability_table, ConclusiveQuad, PreparationParams};
use crate::channel::{apply_error_mixture, ChannelConfig};
use crate::error::Result;
use crate::estimator::{
    accuracy_halfwidth, estimate_probabilities, extract_digits, recover_partner, Normalization,
    RecoveredValues,
};
use crate::sampling::{sample_counts, stream_rng};

pub mod studies;

/// Master-seed stream numbers (see [`stream_rng`]).
const STREAM_GROUP_SEEDS: u64 = 1;
const STREAM_PARAMS: u64 = 2;
/// Per-group seed streams.
const STREAM_SAMPLING: u64 = 0;
const STREAM_POSITIONS: u64 = 1;

/// Thresholds for the per-group checks.
///
/// The two probability-scale checks compare against multiples of the
/// count-fluctuation half-width at the group's effective sample size, so one
/// knob family covers all group sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckTolerances {
    /// Agreement threshold for the theory-equal probability pairs, as a
    /// half-width multiple.
    pub accuracy_halfwidth_multiplier: f64,
    /// Minimum separation between the two distinct probabilities, as a
    /// half-width multiple; anything closer is treated as eavesdropping.
    pub eavesdrop_halfwidth_multiplier: f64,
    /// Minimum |cos(φ_a + φ_b)|; below this the φ inversion is degenerate
    /// and indistinguishable from a flattened-statistics attack.
    pub cos_phi_sum_floor: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            accuracy_halfwidth_multiplier: 2.0,
            eavesdrop_halfwidth_multiplier: 2.0,
            cos_phi_sum_floor: 0.5,
        }
    }
}

/// Session settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    /// Pairs emitted per experiment group.
    pub group_size: u64,
    pub num_groups: u32,
    /// Decimal digits taken from each of the four shared reals.
    pub digits_per_value: usize,
    /// Digits publicly compared (and consumed) per group.
    pub digits_sacrificed_per_group: usize,
    pub tolerances: CheckTolerances,
    pub channel: ChannelConfig,
    pub attack: AttackConfig,
    pub master_seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            group_size: 100,
            num_groups: 100,
            digits_per_value: 1,
            digits_sacrificed_per_group: 2,
            tolerances: CheckTolerances::default(),
            channel: ChannelConfig::default(),
            attack: AttackConfig::none(),
            master_seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.group_size == 0 {
            return Err(crate::Error::ParameterRange {
                name: "group_size",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if self.digits_per_value == 0 {
            return Err(crate::Error::ParameterRange {
                name: "digits_per_value",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if self.digits_sacrificed_per_group > 4 * self.digits_per_value {
            return Err(crate::Error::ParameterRange {
                name: "digits_sacrificed_per_group",
                value: self.digits_sacrificed_per_group as f64,
                range: "[0, 4*digits_per_value]",
            });
        }
        self.channel.validate()?;
        self.attack.validate()?;
        Ok(())
    }

    fn digits_total(&self) -> usize {
        4 * self.digits_per_value
    }
}

/// Outcome of the four per-group checks. A group's digits enter the key only
/// when all four pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    /// Theory-equal probability pairs agree, and both recoveries stayed in
    /// domain.
    pub accuracy: bool,
    /// The two distinct probabilities are far enough apart to rule out
    /// flattened statistics.
    pub eavesdrop: bool,
    /// The estimated |cos(φ_a + φ_b)| clears the degeneracy floor.
    pub phi_degeneracy: bool,
    /// Publicly compared digits agree.
    pub digit_comparison: bool,
}

impl Verdicts {
    pub fn all_pass(&self) -> bool {
        self.accuracy && self.eavesdrop && self.phi_degeneracy && self.digit_comparison
    }
}

/// Everything one experiment group produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupResult {
    pub index: u32,
    pub alice: PreparationParams,
    pub bob: PreparationParams,
    pub n_received: u64,
    /// Estimated conclusive quadruple (zeros when nothing arrived).
    pub quad: ConclusiveQuad,
    /// Bob's estimate of Alice's values and vice versa.
    pub alice_seen_by_bob: RecoveredValues,
    pub bob_seen_by_alice: RecoveredValues,
    /// Digit slots in value order (cos θ_a, cos φ_a, cos θ_b, cos φ_b), the
    /// owner's exact digits.
    pub source_digits: String,
    /// The counterpart's recovered version of each slot.
    pub recovered_digits: String,
    /// Slots publicly compared; consumed whatever the verdict.
    pub compared_positions: Vec<usize>,
    pub verdicts: Verdicts,
    /// Owner-exact digits at the uncompared slots; empty unless every
    /// verdict passed.
    pub kept_digits: String,
}

/// Per-check discard tallies across a session. A group increments every
/// check it failed, so the columns can exceed the number of discarded
/// groups; `passed` counts groups that cleared everything.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardTally {
    pub accuracy: u32,
    pub eavesdrop: u32,
    pub phi_degeneracy: u32,
    pub digit_comparison: u32,
    pub passed: u32,
}

/// Full session output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub master_seed: u64,
    pub groups: Vec<GroupResult>,
    /// Concatenated kept digits of every passing group, in group order.
    pub final_key: String,
    pub discards: DiscardTally,
    pub total_pairs_sent: u64,
    /// Key digits per pair sent.
    pub efficiency: f64,
}

/// Accuracy check: both theory-equal pairs agree within
/// `multiplier × halfwidth(n, pair mean)`.
pub fn accuracy_check(quad: &ConclusiveQuad, n: u64, multiplier: f64) -> bool {
    if n == 0 {
        return false;
    }
    let pair = |a: f64, b: f64| {
        let mean = 0.5 * (a + b);
        (a - b).abs() <= multiplier * accuracy_halfwidth(n, mean.clamp(0.0, 1.0))
    };
    pair(quad.plus_plus, quad.minus_minus) && pair(quad.plus_minus, quad.minus_plus)
}

/// Eavesdropping check: the separation between the two distinct
/// probabilities must reach `multiplier × halfwidth(n, overall mean)`;
/// statistics consistent with a flat table are discarded.
pub fn eavesdrop_check(quad: &ConclusiveQuad, n: u64, multiplier: f64) -> bool {
    if n == 0 || quad.total() <= 0.0 {
        return false;
    }
    let mean = 0.5 * quad.sum_mean();
    quad.separation().abs() >= multiplier * accuracy_halfwidth(n, mean.clamp(0.0, 1.0))
}

/// φ-degeneracy check: both parties' estimated |cos(φ_a + φ_b)| must clear
/// the floor; either party announcing a violation discards the group.
pub fn phi_degeneracy_check(
    alice_view: &RecoveredValues,
    bob_view: &RecoveredValues,
    floor: f64,
) -> bool {
    alice_view.cos_phi_sum.abs() >= floor && bob_view.cos_phi_sum.abs() >= floor
}

/// Compare the chosen digit slots; `true` when every compared pair agrees.
pub fn digit_comparison(source: &str, recovered: &str, positions: &[usize]) -> bool {
    let src = source.as_bytes();
    let rec = recovered.as_bytes();
    positions.iter().all(|&p| src[p] == rec[p])
}

/// Choose `count` distinct digit slots from `total` using the group's
/// position stream (a partial Fisher-Yates over the slot indices).
fn choose_positions(total: usize, count: usize, group_seed: u64) -> Vec<usize> {
    let mut rng = stream_rng(group_seed, STREAM_POSITIONS);
    let mut slots: Vec<usize> = (0..total).collect();
    for i in 0..count.min(total) {
        let j = rng.random_range(i..total);
        slots.swap(i, j);
    }
    let mut chosen: Vec<usize> = slots[..count.min(total)].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Digits of a recovered cosine, which clamping may have pushed to exactly
/// 1; fold that endpoint back into [0, 1) so truncation stays defined.
fn digits_of_estimate(value: f64, count: usize) -> String {
    let v = value.clamp(0.0, 1.0).min(1.0 - 1e-12);
    extract_digits(v, count).expect("clamped into [0, 1)")
}

fn run_group_from_quad(
    index: u32,
    alice: &PreparationParams,
    bob: &PreparationParams,
    quad: ConclusiveQuad,
    n_received: u64,
    n_effective: u64,
    cfg: &ProtocolConfig,
    group_seed: u64,
) -> GroupResult {
    let d = cfg.digits_per_value;
    let tol = &cfg.tolerances;

    let bob_seen_by_alice = recover_partner(alice, &quad);
    let alice_seen_by_bob = recover_partner(bob, &quad);

    let accuracy = accuracy_check(&quad, n_effective, tol.accuracy_halfwidth_multiplier)
        && bob_seen_by_alice.reliable
        && alice_seen_by_bob.reliable;
    let eavesdrop = eavesdrop_check(&quad, n_effective, tol.eavesdrop_halfwidth_multiplier);
    let phi = phi_degeneracy_check(&bob_seen_by_alice, &alice_seen_by_bob, tol.cos_phi_sum_floor);

    let source_digits = [
        extract_digits(alice.cos_theta(), d).expect("cosine in (0,1)"),
        extract_digits(alice.cos_phi(), d).expect("cosine in (0,1)"),
        extract_digits(bob.cos_theta(), d).expect("cosine in (0,1)"),
        extract_digits(bob.cos_phi(), d).expect("cosine in (0,1)"),
    ]
    .concat();
    let recovered_digits = [
        digits_of_estimate(alice_seen_by_bob.cos_theta, d),
        digits_of_estimate(alice_seen_by_bob.cos_phi, d),
        digits_of_estimate(bob_seen_by_alice.cos_theta, d),
        digits_of_estimate(bob_seen_by_alice.cos_phi, d),
    ]
    .concat();

    let compared_positions = choose_positions(
        cfg.digits_total(),
        cfg.digits_sacrificed_per_group,
        group_seed,
    );
    let digits_ok = digit_comparison(&source_digits, &recovered_digits, &compared_positions);

    let verdicts = Verdicts {
        accuracy,
        eavesdrop,
        phi_degeneracy: phi,
        digit_comparison: digits_ok,
    };
    let kept_digits = if verdicts.all_pass() {
        source_digits
            .bytes()
            .enumerate()
            .filter(|(i, _)| !compared_positions.contains(i))
            .map(|(_, b)| b as char)
            .collect()
    } else {
        String::new()
    };

    GroupResult {
        index,
        alice: *alice,
        bob: *bob,
        n_received,
        quad,
        alice_seen_by_bob,
        bob_seen_by_alice,
        source_digits,
        recovered_digits,
        compared_positions,
        verdicts,
        kept_digits,
    }
}

/// The joint outcome table a group actually samples from: honest statistics,
/// then the attack transform, then the error mixture.
pub fn group_outcome_table(
    alice: &PreparationParams,
    bob: &PreparationParams,
    cfg: &ProtocolConfig,
) -> Result<crate::tables::ProbabilityTable> {
    let honest = honest_probability_table(alice, bob);
    let attacked = attacked_probabilities(&honest, &cfg.attack, alice, bob)?;
    apply_error_mixture(&attacked, cfg.channel.error_rate)
}

/// Run one experiment group: sample, announce, estimate, check, recover,
/// compare digits. Failed checks produce discard verdicts, not errors.
pub fn run_group(
    index: u32,
    alice: &PreparationParams,
    bob: &PreparationParams,
    cfg: &ProtocolConfig,
    group_seed: u64,
) -> Result<GroupResult> {
    let table = group_outcome_table(alice, bob, cfg)?;
    let eta = cfg.channel.transmittance();
    let counts = sample_counts(&table, cfg.group_size, eta, sampling_seed(group_seed))?;

    let (quad, n_effective) = match estimate_probabilities(&counts, Normalization::Received) {
        Ok(quad) => (quad, counts.n_received),
        // Nothing arrived; all checks fail downstream on the zero quad.
        Err(_) => (
            ConclusiveQuad {
                plus_plus: 0.0,
                plus_minus: 0.0,
                minus_plus: 0.0,
                minus_minus: 0.0,
            },
            0,
        ),
    };
    Ok(run_group_from_quad(
        index,
        alice,
        bob,
        quad,
        counts.n_received,
        n_effective,
        cfg,
        group_seed,
    ))
}

/// Test hook: run a group on exact (infinite-sample) probabilities instead
/// of sampled counts. The attack transform and error mixture still apply;
/// check thresholds use the configured group size as the nominal sample
/// size.
pub fn run_group_exact(
    index: u32,
    alice: &PreparationParams,
    bob: &PreparationParams,
    cfg: &ProtocolConfig,
    group_seed: u64,
) -> Result<GroupResult> {
    let table = group_outcome_table(alice, bob, cfg)?;
    let quad = ConclusiveQuad::from_table16(&table);
    Ok(run_group_from_quad(
        index,
        alice,
        bob,
        quad,
        cfg.group_size,
        cfg.group_size,
        cfg,
        group_seed,
    ))
}

fn sampling_seed(group_seed: u64) -> u64 {
    // sample_counts seeds its own generator; keep the sampling stream
    // distinct from the position stream by construction.
    let mut rng = stream_rng(group_seed, STREAM_SAMPLING);
    rng.random()
}

/// Draw one group's secret preparations for both parties.
///
/// θ is uniform over the admissible band and re-drawn while inside the
/// recovery margin around π/4; the φ pair is re-drawn until
/// |cos(φ_a + φ_b)| clears the configured degeneracy floor plus a safety
/// step, so honest groups are not born degenerate.
pub fn draw_group_params<R: Rng + ?Sized>(
    rng: &mut R,
    tolerances: &CheckTolerances,
) -> (PreparationParams, PreparationParams) {
    let draw_floor = (tolerances.cos_phi_sum_floor + 0.2).min(0.95);
    loop {
        let alice = PreparationParams::sample_recovery_admissible(rng);
        let bob = PreparationParams::sample_recovery_admissible(rng);
        if (alice.phi() + bob.phi()).cos().abs() >= draw_floor {
            return (alice, bob);
        }
    }
}

/// Run a full session: fresh parameters per group, every group's checks,
/// key assembly, and efficiency accounting.
pub fn run_session(cfg: &ProtocolConfig) -> Result<SessionReport> {
    cfg.validate()?;
    let mut param_rng = stream_rng(cfg.master_seed, STREAM_PARAMS);
    let mut seed_rng = stream_rng(cfg.master_seed, STREAM_GROUP_SEEDS);

    let mut groups = Vec::with_capacity(cfg.num_groups as usize);
    let mut final_key = String::new();
    let mut discards = DiscardTally::default();
    for index in 0..cfg.num_groups {
        let (alice, bob) = draw_group_params(&mut param_rng, &cfg.tolerances);
        let group_seed: u64 = seed_rng.random();
        let group = run_group(index, &alice, &bob, cfg, group_seed)?;
        if group.verdicts.all_pass() {
            discards.passed += 1;
            final_key.push_str(&group.kept_digits);
        } else {
            discards.accuracy += u32::from(!group.verdicts.accuracy);
            discards.eavesdrop += u32::from(!group.verdicts.eavesdrop);
            discards.phi_degeneracy += u32::from(!group.verdicts.phi_degeneracy);
            discards.digit_comparison += u32::from(!group.verdicts.digit_comparison);
        }
        groups.push(group);
    }

    let total_pairs_sent = cfg.group_size * cfg.num_groups as u64;
    let efficiency = if total_pairs_sent == 0 {
        0.0
    } else {
        final_key.len() as f64 / total_pairs_sent as f64
    };
    Ok(SessionReport {
        master_seed: cfg.master_seed,
        groups,
        final_key,
        discards,
        total_pairs_sent,
        efficiency,
    })
}
