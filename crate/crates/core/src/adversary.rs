//! Eavesdropper models and their analytic signatures.
//!
//! Two individual attacks are modeled. Intercept-resend: the attacker
//! measures every transiting qubit against her own probe and forwards half
//! of a fresh entangled pair, which decouples the parties completely and
//! flattens their joint statistics to uniform. Entangle-measure: the
//! attacker copies the transiting qubit onto an ancilla before it reaches
//! the receiver, which erases the interference term and equalizes the four
//! conclusive probabilities.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    closed_form_v_qubit, conclusive_probabilities, entangle_measure_probabilities,
    ConclusiveQuad, PreparationParams,
};
use crate::error::{Error, Result};
use crate::estimator::{recover_partner, RecoveredValues};
use crate::qmath::{self, PureState};
use crate::sampling::{stream_rng, BellOutcome};
use crate::tables::ProbabilityTable;

/// Which attack the adversary runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    None,
    InterceptResend,
    EntangleMeasure,
}

/// Attack settings for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub kind: AttackKind,
    /// Fraction of pairs attacked, each pair independently.
    #[serde(default)]
    pub fraction: f64,
    /// Probe measured against the intercepted line qubit (intercept-resend).
    #[serde(default)]
    pub line_probe: Option<PreparationParams>,
    /// Probe measured against the attacker's own kept qubit
    /// (intercept-resend).
    #[serde(default)]
    pub source_probe: Option<PreparationParams>,
    /// Probe measured against the CNOT ancilla (entangle-measure).
    #[serde(default)]
    pub ancilla_probe: Option<PreparationParams>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig::none()
    }
}

impl AttackConfig {
    pub fn none() -> Self {
        AttackConfig {
            kind: AttackKind::None,
            fraction: 0.0,
            line_probe: None,
            source_probe: None,
            ancilla_probe: None,
        }
    }

    pub fn intercept_resend(
        fraction: f64,
        line_probe: PreparationParams,
        source_probe: PreparationParams,
    ) -> Self {
        AttackConfig {
            kind: AttackKind::InterceptResend,
            fraction,
            line_probe: Some(line_probe),
            source_probe: Some(source_probe),
            ancilla_probe: None,
        }
    }

    pub fn entangle_measure(fraction: f64, ancilla_probe: PreparationParams) -> Self {
        AttackConfig {
            kind: AttackKind::EntangleMeasure,
            fraction,
            line_probe: None,
            source_probe: None,
            ancilla_probe: Some(ancilla_probe),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::ParameterRange {
                name: "fraction",
                value: self.fraction,
                range: "[0, 1]",
            });
        }
        match self.kind {
            AttackKind::None => {}
            AttackKind::InterceptResend => {
                if self.line_probe.is_none() {
                    return Err(Error::MissingProbe("line_probe"));
                }
                if self.source_probe.is_none() {
                    return Err(Error::MissingProbe("source_probe"));
                }
            }
            AttackKind::EntangleMeasure => {
                if self.ancilla_probe.is_none() {
                    return Err(Error::MissingProbe("ancilla_probe"));
                }
            }
        }
        Ok(())
    }
}

/// The joint outcome table the parties actually sample under an attack on a
/// fraction `f` of the pairs: the convex combination
/// `(1 − f)·honest + f·attacked`, with the fully-attacked table being
/// uniform 1/16 for intercept-resend and the interference-free closed form
/// for entangle-measure.
pub fn attacked_probabilities(
    honest: &ProbabilityTable,
    attack: &AttackConfig,
    alice: &PreparationParams,
    bob: &PreparationParams,
) -> Result<ProbabilityTable> {
    attack.validate()?;
    if !honest.is_complete() {
        return Err(Error::InvalidTable(
            "attack transform needs a complete honest table".into(),
        ));
    }
    match attack.kind {
        AttackKind::None => Ok(honest.clone()),
        AttackKind::InterceptResend => honest.mix(
            &ProbabilityTable::uniform(honest.dim(), honest.arity()),
            attack.fraction,
        ),
        AttackKind::EntangleMeasure => {
            let probe = attack.ancilla_probe.as_ref().expect("validated");
            honest.mix(
                &entangle_measure_probabilities(alice, bob, probe),
                attack.fraction,
            )
        }
    }
}

/// The six-qubit state of a full entangle-measure attack: both parties'
/// probes, the ancilla probe, and the GHZ triple produced by copying the
/// transmitted qubit onto the ancilla. Site order is
/// (alice probe, bob probe, ancilla probe, kept qubit, line qubit, ancilla);
/// the matching Bell pairings are (0,3), (1,4), (2,5).
pub fn entangle_measure_state(
    alice: &PreparationParams,
    bob: &PreparationParams,
    eve: &PreparationParams,
) -> PureState {
    let mut ghz = vec![num_complex::Complex64::ZERO; 8];
    ghz[0] = num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ghz[7] = ghz[0];
    let ghz = PureState::new(2, 3, ghz).expect("unit norm");
    qmath::tensor(&[alice.state(), bob.state(), eve.state(), ghz]).expect("six qubit sites")
}

/// Site pairings for expanding [`entangle_measure_state`] in Bell products.
pub const ENTANGLE_MEASURE_PAIRING: [(usize, usize); 3] = [(0, 3), (1, 4), (2, 5)];

/// One simulated pair under an intercept-resend run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterceptPair {
    pub attacked: bool,
    /// Sender-side outcome; the sending party measures every pair.
    pub alice: BellOutcome,
    /// Receiver-side outcome; absent when the pair was lost.
    pub bob: Option<BellOutcome>,
    /// Attacker's probe-vs-intercepted-qubit outcome (attacked pairs only).
    pub eve_line: Option<BellOutcome>,
    /// Attacker's probe-vs-own-pair outcome (attacked pairs only).
    pub eve_source: Option<BellOutcome>,
}

/// Full per-pair transcript of an intercept-resend simulation, including the
/// attacker's private outcomes.
#[derive(Debug, Clone)]
pub struct InterceptTranscript {
    pub pairs: Vec<InterceptPair>,
}

fn cdf16(table: &ProbabilityTable) -> [f64; 16] {
    let mut cdf = [0.0f64; 16];
    let mut acc = 0.0;
    for (i, p) in table.entries().iter().enumerate() {
        acc += p;
        cdf[i] = acc;
    }
    cdf
}

fn draw16(cdf: &[f64; 16], rng: &mut ChaCha8Rng) -> (BellOutcome, BellOutcome) {
    let u = rng.random::<f64>();
    let mut flat = 15;
    for (i, edge) in cdf.iter().enumerate() {
        if u < *edge {
            flat = i;
            break;
        }
    }
    (
        BellOutcome::from_index(flat / 4),
        BellOutcome::from_index(flat % 4),
    )
}

/// Simulate `n` pairs under an intercept-resend attack on a fraction of
/// them, keeping the attacker's outcomes.
///
/// For an attacked pair the sender's outcome correlates with the attacker's
/// line probe (they share the original pair), and the receiver's outcome
/// correlates with the attacker's source probe (they share the substituted
/// pair); the two sides are independent of each other. Unattacked pairs
/// follow the honest table. Per pair the draw order is: survival (skipped
/// when `eta == 1`), attack flag, then the outcome draws.
pub fn simulate_intercept(
    alice: &PreparationParams,
    bob: &PreparationParams,
    attack: &AttackConfig,
    n: u64,
    eta: f64,
    seed: u64,
) -> Result<InterceptTranscript> {
    if attack.kind != AttackKind::InterceptResend {
        return Err(Error::MissingProbe("intercept-resend attack config"));
    }
    attack.validate()?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::ParameterRange {
            name: "eta",
            value: eta,
            range: "[0, 1]",
        });
    }
    let line_probe = attack.line_probe.expect("validated");
    let source_probe = attack.source_probe.expect("validated");

    let honest = closed_form_v_qubit(alice, bob).probabilities();
    // Sender vs line probe on the original pair; source probe vs receiver on
    // the substituted pair.
    let line_side = closed_form_v_qubit(alice, &line_probe).probabilities();
    let source_side = closed_form_v_qubit(&source_probe, bob).probabilities();

    let honest_cdf = cdf16(&honest);
    let line_cdf = cdf16(&line_side);
    let source_cdf = cdf16(&source_side);

    // Sender marginal is uniform over the four outcomes for every one of
    // these tables (the kept qubit is maximally mixed on its own).
    let mut rng = stream_rng(seed, 0);
    let mut pairs = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let survived = eta >= 1.0 || rng.random::<f64>() < eta;
        let attacked = rng.random::<f64>() < attack.fraction;
        if !survived {
            let alice_outcome = BellOutcome::from_index(rng.random_range(0..4usize));
            pairs.push(InterceptPair {
                attacked,
                alice: alice_outcome,
                bob: None,
                eve_line: None,
                eve_source: None,
            });
            continue;
        }
        if attacked {
            let (alice_outcome, eve_line) = draw16(&line_cdf, &mut rng);
            let (eve_source, bob_outcome) = draw16(&source_cdf, &mut rng);
            pairs.push(InterceptPair {
                attacked,
                alice: alice_outcome,
                bob: Some(bob_outcome),
                eve_line: Some(eve_line),
                eve_source: Some(eve_source),
            });
        } else {
            let (alice_outcome, bob_outcome) = draw16(&honest_cdf, &mut rng);
            pairs.push(InterceptPair {
                attacked,
                alice: alice_outcome,
                bob: Some(bob_outcome),
                eve_line: None,
                eve_source: None,
            });
        }
    }
    Ok(InterceptTranscript { pairs })
}

/// The attacker's estimates of all four shared reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveEstimates {
    /// (cos θ, cos φ) of the sending party, from line-side correlations.
    pub alice_values: RecoveredValues,
    /// (cos θ, cos φ) of the receiving party, from source-side correlations.
    pub bob_values: RecoveredValues,
    /// Jointly-conclusive sample sizes behind the two estimates.
    pub line_conclusive: u64,
    pub source_conclusive: u64,
    /// False when the attack yields no usable correlations (no attacked
    /// pairs, or fewer conclusive events than the configured minimum).
    pub reliable: bool,
}

/// Invert the attacker's own counts exactly as a legitimate party would.
///
/// Against the sender's announcements her line-probe pairing is isomorphic
/// to the honest receiver role; against the receiver's announcements her
/// source-probe pairing is isomorphic to the honest sender role. Requires a
/// full (fraction 1) intercept transcript to be meaningful; partial attacks
/// still estimate, but only over the attacked pairs.
pub fn eve_recovered_values(
    attack: &AttackConfig,
    transcript: &InterceptTranscript,
    min_conclusive: u64,
) -> Result<EveEstimates> {
    if attack.kind != AttackKind::InterceptResend {
        return Err(Error::MissingProbe("intercept-resend attack config"));
    }
    attack.validate()?;
    let line_probe = attack.line_probe.expect("validated");
    let source_probe = attack.source_probe.expect("validated");

    let mut observed = 0u64;
    let mut line_counts = [0u64; 4];
    let mut source_counts = [0u64; 4];
    for pair in &transcript.pairs {
        let (Some(eve_line), Some(eve_source), Some(bob_outcome)) =
            (pair.eve_line, pair.eve_source, pair.bob)
        else {
            continue;
        };
        observed += 1;
        // Line side: joint (sender announcement, attacker outcome).
        if pair.alice.is_conclusive() && eve_line.is_conclusive() {
            let i = (pair.alice.index() - 2) * 2 + (eve_line.index() - 2);
            line_counts[i] += 1;
        }
        // Source side: joint (attacker outcome, receiver announcement).
        if eve_source.is_conclusive() && bob_outcome.is_conclusive() {
            let i = (eve_source.index() - 2) * 2 + (bob_outcome.index() - 2);
            source_counts[i] += 1;
        }
    }

    let line_conclusive: u64 = line_counts.iter().sum();
    let source_conclusive: u64 = source_counts.iter().sum();
    let usable =
        observed > 0 && line_conclusive >= min_conclusive && source_conclusive >= min_conclusive;

    let quad_of = |counts: [u64; 4]| {
        let n = observed.max(1) as f64;
        ConclusiveQuad {
            plus_plus: counts[0] as f64 / n,
            plus_minus: counts[1] as f64 / n,
            minus_plus: counts[2] as f64 / n,
            minus_minus: counts[3] as f64 / n,
        }
    };
    let alice_values = recover_partner(&line_probe, &quad_of(line_counts));
    let bob_values = recover_partner(&source_probe, &quad_of(source_counts));
    let reliable = usable && alice_values.reliable && bob_values.reliable;
    Ok(EveEstimates {
        alice_values,
        bob_values,
        line_conclusive,
        source_conclusive,
        reliable,
    })
}

/// The attacker's estimates from exact (infinite-sample) probabilities, for
/// round-trip analysis: her line-side quadruple is the honest closed form
/// with her probe in the receiver slot, and symmetrically for the source
/// side.
pub fn eve_exact_estimates(
    alice: &PreparationParams,
    bob: &PreparationParams,
    attack: &AttackConfig,
) -> Result<EveEstimates> {
    if attack.kind != AttackKind::InterceptResend {
        return Err(Error::MissingProbe("intercept-resend attack config"));
    }
    attack.validate()?;
    let line_probe = attack.line_probe.expect("validated");
    let source_probe = attack.source_probe.expect("validated");
    let alice_values = recover_partner(&line_probe, &conclusive_probabilities(alice, &line_probe));
    let bob_values = recover_partner(&source_probe, &conclusive_probabilities(&source_probe, bob));
    Ok(EveEstimates {
        alice_values,
        bob_values,
        line_conclusive: u64::MAX,
        source_conclusive: u64::MAX,
        reliable: alice_values.reliable && bob_values.reliable,
    })
}
