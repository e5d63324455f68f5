//! `attack-demo`: honest vs attacked outcome tables side by side, the
//! check verdicts, and the attacker's recovered values for the intercept
//! case.

use anyhow::{Context, Result};
use clap::ValueEnum;
use qnd_core::adversary::{
    attacked_probabilities, entangle_measure_state, eve_exact_estimates, eve_recovered_values,
    simulate_intercept, AttackConfig, ENTANGLE_MEASURE_PAIRING,
};
use qnd_core::analytic::{honest_probability_table, ConclusiveQuad, PreparationParams};
use qnd_core::estimator::RecoveredValues;
use qnd_core::protocol::{accuracy_check, eavesdrop_check, CheckTolerances};
use qnd_core::qmath::joint_bell_coefficients_6;
use qnd_core::tables::ProbabilityTable;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, FRAC_PI_8};
use std::path::Path;
use std::process::ExitCode;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoKind {
    InterceptResend,
    EntangleMeasure,
}

/// Demo operating point: the well-separated fixture parameters and
/// symmetric attacker probes.
fn demo_parties() -> (PreparationParams, PreparationParams) {
    (
        PreparationParams::new(FRAC_PI_6, FRAC_PI_6).unwrap(),
        PreparationParams::new(FRAC_PI_3, FRAC_PI_6).unwrap(),
    )
}

fn demo_probe() -> PreparationParams {
    PreparationParams::new(FRAC_PI_8, FRAC_PI_6).unwrap()
}

#[derive(Serialize)]
struct DemoReport {
    kind: String,
    fraction: f64,
    seed: u64,
    honest_table: Vec<f64>,
    attacked_table: Vec<f64>,
    honest_quad: ConclusiveQuad,
    attacked_quad: ConclusiveQuad,
    accuracy_check_attacked: bool,
    eavesdrop_check_attacked: bool,
    eve_exact: Option<EveValues>,
    eve_sampled: Option<EveValues>,
    ancilla_marginal: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct EveValues {
    alice_cos_theta: f64,
    alice_cos_phi: f64,
    bob_cos_theta: f64,
    bob_cos_phi: f64,
    reliable: bool,
}

impl From<(&RecoveredValues, &RecoveredValues, bool)> for EveValues {
    fn from((alice, bob, reliable): (&RecoveredValues, &RecoveredValues, bool)) -> Self {
        EveValues {
            alice_cos_theta: alice.cos_theta,
            alice_cos_phi: alice.cos_phi,
            bob_cos_theta: bob.cos_theta,
            bob_cos_phi: bob.cos_phi,
            reliable,
        }
    }
}

fn print_table(label: &str, table: &ProbabilityTable) {
    println!("{label} (rows: sender outcome, cols: receiver outcome):");
    let names = ["Phi+", "Phi-", "Psi+", "Psi-"];
    print!("{:>8}", "");
    for n in names {
        print!("{n:>10}");
    }
    println!();
    for (s, name) in names.iter().enumerate() {
        print!("{name:>8}");
        for r in 0..4 {
            print!("{:>10.5}", table.entries()[s * 4 + r]);
        }
        println!();
    }
}

pub fn run(kind: DemoKind, fraction: f64, seed: u64, out: Option<&Path>) -> Result<ExitCode> {
    let (alice, bob) = demo_parties();
    let probe = demo_probe();
    let attack = match kind {
        DemoKind::InterceptResend => AttackConfig::intercept_resend(fraction, probe, probe),
        DemoKind::EntangleMeasure => AttackConfig::entangle_measure(fraction, probe),
    };

    let honest = honest_probability_table(&alice, &bob);
    let attacked = attacked_probabilities(&honest, &attack, &alice, &bob)?;

    print_table("honest joint outcome table", &honest);
    println!();
    print_table(
        &format!("attacked joint outcome table (fraction {fraction})"),
        &attacked,
    );

    let honest_quad = ConclusiveQuad::from_table16(&honest);
    let attacked_quad = ConclusiveQuad::from_table16(&attacked);
    let tol = CheckTolerances::default();
    let n = 100;
    let acc = accuracy_check(&attacked_quad, n, tol.accuracy_halfwidth_multiplier);
    let eav = eavesdrop_check(&attacked_quad, n, tol.eavesdrop_halfwidth_multiplier);
    println!();
    println!(
        "conclusive quadruple honest:   {:?}",
        honest_quad.as_array()
    );
    println!(
        "conclusive quadruple attacked: {:?}",
        attacked_quad.as_array()
    );
    println!("accuracy check on attacked quadruple (n = {n}): {}", verdict(acc));
    println!("eavesdrop check on attacked quadruple (n = {n}): {}", verdict(eav));

    let mut eve_exact = None;
    let mut eve_sampled = None;
    let mut ancilla_marginal = None;
    match kind {
        DemoKind::InterceptResend => {
            let exact = eve_exact_estimates(&alice, &bob, &attack)?;
            println!();
            println!(
                "attacker exact recovery:   alice (cosθ {:.4}, cosφ {:.4})  bob (cosθ {:.4}, cosφ {:.4})",
                exact.alice_values.cos_theta,
                exact.alice_values.cos_phi,
                exact.bob_values.cos_theta,
                exact.bob_values.cos_phi
            );
            println!(
                "true values:               alice (cosθ {:.4}, cosφ {:.4})  bob (cosθ {:.4}, cosφ {:.4})",
                alice.cos_theta(),
                alice.cos_phi(),
                bob.cos_theta(),
                bob.cos_phi()
            );
            let transcript = simulate_intercept(&alice, &bob, &attack, 10_000, 1.0, seed)?;
            let sampled = eve_recovered_values(&attack, &transcript, 50)?;
            println!(
                "attacker sampled recovery (10^4 pairs): alice (cosθ {:.4}, cosφ {:.4})  bob (cosθ {:.4}, cosφ {:.4})  reliable: {}",
                sampled.alice_values.cos_theta,
                sampled.alice_values.cos_phi,
                sampled.bob_values.cos_theta,
                sampled.bob_values.cos_phi,
                sampled.reliable
            );
            eve_exact = Some(EveValues::from((
                &exact.alice_values,
                &exact.bob_values,
                exact.reliable,
            )));
            eve_sampled = Some(EveValues::from((
                &sampled.alice_values,
                &sampled.bob_values,
                sampled.reliable,
            )));
        }
        DemoKind::EntangleMeasure => {
            // Attacker-side view: marginal over her Bell outcomes in the
            // six-site expansion.
            let state = entangle_measure_state(&alice, &bob, &probe);
            let table6 = joint_bell_coefficients_6(&state, ENTANGLE_MEASURE_PAIRING)?;
            let mut marginal = vec![0.0f64; 4];
            for (flat, v) in table6.entries().iter().enumerate() {
                marginal[flat % 4] += v.norm_sqr();
            }
            println!();
            println!("attacker ancilla-side outcome marginal: {marginal:?}");
            ancilla_marginal = Some(marginal);
        }
    }

    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("attack_demo.json");
        let report = DemoReport {
            kind: match kind {
                DemoKind::InterceptResend => "intercept_resend".into(),
                DemoKind::EntangleMeasure => "entangle_measure".into(),
            },
            fraction,
            seed,
            honest_table: honest.entries().to_vec(),
            attacked_table: attacked.entries().to_vec(),
            honest_quad,
            attacked_quad,
            accuracy_check_attacked: acc,
            eavesdrop_check_attacked: eav,
            eve_exact,
            eve_sampled,
            ancilla_marginal,
        };
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "discard"
    }
}
