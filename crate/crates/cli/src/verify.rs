//! Closed-form-vs-expansion verification suites.

use anyhow::Result;
use qnd_core::analytic::{
    closed_form_v_qubit, closed_form_v_qudit, conclusive_probabilities,
    entangle_measure_probabilities, ConclusiveQuad, PreparationParams, QuditPreparation,
};
use qnd_core::adversary::{entangle_measure_state, ENTANGLE_MEASURE_PAIRING};
use qnd_core::qmath::{
    bell_state, joint_bell_coefficients, joint_bell_coefficients_6, tensor, BellIndex,
};
use qnd_core::sampling::stream_rng;
use std::process::ExitCode;

const TOLERANCE: f64 = 1e-12;

struct Section {
    name: String,
    max_deviation: f64,
}

pub struct VerifyReport {
    sections: Vec<Section>,
}

impl VerifyReport {
    pub fn all_within_tolerance(&self) -> bool {
        self.sections.iter().all(|s| s.max_deviation < TOLERANCE)
    }

    pub fn print(&self) {
        for s in &self.sections {
            let verdict = if s.max_deviation < TOLERANCE { "PASS" } else { "FAIL" };
            println!("[{verdict}] {:<55} max deviation {:.3e}", s.name, s.max_deviation);
        }
    }
}

pub fn build_report(dims: &[usize], pairs: u32, seed: u64) -> Result<VerifyReport> {
    let mut sections = Vec::new();
    let mut rng = stream_rng(seed, 0);

    // Qubit closed form against the four-site expansion.
    let mut max_dev = 0.0f64;
    for _ in 0..pairs {
        let alice = PreparationParams::sample_recovery_admissible(&mut rng);
        let bob = PreparationParams::sample_recovery_admissible(&mut rng);
        let closed = closed_form_v_qubit(&alice, &bob);
        let pair = bell_state(2, BellIndex::new(0, 0, 2))?;
        let state = tensor(&[alice.state(), bob.state(), pair])?;
        let expanded = joint_bell_coefficients(&state, [(0, 2), (1, 3)])?;
        for (c, o) in closed.entries().iter().zip(expanded.entries()) {
            max_dev = max_dev.max((c - o).norm());
        }
    }
    sections.push(Section {
        name: format!("qubit closed form vs expansion ({pairs} pairs)"),
        max_deviation: max_dev,
    });

    // Conclusive quadruple against squared amplitudes.
    let mut max_dev = 0.0f64;
    for _ in 0..pairs {
        let alice = PreparationParams::sample_recovery_admissible(&mut rng);
        let bob = PreparationParams::sample_recovery_admissible(&mut rng);
        let quad = conclusive_probabilities(&alice, &bob);
        let table = closed_form_v_qubit(&alice, &bob).probabilities();
        let reference = ConclusiveQuad::from_table16(&table);
        for (a, b) in quad.as_array().iter().zip(reference.as_array()) {
            max_dev = max_dev.max((a - b).abs());
        }
    }
    sections.push(Section {
        name: format!("conclusive quadruple vs squared amplitudes ({pairs} pairs)"),
        max_deviation: max_dev,
    });

    // Qudit closed form against the expansion, per dimension.
    for &d in dims {
        let mut max_dev = 0.0f64;
        let qudit_pairs = pairs.div_ceil(4).max(5);
        for _ in 0..qudit_pairs {
            let alice = QuditPreparation::random(d, &mut rng)?;
            let bob = QuditPreparation::random(d, &mut rng)?;
            let closed = closed_form_v_qudit(&alice, &bob)?;
            let pair = bell_state(d, BellIndex::new(0, 0, d))?;
            let state = tensor(&[alice.state(), bob.state(), pair])?;
            let expanded = joint_bell_coefficients(&state, [(0, 2), (1, 3)])?;
            for (c, o) in closed.entries().iter().zip(expanded.entries()) {
                max_dev = max_dev.max((c.norm() - o.norm()).abs()).max((c - o).norm());
            }
        }
        sections.push(Section {
            name: format!("qudit closed form vs expansion (d = {d}, {qudit_pairs} pairs)"),
            max_deviation: max_dev,
        });
    }

    // Bell basis orthonormality per dimension.
    for &d in dims {
        let mut max_dev = 0.0f64;
        for s1 in 0..d {
            for p1 in 0..d {
                for s2 in 0..d {
                    for p2 in 0..d {
                        let a = bell_state(d, BellIndex::new(s1, p1, d))?;
                        let b = bell_state(d, BellIndex::new(s2, p2, d))?;
                        let ip = a.inner(&b)?;
                        let expected = f64::from(u8::from(s1 == s2 && p1 == p2));
                        max_dev = max_dev.max((ip.re - expected).abs()).max(ip.im.abs());
                    }
                }
            }
        }
        sections.push(Section {
            name: format!("generalized Bell basis orthonormality (d = {d})"),
            max_deviation: max_dev,
        });
    }

    // Entangle-measure closed form against the six-site marginals, and its
    // independence of the ancilla probe.
    let mut max_dev = 0.0f64;
    let mut probe_dev = 0.0f64;
    let triples = pairs.div_ceil(2).max(10);
    for t in 0..triples {
        let alice = PreparationParams::sample_recovery_admissible(&mut rng);
        let bob = PreparationParams::sample_recovery_admissible(&mut rng);
        let probe = PreparationParams::sample_recovery_admissible(&mut rng);
        let closed = entangle_measure_probabilities(&alice, &bob, &probe);
        let state = entangle_measure_state(&alice, &bob, &probe);
        let table6 = joint_bell_coefficients_6(&state, ENTANGLE_MEASURE_PAIRING)?;
        for flat4 in 0..16usize {
            let marginal: f64 = (0..4)
                .map(|eve_flat| table6.entries()[flat4 * 4 + eve_flat].norm_sqr())
                .sum();
            max_dev = max_dev.max((marginal - closed.entries()[flat4]).abs());
        }
        if t == 0 {
            for _ in 0..20 {
                let other = PreparationParams::sample_recovery_admissible(&mut rng);
                let varied = entangle_measure_probabilities(&alice, &bob, &other);
                for (a, b) in varied.entries().iter().zip(closed.entries()) {
                    probe_dev = probe_dev.max((a - b).abs());
                }
            }
        }
    }
    sections.push(Section {
        name: format!("entangle-measure closed form vs six-site marginals ({triples} triples)"),
        max_deviation: max_dev,
    });
    sections.push(Section {
        name: "entangle-measure independence of ancilla probe (20 probes)".into(),
        max_deviation: probe_dev,
    });

    Ok(VerifyReport { sections })
}

pub fn run(dims: &[usize], pairs: u32, seed: u64) -> Result<ExitCode> {
    for &d in dims {
        anyhow::ensure!((2..=5).contains(&d), "dimension {d} outside 2..=5");
    }
    let report = build_report(dims, pairs, seed)?;
    report.print();
    if report.all_within_tolerance() {
        println!("all suites within {TOLERANCE:.0e}");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verification FAILED: deviation at or above {TOLERANCE:.0e}");
        Ok(ExitCode::from(1))
    }
}
