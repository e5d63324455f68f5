//! `sweep`: one axis swept, one CSV (or JSON) table out.
//!
//! Column schemas are versioned via the leading `schema_version` column and
//! documented in the README; column order is fixed.

use anyhow::{bail, Context, Result};
use qnd_core::channel::ChannelConfig;
use qnd_core::protocol::studies::{digit_scaling_point, error_rate_point, fraction_point};
use qnd_core::protocol::{run_session, ProtocolConfig};
use serde::Serialize;
use std::path::Path;
use std::process::ExitCode;

use crate::config::FileConfig;
use crate::{OutputFormat, SweepAxis};

pub const SWEEP_CSV_SCHEMA: u32 = 1;

#[derive(Serialize)]
#[serde(untagged)]
enum Row {
    GroupSize {
        schema_version: u32,
        group_size: u64,
        digit_level: usize,
        groups: u32,
        digit_match_fraction: f64,
        median_abs_error: f64,
        mean_abs_error: f64,
    },
    ErrorRate {
        schema_version: u32,
        error_rate: f64,
        study_group_size: u64,
        study_groups: u32,
        first_digit_match: f64,
        median_abs_error: f64,
        session_discard_rate: f64,
        session_key_rate: f64,
    },
    Fraction {
        schema_version: u32,
        fraction: f64,
        sessions: u32,
        discard_rate: f64,
        key_rate: f64,
    },
    Distance {
        schema_version: u32,
        distance_km: f64,
        transmittance: f64,
        sessions: u32,
        mean_received_fraction: f64,
        discard_rate: f64,
        key_rate: f64,
    },
}

fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("range must be start:stop:step, got {spec}");
    }
    let start: f64 = parts[0].parse().context("range start")?;
    let stop: f64 = parts[1].parse().context("range stop")?;
    let step: f64 = parts[2].parse().context("range step")?;
    if step <= 0.0 || stop < start {
        bail!("range must advance: start {start}, stop {stop}, step {step}");
    }
    let mut points = Vec::new();
    let mut x = start;
    while x <= stop + 1e-12 {
        points.push(x);
        x += step;
    }
    Ok(points)
}

fn default_points(axis: SweepAxis) -> Vec<f64> {
    match axis {
        SweepAxis::N => vec![100.0, 10_000.0, 1_000_000.0],
        SweepAxis::ErrorRate => parse_range("0:0.15:0.01").expect("static range"),
        SweepAxis::Fraction => parse_range("0:1:0.1").expect("static range"),
        SweepAxis::Distance => parse_range("0:100:10").expect("static range"),
    }
}

/// Digit level the n/2-decimals rule predicts for a group size 10^n.
fn predicted_digit_level(group_size: u64) -> usize {
    (((group_size as f64).log10() / 2.0).floor() as usize).max(1)
}

fn session_stats(base: &ProtocolConfig, seeds: u32) -> Result<(f64, f64, f64)> {
    let mut discarded = 0u64;
    let mut total_groups = 0u64;
    let mut key_digits = 0u64;
    let mut pairs_sent = 0u64;
    let mut received = 0u64;
    for s in 0..seeds {
        let mut cfg = *base;
        cfg.master_seed = base.master_seed.wrapping_add(s as u64);
        let report = run_session(&cfg)?;
        discarded += (cfg.num_groups - report.discards.passed) as u64;
        total_groups += cfg.num_groups as u64;
        key_digits += report.final_key.len() as u64;
        pairs_sent += report.total_pairs_sent;
        received += report.groups.iter().map(|g| g.n_received).sum::<u64>();
    }
    Ok((
        discarded as f64 / total_groups.max(1) as f64,
        key_digits as f64 / pairs_sent.max(1) as f64,
        received as f64 / pairs_sent.max(1) as f64,
    ))
}

pub fn run(
    axis: SweepAxis,
    points: Option<Vec<f64>>,
    range: Option<&str>,
    seed: u64,
    out_dir: &Path,
    format: OutputFormat,
    config_path: Option<&Path>,
) -> Result<ExitCode> {
    let points = match (points, range) {
        (Some(p), _) => p,
        (None, Some(spec)) => parse_range(spec)?,
        (None, None) => default_points(axis),
    };
    if points.is_empty() {
        bail!("empty sweep range");
    }

    let base = match config_path {
        Some(path) => FileConfig::load(path)?.to_protocol_config(),
        None => ProtocolConfig {
            master_seed: seed,
            ..ProtocolConfig::default()
        },
    };

    let mut rows = Vec::with_capacity(points.len());
    for &x in &points {
        let row = match axis {
            SweepAxis::N => {
                let group_size = x.round() as u64;
                anyhow::ensure!(group_size >= 1, "group size must be at least 1");
                let level = predicted_digit_level(group_size);
                let p = digit_scaling_point(group_size, level, 400, seed)?;
                Row::GroupSize {
                    schema_version: SWEEP_CSV_SCHEMA,
                    group_size,
                    digit_level: level,
                    groups: p.groups,
                    digit_match_fraction: p.match_fraction,
                    median_abs_error: p.median_abs_error,
                    mean_abs_error: p.mean_abs_error,
                }
            }
            SweepAxis::ErrorRate => {
                let p = error_rate_point(x, 100_000, 300, seed)?;
                let mut cfg = base;
                cfg.channel.error_rate = x;
                cfg.num_groups = 20;
                let (discard, key_rate, _) = session_stats(&cfg, 10)?;
                Row::ErrorRate {
                    schema_version: SWEEP_CSV_SCHEMA,
                    error_rate: x,
                    study_group_size: p.group_size,
                    study_groups: p.groups,
                    first_digit_match: p.first_digit_match,
                    median_abs_error: p.median_abs_error,
                    session_discard_rate: discard,
                    session_key_rate: key_rate,
                }
            }
            SweepAxis::Fraction => {
                let mut cfg = base;
                if cfg.attack.kind == qnd_core::adversary::AttackKind::None {
                    let probe = qnd_core::analytic::PreparationParams::new(
                        std::f64::consts::FRAC_PI_8,
                        std::f64::consts::FRAC_PI_6,
                    )
                    .expect("in range");
                    cfg.attack =
                        qnd_core::adversary::AttackConfig::intercept_resend(x, probe, probe);
                }
                cfg.num_groups = 20;
                let p = fraction_point(&cfg, x, 25)?;
                Row::Fraction {
                    schema_version: SWEEP_CSV_SCHEMA,
                    fraction: x,
                    sessions: p.sessions,
                    discard_rate: p.discard_rate,
                    key_rate: p.key_rate,
                }
            }
            SweepAxis::Distance => {
                let mut cfg = base;
                cfg.channel = ChannelConfig {
                    alpha_db_per_km: 0.2,
                    length_km: x,
                    ..cfg.channel
                };
                cfg.num_groups = 20;
                let sessions = 10;
                let (discard, key_rate, received_fraction) = session_stats(&cfg, sessions)?;
                Row::Distance {
                    schema_version: SWEEP_CSV_SCHEMA,
                    distance_km: x,
                    transmittance: cfg.channel.transmittance(),
                    sessions,
                    mean_received_fraction: received_fraction,
                    discard_rate: discard,
                    key_rate,
                }
            }
        };
        rows.push(row);
    }

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let stem = match axis {
        SweepAxis::N => "sweep_n",
        SweepAxis::ErrorRate => "sweep_error_rate",
        SweepAxis::Fraction => "sweep_fraction",
        SweepAxis::Distance => "sweep_distance",
    };
    let path = match format {
        OutputFormat::Csv => {
            let path = out_dir.join(format!("{stem}.csv"));
            let mut writer = csv::Writer::from_path(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            for row in &rows {
                writer.serialize(row)?;
            }
            writer.flush()?;
            path
        }
        OutputFormat::Json => {
            let path = out_dir.join(format!("{stem}.json"));
            let mut json = serde_json::to_string_pretty(&rows)?;
            json.push('\n');
            std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
            path
        }
    };
    println!("wrote {} ({} points)", path.display(), rows.len());
    Ok(ExitCode::SUCCESS)
}
