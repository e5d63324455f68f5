//! Loss and error models for the transmitted-qubit line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tables::ProbabilityTable;

/// Fiber-channel settings for the qubit sent from the pair source to the
/// receiving party.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    /// Absorption coefficient α in dB/km.
    pub alpha_db_per_km: f64,
    /// Channel length in km.
    pub length_km: f64,
    /// Distance-independent loss in dB.
    pub fixed_loss_db: f64,
    /// Depolarizing error rate ε in [0, 1], applied as a uniform mixture at
    /// the probability level.
    pub error_rate: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            alpha_db_per_km: 0.0,
            length_km: 0.0,
            fixed_loss_db: 0.0,
            error_rate: 0.0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("alpha_db_per_km", self.alpha_db_per_km),
            ("length_km", self.length_km),
            ("fixed_loss_db", self.fixed_loss_db),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::ParameterRange {
                    name: match name {
                        "alpha_db_per_km" => "alpha_db_per_km",
                        "length_km" => "length_km",
                        _ => "fixed_loss_db",
                    },
                    value,
                    range: "[0, inf)",
                });
            }
        }
        if !(0.0..=1.0).contains(&self.error_rate) {
            return Err(Error::ParameterRange {
                name: "error_rate",
                value: self.error_rate,
                range: "[0, 1]",
            });
        }
        Ok(())
    }

    /// Probability η = 10^{−(αl + c)/10} that a transmitted photon is
    /// detected.
    pub fn transmittance(&self) -> f64 {
        let total_db = self.alpha_db_per_km * self.length_km + self.fixed_loss_db;
        10f64.powf(-total_db / 10.0)
    }
}

/// Mix a complete outcome table with its uniform counterpart:
/// every entry becomes `(1 − ε)·ideal + ε/len`.
///
/// At the probability level this is exactly what depolarization of the
/// transmitted qubit does to the joint Bell statistics.
pub fn apply_error_mixture(ideal: &ProbabilityTable, error_rate: f64) -> Result<ProbabilityTable> {
    if !(0.0..=1.0).contains(&error_rate) {
        return Err(Error::ParameterRange {
            name: "error_rate",
            value: error_rate,
            range: "[0, 1]",
        });
    }
    if !ideal.is_complete() {
        return Err(Error::InvalidTable(format!(
            "error mixture needs a complete table, total = {}",
            ideal.total()
        )));
    }
    ideal.mix(
        &ProbabilityTable::uniform(ideal.dim(), ideal.arity()),
        error_rate,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(alpha: f64, l: f64, c: f64) -> ChannelConfig {
        ChannelConfig {
            alpha_db_per_km: alpha,
            length_km: l,
            fixed_loss_db: c,
            error_rate: 0.0,
        }
    }

    #[test]
    fn transmittance_examples() {
        assert_abs_diff_eq!(cfg(0.0, 0.0, 0.0).transmittance(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cfg(0.2, 50.0, 0.0).transmittance(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(
            cfg(0.2, 10.0, 1.0).transmittance(),
            10f64.powf(-0.3),
            epsilon = 1e-15
        );
    }

    #[test]
    fn transmittance_monotone_in_each_knob() {
        let base = cfg(0.2, 10.0, 1.0).transmittance();
        assert!(cfg(0.3, 10.0, 1.0).transmittance() < base);
        assert!(cfg(0.2, 20.0, 1.0).transmittance() < base);
        assert!(cfg(0.2, 10.0, 2.0).transmittance() < base);
    }

    #[test]
    fn mixture_identity_and_full_depolarization() {
        let mut entries = vec![0.0; 16];
        entries[0] = 1.0;
        let table = ProbabilityTable::new(2, 2, entries).unwrap();

        let same = apply_error_mixture(&table, 0.0).unwrap();
        assert_eq!(same.entries(), table.entries());

        let flat = apply_error_mixture(&table, 1.0).unwrap();
        for e in flat.entries() {
            assert_abs_diff_eq!(*e, 1.0 / 16.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn mixture_on_fixture_entry() {
        // (1 − 0.05)·9/128 + 0.05/16 = 0.069921875
        let mut entries = vec![(1.0 - 24.0 / 128.0) / 12.0; 16];
        entries[0b1010] = 9.0 / 128.0;
        entries[0b1111] = 9.0 / 128.0;
        entries[0b1011] = 3.0 / 128.0;
        entries[0b1110] = 3.0 / 128.0;
        let table = ProbabilityTable::new(2, 2, entries).unwrap();
        let mixed = apply_error_mixture(&table, 0.05).unwrap();
        assert_abs_diff_eq!(mixed.entries()[0b1010], 0.069921875, epsilon = 1e-15);
        assert_abs_diff_eq!(mixed.total(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mixture_rejects_bad_rate_and_incomplete_table() {
        let table = ProbabilityTable::uniform(2, 2);
        assert!(apply_error_mixture(&table, -0.1).is_err());
        assert!(apply_error_mixture(&table, 1.1).is_err());
        let partial = ProbabilityTable::new(2, 2, vec![1.0 / 32.0; 16]).unwrap();
        assert!(apply_error_mixture(&partial, 0.1).is_err());
    }

    #[test]
    fn mixture_composes_affinely() {
        let mut entries = vec![1.0 / 32.0; 16];
        entries[0] += 0.5;
        let table = ProbabilityTable::new(2, 2, entries).unwrap();
        let twice = apply_error_mixture(&apply_error_mixture(&table, 0.2).unwrap(), 0.3).unwrap();
        let once = apply_error_mixture(&table, 1.0 - (1.0 - 0.2) * (1.0 - 0.3)).unwrap();
        for (a, b) in twice.entries().iter().zip(once.entries()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }
}
