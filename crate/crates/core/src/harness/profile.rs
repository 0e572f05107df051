use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::open::NoiseParams;
use crate::readout::ReadoutCalibration;

/// Calibration snapshot of a device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceProfile {
    pub device: String,
    pub calibrated_at: String,
    pub qubits: Vec<QubitRecord>,
}

/// Per-qubit properties. `T1`, `T2` in µs, `t_sx` in ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitRecord {
    pub index: usize,
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    pub t_sx: f64,
    pub prob_meas1_prep0: f64,
    pub prob_meas0_prep1: f64,
}

impl QubitRecord {
    pub fn noise(&self) -> Result<NoiseParams> {
        NoiseParams::new(self.t1, self.t2)
    }

    pub fn calibration(&self) -> Result<ReadoutCalibration> {
        ReadoutCalibration::from_error_rates(self.prob_meas1_prep0, self.prob_meas0_prep1)
    }
}

impl DeviceProfile {
    pub fn qubit(&self, index: usize) -> Result<&QubitRecord> {
        self.qubits
            .iter()
            .find(|q| q.index == index)
            .ok_or_else(|| {
                Error::OutOfRange(format!("profile `{}` has no qubit {index}", self.device))
            })
    }

    /// Checks every invariant; [`parse_profile`] calls this.
    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(schema("qubits", "at least one qubit record is required"));
        }
        let mut seen = HashSet::new();
        for (i, q) in self.qubits.iter().enumerate() {
            let at = |field: &str| format!("qubits[{i}].{field}");
            if !seen.insert(q.index) {
                return Err(schema(
                    &at("index"),
                    &format!("duplicate qubit index {}", q.index),
                ));
            }
            for (field, v) in [("T1", q.t1), ("T2", q.t2), ("t_sx", q.t_sx)] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(physical(
                        &at(field),
                        &format!("must be positive and finite, got {v}"),
                    ));
                }
            }
            if q.t2 > 2.0 * q.t1 {
                return Err(physical(
                    &at("T2"),
                    &format!("T2 = {} exceeds 2·T1 = {}", q.t2, 2.0 * q.t1),
                ));
            }
            for (field, v) in [
                ("prob_meas1_prep0", q.prob_meas1_prep0),
                ("prob_meas0_prep1", q.prob_meas0_prep1),
            ] {
                if !(0.0..1.0).contains(&v) {
                    return Err(schema(&at(field), &format!("must lie in [0, 1), got {v}")));
                }
            }
        }
        Ok(())
    }
}

fn schema(path: &str, message: &str) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn physical(path: &str, message: &str) -> Error {
    Error::PhysicalConstraint {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses and validates a JSON profile.
pub fn parse_profile(text: &str) -> Result<DeviceProfile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let profile: DeviceProfile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    profile.validate()?;
    Ok(profile)
}

pub fn ingest_profile(path: impl AsRef<Path>) -> Result<DeviceProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profile(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::interaction_time;

    const ONE_QUBIT: &str = r#"{
        "device": "five-qubit-falcon",
        "calibrated_at": "2021-06-01T09:00:00Z",
        "qubits": [{"index": 0, "T1": 95.0, "T2": 101.0, "t_sx": 35.555,
                    "prob_meas1_prep0": 0.02, "prob_meas0_prep1": 0.05}]
    }"#;

    #[test]
    fn minimal_profile_parses() {
        let p = parse_profile(ONE_QUBIT).unwrap();
        assert_eq!(
            p.qubits[0],
            QubitRecord {
                index: 0,
                t1: 95.0,
                t2: 101.0,
                t_sx: 35.555,
                prob_meas1_prep0: 0.02,
                prob_meas0_prep1: 0.05,
            }
        );
        assert!((interaction_time(50, p.qubit(0).unwrap().t_sx) - 3555.5).abs() < 1e-9);
        assert!(p.qubit(3).is_err());
    }

    #[test]
    fn dephasing_bound_is_enforced() {
        let bad = ONE_QUBIT.replace("\"T2\": 101.0", "\"T2\": 237.5");
        match parse_profile(&bad) {
            Err(Error::PhysicalConstraint { path, .. }) => assert_eq!(path, "qubits[0].T2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_the_field_path() {
        let wrong_type = ONE_QUBIT.replace("\"T1\": 95.0", "\"T1\": \"long\"");
        match parse_profile(&wrong_type) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "qubits[0].T1"),
            other => panic!("{other:?}"),
        }
        let missing = ONE_QUBIT.replace("\"t_sx\": 35.555,", "");
        assert!(matches!(parse_profile(&missing), Err(Error::Schema { .. })));
        let readout = ONE_QUBIT.replace("0.05}", "1.0}");
        match parse_profile(&readout) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "qubits[0].prob_meas0_prep1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let e = ingest_profile("/nonexistent/profile.json").unwrap_err();
        assert!(matches!(e, Error::Io { .. }) && e.is_validation());
    }
}
