//! Report records emitted by the commands. Everything serializes through
//! ordered maps and fixed-layout structs so a given config and seed always
//! produce byte-identical files.

use std::collections::BTreeMap;

use serde::Serialize;

use ratrec::{
    AdmissibilityReport, DivergenceReport, EquilibriumPoint, ExponentSelection,
    FirstOrderStability, Halt, IntervalBounds, RoucheOutcome, StabilityVerdict, StructureReport,
    Trajectory, Verdict,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct ReportRecord {
    pub version: &'static str,
    pub config_hash: String,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<AdmissibilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibria: Option<EquilibriaSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilitySection>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    /// Logical name -> path of every file written.
    pub outputs: BTreeMap<String, String>,
}

impl ReportRecord {
    pub fn new(command: &str, config_hash: String, seed: u64) -> Self {
        ReportRecord {
            version: TOOL_VERSION,
            config_hash,
            command: command.to_string(),
            seed,
            admissibility: None,
            simulation: None,
            certificate: None,
            equilibria: None,
            stability: None,
            notes: Vec::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Flat `key,value` rendering for the csv output format.
    pub fn to_kv_csv(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut rows = vec![("key".to_string(), "value".to_string())];
        flatten("", &value, &mut rows);
        rows.iter().map(|(k, v)| format!("{k},{v}\n")).collect()
    }
}

fn flatten(prefix: &str, value: &serde_json::Value, rows: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (key, inner) in map {
                let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                flatten(&path, inner, rows);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, inner) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), inner, rows);
            }
        }
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

#[derive(Debug, Serialize)]
pub struct SimulationSection {
    pub steps_requested: usize,
    pub steps_completed: usize,
    pub min: f64,
    pub max: f64,
    pub last: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halt: Option<Halt>,
    pub divergence: DivergenceReport,
    /// Absent when the trajectory is too short to scan.
    pub oscillatory: Option<bool>,
    pub oscillation_witnesses: Option<usize>,
}

impl SimulationSection {
    pub fn from_trajectory(traj: &Trajectory, steps_requested: usize) -> Self {
        let simulated = traj.simulated();
        let min = simulated.iter().copied().fold(f64::INFINITY, f64::min);
        let max = simulated.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        SimulationSection {
            steps_requested,
            steps_completed: simulated.len(),
            min,
            max,
            last: simulated.last().copied().unwrap_or(f64::NAN),
            halt: traj.halt(),
            divergence: DivergenceReport {
                divergent: false,
                reason: None,
                first_exceedance: None,
            },
            oscillatory: None,
            oscillation_witnesses: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CertificateSection {
    pub mode: &'static str,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_m: Option<f64>,
    pub verdicts: BTreeMap<String, Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<ExponentSelection>,
    /// Single-term verdict map, reported alongside the chain when q = 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_term_verdicts: Option<BTreeMap<String, Verdict>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse_bounds: Option<(f64, f64)>,
    pub exponent_criterion: String,
}

#[derive(Debug, Serialize)]
pub struct EquilibriaSection {
    pub a: f64,
    pub b: Vec<f64>,
    pub b_sum: f64,
    pub structure: StructureReport,
    pub interval: IntervalBounds,
    pub points: Vec<EquilibriumPoint>,
    /// Locally asymptotically stable equilibrium values.
    pub stable_points: Vec<f64>,
    /// Unstable or critically stable equilibrium values.
    pub unstable_points: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct StabilitySection {
    pub margin_band: f64,
    pub pairing: &'static str,
    pub points: Vec<PointStability>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_lower: Option<EnvelopePolySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_upper: Option<EnvelopePolySection>,
}

#[derive(Debug, Serialize)]
pub struct PointStability {
    pub x: f64,
    /// Monic coefficients, highest degree first, 17 significant digits.
    pub polynomial: Vec<String>,
    pub verdict: StabilityVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison_vs_origin: Option<RoucheOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_order: Option<FirstOrderStability>,
}

#[derive(Debug, Serialize)]
pub struct EnvelopePolySection {
    pub point: f64,
    pub polynomials: Vec<Vec<String>>,
    pub verdicts: Vec<StabilityVerdict>,
}

/// Hex SHA-256 of the raw config bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
