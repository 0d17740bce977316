//! Analysis configuration: one JSON file describes one reproducible
//! experiment. Unknown keys are rejected everywhere so a config hash pins the
//! exact experiment.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ratrec::{CoefficientModel, InitialConditions, RecurrenceSpec, Term};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub spec: SpecConfig,
    #[serde(default)]
    pub init: Option<InitConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    /// Coefficient model for the forcing sequence.
    pub a: CoefficientModel,
    pub terms: Vec<TermConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub p: f64,
    pub r: f64,
    pub ell: u32,
    pub s: u32,
    pub b: CoefficientModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    /// Window values ordered from the oldest index up to x[0].
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub steps: usize,
    pub seed: u64,
    pub divergence_threshold: f64,
    pub oscillation_window_cap: usize,
    pub margin_band: f64,
    pub rouche_samples: usize,
    pub grid_points: usize,
    /// Upper end of the equilibrium search range; derived from the limits
    /// when absent.
    pub range_high: Option<f64>,
    /// Explicit interval to check instead of searching.
    pub certificate: Option<CertificateConfig>,
    pub search: Option<SearchConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            steps: 1000,
            seed: 0,
            divergence_threshold: 1e12,
            oscillation_window_cap: 64,
            margin_band: 1e-8,
            rouche_samples: 4096,
            grid_points: 4096,
            range_high: None,
            certificate: None,
            search: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub m: f64,
    pub big_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub m_low: Option<f64>,
    pub m_high: Option<f64>,
    pub big_m_low: Option<f64>,
    pub big_m_high: Option<f64>,
    pub grid: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { m_low: None, m_high: None, big_m_low: None, big_m_high: None, grid: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsConfig {
    /// Directory for emitted files; nothing is written when absent and no
    /// --out override is given.
    pub dir: Option<String>,
    pub report_json: bool,
    pub trajectory_csv: bool,
    pub envelope_csv: bool,
    pub residual_csv: bool,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig {
            dir: None,
            report_json: true,
            trajectory_csv: true,
            envelope_csv: true,
            residual_csv: true,
        }
    }
}

impl AnalysisConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: AnalysisConfig =
            serde_json::from_str(text).context("config did not parse")?;
        if config.spec.terms.is_empty() {
            bail!("config needs at least one term");
        }
        Ok(config)
    }

    pub fn build_spec(&self) -> Result<RecurrenceSpec> {
        let terms = self
            .spec
            .terms
            .iter()
            .map(|t| Term { p: t.p, r: t.r, ell: t.ell, s: t.s, coeff_b: t.b.clone() })
            .collect();
        RecurrenceSpec::new(self.spec.a.clone(), terms).context("invalid recurrence parameters")
    }

    pub fn build_init(&self) -> Result<Option<InitialConditions>> {
        match &self.init {
            None => Ok(None),
            Some(init) => Ok(Some(
                InitialConditions::new(init.values.clone()).context("invalid initial window")?,
            )),
        }
    }
}
