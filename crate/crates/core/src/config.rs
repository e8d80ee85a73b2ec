//! Experiment configuration in TOML.
//!
//! Every key is optional. Defaults: white noise, Gaussian innovations, uniform
//! weights, `n = 1024`, `replications = 1000`, `seed = 1`. Unknown keys are
//! rejected.
//!
//! ```toml
//! command = "mc"
//! n = 4096
//! replications = 2000
//! seed = 7
//! statistic = "std_q"
//!
//! [model]
//! kind = "arfima"
//! d = 0.3
//! ar = [0.5]
//!
//! [innovation]
//! family = "centered_exponential"
//!
//! [weights]
//! kind = "local_whittle"
//! m = 200
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{Statistic, MIN_REPLICATIONS, MIN_SAMPLE_SIZE};
use crate::process::{check_causal, InnovationFamily, InnovationSpec, ModelKind};
use crate::qform::WeightScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Qform,
    #[default]
    Mc,
    Bounds,
    Counterexample,
    Whittle,
    Prop2,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Qform => "qform",
            Command::Mc => "mc",
            Command::Bounds => "bounds",
            Command::Counterexample => "counterexample",
            Command::Whittle => "whittle",
            Command::Prop2 => "prop2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnovationConfig {
    pub family: InnovationFamily,
}

impl Default for InnovationConfig {
    fn default() -> Self {
        Self {
            family: InnovationFamily::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct WhittleConfig {
    /// Bandwidth; `floor(n^0.65)` when absent.
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prop2Config {
    /// `j = floor(j_fraction n)`.
    pub j_fraction: f64,
    /// `k = j + k_offset`.
    pub k_offset: i64,
}

impl Default for Prop2Config {
    fn default() -> Self {
        Self {
            j_fraction: 0.125,
            k_offset: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterexampleConfig {
    pub d: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self { d: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    /// Sample sizes for `mc`, `bounds` and `prop2`; `[n]` (or a command
    /// default) when absent.
    pub n_grid: Option<Vec<usize>>,
    pub replications: usize,
    pub seed: u64,
    /// MA truncation lag; `max(100 n, 2^17)` when absent.
    pub truncation: Option<usize>,
    pub statistic: Statistic,
    pub include_nyquist: bool,
    /// Zero weights above `j = floor(theta_band n)`.
    pub theta_band: Option<f64>,
    pub model: ModelKind,
    pub innovation: InnovationConfig,
    pub weights: WeightScheme,
    pub whittle: WhittleConfig,
    pub prop2: Prop2Config,
    pub counterexample: CounterexampleConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: Command::Mc,
            n: 1024,
            n_grid: None,
            replications: 1000,
            seed: 1,
            truncation: None,
            statistic: Statistic::StdS,
            include_nyquist: false,
            theta_band: None,
            model: ModelKind::WhiteNoise,
            innovation: InnovationConfig::default(),
            weights: WeightScheme::Uniform,
            whittle: WhittleConfig::default(),
            prop2: Prop2Config::default(),
            counterexample: CounterexampleConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config = from_toml(text)?;
    config.validate()?;
    Ok(config)
}

/// Parses without validating, for callers that apply overrides first.
pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })
}

/// Serializes to TOML that [`parse_config`] reads back unchanged.
pub fn to_toml(config: &ExperimentConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::domain(format!("cannot serialize config: {e}")))
}

fn check_memory(key: &str, d: f64) -> Result<()> {
    if !(d.abs() < 0.5) {
        return Err(Error::validation(key, format!("|d| < 1/2 required, got {d}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn innovation_spec(&self) -> InnovationSpec {
        InnovationSpec::new(self.innovation.family)
    }

    /// Sample sizes for grid-based commands.
    pub fn resolved_grid(&self) -> Vec<usize> {
        if let Some(g) = &self.n_grid {
            return g.clone();
        }
        match self.command {
            Command::Bounds => vec![self.n / 16, self.n / 4, self.n],
            Command::Prop2 => vec![self.n / 8, self.n / 4, self.n / 2, self.n],
            _ => vec![self.n],
        }
    }

    fn min_n(&self) -> usize {
        match self.command {
            Command::Simulate | Command::Qform | Command::Whittle | Command::Prop2 => 16,
            _ => MIN_SAMPLE_SIZE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.model {
            ModelKind::Arfima { d, ar, .. } => {
                check_memory("model.d", *d)?;
                check_causal(ar).map_err(|e| Error::validation("model.ar", e.to_string()))?;
            }
            ModelKind::FractionalOfShortMemory { d, short } => {
                check_memory("model.d", *d)?;
                if short.is_empty() {
                    return Err(Error::validation("model.short", "must not be empty"));
                }
            }
            ModelKind::Ma { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::validation("model.coeffs", "must not be empty"));
                }
            }
            ModelKind::WhiteNoise => {}
        }
        let min_n = self.min_n();
        if self.n < min_n {
            return Err(Error::validation("n", format!("must be at least {min_n}, got {}", self.n)));
        }
        let grid = self.resolved_grid();
        if grid.is_empty() {
            return Err(Error::validation("n_grid", "must not be empty"));
        }
        if let Some(&n) = grid.iter().find(|&&n| n < min_n) {
            return Err(Error::validation("n_grid", format!("sample size {n} is below {min_n}")));
        }
        if matches!(self.command, Command::Mc | Command::Bounds | Command::Counterexample)
            && self.replications < MIN_REPLICATIONS
        {
            return Err(Error::validation(
                "replications",
                format!("must be at least {MIN_REPLICATIONS}, got {}", self.replications),
            ));
        }
        if self.truncation == Some(0) {
            return Err(Error::validation("truncation", "must be at least 1"));
        }
        if let Some(t) = self.theta_band {
            if !(t > 0.0 && t <= 0.5) {
                return Err(Error::validation("theta_band", format!("{t} outside (0, 1/2]")));
            }
        }
        match &self.weights {
            WeightScheme::Counterexample { d } => check_memory("weights.d", *d)?,
            WeightScheme::LocalWhittle { m } => {
                for &n in &grid {
                    let nu = n / 2 - 1;
                    if *m == 0 || *m > nu {
                        return Err(Error::validation("weights.m", format!("must be in 1..={nu} for n = {n}")));
                    }
                }
            }
            WeightScheme::Indicator { y } if !(*y > 0.0 && *y <= std::f64::consts::PI) => {
                return Err(Error::validation("weights.y", format!("{y} outside (0, pi]")));
            }
            WeightScheme::KernelAt { u0, bandwidth } => {
                if !(*u0 >= 0.0 && *u0 <= std::f64::consts::PI) {
                    return Err(Error::validation("weights.u0", format!("{u0} outside [0, pi]")));
                }
                if bandwidth.is_some_and(|h| !(h > 0.0)) {
                    return Err(Error::validation("weights.bandwidth", "must be positive"));
                }
            }
            _ => {}
        }
        if self.command == Command::Whittle {
            let nu = self.n / 2 - 1;
            if let Some(m) = self.whittle.m {
                if m < 8 || m > nu {
                    return Err(Error::validation("whittle.m", format!("must be in 8..={nu}, got {m}")));
                }
            }
        }
        if self.command == Command::Counterexample {
            let d = self.counterexample.d;
            if !(d > 0.25 && d < 0.5) {
                return Err(Error::validation("counterexample.d", format!("must be in (1/4, 1/2), got {d}")));
            }
        }
        if self.command == Command::Prop2 && !(self.prop2.j_fraction > 0.0 && self.prop2.j_fraction < 0.5) {
            return Err(Error::validation("prop2.j_fraction", "must be in (0, 1/2)"));
        }
        Ok(())
    }
}
