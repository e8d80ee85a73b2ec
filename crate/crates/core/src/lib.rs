//! Weighted sums of periodograms of linear processes: simulation, exact
//! spectral quantities, quadratic-form statistics, Monte Carlo studies and
//! local Whittle estimation.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod mc;
pub mod plotdata;
pub mod process;
pub mod qform;
pub mod rng;
pub mod spectral;
pub mod sum;
pub mod whittle;

pub use config::{parse_config, ExperimentConfig};
pub use error::{Error, Result};
pub use mc::{MCStudyConfig, MCStudySummary, Statistic};
pub use process::{
    simulate, InnovationFamily, InnovationSpec, LinearProcessModel, ModelKind, SamplePath,
    Simulator,
};
pub use qform::{QuadFormReport, WeightConstants, WeightScheme};
pub use rng::{StreamKey, StreamRole};
pub use spectral::{periodogram, Periodogram};
