//! Monte Carlo studies of weighted periodogram sums.
//!
//! Replication `r` at sample size `n` draws its innovations from the stream
//! keyed by `(master_seed, r, salt = n)`, so results do not depend on the
//! order in which replications run or on the number of worker threads.
//! Per-replication statistics are collected in replication order and all
//! aggregation uses compensated sums.

mod normality;
mod studies;

pub use normality::{
    kolmogorov_pvalue, ks_standard_normal, normality_tests, qq_points, Moments, NormalityResult,
    MIN_SAMPLES,
};
pub use studies::{
    run_bartlett_bound_study, run_counterexample_study, run_dft_moment_decay_study, zeta_function,
    BoundRow, BoundStudy, CounterexampleSummary, JRule, KRule, DftMomentRow, DftMomentStudy,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{default_truncation, InnovationSpec, LinearProcessModel, ModelKind, Simulator};
use crate::qform::{
    apply_band, band_len, generate_weights_with, lindeberg_ratios, weight_constants,
    QuadFormReport, WeightConstants, WeightScheme,
};
use crate::rng::{StreamKey, StreamRole};
use crate::spectral::periodogram;

/// Replications below this are rejected.
pub const MIN_REPLICATIONS: usize = 100;
/// Sample sizes below this are rejected.
pub const MIN_SAMPLE_SIZE: usize = 64;
/// Lindeberg ratio above which a CLT study emits a warning.
pub const LINDEBERG_WARN: f64 = 0.2;

/// Statistic summarized by a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `(S_{n,X} - sum b) / q_n`.
    StdS,
    /// `(Q_{n,X} - sum b f) / v_n`.
    StdQ,
    /// `R_n = S_{n,X} - S_{n,zeta}`.
    Residual,
    /// `S_{n,X} - sum b`.
    BiasS,
    /// `Q_{n,X} - sum b f`.
    BiasQ,
    /// `S_{n,zeta}`.
    SZeta,
}

impl Statistic {
    pub fn value(&self, r: &QuadFormReport) -> f64 {
        match self {
            Statistic::StdS => r.standardized_s,
            Statistic::StdQ => r.standardized_q,
            Statistic::Residual => r.residual,
            Statistic::BiasS => r.s_x - r.constants.sum_b,
            Statistic::BiasQ => r.q_x - r.constants.sum_bf,
            Statistic::SZeta => r.s_zeta,
        }
    }

    /// Reference variance used for `var_ratio`.
    pub fn reference_variance(&self, c: &WeightConstants) -> f64 {
        match self {
            Statistic::StdS | Statistic::StdQ => 1.0,
            Statistic::BiasQ => c.v_n_sq,
            Statistic::Residual | Statistic::BiasS | Statistic::SZeta => c.q_n_sq,
        }
    }

    fn uses_f_weights(&self) -> bool {
        matches!(self, Statistic::StdQ | Statistic::BiasQ)
    }
}

/// Configuration of a Monte Carlo study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCStudyConfig {
    pub model: ModelKind,
    /// MA truncation lag; `max(100 n, 2^17)` per sample size when absent.
    pub truncation: Option<usize>,
    pub innovation: InnovationSpec,
    pub scheme: WeightScheme,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub statistic: Statistic,
    pub include_nyquist: bool,
    /// Zero weights above `j = floor(theta n)`.
    pub theta_band: Option<f64>,
}

impl MCStudyConfig {
    pub fn new(model: ModelKind, scheme: WeightScheme, n_grid: Vec<usize>, replications: usize) -> Self {
        Self {
            model,
            truncation: None,
            innovation: InnovationSpec::gaussian(),
            scheme,
            n_grid,
            replications,
            master_seed: 1,
            statistic: Statistic::StdS,
            include_nyquist: false,
            theta_band: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::validation(
                "replications",
                format!("must be at least {MIN_REPLICATIONS}, got {}", self.replications),
            ));
        }
        if self.n_grid.is_empty() {
            return Err(Error::validation("n_grid", "must not be empty"));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < MIN_SAMPLE_SIZE) {
            return Err(Error::validation(
                "n_grid",
                format!("sample size {n} is below {MIN_SAMPLE_SIZE}"),
            ));
        }
        if let Some(t) = self.theta_band {
            if !(t > 0.0 && t <= 0.5) {
                return Err(Error::validation("theta_band", format!("{t} outside (0, 1/2]")));
            }
        }
        Ok(())
    }

    fn model_for(&self, n: usize) -> Result<LinearProcessModel> {
        LinearProcessModel::new(
            self.model.clone(),
            self.truncation.unwrap_or_else(|| default_truncation(n)),
        )
    }
}

/// Weights, model densities and constants at one sample size.
#[derive(Debug, Clone)]
pub struct SizeSetup {
    pub n: usize,
    pub weights: Vec<f64>,
    pub f_vals: Vec<f64>,
    pub constants: WeightConstants,
    pub lindeberg_plain: f64,
    pub lindeberg_f: f64,
}

impl SizeSetup {
    pub fn new(config: &MCStudyConfig, model: &LinearProcessModel, n: usize) -> Result<Self> {
        let mut weights = generate_weights_with(&config.scheme, n, config.include_nyquist)?;
        if let Some(theta) = config.theta_band {
            apply_band(&mut weights, n, theta);
        }
        let f_vals = model.spectral_density_at_fourier(n, band_len(n, config.include_nyquist))?;
        let constants = weight_constants(&weights, &f_vals, &config.innovation, n)?;
        let (lindeberg_plain, lindeberg_f) = lindeberg_ratios(&weights, &f_vals)?;
        Ok(Self {
            n,
            weights,
            f_vals,
            constants,
            lindeberg_plain,
            lindeberg_f,
        })
    }
}

/// All replications at one sample size, in replication order.
#[derive(Debug, Clone)]
pub struct SizeRun {
    pub setup: SizeSetup,
    pub reports: Vec<QuadFormReport>,
}

impl SizeRun {
    pub fn values(&self, statistic: Statistic) -> Vec<f64> {
        self.reports.iter().map(|r| statistic.value(r)).collect()
    }
}

/// Stream key of replication `rep` at sample size `n`.
pub fn replication_key(master_seed: u64, rep: usize, n: usize) -> StreamKey {
    StreamKey::new(master_seed, rep as u64, StreamRole::Innovations).with_salt(n as u64)
}

fn replicate(
    sim: &Simulator,
    setup: &SizeSetup,
    config: &MCStudyConfig,
) -> Result<Vec<QuadFormReport>> {
    (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let path = sim.path(&config.innovation, replication_key(config.master_seed, rep, setup.n));
            let px = periodogram(&path.values)?;
            let pz = periodogram(path.in_sample_innovations()?)?;
            QuadFormReport::with_constants(&px, &pz, &setup.f_vals, &setup.weights, setup.constants)
        })
        .collect()
}

/// Simulates every replication at every sample size of the grid.
pub fn simulate_study(config: &MCStudyConfig) -> Result<Vec<SizeRun>> {
    config.validate()?;
    config
        .n_grid
        .iter()
        .map(|&n| {
            let model = config.model_for(n)?;
            let setup = SizeSetup::new(config, &model, n)?;
            let sim = Simulator::new(&model, n)?;
            let reports = replicate(&sim, &setup, config)?;
            Ok(SizeRun { setup, reports })
        })
        .collect()
}

/// Empirical moments of `S_{n,zeta}` against `E = sum b`, `Var = q_n^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub expected_mean: f64,
    pub expected_variance: f64,
    pub mean: f64,
    pub se_mean: f64,
    pub variance: f64,
    pub se_variance: f64,
    /// Both moments within 3 standard errors.
    pub holds: bool,
}

impl IdentityCheck {
    fn new(m: &Moments, c: &WeightConstants) -> Self {
        Self {
            expected_mean: c.sum_b,
            expected_variance: c.q_n_sq,
            mean: m.mean,
            se_mean: m.se_mean,
            variance: m.variance,
            se_variance: m.se_variance,
            holds: m.mean_within(c.sum_b, 3.0) && m.variance_within(c.q_n_sq, 3.0),
        }
    }
}

/// Summary at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub constants: WeightConstants,
    pub lindeberg_ratio: f64,
    pub lindeberg_ratio_f: f64,
    /// Moments of the chosen statistic.
    pub moments: Moments,
    pub ks_stat: f64,
    pub ks_pvalue: f64,
    pub var_ratio: f64,
    /// Monte Carlo estimate of `E R_n^2`.
    pub residual_msq: f64,
    pub residual_msq_se: f64,
    pub residual: Moments,
    pub innovation_sum: IdentityCheck,
}

/// One row of the per-replication detail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub n: usize,
    pub rep: usize,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCStudySummary {
    pub statistic: Statistic,
    pub replications: usize,
    pub master_seed: u64,
    pub per_n: Vec<SizeSummary>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub detail: Vec<DetailRow>,
}

impl MCStudySummary {
    pub fn at(&self, n: usize) -> Option<&SizeSummary> {
        self.per_n.iter().find(|s| s.n == n)
    }

    /// `n` and the statistic of each replication, for QQ plots and tests.
    pub fn values_at(&self, n: usize) -> Vec<f64> {
        self.detail.iter().filter(|r| r.n == n).map(|r| r.statistic).collect()
    }
}

/// Summarizes one size.
pub fn summarize_size(run: &SizeRun, statistic: Statistic) -> Result<SizeSummary> {
    let values = run.values(statistic);
    let moments = Moments::of(&values);
    let normality = normality_tests(&values)?;
    let residuals = run.values(Statistic::Residual);
    let squares: Vec<f64> = residuals.iter().map(|r| r * r).collect();
    let sq = Moments::of(&squares);
    let c = run.setup.constants;
    Ok(SizeSummary {
        n: run.setup.n,
        constants: c,
        lindeberg_ratio: run.setup.lindeberg_plain,
        lindeberg_ratio_f: run.setup.lindeberg_f,
        moments,
        ks_stat: normality.ks_stat,
        ks_pvalue: normality.ks_pvalue,
        var_ratio: moments.variance / statistic.reference_variance(&c),
        residual_msq: sq.mean,
        residual_msq_se: sq.se_mean,
        residual: Moments::of(&residuals),
        innovation_sum: IdentityCheck::new(&Moments::of(&run.values(Statistic::SZeta)), &c),
    })
}

/// Summarizes simulated runs for `statistic`.
pub fn summarize(config: &MCStudyConfig, runs: &[SizeRun], statistic: Statistic) -> Result<MCStudySummary> {
    let per_n = runs
        .iter()
        .map(|r| summarize_size(r, statistic))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    if let Some(last) = runs.iter().max_by_key(|r| r.setup.n) {
        let ratio = if statistic.uses_f_weights() {
            last.setup.lindeberg_f
        } else {
            last.setup.lindeberg_plain
        };
        if ratio >= LINDEBERG_WARN {
            warnings.push(format!(
                "weights are not uniformly negligible: max|b|/||b|| = {ratio:.4} at n = {}",
                last.setup.n
            ));
        }
    }
    let detail = runs
        .iter()
        .flat_map(|r| {
            r.reports.iter().enumerate().map(move |(i, rep)| DetailRow {
                n: r.setup.n,
                rep: i,
                statistic: statistic.value(rep),
            })
        })
        .collect();
    Ok(MCStudySummary {
        statistic,
        replications: config.replications,
        master_seed: config.master_seed,
        per_n,
        warnings,
        detail,
    })
}

/// Simulates and summarizes `config.statistic` at each `n`.
pub fn run_clt_study(config: &MCStudyConfig) -> Result<MCStudySummary> {
    let runs = simulate_study(config)?;
    summarize(config, &runs, config.statistic)
}

/// Checks `E S_{n,zeta} = sum b` and `Var S_{n,zeta} = q_n^2` on pure
/// innovation draws. The configured model only supplies `f` for the
/// `Q`-type statistics.
pub fn run_variance_identity_check(config: &MCStudyConfig) -> Result<MCStudySummary> {
    config.validate()?;
    let white = LinearProcessModel::white_noise();
    let runs = config
        .n_grid
        .iter()
        .map(|&n| {
            let model = config.model_for(n)?;
            let setup = SizeSetup::new(config, &model, n)?;
            let sim = Simulator::new(&white, n)?;
            let reports = replicate(&sim, &setup, config)?;
            Ok(SizeRun { setup, reports })
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(config, &runs, Statistic::SZeta)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
