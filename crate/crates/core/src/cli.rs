//! Command-line driver.
//!
//! Each command writes a JSON summary carrying `schema_version` and the fully
//! resolved configuration, plus CSV detail, into the output directory, and
//! prints one summary line. Exit codes: 0 success, 2 invalid configuration,
//! 3 runtime failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{from_toml, Command, ExperimentConfig};
use crate::error::{Error, Result};
use crate::io::{write_json, write_rows};
use crate::mc::{
    run_bartlett_bound_study, run_clt_study, run_counterexample_study, run_dft_moment_decay_study,
    run_variance_identity_check, with_threads, JRule, KRule, MCStudyConfig, Moments, Statistic,
};
use crate::plotdata::{emit_bound_plotdata, emit_plotdata};
use crate::process::{default_truncation, simulate, LinearProcessModel, ModelKind};
use crate::qform::{
    apply_band, band_len, frobenius_norm_sq, generate_weights_with, lindeberg_ratios,
    spectral_norm, spectral_norm_bound, toeplitz_form, QuadFormReport,
};
use crate::spectral::{fourier_frequency, periodogram};
use crate::whittle::{default_bandwidth, estimate_d};

pub const SCHEMA_VERSION: u32 = 1;
pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
/// Level at which the `mc` command reports `clt_rejected`.
pub const CLT_ALPHA: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "pgsum", version, about = "Weighted periodogram sums of linear processes")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads. Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Simulate one path and write its values.
    Simulate(Overrides),
    /// Weighted sums, constants and Toeplitz norms of one path.
    Qform(Overrides),
    /// Monte Carlo study of the configured statistic.
    Mc(Overrides),
    /// Residual scaling against its bound shapes.
    Bounds(Overrides),
    /// Non-negligible weights on long-memory paths.
    Counterexample(Overrides),
    /// Local Whittle estimate of d.
    Whittle(Overrides),
    /// Exact DFT second moments against their decay shape.
    Prop2(Overrides),
}

#[derive(Debug, Args, Clone, Default)]
pub struct Overrides {
    /// Sample size.
    #[arg(short, long)]
    pub n: Option<usize>,
    /// Monte Carlo replications.
    #[arg(short, long)]
    pub replications: Option<usize>,
    /// Memory parameter: ARFIMA(0, d, 0), or the counterexample d.
    #[arg(short, long, allow_hyphen_values = true)]
    pub d: Option<f64>,
}

impl Sub {
    fn split(&self) -> (Command, &Overrides) {
        match self {
            Sub::Simulate(o) => (Command::Simulate, o),
            Sub::Qform(o) => (Command::Qform, o),
            Sub::Mc(o) => (Command::Mc, o),
            Sub::Bounds(o) => (Command::Bounds, o),
            Sub::Counterexample(o) => (Command::Counterexample, o),
            Sub::Whittle(o) => (Command::Whittle, o),
            Sub::Prop2(o) => (Command::Prop2, o),
        }
    }
}

impl Cli {
    /// Loads the config file if any and applies command-line overrides.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    Error::validation("--config", format!("cannot read {}: {e}", p.display()))
                })?;
                from_toml(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let (command, o) = self.command.split();
        config.command = command;
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(dir) = &self.out {
            config.output.dir = dir.clone();
        }
        if let Some(n) = o.n {
            config.n = n;
        }
        if let Some(r) = o.replications {
            config.replications = r;
        }
        if let Some(d) = o.d {
            if command == Command::Counterexample {
                config.counterexample.d = d;
            } else {
                match &mut config.model {
                    ModelKind::Arfima { d: md, .. } | ModelKind::FractionalOfShortMemory { d: md, .. } => *md = d,
                    other => *other = ModelKind::arfima(d),
                }
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation { .. } | Error::Parse { .. } => EXIT_INVALID,
        _ => EXIT_RUNTIME,
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let config = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    run(&config, cli.threads)
}

/// Runs a validated configuration, printing the summary line or the error.
pub fn run(config: &ExperimentConfig, threads: Option<usize>) -> i32 {
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    match execute(config, threads) {
        Ok(line) => {
            println!("{line}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'static str,
    config: &'a ExperimentConfig,
    result: T,
}

fn write_envelope<T: Serialize>(dir: &Path, config: &ExperimentConfig, result: T) -> Result<PathBuf> {
    let path = dir.join(format!("{}.json", config.command.name()));
    let mut resolved = config.clone();
    resolved.n_grid = Some(config.resolved_grid());
    if config.command == Command::Whittle && resolved.whittle.m.is_none() {
        resolved.whittle.m = Some(default_bandwidth(config.n));
    }
    write_json(
        &path,
        &Envelope {
            schema_version: SCHEMA_VERSION,
            command: config.command.name(),
            config: &resolved,
            result,
        },
    )?;
    Ok(path)
}

fn model_at(config: &ExperimentConfig, n: usize) -> Result<LinearProcessModel> {
    LinearProcessModel::new(
        config.model.clone(),
        config.truncation.unwrap_or_else(|| default_truncation(n)),
    )
}

fn study_config(config: &ExperimentConfig) -> MCStudyConfig {
    MCStudyConfig {
        model: config.model.clone(),
        truncation: config.truncation,
        innovation: config.innovation_spec(),
        scheme: config.weights.clone(),
        n_grid: config.resolved_grid(),
        replications: config.replications,
        master_seed: config.seed,
        statistic: config.statistic,
        include_nyquist: config.include_nyquist,
        theta_band: config.theta_band,
    }
}

/// Runs the command, writes its artifacts and returns the summary line.
pub fn execute(config: &ExperimentConfig, threads: Option<usize>) -> Result<String> {
    let dir = config.output.dir.as_path();
    std::fs::create_dir_all(dir)?;
    match config.command {
        Command::Simulate => cmd_simulate(config, dir),
        Command::Qform => cmd_qform(config, dir),
        Command::Mc => with_threads(threads, || cmd_mc(config, dir))?,
        Command::Bounds => with_threads(threads, || cmd_bounds(config, dir))?,
        Command::Counterexample => with_threads(threads, || cmd_counterexample(config, dir))?,
        Command::Whittle => cmd_whittle(config, dir),
        Command::Prop2 => cmd_prop2(config, dir),
    }
}

#[derive(Serialize)]
struct SimRow {
    t: usize,
    x: f64,
}

fn cmd_simulate(config: &ExperimentConfig, dir: &Path) -> Result<String> {
    let model = model_at(config, config.n)?;
    let path = simulate(&model, &config.innovation_spec(), config.n, config.seed)?;
    let rows: Vec<SimRow> = path
        .values
        .iter()
        .enumerate()
        .map(|(i, &x)| SimRow { t: i + 1, x })
        .collect();
    let csv = dir.join("simulate.csv");
    write_rows(&csv, &rows)?;
    let m = Moments::of(&path.values);
    #[derive(Serialize)]
    struct Out {
        model: String,
        n: usize,
        truncation: usize,
        process_variance: f64,
        sample_mean: f64,
        sample_variance: f64,
    }
    write_envelope(
        dir,
        config,
        Out {
            model: path.model_id.clone(),
            n: config.n,
            truncation: model.truncation(),
            process_variance: model.variance(),
            sample_mean: m.mean,
            sample_variance: m.variance,
        },
    )?;
    Ok(format!(
        "simulate: {} n={} seed={} mean={:.4} var={:.4} (model {:.4}) -> {}",
        path.model_id,
        config.n,
        config.seed,
        m.mean,
        m.variance,
        model.variance(),
        csv.display()
    ))
}

#[derive(Serialize)]
struct FreqRow {
    j: usize,
    u: f64,
    b: f64,
    f: f64,
    i_x: f64,
    i_zeta: f64,
}

fn cmd_qform(config: &ExperimentConfig, dir: &Path) -> Result<String> {
    let n = config.n;
    let model = model_at(config, n)?;
    let innovation = config.innovation_spec();
    let path = simulate(&model, &innovation, n, config.seed)?;
    let mut weights = generate_weights_with(&config.weights, n, config.include_nyquist)?;
    if let Some(t) = config.theta_band {
        apply_band(&mut weights, n, t);
    }
    let f_vals = model.spectral_density_at_fourier(n, band_len(n, config.include_nyquist))?;
    let report = QuadFormReport::compute(&path, &f_vals, &weights, &innovation)?;
    let (lindeberg, lindeberg_f) = lindeberg_ratios(&weights, &f_vals)?;
    let form = toeplitz_form(&weights, n)?;
    let frob = frobenius_norm_sq(&form);
    let sp = spectral_norm(&form, 1e-10)?;
    let px = periodogram(&path.values)?;
    let pz = periodogram(path.in_sample_innovations()?)?;
    let rows: Vec<FreqRow> = (0..weights.len())
        .map(|i| FreqRow {
            j: i + 1,
            u: fourier_frequency(i + 1, n),
            b: weights[i],
            f: f_vals[i],
            i_x: px.ordinates[i + 1],
            i_zeta: pz.ordinates[i + 1],
        })
        .collect();
    let csv = dir.join("qform.csv");
    write_rows(&csv, &rows)?;
    #[derive(Serialize)]
    struct Out {
        report: QuadFormReport,
        lindeberg_ratio: f64,
        lindeberg_ratio_f: f64,
        toeplitz_frobenius_sq: f64,
        toeplitz_spectral_norm: f64,
        toeplitz_spectral_bound: f64,
    }
    write_envelope(
        dir,
        config,
        Out {
            report,
            lindeberg_ratio: lindeberg,
            lindeberg_ratio_f: lindeberg_f,
            toeplitz_frobenius_sq: frob,
            toeplitz_spectral_norm: sp,
            toeplitz_spectral_bound: spectral_norm_bound(&weights),
        },
    )?;
    Ok(format!(
        "qform: {} {} n={} S_nX={:.6} S_nZeta={:.6} R_n={:.3e} std_S={:.4} std_Q={:.4} -> {}",
        path.model_id,
        config.weights.describe(),
        n,
        report.s_x,
        report.s_zeta,
        report.residual,
        report.standardized_s,
        report.standardized_q,
        csv.display()
    ))
}

fn cmd_mc(config: &ExperimentConfig, dir: &Path) -> Result<String> {
    let study = study_config(config);
    let summary = if config.statistic == Statistic::SZeta {
        run_variance_identity_check(&study)?
    } else {
        run_clt_study(&study)?
    };
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    emit_plotdata(&summary, dir, "mc")?;
    let clt_rejected = summary.per_n.iter().any(|s| s.ks_pvalue < CLT_ALPHA);
    #[derive(Serialize)]
    struct Out<'a> {
        clt_rejected: bool,
        summary: &'a crate::mc::MCStudySummary,
    }
    write_envelope(
        dir,
        config,
        Out {
            clt_rejected,
            summary: &summary,
        },
    )?;
    let last = summary.per_n.last().expect("grid is non-empty");
    Ok(format!(
        "mc: {:?} n={} R={} mean={:.4} var_ratio={:.4} skew={:.4} ks_p={:.4} clt_rejected={} -> {}",
        summary.statistic,
        last.n,
        summary.replications,
        last.moments.mean,
        last.var_ratio,
        last.moments.skewness,
        last.ks_pvalue,
        clt_rejected,
        dir.join("mc_detail.csv").display()
    ))
}

fn cmd_bounds(config: &ExperimentConfig, dir: &Path) -> Result<String> {
    let study = run_bartlett_bound_study(&study_config(config))?;
    let csv = dir.join("bounds.csv");
    write_rows(&csv, &study.rows)?;
    emit_bound_plotdata(&study, dir, "bounds")?;
    write_envelope(dir, config, &study)?;
    Ok(format!(
        "bounds: n={:?} msq/B^2 nonincreasing={} var<=C b_n B_n={} var<=C b_n^2 log^3 n={} |bias|<=C b_n log^2 n={} -> {}",
        study.rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        study.msq_ratio_nonincreasing,
        study.bn_bn_holds,
        study.bn2log3_holds,
        study.bias_holds,
        csv.display()
    ))
}

fn cmd_counterexample(config: &ExperimentConfig, dir: &Path) -> Result<String> {
    let d = config.counterexample.d;
    let s = run_counterexample_study(config.n, d, config.replications, config.seed)?;
    emit_plotdata(&s.summary, dir, "counterexample")?;
    write_envelope(dir, config, &s)?;
    Ok(format!(
        "counterexample: d={} n={} R={} ks_p={:.3e} clt_rejected={} uniform ks_p={:.4} lindeberg^2={:.5} (limit {:.5}) -> {}",
        d,
        config.n,
        config.replications,
        s.summary.per_n[0].ks_pvalue,
        s.clt_rejected,
        s.compliant.ks_pvalue,
        s.lindeberg_ratio_sq,
        s.lindeberg_limit_sq,
        dir.join("counterexample_detail.csv").display()
    ))
}

#[derive(Serialize)]
struct ObjectiveRow {
    d: f64,
    objective: f64,
}

fn cmd_whittle(config: &ExperimentConfig, dir: &Path) -> Result<String> {
    let n = config.n;
    let model = model_at(config, n)?;
    let path = simulate(&model, &config.innovation_spec(), n, config.seed)?;
    let m = config.whittle.m.unwrap_or_else(|| default_bandwidth(n));
    let r = estimate_d(&path.values, m)?;
    let csv = dir.join("whittle_objective.csv");
    let rows: Vec<ObjectiveRow> = r
        .objective_curve
        .iter()
        .map(|&(d, objective)| ObjectiveRow { d, objective })
        .collect();
    write_rows(&csv, &rows)?;
    write_envelope(dir, config, &r)?;
    Ok(format!(
        "whittle: {} n={} m={} d_hat={:.4} (se {:.4}, true {}) -> {}",
        path.model_id,
        n,
        m,
        r.d_hat,
        r.std_error,
        model.memory(),
        csv.display()
    ))
}

fn cmd_prop2(config: &ExperimentConfig, dir: &Path) -> Result<String> {
    let grid = config.resolved_grid();
    let n_max = grid.iter().copied().max().expect("grid is non-empty");
    let model = model_at(config, n_max)?;
    let k_rule = match config.prop2.k_offset {
        0 => KRule::Diagonal,
        o => KRule::Offset(o),
    };
    let study = run_dft_moment_decay_study(&model, &grid, JRule::Fraction(config.prop2.j_fraction), k_rule)?;
    let csv = dir.join("prop2.csv");
    write_rows(&csv, &study.rows)?;
    write_envelope(dir, config, &study)?;
    Ok(format!(
        "prop2: {} n={:?} spread={:.3} bounded={} -> {}",
        model.kind().label(),
        grid,
        study.spread,
        study.bounded,
        csv.display()
    ))
}
