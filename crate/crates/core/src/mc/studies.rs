//! Residual bound scaling, the non-negligible-weights counterexample and
//! exact DFT covariance decay.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    replication_key, simulate_study, summarize_size, MCStudyConfig, MCStudySummary, Moments,
    SizeRun, SizeSetup, SizeSummary, Statistic,
};
use crate::error::{Error, Result};
use crate::process::{default_truncation, InnovationSpec, LinearProcessModel, ModelKind, Simulator};
use crate::qform::{QuadFormReport, WeightScheme};
use crate::spectral::{exact_dft_cross_cov, fourier_frequency, periodogram};

/// Residual moments and fitted bound shapes at one sample size.
///
/// Bound columns are `C * shape(n)` with `C` fitted at the smallest `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    /// `E R_n^2`.
    pub residual_msq: f64,
    /// `C b_n^2 log^3 n`, bounding `E(R_n - E R_n)^2`.
    pub bound_bn2log3: f64,
    /// `C b_n B_n`, bounding `E(R_n - E R_n)^2`.
    #[serde(rename = "bound_bnBn")]
    pub bound_bn_bn: f64,
    /// `|E R_n|`.
    pub bias_abs: f64,
    /// `C b_n log^2 n`, bounding `|E R_n|`.
    pub bound_bnlog2: f64,
    pub residual_msq_se: f64,
    pub residual_var: f64,
    pub residual_var_se: f64,
    pub bias_se: f64,
    pub b_n: f64,
    #[serde(rename = "B_n")]
    pub norm_b: f64,
    /// `E R_n^2 / B_n^2`.
    pub msq_over_b2: f64,
    pub msq_over_b2_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStudy {
    pub rows: Vec<BoundRow>,
    pub c_bn2log3: f64,
    #[serde(rename = "c_bnBn")]
    pub c_bn_bn: f64,
    pub c_bnlog2: f64,
    /// `E R_n^2 / B_n^2` never increases by more than 2 combined SE.
    pub msq_ratio_nonincreasing: bool,
    /// `Var R_n <= C b_n B_n` within 2 combined SE at every larger `n`.
    pub bn_bn_holds: bool,
    pub bn2log3_holds: bool,
    pub bias_holds: bool,
}

fn within_fitted(vals: &[(f64, f64)], shapes: &[f64]) -> (f64, bool) {
    let (v0, se0) = vals[0];
    let c = v0 / shapes[0];
    let ok = vals.iter().zip(shapes).skip(1).all(|(&(v, se), s)| {
        let scale = s / shapes[0];
        v <= c * s + 2.0 * (se * se + scale * scale * se0 * se0).sqrt()
    });
    (c, ok)
}

/// Scaling of the residual `R_n` against its bound shapes.
pub fn run_bartlett_bound_study(config: &MCStudyConfig) -> Result<BoundStudy> {
    let mut grid = config.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    if grid.len() < 3 || grid[grid.len() - 1] < 10 * grid[0] {
        return Err(Error::domain(
            "bound study needs at least 3 sample sizes spanning a decade",
        ));
    }
    let mut config = config.clone();
    config.n_grid = grid;
    let runs = simulate_study(&config)?;

    let mut rows: Vec<BoundRow> = runs
        .iter()
        .map(|run| {
            let c = run.setup.constants;
            let res = Moments::of(&run.values(Statistic::Residual));
            let sq: Vec<f64> = run.values(Statistic::Residual).iter().map(|r| r * r).collect();
            let msq = Moments::of(&sq);
            let b2 = c.norm_b * c.norm_b;
            BoundRow {
                n: run.setup.n,
                residual_msq: msq.mean,
                bound_bn2log3: 0.0,
                bound_bn_bn: 0.0,
                bias_abs: res.mean.abs(),
                bound_bnlog2: 0.0,
                residual_msq_se: msq.se_mean,
                residual_var: res.variance,
                residual_var_se: res.se_variance,
                bias_se: res.se_mean,
                b_n: c.max_abs_b,
                norm_b: c.norm_b,
                msq_over_b2: msq.mean / b2,
                msq_over_b2_se: msq.se_mean / b2,
            }
        })
        .collect();

    let ln = |r: &BoundRow| (r.n as f64).ln();
    let shape_log3: Vec<f64> = rows.iter().map(|r| r.b_n * r.b_n * ln(r).powi(3)).collect();
    let shape_bb: Vec<f64> = rows.iter().map(|r| r.b_n * r.norm_b).collect();
    let shape_log2: Vec<f64> = rows.iter().map(|r| r.b_n * ln(r).powi(2)).collect();
    let vars: Vec<(f64, f64)> = rows.iter().map(|r| (r.residual_var, r.residual_var_se)).collect();
    let bias: Vec<(f64, f64)> = rows.iter().map(|r| (r.bias_abs, r.bias_se)).collect();
    let (c_log3, ok_log3) = within_fitted(&vars, &shape_log3);
    let (c_bb, ok_bb) = within_fitted(&vars, &shape_bb);
    let (c_log2, ok_bias) = within_fitted(&bias, &shape_log2);
    for (i, r) in rows.iter_mut().enumerate() {
        r.bound_bn2log3 = c_log3 * shape_log3[i];
        r.bound_bn_bn = c_bb * shape_bb[i];
        r.bound_bnlog2 = c_log2 * shape_log2[i];
    }
    let monotone = rows.windows(2).all(|w| {
        let se = (w[0].msq_over_b2_se.powi(2) + w[1].msq_over_b2_se.powi(2)).sqrt();
        w[1].msq_over_b2 <= w[0].msq_over_b2 + 2.0 * se
    });
    Ok(BoundStudy {
        rows,
        c_bn2log3: c_log3,
        c_bn_bn: c_bb,
        c_bnlog2: c_log2,
        msq_ratio_nonincreasing: monotone,
        bn_bn_holds: ok_bb,
        bn2log3_holds: ok_log3,
        bias_holds: ok_bias,
    })
}

/// Riemann zeta function for `s > 1` by Euler-Maclaurin summation.
pub fn zeta_function(s: f64) -> f64 {
    assert!(s > 1.0, "zeta(s) needs s > 1");
    const N: usize = 100;
    let nf = N as f64;
    let head: f64 = crate::sum::ksum((1..N).map(|j| (j as f64).powf(-s)));
    let t = nf.powf(-s);
    head + nf.powf(1.0 - s) / (s - 1.0) + t / 2.0 + s * t / (12.0 * nf)
        - s * (s + 1.0) * (s + 2.0) * t / (720.0 * nf.powi(3))
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * t / (30240.0 * nf.powi(5))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSummary {
    pub n: usize,
    pub d: f64,
    /// `(max|b| / ||b||)^2` of the counterexample weights at this `n`.
    pub lindeberg_ratio_sq: f64,
    /// `1 / zeta(4d)`, the `n -> infinity` value of the ratio above.
    pub lindeberg_limit_sq: f64,
    /// KS rejects normality of `S_{n,X}` at the 1% level.
    pub clt_rejected: bool,
    /// Same decision for uniform weights on the same paths.
    pub compliant_rejected: bool,
    pub summary: MCStudySummary,
    /// Uniform-weight statistic on the same paths.
    pub compliant: SizeSummary,
}

pub const COUNTEREXAMPLE_ALPHA: f64 = 0.01;

/// Weights `4 pi (2 pi j)^{-2d}` with `1/4 < d < 1/2` on Gaussian ARFIMA(0, d, 0)
/// paths. The uniform-weight statistic is computed on the same paths.
pub fn run_counterexample_study(
    n: usize,
    d: f64,
    replications: usize,
    seed: u64,
) -> Result<CounterexampleSummary> {
    if !(d > 0.25 && d < 0.5) {
        return Err(Error::domain(format!("d = {d} outside (1/4, 1/2)")));
    }
    let mut config = MCStudyConfig::new(
        ModelKind::arfima(d),
        WeightScheme::Counterexample { d },
        vec![n],
        replications,
    );
    config.innovation = InnovationSpec::gaussian();
    config.master_seed = seed;
    config.validate()?;
    let mut uniform = config.clone();
    uniform.scheme = WeightScheme::Uniform;

    let model = LinearProcessModel::new(config.model.clone(), default_truncation(n))?;
    let cx = SizeSetup::new(&config, &model, n)?;
    let un = SizeSetup::new(&uniform, &model, n)?;
    let sim = Simulator::new(&model, n)?;
    let pairs = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let path = sim.path(&config.innovation, replication_key(seed, rep, n));
            let px = periodogram(&path.values)?;
            let pz = periodogram(path.in_sample_innovations()?)?;
            let a = QuadFormReport::with_constants(&px, &pz, &cx.f_vals, &cx.weights, cx.constants)?;
            let b = QuadFormReport::with_constants(&px, &pz, &un.f_vals, &un.weights, un.constants)?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ra, rb): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let lindeberg_ratio_sq = cx.lindeberg_plain.powi(2);
    let cx_run = SizeRun { setup: cx, reports: ra };
    let un_run = SizeRun { setup: un, reports: rb };
    let summary = super::summarize(&config, std::slice::from_ref(&cx_run), Statistic::StdS)?;
    let compliant = summarize_size(&un_run, Statistic::StdS)?;
    Ok(CounterexampleSummary {
        n,
        d,
        lindeberg_ratio_sq,
        lindeberg_limit_sq: 1.0 / zeta_function(4.0 * d),
        clt_rejected: summary.per_n[0].ks_pvalue < COUNTEREXAMPLE_ALPHA,
        compliant_rejected: compliant.ks_pvalue < COUNTEREXAMPLE_ALPHA,
        summary,
        compliant,
    })
}

/// First frequency index at each `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum JRule {
    /// `j = max(1, floor(c n))`.
    Fraction(f64),
    Fixed(usize),
}

/// Second frequency index given `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum KRule {
    Diagonal,
    /// `k = j + offset`.
    Offset(i64),
    Fixed(usize),
}

impl JRule {
    fn index(&self, n: usize) -> usize {
        match self {
            JRule::Fraction(c) => ((c * n as f64).floor() as usize).max(1),
            JRule::Fixed(j) => *j,
        }
    }
}

impl KRule {
    fn index(&self, j: usize) -> Result<usize> {
        match self {
            KRule::Diagonal => Ok(j),
            KRule::Offset(o) => usize::try_from(j as i64 + o)
                .map_err(|_| Error::domain(format!("k = j + {o} is negative"))),
            KRule::Fixed(k) => Ok(*k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DftMomentRow {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    /// `|E|w_j|^2 - f_j|` on the diagonal, `|E w_j conj(w_k)|` off it.
    pub numerator: f64,
    /// `u_j^{-2d} j^{-1} log(1+j)`, or `(u_k^{-2d} + u_j^{-2d}) j^{-1} log j`
    /// with `j` the larger index.
    pub shape: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DftMomentStudy {
    pub rows: Vec<DftMomentRow>,
    /// `max ratio / min ratio`; 1 when every numerator vanishes.
    pub spread: f64,
    pub bounded: bool,
}

/// Numerators below this count as exact zeros.
const ZERO_TOL: f64 = 1e-14;
pub const DECAY_SPREAD_MAX: f64 = 10.0;

/// Exact second moments of the DFT against their decay shapes.
pub fn run_dft_moment_decay_study(
    model: &LinearProcessModel,
    n_grid: &[usize],
    j_rule: JRule,
    k_rule: KRule,
) -> Result<DftMomentStudy> {
    let alpha = 2.0 * model.memory();
    let a = model.support();
    let rows = n_grid
        .iter()
        .map(|&n| {
            let nu = (n / 2).saturating_sub(1);
            let j = j_rule.index(n);
            let k = k_rule.index(j)?;
            if j < 1 || j > nu || k < 1 || k > nu {
                return Err(Error::domain(format!("indices ({j}, {k}) outside 1..={nu} at n = {n}")));
            }
            let e = exact_dft_cross_cov(a, a, n, j, k)?;
            let (hi, lo) = (j.max(k), j.min(k));
            let (numerator, shape) = if j == k {
                let f = model.spectral_density(fourier_frequency(j, n))?;
                let jf = j as f64;
                (
                    (e.re - f).abs(),
                    fourier_frequency(j, n).powf(-alpha) * (1.0 + jf).ln() / jf,
                )
            } else {
                let hf = hi as f64;
                (
                    e.norm(),
                    (fourier_frequency(lo, n).powf(-alpha) + fourier_frequency(hi, n).powf(-alpha))
                        * hf.ln()
                        / hf,
                )
            };
            Ok(DftMomentRow {
                n,
                j,
                k,
                numerator,
                shape,
                ratio: numerator / shape,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (spread, bounded) = if rows.iter().all(|r| r.numerator <= ZERO_TOL) {
        (1.0, true)
    } else {
        let max = rows.iter().fold(0.0f64, |m, r| m.max(r.ratio));
        let min = rows.iter().fold(f64::INFINITY, |m, r| m.min(r.ratio));
        let s = max / min;
        (s, s < DECAY_SPREAD_MAX)
    };
    Ok(DftMomentStudy { rows, spread, bounded })
}
