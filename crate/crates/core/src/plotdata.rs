//! Tidy CSV output for external plotting.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::io::write_rows;
use crate::mc::{qq_points, BoundStudy, MCStudySummary};

/// Probability points of QQ output.
pub const QQ_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QqRow {
    pub n: usize,
    pub theoretical_quantile: f64,
    pub empirical_quantile: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongRow {
    pub n: usize,
    pub quantity: &'static str,
    pub value: f64,
}

/// `(n, rep, statistic)` rows.
pub fn write_detail(path: impl AsRef<Path>, summary: &MCStudySummary) -> Result<()> {
    write_rows(path, &summary.detail)
}

/// Normal QQ rows at [`QQ_POINTS`] probabilities for each `n`.
pub fn qq_rows(summary: &MCStudySummary) -> Vec<QqRow> {
    summary
        .per_n
        .iter()
        .flat_map(|s| {
            qq_points(&summary.values_at(s.n), QQ_POINTS)
                .into_iter()
                .map(move |(t, e)| QqRow {
                    n: s.n,
                    theoretical_quantile: t,
                    empirical_quantile: e,
                })
        })
        .collect()
}

/// `(n, quantity, value)` rows of a bound study.
pub fn bound_rows(study: &BoundStudy) -> Vec<LongRow> {
    study
        .rows
        .iter()
        .flat_map(|r| {
            [
                ("residual_msq", r.residual_msq),
                ("residual_var", r.residual_var),
                ("bias_abs", r.bias_abs),
                ("bound_bn2log3", r.bound_bn2log3),
                ("bound_bnBn", r.bound_bn_bn),
                ("bound_bnlog2", r.bound_bnlog2),
                ("msq_over_b2", r.msq_over_b2),
            ]
            .into_iter()
            .map(|(quantity, value)| LongRow { n: r.n, quantity, value })
        })
        .collect()
}

/// Writes `<prefix>_detail.csv` and `<prefix>_qq.csv` into `dir`.
pub fn emit_plotdata(summary: &MCStudySummary, dir: impl AsRef<Path>, prefix: &str) -> Result<()> {
    let dir = dir.as_ref();
    write_detail(dir.join(format!("{prefix}_detail.csv")), summary)?;
    write_rows(dir.join(format!("{prefix}_qq.csv")), &qq_rows(summary))
}

/// Writes `<prefix>_long.csv` into `dir`.
pub fn emit_bound_plotdata(study: &BoundStudy, dir: impl AsRef<Path>, prefix: &str) -> Result<()> {
    write_rows(dir.as_ref().join(format!("{prefix}_long.csv")), &bound_rows(study))
}
