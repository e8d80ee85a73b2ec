//! Monte Carlo distribution of the standardized weighted sum for a long-memory
//! process, with a KS test of normality at each sample size.

use periodogram_sums::mc::{run_clt_study, with_threads};
use periodogram_sums::{MCStudyConfig, ModelKind, Statistic, WeightScheme};

fn main() -> periodogram_sums::Result<()> {
    let mut config = MCStudyConfig::new(
        ModelKind::arfima(-0.2),
        WeightScheme::Indicator { y: 1.5 },
        vec![256, 1024],
        400,
    );
    config.statistic = Statistic::StdS;
    config.master_seed = 2024;
    let summary = with_threads(None, || run_clt_study(&config))??;
    for s in &summary.per_n {
        println!(
            "n={:<5} mean {:+.3} var {:.3} skew {:+.3} KS p {:.3}  b_n/B_n {:.3}",
            s.n, s.moments.mean, s.moments.variance, s.moments.skewness, s.ks_pvalue, s.lindeberg_ratio
        );
    }
    for w in &summary.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
