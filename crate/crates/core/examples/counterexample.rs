//! Weights that concentrate on the lowest frequencies break asymptotic
//! normality; uniform weights on the same paths do not.

use periodogram_sums::mc::run_counterexample_study;

fn main() -> periodogram_sums::Result<()> {
    let s = run_counterexample_study(2048, 0.35, 1000, 9)?;
    let cx = &s.summary.per_n[0];
    println!("(b_n/B_n)^2 {:.4} at n = {}, limit {:.4}", s.lindeberg_ratio_sq, s.n, s.lindeberg_limit_sq);
    println!(
        "counterexample weights: skew {:+.3} KS p {:.2e} rejected {}",
        cx.moments.skewness, cx.ks_pvalue, s.clt_rejected
    );
    println!(
        "uniform weights:        skew {:+.3} KS p {:.2e} rejected {}",
        s.compliant.moments.skewness, s.compliant.ks_pvalue, s.compliant_rejected
    );
    Ok(())
}
