//! Mean square of the gap between the process and innovation sums as `n`
//! grows, next to its fitted rate bounds.

use periodogram_sums::mc::run_bartlett_bound_study;
use periodogram_sums::{MCStudyConfig, ModelKind, WeightScheme};

fn main() -> periodogram_sums::Result<()> {
    let config = MCStudyConfig::new(
        ModelKind::arfima(0.25),
        WeightScheme::Uniform,
        vec![128, 512, 2048],
        200,
    );
    let study = run_bartlett_bound_study(&config)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>10}", "n", "E R^2", "b^2 log^3", "b B", "|E R|");
    for r in &study.rows {
        println!(
            "{:>6} {:>12.4} {:>12.4} {:>12.4} {:>10.4}",
            r.n, r.residual_msq, r.bound_bn2log3, r.bound_bn_bn, r.bias_abs
        );
    }
    println!(
        "bounds hold: b^2 log^3 {}, b B {}, bias {}",
        study.bn2log3_holds, study.bn_bn_holds, study.bias_holds
    );
    Ok(())
}
