//! Local Whittle estimates of the memory parameter over a few replications.

use periodogram_sums::whittle::{default_bandwidth, estimate_d};
use periodogram_sums::{simulate, InnovationSpec, LinearProcessModel, ModelKind};

fn main() -> periodogram_sums::Result<()> {
    let n = 4096;
    let m = default_bandwidth(n);
    for d in [-0.3, 0.0, 0.2, 0.4] {
        let model = LinearProcessModel::with_default_truncation(ModelKind::arfima(d), n)?;
        let estimates = (0..5)
            .map(|seed| {
                let x = simulate(&model, &InnovationSpec::gaussian(), n, seed)?.values;
                Ok(estimate_d(&x, m)?.d_hat)
            })
            .collect::<periodogram_sums::Result<Vec<_>>>()?;
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        println!("d = {d:+.2}  m = {m}  mean d_hat {mean:+.3}  {estimates:.3?}");
    }
    Ok(())
}
