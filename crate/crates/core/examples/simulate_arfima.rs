//! Simulates an ARFIMA(1, d, 0) path and compares its sample variance with
//! the variance of the truncated moving-average representation.

use periodogram_sums::{simulate, InnovationSpec, LinearProcessModel, ModelKind};

fn main() -> periodogram_sums::Result<()> {
    let n = 4096;
    let kind = ModelKind::Arfima { d: 0.3, ar: vec![0.5], ma: vec![] };
    let model = LinearProcessModel::with_default_truncation(kind, n)?;
    let path = simulate(&model, &InnovationSpec::gaussian(), n, 42)?;

    let mean = path.values.iter().sum::<f64>() / n as f64;
    let var = path.values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    println!("model      {}", model.kind().label());
    println!("truncation {}", model.truncation());
    println!("Var X      {:.4} (model) vs {var:.4} (sample)", model.variance());
    println!("first ten  {:?}", &path.values[..10]);
    Ok(())
}
