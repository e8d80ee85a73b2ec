//! Computes every weighted periodogram statistic for one ARFIMA path under
//! several weight schemes.

use periodogram_sums::qform::generate_weights;
use periodogram_sums::{
    simulate, InnovationSpec, LinearProcessModel, ModelKind, QuadFormReport, WeightScheme,
};

fn main() -> periodogram_sums::Result<()> {
    let n = 2048;
    let innovation = InnovationSpec::gaussian();
    let model = LinearProcessModel::with_default_truncation(ModelKind::arfima(0.2), n)?;
    let path = simulate(&model, &innovation, n, 3)?;
    let schemes = [
        WeightScheme::Uniform,
        WeightScheme::Indicator { y: 1.0 },
        WeightScheme::Cosine { k: 2 },
        WeightScheme::KernelAt { u0: 0.8, bandwidth: None },
        WeightScheme::LocalWhittle { m: 120 },
    ];
    println!("{:<28} {:>12} {:>12} {:>10} {:>9} {:>9}", "scheme", "S_nX", "S_nZeta", "R_n", "std S", "std Q");
    for scheme in schemes {
        let weights = generate_weights(&scheme, n)?;
        let f = model.spectral_density_at_fourier(n, weights.len())?;
        let r = QuadFormReport::compute(&path, &f, &weights, &innovation)?;
        println!(
            "{:<28} {:>12.4} {:>12.4} {:>10.4} {:>9.3} {:>9.3}",
            scheme.describe(),
            r.s_x,
            r.s_zeta,
            r.residual,
            r.standardized_s,
            r.standardized_q
        );
    }
    Ok(())
}
