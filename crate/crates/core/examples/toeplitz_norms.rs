//! Frobenius and spectral norms of the Toeplitz matrix behind a weighted
//! innovation sum, against `B_n^2 / 2` and `b_n / sqrt 2`.

use periodogram_sums::qform::{
    frobenius_norm_sq, generate_weights, spectral_norm, spectral_norm_bound, toeplitz_form,
};
use periodogram_sums::WeightScheme;

fn main() -> periodogram_sums::Result<()> {
    let n = 1024;
    for scheme in [
        WeightScheme::Uniform,
        WeightScheme::Cosine { k: 5 },
        WeightScheme::Counterexample { d: 0.35 },
        WeightScheme::LocalWhittle { m: 90 },
    ] {
        let w = generate_weights(&scheme, n)?;
        let form = toeplitz_form(&w, n)?;
        let half_b2 = w.iter().map(|b| b * b).sum::<f64>() / 2.0;
        println!(
            "{:<24} |C|_F^2 {:>11.5} (B^2/2 {:>11.5})  |C|_sp {:>8.5} <= {:>8.5}",
            scheme.describe(),
            frobenius_norm_sq(&form),
            half_b2,
            spectral_norm(&form, 1e-10)?,
            spectral_norm_bound(&w)
        );
    }
    Ok(())
}
