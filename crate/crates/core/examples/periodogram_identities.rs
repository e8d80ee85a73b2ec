//! Checks the FFT periodogram against the direct DFT, Parseval's identity and
//! invariance of the nonzero-frequency ordinates under a mean shift.

use periodogram_sums::spectral::{dft, dft_direct, full_periodogram};
use periodogram_sums::{periodogram, simulate, InnovationSpec, LinearProcessModel};

fn main() -> periodogram_sums::Result<()> {
    let n = 500;
    let x = simulate(&LinearProcessModel::white_noise(), &InnovationSpec::gaussian(), n, 7)?.values;

    let fast = dft(&x)?;
    let direct = dft_direct(&x);
    let err = fast
        .coefficients
        .iter()
        .zip(&direct.coefficients)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("max |FFT - direct DFT|      {err:.2e}");

    // sum_{j=0}^{n-1} I(u_j) = (2 pi)^{-1} sum_t X_t^2
    let full = full_periodogram(&x)?;
    let energy = x.iter().map(|v| v * v).sum::<f64>() / (2.0 * std::f64::consts::PI);
    println!("Parseval relative error     {:.2e}", (full.iter().sum::<f64>() - energy).abs() / energy);

    let shifted: Vec<f64> = x.iter().map(|v| v + 3.5).collect();
    let (p, q) = (periodogram(&x)?, periodogram(&shifted)?);
    let band = p.ordinates.len() - 1;
    let shift = p.band(band).iter().zip(q.band(band)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max change under mean shift {shift:.2e} over j = 1..{band}");
    Ok(())
}
