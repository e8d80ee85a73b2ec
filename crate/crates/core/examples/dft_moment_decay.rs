//! Exact cross-moments of the DFT at pairs of Fourier frequencies, scaled by
//! their decay shape; bounded ratios across `n` confirm the rate.

use periodogram_sums::mc::{run_dft_moment_decay_study, JRule, KRule};
use periodogram_sums::{LinearProcessModel, ModelKind};

fn main() -> periodogram_sums::Result<()> {
    let model = LinearProcessModel::new(ModelKind::arfima(0.3), 1 << 16)?;
    let grid = [128, 256, 512, 1024];
    for (label, k) in [("diagonal", KRule::Diagonal), ("offset 3", KRule::Offset(3))] {
        let study = run_dft_moment_decay_study(&model, &grid, JRule::Fraction(0.125), k)?;
        println!("{label}: spread {:.3} bounded {}", study.spread, study.bounded);
        for r in &study.rows {
            println!("  n={:<5} j={:<4} k={:<4} ratio {:.4}", r.n, r.j, r.k, r.ratio);
        }
    }
    Ok(())
}
