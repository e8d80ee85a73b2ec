//! Local Whittle estimation of the memory parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{fourier_frequency, periodogram, Periodogram};
use crate::sum::ksum;

/// Search interval for `d`.
pub const D_MIN: f64 = -0.49;
pub const D_MAX: f64 = 0.49;

const COARSE_STEPS: usize = 98;
const FINE_STEPS: usize = 980;
const GOLDEN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhittleResult {
    pub d_hat: f64,
    pub m: usize,
    /// Objective on the coarse evaluation grid.
    pub objective_curve: Vec<(f64, f64)>,
    /// `1 / (2 sqrt m)`.
    pub std_error: f64,
}

/// Default bandwidth `floor(n^0.65)`.
pub fn default_bandwidth(n: usize) -> usize {
    (n as f64).powf(0.65).floor() as usize
}

/// Centred log weights `log(j/m) - m^{-1} sum_k log(k/m)`, `j = 1..=m`.
pub fn lw_weights(n: usize, m: usize) -> Result<Vec<f64>> {
    let nu = (n / 2).saturating_sub(1);
    if m == 0 || m > nu {
        return Err(Error::domain(format!("bandwidth m = {m} outside 1..={nu}")));
    }
    let mf = m as f64;
    let logs: Vec<f64> = (1..=m).map(|j| (j as f64 / mf).ln()).collect();
    let mean = ksum(logs.iter().copied()) / mf;
    Ok(logs.iter().map(|l| l - mean).collect())
}

/// Concentrated objective
/// `R(d) = log(m^{-1} sum_j u_j^{2d} I_j) - 2d m^{-1} sum_j log u_j`.
pub fn lw_objective(d: f64, periodogram: &Periodogram, m: usize) -> Result<f64> {
    if !(d.abs() < 0.5) {
        return Err(Error::domain(format!("d = {d} outside (-1/2, 1/2)")));
    }
    let n = periodogram.n();
    let nu = n / 2 - 1;
    if m == 0 || m > nu {
        return Err(Error::domain(format!("bandwidth m = {m} outside 1..={nu}")));
    }
    Objective::new(periodogram, m).map(|o| o.eval(d))
}

/// Ordinates are stored divided by their mean; the search runs on the
/// normalized objective, which differs from `R(d)` by `log_scale`.
struct Objective {
    log_u: Vec<f64>,
    ordinates: Vec<f64>,
    mean_log_u: f64,
    log_scale: f64,
}

impl Objective {
    fn new(p: &Periodogram, m: usize) -> Result<Self> {
        let raw = p.band(m);
        if let Some(j) = raw.iter().position(|&i| !(i > 0.0)) {
            return Err(Error::DegeneratePeriodogram { index: j + 1 });
        }
        let scale = ksum(raw.iter().copied()) / m as f64;
        let log_u: Vec<f64> = (1..=m).map(|j| fourier_frequency(j, p.n()).ln()).collect();
        let mean_log_u = ksum(log_u.iter().copied()) / m as f64;
        Ok(Self {
            log_u,
            ordinates: raw.iter().map(|i| i / scale).collect(),
            mean_log_u,
            log_scale: scale.ln(),
        })
    }

    fn normalized(&self, d: f64) -> f64 {
        let m = self.ordinates.len() as f64;
        let s = ksum(
            self.ordinates
                .iter()
                .zip(&self.log_u)
                .map(|(i, lu)| (2.0 * d * lu).exp() * i),
        );
        (s / m).ln() - 2.0 * d * self.mean_log_u
    }

    fn eval(&self, d: f64) -> f64 {
        self.normalized(d) + self.log_scale
    }
}

fn grid(steps: usize) -> impl Iterator<Item = f64> {
    (0..=steps).map(move |i| D_MIN + (D_MAX - D_MIN) * i as f64 / steps as f64)
}

fn argmin(vals: &[(f64, f64)]) -> usize {
    vals.iter()
        .enumerate()
        .fold(0, |best, (i, v)| if v.1 < vals[best].1 { i } else { best })
}

fn is_unimodal(vals: &[(f64, f64)], at: usize) -> bool {
    vals[..=at].windows(2).all(|w| w[1].1 <= w[0].1) && vals[at..].windows(2).all(|w| w[1].1 >= w[0].1)
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Local Whittle estimate from the `m` lowest Fourier frequencies.
pub fn estimate_d(series: &[f64], m: usize) -> Result<WhittleResult> {
    let p = periodogram(series)?;
    estimate_d_from(&p, m)
}

pub fn estimate_d_from(p: &Periodogram, m: usize) -> Result<WhittleResult> {
    let nu = p.n() / 2 - 1;
    if m < 8 || m > nu {
        return Err(Error::domain(format!("bandwidth m = {m} outside 8..={nu}")));
    }
    let obj = Objective::new(p, m)?;
    let coarse: Vec<(f64, f64)> = grid(COARSE_STEPS).map(|d| (d, obj.normalized(d))).collect();
    let i = argmin(&coarse);
    let (vals, at) = if is_unimodal(&coarse, i) {
        (coarse.clone(), i)
    } else {
        let fine: Vec<(f64, f64)> = grid(FINE_STEPS).map(|d| (d, obj.normalized(d))).collect();
        let at = argmin(&fine);
        (fine, at)
    };
    let lo = vals[at.saturating_sub(1)].0;
    let hi = vals[(at + 1).min(vals.len() - 1)].0;
    let d_hat = golden_section(|d| obj.normalized(d), lo, hi, GOLDEN_TOL);
    Ok(WhittleResult {
        d_hat,
        m,
        objective_curve: coarse.into_iter().map(|(d, v)| (d, v + obj.log_scale)).collect(),
        std_error: 1.0 / (2.0 * (m as f64).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{sample_innovations, InnovationSpec};
    use approx::assert_relative_eq;

    #[test]
    fn single_weight_is_zero() {
        assert_eq!(lw_weights(64, 1).unwrap(), vec![0.0]);
    }

    #[test]
    fn weights_sum_to_zero() {
        for m in [2usize, 7, 100, 1000] {
            let w = lw_weights(4096, m).unwrap();
            assert!(ksum(w.iter().copied()).abs() < 1e-10);
        }
        assert!(lw_weights(64, 32).is_err());
        assert!(lw_weights(64, 0).is_err());
    }

    #[test]
    fn weights_energy_riemann_limit() {
        // sum nu_j^2 / m -> int_0^1 (log x + 1)^2 dx = 1
        let w = lw_weights(1 << 14, 1000).unwrap();
        let e = ksum(w.iter().map(|x| x * x)) / 1000.0;
        assert!((e - 1.0).abs() < 0.05, "{e}");
    }

    #[test]
    fn weights_negligibility_decreases() {
        let mut prev = f64::INFINITY;
        for p in 5..=14 {
            let m = 1usize << p;
            let w = lw_weights(1 << 16, m).unwrap();
            let max = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let ratio = max / ksum(w.iter().map(|x| x * x)).sqrt();
            let shape = (m as f64).ln() / (m as f64).sqrt();
            assert!(ratio <= 1.5 * shape, "m={m}: {ratio} vs {shape}");
            assert!(ratio < prev);
            prev = ratio;
        }
    }

    #[test]
    fn objective_convex_and_scale_shift() {
        let x = sample_innovations(&InnovationSpec::gaussian(), 2048, 5);
        let p = periodogram(&x).unwrap();
        let m = default_bandwidth(2048);
        let vals: Vec<f64> = grid(98).map(|d| lw_objective(d, &p, m).unwrap()).collect();
        for w in vals.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12);
        }
        let lambda: f64 = 3.7;
        let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        let ps = periodogram(&xs).unwrap();
        for d in [-0.3, 0.0, 0.25] {
            let shift = lw_objective(d, &ps, m).unwrap() - lw_objective(d, &p, m).unwrap();
            assert_relative_eq!(shift, 2.0 * lambda.ln(), max_relative = 1e-10);
        }
    }

    #[test]
    fn estimate_is_scale_invariant() {
        let x = sample_innovations(&InnovationSpec::gaussian(), 1024, 8);
        let m = default_bandwidth(1024);
        let base = estimate_d(&x, m).unwrap().d_hat;
        for lambda in [0.25, 8.0, 1024.0] {
            let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
            assert_eq!(estimate_d(&xs, m).unwrap().d_hat, base);
        }
        let xs: Vec<f64> = x.iter().map(|v| v * 3.7).collect();
        assert!((estimate_d(&xs, m).unwrap().d_hat - base).abs() < GOLDEN_TOL);
    }

    #[test]
    fn degenerate_periodogram() {
        let x = vec![1.0; 256];
        let p = periodogram(&x).unwrap();
        let mut p0 = p.clone();
        p0.ordinates.iter_mut().for_each(|v| *v = 1.0);
        p0.ordinates[3] = 0.0;
        assert!(matches!(lw_objective(0.1, &p0, 10), Err(Error::DegeneratePeriodogram { index: 3 })));
        assert!(matches!(estimate_d_from(&p0, 10), Err(Error::DegeneratePeriodogram { .. })));
    }

    #[test]
    fn estimate_on_white_noise_is_near_zero() {
        let x = sample_innovations(&InnovationSpec::gaussian(), 8192, 21);
        let m = default_bandwidth(8192);
        let r = estimate_d(&x, m).unwrap();
        assert!(r.d_hat.abs() < 0.1, "{}", r.d_hat);
        assert!(r.d_hat > D_MIN && r.d_hat < D_MAX);
        assert_relative_eq!(r.std_error, 0.5 / (m as f64).sqrt());
        let i = argmin(&r.objective_curve);
        assert!((r.objective_curve[i].0 - r.d_hat).abs() <= 0.01 + 1e-9);
    }

    #[test]
    fn bandwidth_bounds() {
        let x = sample_innovations(&InnovationSpec::gaussian(), 64, 1);
        assert!(estimate_d(&x, 7).is_err());
        assert!(estimate_d(&x, 32).is_err());
        assert!(estimate_d(&x, 31).is_ok());
    }
}
