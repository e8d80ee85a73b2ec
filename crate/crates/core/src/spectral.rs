//! Fourier grid, DFT, periodogram and exact DFT cross-covariances.
//!
//! The DFT follows the sign convention `w_j = (2 pi n)^{-1/2} sum_{k=1}^n
//! e^{i u_j k} X_k`, with `u_j = 2 pi j / n`. Only `j = 0..=floor(n/2)` is
//! stored; the remaining ordinates are conjugate mirrors.

use std::f64::consts::PI;

use num_complex::Complex64;
use realfft::RealFftPlanner;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// `u_j = 2 pi j / n`, returning exactly `pi` at `j = n/2`.
pub fn fourier_frequency(j: usize, n: usize) -> f64 {
    if 2 * j == n {
        PI
    } else {
        2.0 * PI * j as f64 / n as f64
    }
}

/// Fourier frequencies of a length-`n` sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierGrid {
    pub n: usize,
    /// `floor(n/2) - 1`, the default upper summation index.
    pub nu: usize,
    /// `u_0..u_{floor(n/2)}`.
    pub frequencies: Vec<f64>,
}

pub fn fourier_grid(n: usize) -> Result<FourierGrid> {
    check_len(n)?;
    Ok(FourierGrid {
        n,
        nu: n / 2 - 1,
        frequencies: (0..=n / 2).map(|j| fourier_frequency(j, n)).collect(),
    })
}

fn check_len(n: usize) -> Result<()> {
    if n < 8 {
        return Err(Error::domain(format!("sample size n = {n} must be at least 8")));
    }
    Ok(())
}

/// DFT ordinates `w_0..w_{floor(n/2)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DftVector {
    pub coefficients: Vec<Complex64>,
    pub source_n: usize,
}

/// Periodogram ordinates `I_0..I_{floor(n/2)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub ordinates: Vec<f64>,
    pub source_n: usize,
}

impl Periodogram {
    pub fn n(&self) -> usize {
        self.source_n
    }

    /// `I_1..I_count`.
    pub fn band(&self, count: usize) -> &[f64] {
        &self.ordinates[1..=count]
    }

    /// Writes `(j, u_j, I_j)` rows with a header.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(out);
        w.write_record(["j", "u_j", "I_j"])?;
        for (j, i) in self.ordinates.iter().enumerate() {
            w.serialize((j, fourier_frequency(j, self.source_n), i))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `sum_{k=1}^n e^{i u_j k} X_k` for all `j = 0..n-1`, unnormalized.
fn full_dft_sums(series: &[f64]) -> Vec<Complex64> {
    let n = series.len();
    let mut buf: Vec<Complex64> = series.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    // FftDirection::Inverse computes sum_m x_m e^{+2 pi i j m / n}, m = 0..n-1;
    // shifting to k = m + 1 multiplies by e^{i u_j}.
    let fft = FftPlanner::new().plan_fft(n, FftDirection::Inverse);
    fft.process(&mut buf);
    for (j, w) in buf.iter_mut().enumerate() {
        *w *= Complex64::from_polar(1.0, fourier_frequency(j, n));
    }
    buf
}

pub fn dft(series: &[f64]) -> Result<DftVector> {
    let n = series.len();
    check_len(n)?;
    // a real input has conjugate-symmetric DFT, so only half is needed
    let mut input = series.to_vec();
    let r2c = RealFftPlanner::<f64>::new().plan_fft_forward(n);
    let mut spec = r2c.make_output_vec();
    r2c.process(&mut input, &mut spec)
        .expect("buffer sizes match plan");
    let scale = 1.0 / (2.0 * PI * n as f64).sqrt();
    let coefficients = spec
        .iter()
        .enumerate()
        .map(|(j, s)| s.conj() * Complex64::from_polar(scale, fourier_frequency(j, n)))
        .collect();
    Ok(DftVector {
        coefficients,
        source_n: n,
    })
}

pub fn periodogram(series: &[f64]) -> Result<Periodogram> {
    let w = dft(series)?;
    Ok(Periodogram {
        ordinates: w.coefficients.iter().map(|c| c.norm_sqr()).collect(),
        source_n: w.source_n,
    })
}

/// `I_0..I_{n-1}` over the whole grid.
pub fn full_periodogram(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    check_len(n)?;
    let scale = 1.0 / (2.0 * PI * n as f64);
    Ok(full_dft_sums(series)
        .iter()
        .map(|c| c.norm_sqr() * scale)
        .collect())
}

/// Direct `O(n^2)` DFT; reference for [`dft`].
pub fn dft_direct(series: &[f64]) -> DftVector {
    let n = series.len();
    let scale = 1.0 / (2.0 * PI * n as f64).sqrt();
    let coefficients = (0..=n / 2)
        .map(|j| {
            let mut re = CompensatedSum::new();
            let mut im = CompensatedSum::new();
            for (k, x) in series.iter().enumerate() {
                // reduce the phase mod n to keep the argument small
                let phase = fourier_frequency((j * (k + 1)) % n, n);
                re.add(x * phase.cos());
                im.add(x * phase.sin());
            }
            Complex64::new(re.value(), im.value()) * scale
        })
        .collect();
    DftVector {
        coefficients,
        source_n: n,
    }
}

/// Cross-covariances `gamma_XY(m) = E[X_{t+m} Y_t] = sum_l a_{l+m} b_l` for
/// `m = -(n-1)..=(n-1)`, returned with index `m + n - 1`.
pub fn cross_autocovariance(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let a = trim(a);
    let b = trim(b);
    let lag = |x: &[f64], y: &[f64], m: usize| -> f64 {
        if m >= x.len() {
            return 0.0;
        }
        let len = (x.len() - m).min(y.len());
        let mut s = CompensatedSum::new();
        for l in 0..len {
            s.add(x[l + m] * y[l]);
        }
        s.value()
    };
    let mut out = vec![0.0; 2 * n - 1];
    for m in 0..n {
        out[n - 1 + m] = lag(a, b, m);
        if m > 0 {
            // E[X_{t-m} Y_t] = sum_l a_l b_{l+m}
            out[n - 1 - m] = lag(b, a, m);
        }
    }
    out
}

fn trim(c: &[f64]) -> &[f64] {
    let last = c.iter().rposition(|&x| x != 0.0).unwrap_or(0);
    &c[..=last]
}

fn check_indices(n: usize, j: usize, k: usize) -> Result<()> {
    check_len(n)?;
    if j > n / 2 || k > n / 2 {
        return Err(Error::domain(format!(
            "frequency indices ({j}, {k}) outside 0..={}",
            n / 2
        )));
    }
    Ok(())
}

/// Reference `O(n^2)` double sum
/// `(2 pi n)^{-1} sum_{t,s=1}^n e^{i(u_j t - u_k s)} gamma_XY(t - s)`.
pub fn dft_cross_cov_reference(gamma: &[f64], n: usize, j: usize, k: usize) -> Complex64 {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for t in 1..=n {
        for s in 1..=n {
            let g = gamma[t + n - 1 - s];
            let phase = fourier_frequency((j * t) % n, n) - fourier_frequency((k * s) % n, n);
            re.add(g * phase.cos());
            im.add(g * phase.sin());
        }
    }
    Complex64::new(re.value(), im.value()) / (2.0 * PI * n as f64)
}

/// Lag-structured evaluation of the same double sum: for each lag `m` the
/// inner sum over `s` is a geometric series with a closed form.
pub fn dft_cross_cov_fast(gamma: &[f64], n: usize, j: usize, k: usize) -> Complex64 {
    let diff = (j + n - k) % n;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for idx in 0..(2 * n - 1) {
        let g = gamma[idx];
        if g == 0.0 {
            continue;
        }
        let m = idx as isize - (n as isize - 1);
        // s ranges over max(1, 1-m)..=min(n, n-m)
        let s0 = 1.max(1 - m) as usize;
        let count = n - m.unsigned_abs();
        let inner = if diff == 0 {
            Complex64::new(count as f64, 0.0)
        } else {
            let theta = fourier_frequency(diff, n);
            let start = Complex64::from_polar(1.0, fourier_frequency((diff * s0) % n, n));
            let ratio = Complex64::from_polar(1.0, theta);
            let end = Complex64::from_polar(1.0, fourier_frequency((diff * count) % n, n));
            start * (Complex64::new(1.0, 0.0) - end) / (Complex64::new(1.0, 0.0) - ratio)
        };
        let m_mod = m.rem_euclid(n as isize) as usize;
        let term = g * Complex64::from_polar(1.0, fourier_frequency((j * m_mod) % n, n)) * inner;
        re.add(term.re);
        im.add(term.im);
    }
    Complex64::new(re.value(), im.value()) / (2.0 * PI * n as f64)
}

/// Above this `n` the lag-structured path is used.
pub const CROSS_COV_DIRECT_MAX: usize = 512;

/// `E[w_{X,j} conj(w_{Y,k})]` for `X = sum a_l zeta_{t-l}` and
/// `Y = sum b_l zeta_{t-l}` driven by the same unit-variance noise.
pub fn exact_dft_cross_cov(
    coeffs_x: &[f64],
    coeffs_y: &[f64],
    n: usize,
    j: usize,
    k: usize,
) -> Result<Complex64> {
    check_indices(n, j, k)?;
    if coeffs_x.is_empty() || coeffs_y.is_empty() {
        return Err(Error::domain("coefficient sequences must be non-empty"));
    }
    let gamma = cross_autocovariance(coeffs_x, coeffs_y, n);
    Ok(if n > CROSS_COV_DIRECT_MAX {
        dft_cross_cov_fast(&gamma, n, j, k)
    } else {
        dft_cross_cov_reference(&gamma, n, j, k)
    })
}
