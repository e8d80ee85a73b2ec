//! Weighted sums of periodograms.
//!
//! For weights `b_{n,j}`, `j = 1..=nu` with `nu = floor(n/2) - 1`:
//!
//! * `S_{n,X}    = sum b_j I_{X,j} / f_{X,j}`
//! * `S_{n,zeta} = sum b_j 2 pi I_{zeta,j}`
//! * `Q_{n,X}    = sum b_j I_{X,j}`
//! * `Q_{n,zeta} = sum b_j f_{X,j} 2 pi I_{zeta,j}`
//! * `R_n        = S_{n,X} - S_{n,zeta}`
//!
//! `S_{n,zeta}` is also the quadratic form `zeta' C_n zeta` with the symmetric
//! Toeplitz matrix `C_n = (c_n(t-s))`, `c_n(t) = n^{-1} sum_j b_j cos(t u_j)`,
//! which satisfies `||C_n||^2 = B_n^2 / 2` and `||C_n||_sp <= b_n / sqrt 2`.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{InnovationSpec, SamplePath};
use crate::rng::{StreamKey, StreamRole};
use crate::spectral::{fourier_frequency, periodogram, Periodogram};
use crate::sum::{ksum, CompensatedSum};

/// Rule producing the weights `b_{n,j}` for any `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightScheme {
    Uniform,
    /// `b_j = 1{u_j <= y}`.
    Indicator { y: f64 },
    /// `b_j = cos(k u_j)`.
    Cosine { k: usize },
    /// Epanechnikov kernel estimate of `f_X(u0)`: `b_j = K((u_j - u0)/h) / (n h)`,
    /// `h = n^{-1/5}` unless given.
    KernelAt {
        u0: f64,
        #[serde(default)]
        bandwidth: Option<f64>,
    },
    /// Local Whittle weights on `j <= m`, zero beyond.
    LocalWhittle { m: usize },
    /// `b_j = 4 pi (2 pi j)^{-2d}`, violating uniform negligibility for `d > 1/4`.
    Counterexample { d: f64 },
    Custom { values: Vec<f64> },
}

impl WeightScheme {
    pub fn describe(&self) -> String {
        match self {
            WeightScheme::Uniform => "uniform".into(),
            WeightScheme::Indicator { y } => format!("indicator(u <= {y})"),
            WeightScheme::Cosine { k } => format!("cosine(lag {k})"),
            WeightScheme::KernelAt { u0, bandwidth } => match bandwidth {
                Some(h) => format!("epanechnikov kernel at {u0}, h = {h}"),
                None => format!("epanechnikov kernel at {u0}, h = n^-1/5"),
            },
            WeightScheme::LocalWhittle { m } => format!("local whittle (m = {m})"),
            WeightScheme::Counterexample { d } => format!("non-negligible weights (d = {d})"),
            WeightScheme::Custom { values } => format!("custom ({} values)", values.len()),
        }
    }

    /// Reads a custom scheme from a one-column CSV file.
    pub fn custom_from_csv(path: impl AsRef<Path>) -> Result<Self> {
        Ok(WeightScheme::Custom {
            values: crate::io::read_column(path)?,
        })
    }
}

/// Number of summed frequencies: `floor(n/2) - 1`, or `floor(n/2)` with the
/// Nyquist ordinate included.
pub fn band_len(n: usize, include_nyquist: bool) -> usize {
    if include_nyquist {
        n / 2
    } else {
        n / 2 - 1
    }
}

/// `b_{n,1..nu}` for the default range.
pub fn generate_weights(scheme: &WeightScheme, n: usize) -> Result<Vec<f64>> {
    generate_weights_with(scheme, n, false)
}

pub fn generate_weights_with(
    scheme: &WeightScheme,
    n: usize,
    include_nyquist: bool,
) -> Result<Vec<f64>> {
    if n < 8 {
        return Err(Error::domain(format!("sample size n = {n} must be at least 8")));
    }
    let len = band_len(n, include_nyquist);
    let u = |j: usize| fourier_frequency(j, n);
    let w = match scheme {
        WeightScheme::Uniform => vec![1.0; len],
        WeightScheme::Indicator { y } => {
            if !(*y > 0.0 && *y <= PI) {
                return Err(Error::domain(format!("indicator threshold {y} outside (0, pi]")));
            }
            (1..=len).map(|j| if u(j) <= *y { 1.0 } else { 0.0 }).collect()
        }
        WeightScheme::Cosine { k } => (1..=len).map(|j| (*k as f64 * u(j)).cos()).collect(),
        WeightScheme::KernelAt { u0, bandwidth } => {
            if !(*u0 >= 0.0 && *u0 <= PI) {
                return Err(Error::domain(format!("kernel centre {u0} outside [0, pi]")));
            }
            let h = bandwidth.unwrap_or_else(|| (n as f64).powf(-0.2));
            if !(h > 0.0) {
                return Err(Error::domain(format!("bandwidth {h} must be positive")));
            }
            let nh = n as f64 * h;
            (1..=len)
                .map(|j| {
                    let x = (u(j) - u0) / h;
                    if x.abs() < 1.0 {
                        0.75 * (1.0 - x * x) / nh
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        WeightScheme::LocalWhittle { m } => {
            let mut w = crate::whittle::lw_weights(n, *m)?;
            w.resize(len, 0.0);
            w
        }
        WeightScheme::Counterexample { d } => (1..=len)
            .map(|j| 4.0 * PI * (2.0 * PI * j as f64).powf(-2.0 * d))
            .collect(),
        WeightScheme::Custom { values } => {
            if values.len() != len {
                return Err(Error::domain(format!(
                    "custom weights have {} values, expected {len} for n = {n}",
                    values.len()
                )));
            }
            values.clone()
        }
    };
    Ok(w)
}

/// Zeroes weights above `j = floor(theta n)` (partial-band sums).
pub fn apply_band(weights: &mut [f64], n: usize, theta: f64) {
    let cut = (theta * n as f64).floor().max(0.0) as usize;
    for (i, w) in weights.iter_mut().enumerate() {
        if i + 1 > cut {
            *w = 0.0;
        }
    }
}

/// Deterministic constants of a weight array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConstants {
    /// `max_j |b_j|`.
    #[serde(rename = "b_n")]
    pub max_abs_b: f64,
    /// `(sum_j b_j^2)^{1/2}`.
    #[serde(rename = "B_n")]
    pub norm_b: f64,
    pub sum_b: f64,
    /// `B_n^2 + Cum_4 (sum b)^2 / n`, the exact variance of `S_{n,zeta}`.
    pub q_n_sq: f64,
    /// `max_j |b_j f_j|`.
    #[serde(rename = "b_fn")]
    pub max_abs_bf: f64,
    #[serde(rename = "B_fn")]
    pub norm_bf: f64,
    pub sum_bf: f64,
    /// `B_fn^2 + Cum_4 (sum b f)^2 / n`, the exact variance of `Q_{n,zeta}`.
    pub v_n_sq: f64,
}

impl WeightConstants {
    /// `min(1, Var(zeta^2)/2) B_n^2` and `(1 + |Cum_4|) B_n^2`.
    pub fn q_n_sq_bounds(&self, innovation: &InnovationSpec) -> (f64, f64) {
        let b2 = self.norm_b * self.norm_b;
        (
            (innovation.var_zeta_sq / 2.0).min(1.0) * b2,
            (1.0 + innovation.fourth_cumulant.abs()) * b2,
        )
    }
}

fn check_lengths(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::domain(format!("{what}: length mismatch ({a} vs {b})")));
    }
    Ok(())
}

pub fn weight_constants(
    weights: &[f64],
    f_vals: &[f64],
    innovation: &InnovationSpec,
    n: usize,
) -> Result<WeightConstants> {
    check_lengths(weights.len(), f_vals.len(), "weights and f values")?;
    let bf: Vec<f64> = weights.iter().zip(f_vals).map(|(b, f)| b * f).collect();
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sum_b = ksum(weights.iter().copied());
    let sum_bf = ksum(bf.iter().copied());
    let b2 = ksum(weights.iter().map(|b| b * b));
    let bf2 = ksum(bf.iter().map(|b| b * b));
    let nf = n as f64;
    Ok(WeightConstants {
        max_abs_b: max_abs(weights),
        norm_b: b2.sqrt(),
        sum_b,
        q_n_sq: b2 + innovation.fourth_cumulant * sum_b * sum_b / nf,
        max_abs_bf: max_abs(&bf),
        norm_bf: bf2.sqrt(),
        sum_bf,
        v_n_sq: bf2 + innovation.fourth_cumulant * sum_bf * sum_bf / nf,
    })
}

/// Uniform-negligibility ratios `(b_n / B_n, b_fn / B_fn)`.
pub fn lindeberg_ratios(weights: &[f64], f_vals: &[f64]) -> Result<(f64, f64)> {
    check_lengths(weights.len(), f_vals.len(), "weights and f values")?;
    if weights.iter().all(|&b| b == 0.0) {
        return Err(Error::DegenerateWeights);
    }
    let ratio = |v: &mut dyn Iterator<Item = f64>| {
        let (mut max, mut sq) = (0.0f64, CompensatedSum::new());
        for x in v {
            max = max.max(x.abs());
            sq.add(x * x);
        }
        max / sq.value().sqrt()
    };
    let plain = ratio(&mut weights.iter().copied());
    let with_f = ratio(&mut weights.iter().zip(f_vals).map(|(b, f)| b * f));
    Ok((plain, with_f))
}

fn check_positive(f_vals: &[f64]) -> Result<()> {
    if let Some(j) = f_vals.iter().position(|&f| !(f > 0.0)) {
        return Err(Error::domain(format!("f value at j = {} is not positive", j + 1)));
    }
    Ok(())
}

fn check_band(p: &Periodogram, len: usize) -> Result<()> {
    if len + 1 > p.ordinates.len() {
        return Err(Error::domain(format!(
            "{len} weights exceed the {} available ordinates",
            p.ordinates.len() - 1
        )));
    }
    Ok(())
}

/// `S_{n,X} = sum_j b_j I_j / f_j`.
pub fn s_n_x(periodogram: &Periodogram, f_vals: &[f64], weights: &[f64]) -> Result<f64> {
    check_lengths(weights.len(), f_vals.len(), "weights and f values")?;
    check_positive(f_vals)?;
    check_band(periodogram, weights.len())?;
    Ok(ksum(
        weights
            .iter()
            .zip(f_vals)
            .zip(periodogram.band(weights.len()))
            .map(|((b, f), i)| b * i / f),
    ))
}

/// `Q_{n,X} = sum_j b_j I_j`.
pub fn q_n_x(periodogram: &Periodogram, weights: &[f64]) -> Result<f64> {
    check_band(periodogram, weights.len())?;
    Ok(ksum(
        weights
            .iter()
            .zip(periodogram.band(weights.len()))
            .map(|(b, i)| b * i),
    ))
}

/// `S_{n,zeta} = 2 pi sum_j b_j I_{zeta,j}` for the in-sample innovations.
pub fn s_n_zeta(innovations: &[f64], weights: &[f64]) -> Result<f64> {
    let p = periodogram(innovations)?;
    s_n_zeta_from(&p, weights)
}

/// Spectral density of standardized white noise.
pub const INNOVATION_DENSITY: f64 = 1.0 / (2.0 * PI);

/// [`s_n_zeta`] from an already computed innovation periodogram. Evaluated as
/// `sum b_j I_j / f` with `f = 1/(2 pi)` so that `R_n` is exactly zero for
/// white noise.
pub fn s_n_zeta_from(innovation_periodogram: &Periodogram, weights: &[f64]) -> Result<f64> {
    check_band(innovation_periodogram, weights.len())?;
    Ok(ksum(
        weights
            .iter()
            .zip(innovation_periodogram.band(weights.len()))
            .map(|(b, i)| b * i / INNOVATION_DENSITY),
    ))
}

/// `Q_{n,zeta} = 2 pi sum_j b_j f_j I_{zeta,j}`.
pub fn q_n_zeta(innovations: &[f64], f_vals: &[f64], weights: &[f64]) -> Result<f64> {
    let p = periodogram(innovations)?;
    q_n_zeta_from(&p, f_vals, weights)
}

pub fn q_n_zeta_from(
    innovation_periodogram: &Periodogram,
    f_vals: &[f64],
    weights: &[f64],
) -> Result<f64> {
    check_lengths(weights.len(), f_vals.len(), "weights and f values")?;
    check_band(innovation_periodogram, weights.len())?;
    Ok(2.0
        * PI
        * ksum(
            weights
                .iter()
                .zip(f_vals)
                .zip(innovation_periodogram.band(weights.len()))
                .map(|((b, f), i)| b * f * i),
        ))
}

/// Bartlett residual `R_n = S_{n,X} - S_{n,zeta}` of a simulated path.
pub fn bartlett_residual(path: &SamplePath, f_vals: &[f64], weights: &[f64]) -> Result<f64> {
    let zeta = path.in_sample_innovations()?;
    let sx = s_n_x(&periodogram(&path.values)?, f_vals, weights)?;
    Ok(sx - s_n_zeta(zeta, weights)?)
}

/// All statistics of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadFormReport {
    #[serde(rename = "S_nX")]
    pub s_x: f64,
    #[serde(rename = "S_nZeta")]
    pub s_zeta: f64,
    #[serde(rename = "R_n")]
    pub residual: f64,
    #[serde(rename = "Q_nX")]
    pub q_x: f64,
    #[serde(rename = "Q_nZeta")]
    pub q_zeta: f64,
    pub constants: WeightConstants,
    /// `(S_{n,X} - sum b) / q_n`.
    pub standardized_s: f64,
    /// `(Q_{n,X} - sum b f) / v_n`.
    pub standardized_q: f64,
}

impl QuadFormReport {
    /// Computes every statistic for one path. Requires the innovation record.
    pub fn compute(
        path: &SamplePath,
        f_vals: &[f64],
        weights: &[f64],
        innovation: &InnovationSpec,
    ) -> Result<Self> {
        let zeta = path.in_sample_innovations()?;
        let px = periodogram(&path.values)?;
        let pz = periodogram(zeta)?;
        Self::from_periodograms(&px, &pz, f_vals, weights, innovation)
    }

    pub fn from_periodograms(
        px: &Periodogram,
        pz: &Periodogram,
        f_vals: &[f64],
        weights: &[f64],
        innovation: &InnovationSpec,
    ) -> Result<Self> {
        let constants = weight_constants(weights, f_vals, innovation, px.n())?;
        Self::with_constants(px, pz, f_vals, weights, constants)
    }

    pub fn with_constants(
        px: &Periodogram,
        pz: &Periodogram,
        f_vals: &[f64],
        weights: &[f64],
        constants: WeightConstants,
    ) -> Result<Self> {
        let s_x = s_n_x(px, f_vals, weights)?;
        let s_zeta = s_n_zeta_from(pz, weights)?;
        let q_x = q_n_x(px, weights)?;
        let q_zeta = q_n_zeta_from(pz, f_vals, weights)?;
        Ok(Self {
            s_x,
            s_zeta,
            residual: s_x - s_zeta,
            q_x,
            q_zeta,
            constants,
            standardized_s: (s_x - constants.sum_b) / constants.q_n_sq.sqrt(),
            standardized_q: (q_x - constants.sum_bf) / constants.v_n_sq.sqrt(),
        })
    }
}

/// Symmetric Toeplitz matrix `C_n = (c_n(t - s))`, stored by its first column.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzForm {
    /// `c_n(0..n-1)`.
    pub c: Vec<f64>,
    pub n: usize,
}

/// Above this size `c_n` is computed with an FFT.
pub const TOEPLITZ_DIRECT_MAX: usize = 512;

pub fn toeplitz_form(weights: &[f64], n: usize) -> Result<ToeplitzForm> {
    if n < 8 || weights.len() > n / 2 {
        return Err(Error::domain(format!(
            "{} weights do not fit a sample of size {n}",
            weights.len()
        )));
    }
    let nf = n as f64;
    let c = if n > TOEPLITZ_DIRECT_MAX {
        // c(t) = Re(n^{-1} sum_j b_j e^{i 2 pi j t / n})
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, b) in weights.iter().enumerate() {
            buf[j + 1] = Complex64::new(*b, 0.0);
        }
        FftPlanner::new()
            .plan_fft(n, FftDirection::Inverse)
            .process(&mut buf);
        buf.iter().map(|z| z.re / nf).collect()
    } else {
        toeplitz_direct(weights, n)
    };
    Ok(ToeplitzForm { c, n })
}

/// Direct evaluation of `c_n(t)`; reference for the FFT path.
pub fn toeplitz_direct(weights: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|t| {
            ksum(
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, b)| b * fourier_frequency((t * (j + 1)) % n, n).cos()),
            ) / n as f64
        })
        .collect()
}

impl ToeplitzForm {
    #[inline]
    pub fn entry(&self, t: usize, s: usize) -> f64 {
        self.c[t.abs_diff(s)]
    }

    /// `x' C_n x` by direct double sum.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let mut acc = CompensatedSum::new();
        for (t, xt) in x.iter().enumerate() {
            for (s, xs) in x.iter().enumerate() {
                acc.add(self.entry(t, s) * xt * xs);
            }
        }
        acc.value()
    }

    /// Dense `n x n` matrix, row-major.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.n;
        (0..n * n).map(|i| self.entry(i / n, i % n)).collect()
    }

    /// `C_n x` via circulant embedding (size `2n`).
    pub fn matvec(&self) -> ToeplitzMatVec {
        ToeplitzMatVec::new(self)
    }
}

/// Fast product with a fixed symmetric Toeplitz matrix.
pub struct ToeplitzMatVec {
    n: usize,
    eig: Vec<Complex64>,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl ToeplitzMatVec {
    fn new(form: &ToeplitzForm) -> Self {
        let n = form.n;
        let len = 2 * n;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        // first column of the circulant: c(0..n-1), 0, c(n-1..1)
        let mut col = vec![Complex64::new(0.0, 0.0); len];
        for t in 0..n {
            col[t] = Complex64::new(form.c[t], 0.0);
        }
        for t in 1..n {
            col[len - t] = Complex64::new(form.c[t], 0.0);
        }
        fwd.process(&mut col);
        Self { n, eig: col, fwd, inv }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let len = 2 * self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (b, v) in buf.iter_mut().zip(x) {
            b.re = *v;
        }
        self.fwd.process(&mut buf);
        for (b, e) in buf.iter_mut().zip(&self.eig) {
            *b *= e;
        }
        self.inv.process(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re / len as f64;
        }
    }
}

/// `||C_n||^2 = sum_{t,s} c_n(t-s)^2 = sum_{|t|<n} (n - |t|) c_n(t)^2`.
pub fn frobenius_norm_sq(form: &ToeplitzForm) -> f64 {
    let n = form.n;
    let mut acc = CompensatedSum::new();
    acc.add(n as f64 * form.c[0] * form.c[0]);
    for t in 1..n {
        acc.add(2.0 * (n - t) as f64 * form.c[t] * form.c[t]);
    }
    acc.value()
}

pub const LANCZOS_MAX_STEPS: usize = 600;

/// Largest absolute eigenvalue of `C_n` by Lanczos with full reorthogonalization.
///
/// Starts from a fixed pseudo-random vector and stops once both extreme Ritz
/// values have residual `beta_k |s_k|` below `tol` times the current estimate,
/// or the Krylov space is exhausted.
pub fn spectral_norm(form: &ToeplitzForm, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let n = form.n;
    if form.c.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let op = form.matvec();
    let mut rng = StreamKey::new(0x5eed, n as u64, StreamRole::Auxiliary).rng();
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut y = vec![0.0; n];
    let max_steps = n.min(LANCZOS_MAX_STEPS);
    for k in 1..=max_steps {
        op.apply(&q, &mut y);
        let a = dot(&q, &y);
        basis.push(std::mem::take(&mut q));
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let h = dot(v, &y);
                y.iter_mut().zip(v).for_each(|(yi, vi)| *yi -= h * vi);
            }
        }
        alpha.push(a);
        let b = ksum(y.iter().map(|v| v * v)).sqrt();
        let exhausted = k == max_steps && max_steps == n;
        if k % 8 == 0 || k == max_steps || b <= f64::EPSILON * a.abs().max(1.0) {
            let (estimate, residual) = extreme_ritz(&alpha, &beta, b);
            let invariant = b <= f64::EPSILON * estimate.max(1.0);
            if residual <= tol * estimate || invariant || exhausted {
                return Ok(estimate);
            }
        }
        if k == max_steps {
            break;
        }
        beta.push(b);
        q = y.iter().map(|v| v / b).collect();
    }
    Err(Error::NoConvergence { iterations: max_steps })
}

/// Max |Ritz value| of the tridiagonal `(alpha, beta)` and the larger residual
/// bound of the two extreme Ritz pairs.
fn extreme_ritz(alpha: &[f64], beta: &[f64], next_beta: f64) -> (f64, f64) {
    let k = alpha.len();
    let t = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let (mut lo, mut hi) = (0, 0);
    for i in 1..k {
        if eig.eigenvalues[i] < eig.eigenvalues[lo] {
            lo = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[hi] {
            hi = i;
        }
    }
    let estimate = eig.eigenvalues[lo].abs().max(eig.eigenvalues[hi].abs());
    let residual = |i: usize| next_beta * eig.eigenvectors[(k - 1, i)].abs();
    (estimate, residual(lo).max(residual(hi)))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    ksum(a.iter().zip(b).map(|(x, y)| x * y))
}

fn normalize(x: &mut [f64]) {
    let norm = ksum(x.iter().map(|v| v * v)).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

/// `b_n / sqrt 2`, the upper bound for [`spectral_norm`].
pub fn spectral_norm_bound(weights: &[f64]) -> f64 {
    weights.iter().fold(0.0f64, |m, b| m.max(b.abs())) / SQRT_2
}
