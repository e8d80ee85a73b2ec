//! Innovation families, linear-process models and path simulation.
//!
//! A model is the causal linear filter `X_t = sum_k a_k zeta_{t-k}` with
//! i.i.d. standardized innovations. Long-memory filters are truncated at lag
//! `K`; see [`default_truncation`].

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{StreamKey, StreamRole};
use crate::sum::ksum;

/// Standardized innovation distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationFamily {
    Gaussian,
    /// `E - 1` with `E ~ Exp(1)`.
    CenteredExponential,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
    Rademacher,
}

/// An innovation family together with its fourth-order constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnovationSpec {
    pub family: InnovationFamily,
    /// `Cum_4(zeta_0) = E zeta^4 - 3`.
    pub fourth_cumulant: f64,
    /// `Var(zeta_0^2) = Cum_4 + 2`.
    pub var_zeta_sq: f64,
}

impl InnovationSpec {
    pub fn new(family: InnovationFamily) -> Self {
        let fourth_cumulant = match family {
            InnovationFamily::Gaussian => 0.0,
            InnovationFamily::CenteredExponential => 6.0,
            InnovationFamily::Uniform => -1.2,
            InnovationFamily::Rademacher => -2.0,
        };
        Self {
            family,
            fourth_cumulant,
            var_zeta_sq: fourth_cumulant + 2.0,
        }
    }

    pub fn gaussian() -> Self {
        Self::new(InnovationFamily::Gaussian)
    }

    /// Fills `out` with i.i.d. draws.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.family {
            InnovationFamily::Gaussian => {
                for x in out.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
            }
            InnovationFamily::CenteredExponential => {
                for x in out.iter_mut() {
                    let e: f64 = rng.sample(Exp1);
                    *x = e - 1.0;
                }
            }
            InnovationFamily::Uniform => {
                let s = 3f64.sqrt();
                for x in out.iter_mut() {
                    let u: f64 = rng.random();
                    *x = (2.0 * u - 1.0) * s;
                }
            }
            InnovationFamily::Rademacher => {
                for x in out.iter_mut() {
                    *x = if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
            }
        }
    }
}

/// `count` i.i.d. innovations from the stream keyed by `seed`.
pub fn sample_innovations(spec: &InnovationSpec, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = StreamKey::new(seed, 0, StreamRole::Innovations).rng();
    let mut out = vec![0.0; count];
    spec.fill(&mut rng, &mut out);
    out
}

/// Model family. `ar` holds `phi_1..phi_p` of `phi(z) = 1 - sum phi_i z^i`,
/// `ma` holds `theta_1..theta_q` of `theta(z) = 1 + sum theta_i z^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    WhiteNoise,
    /// Finite moving average with raw coefficients `a_0..a_q`.
    Ma { coeffs: Vec<f64> },
    Arfima {
        d: f64,
        #[serde(default)]
        ar: Vec<f64>,
        #[serde(default)]
        ma: Vec<f64>,
    },
    /// `(1-B)^{-d} Y` with `Y_t = sum_k b_k zeta_{t-k}` short memory.
    FractionalOfShortMemory { d: f64, short: Vec<f64> },
}

impl ModelKind {
    pub fn arfima(d: f64) -> Self {
        ModelKind::Arfima {
            d,
            ar: vec![],
            ma: vec![],
        }
    }

    pub fn memory(&self) -> f64 {
        match self {
            ModelKind::WhiteNoise | ModelKind::Ma { .. } => 0.0,
            ModelKind::Arfima { d, .. } | ModelKind::FractionalOfShortMemory { d, .. } => *d,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModelKind::WhiteNoise => "white_noise".into(),
            ModelKind::Ma { coeffs } => format!("ma({})", coeffs.len().saturating_sub(1)),
            ModelKind::Arfima { d, ar, ma } => format!("arfima({},{},{})", ar.len(), d, ma.len()),
            ModelKind::FractionalOfShortMemory { d, short } => {
                format!("fractional(d={}, q={})", d, short.len().saturating_sub(1))
            }
        }
    }
}

/// Default MA truncation lag for sample size `n`: `max(100 n, 2^17)`.
pub fn default_truncation(n: usize) -> usize {
    (100 * n).max(1 << 17)
}

/// A truncated linear process.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProcessModel {
    kind: ModelKind,
    coeffs: Vec<f64>,
    truncation: usize,
}

impl LinearProcessModel {
    /// Builds the model, computing `a_0..a_K`. Finite MA models keep their
    /// own length and ignore `truncation`.
    pub fn new(kind: ModelKind, truncation: usize) -> Result<Self> {
        if truncation < 1 {
            return Err(Error::domain("truncation K must be at least 1"));
        }
        let coeffs = match &kind {
            ModelKind::WhiteNoise => {
                let mut c = vec![0.0; truncation + 1];
                c[0] = 1.0;
                c
            }
            ModelKind::Ma { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::domain("MA model needs at least one coefficient"));
                }
                let mut c = coeffs.clone();
                if c.len() < 2 {
                    c.push(0.0);
                }
                c
            }
            ModelKind::Arfima { d, ar, ma } => arfima_ma_coeffs(*d, ar, ma, truncation)?,
            ModelKind::FractionalOfShortMemory { d, short } => {
                check_memory(*d)?;
                if short.is_empty() {
                    return Err(Error::domain("short-memory part needs coefficients"));
                }
                let psi = fractional_coeffs(*d, truncation);
                convolve_truncated(&psi, short, truncation)
            }
        };
        let truncation = coeffs.len() - 1;
        Ok(Self {
            kind,
            coeffs,
            truncation,
        })
    }

    pub fn with_default_truncation(kind: ModelKind, n: usize) -> Result<Self> {
        Self::new(kind, default_truncation(n))
    }

    pub fn white_noise() -> Self {
        Self::new(ModelKind::WhiteNoise, 1).expect("white noise is always valid")
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn memory(&self) -> f64 {
        self.kind.memory()
    }

    /// `sum_k a_k^2`, the variance of the truncated process.
    pub fn variance(&self) -> f64 {
        ksum(self.coeffs.iter().map(|a| a * a))
    }

    /// Coefficients with trailing zeros removed (at least one entry).
    pub fn support(&self) -> &[f64] {
        let last = self.coeffs.iter().rposition(|&a| a != 0.0).unwrap_or(0);
        &self.coeffs[..=last]
    }

    /// `A_X(u)`: closed form for ARFIMA-type kinds, truncated sum otherwise.
    pub fn transfer_function(&self, u: f64) -> Result<Complex64> {
        check_frequency(u)?;
        let z = Complex64::from_polar(1.0, -u);
        Ok(match &self.kind {
            ModelKind::WhiteNoise => Complex64::new(1.0, 0.0),
            ModelKind::Ma { .. } => self.truncated_transfer(u),
            ModelKind::Arfima { d, ar, ma } => {
                let theta = 1.0 + poly(ma, z);
                let phi = 1.0 - poly(ar, z);
                fractional_factor(*d, z) * theta / phi
            }
            ModelKind::FractionalOfShortMemory { d, short } => {
                let a_y = short
                    .iter()
                    .enumerate()
                    .map(|(k, b)| b * z.powu(k as u32))
                    .sum::<Complex64>();
                fractional_factor(*d, z) * a_y
            }
        })
    }

    /// `sum_{k=0}^{K} a_k e^{-iku}` regardless of kind.
    pub fn truncated_transfer(&self, u: f64) -> Complex64 {
        let mut re = crate::sum::CompensatedSum::new();
        let mut im = crate::sum::CompensatedSum::new();
        for (k, a) in self.support().iter().enumerate() {
            let (s, c) = (k as f64 * u).sin_cos();
            re.add(a * c);
            im.add(-a * s);
        }
        Complex64::new(re.value(), im.value())
    }

    /// `f_X(u) = |A_X(u)|^2 / (2 pi)`.
    pub fn spectral_density(&self, u: f64) -> Result<f64> {
        Ok(self.transfer_function(u)?.norm_sqr() / (2.0 * PI))
    }

    /// `g(u) = |u|^{2d} f_X(u)`.
    pub fn short_memory_g(&self, u: f64) -> Result<f64> {
        let f = self.spectral_density(u)?;
        Ok(u.powf(2.0 * self.memory()) * f)
    }

    /// `f_X` at the Fourier frequencies `u_1..u_count` of a length-`n` sample.
    pub fn spectral_density_at_fourier(&self, n: usize, count: usize) -> Result<Vec<f64>> {
        (1..=count)
            .map(|j| self.spectral_density(crate::spectral::fourier_frequency(j, n)))
            .collect()
    }
}

fn fractional_factor(d: f64, z: Complex64) -> Complex64 {
    if d == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        (1.0 - z).powf(-d)
    }
}

fn poly(c: &[f64], z: Complex64) -> Complex64 {
    c.iter()
        .enumerate()
        .map(|(i, ci)| ci * z.powu(i as u32 + 1))
        .sum()
}

fn check_memory(d: f64) -> Result<()> {
    if !(d.abs() < 0.5) {
        return Err(Error::domain(format!("memory parameter d = {d} must satisfy |d| < 1/2")));
    }
    Ok(())
}

pub(crate) fn check_frequency(u: f64) -> Result<()> {
    if !(u > 0.0 && u <= PI) {
        return Err(Error::domain(format!("frequency {u} outside (0, pi]")));
    }
    Ok(())
}

/// `psi_0..psi_K` of `(1-B)^{-d}`.
fn fractional_coeffs(d: f64, k_max: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(k_max + 1);
    psi.push(1.0);
    for k in 1..=k_max {
        let prev = psi[k - 1];
        psi.push(prev * (k as f64 - 1.0 + d) / k as f64);
    }
    psi
}

fn convolve_truncated(x: &[f64], y: &[f64], k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|k| {
            let lo = k.saturating_sub(x.len() - 1);
            let hi = k.min(y.len() - 1);
            if lo > hi {
                0.0
            } else {
                (lo..=hi).map(|i| y[i] * x[k - i]).sum()
            }
        })
        .collect()
}

/// Errors with [`Error::NonCausalAr`] unless every root of
/// `phi(z) = 1 - sum phi_i z^i` lies strictly outside the unit disk.
pub fn check_causal(ar: &[f64]) -> Result<()> {
    let p = ar.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    if p == 0 {
        return Ok(());
    }
    // eigenvalues of the companion matrix are the reciprocal roots of phi
    let mut m = DMatrix::<f64>::zeros(p, p);
    for (i, &c) in ar[..p].iter().enumerate() {
        m[(0, i)] = c;
    }
    for i in 1..p {
        m[(i, i - 1)] = 1.0;
    }
    let largest = m
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    if largest >= 1.0 - 1e-12 {
        return Err(Error::NonCausalAr {
            modulus: 1.0 / largest,
        });
    }
    Ok(())
}

/// MA(infinity) weights `a_0..a_K` of `(1-B)^{-d} theta(B) / phi(B)`.
pub fn arfima_ma_coeffs(d: f64, ar: &[f64], ma: &[f64], k_max: usize) -> Result<Vec<f64>> {
    check_memory(d)?;
    check_causal(ar)?;
    let psi = fractional_coeffs(d, k_max);
    // theta(B) psi
    let mut c = psi.clone();
    for (i, th) in ma.iter().enumerate() {
        let lag = i + 1;
        for k in lag..=k_max {
            c[k] += th * psi[k - lag];
        }
    }
    // a = c / phi(B): a_k = c_k + sum_i phi_i a_{k-i}
    let mut a = c;
    if !ar.is_empty() {
        for k in 1..=k_max {
            let mut acc = a[k];
            for (i, ph) in ar.iter().enumerate() {
                let lag = i + 1;
                if lag <= k {
                    acc += ph * a[k - lag];
                }
            }
            a[k] = acc;
        }
    }
    Ok(a)
}

/// One simulated realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    /// `X_1..X_n`.
    pub values: Vec<f64>,
    pub seed: u64,
    pub model_id: String,
    /// `zeta_{1-K'}..zeta_n` where `K'` is the effective filter length.
    innovations: Option<Vec<f64>>,
    presample: usize,
}

impl SamplePath {
    /// Path without an innovation record, e.g. observed data.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self {
            values,
            seed: 0,
            model_id: "observed".into(),
            innovations: None,
            presample: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// All innovations, pre-sample first.
    pub fn innovations(&self) -> Result<&[f64]> {
        self.innovations.as_deref().ok_or(Error::MissingInnovations)
    }

    /// `zeta_1..zeta_n`.
    pub fn in_sample_innovations(&self) -> Result<&[f64]> {
        Ok(&self.innovations()?[self.presample..])
    }

    pub fn presample_len(&self) -> usize {
        self.presample
    }
}

const DIRECT_CONVOLUTION_MAX: usize = 256;

struct FftConvolution {
    len: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    kernel: Vec<Complex64>,
}

/// Reusable simulator for one model and sample size. The filter spectrum is
/// computed once; each call to [`Simulator::path`] is independent.
pub struct Simulator {
    support: Vec<f64>,
    n: usize,
    model_id: String,
    fft: Option<FftConvolution>,
}

impl Simulator {
    pub fn new(model: &LinearProcessModel, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::domain(format!("sample size n = {n} must be at least 8")));
        }
        let support = model.support().to_vec();
        let k = support.len() - 1;
        let fft = if k > DIRECT_CONVOLUTION_MAX {
            let len = (n + k).next_power_of_two();
            let mut planner = RealFftPlanner::<f64>::new();
            let forward = planner.plan_fft_forward(len);
            let inverse = planner.plan_fft_inverse(len);
            let mut buf = vec![0.0; len];
            buf[..=k].copy_from_slice(&support);
            let mut kernel = forward.make_output_vec();
            forward
                .process(&mut buf, &mut kernel)
                .expect("buffer sizes match plan");
            Some(FftConvolution {
                len,
                forward,
                inverse,
                kernel,
            })
        } else {
            None
        };
        Ok(Self {
            support,
            n,
            model_id: model.kind().label(),
            fft,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn presample_len(&self) -> usize {
        self.support.len() - 1
    }

    /// Simulates one path from the innovations stream identified by `key`.
    pub fn path(&self, innovation: &InnovationSpec, key: StreamKey) -> SamplePath {
        let k = self.presample_len();
        let mut rng = key.rng();
        let mut zeta = vec![0.0; self.n + k];
        innovation.fill(&mut rng, &mut zeta);
        let values = self.filter(&zeta);
        SamplePath {
            values,
            seed: key.master_seed,
            model_id: self.model_id.clone(),
            innovations: Some(zeta),
            presample: k,
        }
    }

    /// Applies the filter to `zeta_{1-K'}..zeta_n`, returning `X_1..X_n`.
    pub fn filter(&self, zeta: &[f64]) -> Vec<f64> {
        let k = self.presample_len();
        assert_eq!(zeta.len(), self.n + k, "innovation record has wrong length");
        match &self.fft {
            None => (0..self.n)
                .map(|t| {
                    let mut acc = 0.0;
                    for (lag, a) in self.support.iter().enumerate() {
                        acc += a * zeta[t + k - lag];
                    }
                    acc
                })
                .collect(),
            Some(plan) => {
                let mut buf = vec![0.0; plan.len];
                buf[..zeta.len()].copy_from_slice(zeta);
                let mut spec = plan.forward.make_output_vec();
                plan.forward
                    .process(&mut buf, &mut spec)
                    .expect("buffer sizes match plan");
                for (s, h) in spec.iter_mut().zip(&plan.kernel) {
                    *s *= h;
                }
                // the inverse transform requires purely real DC and Nyquist bins
                spec[0].im = 0.0;
                if let Some(last) = spec.last_mut() {
                    last.im = 0.0;
                }
                plan.inverse
                    .process(&mut spec, &mut buf)
                    .expect("buffer sizes match plan");
                let scale = 1.0 / plan.len as f64;
                buf[k..k + self.n].iter().map(|x| x * scale).collect()
            }
        }
    }
}

/// Simulates `X_1..X_n` with innovations drawn from the stream keyed by `seed`.
pub fn simulate(
    model: &LinearProcessModel,
    innovation: &InnovationSpec,
    n: usize,
    seed: u64,
) -> Result<SamplePath> {
    let sim = Simulator::new(model, n)?;
    Ok(sim.path(innovation, StreamKey::new(seed, 0, StreamRole::Innovations)))
}
