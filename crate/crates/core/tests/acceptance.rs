//! Acceptance suite. Each test prints one `PASS`/`FAIL` line and fails on FAIL.
//! Criteria run one at a time so that the measured runtimes are their own.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use periodogram_sums::mc::{
    replication_key, run_bartlett_bound_study, run_counterexample_study, run_dft_moment_decay_study,
    run_variance_identity_check, simulate_study, summarize, JRule, KRule, MCStudyConfig,
    MCStudySummary, Statistic,
};
use periodogram_sums::process::{
    default_truncation, sample_innovations, InnovationFamily, InnovationSpec, LinearProcessModel,
    ModelKind, Simulator,
};
use periodogram_sums::qform::{
    frobenius_norm_sq, generate_weights, s_n_zeta, spectral_norm, toeplitz_form, WeightScheme,
};
use periodogram_sums::rng::{StreamKey, StreamRole};
use periodogram_sums::spectral::{dft, fourier_frequency, full_periodogram, periodogram};
use periodogram_sums::whittle::{default_bandwidth, estimate_d, estimate_d_from};

const SEED: u64 = 1;
const ALPHA: f64 = 0.01;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(id: u32, title: &str, checks: &[(String, bool)], elapsed: Duration, limit: Duration) {
    let in_time = elapsed <= limit;
    let pass = in_time && checks.iter().all(|c| c.1);
    let mut detail: Vec<String> = checks
        .iter()
        .map(|(d, ok)| format!("{}{d}", if *ok { "" } else { "!! " }))
        .collect();
    detail.push(format!(
        "{}runtime {:.1}s (limit {}s)",
        if in_time { "" } else { "!! " },
        elapsed.as_secs_f64(),
        limit.as_secs()
    ));
    println!(
        "{} criterion {id:2} {title}: {}",
        if pass { "PASS" } else { "FAIL" },
        detail.join("; ")
    );
    assert!(pass, "criterion {id} failed");
}

fn check(label: impl Into<String>, ok: bool) -> (String, bool) {
    (label.into(), ok)
}

fn random_weights(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    let sparsity: f64 = rng.random_range(0.0..0.8);
    (0..len)
        .map(|_| {
            if rng.random::<f64>() < sparsity {
                0.0
            } else {
                scale * rng.random_range(-1.0..1.0)
            }
        })
        .collect()
}

fn shipped_schemes(n: usize) -> Vec<WeightScheme> {
    let nu = n / 2 - 1;
    let mut rng = StreamKey::new(SEED, n as u64, StreamRole::Auxiliary).rng();
    vec![
        WeightScheme::Uniform,
        WeightScheme::Indicator { y: PI / 2.0 },
        WeightScheme::Cosine { k: 3 },
        WeightScheme::KernelAt { u0: 1.0, bandwidth: None },
        WeightScheme::LocalWhittle { m: default_bandwidth(n).min(nu) },
        WeightScheme::Counterexample { d: 0.3 },
        WeightScheme::Custom { values: random_weights(&mut rng, nu) },
    ]
}

#[test]
fn criterion_01_exact_identities() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = StreamKey::new(SEED, 1, StreamRole::Auxiliary).rng();
    let mut checks = Vec::new();

    // Frobenius norm of the Toeplitz form against the weight energy
    let mut worst = 0.0f64;
    for n in [64usize, 256, 1024] {
        for _ in 0..20 {
            let w = random_weights(&mut rng, n / 2 - 1);
            let b2: f64 = w.iter().map(|b| b * b).sum();
            if b2 == 0.0 {
                continue;
            }
            let form = toeplitz_form(&w, n).unwrap();
            worst = worst.max((frobenius_norm_sq(&form) - b2 / 2.0).abs() / (b2 / 2.0));
        }
    }
    checks.push(check(format!("||C||^2 = B^2/2 rel err {worst:.1e} <= 1e-10"), worst <= 1e-10));

    // sum_t cos(t u_j + a) cos(t u_k + b) = (n/2) cos(a - b) 1{j = k}, j + k < n
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(16usize..2048);
        let j = rng.random_range(1..n / 2);
        let k = if rng.random::<bool>() { j } else { rng.random_range(1..n / 2) };
        let (a, b) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let lhs: f64 = (1..=n)
            .map(|t| {
                let t = t as f64;
                (t * fourier_frequency(j, n) + a).cos() * (t * fourier_frequency(k, n) + b).cos()
            })
            .sum();
        let rhs = if j == k { n as f64 / 2.0 * (a - b).cos() } else { 0.0 };
        worst = worst.max((lhs - rhs).abs());
    }
    checks.push(check(format!("cosine product sums err {worst:.1e} <= 1e-8"), worst <= 1e-8));

    // sum_{t=1}^n e^{i t u_m} = n 1{m = 0}, through the DFT of a constant
    let mut worst = 0.0f64;
    for n in [64usize, 255, 256, 1024, 4096] {
        let w = dft(&vec![1.0; n]).unwrap();
        let norm = (2.0 * PI * n as f64).sqrt();
        for (m, c) in w.coefficients.iter().enumerate() {
            let expected = if m == 0 { n as f64 } else { 0.0 };
            worst = worst.max((c * norm - Complex64::new(expected, 0.0)).norm() / n as f64);
        }
    }
    checks.push(check(format!("exponential sums err/n {worst:.1e} <= 1e-14"), worst <= 1e-14));

    // mean shift leaves I_j, j >= 1, unchanged
    let mut worst = 0.0f64;
    for (i, n) in [64usize, 257, 1024].into_iter().enumerate() {
        let x = sample_innovations(&InnovationSpec::gaussian(), n, 10 + i as u64);
        let base = periodogram(&x).unwrap();
        for mu in [-50.0, 0.5, 1e3] {
            let y: Vec<f64> = x.iter().map(|v| v + mu).collect();
            let p = periodogram(&y).unwrap();
            let scale = (n as f64) * (1.0 + mu * mu);
            for j in 1..base.ordinates.len() {
                worst = worst.max((p.ordinates[j] - base.ordinates[j]).abs() / scale);
            }
        }
    }
    checks.push(check(format!("mean-shift invariance err {worst:.1e} <= 1e-14"), worst <= 1e-14));

    // 2 pi sum_j I_j = n gamma(0) + n mean^2 over the full grid
    let mut worst = 0.0f64;
    for (i, n) in [64usize, 255, 1024, 4096].into_iter().enumerate() {
        let x: Vec<f64> = sample_innovations(&InnovationSpec::gaussian(), n, 20 + i as u64)
            .iter()
            .map(|v| v + 1.3)
            .collect();
        let lhs = 2.0 * PI * full_periodogram(&x).unwrap().iter().sum::<f64>();
        let mean = x.iter().sum::<f64>() / n as f64;
        let gamma0 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let rhs = n as f64 * (gamma0 + mean * mean);
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    checks.push(check(format!("periodogram energy rel err {worst:.1e} <= 1e-8"), worst <= 1e-8));

    // S_{n,zeta} as zeta' C zeta, with c(t) summed directly here
    let n = 256;
    let mut worst = 0.0f64;
    for scheme in shipped_schemes(n) {
        let w = generate_weights(&scheme, n).unwrap();
        let z = sample_innovations(&InnovationSpec::gaussian(), n, 30);
        let c: Vec<f64> = (0..n)
            .map(|t| {
                w.iter()
                    .enumerate()
                    .map(|(j, b)| b * (t as f64 * fourier_frequency(j + 1, n)).cos())
                    .sum::<f64>()
                    / n as f64
            })
            .collect();
        let mut quad = 0.0;
        for t in 0..n {
            for s in 0..n {
                quad += c[t.abs_diff(s)] * z[t] * z[s];
            }
        }
        let s = s_n_zeta(&z, &w).unwrap();
        let via_form = toeplitz_form(&w, n).unwrap().quadratic(&z);
        let scale = s.abs().max(1e-12);
        worst = worst.max((s - quad).abs() / scale).max((via_form - quad).abs() / scale);
    }
    checks.push(check(format!("innovation sum = Toeplitz form rel err {worst:.1e} <= 1e-8"), worst <= 1e-8));

    verdict(1, "exact identities", &checks, start.elapsed(), Duration::from_secs(5));
}

#[test]
fn criterion_02_spectral_norm_bound() {
    let _g = serial();
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut worst_excess = f64::NEG_INFINITY;
    for n in [256usize, 1024] {
        for scheme in shipped_schemes(n) {
            let w = generate_weights(&scheme, n).unwrap();
            let bound = w.iter().fold(0.0f64, |m, b| m.max(b.abs())) / SQRT_2;
            let sp = spectral_norm(&toeplitz_form(&w, n).unwrap(), 1e-10).unwrap();
            worst_excess = worst_excess.max(sp - bound);
        }
    }
    checks.push(check(
        format!("max(||C||_sp - b_n/sqrt2) = {worst_excess:.2e} <= 1e-6"),
        worst_excess <= 1e-6,
    ));

    let n = 64;
    let mut worst = 0.0f64;
    for scheme in shipped_schemes(n) {
        let w = generate_weights(&scheme, n).unwrap();
        let form = toeplitz_form(&w, n).unwrap();
        let dense = DMatrix::from_fn(n, n, |t, s| form.entry(t, s));
        let oracle = dense
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, l| m.max(l.abs()));
        let sp = spectral_norm(&form, 1e-14).unwrap();
        worst = worst.max((sp - oracle).abs());
    }
    checks.push(check(format!("Lanczos vs dense eigensolver err {worst:.1e} <= 1e-6"), worst <= 1e-6));
    verdict(2, "spectral norm bound", &checks, start.elapsed(), Duration::from_secs(10));
}

#[test]
fn criterion_03_innovation_sum_moments() {
    let _g = serial();
    let start = Instant::now();
    let n = 1024;
    let mut checks = Vec::new();
    for family in [InnovationFamily::Gaussian, InnovationFamily::CenteredExponential] {
        for scheme in [WeightScheme::Uniform, WeightScheme::LocalWhittle { m: default_bandwidth(n) }] {
            let mut c = MCStudyConfig::new(ModelKind::WhiteNoise, scheme.clone(), vec![n], 5000);
            c.innovation = InnovationSpec::new(family);
            c.master_seed = SEED;
            c.statistic = Statistic::SZeta;
            let s = run_variance_identity_check(&c).unwrap();
            let id = s.per_n[0].innovation_sum;
            let zm = (id.mean - id.expected_mean) / id.se_mean;
            let zv = (id.variance - id.expected_variance) / id.se_variance;
            checks.push(check(
                format!("{family:?}/{}: mean z={zm:.2}, var z={zv:.2}", scheme.describe()),
                zm.abs() <= 3.0 && zv.abs() <= 3.0,
            ));
        }
    }
    verdict(3, "innovation sum moments", &checks, start.elapsed(), Duration::from_secs(60));
}

struct SharedClt {
    /// `(d, summary of S, summary of Q)` for ARFIMA(0, d, 0).
    arfima: Vec<(f64, MCStudySummary, MCStudySummary)>,
    elapsed: Duration,
}

const CLT_N: usize = 4096;
const CLT_R: usize = 2000;

fn shared_clt() -> &'static SharedClt {
    static CELL: OnceLock<SharedClt> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let arfima = [-0.3, 0.0, 0.3]
            .into_iter()
            .map(|d| {
                let mut c = MCStudyConfig::new(ModelKind::arfima(d), WeightScheme::Uniform, vec![CLT_N], CLT_R);
                c.master_seed = SEED;
                let runs = simulate_study(&c).unwrap();
                (
                    d,
                    summarize(&c, &runs, Statistic::StdS).unwrap(),
                    summarize(&c, &runs, Statistic::StdQ).unwrap(),
                )
            })
            .collect();
        SharedClt {
            arfima,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn criterion_04_weighted_sum_clt() {
    let _g = serial();
    let start = Instant::now();
    let shared = shared_clt();
    let skew_max = 5.0 * (6.0 / CLT_R as f64).sqrt();
    let checks: Vec<_> = shared
        .arfima
        .iter()
        .map(|(d, s, _)| {
            let p = &s.per_n[0];
            check(
                format!("d={d}: ks p={:.3}, skew={:.3} (|.|<{skew_max:.3})", p.ks_pvalue, p.moments.skewness),
                p.ks_pvalue > ALPHA && p.moments.skewness.abs() < skew_max,
            )
        })
        .collect();
    let elapsed = start.elapsed().max(shared.elapsed);
    verdict(4, "CLT for standardized S_nX", &checks, elapsed, Duration::from_secs(600));
}

#[test]
fn criterion_05_unnormalized_sum_clt() {
    let _g = serial();
    let start = Instant::now();
    let shared = shared_clt();
    let mut checks: Vec<_> = shared
        .arfima
        .iter()
        .map(|(d, _, q)| {
            let p = &q.per_n[0];
            check(
                format!("ARFIMA d={d}: ks p={:.2e} (ratio b_fn/B_fn={:.3})", p.ks_pvalue, p.lindeberg_ratio_f),
                p.ks_pvalue > ALPHA,
            )
        })
        .collect();
    let mut c = MCStudyConfig::new(
        ModelKind::Ma { coeffs: vec![1.0, 0.5] },
        WeightScheme::Uniform,
        vec![CLT_N],
        CLT_R,
    );
    c.master_seed = SEED;
    c.statistic = Statistic::StdQ;
    let s = periodogram_sums::mc::run_clt_study(&c).unwrap();
    checks.push(check(format!("MA(1): ks p={:.3}", s.per_n[0].ks_pvalue), s.per_n[0].ks_pvalue > ALPHA));
    let elapsed = start.elapsed() + shared.elapsed;
    verdict(5, "CLT for standardized Q_nX", &checks, elapsed, Duration::from_secs(600));
}

#[test]
fn criterion_06_residual_bound_shapes() {
    let _g = serial();
    let start = Instant::now();
    let mut c = MCStudyConfig::new(ModelKind::arfima(0.3), WeightScheme::Uniform, vec![256, 1024, 4096], 1000);
    c.master_seed = SEED;
    c.statistic = Statistic::Residual;
    let s = run_bartlett_bound_study(&c).unwrap();
    let ratios: Vec<String> = s
        .rows
        .iter()
        .map(|r| format!("{:.4}+-{:.4}", r.msq_over_b2, r.msq_over_b2_se))
        .collect();
    let vars: Vec<String> = s
        .rows
        .iter()
        .map(|r| format!("{:.3}<={:.3}", r.residual_var, r.bound_bn_bn))
        .collect();
    let checks = vec![
        check(format!("E R^2/B^2 = [{}] nonincreasing", ratios.join(", ")), s.msq_ratio_nonincreasing),
        check(format!("Var R <= C b_n B_n: [{}]", vars.join(", ")), s.bn_bn_holds),
    ];
    verdict(6, "residual bound shapes", &checks, start.elapsed(), Duration::from_secs(600));
}

#[test]
fn criterion_07_counterexample() {
    let _g = serial();
    let start = Instant::now();
    let s = run_counterexample_study(4096, 0.3, 4000, SEED).unwrap();
    let target = 0.17886;
    let rel = (s.lindeberg_ratio_sq - target).abs() / target;
    let checks = vec![
        check(
            format!("non-negligible weights: ks p={:.2e} rejects", s.summary.per_n[0].ks_pvalue),
            s.clt_rejected,
        ),
        check(
            format!("uniform weights on the same paths: ks p={:.3} passes", s.compliant.ks_pvalue),
            !s.compliant_rejected,
        ),
        check(
            format!(
                "ratio^2={:.5} vs {target} (rel {:.1}%, limit 1/zeta(4d)={:.5})",
                s.lindeberg_ratio_sq,
                100.0 * rel,
                s.lindeberg_limit_sq
            ),
            rel <= 0.05,
        ),
    ];
    verdict(7, "non-negligible weights", &checks, start.elapsed(), Duration::from_secs(600));
}

#[test]
fn criterion_08_dft_moment_decay() {
    let _g = serial();
    let start = Instant::now();
    let grid = [128usize, 256, 512, 1024];
    let model = LinearProcessModel::new(ModelKind::arfima(0.3), default_truncation(1024)).unwrap();
    let s = run_dft_moment_decay_study(&model, &grid, JRule::Fraction(0.125), KRule::Diagonal).unwrap();
    let ratios: Vec<String> = s.rows.iter().map(|r| format!("{:.4}", r.ratio)).collect();
    let checks = vec![check(
        format!("ratios [{}], max/min={:.3} < 10", ratios.join(", "), s.spread),
        s.bounded,
    )];
    verdict(8, "exact DFT moment decay", &checks, start.elapsed(), Duration::from_secs(120));
}

#[test]
fn criterion_09_local_whittle() {
    let _g = serial();
    let start = Instant::now();
    let n = 8192;
    let m = default_bandwidth(n);
    let reps = 500;
    let mut checks = Vec::new();
    for d in [-0.3, 0.0, 0.3] {
        let model = LinearProcessModel::new(ModelKind::arfima(d), default_truncation(n)).unwrap();
        let sim = Simulator::new(&model, n).unwrap();
        let innovation = InnovationSpec::gaussian();
        let estimates: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let path = sim.path(&innovation, replication_key(SEED, rep, n));
                estimate_d(&path.values, m).unwrap().d_hat
            })
            .collect();
        let mae = estimates.iter().map(|e| (e - d).abs()).sum::<f64>() / reps as f64;
        checks.push(check(format!("d={d}: mean|d_hat-d|={mae:.4} < 0.06"), mae < 0.06));

        let path = sim.path(&innovation, replication_key(SEED, 0, n));
        let base = estimate_d(&path.values, m).unwrap().d_hat;
        let exact = [0.125, 4.0, 4096.0].iter().all(|&lambda| {
            let y: Vec<f64> = path.values.iter().map(|v| v * lambda).collect();
            estimate_d_from(&periodogram(&y).unwrap(), m).unwrap().d_hat == base
        });
        checks.push(check(format!("d={d}: argmin unchanged under rescaling"), exact));
    }
    verdict(9, "local Whittle", &checks, start.elapsed(), Duration::from_secs(600));
}

// Same relative --out in distinct working dirs so the echoed config matches.
fn run_cli(args: &[&str], cwd: &Path, threads: usize) {
    std::fs::create_dir_all(cwd).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_pgsum"))
        .current_dir(cwd)
        .args(args)
        .args(["--out", "out"])
        .arg("--threads")
        .arg(threads.to_string())
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "{args:?} exited with {status}");
}

#[test]
fn criterion_10_reproducible_cli() {
    let _g = serial();
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let experiments: [(&str, &[&str], &[&str]); 4] = [
        ("mc", &["mc", "-n", "512", "-r", "400", "-d", "0.3", "--seed", "11"], &["mc_detail.csv", "mc_qq.csv", "mc.json"]),
        ("bounds", &["bounds", "-n", "1024", "-r", "200", "-d", "0.2", "--seed", "5"], &["bounds.csv", "bounds_long.csv"]),
        (
            "counterexample",
            &["counterexample", "-n", "512", "-r", "300", "--seed", "3"],
            &["counterexample_detail.csv"],
        ),
        ("simulate", &["simulate", "-n", "2048", "-d", "0.4", "--seed", "9"], &["simulate.csv"]),
    ];
    let mut checks = Vec::new();
    for (name, args, files) in experiments {
        let a = dir.path().join(format!("{name}-1"));
        let b = dir.path().join(format!("{name}-4"));
        run_cli(args, &a, 1);
        run_cli(args, &b, 4);
        let same = files
            .iter()
            .all(|f| std::fs::read(a.join("out").join(f)).unwrap() == std::fs::read(b.join("out").join(f)).unwrap());
        checks.push(check(format!("{name}: {} identical with 1 and 4 threads", files.join(", ")), same));
    }
    verdict(10, "reproducible CLI output", &checks, start.elapsed(), Duration::from_secs(600));
}
