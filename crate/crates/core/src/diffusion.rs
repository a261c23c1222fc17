//! Noise intensities, effective phase-diffusion constants and their
//! estimation from ensembles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fokkerplanck::{Method, PhaseDistribution};
use crate::model::PairParams;
use crate::sde::{wrap_half_open, BatchMoments, EnsembleStats, Moments, Trajectory};

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },
    #[error("quadrature not converged (relative change {0:e})")]
    NotConverged(f64),
}

/// `cos θ₀` of the locked state, or 0 outside the tongue where the phase
/// difference runs and the cross term averages out.
fn locked_cosine(params: &PairParams) -> f64 {
    let (d, delta) = (params.coupling, params.detuning());
    if d > 0.0 && delta.abs() <= d {
        -(1.0 - (delta / d).powi(2)).max(0.0).sqrt()
    } else {
        0.0
    }
}

/// White-noise intensities `(⟨ξ₊²⟩, ⟨ξ₋²⟩)` of `θ± = θ₁ ± θ₂` for the
/// Markovian pair, from the saddle-point noise matrix:
/// `⟨ξ±²⟩ = (3γ₁ − D − (2 ∓ 1)·D cos θ₀) / r²`.
pub fn noise_variances(params: &PairParams) -> (f64, f64) {
    let (g1, g2, d) = (params.gamma1, params.gamma2, params.coupling);
    let c = locked_cosine(params);
    let r2 = (g1 - d - d * c) / g2;
    ((3.0 * g1 - d - d * c) / r2, (3.0 * g1 - d - 3.0 * d * c) / r2)
}

/// Literal evaluation of the closed form
/// `⟨ξ±²⟩ = 3γ₂/2 − Dγ₂/(2γ₁)·(1 + (2 ∓ 1) Re√(1 − Δ²/D²))`.
///
/// Kept for comparison; see [`noise_variances`] for the intensities that
/// drive the simulated Adler dynamics.
pub fn printed_noise_variances(params: &PairParams) -> (f64, f64) {
    let (g1, g2, d) = (params.gamma1, params.gamma2, params.coupling);
    let delta = params.detuning();
    let root = if d > 0.0 { (1.0 - (delta / d).powi(2)).max(0.0).sqrt() } else { 0.0 };
    let base = 1.5 * g2;
    let k = d * g2 / (2.0 * g1);
    (base - k * (1.0 + root), base - k * (1.0 + 3.0 * root))
}

/// `σ₀² = ⟨ξ₋²⟩ / 2`.
pub fn sigma0_sq(params: &PairParams) -> f64 {
    0.5 * noise_variances(params).1
}

/// Effective diffusion constant from the double quadrature together with
/// its self-estimated accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReimannEstimate {
    pub sigma_minus_sq: f64,
    pub relative_error: f64,
    /// Set when the result underflowed to zero (barrier far above the noise).
    pub underflow: bool,
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// `ln(σ₋²/σ₀²)` with `nx` trapezoid nodes in `x` and `panels` 16-point
/// Gauss–Legendre panels in `y`.
fn reimann_log_ratio(delta: f64, d: f64, kt: f64, nx: usize, panels: usize) -> f64 {
    let l = 2.0 * PI;
    let (gx, gw) = gauss_legendre(16);
    let hp = l / panels as f64;
    let mut ys = Vec::with_capacity(16 * panels);
    let mut log_w = Vec::with_capacity(16 * panels);
    for p in 0..panels {
        let a = p as f64 * hp;
        for (x, w) in gx.iter().zip(&gw) {
            ys.push(a + 0.5 * hp * (x + 1.0));
            log_w.push((0.5 * hp * w / l).ln());
        }
    }
    let v = |x: f64| d * x.cos();
    let mut log_plus = Vec::with_capacity(nx);
    let mut log_minus = Vec::with_capacity(nx);
    for j in 0..nx {
        let x = l * j as f64 / nx as f64;
        let vx = v(x);
        let plus = ys.iter().zip(&log_w).map(|(&y, &lw)| lw + (vx - v(x - y) - delta * y) / kt);
        let minus = ys.iter().zip(&log_w).map(|(&y, &lw)| lw + (v(x + y) - vx - delta * y) / kt);
        log_plus.push(log_sum_exp(plus));
        log_minus.push(log_sum_exp(minus));
    }
    let ln_n = (nx as f64).ln();
    let num = log_sum_exp(log_plus.iter().zip(&log_minus).map(|(p, m)| 2.0 * p + m)) - ln_n;
    let den = log_sum_exp(log_plus.iter().copied()) - ln_n;
    num - 3.0 * den
}

/// Quadrature for the effective diffusion of `θ̇ = Δ + D sin θ + ξ` with
/// noise intensity `σ₀²`, refined until the relative change drops below `1e-7`.
pub fn reimann_sigma_minus_detailed(
    delta: f64,
    d: f64,
    sigma0_sq: f64,
) -> Result<ReimannEstimate, DiffusionError> {
    if !(sigma0_sq.is_finite() && sigma0_sq > 0.0) {
        return Err(DiffusionError::InvalidArgument {
            field: "sigma0_sq",
            reason: format!("must be finite and > 0, got {sigma0_sq}"),
        });
    }
    if d == 0.0 {
        return Ok(ReimannEstimate { sigma_minus_sq: sigma0_sq, relative_error: 0.0, underflow: false });
    }
    // Resolve the exponentials' scale |D|/σ₀² and the tilt before refining.
    let stiffness = ((d.abs() + delta.abs()) / sigma0_sq).max(1.0);
    let mut nx = (32.0 * stiffness.sqrt()).ceil() as usize;
    let mut panels = (4.0 * stiffness.sqrt()).ceil() as usize;
    let mut prev = reimann_log_ratio(delta, d, sigma0_sq, nx, panels);
    if prev < f64::MIN_POSITIVE.ln() {
        return Ok(ReimannEstimate { sigma_minus_sq: 0.0, relative_error: f64::NAN, underflow: true });
    }
    let mut change = f64::INFINITY;
    for _ in 0..12 {
        nx *= 2;
        panels *= 2;
        let next = reimann_log_ratio(delta, d, sigma0_sq, nx, panels);
        change = (next - prev).abs();
        prev = next;
        if change < 1e-7 {
            let value = sigma0_sq * prev.exp();
            return Ok(ReimannEstimate {
                sigma_minus_sq: value,
                relative_error: change,
                underflow: value == 0.0,
            });
        }
    }
    Err(DiffusionError::NotConverged(change))
}

pub fn reimann_sigma_minus(delta: f64, d: f64, sigma0_sq: f64) -> Result<f64, DiffusionError> {
    reimann_sigma_minus_detailed(delta, d, sigma0_sq).map(|e| e.sigma_minus_sq)
}

/// Closed-form diffusion summary of a Markovian pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionReport {
    pub sigma_minus_sq: f64,
    pub sigma_plus_sq: f64,
    pub sigma0_sq: f64,
    pub ratio_minus_zero: f64,
    pub ratio_minus_plus: f64,
    pub ci_minus: Option<(f64, f64)>,
}

pub fn markovian_report(params: &PairParams) -> Result<DiffusionReport, DiffusionError> {
    let (xp, xm) = noise_variances(params);
    let s0 = 0.5 * xm;
    let sm = reimann_sigma_minus(params.detuning(), params.coupling, s0)?;
    let sp = 0.5 * xp;
    Ok(DiffusionReport {
        sigma_minus_sq: sm,
        sigma_plus_sq: sp,
        sigma0_sq: s0,
        ratio_minus_zero: sm / s0,
        ratio_minus_plus: sm / sp,
        ci_minus: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseChannel {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub burn_in_fraction: f64,
    /// Fraction of the record, counted from the end, used for the fit.
    pub window: f64,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { burn_in_fraction: 0.2, window: 0.6, bootstrap: 400, seed: 0x5EED }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionFit {
    /// Half the fitted slope of `Var θ(t)`.
    pub sigma_sq: f64,
    /// 95% percentile bootstrap interval over trajectory batches.
    pub ci: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

impl DiffusionFit {
    pub fn relative_half_width(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0) / self.sigma_sq.abs().max(f64::MIN_POSITIVE)
    }
}

/// Ordinary least squares `y = a + b·t`; returns `(b, R²)`.
pub fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sty, mut stt, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        sty += (a - mt) * (b - my);
        stt += (a - mt).powi(2);
        syy += (b - my).powi(2);
    }
    let slope = sty / stt;
    let r2 = if syy > 0.0 { sty * sty / (stt * syy) } else { 1.0 };
    (slope, r2)
}

fn channel(b: &BatchMoments, ch: PhaseChannel) -> Option<&Moments> {
    match ch {
        PhaseChannel::Minus => Some(&b.theta_minus),
        PhaseChannel::Plus => b.theta_plus.as_ref(),
    }
}

/// Linear fit of the ensemble variance of `θ±` over the fit window.
pub fn fit_diffusion(
    stats: &EnsembleStats,
    ch: PhaseChannel,
    opts: &FitOptions,
) -> Result<DiffusionFit, DiffusionError> {
    let len = stats.times.len();
    let burn = (opts.burn_in_fraction.clamp(0.0, 1.0) * len as f64).ceil() as usize;
    let tail = len.saturating_sub((opts.window.clamp(0.0, 1.0) * len as f64).ceil() as usize);
    let start = burn.max(tail);
    if len < start + 10 {
        return Err(DiffusionError::InsufficientData(format!(
            "{} points in the fit window (need 10)",
            len.saturating_sub(start)
        )));
    }
    let total = channel(&stats.total, ch)
        .ok_or_else(|| DiffusionError::InsufficientData("channel not recorded".into()))?;
    let t = &stats.times[start..];
    let var = total.variance();
    let (slope, r2) = linear_fit(t, &var[start..]);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ stats.master_seed);
    let nb = stats.batches.len();
    let mut reps = Vec::with_capacity(opts.bootstrap);
    if nb > 1 {
        for _ in 0..opts.bootstrap {
            let mut acc = Moments::new(len);
            for _ in 0..nb {
                if let Some(m) = channel(&stats.batches[rng.random_range(0..nb)], ch) {
                    acc.merge(m);
                }
            }
            reps.push(0.5 * linear_fit(t, &acc.variance()[start..]).0);
        }
        reps.sort_by(f64::total_cmp);
    }
    let sigma_sq = 0.5 * slope;
    let ci = if reps.is_empty() {
        (sigma_sq, sigma_sq)
    } else {
        let q = |p: f64| reps[((p * (reps.len() - 1) as f64).round() as usize).min(reps.len() - 1)];
        (q(0.025), q(0.975))
    };
    Ok(DiffusionFit { sigma_sq, ci, r_squared: r2, points: t.len() })
}

/// Normalized histogram of samples already wrapped into `[−π, π)`.
pub fn histogram(samples: &[f64], n_bins: usize) -> Result<PhaseDistribution, DiffusionError> {
    if samples.len() < 100 {
        return Err(DiffusionError::InsufficientData(format!("{} samples (need 100)", samples.len())));
    }
    if n_bins == 0 {
        return Err(DiffusionError::InvalidArgument { field: "n_bins", reason: "must be >= 1".into() });
    }
    let h = 2.0 * PI / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &s in samples {
        let k = (((wrap_half_open(s) + PI) / h) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let norm = 1.0 / (samples.len() as f64 * h);
    Ok(PhaseDistribution {
        grid: PhaseDistribution::cell_centres(n_bins),
        density: counts.into_iter().map(|c| c as f64 * norm).collect(),
        method: Method::Histogram,
    })
}

/// Histogram of `θ₋` wrapped into `[−π, π)`, after discarding the first
/// `burn_in_fraction` of each trajectory.
pub fn wrapped_histogram(
    trajectories: &[Trajectory],
    n_bins: usize,
    burn_in_fraction: f64,
) -> Result<PhaseDistribution, DiffusionError> {
    let mut samples = Vec::new();
    for t in trajectories {
        let minus = t.theta_minus();
        let start = (burn_in_fraction.clamp(0.0, 1.0) * minus.len() as f64).ceil() as usize;
        samples.extend(minus[start.min(minus.len())..].iter().map(|&x| wrap_half_open(x)));
    }
    histogram(&samples, n_bins)
}

/// One row of a detuning scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub delta_over_d: f64,
    pub sigma_minus_sq: f64,
    pub sigma0_sq: f64,
    pub ci: Option<(f64, f64)>,
}

pub fn write_scan_csv<W: std::io::Write>(rows: &[ScanRow], writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["Delta_over_D", "sigma_minus_sq", "sigma0_sq", "ratio", "ci_low", "ci_high"])?;
    for r in rows {
        let (lo, hi) = r.ci.map(|(a, b)| (a.to_string(), b.to_string())).unwrap_or_default();
        w.write_record([
            r.delta_over_d.to_string(),
            r.sigma_minus_sq.to_string(),
            r.sigma0_sq.to_string(),
            (r.sigma_minus_sq / r.sigma0_sq).to_string(),
            lo,
            hi,
        ])?;
    }
    w.flush()
}

/// Closed-form `σ₋²/σ₀²` scan over `Δ/D` for fixed `γ₁, γ₂, D`.
pub fn scan_markovian(
    gamma1: f64,
    gamma2: f64,
    d: f64,
    delta_over_d: &[f64],
) -> Result<Vec<ScanRow>, DiffusionError> {
    delta_over_d
        .iter()
        .map(|&x| {
            let p = PairParams::with_detuning(x * d, gamma1, gamma2, d).map_err(|e| {
                DiffusionError::InvalidArgument { field: "params", reason: e.to_string() }
            })?;
            let r = markovian_report(&p)?;
            Ok(ScanRow { delta_over_d: x, sigma_minus_sq: r.sigma_minus_sq, sigma0_sq: r.sigma0_sq, ci: None })
        })
        .collect()
}
