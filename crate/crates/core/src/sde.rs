//! Langevin integrators and seeded trajectory ensembles.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::model::{
    noise_matrix_with_moduli, CMat2, ModelError, NoiseMatrix, QuarticCouplings, SelfEnergyModel,
    SingleOscillatorParams, C64,
};
use crate::saddle::{fixed_point, LangevinCoefficients, SaddleError, SaddleSolution};

#[derive(Debug, Error)]
pub enum SdeError {
    #[error("time step too large: {0}")]
    StepTooLarge(String),
    #[error("friction matrix is singular (condition number {0:e})")]
    SingularFriction(f64),
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },
    #[error("record too short: tau_max = {tau_max} exceeds T/4 = {limit}")]
    InsufficientLength { tau_max: f64, limit: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Saddle(SaddleError),
}

impl From<SaddleError> for SdeError {
    fn from(e: SaddleError) -> Self {
        match e {
            SaddleError::SingularFriction(c) => Self::SingularFriction(c),
            SaddleError::Model(m) => Self::Model(m),
            other => Self::Saddle(other),
        }
    }
}

/// Sample-path channels of the three Langevin systems.
#[derive(Debug, Clone, PartialEq)]
pub enum Channels {
    /// Phase difference only (noisy Adler equation).
    Relative { theta_minus: Vec<f64> },
    Single { theta: Vec<f64>, eta: Vec<f64> },
    Pair { theta1: Vec<f64>, theta2: Vec<f64>, eta1: Vec<f64>, eta2: Vec<f64> },
}

/// A stored trajectory with unwrapped phases.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub stride: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub channels: Channels,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `θ₋ = θ₁ − θ₂` (zero for a single oscillator).
    pub fn theta_minus(&self) -> Vec<f64> {
        match &self.channels {
            Channels::Relative { theta_minus } => theta_minus.clone(),
            Channels::Single { theta, .. } => vec![0.0; theta.len()],
            Channels::Pair { theta1, theta2, .. } => {
                theta1.iter().zip(theta2).map(|(a, b)| a - b).collect()
            }
        }
    }

    /// `θ₊ = θ₁ + θ₂`, or the phase itself for a single oscillator.
    pub fn theta_plus(&self) -> Option<Vec<f64>> {
        match &self.channels {
            Channels::Relative { .. } => None,
            Channels::Single { theta, .. } => Some(theta.clone()),
            Channels::Pair { theta1, theta2, .. } => {
                Some(theta1.iter().zip(theta2).map(|(a, b)| a + b).collect())
            }
        }
    }

    /// Radial fluctuation of the (first) oscillator.
    pub fn eta(&self) -> Option<&[f64]> {
        match &self.channels {
            Channels::Relative { .. } => None,
            Channels::Single { eta, .. } => Some(eta),
            Channels::Pair { eta1, .. } => Some(eta1),
        }
    }

    /// Rescaled complex fields `φ_n = e^{−iθ_n}(1 + η_n)`.
    pub fn fields(&self) -> Option<Vec<[C64; 2]>> {
        match &self.channels {
            Channels::Pair { theta1, theta2, eta1, eta2 } => Some(
                (0..theta1.len())
                    .map(|k| {
                        [
                            C64::from_polar(1.0 + eta1[k], -theta1[k]),
                            C64::from_polar(1.0 + eta2[k], -theta2[k]),
                        ]
                    })
                    .collect(),
            ),
            Channels::Single { theta, eta } => Some(
                theta
                    .iter()
                    .zip(eta)
                    .map(|(t, e)| {
                        let f = C64::from_polar(1.0 + e, -t);
                        [f, f]
                    })
                    .collect(),
            ),
            Channels::Relative { .. } => None,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        match &self.channels {
            Channels::Relative { theta_minus } => {
                w.write_record(["t", "theta_minus"])?;
                for (t, x) in self.times.iter().zip(theta_minus) {
                    w.write_record([t.to_string(), x.to_string()])?;
                }
            }
            Channels::Single { theta, eta } => {
                w.write_record(["t", "theta", "eta"])?;
                for k in 0..self.times.len() {
                    w.write_record([self.times[k].to_string(), theta[k].to_string(), eta[k].to_string()])?;
                }
            }
            Channels::Pair { theta1, theta2, eta1, eta2 } => {
                w.write_record(["t", "theta1", "theta2", "eta1", "eta2"])?;
                for k in 0..self.times.len() {
                    w.write_record([
                        self.times[k].to_string(),
                        theta1[k].to_string(),
                        theta2[k].to_string(),
                        eta1[k].to_string(),
                        eta2[k].to_string(),
                    ])?;
                }
            }
        }
        w.flush()
    }
}

/// Stream of standard normal variates for one trajectory.
struct Noise(ChaCha8Rng);

impl Noise {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Complex increment with `⟨|w|²⟩ = 1`.
    fn complex(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(s * self.normal(), s * self.normal())
    }
}

fn check_positive(field: &'static str, value: f64) -> Result<(), SdeError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(SdeError::InvalidArgument { field, reason: format!("must be finite and > 0, got {value}") })
    }
}

fn step_count(dt: f64, t_end: f64, stride: usize) -> Result<usize, SdeError> {
    check_positive("dt", dt)?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(SdeError::InvalidArgument { field: "t_end", reason: format!("got {t_end}") });
    }
    if stride == 0 {
        return Err(SdeError::InvalidArgument { field: "stride", reason: "must be >= 1".into() });
    }
    Ok((t_end / dt + 1e-9).floor() as usize)
}

fn sample_times(dt: f64, stride: usize, samples: usize) -> Vec<f64> {
    (0..samples).map(|k| (k * stride) as f64 * dt).collect()
}

/// Euler–Maruyama integration of `θ̇ = Δ + D sin θ + ξ`, `⟨ξξ⟩ = 2σ₀²δ`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_adler(
    delta: f64,
    coupling: f64,
    sigma0_sq: f64,
    theta_init: f64,
    dt: f64,
    t_end: f64,
    seed: u64,
    stride: usize,
) -> Result<Trajectory, SdeError> {
    let steps = step_count(dt, t_end, stride)?;
    let rate = (delta.abs() + coupling.abs()).max(1.0);
    if dt * rate >= 0.1 {
        return Err(SdeError::StepTooLarge(format!("dt·max(|Δ|+D, 1) = {} >= 0.1", dt * rate)));
    }
    if !(sigma0_sq.is_finite() && sigma0_sq >= 0.0) {
        return Err(SdeError::InvalidArgument { field: "sigma0_sq", reason: format!("got {sigma0_sq}") });
    }
    let amp = (2.0 * sigma0_sq * dt).sqrt();
    let mut noise = Noise::new(seed);
    let samples = steps / stride + 1;
    let mut out = Vec::with_capacity(samples);
    let mut theta = theta_init;
    out.push(theta);
    for k in 1..=steps {
        theta += (delta + coupling * theta.sin()) * dt + amp * noise.normal();
        if k % stride == 0 {
            out.push(theta);
        }
    }
    Ok(Trajectory {
        dt,
        stride,
        seed,
        times: sample_times(dt, stride, samples),
        channels: Channels::Relative { theta_minus: out },
    })
}

/// Radial/angular Langevin equations of one limit cycle,
/// `η̇ = −γ₁η + Im ξ`, `θ̇ = Re ξ`, each with intensity `3γ₂/2`.
///
/// `gamma2 = 0` is accepted and yields noiseless relaxation.
pub fn simulate_single_sl(
    params: &SingleOscillatorParams,
    eta_init: f64,
    dt: f64,
    t_end: f64,
    seed: u64,
    stride: usize,
) -> Result<Trajectory, SdeError> {
    let steps = step_count(dt, t_end, stride)?;
    if dt * params.gamma1 >= 0.1 {
        return Err(SdeError::StepTooLarge(format!("dt·γ₁ = {} >= 0.1", dt * params.gamma1)));
    }
    let amp = (1.5 * params.gamma2 * dt).sqrt();
    let mut noise = Noise::new(seed);
    let samples = steps / stride + 1;
    let mut theta_out = Vec::with_capacity(samples);
    let mut eta_out = Vec::with_capacity(samples);
    let (mut theta, mut eta) = (0.0, eta_init);
    theta_out.push(theta);
    eta_out.push(eta);
    for k in 1..=steps {
        let (re, im) = (noise.normal(), noise.normal());
        eta += -params.gamma1 * eta * dt + amp * im;
        theta += amp * re;
        if k % stride == 0 {
            theta_out.push(theta);
            eta_out.push(eta);
        }
    }
    Ok(Trajectory {
        dt,
        stride,
        seed,
        times: sample_times(dt, stride, samples),
        channels: Channels::Single { theta: theta_out, eta: eta_out },
    })
}

/// How the Hubbard–Stratonovich noise amplitude is treated along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    /// Frozen at the saddle point.
    #[default]
    Frozen,
    /// Rebuilt from the instantaneous `|φ_n|` at every step.
    Multiplicative,
    /// Deterministic flow only.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOptions {
    pub noise: NoiseMode,
    /// Initial fields; defaults to the saddle fixed point.
    pub initial: Option<[C64; 2]>,
    pub stride: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self { noise: NoiseMode::Frozen, initial: None, stride: 1 }
    }
}

/// Everything needed to integrate the rescaled-field Langevin equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSystem {
    pub coeffs: LangevinCoefficients,
    pub noise: NoiseMatrix,
    pub theta0: f64,
    model: SelfEnergyModel,
    nu: f64,
    radii: (f64, f64),
    couplings: QuarticCouplings,
}

impl PairSystem {
    pub fn new(
        model: &SelfEnergyModel,
        sol: &SaddleSolution,
        couplings: &QuarticCouplings,
    ) -> Result<Self, SdeError> {
        let theta0 = sol.theta0.ok_or(SdeError::InvalidArgument {
            field: "sol",
            reason: "saddle solution is not synchronized".into(),
        })?;
        let radii = (sol.r1, sol.r2);
        let coeffs = LangevinCoefficients::new(model, sol.nu, radii, (sol.omega1, sol.omega2), couplings)?;
        let noise = noise_matrix_with_moduli(model, sol.nu, radii, couplings, [1.0, 1.0])?;
        Ok(Self { coeffs, noise, theta0, model: model.clone(), nu: sol.nu, radii, couplings: *couplings })
    }

    /// Rough upper bound on the fastest deterministic rate near the saddle.
    pub fn rate_bound(&self) -> f64 {
        let inv = self.coeffs.friction_inv.norm();
        let quartic = 3.0 * self.coeffs.lambda1.norm() * self.coeffs.radius_sq[0].max(self.coeffs.radius_sq[1]);
        inv * (self.coeffs.linear.norm() + quartic)
    }

    fn factor(&self, phi: &[C64; 2], mode: NoiseMode) -> Result<CMat2, SdeError> {
        Ok(match mode {
            NoiseMode::Frozen => self.noise.factor,
            NoiseMode::Off => CMat2::zeros(),
            NoiseMode::Multiplicative => {
                noise_matrix_with_moduli(&self.model, self.nu, self.radii, &self.couplings, [phi[0].norm(), phi[1].norm()])?
                    .factor
            }
        })
    }
}

/// Itô Euler–Maruyama integration of `A·φ̇ = Q·φ + Λ₁*r_m²|φ_m|²φ_m + B·ξ`
/// from the saddle point.
pub fn simulate_pair_nonmarkovian(
    model: &SelfEnergyModel,
    sol: &SaddleSolution,
    couplings: &QuarticCouplings,
    dt: f64,
    t_end: f64,
    seed: u64,
) -> Result<Trajectory, SdeError> {
    let sys = PairSystem::new(model, sol, couplings)?;
    simulate_pair_system(&sys, dt, t_end, seed, &PairOptions::default())
}

pub fn simulate_pair_system(
    sys: &PairSystem,
    dt: f64,
    t_end: f64,
    seed: u64,
    opts: &PairOptions,
) -> Result<Trajectory, SdeError> {
    let stride = opts.stride;
    let steps = step_count(dt, t_end, stride)?;
    let rate = sys.rate_bound();
    if dt * rate >= 0.1 {
        return Err(SdeError::StepTooLarge(format!("dt·rate = {} >= 0.1", dt * rate)));
    }
    let mut phi = opts.initial.unwrap_or_else(|| fixed_point(sys.theta0));
    let ainv = sys.coeffs.friction_inv;
    let sq = dt.sqrt();
    let mut noise = Noise::new(seed);
    let samples = steps / stride + 1;
    let mut th = [Vec::with_capacity(samples), Vec::with_capacity(samples)];
    let mut et = [Vec::with_capacity(samples), Vec::with_capacity(samples)];
    let mut theta = [-phi[0].arg(), -phi[1].arg()];
    let record = |th: &mut [Vec<f64>; 2], et: &mut [Vec<f64>; 2], theta: &[f64; 2], phi: &[C64; 2]| {
        for n in 0..2 {
            th[n].push(theta[n]);
            et[n].push(phi[n].norm() - 1.0);
        }
    };
    record(&mut th, &mut et, &theta, &phi);
    let frozen = sys.factor(&phi, opts.noise)?;
    for k in 1..=steps {
        let b = if opts.noise == NoiseMode::Multiplicative { sys.factor(&phi, opts.noise)? } else { frozen };
        let f = sys.coeffs.force(phi);
        let mut kick = [C64::from(0.0); 2];
        if opts.noise != NoiseMode::Off {
            let w = [noise.complex() * sq, noise.complex() * sq];
            kick = [b[(0, 0)] * w[0] + b[(0, 1)] * w[1], b[(1, 0)] * w[0] + b[(1, 1)] * w[1]];
        }
        let g = [f[0] * dt + kick[0], f[1] * dt + kick[1]];
        let next = [
            phi[0] + ainv[(0, 0)] * g[0] + ainv[(0, 1)] * g[1],
            phi[1] + ainv[(1, 0)] * g[0] + ainv[(1, 1)] * g[1],
        ];
        for n in 0..2 {
            let step = (next[n] / phi[n]).arg();
            if !step.is_finite() {
                return Err(SdeError::StepTooLarge("field passed through the origin".into()));
            }
            theta[n] -= step;
        }
        phi = next;
        if k % stride == 0 {
            record(&mut th, &mut et, &theta, &phi);
        }
    }
    let [theta1, theta2] = th;
    let [eta1, eta2] = et;
    Ok(Trajectory {
        dt,
        stride,
        seed,
        times: sample_times(dt, stride, samples),
        channels: Channels::Pair { theta1, theta2, eta1, eta2 },
    })
}

/// A simulation recipe that can be replayed for any trajectory seed.
#[derive(Debug, Clone)]
pub enum Simulation {
    Adler { delta: f64, coupling: f64, sigma0_sq: f64, theta_init: f64, dt: f64, t_end: f64 },
    SingleSl { params: SingleOscillatorParams, eta_init: f64, dt: f64, t_end: f64 },
    Pair { system: Arc<PairSystem>, dt: f64, t_end: f64, noise: NoiseMode },
}

impl Simulation {
    pub fn run(&self, seed: u64, stride: usize) -> Result<Trajectory, SdeError> {
        match self {
            Self::Adler { delta, coupling, sigma0_sq, theta_init, dt, t_end } => {
                simulate_adler(*delta, *coupling, *sigma0_sq, *theta_init, *dt, *t_end, seed, stride)
            }
            Self::SingleSl { params, eta_init, dt, t_end } => {
                simulate_single_sl(params, *eta_init, *dt, *t_end, seed, stride)
            }
            Self::Pair { system, dt, t_end, noise } => simulate_pair_system(
                system,
                *dt,
                *t_end,
                seed,
                &PairOptions { noise: *noise, initial: None, stride },
            ),
        }
    }

    pub fn dt(&self) -> f64 {
        match self {
            Self::Adler { dt, .. } | Self::SingleSl { dt, .. } | Self::Pair { dt, .. } => *dt,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` in an ensemble with `master_seed`.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Per-time running mean and sum of squared deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl Moments {
    pub fn new(len: usize) -> Self {
        Self { count: 0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    pub fn push(&mut self, xs: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(xs) {
            let d = x - *m;
            *m += d / n;
            *s += d * (x - *m);
        }
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for k in 0..self.mean.len() {
            let d = other.mean[k] - self.mean[k];
            self.mean[k] += d * nb / n;
            self.m2[k] += other.m2[k] + d * d * na * nb / n;
        }
        self.count += other.count;
    }

    /// Population variance (zero for a single sample).
    pub fn variance(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.m2.iter().map(|s| (s / n).max(0.0)).collect()
    }
}

/// Moments of one accumulation batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchMoments {
    pub theta_plus: Option<Moments>,
    pub theta_minus: Moments,
    pub eta: Option<Moments>,
    /// Wrapped `θ₋` samples after the histogram burn-in, kept per batch.
    pub wrapped: Vec<f64>,
}

impl BatchMoments {
    fn merge(&mut self, other: &Self) {
        if let (Some(a), Some(b)) = (&mut self.theta_plus, &other.theta_plus) {
            a.merge(b);
        }
        self.theta_minus.merge(&other.theta_minus);
        if let (Some(a), Some(b)) = (&mut self.eta, &other.eta) {
            a.merge(b);
        }
        self.wrapped.extend_from_slice(&other.wrapped);
    }
}

/// Time-resolved ensemble statistics of `θ±` (and `η` where defined).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub n_traj: usize,
    pub master_seed: u64,
    pub dt: f64,
    pub total: BatchMoments,
    /// Fixed-size trajectory batches in index order, for resampling.
    pub batches: Vec<BatchMoments>,
}

impl EnsembleStats {
    pub fn theta_minus_mean(&self) -> &[f64] {
        &self.total.theta_minus.mean
    }

    pub fn theta_minus_var(&self) -> Vec<f64> {
        self.total.theta_minus.variance()
    }

    pub fn theta_plus_mean(&self) -> Option<&[f64]> {
        self.total.theta_plus.as_ref().map(|m| m.mean.as_slice())
    }

    pub fn theta_plus_var(&self) -> Option<Vec<f64>> {
        self.total.theta_plus.as_ref().map(Moments::variance)
    }

    /// Ensemble average of `η²` at each sample time.
    pub fn eta_sq_mean(&self) -> Option<Vec<f64>> {
        self.total.eta.as_ref().map(|m| {
            let var = m.variance();
            m.mean.iter().zip(var).map(|(mu, v)| mu * mu + v).collect()
        })
    }

    /// Wrapped `θ₋` samples retained for histograms.
    pub fn wrapped_samples(&self) -> &[f64] {
        &self.total.wrapped
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "theta_plus_mean", "theta_plus_var", "theta_minus_mean", "theta_minus_var"])?;
        let vm = self.theta_minus_var();
        let vp = self.theta_plus_var();
        for k in 0..self.times.len() {
            let (pm, pv) = match (&self.total.theta_plus, &vp) {
                (Some(m), Some(v)) => (m.mean[k].to_string(), v[k].to_string()),
                _ => (String::new(), String::new()),
            };
            w.write_record([
                self.times[k].to_string(),
                pm,
                pv,
                self.total.theta_minus.mean[k].to_string(),
                vm[k].to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Ensemble options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub stride: usize,
    pub batches: usize,
    /// Fraction of each record skipped before wrapped samples are kept.
    pub histogram_burn_in: f64,
    /// Keep every `histogram_thin`-th stored sample for the histogram; 0 disables collection.
    pub histogram_thin: usize,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self { stride: 1, batches: 32, histogram_burn_in: 0.2, histogram_thin: 0 }
    }
}

/// Wraps into `[−π, π)`.
pub fn wrap_half_open(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t >= PI { -PI } else { t }
}

/// Runs `n_traj` seeded trajectories in fixed batches; the result does not
/// depend on the worker count.
pub fn run_ensemble(
    sim: &Simulation,
    n_traj: usize,
    master_seed: u64,
    stride: usize,
) -> Result<EnsembleStats, SdeError> {
    run_ensemble_with(sim, n_traj, master_seed, &EnsembleOptions { stride, ..Default::default() })
}

pub fn run_ensemble_with(
    sim: &Simulation,
    n_traj: usize,
    master_seed: u64,
    opts: &EnsembleOptions,
) -> Result<EnsembleStats, SdeError> {
    if n_traj == 0 {
        return Err(SdeError::InvalidArgument { field: "n_traj", reason: "must be >= 1".into() });
    }
    let probe = sim.run(trajectory_seed(master_seed, 0), opts.stride)?;
    let times = probe.times.clone();
    let len = times.len();
    let n_batches = opts.batches.clamp(1, n_traj);
    let size = n_traj.div_ceil(n_batches);
    let ranges: Vec<(usize, usize)> = (0..n_batches)
        .map(|b| (b * size, ((b + 1) * size).min(n_traj)))
        .filter(|(a, b)| a < b)
        .collect();
    let start = (opts.histogram_burn_in.clamp(0.0, 1.0) * len as f64).ceil() as usize;
    let accumulate = |traj: &Trajectory, acc: &mut BatchMoments| {
        let minus = traj.theta_minus();
        acc.theta_minus.push(&minus);
        if let (Some(m), Some(p)) = (&mut acc.theta_plus, traj.theta_plus()) {
            m.push(&p);
        }
        if let (Some(m), Some(e)) = (&mut acc.eta, traj.eta()) {
            m.push(e);
        }
        if opts.histogram_thin > 0 {
            acc.wrapped.extend(minus[start.min(len)..].iter().step_by(opts.histogram_thin).map(|&x| wrap_half_open(x)));
        }
    };
    let empty = || BatchMoments {
        theta_plus: probe.theta_plus().map(|_| Moments::new(len)),
        theta_minus: Moments::new(len),
        eta: probe.eta().map(|_| Moments::new(len)),
        wrapped: Vec::new(),
    };
    let batches: Vec<BatchMoments> = ranges
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = empty();
            for i in a..b {
                let traj = if i == 0 {
                    probe.clone()
                } else {
                    sim.run(trajectory_seed(master_seed, i as u64), opts.stride)?
                };
                accumulate(&traj, &mut acc);
            }
            Ok(acc)
        })
        .collect::<Result<_, SdeError>>()?;
    let mut total = empty();
    for b in &batches {
        total.merge(b);
    }
    Ok(EnsembleStats { times, n_traj, master_seed, dt: sim.dt(), total, batches })
}

/// Time-averaged correlation table `C_{mn}(τ) = ⟨φ̄_m(t)φ_n(t+τ)⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    pub lags: Vec<f64>,
    pub table: Vec<CMat2>,
}

impl Autocorrelation {
    /// Time constant of `|C₁₁(τ)|` from a log-linear fit over lags where the
    /// normalized magnitude is above `e⁻²`.
    pub fn decay_time(&self) -> Option<f64> {
        let c0 = self.table.first()?[(0, 0)].norm();
        let pts: Vec<(f64, f64)> = self
            .lags
            .iter()
            .zip(&self.table)
            .map(|(t, c)| (*t, c[(0, 0)].norm() / c0))
            .take_while(|(_, r)| *r > (-2.0f64).exp())
            .map(|(t, r)| (t, r.ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
        let slope = sxy / sxx;
        (slope < 0.0).then(|| -1.0 / slope)
    }
}

/// Correlation table averaged over paths sampled every `sample_dt`, via
/// zero-padded FFTs with `1/(N − k)` normalization at lag `k`.
pub fn autocorrelation(
    paths: &[Vec<[C64; 2]>],
    sample_dt: f64,
    tau_max: f64,
) -> Result<Autocorrelation, SdeError> {
    check_positive("sample_dt", sample_dt)?;
    let n = paths.iter().map(Vec::len).min().unwrap_or(0);
    let span = n.saturating_sub(1) as f64 * sample_dt;
    if paths.is_empty() || n < 2 || tau_max > span / 4.0 {
        return Err(SdeError::InsufficientLength { tau_max, limit: span / 4.0 });
    }
    let lags = (tau_max / sample_dt).floor() as usize;
    let m = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut acc = vec![CMat2::zeros(); lags + 1];
    for path in paths {
        let spectra: Vec<Vec<C64>> = (0..2)
            .map(|c| {
                let mut buf = vec![C64::from(0.0); m];
                for (k, v) in path[..n].iter().enumerate() {
                    buf[k] = v[c];
                }
                fwd.process(&mut buf);
                buf
            })
            .collect();
        for a in 0..2 {
            for b in 0..2 {
                let mut prod: Vec<C64> = spectra[a].iter().zip(&spectra[b]).map(|(x, y)| x.conj() * y).collect();
                inv.process(&mut prod);
                for (k, slot) in acc.iter_mut().enumerate() {
                    slot[(a, b)] += prod[k] / (m as f64 * (n - k) as f64);
                }
            }
        }
    }
    let scale = C64::from(1.0 / paths.len() as f64);
    Ok(Autocorrelation {
        lags: (0..=lags).map(|k| k as f64 * sample_dt).collect(),
        table: acc.into_iter().map(|c| c * scale).collect(),
    })
}
