//! Layered run configuration: built-in defaults, then a TOML file, then flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::lindblad::SteadyStateMethod;
use crate::model::{LorentzianGain, PairParams, SelfEnergyModel};
use crate::sde::NoiseMode;

/// Reference rate in which all physical quantities of a file are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    #[default]
    Gamma1,
    OmegaEx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Frozen,
    Multiplicative,
    Off,
}

impl From<NoiseKind> for NoiseMode {
    fn from(k: NoiseKind) -> Self {
        match k {
            NoiseKind::Frozen => NoiseMode::Frozen,
            NoiseKind::Multiplicative => NoiseMode::Multiplicative,
            NoiseKind::Off => NoiseMode::Off,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LindbladMethod {
    NullSpace,
    #[default]
    Propagation,
}

impl From<LindbladMethod> for SteadyStateMethod {
    fn from(m: LindbladMethod) -> Self {
        match m {
            LindbladMethod::NullSpace => SteadyStateMethod::NullSpace,
            LindbladMethod::Propagation => SteadyStateMethod::Propagation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub unit: Unit,
    pub seed: u64,
    pub markov: MarkovConfig,
    pub lorentzian: LorentzianConfig,
    pub simulation: SimulationConfig,
    pub fp: FpConfig,
    pub lindblad: LindbladConfig,
    pub scan: ScanConfig,
    pub fig2: Fig2Config,
    pub fig5: Fig5Config,
    pub s1: S1Config,
    pub s2: S2Config,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            unit: Unit::Gamma1,
            seed: 1,
            markov: MarkovConfig::default(),
            lorentzian: LorentzianConfig::default(),
            simulation: SimulationConfig::default(),
            fp: FpConfig::default(),
            lindblad: LindbladConfig::default(),
            scan: ScanConfig::default(),
            fig2: Fig2Config::default(),
            fig5: Fig5Config::default(),
            s1: S1Config::default(),
            s2: S2Config::default(),
        }
    }
}

/// Two Stuart-Landau oscillators with Markovian gain, loss and coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkovConfig {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Dissipative coupling `D`.
    pub coupling: f64,
    /// Detuning `Δ = ω₁ − ω₂`.
    pub delta: f64,
}

impl Default for MarkovConfig {
    fn default() -> Self {
        Self { gamma1: 1.0, gamma2: 0.1, coupling: 0.1, delta: 0.0 }
    }
}

impl MarkovConfig {
    pub fn params(&self) -> Result<PairParams, CliError> {
        PairParams::with_detuning(self.delta, self.gamma1, self.gamma2, self.coupling)
            .map_err(|e| CliError::Config(format!("markov: {e}")))
    }
}

/// Lorentzian gain medium shared by both oscillators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorentzianConfig {
    pub omega_ex: f64,
    pub width: f64,
    pub gain_strength: f64,
    pub background_loss: f64,
    pub cross_sign: f64,
    pub keldysh_extra: f64,
    pub gamma2: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// Tabulated self-energy CSV replacing the Lorentzian when set.
    pub self_energy_file: Option<PathBuf>,
}

impl Default for LorentzianConfig {
    fn default() -> Self {
        Self {
            omega_ex: 1.0,
            width: 0.05,
            gain_strength: 0.02,
            background_loss: 0.001,
            cross_sign: 1.0,
            keldysh_extra: 0.0,
            gamma2: 0.001,
            omega1: 0.97,
            omega2: 0.96,
            self_energy_file: None,
        }
    }
}

impl LorentzianConfig {
    pub fn gain(&self) -> LorentzianGain {
        LorentzianGain {
            omega_ex: self.omega_ex,
            width: self.width,
            gain_strength: self.gain_strength,
            background_loss: self.background_loss,
            cross_sign: self.cross_sign,
            keldysh_extra: self.keldysh_extra,
        }
    }

    /// The Lorentzian, or the tabulated file when one is configured.
    pub fn model(&self, base: &Path) -> Result<SelfEnergyModel, CliError> {
        let model = match &self.self_energy_file {
            Some(p) => {
                let path = if p.is_absolute() { p.clone() } else { base.join(p) };
                let t = crate::model::TabulatedSelfEnergy::from_csv_path(&path, Default::default())
                    .map_err(|e| CliError::Config(format!("lorentzian.self_energy_file {}: {e}", path.display())))?;
                SelfEnergyModel::Tabulated(t)
            }
            None => SelfEnergyModel::LorentzianGain(self.gain()),
        };
        model.validate().map_err(|e| CliError::Config(format!("lorentzian: {e}")))?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Noisy Adler equation for the relative phase.
    #[default]
    Adler,
    /// One Stuart-Landau oscillator.
    Single,
    /// Complex Langevin equation with Markovian self-energies.
    Pair,
    /// Complex Langevin equation with the Lorentzian (or tabulated) self-energy.
    Lorentzian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub model: ModelKind,
    pub dt: f64,
    pub t_end: f64,
    pub trajectories: usize,
    pub stride: usize,
    pub noise: NoiseKind,
    pub bins: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Adler,
            dt: 0.01,
            t_end: 200.0,
            trajectories: 2000,
            stride: 10,
            noise: NoiseKind::Frozen,
            bins: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FpConfig {
    pub bins: usize,
    pub harmonics: usize,
    pub grid_points: usize,
}

impl Default for FpConfig {
    fn default() -> Self {
        Self { bins: 256, harmonics: 16, grid_points: 8192 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LindbladConfig {
    /// Fock cutoff per mode; chosen from the photon number when absent.
    pub cutoff: Option<usize>,
    pub method: LindbladMethod,
    pub tol: f64,
    pub bins: usize,
}

impl Default for LindbladConfig {
    fn default() -> Self {
        Self { cutoff: None, method: LindbladMethod::Propagation, tol: 1e-10, bins: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub delta_over_d: Vec<f64>,
    /// Photon numbers `n = γ₁/(2γ₂)` of the scan curves.
    pub photons: Vec<f64>,
    /// Couplings `D/γ₁` of the zero-detuning inset.
    pub inset_coupling: Vec<f64>,
    /// Monte Carlo check points added to each curve (empty to skip).
    pub mc_delta_over_d: Vec<f64>,
    pub mc_trajectories: usize,
    pub mc_t_end: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            delta_over_d: (0..=40).map(|k| 0.5 * k as f64).collect(),
            photons: vec![5.0, 10.0, 100.0],
            inset_coupling: (1..=9).map(|k| 0.1 * k as f64).collect(),
            mc_delta_over_d: vec![0.0, 1.0, 2.0],
            mc_trajectories: 256,
            mc_t_end: 400.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub photons: f64,
    pub delta_over_d: f64,
    pub trajectories: usize,
    /// Trajectories written out in full.
    pub shown: usize,
    pub t_end: f64,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self { photons: 10.0, delta_over_d: 0.13, trajectories: 400, shown: 5, t_end: 1000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig5Config {
    pub omega2_over_ex: Vec<f64>,
    pub omega1_min: f64,
    pub omega1_max: f64,
    pub omega1_points: usize,
    pub trajectories: usize,
    pub t_end: f64,
}

impl Default for Fig5Config {
    fn default() -> Self {
        Self {
            omega2_over_ex: vec![0.85, 0.92, 0.96, 1.00, 1.08, 1.12],
            omega1_min: 0.80,
            omega1_max: 1.20,
            omega1_points: 41,
            trajectories: 400,
            t_end: 4000.0,
        }
    }
}

impl Fig5Config {
    /// Equally spaced `ω₁` values (in units of `ω_ex`).
    pub fn omega1_grid(&self) -> Vec<f64> {
        let n = self.omega1_points.max(1);
        if n == 1 {
            return vec![self.omega1_min];
        }
        let h = (self.omega1_max - self.omega1_min) / (n - 1) as f64;
        (0..n).map(|k| self.omega1_min + h * k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct S1Config {
    pub trajectories: usize,
    /// Run length in units of `1/γ₂`.
    pub t_end_gamma2: f64,
    /// Largest lag in units of `1/γ₂`.
    pub tau_max_gamma2: f64,
    /// Samples per `1/γ₂`.
    pub samples_per_gamma2: usize,
}

impl Default for S1Config {
    fn default() -> Self {
        Self { trajectories: 40, t_end_gamma2: 40.0, tau_max_gamma2: 8.0, samples_per_gamma2: 50 }
    }
}

/// Langevin, Adler and Lindblad benchmark over photon numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct S2Config {
    pub photons: Vec<f64>,
    pub trajectories: usize,
    pub t_end: f64,
}

impl Default for S2Config {
    fn default() -> Self {
        Self { photons: vec![5.0, 10.0, 20.0], trajectories: 256, t_end: 400.0 }
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field}: must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field}: must be non-negative and finite, got {v}")))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<(), CliError> {
    if v >= min {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field}: must be >= {min}, got {v}")))
    }
}

impl Config {
    /// Parses a TOML document layered over the defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks ranges and the declared unit.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.unit {
            Unit::Gamma1 if self.markov.gamma1 != 1.0 => {
                return Err(CliError::Config(format!(
                    "markov.gamma1: must be 1 when unit = \"gamma1\", got {}",
                    self.markov.gamma1
                )))
            }
            Unit::OmegaEx if self.lorentzian.omega_ex != 1.0 => {
                return Err(CliError::Config(format!(
                    "lorentzian.omega_ex: must be 1 when unit = \"omega_ex\", got {}",
                    self.lorentzian.omega_ex
                )))
            }
            _ => {}
        }
        positive("markov.gamma1", self.markov.gamma1)?;
        positive("markov.gamma2", self.markov.gamma2)?;
        non_negative("markov.coupling", self.markov.coupling)?;
        if !self.markov.delta.is_finite() {
            return Err(CliError::Config("markov.delta: must be finite".into()));
        }
        positive("lorentzian.gamma2", self.lorentzian.gamma2)?;
        positive("lorentzian.width", self.lorentzian.width)?;
        non_negative("lorentzian.gain_strength", self.lorentzian.gain_strength)?;
        non_negative("lorentzian.background_loss", self.lorentzian.background_loss)?;
        non_negative("lorentzian.keldysh_extra", self.lorentzian.keldysh_extra)?;
        if self.lorentzian.cross_sign.abs() != 1.0 {
            return Err(CliError::Config(format!(
                "lorentzian.cross_sign: must be +1 or -1, got {}",
                self.lorentzian.cross_sign
            )));
        }
        positive("simulation.dt", self.simulation.dt)?;
        positive("simulation.t_end", self.simulation.t_end)?;
        at_least("simulation.trajectories", self.simulation.trajectories, 1)?;
        at_least("simulation.stride", self.simulation.stride, 1)?;
        at_least("simulation.bins", self.simulation.bins, 1)?;
        at_least("fp.bins", self.fp.bins, 1)?;
        at_least("fp.harmonics", self.fp.harmonics, 8)?;
        at_least("fp.grid_points", self.fp.grid_points, 256)?;
        if let Some(n) = self.lindblad.cutoff {
            at_least("lindblad.cutoff", n, 2)?;
        }
        positive("lindblad.tol", self.lindblad.tol)?;
        at_least("lindblad.bins", self.lindblad.bins, 1)?;
        for (k, n) in self.scan.photons.iter().enumerate() {
            positive(&format!("scan.photons[{k}]"), *n)?;
        }
        for (k, d) in self.scan.inset_coupling.iter().enumerate() {
            positive(&format!("scan.inset_coupling[{k}]"), *d)?;
        }
        positive("scan.mc_t_end", self.scan.mc_t_end)?;
        positive("fig2.photons", self.fig2.photons)?;
        positive("fig2.t_end", self.fig2.t_end)?;
        at_least("fig2.trajectories", self.fig2.trajectories, 2)?;
        at_least("fig5.omega1_points", self.fig5.omega1_points, 1)?;
        at_least("fig5.trajectories", self.fig5.trajectories, 2)?;
        positive("fig5.t_end", self.fig5.t_end)?;
        if self.fig5.omega1_max < self.fig5.omega1_min {
            return Err(CliError::Config("fig5.omega1_max: must be >= fig5.omega1_min".into()));
        }
        at_least("s1.trajectories", self.s1.trajectories, 1)?;
        positive("s1.t_end_gamma2", self.s1.t_end_gamma2)?;
        positive("s1.tau_max_gamma2", self.s1.tau_max_gamma2)?;
        at_least("s1.samples_per_gamma2", self.s1.samples_per_gamma2, 4)?;
        for (k, n) in self.s2.photons.iter().enumerate() {
            positive(&format!("s2.photons[{k}]"), *n)?;
        }
        at_least("s2.trajectories", self.s2.trajectories, 2)?;
        positive("s2.t_end", self.s2.t_end)?;
        Ok(())
    }
}

/// Reads and validates a configuration file; an empty file yields the defaults.
pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Config::from_toml_str(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
