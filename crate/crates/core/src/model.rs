//! Physical parameters and frequency-dependent self-energy providers.
//!
//! All self-energies are 2×2 matrices over the oscillator index and follow
//! the Keldysh sign conventions used throughout the crate:
//!
//! * gain appears as a positive imaginary part of the retarded component,
//!   `Im Π^R > 0`;
//! * the Keldysh component is anti-Hermitian with `i·Π^K` Hermitian positive
//!   semidefinite (for a pure rate `κ`, `Π^K = -iκ`).
//!
//! The two oscillators are assumed identical apart from their bare
//! frequencies, so every provider returns `Π₁₁ = Π₂₂` and `Π₁₂ = Π₂₁`.

use std::path::Path;

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMat2 = Matrix2<C64>;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("frequency {omega} outside tabulated range [{min}, {max}]")]
    OutOfRange { omega: f64, min: f64, max: f64 },
    #[error("invalid self-energy model: {0}")]
    InvalidModel(String),
    #[error("noise matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("failed to read self-energy table: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed self-energy table: {0}")]
    Table(String),
}

fn positive(field: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            field,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            field,
            reason: format!("must be finite and >= 0, got {value}"),
        })
    }
}

/// A single Stuart-Landau oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleOscillatorParams {
    pub omega0: f64,
    /// Single-photon gain rate.
    pub gamma1: f64,
    /// Two-photon loss rate.
    pub gamma2: f64,
}

impl SingleOscillatorParams {
    pub fn new(omega0: f64, gamma1: f64, gamma2: f64) -> Result<Self, ModelError> {
        positive("gamma1", gamma1)?;
        positive("gamma2", gamma2)?;
        Ok(Self { omega0, gamma1, gamma2 })
    }
}

/// Two identical Stuart-Landau oscillators with dissipative coupling `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Dissipative coupling rate `D` of the jump operator `√D (a₁ + a₂)`.
    pub coupling: f64,
}

impl PairParams {
    pub fn new(
        omega1: f64,
        omega2: f64,
        gamma1: f64,
        gamma2: f64,
        coupling: f64,
    ) -> Result<Self, ModelError> {
        positive("gamma1", gamma1)?;
        positive("gamma2", gamma2)?;
        non_negative("coupling", coupling)?;
        Ok(Self { omega1, omega2, gamma1, gamma2, coupling })
    }

    /// Convenience constructor centred at zero mean frequency.
    pub fn with_detuning(
        detuning: f64,
        gamma1: f64,
        gamma2: f64,
        coupling: f64,
    ) -> Result<Self, ModelError> {
        Self::new(detuning / 2.0, -detuning / 2.0, gamma1, gamma2, coupling)
    }

    /// `Δ = ω₁ − ω₂`.
    pub fn detuning(&self) -> f64 {
        self.omega1 - self.omega2
    }

    /// Mean photon number of an isolated limit cycle, `γ₁ / (2γ₂)`.
    pub fn photon_number(&self) -> f64 {
        self.gamma1 / (2.0 * self.gamma2)
    }

    pub fn couplings(&self) -> QuarticCouplings {
        QuarticCouplings::stuart_landau(self.gamma2)
    }

    pub fn self_energy(&self) -> SelfEnergyModel {
        SelfEnergyModel::MarkovianPair { gamma1: self.gamma1, coupling: self.coupling }
    }
}

/// Time-local quartic couplings of the classical/quantum field expansion.
///
/// `lambda1` is the coefficient `Λ₁*` that multiplies `r²` in the
/// saddle-point equations; `lambda5` multiplies the quantum-quantum term and
/// feeds the noise matrix. The dephasing couplings are identically zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCouplings {
    pub lambda1: C64,
    pub lambda5: C64,
}

impl QuarticCouplings {
    /// Two-photon loss `√γ₂ a²`: `Λ₁* = -iγ₂/2`, `Λ₅ = -2iγ₂`.
    pub fn stuart_landau(gamma2: f64) -> Self {
        Self {
            lambda1: C64::new(0.0, -gamma2 / 2.0),
            lambda5: C64::new(0.0, -2.0 * gamma2),
        }
    }

    /// Effective two-photon loss rate `γ₂ = -2 Im Λ₁*`.
    pub fn two_photon_loss(&self) -> f64 {
        -2.0 * self.lambda1.im
    }
}

/// Retarded and Keldysh self-energy at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfEnergy {
    pub retarded: CMat2,
    pub keldysh: CMat2,
}

impl SelfEnergy {
    /// Advanced component `Π^A = (Π^R)†`.
    pub fn advanced(&self) -> CMat2 {
        self.retarded.adjoint()
    }

    fn symmetric(r11: C64, r12: C64, k11: C64, k12: C64) -> Self {
        Self {
            retarded: CMat2::new(r11, r12, r12, r11),
            keldysh: CMat2::new(k11, k12, k12, k11),
        }
    }
}

/// Lorentzian gain medium shared by both oscillators.
///
/// The gain line `L(ω) = -g·w / (ω − ω_ex + i·w)` has `Im L = g·w²/((ω−ω_ex)² + w²)`,
/// peaking at `ω_ex` with height `g`. Local terms carry an additional
/// background loss. The cross term is `Π₁₂ = -cross_sign·L`, which for
/// `cross_sign = +1` reproduces the `Π₁₂ ≈ -Π₁₁` pattern of a gain medium
/// coupled to the antisymmetric mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianGain {
    pub omega_ex: f64,
    pub width: f64,
    pub gain_strength: f64,
    pub background_loss: f64,
    pub cross_sign: f64,
    /// Extra white Keldysh noise `κ_extra ≥ 0` on the local terms.
    pub keldysh_extra: f64,
}

impl LorentzianGain {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("width", self.width)?;
        non_negative("gain_strength", self.gain_strength)?;
        non_negative("background_loss", self.background_loss)?;
        non_negative("keldysh_extra", self.keldysh_extra)?;
        if self.cross_sign != 1.0 && self.cross_sign != -1.0 {
            return Err(ModelError::InvalidParameter {
                field: "cross_sign",
                reason: format!("must be +1 or -1, got {}", self.cross_sign),
            });
        }
        Ok(())
    }

    fn line(&self, omega: f64) -> C64 {
        -self.gain_strength * self.width / C64::new(omega - self.omega_ex, self.width)
    }

    fn line_derivative(&self, omega: f64) -> C64 {
        let z = C64::new(omega - self.omega_ex, self.width);
        self.gain_strength * self.width / (z * z)
    }

    fn evaluate(&self, omega: f64) -> SelfEnergy {
        let line = self.line(omega);
        let gain = line.im;
        let r11 = line - I * (self.background_loss / 2.0);
        let r12 = -self.cross_sign * line;
        let k11 = -I * (2.0 * gain + self.background_loss + self.keldysh_extra);
        let k12 = -self.cross_sign * (-I * 2.0 * gain);
        SelfEnergy::symmetric(r11, r12, k11, k12)
    }
}

/// Interpolation scheme for tabulated self-energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    Linear,
    #[default]
    MonotoneCubic,
}

/// One real-valued tabulated channel with precomputed node slopes.
#[derive(Debug, Clone, PartialEq)]
struct Channel {
    values: Vec<f64>,
    slopes: Vec<f64>,
}

/// Self-energies sampled on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSelfEnergy {
    omega: Vec<f64>,
    /// Re/Im of Π^R₁₁, Π^R₁₂, Π^K₁₁, Π^K₁₂ in that order.
    channels: Vec<Channel>,
    interpolation: Interpolation,
    /// Step of the central finite difference used for `∂ωΠ^R`.
    pub derivative_step: f64,
}

/// Column header of the tabulated self-energy CSV format.
pub const TABLE_HEADER: [&str; 9] = [
    "omega", "Re_PiR_11", "Im_PiR_11", "Re_PiR_12", "Im_PiR_12", "Re_PiK_11", "Im_PiK_11",
    "Re_PiK_12", "Im_PiK_12",
];

impl TabulatedSelfEnergy {
    /// Builds a table from frequency nodes and complex samples
    /// `[Π^R₁₁, Π^R₁₂, Π^K₁₁, Π^K₁₂]`.
    pub fn new(
        omega: Vec<f64>,
        samples: Vec<[C64; 4]>,
        interpolation: Interpolation,
    ) -> Result<Self, ModelError> {
        if omega.len() < 3 {
            return Err(ModelError::Table("need at least 3 frequency nodes".into()));
        }
        if omega.len() != samples.len() {
            return Err(ModelError::Table(format!(
                "{} frequencies but {} samples",
                omega.len(),
                samples.len()
            )));
        }
        if omega.iter().any(|w| !w.is_finite()) || omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::Table("frequencies must be finite and strictly increasing".into()));
        }
        let mut channels = Vec::with_capacity(8);
        for entry in 0..4 {
            for part in 0..2 {
                let values: Vec<f64> = samples
                    .iter()
                    .map(|s| if part == 0 { s[entry].re } else { s[entry].im })
                    .collect();
                let slopes = match interpolation {
                    Interpolation::Linear => Vec::new(),
                    Interpolation::MonotoneCubic => pchip_slopes(&omega, &values),
                };
                channels.push(Channel { values, slopes });
            }
        }
        let spacing = omega.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Ok(Self { omega, channels, interpolation, derivative_step: 0.5 * spacing })
    }

    /// Samples an arbitrary model on a grid, e.g. to emulate measured data.
    pub fn sample(
        model: &SelfEnergyModel,
        omega: Vec<f64>,
        interpolation: Interpolation,
    ) -> Result<Self, ModelError> {
        let samples = omega
            .iter()
            .map(|&w| {
                let s = model.evaluate_unchecked(w)?;
                Ok([s.retarded[(0, 0)], s.retarded[(0, 1)], s.keldysh[(0, 0)], s.keldysh[(0, 1)]])
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Self::new(omega, samples, interpolation)
    }

    pub fn from_csv_path(path: &Path, interpolation: Interpolation) -> Result<Self, ModelError> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, interpolation)
    }

    pub fn from_csv_reader<R: std::io::Read>(
        reader: R,
        interpolation: Interpolation,
    ) -> Result<Self, ModelError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| ModelError::Table(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != TABLE_HEADER {
            return Err(ModelError::Table(format!(
                "expected header `{}`, got `{}`",
                TABLE_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut omega = Vec::new();
        let mut samples = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| ModelError::Table(e.to_string()))?;
            let mut row = [0.0; 9];
            for (k, field) in record.iter().enumerate().take(9) {
                row[k] = field.parse().map_err(|_| {
                    ModelError::Table(format!("line {}: cannot parse `{field}`", line + 2))
                })?;
            }
            if record.len() != 9 {
                return Err(ModelError::Table(format!("line {}: expected 9 fields", line + 2)));
            }
            omega.push(row[0]);
            samples.push([
                C64::new(row[1], row[2]),
                C64::new(row[3], row[4]),
                C64::new(row[5], row[6]),
                C64::new(row[7], row[8]),
            ]);
        }
        Self::new(omega, samples, interpolation)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), ModelError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let table_err = |e: csv::Error| ModelError::Table(e.to_string());
        wtr.write_record(TABLE_HEADER).map_err(table_err)?;
        for (i, w) in self.omega.iter().enumerate() {
            let mut row = vec![w.to_string()];
            row.extend(self.channels.iter().map(|c| c.values[i].to_string()));
            wtr.write_record(&row).map_err(table_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.omega
    }

    fn check_range(&self, omega: f64) -> Result<(), ModelError> {
        let (min, max) = self.range();
        if omega.is_finite() && omega >= min && omega <= max {
            Ok(())
        } else {
            Err(ModelError::OutOfRange { omega, min, max })
        }
    }

    fn interpolate(&self, omega: f64) -> Result<SelfEnergy, ModelError> {
        self.check_range(omega)?;
        let n = self.omega.len();
        let mut out = [0.0; 8];
        match self.omega.binary_search_by(|w| w.total_cmp(&omega)) {
            Ok(node) => {
                for (o, c) in out.iter_mut().zip(&self.channels) {
                    *o = c.values[node];
                }
            }
            Err(pos) => {
                let k = pos.clamp(1, n - 1) - 1;
                let (x0, x1) = (self.omega[k], self.omega[k + 1]);
                let h = x1 - x0;
                let t = (omega - x0) / h;
                for (o, c) in out.iter_mut().zip(&self.channels) {
                    let (y0, y1) = (c.values[k], c.values[k + 1]);
                    *o = match self.interpolation {
                        Interpolation::Linear => y0 + t * (y1 - y0),
                        Interpolation::MonotoneCubic => {
                            let t2 = t * t;
                            let t3 = t2 * t;
                            let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                            let h10 = t3 - 2.0 * t2 + t;
                            let h01 = -2.0 * t3 + 3.0 * t2;
                            let h11 = t3 - t2;
                            h00 * y0 + h10 * h * c.slopes[k] + h01 * y1 + h11 * h * c.slopes[k + 1]
                        }
                    };
                }
            }
        }
        Ok(SelfEnergy::symmetric(
            C64::new(out[0], out[1]),
            C64::new(out[2], out[3]),
            C64::new(out[4], out[5]),
            C64::new(out[6], out[7]),
        ))
    }
}

/// Fritsch–Carlson slopes for a monotone piecewise-cubic Hermite interpolant.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        d[0] = end(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    d
}

/// Provider of the frequency-dependent self-energy matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum SelfEnergyModel {
    /// Two Stuart-Landau oscillators with gain `γ₁` and dissipative coupling `D`.
    MarkovianPair { gamma1: f64, coupling: f64 },
    LorentzianGain(LorentzianGain),
    Tabulated(TabulatedSelfEnergy),
}

impl SelfEnergyModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::MarkovianPair { gamma1, coupling } => {
                positive("gamma1", *gamma1)?;
                non_negative("coupling", *coupling)
            }
            Self::LorentzianGain(l) => l.validate(),
            Self::Tabulated(_) => Ok(()),
        }
    }

    fn evaluate_unchecked(&self, omega: f64) -> Result<SelfEnergy, ModelError> {
        Ok(match self {
            Self::MarkovianPair { gamma1, coupling } => {
                let (g, d) = (*gamma1, *coupling);
                SelfEnergy::symmetric(
                    -0.5 * I * (d - g),
                    -0.5 * I * d,
                    -I * (d + g),
                    -I * d,
                )
            }
            Self::LorentzianGain(l) => l.evaluate(omega),
            Self::Tabulated(t) => t.interpolate(omega)?,
        })
    }

    /// Evaluates `Π^R(ω)` and `Π^K(ω)` and checks the Keldysh positivity.
    pub fn evaluate(&self, omega: f64) -> Result<SelfEnergy, ModelError> {
        let s = self.evaluate_unchecked(omega)?;
        let noise = s.keldysh * I;
        let min = hermitian_min_eigenvalue(&noise);
        let scale = noise.norm().max(f64::MIN_POSITIVE);
        let herm_err = (noise - noise.adjoint()).norm();
        if herm_err > 1e-12 * scale || min < -1e-12 * scale {
            return Err(ModelError::InvalidModel(format!(
                "i·Π^K({omega}) is not Hermitian positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(s)
    }

    /// `∂ωΠ^R(ω)`: analytic for the closed-form models, central differences
    /// for tabulated data.
    pub fn retarded_derivative(&self, omega: f64) -> Result<CMat2, ModelError> {
        match self {
            Self::MarkovianPair { .. } => Ok(CMat2::zeros()),
            Self::LorentzianGain(l) => {
                let d = l.line_derivative(omega);
                Ok(CMat2::new(d, -l.cross_sign * d, -l.cross_sign * d, d))
            }
            Self::Tabulated(t) => {
                let h = t.derivative_step;
                t.check_range(omega - h)?;
                t.check_range(omega + h)?;
                let plus = t.interpolate(omega + h)?.retarded;
                let minus = t.interpolate(omega - h)?.retarded;
                Ok((plus - minus) / C64::from(2.0 * h))
            }
        }
    }

    /// Characteristic rate of the model used to scale solver tolerances.
    pub fn rate_scale(&self) -> f64 {
        match self {
            Self::MarkovianPair { gamma1, .. } => *gamma1,
            Self::LorentzianGain(l) => l.gain_strength.max(l.background_loss).max(f64::MIN_POSITIVE),
            Self::Tabulated(t) => t.channels[..4]
                .iter()
                .flat_map(|c| c.values.iter())
                .fold(0.0_f64, |m, v| m.max(v.abs()))
                .max(f64::MIN_POSITIVE),
        }
    }

    /// Frequency window where the model is defined, if bounded.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            Self::Tabulated(t) => Some(t.range()),
            _ => None,
        }
    }
}

/// Evaluates the self-energy of `model` at `omega`.
pub fn eval_self_energy(model: &SelfEnergyModel, omega: f64) -> Result<SelfEnergy, ModelError> {
    model.evaluate(omega)
}

pub fn self_energy_derivative(model: &SelfEnergyModel, omega: f64) -> Result<CMat2, ModelError> {
    model.retarded_derivative(omega)
}

/// Smallest eigenvalue of a 2×2 Hermitian matrix (using its Hermitian part).
pub fn hermitian_min_eigenvalue(m: &CMat2) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
    mean - half_gap
}

/// Noise correlation matrix `C` and its lower Cholesky factor `B` with `B·B† = C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMatrix {
    pub correlation: CMat2,
    pub factor: CMat2,
}

impl NoiseMatrix {
    /// Builds the factorization of a Hermitian PSD correlation matrix.
    pub fn from_correlation(c: CMat2) -> Result<Self, ModelError> {
        let c = (c + c.adjoint()) * C64::from(0.5);
        let scale = c.norm();
        let min = hermitian_min_eigenvalue(&c);
        if min < -1e-12 * scale {
            return Err(ModelError::NotPsd { min_eigenvalue: min });
        }
        let c11 = c[(0, 0)].re.max(0.0);
        let mut b = CMat2::zeros();
        if c11 > 0.0 {
            let b11 = c11.sqrt();
            let b21 = c[(1, 0)] / b11;
            let b22 = (c[(1, 1)].re - b21.norm_sqr()).max(0.0).sqrt();
            b[(0, 0)] = C64::from(b11);
            b[(1, 0)] = b21;
            b[(1, 1)] = C64::from(b22);
        } else {
            b[(1, 1)] = C64::from(c[(1, 1)].re.max(0.0).sqrt());
        }
        Ok(Self { correlation: c, factor: b })
    }

    /// Correlation matrix seen by the phase fields for a static phase
    /// difference `θ₀ = θ₁ − θ₂`: `C'_{mn} = e^{i(θ_m − θ_n)} C_{mn}`.
    pub fn phase_frame(&self, theta0: f64) -> CMat2 {
        let mut out = self.correlation;
        out[(0, 1)] *= C64::from_polar(1.0, theta0);
        out[(1, 0)] *= C64::from_polar(1.0, -theta0);
        out
    }
}

/// Correlation matrix of the Hubbard–Stratonovich noise in the rescaled
/// field frame, `C_{mn} = i·Π^K_{mn}(ν)/(r_m r_n) + i·Λ₅·|φ_m|²δ_{mn}`.
///
/// `moduli` are the instantaneous `|φ_n|`; pass `[1, 1]` to freeze the noise
/// at the saddle point.
pub fn noise_matrix_with_moduli(
    model: &SelfEnergyModel,
    nu: f64,
    radii: (f64, f64),
    couplings: &QuarticCouplings,
    moduli: [f64; 2],
) -> Result<NoiseMatrix, ModelError> {
    let (r1, r2) = radii;
    positive("r1", r1)?;
    positive("r2", r2)?;
    let s = model.evaluate(nu)?;
    let r = [r1, r2];
    let mut c = CMat2::zeros();
    for m in 0..2 {
        for n in 0..2 {
            c[(m, n)] = I * s.keldysh[(m, n)] / (r[m] * r[n]);
        }
        c[(m, m)] += I * couplings.lambda5 * moduli[m] * moduli[m];
    }
    NoiseMatrix::from_correlation(c)
}

/// Noise matrix frozen at the saddle point.
pub fn noise_matrix(
    model: &SelfEnergyModel,
    nu: f64,
    radii: (f64, f64),
    couplings: &QuarticCouplings,
) -> Result<NoiseMatrix, ModelError> {
    noise_matrix_with_moduli(model, nu, radii, couplings, [1.0, 1.0])
}
