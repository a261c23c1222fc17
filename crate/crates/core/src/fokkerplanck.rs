//! Stationary distribution of the noisy Adler phase difference,
//! `θ̇ = Δ + D sin θ + ξ` with `⟨ξ(t)ξ(t')⟩ = 2σ₀²δ(t − t')`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::sparse::SparseLu;

#[derive(Debug, Error)]
pub enum FokkerPlanckError {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },
    #[error("continued fraction not converged after {harmonics} harmonics (change {change:e})")]
    NotConverged { harmonics: usize, change: f64 },
    #[error("singular linear system: {0}")]
    SingularSystem(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ContinuedFraction,
    Grid,
    Histogram,
    Lindblad,
}

/// Normalized density on `[−π, π)` sampled at the cell centres
/// `θ_j = −π + (j + ½)·2π/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub method: Method,
}

impl PhaseDistribution {
    pub fn cell_centres(n: usize) -> Vec<f64> {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|j| -PI + (j as f64 + 0.5) * h).collect()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.grid.len() as f64
    }

    pub fn total(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.spacing()
    }

    /// `∫|P − Q| dθ` on a shared grid.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.grid.len(), other.grid.len(), "grids differ");
        self.density.iter().zip(&other.density).map(|(a, b)| (a - b).abs()).sum::<f64>()
            * self.spacing()
    }

    pub fn linf_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.grid.len(), other.grid.len(), "grids differ");
        self.density.iter().zip(&other.density).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }

    /// Grid point of maximal density.
    pub fn mode(&self) -> f64 {
        let k = self
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        self.grid[k]
    }

    /// Averages adjacent cells down to `bins` cells (`bins` must divide the length).
    pub fn coarsen(&self, bins: usize) -> Self {
        let n = self.grid.len();
        assert!(bins > 0 && n % bins == 0, "{bins} does not divide {n}");
        let f = n / bins;
        let density = self.density.chunks(f).map(|c| c.iter().sum::<f64>() / f as f64).collect();
        Self { grid: Self::cell_centres(bins), density, method: self.method }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["theta", "density"])?;
        for (t, p) in self.grid.iter().zip(&self.density) {
            w.write_record([t.to_string(), p.to_string()])?;
        }
        w.flush()
    }
}

fn check_noise(sigma0_sq: f64) -> Result<(), FokkerPlanckError> {
    if sigma0_sq.is_finite() && sigma0_sq > 0.0 {
        Ok(())
    } else {
        Err(FokkerPlanckError::InvalidArgument {
            field: "sigma0_sq",
            reason: format!("must be finite and > 0, got {sigma0_sq}"),
        })
    }
}

/// Fourier coefficients `p_0..p_K` of the stationary density, from the
/// continued fraction `S_k = p_k/p_{k−1} = (D/2) / ((D/2)S_{k+1} − (σ₀²k + iΔ))`.
fn cf_coefficients(delta: f64, d: f64, sigma0_sq: f64, harmonics: usize) -> Vec<Complex64> {
    let half = Complex64::from(0.5 * d);
    let mut ratios = vec![Complex64::from(0.0); harmonics + 2];
    for k in (1..=harmonics).rev() {
        let denom = half * ratios[k + 1] - Complex64::new(sigma0_sq * k as f64, delta);
        ratios[k] = half / denom;
    }
    let mut p = Vec::with_capacity(harmonics + 1);
    p.push(Complex64::from(1.0 / (2.0 * PI)));
    for k in 1..=harmonics {
        let next = p[k - 1] * ratios[k];
        p.push(next);
    }
    p
}

fn synthesize(p: &[Complex64], grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&t| {
            let base = Complex64::from_polar(1.0, t);
            let mut e = base;
            let mut sum = p[0].re;
            for pk in &p[1..] {
                sum += 2.0 * (pk * e).re;
                e *= base;
            }
            sum
        })
        .collect()
}

/// Continued-fraction solution on `n_bins` cell centres. The harmonic count
/// starts at `n_harmonics` and is doubled until the density changes by less
/// than `1e-10` in the sup norm.
pub fn stationary_adler_cf_on(
    delta: f64,
    d: f64,
    sigma0_sq: f64,
    n_harmonics: usize,
    n_bins: usize,
) -> Result<PhaseDistribution, FokkerPlanckError> {
    check_noise(sigma0_sq)?;
    if n_harmonics < 8 {
        return Err(FokkerPlanckError::InvalidArgument {
            field: "n_harmonics",
            reason: format!("must be >= 8, got {n_harmonics}"),
        });
    }
    let grid = PhaseDistribution::cell_centres(n_bins);
    let mut k = n_harmonics;
    let mut prev = synthesize(&cf_coefficients(delta, d, sigma0_sq, k), &grid);
    let mut change = f64::INFINITY;
    while k < (1 << 20) {
        k *= 2;
        let next = synthesize(&cf_coefficients(delta, d, sigma0_sq, k), &grid);
        change = prev.iter().zip(&next).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
        prev = next;
        if change < 1e-10 {
            return Ok(PhaseDistribution { grid, density: prev, method: Method::ContinuedFraction });
        }
    }
    Err(FokkerPlanckError::NotConverged { harmonics: k, change })
}

pub fn stationary_adler_cf(
    delta: f64,
    d: f64,
    sigma0_sq: f64,
    n_harmonics: usize,
) -> Result<PhaseDistribution, FokkerPlanckError> {
    stationary_adler_cf_on(delta, d, sigma0_sq, n_harmonics, 256)
}

/// `B(z) = z / (eᶻ − 1)`.
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// Finite-volume solution with Scharfetter–Gummel fluxes on `n_grid`
/// periodic cells; the redundant balance row is replaced by normalization.
pub fn stationary_adler_grid(
    delta: f64,
    d: f64,
    sigma0_sq: f64,
    n_grid: usize,
) -> Result<PhaseDistribution, FokkerPlanckError> {
    check_noise(sigma0_sq)?;
    if n_grid < 256 {
        return Err(FokkerPlanckError::InvalidArgument {
            field: "n_grid",
            reason: format!("must be >= 256, got {n_grid}"),
        });
    }
    let n = n_grid;
    let h = 2.0 * PI / n as f64;
    let grid = PhaseDistribution::cell_centres(n);
    // Face i sits between cells i and i+1; flux J_i = a_i P_i − b_i P_{i+1}.
    let (a, b): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| {
            let face = grid[i] + 0.5 * h;
            let z = (delta + d * face.sin()) * h / sigma0_sq;
            let c = sigma0_sq / h;
            (c * bernoulli(-z), c * bernoulli(z))
        })
        .unzip();
    let mut entries = Vec::with_capacity(4 * n);
    // Cell i: J_i − J_{i−1} = 0.
    for i in 0..n - 1 {
        let prev = (i + n - 1) % n;
        entries.push((i, i, a[i] + b[prev]));
        entries.push((i, (i + 1) % n, -b[i]));
        entries.push((i, prev, -a[prev]));
    }
    for j in 0..n {
        entries.push((n - 1, j, h));
    }
    let lu = SparseLu::new(n, &entries).map_err(FokkerPlanckError::SingularSystem)?;
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    lu.solve(&mut rhs);
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(FokkerPlanckError::SingularSystem("non-finite solution".into()));
    }
    Ok(PhaseDistribution { grid, density: rhs, method: Method::Grid })
}

/// Decay rate `λ_l = 3γ₂l²/4` of the `l`-th phase harmonic of a free limit cycle.
pub fn liouvillian_branch(gamma2: f64, l: i64) -> f64 {
    0.75 * gamma2 * (l * l) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bessel_i0(x: f64) -> f64 {
        // Power series; adequate for the moderate arguments used here.
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= (x / 2.0).powi(2) / (k * k) as f64;
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    #[test]
    fn uncoupled_density_is_uniform() {
        let cf = stationary_adler_cf(0.3, 0.0, 0.1, 8).unwrap();
        let grid = stationary_adler_grid(0.3, 0.0, 0.1, 512).unwrap();
        for p in cf.density.iter().chain(&grid.density) {
            assert!((p - 1.0 / (2.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn resonant_density_has_boltzmann_form() {
        let (d, s) = (0.1, 0.065);
        let cf = stationary_adler_cf(0.0, d, s, 16).unwrap();
        let z = 2.0 * PI * bessel_i0(d / s);
        for (t, p) in cf.grid.iter().zip(&cf.density) {
            let exact = (-d * t.cos() / s).exp() / z;
            assert!((p - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn normalization_and_positivity() {
        for &(delta, d, s) in &[(0.013, 0.1, 0.065), (0.5, 0.1, 0.01), (-0.2, 0.3, 0.2)] {
            let cf = stationary_adler_cf(delta, d, s, 8).unwrap();
            assert!((cf.total() - 1.0).abs() < 1e-10);
            assert!(cf.density.iter().all(|&p| p >= -1e-12));
            let grid = stationary_adler_grid(delta, d, s, 1024).unwrap();
            assert!((grid.total() - 1.0).abs() < 1e-10);
            assert!(grid.density.iter().all(|&p| p >= -1e-12));
        }
    }

    #[test]
    fn continued_fraction_matches_grid() {
        for &(delta, d, s) in &[(0.013, 0.1, 0.065), (0.05, 0.1, 0.16), (0.2, 0.1, 0.03)] {
            let cf = stationary_adler_cf_on(delta, d, s, 8, 8192).unwrap();
            let grid = stationary_adler_grid(delta, d, s, 8192).unwrap();
            let err = cf.linf_distance(&grid);
            assert!(err < 1e-6, "({delta}, {d}, {s}): {err:e}");
        }
    }

    #[test]
    fn weak_noise_concentrates_at_stable_point() {
        let (delta, d) = (0.05, 0.1);
        let cf = stationary_adler_cf_on(delta, d, 1e-3, 8, 1024).unwrap();
        let theta0 = (-delta / d).atan2(-(1.0 - (delta / d).powi(2)).sqrt());
        let dist = crate::saddle::wrap_angle(cf.mode() - theta0).abs();
        assert!(dist <= cf.spacing());
    }

    #[test]
    fn grid_solution_mirrors_under_detuning_reversal() {
        let plus = stationary_adler_grid(0.04, 0.1, 0.05, 1024).unwrap();
        let minus = stationary_adler_grid(-0.04, 0.1, 0.05, 1024).unwrap();
        let n = plus.density.len();
        for j in 0..n {
            assert!((plus.density[j] - minus.density[n - 1 - j]).abs() < 1e-8);
        }
    }

    #[test]
    fn liouvillian_branch_values() {
        assert_eq!(liouvillian_branch(0.1, 0), 0.0);
        assert!((liouvillian_branch(0.1, 1) - 0.075).abs() < 1e-15);
        assert_eq!(liouvillian_branch(0.3, -3), liouvillian_branch(0.3, 3));
    }

    #[test]
    fn rejects_invalid_arguments() {
        assert!(stationary_adler_cf(0.0, 0.1, 0.0, 8).is_err());
        assert!(stationary_adler_cf(0.0, 0.1, 0.1, 4).is_err());
        assert!(stationary_adler_grid(0.0, 0.1, 0.1, 100).is_err());
    }
}
