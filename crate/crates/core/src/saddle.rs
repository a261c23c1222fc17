//! Stationary saddle-point (mean-field) solutions of single and coupled
//! limit-cycle oscillators.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use thiserror::Error;

use crate::model::{
    CMat2, ModelError, PairParams, QuarticCouplings, SelfEnergyModel, SingleOscillatorParams, C64,
};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum SaddleError {
    #[error("no limit cycle: {0}")]
    NoLimitCycle(String),
    #[error("saddle-point solver diverged on every start")]
    SolverDiverged,
    #[error("friction matrix is singular (condition number {0:e})")]
    SingularFriction(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    Synchronized,
    /// Both oscillators run at their own frequencies.
    Unsynchronized { nu1: f64, nu2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    /// Bare oscillator frequencies the solution was computed for.
    pub omega1: f64,
    pub omega2: f64,
    pub nu: f64,
    pub r1: f64,
    pub r2: f64,
    /// Static phase difference `θ₁ − θ₂` in `(−π, π]`; `None` when unsynchronized.
    pub theta0: Option<f64>,
    pub branch: Branch,
    pub residual: f64,
    pub stability: Vec<C64>,
}

impl SaddleSolution {
    pub fn is_synchronized(&self) -> bool {
        matches!(self.branch, Branch::Synchronized)
    }
}

/// Result of the generic synchronized-branch search.
#[derive(Debug, Clone, PartialEq)]
pub enum SyncOutcome {
    Synchronized(SaddleSolution),
    /// No stable synchronized root exists; `roots` counts the unstable ones found.
    NoSync { roots: usize },
}

impl SyncOutcome {
    pub fn solution(&self) -> Option<&SaddleSolution> {
        match self {
            Self::Synchronized(s) => Some(s),
            Self::NoSync { .. } => None,
        }
    }
}

/// Maps `θ` into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Single limit cycle: `ν = ω₀ + Re Λ₁*·r²` with `r² = −γ₁ / (2 Im Λ₁*)`.
pub fn solve_single(
    params: &SingleOscillatorParams,
    couplings: &QuarticCouplings,
) -> Result<(f64, f64), SaddleError> {
    let im = couplings.lambda1.im;
    let r2 = -params.gamma1 / (2.0 * im);
    if !(r2.is_finite() && r2 > 0.0) {
        return Err(SaddleError::NoLimitCycle(format!("r² = {r2} is not positive")));
    }
    Ok((params.omega0 + couplings.lambda1.re * r2, r2.sqrt()))
}

/// Closed-form saddle point of the Markovian pair.
pub fn solve_pair_markovian(params: &PairParams) -> Result<SaddleSolution, SaddleError> {
    let (g1, g2, d) = (params.gamma1, params.gamma2, params.coupling);
    let delta = params.detuning();
    let model = params.self_energy();
    let couplings = params.couplings();
    if d > 0.0 && delta.abs() <= d {
        let root = (1.0 - (delta / d).powi(2)).max(0.0).sqrt();
        let r2 = (g1 - d + d * root) / g2;
        if r2 <= 0.0 {
            return Err(SaddleError::NoLimitCycle(format!("r² = {r2} inside the tongue")));
        }
        // atan2(−0, −1) = −π; the `+ 0.0` maps a negative zero to π.
        let theta0 = wrap_angle((-delta / d + 0.0).atan2(-root));
        let r = r2.sqrt();
        let mut sol = SaddleSolution {
            omega1: params.omega1,
            omega2: params.omega2,
            nu: 0.5 * (params.omega1 + params.omega2),
            r1: r,
            r2: r,
            theta0: Some(theta0),
            branch: Branch::Synchronized,
            residual: 0.0,
            stability: Vec::new(),
        };
        let res = residuals(&model, params.omega1, params.omega2, &couplings, &sol.unknowns())?;
        sol.residual = res.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        sol.stability = stability_of_saddle(&sol, &model, &couplings)?;
        Ok(sol)
    } else {
        let r2 = (g1 - d) / g2;
        if r2 <= 0.0 {
            return Err(SaddleError::NoLimitCycle(format!(
                "r² = (γ₁ − D)/γ₂ = {r2} outside the tongue"
            )));
        }
        let r = r2.sqrt();
        Ok(SaddleSolution {
            omega1: params.omega1,
            omega2: params.omega2,
            nu: 0.5 * (params.omega1 + params.omega2),
            r1: r,
            r2: r,
            theta0: None,
            branch: Branch::Unsynchronized { nu1: params.omega1, nu2: params.omega2 },
            residual: 0.0,
            stability: Vec::new(),
        })
    }
}

impl SaddleSolution {
    fn unknowns(&self) -> Vector4<f64> {
        Vector4::new(self.nu, self.theta0.unwrap_or(PI), self.r1, self.r2)
    }
}

/// Real and imaginary parts of the two complex synchronized-branch residuals
/// for unknowns `x = (ν, θ₀, r₁, r₂)`.
pub fn residuals(
    model: &SelfEnergyModel,
    omega1: f64,
    omega2: f64,
    couplings: &QuarticCouplings,
    x: &Vector4<f64>,
) -> Result<Vector4<f64>, ModelError> {
    let (r1_c, r2_c) = complex_residuals(model, omega1, omega2, couplings, x)?;
    Ok(Vector4::new(r1_c.re, r1_c.im, r2_c.re, r2_c.im))
}

fn complex_residuals(
    model: &SelfEnergyModel,
    omega1: f64,
    omega2: f64,
    couplings: &QuarticCouplings,
    x: &Vector4<f64>,
) -> Result<(C64, C64), ModelError> {
    let (nu, th, r1, r2) = (x[0], x[1], x[2], x[3]);
    let s = model.evaluate(nu)?;
    let p11 = s.retarded[(0, 0)];
    let p12 = s.retarded[(0, 1)];
    let e = C64::from_polar(1.0, th);
    let lam = couplings.lambda1;
    let res1 = nu - omega1 - p11 - e * p12 * (r2 / r1) - lam * r1 * r1;
    let res2 = nu - omega2 - p11 - e.conj() * p12 * (r1 / r2) - lam * r2 * r2;
    Ok((res1, res2))
}

fn jacobian(
    model: &SelfEnergyModel,
    couplings: &QuarticCouplings,
    x: &Vector4<f64>,
) -> Result<Matrix4<f64>, ModelError> {
    let (nu, th, r1, r2) = (x[0], x[1], x[2], x[3]);
    let s = model.evaluate(nu)?;
    let ds = model.retarded_derivative(nu)?;
    let (p12, dp11, dp12) = (s.retarded[(0, 1)], ds[(0, 0)], ds[(0, 1)]);
    let e = C64::from_polar(1.0, th);
    let ec = e.conj();
    let lam = couplings.lambda1;
    let one = C64::from(1.0);
    let rows: [[C64; 4]; 2] = [
        [
            one - dp11 - e * dp12 * (r2 / r1),
            -I * e * p12 * (r2 / r1),
            e * p12 * (r2 / (r1 * r1)) - 2.0 * lam * r1,
            -e * p12 / r1,
        ],
        [
            one - dp11 - ec * dp12 * (r1 / r2),
            I * ec * p12 * (r1 / r2),
            -ec * p12 / r2,
            ec * p12 * (r1 / (r2 * r2)) - 2.0 * lam * r2,
        ],
    ];
    let mut j = Matrix4::zeros();
    for (k, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            j[(2 * k, c)] = v.re;
            j[(2 * k + 1, c)] = v.im;
        }
    }
    Ok(j)
}

/// Tuning knobs of the multi-start root search.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub nu_starts: usize,
    pub theta_starts: Vec<f64>,
    pub max_iterations: usize,
    /// Residual tolerance in units of the model rate scale.
    pub tolerance: f64,
    /// Half-width `Γ` added around `[min ω, max ω]`; defaults to the model's own scale.
    pub window: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            nu_starts: 9,
            theta_starts: vec![PI / 2.0, PI, 3.0 * PI / 2.0],
            max_iterations: 200,
            tolerance: 1e-9,
            window: None,
        }
    }
}

fn default_window(model: &SelfEnergyModel) -> f64 {
    match model {
        SelfEnergyModel::MarkovianPair { gamma1, .. } => *gamma1,
        SelfEnergyModel::LorentzianGain(l) => 2.0 * l.width,
        SelfEnergyModel::Tabulated(_) => model.rate_scale(),
    }
}

/// Levenberg–Marquardt on the four real residual components.
fn levenberg_marquardt(
    model: &SelfEnergyModel,
    omega1: f64,
    omega2: f64,
    couplings: &QuarticCouplings,
    start: Vector4<f64>,
    opts: &SolverOptions,
    tol: f64,
) -> Option<(Vector4<f64>, f64)> {
    let eval = |x: &Vector4<f64>| -> Option<Vector4<f64>> {
        if x[2] == 0.0 || x[3] == 0.0 {
            return None;
        }
        residuals(model, omega1, omega2, couplings, x).ok().filter(|r| r.iter().all(|v| v.is_finite()))
    };
    let mut x = start;
    let mut f = eval(&x)?;
    let mut cost = f.norm_squared();
    let mut mu = 1e-3;
    let mut polish = 0;
    for _ in 0..opts.max_iterations {
        if f.amax() < tol {
            // A few extra steps past the tolerance tighten ill-conditioned roots.
            polish += 1;
            if polish > 4 {
                break;
            }
        }
        let j = jacobian(model, couplings, &x).ok()?;
        let jt = j.transpose();
        let jtj = jt * j;
        let g = jt * f;
        let mut accepted = false;
        for _ in 0..30 {
            let mut lhs = jtj;
            for k in 0..4 {
                lhs[(k, k)] += mu * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = lhs.lu().solve(&(-g)) else {
                mu *= 10.0;
                continue;
            };
            let trial = x + step;
            if let Some(ft) = eval(&trial) {
                let ct = ft.norm_squared();
                if ct < cost {
                    x = trial;
                    f = ft;
                    cost = ct;
                    mu = (mu * 0.1).max(1e-15);
                    accepted = true;
                    break;
                }
            }
            mu *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    (f.amax() < tol).then(|| (x, f.amax()))
}

/// Puts a root in canonical form: positive radii, `θ₀ ∈ (−π, π]`.
fn canonicalize(mut x: Vector4<f64>) -> Vector4<f64> {
    if x[2] < 0.0 {
        x[2] = -x[2];
        x[1] += PI;
    }
    if x[3] < 0.0 {
        x[3] = -x[3];
        x[1] += PI;
    }
    x[1] = wrap_angle(x[1]);
    x
}

fn same_root(a: &Vector4<f64>, b: &Vector4<f64>) -> bool {
    let dth = wrap_angle(a[1] - b[1]).abs();
    (a[0] - b[0]).abs() <= 1e-7 * (1.0 + a[0].abs())
        && dth <= 1e-7
        && (a[2] - b[2]).abs() <= 1e-7 * a[2].abs().max(1.0)
        && (a[3] - b[3]).abs() <= 1e-7 * a[3].abs().max(1.0)
}

fn initial_radius(model: &SelfEnergyModel, couplings: &QuarticCouplings, nu: f64, theta: f64) -> Option<f64> {
    let s = model.evaluate(nu).ok()?;
    let d = -2.0 * s.retarded[(0, 1)].im;
    let g1 = 2.0 * s.retarded[(0, 0)].im + d;
    let g2 = couplings.two_photon_loss();
    if g2 <= 0.0 {
        return None;
    }
    let mut r2 = (g1 - d - d * theta.cos()) / g2;
    if r2 <= 0.0 {
        r2 = g1.abs().max(d.abs()).max(1e-6) / g2;
    }
    Some(r2.sqrt())
}

/// Every converged synchronized root found from the multi-start grid, with
/// stability eigenvalues attached, ordered by `ν`.
pub fn synchronized_roots(
    model: &SelfEnergyModel,
    omega1: f64,
    omega2: f64,
    couplings: &QuarticCouplings,
    opts: &SolverOptions,
) -> Result<Vec<SaddleSolution>, SaddleError> {
    model.validate()?;
    let gamma = opts.window.unwrap_or_else(|| default_window(model));
    let mut lo = omega1.min(omega2) - gamma;
    let mut hi = omega1.max(omega2) + gamma;
    if let Some((a, b)) = model.domain() {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let tol = opts.tolerance * model.rate_scale();
    let n = opts.nu_starts.max(1);
    let mut roots: Vec<(Vector4<f64>, f64)> = Vec::new();
    let mut any_finite = false;
    for k in 0..n {
        let nu0 = if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
        for &th0 in &opts.theta_starts {
            let Some(r0) = initial_radius(model, couplings, nu0, th0) else { continue };
            any_finite = true;
            let start = Vector4::new(nu0, th0, r0, r0);
            if let Some((x, res)) =
                levenberg_marquardt(model, omega1, omega2, couplings, start, opts, tol)
            {
                let x = canonicalize(x);
                if !roots.iter().any(|(y, _)| same_root(&x, y)) {
                    roots.push((x, res));
                }
            }
        }
    }
    if !any_finite {
        return Err(SaddleError::SolverDiverged);
    }
    roots.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
    let mut out = Vec::with_capacity(roots.len());
    for (x, res) in roots {
        let mut sol = SaddleSolution {
            omega1,
            omega2,
            nu: x[0],
            r1: x[2],
            r2: x[3],
            theta0: Some(x[1]),
            branch: Branch::Synchronized,
            residual: res,
            stability: Vec::new(),
        };
        sol.stability = stability_of_saddle(&sol, model, couplings)?;
        out.push(sol);
    }
    Ok(out)
}

/// Generic synchronized saddle point for an arbitrary self-energy model.
///
/// Returns the stable root with the lowest `ν`, or `NoSync` when no stable
/// root is found.
pub fn solve_pair_nonmarkovian(
    model: &SelfEnergyModel,
    omega1: f64,
    omega2: f64,
    couplings: &QuarticCouplings,
) -> Result<SyncOutcome, SaddleError> {
    solve_pair_nonmarkovian_with(model, omega1, omega2, couplings, &SolverOptions::default())
}

pub fn solve_pair_nonmarkovian_with(
    model: &SelfEnergyModel,
    omega1: f64,
    omega2: f64,
    couplings: &QuarticCouplings,
    opts: &SolverOptions,
) -> Result<SyncOutcome, SaddleError> {
    let roots = synchronized_roots(model, omega1, omega2, couplings, opts)?;
    let scale = model.rate_scale();
    let count = roots.len();
    Ok(roots
        .into_iter()
        .find(|s| is_stable(&s.stability, scale))
        .map(SyncOutcome::Synchronized)
        .unwrap_or(SyncOutcome::NoSync { roots: count }))
}

/// All eigenvalues but the one closest to zero have `Re λ ≤ 1e-9·scale`,
/// and that one is a genuine zero mode.
pub fn is_stable(eigenvalues: &[C64], scale: f64) -> bool {
    if eigenvalues.is_empty() {
        return false;
    }
    let zero = eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(k, _)| k)
        .unwrap();
    eigenvalues[zero].norm() <= 1e-6 * scale
        && eigenvalues
            .iter()
            .enumerate()
            .all(|(k, l)| k == zero || l.re <= 1e-9 * scale)
}

/// Coefficients of the rescaled-field Langevin equation
/// `A·φ̇ = Q·φ + Λ₁*·diag(r²)·|φ|²φ + B·ξ` in the frame rotating at `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinCoefficients {
    pub friction: CMat2,
    pub friction_inv: CMat2,
    /// Linear drift `Q = −P^R(ν)`.
    pub linear: CMat2,
    pub radius_sq: [f64; 2],
    pub lambda1: C64,
}

impl LangevinCoefficients {
    pub fn new(
        model: &SelfEnergyModel,
        nu: f64,
        radii: (f64, f64),
        omegas: (f64, f64),
        couplings: &QuarticCouplings,
    ) -> Result<Self, SaddleError> {
        let s = model.evaluate(nu)?;
        let ds = model.retarded_derivative(nu)?;
        let r = [radii.0, radii.1];
        let w = [omegas.0, omegas.1];
        let mut a = CMat2::zeros();
        let mut q = CMat2::zeros();
        for m in 0..2 {
            for n in 0..2 {
                let ratio = r[n] / r[m];
                let delta = if m == n { 1.0 } else { 0.0 };
                a[(m, n)] = I * (delta - ds[(m, n)] * ratio);
                q[(m, n)] = -(nu - w[n]) * delta + s.retarded[(m, n)] * ratio;
            }
        }
        let sv = a.singular_values();
        let cond = sv.max() / sv.min();
        if !(cond.is_finite() && cond < 1e8) {
            return Err(SaddleError::SingularFriction(cond));
        }
        let friction_inv = a.try_inverse().ok_or(SaddleError::SingularFriction(f64::INFINITY))?;
        Ok(Self {
            friction: a,
            friction_inv,
            linear: q,
            radius_sq: [r[0] * r[0], r[1] * r[1]],
            lambda1: couplings.lambda1,
        })
    }

    /// Deterministic force `Q·φ + Λ₁*·r_m²|φ_m|²φ_m` (before applying `A⁻¹`).
    pub fn force(&self, phi: [C64; 2]) -> [C64; 2] {
        let mut f = [C64::from(0.0); 2];
        for m in 0..2 {
            f[m] = self.linear[(m, 0)] * phi[0]
                + self.linear[(m, 1)] * phi[1]
                + self.lambda1 * self.radius_sq[m] * phi[m].norm_sqr() * phi[m];
        }
        f
    }

    /// Real 4×4 Jacobian of `φ̇ = A⁻¹·force(φ)` in `(Re φ₁, Re φ₂, Im φ₁, Im φ₂)`.
    pub fn real_jacobian(&self, phi: [C64; 2]) -> Matrix4<f64> {
        let mut k = self.linear;
        let mut l = CMat2::zeros();
        for m in 0..2 {
            let rl = self.lambda1 * self.radius_sq[m];
            k[(m, m)] += 2.0 * rl * phi[m].norm_sqr();
            l[(m, m)] = rl * phi[m] * phi[m];
        }
        let k = self.friction_inv * k;
        let l = self.friction_inv * l;
        let plus = k + l;
        let minus = k - l;
        let mut j = Matrix4::zeros();
        for m in 0..2 {
            for n in 0..2 {
                j[(m, n)] = plus[(m, n)].re;
                j[(m, n + 2)] = -minus[(m, n)].im;
                j[(m + 2, n)] = plus[(m, n)].im;
                j[(m + 2, n + 2)] = minus[(m, n)].re;
            }
        }
        j
    }
}

/// Saddle fixed point of the rescaled fields, `φ_n = e^{−iθ_n}` with
/// `θ₁ = θ₀/2`, `θ₂ = −θ₀/2`.
pub fn fixed_point(theta0: f64) -> [C64; 2] {
    [C64::from_polar(1.0, -theta0 / 2.0), C64::from_polar(1.0, theta0 / 2.0)]
}

/// Eigenvalues of the linearized deterministic Langevin flow around a
/// synchronized saddle point.
pub fn stability_of_saddle(
    sol: &SaddleSolution,
    model: &SelfEnergyModel,
    couplings: &QuarticCouplings,
) -> Result<Vec<C64>, SaddleError> {
    let Some(theta0) = sol.theta0 else {
        return Ok(Vec::new());
    };
    let coeffs = LangevinCoefficients::new(model, sol.nu, (sol.r1, sol.r2), (sol.omega1, sol.omega2), couplings)?;
    let j = coeffs.real_jacobian(fixed_point(theta0));
    let mut eig: Vec<C64> = j.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LorentzianGain;

    fn pair(delta: f64, d: f64) -> PairParams {
        PairParams::with_detuning(delta, 1.0, 0.1, d).unwrap()
    }

    #[test]
    fn single_oscillator_closed_form() {
        let p = SingleOscillatorParams::new(1.0, 1.0, 0.1).unwrap();
        let (nu, r) = solve_single(&p, &QuarticCouplings::stuart_landau(0.1)).unwrap();
        assert_eq!(nu, 1.0);
        assert!((r * r - 10.0).abs() < 1e-12);
        let p = SingleOscillatorParams::new(0.0, 0.3, 0.3).unwrap();
        assert!((solve_single(&p, &QuarticCouplings::stuart_landau(0.3)).unwrap().1 - 1.0).abs() < 1e-15);
        let p = SingleOscillatorParams::new(0.0, 1.0, 0.005).unwrap();
        let r = solve_single(&p, &QuarticCouplings::stuart_landau(0.005)).unwrap().1;
        assert!((r * r - 200.0).abs() < 1e-9);
        assert!((p.gamma1 / (2.0 * p.gamma2) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn single_oscillator_without_saturation_fails() {
        let p = SingleOscillatorParams::new(0.0, 1.0, 0.1).unwrap();
        let c = QuarticCouplings { lambda1: C64::new(0.0, 0.05), lambda5: C64::new(0.0, -0.2) };
        assert!(matches!(solve_single(&p, &c), Err(SaddleError::NoLimitCycle(_))));
    }

    #[test]
    fn markovian_resonant_pair_locks_at_pi() {
        let sol = solve_pair_markovian(&pair(0.0, 0.1)).unwrap();
        assert!(sol.is_synchronized());
        assert_eq!(sol.theta0, Some(PI));
        assert!((sol.r1 * sol.r1 - 10.0).abs() < 1e-12);
        assert_eq!(sol.nu, 0.0);
        assert!(sol.residual < 1e-14);
    }

    #[test]
    fn markovian_pair_fig2_offset() {
        let sol = solve_pair_markovian(&pair(0.013, 0.1)).unwrap();
        let th = sol.theta0.unwrap();
        assert!((th.sin() + 0.13).abs() < 1e-14);
        assert!(th.cos() < 0.0);
        assert!((wrap_angle(th - PI - 0.13f64.asin()) ).abs() < 1e-12);
        assert!((wrap_angle(th - (PI + 0.1304))).abs() < 1e-4);
    }

    #[test]
    fn markovian_pair_outside_tongue() {
        let sol = solve_pair_markovian(&pair(0.2, 0.1)).unwrap();
        assert_eq!(sol.theta0, None);
        assert!((sol.r1 * sol.r1 - 9.0).abs() < 1e-12);
        assert_eq!(sol.branch, Branch::Unsynchronized { nu1: 0.1, nu2: -0.1 });
    }

    #[test]
    fn markovian_radius_is_continuous_at_tongue_edge() {
        let inside = solve_pair_markovian(&pair(0.1, 0.1)).unwrap();
        let outside = solve_pair_markovian(&pair(0.1 + 1e-12, 0.1)).unwrap();
        assert!(inside.is_synchronized() && !outside.is_synchronized());
        assert!((inside.r1 - outside.r1).abs() < 1e-9);
    }

    #[test]
    fn strong_coupling_outside_tongue_has_no_limit_cycle() {
        let p = PairParams::with_detuning(2.0, 1.0, 0.1, 1.2).unwrap();
        assert!(matches!(solve_pair_markovian(&p), Err(SaddleError::NoLimitCycle(_))));
    }

    #[test]
    fn markovian_stability_spectrum() {
        let sol = solve_pair_markovian(&pair(0.0, 0.1)).unwrap();
        let eig = &sol.stability;
        assert_eq!(eig.len(), 4);
        assert!(eig.iter().any(|l| l.norm() < 1e-12));
        assert!(eig.iter().any(|l| (l - C64::from(-0.1)).norm() < 1e-12));
        assert!(is_stable(eig, 1.0));
    }

    #[test]
    fn generic_solver_matches_markovian_closed_form() {
        for &(delta, d) in &[(0.0, 0.1), (0.013, 0.1), (-0.05, 0.1), (0.3, 0.5), (0.0, 0.9)] {
            let p = pair(delta, d);
            let exact = solve_pair_markovian(&p).unwrap();
            let out = solve_pair_nonmarkovian(&p.self_energy(), p.omega1, p.omega2, &p.couplings()).unwrap();
            let sol = out.solution().expect("synchronized");
            assert!((sol.nu - exact.nu).abs() < 1e-8);
            assert!((sol.r1 - exact.r1).abs() < 1e-8);
            assert!((sol.r2 - exact.r2).abs() < 1e-8);
            assert!(wrap_angle(sol.theta0.unwrap() - exact.theta0.unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn generic_solver_reports_no_sync_outside_tongue() {
        let p = pair(0.11, 0.1);
        let out = solve_pair_nonmarkovian(&p.self_energy(), p.omega1, p.omega2, &p.couplings()).unwrap();
        assert!(matches!(out, SyncOutcome::NoSync { .. }));
    }

    fn lorentzian() -> SelfEnergyModel {
        SelfEnergyModel::LorentzianGain(LorentzianGain {
            omega_ex: 1.0,
            width: 0.05,
            gain_strength: 0.02,
            background_loss: 0.001,
            cross_sign: 1.0,
            keldysh_extra: 0.0,
        })
    }

    #[test]
    fn symmetric_pair_has_equal_radii_and_pi_offset() {
        let c = QuarticCouplings::stuart_landau(0.001);
        let out = solve_pair_nonmarkovian(&lorentzian(), 0.98, 0.98, &c).unwrap();
        let sol = out.solution().unwrap();
        assert!((sol.r1 - sol.r2).abs() < 1e-8 * sol.r1);
        assert!(wrap_angle(sol.theta0.unwrap() - PI).abs() < 1e-8);
    }

    #[test]
    fn lorentzian_pulls_towards_excitation() {
        let c = QuarticCouplings::stuart_landau(0.001);
        let out = solve_pair_nonmarkovian(&lorentzian(), 0.97, 0.985, &c).unwrap();
        let sol = out.solution().unwrap();
        assert!(sol.nu > 0.9775 && sol.nu < 1.0, "nu = {}", sol.nu);
        assert!(sol.residual < 1e-9 * 0.02);
    }
}
