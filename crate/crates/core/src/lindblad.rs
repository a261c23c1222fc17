//! Fock-truncated Lindblad master equation for two dissipatively coupled
//! Stuart-Landau oscillators.
//!
//! Basis states `|n₁, n₂⟩` are indexed as `n₁·N + n₂`. All operators are
//! truncated matrices and `J†J` is formed from the truncated `J`, so the
//! superoperator preserves the trace exactly on the truncated space.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fokkerplanck::{Method, PhaseDistribution};
use crate::model::PairParams;
use crate::sparse::SparseLu;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error("cutoff {cutoff} too small for mean photon number {photons}")]
    CutoffTooSmall { cutoff: usize, photons: f64 },
    #[error("cutoff states carry population {0:e}")]
    CutoffDominated(f64),
    #[error("steady state not converged (residual {0:e})")]
    NotConverged(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
}

/// Two bosonic modes with states `0..N−1` each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    pub cutoff: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Self {
        assert!(cutoff >= 2, "cutoff must be >= 2");
        Self { cutoff }
    }

    /// `max(20, ⌈4·γ₁/(2γ₂)⌉)` capped at 30.
    pub fn default_for(params: &PairParams) -> Self {
        let n = (4.0 * params.photon_number()).ceil() as usize;
        Self::new(n.clamp(20, 30))
    }

    pub fn hilbert_dim(&self) -> usize {
        self.cutoff * self.cutoff
    }

    pub fn liouville_dim(&self) -> usize {
        self.hilbert_dim().pow(2)
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.cutoff + n2
    }

    pub fn occupations(&self, i: usize) -> (usize, usize) {
        (i / self.cutoff, i % self.cutoff)
    }

    pub fn total(&self, i: usize) -> usize {
        let (a, b) = self.occupations(i);
        a + b
    }
}

/// Sparse operator stored by columns.
#[derive(Debug, Clone)]
struct Operator {
    cols: Vec<Vec<(usize, C64)>>,
}

impl Operator {
    fn from_map(dim: usize, f: impl Fn(usize) -> Vec<(usize, C64)>) -> Self {
        Self { cols: (0..dim).map(f).collect() }
    }

    fn dim(&self) -> usize {
        self.cols.len()
    }

    fn scaled(mut self, s: f64) -> Self {
        for c in &mut self.cols {
            for e in c.iter_mut() {
                e.1 *= s;
            }
        }
        self
    }

    fn scaled_complex(mut self, s: C64) -> Self {
        for c in &mut self.cols {
            for e in c.iter_mut() {
                e.1 *= s;
            }
        }
        self
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (c, col) in other.cols.iter().enumerate() {
            for &(r, v) in col {
                push_entry(&mut out.cols[c], r, v);
            }
        }
        out
    }

    /// `self† · self`.
    fn gram(&self) -> Self {
        let n = self.dim();
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                rows[r].push((c, v));
            }
        }
        let mut out = Self { cols: vec![Vec::new(); n] };
        for (l, col) in self.cols.iter().enumerate() {
            for &(k, jkl) in col {
                for &(m, jkm) in &rows[k] {
                    push_entry(&mut out.cols[l], m, jkm.conj() * jkl);
                }
            }
        }
        out
    }

    #[cfg(test)]
    fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                m[(r, c)] += v;
            }
        }
        m
    }
}

fn push_entry(col: &mut Vec<(usize, C64)>, r: usize, v: C64) {
    if let Some(e) = col.iter_mut().find(|e| e.0 == r) {
        e.1 += v;
    } else {
        col.push((r, v));
    }
}

fn lowering(space: FockSpace, mode: usize, power: usize) -> Operator {
    Operator::from_map(space.hilbert_dim(), |i| {
        let (n1, n2) = space.occupations(i);
        let n = if mode == 0 { n1 } else { n2 };
        if n < power {
            return Vec::new();
        }
        let amp: f64 = (0..power).map(|k| (n - k) as f64).product::<f64>().sqrt();
        let j = if mode == 0 { space.index(n1 - power, n2) } else { space.index(n1, n2 - power) };
        vec![(j, C64::from(amp))]
    })
}

fn raising(space: FockSpace, mode: usize) -> Operator {
    Operator::from_map(space.hilbert_dim(), |i| {
        let (n1, n2) = space.occupations(i);
        let n = if mode == 0 { n1 } else { n2 };
        if n + 1 >= space.cutoff {
            return Vec::new();
        }
        let j = if mode == 0 { space.index(n1 + 1, n2) } else { space.index(n1, n2 + 1) };
        vec![(j, C64::from(((n + 1) as f64).sqrt()))]
    })
}

/// Which density-matrix elements the superoperator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// All `N⁴` elements.
    Full,
    /// Elements `|k⟩⟨l|` with equal total photon number, which contain the
    /// steady state.
    Balanced,
}

/// Vectorized Liouvillian in compressed-row form over a chosen basis of
/// elements `|k⟩⟨l|`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub space: FockSpace,
    pub sector: Sector,
    /// Element `(k, l)` of each basis vector.
    basis: Vec<(usize, usize)>,
    /// `lookup[k·d + l]` is the basis position, or `usize::MAX` outside the sector.
    lookup: Vec<usize>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

/// Builds the Liouvillian over all density-matrix elements.
pub fn build_liouvillian(params: &PairParams, space: FockSpace) -> Result<Liouvillian, LindbladError> {
    Liouvillian::new(params, space, Sector::Full)
}

impl Liouvillian {
    pub fn new(params: &PairParams, space: FockSpace, sector: Sector) -> Result<Self, LindbladError> {
        let photons = params.photon_number();
        if photons > 0.5 * space.cutoff as f64 {
            return Err(LindbladError::CutoffTooSmall { cutoff: space.cutoff, photons });
        }
        Ok(Self::assemble(params, space, sector))
    }

    /// Builds without the cutoff-adequacy check (for structural tests).
    pub fn assemble(params: &PairParams, space: FockSpace, sector: Sector) -> Self {
        let d = space.hilbert_dim();
        let half_delta = 0.5 * params.detuning();
        let jumps = vec![
            raising(space, 0).scaled(params.gamma1.sqrt()),
            raising(space, 1).scaled(params.gamma1.sqrt()),
            lowering(space, 0, 2).scaled(params.gamma2.sqrt()),
            lowering(space, 1, 2).scaled(params.gamma2.sqrt()),
            lowering(space, 0, 1).add(&lowering(space, 1, 1)).scaled(params.coupling.sqrt()),
        ];
        let mut heff = Operator::from_map(d, |i| {
            let (n1, n2) = space.occupations(i);
            vec![(i, C64::from(half_delta * (n1 as f64 - n2 as f64)))]
        });
        for j in &jumps {
            heff = heff.add(&j.gram().scaled_complex(-0.5 * I));
        }

        let mut basis = Vec::new();
        let mut lookup = vec![usize::MAX; d * d];
        for k in 0..d {
            for l in 0..d {
                if sector == Sector::Full || space.total(k) == space.total(l) {
                    lookup[k * d + l] = basis.len();
                    basis.push((k, l));
                }
            }
        }

        // Column c holds L(|k⟩⟨l|); collect as (row, col, value) then sort by row.
        let mut triplets: Vec<(usize, usize, C64)> = Vec::new();
        let mut scratch: Vec<(usize, C64)> = Vec::new();
        for (c, &(k, l)) in basis.iter().enumerate() {
            scratch.clear();
            for &(i, h) in &heff.cols[k] {
                scratch.push((i * d + l, -I * h));
            }
            for &(j, h) in &heff.cols[l] {
                scratch.push((k * d + j, I * h.conj()));
            }
            for jump in &jumps {
                for &(i, a) in &jump.cols[k] {
                    for &(j, b) in &jump.cols[l] {
                        scratch.push((i * d + j, a * b.conj()));
                    }
                }
            }
            scratch.sort_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(flat, v) in &scratch {
                let r = lookup[flat];
                debug_assert!(r != usize::MAX, "sector not invariant");
                if flat == last {
                    triplets.last_mut().unwrap().2 += v;
                } else {
                    triplets.push((r, c, v));
                    last = flat;
                }
            }
        }
        triplets.retain(|t| t.2 != C64::from(0.0));
        triplets.sort_by_key(|t| (t.0, t.1));
        let n = basis.len();
        let mut row_ptr = vec![0usize; n + 1];
        for t in &triplets {
            row_ptr[t.0 + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let col_idx = triplets.iter().map(|t| t.1).collect();
        let values = triplets.iter().map(|t| t.2).collect();
        Self { space, sector, basis, lookup, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = L x` on the sector basis.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim())
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|p| self.values[p] * x[self.col_idx[p]])
                    .sum()
            })
            .collect()
    }

    /// `L(ρ)` for a dense density matrix (elements outside the sector are ignored).
    pub fn apply_matrix(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.space.hilbert_dim();
        let x: Vec<C64> = self.basis.iter().map(|&(k, l)| rho[(k, l)]).collect();
        let y = self.apply(&x);
        let mut out = DMatrix::zeros(d, d);
        for (v, &(k, l)) in y.iter().zip(&self.basis) {
            out[(k, l)] = *v;
        }
        out
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|p| self.values[p].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Column sums restricted to diagonal rows: `Tr L(|k⟩⟨l|)` for every basis element.
    pub fn trace_of_columns(&self) -> Vec<C64> {
        let mut out = vec![C64::from(0.0); self.dim()];
        for r in 0..self.dim() {
            let (k, l) = self.basis[r];
            if k == l {
                for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                    out[self.col_idx[p]] += self.values[p];
                }
            }
        }
        out
    }

    fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.dim() {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                t.push((r, self.col_idx[p], self.values[p]));
            }
        }
        t
    }

    fn diagonal_positions(&self) -> Vec<usize> {
        let d = self.space.hilbert_dim();
        (0..d).map(|i| self.lookup[i * d + i]).collect()
    }

    fn to_density(&self, x: &[C64]) -> DensityMatrix {
        let d = self.space.hilbert_dim();
        let mut m = DMatrix::zeros(d, d);
        for (v, &(k, l)) in x.iter().zip(&self.basis) {
            m[(k, l)] = *v;
        }
        DensityMatrix { space: self.space, matrix: m }
    }
}

/// Two-mode density matrix on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub space: FockSpace,
    pub matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    /// Smallest eigenvalue, computed blockwise over total photon number when
    /// there are no coherences between blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.space.hilbert_dim();
        let block_diagonal = (0..d).all(|k| {
            (0..d).all(|l| self.space.total(k) == self.space.total(l) || self.matrix[(k, l)] == C64::from(0.0))
        });
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::from(0.5);
        if !block_diagonal {
            return herm.symmetric_eigenvalues().min();
        }
        let mut min = f64::INFINITY;
        for s in 0..=2 * (self.space.cutoff - 1) {
            let idx: Vec<usize> = (0..d).filter(|&i| self.space.total(i) == s).collect();
            let block = DMatrix::from_fn(idx.len(), idx.len(), |a, b| herm[(idx[a], idx[b])]);
            min = min.min(block.symmetric_eigenvalues().min());
        }
        min
    }

    /// Joint photon-number distribution `p(n₁, n₂)`, indexed like the basis.
    pub fn number_distribution(&self) -> Vec<f64> {
        (0..self.space.hilbert_dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `(⟨n₁⟩, ⟨n₂⟩)`.
    pub fn mean_photons(&self) -> (f64, f64) {
        let mut m = (0.0, 0.0);
        for (i, p) in self.number_distribution().iter().enumerate() {
            let (a, b) = self.space.occupations(i);
            m.0 += a as f64 * p;
            m.1 += b as f64 * p;
        }
        m
    }

    /// Population of states with either mode at the cutoff `N − 1`.
    pub fn boundary_population(&self) -> f64 {
        let top = self.space.cutoff - 1;
        self.number_distribution()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let (a, b) = self.space.occupations(*i);
                a == top || b == top
            })
            .map(|(_, p)| p)
            .sum()
    }

    /// Total-variation distance of the number distributions of two states with
    /// possibly different cutoffs.
    pub fn number_tv_distance(&self, other: &Self) -> f64 {
        let n = self.space.cutoff.max(other.space.cutoff);
        let get = |s: &Self, a: usize, b: usize| {
            if a < s.space.cutoff && b < s.space.cutoff {
                s.matrix[(s.space.index(a, b), s.space.index(a, b))].re
            } else {
                0.0
            }
        };
        let mut tv = 0.0;
        for a in 0..n {
            for b in 0..n {
                tv += (get(self, a, b) - get(other, a, b)).abs();
            }
        }
        0.5 * tv
    }

    /// Checks the Hermiticity, trace and positivity invariants.
    pub fn validate(&self) -> Result<(), LindbladError> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(LindbladError::InvalidState(format!("Hermiticity error {herm:e}")));
        }
        let tr = self.trace();
        if (tr - C64::from(1.0)).norm() > 1e-10 {
            return Err(LindbladError::InvalidState(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(LindbladError::InvalidState(format!("min eigenvalue {min:e}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SteadyStateMethod {
    /// Direct solve with one balance row replaced by the trace condition.
    NullSpace,
    /// Implicit-Euler propagation with a long step until the residual target is met.
    #[default]
    Propagation,
}

fn residual_ratio(l: &Liouvillian, x: &[C64], norm: f64) -> f64 {
    let y = l.apply(x);
    let ry = y.iter().fold(0.0, |m: f64, v| m.max(v.norm()));
    let rx = x.iter().fold(0.0, |m: f64, v| m.max(v.norm()));
    ry / (norm * rx)
}

fn normalize_trace(x: &mut [C64], diag: &[usize]) {
    let tr: C64 = diag.iter().map(|&p| x[p]).sum();
    for v in x.iter_mut() {
        *v /= tr;
    }
}

/// Steady state with `‖L(ρ)‖∞ < tol·‖L‖∞·‖ρ‖∞`, Hermitized and renormalized.
pub fn steady_state(
    l: &Liouvillian,
    method: SteadyStateMethod,
    tol: f64,
) -> Result<DensityMatrix, LindbladError> {
    let n = l.dim();
    let norm = l.norm_inf();
    let diag = l.diagonal_positions();
    let mut x = match method {
        SteadyStateMethod::NullSpace => {
            let replaced = diag[0];
            let mut entries: Vec<(usize, usize, C64)> =
                l.triplets().into_iter().filter(|t| t.0 != replaced).collect();
            entries.extend(diag.iter().map(|&p| (replaced, p, C64::from(1.0))));
            let lu = SparseLu::new(n, &entries).map_err(LindbladError::Factorization)?;
            let mut b = vec![C64::from(0.0); n];
            b[replaced] = C64::from(1.0);
            let mut x = b.clone();
            lu.solve(&mut x);
            for _ in 0..2 {
                let mut r = l.apply(&x);
                r[replaced] = diag.iter().map(|&p| x[p]).sum();
                let mut corr: Vec<C64> = r.iter().zip(&b).map(|(ri, bi)| bi - ri).collect();
                lu.solve(&mut corr);
                for (xi, ci) in x.iter_mut().zip(&corr) {
                    *xi += ci;
                }
            }
            x
        }
        SteadyStateMethod::Propagation => {
            // (1 − τL) x_{k+1} = x_k with τ far beyond the slowest relaxation time.
            let tau = 1e4 / norm.max(f64::MIN_POSITIVE) * (n as f64).sqrt();
            let mut entries: Vec<(usize, usize, C64)> =
                l.triplets().into_iter().map(|(r, c, v)| (r, c, -tau * v)).collect();
            entries.extend((0..n).map(|r| (r, r, C64::from(1.0))));
            let lu = SparseLu::new(n, &entries).map_err(LindbladError::Factorization)?;
            let d = l.space.hilbert_dim();
            let mut x = vec![C64::from(0.0); n];
            for &p in &diag {
                x[p] = C64::from(1.0 / d as f64);
            }
            let mut converged = false;
            for _ in 0..200 {
                lu.solve(&mut x);
                normalize_trace(&mut x, &diag);
                if residual_ratio(l, &x, norm) < 0.1 * tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(LindbladError::NotConverged(residual_ratio(l, &x, norm)));
            }
            x
        }
    };
    normalize_trace(&mut x, &diag);
    let mut rho = l.to_density(&x);
    rho.matrix = (&rho.matrix + rho.matrix.adjoint()) * C64::from(0.5);
    let tr = rho.trace();
    rho.matrix /= tr;
    let xs: Vec<C64> = l.basis.iter().map(|&(k, m)| rho.matrix[(k, m)]).collect();
    let res = residual_ratio(l, &xs, norm);
    if !(res < tol) {
        return Err(LindbladError::NotConverged(res));
    }
    rho.validate()?;
    let boundary = rho.boundary_population();
    if boundary > 1e-4 {
        return Err(LindbladError::CutoffDominated(boundary));
    }
    Ok(rho)
}

/// Fourier coefficients `c_k = Σ ⟨n₁+k, n₂|ρ|n₁, n₂+k⟩` for `k = 0..N−1`.
pub fn phase_coefficients(rho: &DensityMatrix) -> Vec<C64> {
    let s = rho.space;
    let n = s.cutoff;
    (0..n)
        .map(|k| {
            let mut c = C64::from(0.0);
            for n1 in 0..n - k {
                for n2 in 0..n - k {
                    c += rho.matrix[(s.index(n1 + k, n2), s.index(n1, n2 + k))];
                }
            }
            c
        })
        .collect()
}

/// Relative-phase distribution `P(θ₋) = (1/2π)·Σ_k c_k e^{ikθ₋}` on `n_bins`
/// cell centres, with phase states `⟨n|θ⟩ = e^{−inθ}/√(2π)` matching the
/// field convention `φ ∝ e^{−iθ}` of the Langevin description.
pub fn phase_distribution_lme(rho: &DensityMatrix, n_bins: usize) -> PhaseDistribution {
    let c = phase_coefficients(rho);
    let grid = PhaseDistribution::cell_centres(n_bins);
    let density = grid
        .iter()
        .map(|&t| {
            let mut p = c[0].re;
            for (k, ck) in c.iter().enumerate().skip(1) {
                p += 2.0 * (ck * C64::from_polar(1.0, k as f64 * t)).re;
            }
            p / (2.0 * PI)
        })
        .collect();
    PhaseDistribution { grid, density, method: Method::Lindblad }
}

/// Independent route: `P(θ₋) = ∫dθ₂ ⟨θ₂+θ₋, θ₂|ρ|θ₂+θ₋, θ₂⟩` by quadrature over
/// a uniform grid of `m` points (exact for `m ≥ 2N`), evaluated at `θ₋ = −π + j·2π/m`.
pub fn phase_distribution_grid(rho: &DensityMatrix, m: usize) -> Vec<f64> {
    let s = rho.space;
    let d = s.hilbert_dim();
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|j| {
            let tm = -PI + j as f64 * h;
            let mut acc = 0.0;
            for q in 0..m {
                let t2 = q as f64 * h;
                let t1 = t2 + tm;
                let v: Vec<C64> = (0..d)
                    .map(|i| {
                        let (a, b) = s.occupations(i);
                        C64::from_polar(1.0 / (2.0 * PI), -(a as f64 * t1 + b as f64 * t2))
                    })
                    .collect();
                let mut val = C64::from(0.0);
                for r in 0..d {
                    let mut row = C64::from(0.0);
                    for c in 0..d {
                        row += rho.matrix[(r, c)] * v[c];
                    }
                    val += v[r].conj() * row;
                }
                acc += val.re * h;
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(delta: f64) -> PairParams {
        PairParams::with_detuning(delta, 1.0, 0.1, 0.1).unwrap()
    }

    fn random_density(space: FockSpace, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = space.hilbert_dim();
        let g = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let mut m = &g * g.adjoint();
        let tr = m.trace();
        m /= tr;
        DensityMatrix { space, matrix: m }
    }

    #[test]
    fn full_dimension_bookkeeping() {
        let l = Liouvillian::assemble(&params(0.0), FockSpace::new(15), Sector::Full);
        assert_eq!(l.dim(), 50625);
        assert!(l.nnz() < 20 * l.dim());
    }

    #[test]
    fn balanced_sector_dimension() {
        let l = Liouvillian::assemble(&params(0.0), FockSpace::new(20), Sector::Balanced);
        assert_eq!(l.dim(), 5340);
    }

    #[test]
    fn trace_is_preserved_exactly() {
        let l = Liouvillian::assemble(&params(0.013), FockSpace::new(5), Sector::Full);
        for v in l.trace_of_columns() {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn hermiticity_is_preserved() {
        let space = FockSpace::new(4);
        let l = Liouvillian::assemble(&params(0.05), space, Sector::Full);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = space.hilbert_dim();
        let x = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random(), rng.random()));
        let a = l.apply_matrix(&x.adjoint());
        let b = l.apply_matrix(&x).adjoint();
        assert!((a - b).camax() < 1e-12);
    }

    #[test]
    fn superoperator_matches_dense_lindblad_form() {
        let space = FockSpace::new(3);
        let p = params(0.07);
        let l = Liouvillian::assemble(&p, space, Sector::Full);
        let rho = random_density(space, 3).matrix;
        let jumps = [
            raising(space, 0).scaled(p.gamma1.sqrt()).to_dense(),
            raising(space, 1).scaled(p.gamma1.sqrt()).to_dense(),
            lowering(space, 0, 2).scaled(p.gamma2.sqrt()).to_dense(),
            lowering(space, 1, 2).scaled(p.gamma2.sqrt()).to_dense(),
            lowering(space, 0, 1).add(&lowering(space, 1, 1)).scaled(p.coupling.sqrt()).to_dense(),
        ];
        let d = space.hilbert_dim();
        let h = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                let (a, b) = space.occupations(i);
                C64::from(0.5 * p.detuning() * (a as f64 - b as f64))
            } else {
                C64::from(0.0)
            }
        });
        let mut expected = (&h * &rho - &rho * &h) * (-I);
        for j in &jumps {
            let jd = j.adjoint();
            let jj = &jd * j;
            expected += j * &rho * &jd - (&jj * &rho + &rho * &jj) * C64::from(0.5);
        }
        assert!((l.apply_matrix(&rho) - expected).camax() < 1e-13);
    }

    #[test]
    fn steady_state_photon_number_near_saddle() {
        let p = params(0.0);
        let l = Liouvillian::new(&p, FockSpace::new(20), Sector::Balanced).unwrap();
        let rho = steady_state(&l, SteadyStateMethod::NullSpace, 1e-10).unwrap();
        let (n1, n2) = rho.mean_photons();
        assert!((n1 - 5.0).abs() < 0.75 && (n2 - 5.0).abs() < 0.75, "({n1}, {n2})");
        assert!((n1 - n2).abs() < 1e-9);
    }

    #[test]
    fn solvers_agree_and_cutoff_is_adequate() {
        let p = params(0.013);
        let l20 = Liouvillian::new(&p, FockSpace::new(20), Sector::Balanced).unwrap();
        let a = steady_state(&l20, SteadyStateMethod::NullSpace, 1e-10).unwrap();
        let b = steady_state(&l20, SteadyStateMethod::Propagation, 1e-10).unwrap();
        assert!((&a.matrix - &b.matrix).camax() < 1e-8);
        let l25 = Liouvillian::new(&p, FockSpace::new(25), Sector::Balanced).unwrap();
        let c = steady_state(&l25, SteadyStateMethod::NullSpace, 1e-10).unwrap();
        assert!(a.number_tv_distance(&c) < 1e-3);
    }

    #[test]
    fn common_frequency_shift_leaves_steady_state_unchanged() {
        let p = params(0.02);
        let q = PairParams { omega1: p.omega1 + 0.3, omega2: p.omega2 + 0.3, ..p };
        let space = FockSpace::new(20);
        let a = steady_state(&Liouvillian::new(&p, space, Sector::Balanced).unwrap(), SteadyStateMethod::NullSpace, 1e-10)
            .unwrap();
        let b = steady_state(&Liouvillian::new(&q, space, Sector::Balanced).unwrap(), SteadyStateMethod::NullSpace, 1e-10)
            .unwrap();
        let (x, y) = (a.mean_photons(), b.mean_photons());
        assert!((x.0 - y.0).abs() < 1e-10 && (x.1 - y.1).abs() < 1e-10);
    }

    #[test]
    fn small_cutoff_is_rejected() {
        let p = PairParams::with_detuning(0.0, 1.0, 0.05, 0.1).unwrap();
        assert!(matches!(
            Liouvillian::new(&p, FockSpace::new(15), Sector::Balanced),
            Err(LindbladError::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn crowded_cutoff_is_flagged() {
        let p = PairParams::with_detuning(0.0, 1.0, 0.1, 0.1).unwrap();
        let l = Liouvillian::new(&p, FockSpace::new(10), Sector::Balanced).unwrap();
        assert!(matches!(
            steady_state(&l, SteadyStateMethod::NullSpace, 1e-10),
            Err(LindbladError::CutoffDominated(_))
        ));
    }

    #[test]
    fn diagonal_state_has_uniform_phase() {
        let space = FockSpace::new(4);
        let d = space.hilbert_dim();
        let m = DMatrix::from_fn(d, d, |i, j| if i == j { C64::from(1.0 / d as f64) } else { C64::from(0.0) });
        let p = phase_distribution_lme(&DensityMatrix { space, matrix: m }, 16);
        for v in p.density {
            assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_excitation_superposition() {
        let space = FockSpace::new(2);
        let psi = [(space.index(0, 1), 1.0), (space.index(1, 0), 1.0)];
        let mut m = DMatrix::zeros(4, 4);
        for &(a, x) in &psi {
            for &(b, y) in &psi {
                m[(a, b)] = C64::from(0.5 * x * y);
            }
        }
        let p = phase_distribution_lme(&DensityMatrix { space, matrix: m }, 64);
        for (t, v) in p.grid.iter().zip(&p.density) {
            assert!((v - (1.0 + t.cos()) / (2.0 * PI)).abs() < 1e-14);
        }
    }

    #[test]
    fn fourier_route_matches_grid_integration() {
        for (n, seed) in [(3, 1), (5, 2), (6, 3)] {
            let space = FockSpace::new(n);
            let rho = random_density(space, seed);
            let m = 4 * n;
            let grid = phase_distribution_grid(&rho, m);
            let c = phase_coefficients(&rho);
            for (j, g) in grid.iter().enumerate() {
                let t = -PI + j as f64 * 2.0 * PI / m as f64;
                let mut p = c[0].re;
                for (k, ck) in c.iter().enumerate().skip(1) {
                    p += 2.0 * (ck * C64::from_polar(1.0, k as f64 * t)).re;
                }
                assert!((p / (2.0 * PI) - g).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn coherent_product_state_peaks_at_field_phase_difference() {
        // |α₁, α₂⟩ with α_n = r·e^{−iθ_n}: the phase distribution peaks at θ₁ − θ₂.
        let space = FockSpace::new(12);
        let (t1, t2, r) = (0.9, -0.4, 1.5_f64);
        let d = space.hilbert_dim();
        let mut psi = vec![C64::from(0.0); d];
        let coeff = |n: usize, theta: f64| {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            C64::from_polar(r.powi(n as i32) / fact.sqrt(), -(n as f64) * theta)
        };
        for i in 0..d {
            let (a, b) = space.occupations(i);
            psi[i] = coeff(a, t1) * coeff(b, t2);
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let m = DMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / norm);
        let p = phase_distribution_lme(&DensityMatrix { space, matrix: m }, 720);
        assert!((p.mode() - (t1 - t2)).abs() < 0.01);
    }
}
