//! The pair Langevin equation with constant self-energies against the noisy
//! Adler equation, deep in the large-photon-number regime where radial
//! fluctuations are negligible.

use std::f64::consts::PI;
use std::sync::Arc;

use qdesync::diffusion::{self, FitOptions, PhaseChannel};
use qdesync::model::PairParams;
use qdesync::saddle::solve_pair_markovian;
use qdesync::sde::{run_ensemble_with, trajectory_seed, EnsembleOptions, NoiseMode, PairSystem, Simulation};

fn simulations(p: &PairParams, dt: f64, t_end: f64) -> (Simulation, Simulation) {
    let s = solve_pair_markovian(p).unwrap();
    let system = PairSystem::new(&p.self_energy(), &s, &p.couplings()).unwrap();
    let pair = Simulation::Pair { system: Arc::new(system), dt, t_end, noise: NoiseMode::Frozen };
    let adler = Simulation::Adler {
        delta: p.detuning(),
        coupling: p.coupling,
        sigma0_sq: diffusion::sigma0_sq(p),
        theta_init: s.theta0.unwrap_or(PI),
        dt,
        t_end,
    };
    (pair, adler)
}

/// Asymptotic two-sample Kolmogorov–Smirnov p-value.
fn ks_p_value(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let p: f64 = (1..=100).map(|k| {
        let k = k as f64;
        2.0 * (-1.0f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
    }).sum();
    p.clamp(0.0, 1.0)
}

#[test]
fn windowed_increments_match_the_adler_reduction() {
    let p = PairParams::with_detuning(0.05, 1.0, 0.01, 0.1).unwrap();
    let (pair, adler) = simulations(&p, 0.01, 200.0);
    let window = |sim: &Simulation| -> Vec<f64> {
        (0..2000u64)
            .map(|i| {
                let t = sim.run(trajectory_seed(21, i), 100).unwrap();
                let th = t.theta_minus();
                th[th.len() - 1] - th[th.len() / 2]
            })
            .collect()
    };
    let pv = ks_p_value(window(&pair), window(&adler));
    assert!(pv > 0.01, "KS p-value {pv}");
}

#[test]
fn stationary_histogram_and_diffusion_match_at_large_photon_number() {
    let p = PairParams::with_detuning(0.05, 1.0, 0.01, 0.1).unwrap();
    let (pair, adler) = simulations(&p, 0.01, 400.0);
    let opts = EnsembleOptions { stride: 20, batches: 32, histogram_burn_in: 0.2, histogram_thin: 1 };
    let sp = run_ensemble_with(&pair, 800, 4, &opts).unwrap();
    let sa = run_ensemble_with(&adler, 800, 4, &opts).unwrap();
    let hp = diffusion::histogram(sp.wrapped_samples(), 32).unwrap();
    let ha = diffusion::histogram(sa.wrapped_samples(), 32).unwrap();
    let l1 = hp.l1_distance(&ha);
    assert!(l1 < 0.05, "L1 {l1}");
    let fp = diffusion::fit_diffusion(&sp, PhaseChannel::Minus, &FitOptions::default()).unwrap();
    let fa = diffusion::fit_diffusion(&sa, PhaseChannel::Minus, &FitOptions::default()).unwrap();
    assert!(fp.ci.0 <= fa.ci.1 && fa.ci.0 <= fp.ci.1, "pair {fp:?} adler {fa:?}");
}
