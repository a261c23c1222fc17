//! Figure-data targets.

use std::path::Path;
use std::sync::Arc;

use super::config::Config;
use super::manifest::Recorder;
use super::{adler_simulation, csv_rows, fmt, lindblad_state, lorentzian_system, markov_pair_system, plots};
use super::{CliError, Target};
use crate::diffusion::{self, FitOptions, PhaseChannel};
use crate::fokkerplanck::{self, PhaseDistribution};
use crate::model::{PairParams, TabulatedSelfEnergy};
use crate::saddle::{self, wrap_angle, SyncOutcome};
use crate::sde::{self, EnsembleOptions, Simulation};

pub(super) fn run(target: Target, cfg: &Config, base: &Path, rec: &mut Recorder) -> Result<(), CliError> {
    match target {
        Target::Fig1 => fig1(cfg, rec)?,
        Target::Fig2 => fig2(cfg, rec)?,
        Target::Fig3 => fig3(cfg, rec)?,
        Target::Fig4 => fig4(cfg, base, rec)?,
        Target::Fig5 => fig5(cfg, base, rec)?,
        Target::S1 => s1(cfg, base, rec)?,
        Target::S2 => s2(cfg, rec)?,
    }
    let (name, script) = plots::script(target);
    rec.write(name, script.as_bytes())?;
    Ok(())
}

fn pair_with_photons(gamma1: f64, photons: f64, coupling: f64, delta: f64) -> Result<PairParams, CliError> {
    PairParams::with_detuning(delta, gamma1, gamma1 / (2.0 * photons), coupling)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn histogram_ensemble(
    sim: &Simulation,
    n: usize,
    seed: u64,
    stride: usize,
) -> Result<sde::EnsembleStats, CliError> {
    let opts = EnsembleOptions { stride, histogram_thin: 1, ..Default::default() };
    sde::run_ensemble_with(sim, n, seed, &opts).map_err(|e| CliError::solver("ensemble", e))
}

fn peak_gap(a: &PhaseDistribution, b: &PhaseDistribution) -> f64 {
    wrap_angle(a.mode() - b.mode()).abs()
}

fn fig1(cfg: &Config, rec: &mut Recorder) -> Result<(), CliError> {
    let p = cfg.markov.params()?;
    let (delta, d, s0) = (p.detuning(), p.coupling, diffusion::sigma0_sq(&p));
    let cf = fokkerplanck::stationary_adler_cf_on(delta, d, s0, cfg.fp.harmonics, cfg.fp.bins)
        .map_err(|e| CliError::solver("continued fraction", e))?;
    let grid = fokkerplanck::stationary_adler_grid(delta, d, s0, cfg.fp.grid_points)
        .map_err(|e| CliError::solver("grid solver", e))?;
    if cfg.fp.grid_points % cfg.fp.bins != 0 {
        return Err(CliError::Config("fp.bins: must divide fp.grid_points".into()));
    }
    let grid = grid.coarsen(cfg.fp.bins);
    rec.mark("fokker-planck");

    let sim = &cfg.simulation;
    let adler = adler_simulation(&p, sim.dt, sim.t_end)?;
    let mc = histogram_ensemble(&adler, sim.trajectories, cfg.seed, sim.stride)?;
    let mc = diffusion::histogram(mc.wrapped_samples(), sim.bins).map_err(|e| CliError::solver("histogram", e))?;
    rec.mark("adler ensemble");
    let pair = Simulation::Pair {
        system: Arc::new(markov_pair_system(&p)?),
        dt: sim.dt,
        t_end: sim.t_end,
        noise: sim.noise.into(),
    };
    let lang = histogram_ensemble(&pair, sim.trajectories, cfg.seed, sim.stride)?;
    let lang = diffusion::histogram(lang.wrapped_samples(), sim.bins).map_err(|e| CliError::solver("histogram", e))?;
    rec.mark("langevin ensemble");
    let (_, lme) = lindblad_state(cfg, &p)?;
    rec.mark("lindblad");

    let coarse = cf_on_bins(&p, cfg, sim.bins)?;
    let lme_ref = fokkerplanck::stationary_adler_cf_on(delta, d, s0, cfg.fp.harmonics, cfg.lindblad.bins)
        .map_err(|e| CliError::solver("continued fraction", e))?;
    let rows = vec![
        summary_row("grid", &cf, &grid),
        summary_row("adler_histogram", &coarse, &mc),
        summary_row("langevin_histogram", &coarse, &lang),
        summary_row("lindblad", &lme_ref, &lme),
    ];
    rec.write_csv("fig1_cf.csv", |b| cf.write_csv(b))?;
    rec.write_csv("fig1_grid.csv", |b| grid.write_csv(b))?;
    rec.write_csv("fig1_adler_histogram.csv", |b| mc.write_csv(b))?;
    rec.write_csv("fig1_langevin_histogram.csv", |b| lang.write_csv(b))?;
    rec.write_csv("fig1_lindblad.csv", |b| lme.write_csv(b))?;
    rec.write_csv("fig1_summary.csv", |b| csv_rows(b, &["method", "l1", "linf", "peak_gap"], &rows))?;
    Ok(())
}

fn cf_on_bins(p: &PairParams, cfg: &Config, bins: usize) -> Result<PhaseDistribution, CliError> {
    // Cell averages from a fine evaluation, so histograms compare like with like.
    let fine = bins * 16;
    fokkerplanck::stationary_adler_cf_on(p.detuning(), p.coupling, diffusion::sigma0_sq(p), cfg.fp.harmonics, fine)
        .map(|d| d.coarsen(bins))
        .map_err(|e| CliError::solver("continued fraction", e))
}

fn summary_row(name: &str, reference: &PhaseDistribution, other: &PhaseDistribution) -> Vec<String> {
    vec![
        name.into(),
        fmt(reference.l1_distance(other)),
        fmt(reference.linf_distance(other)),
        fmt(peak_gap(reference, other)),
    ]
}

fn fig2(cfg: &Config, rec: &mut Recorder) -> Result<(), CliError> {
    let f = &cfg.fig2;
    let m = &cfg.markov;
    let p = pair_with_photons(m.gamma1, f.photons, m.coupling, f.delta_over_d * m.coupling)?;
    let sim = adler_simulation(&p, cfg.simulation.dt, f.t_end)?;
    let stride = cfg.simulation.stride;
    let stats = sde::run_ensemble(&sim, f.trajectories, cfg.seed, stride).map_err(|e| CliError::solver("ensemble", e))?;
    rec.mark("ensemble");
    let shown = f.shown.min(f.trajectories);
    let paths = (0..shown)
        .map(|i| sim.run(sde::trajectory_seed(cfg.seed, i as u64), stride).map(|t| t.theta_minus()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::solver("simulate", e))?;
    let mut header = vec!["t".to_string()];
    header.extend((0..shown).map(|i| format!("theta_minus_{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = stats
        .times
        .iter()
        .enumerate()
        .map(|(k, t)| std::iter::once(fmt(*t)).chain(paths.iter().map(|p| fmt(p[k]))).collect())
        .collect();
    rec.write_csv("fig2_trajectories.csv", |b| csv_rows(b, &header, &rows))?;
    rec.write_csv("fig2_variance.csv", |b| stats.write_csv(b))?;
    let fit = diffusion::fit_diffusion(&stats, PhaseChannel::Minus, &FitOptions { seed: cfg.seed, ..Default::default() })
        .map_err(|e| CliError::solver("diffusion fit", e))?;
    let quad = diffusion::reimann_sigma_minus(p.detuning(), p.coupling, diffusion::sigma0_sq(&p))
        .map_err(|e| CliError::solver("diffusion quadrature", e))?;
    println!("sigma_-^2 fit = {} [{}, {}]  quadrature = {quad}", fit.sigma_sq, fit.ci.0, fit.ci.1);
    let row = vec![fmt(fit.sigma_sq), fmt(fit.ci.0), fmt(fit.ci.1), fmt(fit.r_squared), fmt(quad)];
    rec.write_csv("fig2_fit.csv", |b| {
        csv_rows(b, &["sigma_minus_sq", "ci_low", "ci_high", "r_squared", "quadrature"], &[row])
    })?;
    Ok(())
}

fn fig3(cfg: &Config, rec: &mut Recorder) -> Result<(), CliError> {
    let m = &cfg.markov;
    let sc = &cfg.scan;
    let mut scan = Vec::new();
    let mut inset = Vec::new();
    for &n in &sc.photons {
        let g2 = m.gamma1 / (2.0 * n);
        let rows = diffusion::scan_markovian(m.gamma1, g2, m.coupling, &sc.delta_over_d)
            .map_err(|e| CliError::solver("scan", e))?;
        for r in rows {
            scan.push(vec![fmt(n), fmt(r.delta_over_d), fmt(r.sigma_minus_sq), fmt(r.sigma0_sq), fmt(r.sigma_minus_sq / r.sigma0_sq)]);
        }
        for &d in &sc.inset_coupling {
            let p = pair_with_photons(m.gamma1, n, d * m.gamma1, 0.0)?;
            let r = diffusion::markovian_report(&p).map_err(|e| CliError::solver("diffusion quadrature", e))?;
            inset.push(vec![fmt(n), fmt(d), fmt(r.sigma_minus_sq), fmt(r.sigma0_sq)]);
        }
    }
    rec.mark("quadrature");
    rec.write_csv("fig3_scan.csv", |b| {
        csv_rows(b, &["photons", "Delta_over_D", "sigma_minus_sq", "sigma0_sq", "ratio"], &scan)
    })?;
    rec.write_csv("fig3_inset.csv", |b| csv_rows(b, &["photons", "D_over_gamma1", "sigma_minus_sq", "sigma0_sq"], &inset))?;

    let mut mc = Vec::new();
    let mut point = 0u64;
    for &n in &sc.photons {
        for &x in &sc.mc_delta_over_d {
            let p = pair_with_photons(m.gamma1, n, m.coupling, x * m.coupling)?;
            let sim = adler_simulation(&p, cfg.simulation.dt, sc.mc_t_end)?;
            let seed = sde::trajectory_seed(cfg.seed, point);
            point += 1;
            let stats = sde::run_ensemble(&sim, sc.mc_trajectories, seed, cfg.simulation.stride)
                .map_err(|e| CliError::solver("ensemble", e))?;
            let f = diffusion::fit_diffusion(&stats, PhaseChannel::Minus, &FitOptions { seed, ..Default::default() })
                .map_err(|e| CliError::solver("diffusion fit", e))?;
            let quad = diffusion::reimann_sigma_minus(p.detuning(), p.coupling, diffusion::sigma0_sq(&p))
                .map_err(|e| CliError::solver("diffusion quadrature", e))?;
            mc.push(vec![fmt(n), fmt(x), fmt(f.sigma_sq), fmt(f.ci.0), fmt(f.ci.1), fmt(quad), fmt(diffusion::sigma0_sq(&p))]);
        }
    }
    rec.mark("monte carlo");
    rec.write_csv("fig3_mc.csv", |b| {
        csv_rows(b, &["photons", "Delta_over_D", "sigma_minus_sq", "ci_low", "ci_high", "quadrature", "sigma0_sq"], &mc)
    })?;
    Ok(())
}

const NU_HEADER: [&str; 7] = ["omega2", "omega1", "synchronized", "nu", "r1", "r2", "theta0"];

fn fig4(cfg: &Config, base: &Path, rec: &mut Recorder) -> Result<(), CliError> {
    let model = cfg.lorentzian.model(base)?;
    let f = &cfg.fig5;
    let n = 401;
    let omega: Vec<f64> = (0..n).map(|k| f.omega1_min + (f.omega1_max - f.omega1_min) * k as f64 / (n - 1) as f64).collect();
    let table = TabulatedSelfEnergy::sample(&model, omega, Default::default())
        .map_err(|e| CliError::solver("self-energy", e))?;
    rec.write_csv("fig4_self_energy.csv", |b| table.write_csv(b).map_err(|e| std::io::Error::other(e.to_string())))?;
    let c = crate::model::QuarticCouplings::stuart_landau(cfg.lorentzian.gamma2);
    let mut rows = Vec::new();
    for &w2 in &f.omega2_over_ex {
        let w2 = w2 * cfg.lorentzian.omega_ex;
        for w1 in f.omega1_grid() {
            let w1 = w1 * cfg.lorentzian.omega_ex;
            let out = saddle::solve_pair_nonmarkovian(&model, w1, w2, &c).map_err(|e| CliError::solver("saddle", e))?;
            rows.push(match out {
                SyncOutcome::Synchronized(s) => vec![
                    fmt(w2),
                    fmt(w1),
                    "true".into(),
                    fmt(s.nu),
                    fmt(s.r1),
                    fmt(s.r2),
                    s.theta0.map(fmt).unwrap_or_default(),
                ],
                SyncOutcome::NoSync { .. } => {
                    vec![fmt(w2), fmt(w1), "false".into(), String::new(), String::new(), String::new(), String::new()]
                }
            });
        }
    }
    rec.mark("saddle scan");
    rec.write_csv("fig4_nu.csv", |b| csv_rows(b, &NU_HEADER, &rows))?;
    Ok(())
}

/// Time step from the deterministic rate bound of a Langevin system.
pub(crate) fn stable_dt(sys: &sde::PairSystem) -> f64 {
    0.05 / sys.rate_bound().max(1e-12)
}

fn fig5(cfg: &Config, base: &Path, rec: &mut Recorder) -> Result<(), CliError> {
    let f = &cfg.fig5;
    let mut rows = Vec::new();
    let mut point = 0u64;
    for &w2 in &f.omega2_over_ex {
        let w2 = w2 * cfg.lorentzian.omega_ex;
        for w1 in f.omega1_grid() {
            let w1 = w1 * cfg.lorentzian.omega_ex;
            let seed = sde::trajectory_seed(cfg.seed, point);
            point += 1;
            let Some((s, sys)) = lorentzian_system(cfg, base, w1, w2)? else {
                rows.push(vec![fmt(w2), fmt(w1), "false".into(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new()]);
                continue;
            };
            let dt = stable_dt(&sys);
            let stride = ((f.t_end / dt) / 400.0).ceil().max(1.0) as usize;
            let sim = Simulation::Pair { system: Arc::new(sys), dt, t_end: f.t_end, noise: cfg.simulation.noise.into() };
            let stats = sde::run_ensemble(&sim, f.trajectories, seed, stride).map_err(|e| CliError::solver("ensemble", e))?;
            let opts = FitOptions { seed, ..Default::default() };
            let minus = diffusion::fit_diffusion(&stats, PhaseChannel::Minus, &opts).map_err(|e| CliError::solver("diffusion fit", e))?;
            let whole = FitOptions { burn_in_fraction: 0.05, window: 0.95, ..opts };
            let plus = diffusion::fit_diffusion(&stats, PhaseChannel::Plus, &whole).map_err(|e| CliError::solver("diffusion fit", e))?;
            rows.push(vec![
                fmt(w2),
                fmt(w1),
                "true".into(),
                fmt(s.nu),
                fmt(minus.sigma_sq),
                fmt(plus.sigma_sq),
                fmt(minus.sigma_sq / plus.sigma_sq),
                fmt(minus.ci.0),
                fmt(minus.ci.1),
                fmt(plus.r_squared),
                fmt(dt),
            ]);
        }
    }
    rec.mark("ensembles");
    let header = [
        "omega2",
        "omega1",
        "synchronized",
        "nu",
        "sigma_minus_sq",
        "sigma_plus_sq",
        "ratio",
        "minus_ci_low",
        "minus_ci_high",
        "plus_r_squared",
        "dt",
    ];
    rec.write_csv("fig5_ratios.csv", |b| csv_rows(b, &header, &rows))?;
    Ok(())
}

fn s1(cfg: &Config, base: &Path, rec: &mut Recorder) -> Result<(), CliError> {
    let (w1, w2) = (cfg.lorentzian.omega1, cfg.lorentzian.omega2);
    let (_, sys) = lorentzian_system(cfg, base, w1, w2)?
        .ok_or_else(|| CliError::solver("saddle", "no stable synchronized solution"))?;
    let g2 = cfg.lorentzian.gamma2;
    let s = &cfg.s1;
    let dt = stable_dt(&sys);
    let sample = 1.0 / (g2 * s.samples_per_gamma2 as f64);
    let stride = (sample / dt).ceil().max(1.0) as usize;
    let t_end = s.t_end_gamma2 / g2;
    let opts = sde::PairOptions { noise: cfg.simulation.noise.into(), initial: None, stride };
    let trajs = (0..s.trajectories)
        .map(|i| sde::simulate_pair_system(&sys, dt, t_end, sde::trajectory_seed(cfg.seed, i as u64), &opts))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::solver("simulate", e))?;
    let paths: Vec<Vec<[crate::model::C64; 2]>> = trajs.iter().filter_map(|t| t.fields()).collect();
    let ac = sde::autocorrelation(&paths, dt * stride as f64, s.tau_max_gamma2 / g2)
        .map_err(|e| CliError::solver("autocorrelation", e))?;
    rec.mark("trajectories");
    let first = &trajs[0];
    let rows: Vec<Vec<String>> = first
        .times
        .iter()
        .zip(&paths[0])
        .map(|(t, f)| vec![fmt(*t), fmt(f[0].re), fmt(f[0].im), fmt(f[1].re), fmt(f[1].im)])
        .collect();
    rec.write_csv("s1_trajectory.csv", |b| csv_rows(b, &["t", "re_phi1", "im_phi1", "re_phi2", "im_phi2"], &rows))?;
    let rows: Vec<Vec<String>> = ac
        .lags
        .iter()
        .zip(&ac.table)
        .map(|(tau, c)| {
            let mut r = vec![fmt(*tau)];
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                r.push(fmt(c[(i, j)].re));
                r.push(fmt(c[(i, j)].im));
            }
            r
        })
        .collect();
    let header = ["tau", "re_c11", "im_c11", "re_c12", "im_c12", "re_c21", "im_c21", "re_c22", "im_c22"];
    rec.write_csv("s1_autocorrelation.csv", |b| csv_rows(b, &header, &rows))?;
    let tau = ac.decay_time().unwrap_or(f64::NAN);
    println!("correlation time = {tau}  (gamma2 * tau = {})", g2 * tau);
    rec.write_csv("s1_summary.csv", |b| {
        csv_rows(b, &["gamma2", "decay_time", "gamma2_times_decay_time"], &[vec![fmt(g2), fmt(tau), fmt(g2 * tau)]])
    })?;
    Ok(())
}

fn s2(cfg: &Config, rec: &mut Recorder) -> Result<(), CliError> {
    let m = &cfg.markov;
    let s = &cfg.s2;
    let sim = &cfg.simulation;
    let mut diff = Vec::new();
    for (k, &n) in s.photons.iter().enumerate() {
        let p = pair_with_photons(m.gamma1, n, m.coupling, m.delta)?;
        let seed = sde::trajectory_seed(cfg.seed, k as u64);
        let pair = Simulation::Pair {
            system: Arc::new(markov_pair_system(&p)?),
            dt: sim.dt,
            t_end: s.t_end,
            noise: sim.noise.into(),
        };
        let adler = adler_simulation(&p, sim.dt, s.t_end)?;
        let fit_opts = FitOptions { seed, ..Default::default() };
        let mut fits = Vec::new();
        let mut hists = Vec::new();
        for model in [&pair, &adler] {
            let st = histogram_ensemble(model, s.trajectories, seed, sim.stride)?;
            let f = diffusion::fit_diffusion(&st, PhaseChannel::Minus, &fit_opts).map_err(|e| CliError::solver("diffusion fit", e))?;
            fits.push(f);
            hists.push(diffusion::histogram(st.wrapped_samples(), sim.bins).map_err(|e| CliError::solver("histogram", e))?);
        }
        let quad = diffusion::reimann_sigma_minus(p.detuning(), p.coupling, diffusion::sigma0_sq(&p))
            .map_err(|e| CliError::solver("diffusion quadrature", e))?;
        diff.push(vec![
            fmt(n),
            fmt(fits[0].sigma_sq),
            fmt(fits[0].ci.0),
            fmt(fits[0].ci.1),
            fmt(fits[1].sigma_sq),
            fmt(quad),
        ]);
        let cf = cf_on_bins(&p, cfg, sim.bins)?;
        let lme = match lindblad_state(cfg, &p) {
            Ok((_, d)) => Some(d),
            Err(CliError::Solver { .. }) => None,
            Err(e) => return Err(e),
        };
        let lme_coarse = lme.as_ref().and_then(|d| (d.grid.len() % sim.bins == 0).then(|| d.coarsen(sim.bins)));
        let rows: Vec<Vec<String>> = (0..sim.bins)
            .map(|j| {
                vec![
                    fmt(cf.grid[j]),
                    fmt(cf.density[j]),
                    fmt(hists[0].density[j]),
                    fmt(hists[1].density[j]),
                    lme_coarse.as_ref().map(|d| fmt(d.density[j])).unwrap_or_default(),
                ]
            })
            .collect();
        let name = format!("s2_phase_n{n}.csv");
        rec.write_csv(&name, |b| {
            csv_rows(b, &["theta", "continued_fraction", "langevin", "adler", "lindblad"], &rows)
        })?;
        rec.mark(&format!("photons {n}"));
    }
    rec.write_csv("s2_diffusion.csv", |b| {
        csv_rows(b, &["photons", "langevin", "langevin_ci_low", "langevin_ci_high", "adler", "quadrature"], &diff)
    })?;
    Ok(())
}
