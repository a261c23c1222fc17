//! Command-line driver.

pub mod config;
pub mod manifest;
mod plots;
mod reproduce;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::diffusion::{self, FitOptions, PhaseChannel};
use crate::fokkerplanck;
use crate::lindblad::{self, FockSpace, Liouvillian, Sector};
use crate::model::{PairParams, QuarticCouplings, SingleOscillatorParams};
use crate::saddle::{self, SyncOutcome};
use crate::sde::{self, EnsembleOptions, PairSystem, Simulation};
use config::{Config, LindbladMethod, ModelKind, NoiseKind};
use manifest::Recorder;

pub use config::load_config;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{operation} failed: {message}")]
    Solver { operation: &'static str, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Solver { .. } => 3,
            Self::Io(_) => 1,
        }
    }

    pub(crate) fn solver(operation: &'static str, e: impl std::fmt::Display) -> Self {
        Self::Solver { operation, message: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qdesync", version, about = "Phase diffusion of coupled limit-cycle oscillators")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML configuration layered over the defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: QDESYNC_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MarkovArgs {
    #[arg(long)]
    pub gamma1: Option<f64>,
    /// Two-photon loss; sets the Lorentzian study's value when that model is selected.
    #[arg(long)]
    pub gamma2: Option<f64>,
    /// Dissipative coupling.
    #[arg(long = "D")]
    pub coupling: Option<f64>,
    /// Detuning ω₁ − ω₂.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LorentzArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub omega1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega2: Option<f64>,
    /// Tabulated self-energy CSV.
    #[arg(long)]
    pub self_energy: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Adler,
    Single,
    Pair,
    Lorentzian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseArg {
    Frozen,
    Multiplicative,
    Off,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseArg>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FpMethod {
    Cf,
    Grid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    NullSpace,
    Propagation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    S1,
    S2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the saddle-point equations.
    Saddle {
        /// Two coupled oscillators (Markovian closed form).
        #[arg(long)]
        pair: bool,
        /// Two oscillators with the Lorentzian or tabulated self-energy.
        #[arg(long, conflicts_with = "pair")]
        lorentzian: bool,
        #[command(flatten)]
        markov: MarkovArgs,
        #[command(flatten)]
        lorentz: LorentzArgs,
    },
    /// Integrate one trajectory.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        markov: MarkovArgs,
        #[command(flatten)]
        lorentz: LorentzArgs,
    },
    /// Run a seeded ensemble and fit the phase diffusion.
    Ensemble {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        markov: MarkovArgs,
        #[command(flatten)]
        lorentz: LorentzArgs,
    },
    /// Stationary relative-phase distribution of the noisy Adler equation.
    Fp {
        #[arg(long, value_enum, default_value = "cf")]
        method: FpMethod,
        #[arg(long)]
        bins: Option<usize>,
        #[command(flatten)]
        markov: MarkovArgs,
    },
    /// Effective phase diffusion from quadrature, optionally checked by Monte Carlo.
    Diffusion {
        #[arg(long)]
        monte_carlo: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        markov: MarkovArgs,
    },
    /// Scan the normalized diffusion over detuning.
    Scan {
        #[command(flatten)]
        markov: MarkovArgs,
    },
    /// Lindblad steady state and relative-phase distribution.
    Lindblad {
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        bins: Option<usize>,
        #[command(flatten)]
        markov: MarkovArgs,
    },
    /// Emit the data behind one figure panel.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|s| s.to_string_lossy().into_owned())
        .collect();
    match execute(cli, command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("QDESYNC_THREADS") {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("QDESYNC_THREADS: not a thread count: {s:?}"))),
        _ => Ok(None),
    }
}

/// Strips flags that do not influence the emitted data.
fn reproducible_command(command: Vec<String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = command.into_iter();
    while let Some(a) = it.next() {
        if a == "--threads" || a == "--out" {
            it.next();
        } else if !(a.starts_with("--threads=") || a.starts_with("--out=")) {
            out.push(a);
        }
    }
    out
}

fn execute(cli: Cli, command: Vec<String>) -> Result<(), CliError> {
    faer::set_global_parallelism(faer::Par::Seq);
    let mut cfg = match &cli.global.config {
        Some(p) => load_config(p)?,
        None => Config::default(),
    };
    let base = cli
        .global
        .config
        .as_deref()
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_default();
    if let Some(s) = cli.global.seed {
        cfg.seed = s;
    }
    apply_command_flags(&mut cfg, &cli.command);
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.global.threads)? {
        if n == 0 {
            return Err(CliError::Config("threads: must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let mut rec = Recorder::new(&cli.global.out, reproducible_command(command), cfg.seed, cfg.to_toml_string())?;
    pool.install(|| dispatch(&cli.command, &cfg, &base, &mut rec))?;
    rec.finish()?;
    Ok(())
}

fn apply_markov(cfg: &mut Config, m: &MarkovArgs, lorentzian: bool) {
    if let Some(v) = m.gamma1 {
        cfg.markov.gamma1 = v;
    }
    if let Some(v) = m.gamma2 {
        if lorentzian {
            cfg.lorentzian.gamma2 = v;
        } else {
            cfg.markov.gamma2 = v;
        }
    }
    if let Some(v) = m.coupling {
        cfg.markov.coupling = v;
    }
    if let Some(v) = m.delta {
        cfg.markov.delta = v;
    }
}

fn apply_lorentz(cfg: &mut Config, l: &LorentzArgs) {
    if let Some(v) = l.omega1 {
        cfg.lorentzian.omega1 = v;
    }
    if let Some(v) = l.omega2 {
        cfg.lorentzian.omega2 = v;
    }
    if let Some(p) = &l.self_energy {
        cfg.lorentzian.self_energy_file = Some(p.clone());
    }
}

fn apply_sim(cfg: &mut Config, s: &SimArgs) {
    let sim = &mut cfg.simulation;
    if let Some(m) = s.model {
        sim.model = match m {
            ModelArg::Adler => ModelKind::Adler,
            ModelArg::Single => ModelKind::Single,
            ModelArg::Pair => ModelKind::Pair,
            ModelArg::Lorentzian => ModelKind::Lorentzian,
        };
    }
    if let Some(v) = s.dt {
        sim.dt = v;
    }
    if let Some(v) = s.t_end {
        sim.t_end = v;
    }
    if let Some(v) = s.trajectories {
        sim.trajectories = v;
    }
    if let Some(v) = s.stride {
        sim.stride = v;
    }
    if let Some(n) = s.noise {
        sim.noise = match n {
            NoiseArg::Frozen => NoiseKind::Frozen,
            NoiseArg::Multiplicative => NoiseKind::Multiplicative,
            NoiseArg::Off => NoiseKind::Off,
        };
    }
    if let Some(v) = s.bins {
        sim.bins = v;
    }
}

fn apply_command_flags(cfg: &mut Config, cmd: &Command) {
    match cmd {
        Command::Saddle { lorentzian, markov, lorentz, .. } => {
            apply_markov(cfg, markov, *lorentzian);
            apply_lorentz(cfg, lorentz);
        }
        Command::Simulate { sim, markov, lorentz } | Command::Ensemble { sim, markov, lorentz } => {
            apply_sim(cfg, sim);
            let lor = cfg.simulation.model == ModelKind::Lorentzian;
            apply_markov(cfg, markov, lor);
            apply_lorentz(cfg, lorentz);
        }
        Command::Fp { bins, markov, .. } => {
            apply_markov(cfg, markov, false);
            if let Some(b) = bins {
                cfg.fp.bins = *b;
            }
        }
        Command::Diffusion { sim, markov, .. } => {
            apply_sim(cfg, sim);
            apply_markov(cfg, markov, false);
        }
        Command::Scan { markov } => apply_markov(cfg, markov, false),
        Command::Lindblad { cutoff, method, tol, bins, markov } => {
            apply_markov(cfg, markov, false);
            if cutoff.is_some() {
                cfg.lindblad.cutoff = *cutoff;
            }
            if let Some(m) = method {
                cfg.lindblad.method = match m {
                    MethodArg::NullSpace => LindbladMethod::NullSpace,
                    MethodArg::Propagation => LindbladMethod::Propagation,
                };
            }
            if let Some(t) = tol {
                cfg.lindblad.tol = *t;
            }
            if let Some(b) = bins {
                cfg.lindblad.bins = *b;
            }
        }
        Command::Reproduce { .. } => {}
    }
}

fn dispatch(cmd: &Command, cfg: &Config, base: &Path, rec: &mut Recorder) -> Result<(), CliError> {
    match cmd {
        Command::Saddle { pair, lorentzian, .. } => cmd_saddle(cfg, base, *pair, *lorentzian, rec),
        Command::Simulate { .. } => cmd_simulate(cfg, base, rec),
        Command::Ensemble { .. } => cmd_ensemble(cfg, base, rec),
        Command::Fp { method, .. } => cmd_fp(cfg, *method, rec),
        Command::Diffusion { monte_carlo, .. } => cmd_diffusion(cfg, *monte_carlo, rec),
        Command::Scan { .. } => cmd_scan(cfg, rec),
        Command::Lindblad { .. } => cmd_lindblad(cfg, rec),
        Command::Reproduce { target } => reproduce::run(*target, cfg, base, rec),
    }
}

pub(crate) fn fmt(x: f64) -> String {
    x.to_string()
}

/// Writes a header and pre-formatted rows as CSV.
pub(crate) fn csv_rows(buf: &mut Vec<u8>, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

fn saddle_row(s: &saddle::SaddleSolution) -> Vec<String> {
    let max_re = s.stability.iter().skip(1).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    vec![
        fmt(s.omega1),
        fmt(s.omega2),
        fmt(s.nu),
        fmt(s.r1),
        fmt(s.r2),
        s.theta0.map(fmt).unwrap_or_default(),
        s.is_synchronized().to_string(),
        fmt(s.residual),
        if max_re.is_finite() { fmt(max_re) } else { String::new() },
    ]
}

const SADDLE_HEADER: [&str; 9] =
    ["omega1", "omega2", "nu", "r1", "r2", "theta0", "synchronized", "residual", "max_re_nonzero_eig"];

fn cmd_saddle(cfg: &Config, base: &Path, pair: bool, lorentzian: bool, rec: &mut Recorder) -> Result<(), CliError> {
    let rows = if lorentzian {
        let model = cfg.lorentzian.model(base)?;
        let c = QuarticCouplings::stuart_landau(cfg.lorentzian.gamma2);
        let (w1, w2) = (cfg.lorentzian.omega1, cfg.lorentzian.omega2);
        match saddle::solve_pair_nonmarkovian(&model, w1, w2, &c).map_err(|e| CliError::solver("saddle", e))? {
            SyncOutcome::Synchronized(s) => {
                println!(
                    "nu = {}  r1^2 = {}  r2^2 = {}  theta0 = {}",
                    s.nu,
                    s.r1 * s.r1,
                    s.r2 * s.r2,
                    s.theta0.unwrap_or(f64::NAN)
                );
                vec![saddle_row(&s)]
            }
            SyncOutcome::NoSync { roots } => {
                println!("no stable synchronized solution ({roots} unstable roots)");
                vec![vec![fmt(w1), fmt(w2), String::new(), String::new(), String::new(), String::new(), "false".into(), String::new(), String::new()]]
            }
        }
    } else if pair {
        let p = cfg.markov.params()?;
        let s = saddle::solve_pair_markovian(&p).map_err(|e| CliError::solver("saddle", e))?;
        match s.theta0 {
            Some(t) => println!("nu = {}  r^2 = {}  theta0 = {}", s.nu, s.r1 * s.r1, t),
            None => println!("unsynchronized  r^2 = {}", s.r1 * s.r1),
        }
        vec![saddle_row(&s)]
    } else {
        let p = SingleOscillatorParams::new(0.0, cfg.markov.gamma1, cfg.markov.gamma2)
            .map_err(|e| CliError::Config(format!("markov: {e}")))?;
        let (nu, r) = saddle::solve_single(&p, &QuarticCouplings::stuart_landau(p.gamma2))
            .map_err(|e| CliError::solver("saddle", e))?;
        println!("nu = {nu}  r^2 = {}", r * r);
        vec![vec![fmt(0.0), String::new(), fmt(nu), fmt(r), String::new(), String::new(), "false".into(), fmt(0.0), String::new()]]
    };
    rec.write_csv("saddle.csv", |b| csv_rows(b, &SADDLE_HEADER, &rows))?;
    rec.mark("saddle");
    Ok(())
}

/// Langevin system of the Lorentzian (or tabulated) study.
pub(crate) fn lorentzian_system(
    cfg: &Config,
    base: &Path,
    omega1: f64,
    omega2: f64,
) -> Result<Option<(saddle::SaddleSolution, PairSystem)>, CliError> {
    let model = cfg.lorentzian.model(base)?;
    let c = QuarticCouplings::stuart_landau(cfg.lorentzian.gamma2);
    match saddle::solve_pair_nonmarkovian(&model, omega1, omega2, &c).map_err(|e| CliError::solver("saddle", e))? {
        SyncOutcome::Synchronized(s) => {
            let sys = PairSystem::new(&model, &s, &c).map_err(|e| CliError::solver("langevin setup", e))?;
            Ok(Some((s, sys)))
        }
        SyncOutcome::NoSync { .. } => Ok(None),
    }
}

pub(crate) fn markov_pair_system(p: &PairParams) -> Result<PairSystem, CliError> {
    let s = saddle::solve_pair_markovian(p).map_err(|e| CliError::solver("saddle", e))?;
    if !s.is_synchronized() {
        return Err(CliError::solver("saddle", "parameters lie outside the locking region"));
    }
    PairSystem::new(&p.self_energy(), &s, &p.couplings()).map_err(|e| CliError::solver("langevin setup", e))
}

pub(crate) fn adler_simulation(p: &PairParams, dt: f64, t_end: f64) -> Result<Simulation, CliError> {
    let s = saddle::solve_pair_markovian(p).map_err(|e| CliError::solver("saddle", e))?;
    Ok(Simulation::Adler {
        delta: p.detuning(),
        coupling: p.coupling,
        sigma0_sq: diffusion::sigma0_sq(p),
        theta_init: s.theta0.unwrap_or(std::f64::consts::PI),
        dt,
        t_end,
    })
}

fn build_simulation(cfg: &Config, base: &Path) -> Result<Simulation, CliError> {
    let sim = &cfg.simulation;
    Ok(match sim.model {
        ModelKind::Adler => adler_simulation(&cfg.markov.params()?, sim.dt, sim.t_end)?,
        ModelKind::Single => Simulation::SingleSl {
            params: SingleOscillatorParams::new(0.0, cfg.markov.gamma1, cfg.markov.gamma2)
                .map_err(|e| CliError::Config(format!("markov: {e}")))?,
            eta_init: 0.0,
            dt: sim.dt,
            t_end: sim.t_end,
        },
        ModelKind::Pair => Simulation::Pair {
            system: Arc::new(markov_pair_system(&cfg.markov.params()?)?),
            dt: sim.dt,
            t_end: sim.t_end,
            noise: sim.noise.into(),
        },
        ModelKind::Lorentzian => {
            let (_, sys) = lorentzian_system(cfg, base, cfg.lorentzian.omega1, cfg.lorentzian.omega2)?
                .ok_or_else(|| CliError::solver("saddle", "no stable synchronized solution"))?;
            Simulation::Pair { system: Arc::new(sys), dt: sim.dt, t_end: sim.t_end, noise: sim.noise.into() }
        }
    })
}

fn cmd_simulate(cfg: &Config, base: &Path, rec: &mut Recorder) -> Result<(), CliError> {
    let sim = build_simulation(cfg, base)?;
    let traj = sim
        .run(sde::trajectory_seed(cfg.seed, 0), cfg.simulation.stride)
        .map_err(|e| CliError::solver("simulate", e))?;
    rec.mark("simulate");
    rec.write_csv("trajectory.csv", |b| traj.write_csv(b))?;
    Ok(())
}

fn fit_rows(stats: &sde::EnsembleStats, seed: u64) -> Vec<Vec<String>> {
    let opts = FitOptions { seed, ..Default::default() };
    let mut rows = Vec::new();
    for (name, ch) in [("theta_plus", PhaseChannel::Plus), ("theta_minus", PhaseChannel::Minus)] {
        if let Ok(f) = diffusion::fit_diffusion(stats, ch, &opts) {
            rows.push(vec![name.into(), fmt(f.sigma_sq), fmt(f.ci.0), fmt(f.ci.1), fmt(f.r_squared), f.points.to_string()]);
        }
    }
    rows
}

const FIT_HEADER: [&str; 6] = ["channel", "sigma_sq", "ci_low", "ci_high", "r_squared", "points"];

fn cmd_ensemble(cfg: &Config, base: &Path, rec: &mut Recorder) -> Result<(), CliError> {
    let sim = build_simulation(cfg, base)?;
    let relative = matches!(sim, Simulation::Adler { .. } | Simulation::Pair { .. });
    let opts = EnsembleOptions {
        stride: cfg.simulation.stride,
        histogram_thin: if relative { 1 } else { 0 },
        ..Default::default()
    };
    let stats = sde::run_ensemble_with(&sim, cfg.simulation.trajectories, cfg.seed, &opts)
        .map_err(|e| CliError::solver("ensemble", e))?;
    rec.mark("ensemble");
    rec.write_csv("ensemble.csv", |b| stats.write_csv(b))?;
    let rows = fit_rows(&stats, cfg.seed);
    for r in &rows {
        println!("{}: sigma^2 = {} [{}, {}]  R^2 = {}", r[0], r[1], r[2], r[3], r[4]);
    }
    rec.write_csv("ensemble_fit.csv", |b| csv_rows(b, &FIT_HEADER, &rows))?;
    if let Some(eta) = stats.eta_sq_mean() {
        let rows: Vec<Vec<String>> = stats.times.iter().zip(&eta).map(|(t, e)| vec![fmt(*t), fmt(*e)]).collect();
        rec.write_csv("ensemble_eta.csv", |b| csv_rows(b, &["t", "eta_sq_mean"], &rows))?;
    }
    if relative {
        let h = diffusion::histogram(stats.wrapped_samples(), cfg.simulation.bins)
            .map_err(|e| CliError::solver("histogram", e))?;
        rec.write_csv("ensemble_histogram.csv", |b| h.write_csv(b))?;
    }
    Ok(())
}

fn cmd_fp(cfg: &Config, method: FpMethod, rec: &mut Recorder) -> Result<(), CliError> {
    let p = cfg.markov.params()?;
    let s0 = diffusion::sigma0_sq(&p);
    let dist = match method {
        FpMethod::Cf => fokkerplanck::stationary_adler_cf_on(p.detuning(), p.coupling, s0, cfg.fp.harmonics, cfg.fp.bins),
        FpMethod::Grid => fokkerplanck::stationary_adler_grid(p.detuning(), p.coupling, s0, cfg.fp.grid_points)
            .map(|g| g.coarsen(cfg.fp.bins)),
    }
    .map_err(|e| CliError::solver("fokker-planck", e))?;
    rec.mark("fp");
    println!("sigma0^2 = {s0}  mode = {}", dist.mode());
    rec.write_csv("phase_distribution.csv", |b| dist.write_csv(b))?;
    Ok(())
}

fn cmd_diffusion(cfg: &Config, monte_carlo: bool, rec: &mut Recorder) -> Result<(), CliError> {
    let p = cfg.markov.params()?;
    let r = diffusion::markovian_report(&p).map_err(|e| CliError::solver("diffusion quadrature", e))?;
    let mut row = vec![
        fmt(p.detuning() / p.coupling),
        fmt(r.sigma_minus_sq),
        fmt(r.sigma_plus_sq),
        fmt(r.sigma0_sq),
        fmt(r.ratio_minus_zero),
        fmt(r.ratio_minus_plus),
    ];
    println!("sigma_-^2 = {}  sigma_0^2 = {}  ratio = {}", r.sigma_minus_sq, r.sigma0_sq, r.ratio_minus_zero);
    rec.mark("quadrature");
    if monte_carlo {
        let sim = adler_simulation(&p, cfg.simulation.dt, cfg.simulation.t_end)?;
        let stats = sde::run_ensemble(&sim, cfg.simulation.trajectories, cfg.seed, cfg.simulation.stride)
            .map_err(|e| CliError::solver("ensemble", e))?;
        let f = diffusion::fit_diffusion(&stats, PhaseChannel::Minus, &FitOptions { seed: cfg.seed, ..Default::default() })
            .map_err(|e| CliError::solver("diffusion fit", e))?;
        println!("monte carlo sigma_-^2 = {} [{}, {}]", f.sigma_sq, f.ci.0, f.ci.1);
        row.extend([fmt(f.sigma_sq), fmt(f.ci.0), fmt(f.ci.1)]);
        rec.mark("monte carlo");
    } else {
        row.extend([String::new(), String::new(), String::new()]);
    }
    let header = [
        "Delta_over_D",
        "sigma_minus_sq",
        "sigma_plus_sq",
        "sigma0_sq",
        "ratio_minus_zero",
        "ratio_minus_plus",
        "mc_sigma_minus_sq",
        "mc_ci_low",
        "mc_ci_high",
    ];
    rec.write_csv("diffusion.csv", |b| csv_rows(b, &header, &[row]))?;
    Ok(())
}

fn cmd_scan(cfg: &Config, rec: &mut Recorder) -> Result<(), CliError> {
    let m = &cfg.markov;
    let rows = diffusion::scan_markovian(m.gamma1, m.gamma2, m.coupling, &cfg.scan.delta_over_d)
        .map_err(|e| CliError::solver("scan", e))?;
    rec.mark("scan");
    rec.write_csv("scan.csv", |b| diffusion::write_scan_csv(&rows, b))?;
    Ok(())
}

/// Steady state of the configured pair and its phase distribution.
pub(crate) fn lindblad_state(
    cfg: &Config,
    p: &PairParams,
) -> Result<(lindblad::DensityMatrix, fokkerplanck::PhaseDistribution), CliError> {
    let space = cfg.lindblad.cutoff.map(FockSpace::new).unwrap_or_else(|| FockSpace::default_for(p));
    let l = Liouvillian::new(p, space, Sector::Balanced).map_err(|e| CliError::solver("lindblad", e))?;
    let rho = lindblad::steady_state(&l, cfg.lindblad.method.into(), cfg.lindblad.tol)
        .map_err(|e| CliError::solver("lindblad steady state", e))?;
    let dist = lindblad::phase_distribution_lme(&rho, cfg.lindblad.bins);
    Ok((rho, dist))
}

fn cmd_lindblad(cfg: &Config, rec: &mut Recorder) -> Result<(), CliError> {
    let p = cfg.markov.params()?;
    let (rho, dist) = lindblad_state(cfg, &p)?;
    rec.mark("lindblad");
    let (n1, n2) = rho.mean_photons();
    println!("cutoff = {}  <n1> = {n1}  <n2> = {n2}  mode = {}", rho.space.cutoff, dist.mode());
    rec.write_csv("lindblad_phase.csv", |b| dist.write_csv(b))?;
    let s = rho.space;
    let rows: Vec<Vec<String>> = rho
        .number_distribution()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (a, b) = s.occupations(i);
            vec![a.to_string(), b.to_string(), fmt(*p)]
        })
        .collect();
    rec.write_csv("lindblad_numbers.csv", |b| csv_rows(b, &["n1", "n2", "probability"], &rows))?;
    Ok(())
}
