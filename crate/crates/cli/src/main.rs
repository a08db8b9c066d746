mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use envsync::analysis::{alpha_sweep, boundary_sweep};
use envsync::master::{build_generator, DEFAULT_D_MIN};
use envsync::poles::{find_pole, phase_diagram};
use envsync::Error;
use toml::{Table, Value};

use config::{ConfigError, Overrides, Resolved, RunConfig};

#[derive(Parser)]
#[command(
    name = "envsync",
    version,
    about = "Two detuned oscillators in a common ohmic bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Maximum total excitation number of the Fock basis.
    #[arg(long, global = true)]
    ncap: Option<usize>,
    /// Coefficient time step, in the config's time unit.
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    tmax: Option<f64>,
    /// Record the logarithmic negativity between the oscillators.
    #[arg(long, global = true)]
    logneg: bool,
    /// Drop the start of each run from the spectral analysis.
    #[arg(long, global = true)]
    skip_transient: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Density-matrix evolution and observables.
    Dynamics,
    /// Propagator functions and generator coefficients.
    Coeffs,
    /// Dominant-frequency locking over a coupling or detuning grid.
    SweepSync,
    /// Localized-pole raster over coupling and detuning.
    PhaseDiagram,
    /// Pole of the localized mode for a single parameter set.
    Pole,
}

enum Failure {
    Config(ConfigError),
    Numeric { stage: &'static str, err: Error },
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

fn stage(stage: &'static str) -> impl Fn(Error) -> Failure {
    move |err| Failure::Numeric { stage, err }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric { stage, err }) => {
            eprintln!("numerical failure in stage `{stage}`: {err}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("output error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let cfg = config::load(cli.config.as_deref())?;
    let ov = Overrides {
        n_cap: cli.ncap,
        dt: cli.dt,
        t_max: cli.tmax,
        logneg: cli.logneg,
        skip_transient: cli.skip_transient,
    };
    if cli.workers == Some(0) {
        return Err(ConfigError {
            key: "--workers".into(),
            message: "must be >= 1".into(),
        }
        .into());
    }
    match cli.command {
        Command::Dynamics => dynamics(cli, &cfg, &ov),
        Command::Coeffs => coeffs(cli, &cfg, &ov),
        Command::SweepSync => sweep_sync(cli, &cfg, &ov),
        Command::PhaseDiagram => phase(cli, &cfg),
        Command::Pole => pole(&cfg),
    }
}

fn out_dir(cli: &Cli) -> Result<&Path, Failure> {
    std::fs::create_dir_all(&cli.out).map_err(io(&cli.out))?;
    Ok(&cli.out)
}

fn model_table(r: &Resolved) -> Table {
    let p = &r.params;
    let mut t = Table::new();
    for (k, v) in [
        ("omega1", p.omega1()),
        ("omega2", p.omega2()),
        ("omega0", p.omega0()),
        ("delta_omega", p.delta_omega()),
        ("alpha", p.alpha()),
        ("omega_c", p.omega_c()),
        ("s", p.s()),
        ("omega0_in_config_units", r.scale),
    ] {
        t.insert(k.into(), Value::Float(v));
    }
    let init = r.pipeline.init;
    for (k, v) in [
        ("beta1_re", init.beta1.re),
        ("beta1_im", init.beta1.im),
        ("beta2_re", init.beta2.re),
        ("beta2_im", init.beta2.im),
    ] {
        t.insert(k.into(), Value::Float(v));
    }
    t
}

fn run_table(command: &str, r: &Resolved) -> Table {
    let run = &r.pipeline;
    let mut t = Table::new();
    t.insert("command".into(), Value::String(command.into()));
    t.insert(
        "version".into(),
        Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    t.insert("units".into(), Value::String("omega0 = 1".into()));
    t.insert("model".into(), Value::Table(model_table(r)));
    let mut integ = Table::new();
    integ.insert("t_max".into(), Value::Float(run.t_max));
    integ.insert("dt_coeff".into(), Value::Float(run.coeff_step()));
    integ.insert("dt_master".into(), Value::Float(run.master_step()));
    integ.insert("sample_stride".into(), Value::Integer(run.stride() as i64));
    integ.insert("n_cap".into(), Value::Integer(run.n_cap as i64));
    integ.insert("skip_transient".into(), Value::Float(run.skip_transient));
    t.insert("integration".into(), Value::Table(integ));
    t
}

fn dynamics(cli: &Cli, cfg: &RunConfig, ov: &Overrides) -> Result<(), Failure> {
    let r = cfg.resolve(ov)?;
    let dir = out_dir(cli)?;
    let run = &r.pipeline;
    let traj = run.coefficients().map_err(stage("coeffs"))?;
    let ev = run.evolve(&traj).map_err(stage("master"))?;

    let csv_path = dir.join("dynamics.csv");
    output::dynamics(&csv_path, &ev.observables).map_err(io(&csv_path))?;
    if cfg.write_coeffs.unwrap_or(false) {
        let p = dir.join("coeffs.csv");
        output::coefficients(&p, &traj).map_err(io(&p))?;
    }

    let mut meta = run_table("dynamics", &r);
    let mut diag = Table::new();
    diag.insert("max_trace_error".into(), Value::Float(ev.max_trace_error));
    diag.insert(
        "max_hermiticity_drift".into(),
        Value::Float(ev.max_hermiticity_drift),
    );
    let min_eig = ev
        .observables
        .min_eig
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    diag.insert("min_eigenvalue".into(), Value::Float(min_eig));
    if cli.logneg {
        diag.insert(
            "logneg_truncation_warning".into(),
            Value::Boolean(ev.logneg_warning),
        );
        if ev.logneg_warning {
            eprintln!("warning: beam-splitter rotation lost norm; raise --ncap");
        }
    }
    meta.insert("diagnostics".into(), Value::Table(diag));

    match run.sync_of(&ev) {
        Ok(rep) => {
            println!(
                "freq1 = {:.6} freq2 = {:.6} resolution = {:.6} locked = {}",
                rep.dominant_freq_1, rep.dominant_freq_2, rep.freq_resolution, rep.locked
            );
            let mut sync = Table::new();
            sync.insert("freq1".into(), Value::Float(rep.dominant_freq_1));
            sync.insert("freq2".into(), Value::Float(rep.dominant_freq_2));
            sync.insert("resolution".into(), Value::Float(rep.freq_resolution));
            sync.insert("locked".into(), Value::Boolean(rep.locked));
            meta.insert("sync".into(), Value::Table(sync));
        }
        Err(e) => eprintln!("note: no spectral analysis ({e})"),
    }
    let meta_path = dir.join("dynamics.meta.toml");
    output::metadata(&meta_path, meta).map_err(io(&meta_path))?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn coeffs(cli: &Cli, cfg: &RunConfig, ov: &Overrides) -> Result<(), Failure> {
    let r = cfg.resolve(ov)?;
    let dir = out_dir(cli)?;
    let traj = r.pipeline.coefficients().map_err(stage("coeffs"))?;
    let path = dir.join("coeffs.csv");
    output::coefficients(&path, &traj).map_err(io(&path))?;
    let gen = build_generator(&traj, DEFAULT_D_MIN).map_err(stage("generator"))?;
    let gpath = dir.join("generator.csv");
    output::generator(&gpath, &gen).map_err(io(&gpath))?;
    let meta_path = dir.join("coeffs.meta.toml");
    output::metadata(&meta_path, run_table("coeffs", &r)).map_err(io(&meta_path))?;
    println!("wrote {} and {}", path.display(), gpath.display());
    Ok(())
}

fn sweep_sync(cli: &Cli, cfg: &RunConfig, ov: &Overrides) -> Result<(), Failure> {
    let r = cfg.resolve(ov)?;
    let alphas = cfg.alpha_grid()?;
    let (deltas, lo, hi) = cfg.boundary_grid()?;
    if alphas.is_empty() && deltas.is_empty() {
        return Err(ConfigError {
            key: "sweep".into(),
            message: "empty grid: give sweep.alphas and/or sweep.delta_omegas".into(),
        }
        .into());
    }
    let dir = out_dir(cli)?;
    let mut meta = run_table("sweep-sync", &r);
    if !alphas.is_empty() {
        let points = alpha_sweep(&r.pipeline, &alphas, cli.workers).map_err(stage("analysis"))?;
        let p = dir.join("sweep_alpha.csv");
        output::alpha_sweep(&p, &points).map_err(io(&p))?;
        println!("wrote {}", p.display());
    }
    if !deltas.is_empty() {
        let curve =
            boundary_sweep(&r.pipeline, &deltas, lo, hi, cli.workers).map_err(stage("analysis"))?;
        let p = dir.join("boundary.csv");
        output::locking_boundary(&p, &curve).map_err(io(&p))?;
        println!("wrote {}", p.display());
        let mut b = Table::new();
        b.insert("alpha_lo".into(), Value::Float(lo));
        b.insert("alpha_hi".into(), Value::Float(hi));
        meta.insert("bisection".into(), Value::Table(b));
    }
    let meta_path = dir.join("sweep.meta.toml");
    output::metadata(&meta_path, meta).map_err(io(&meta_path))
}

fn phase(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let grid = cfg.phase_grid()?;
    let dir = out_dir(cli)?;
    let pd = phase_diagram(&grid, cli.workers).map_err(stage("poles"))?;
    let raster = dir.join("phase_diagram.csv");
    let boundary = dir.join("phase_boundary.csv");
    output::phase_diagram(&raster, &boundary, &pd).map_err(io(&raster))?;
    let mut meta = Table::new();
    meta.insert("command".into(), Value::String("phase-diagram".into()));
    meta.insert("units".into(), Value::String("omega0 = 1".into()));
    meta.insert("omega_c".into(), Value::Float(grid.omega_c));
    meta.insert("s".into(), Value::Float(grid.s));
    meta.insert(
        "alpha_points".into(),
        Value::Integer(grid.alphas.len() as i64),
    );
    meta.insert(
        "delta_points".into(),
        Value::Integer(grid.deltas.len() as i64),
    );
    let meta_path = dir.join("phase_diagram.meta.toml");
    output::metadata(&meta_path, meta).map_err(io(&meta_path))?;
    println!("wrote {} and {}", raster.display(), boundary.display());
    Ok(())
}

fn pole(cfg: &RunConfig) -> Result<(), Failure> {
    let (params, _) = cfg.model()?;
    let r = find_pole(&params).map_err(stage("poles"))?;
    match r.omega_prime {
        Some(w) => println!(
            "omega_prime/omega0 = {} alpha_c = {} localized = true",
            output::num(w),
            output::num(r.alpha_c)
        ),
        None => println!("no pole (alpha_c = {})", output::num(r.alpha_c)),
    }
    Ok(())
}
