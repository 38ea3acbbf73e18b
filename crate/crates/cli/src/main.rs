//! `parqed` — simulate two qubits parametrically coupled to a cavity:
//! master-equation evolution, steady states, 2-D parameter sweeps, built-in
//! verification against closed forms, and heatmap rendering.
//!
//! Exit codes: 0 success; 1 verification or cell failure; 2 usage error;
//! 3 I/O error.

mod config;
mod heatmap;
mod output;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use parqed::dynamics::{
    evolve, steady_state, EvolveOptions, Frame, SteadyMethod, SteadyOptions,
};
use parqed::hilbert::DensityMatrix;
use parqed::metrics::{evaluate_metrics, MetricKind, StateRef};
use parqed::model::SystemParams;
use parqed::sweep::{
    steady_map, time_theta_map, AxisSpec, CellStatus, SteadyMapOptions, SweepGrid,
    TimeThetaOptions,
};

use config::{format_value, parse_grid_spec, render_manifest, ConfigFile};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "parqed",
    version,
    about = "Dissipative dynamics and entanglement of two qubits under parametric cavity coupling",
    after_help = "All quantities are in units of the cavity frequency (time in 1/omega)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation; writes trajectory.csv and a manifest
    Evolve(RunArgs),
    /// Solve for the steady state; writes steady_summary.csv and the state
    Steady(RunArgs),
    /// Sweep concurrence (and friends) over a time × theta grid
    SweepTimeTheta(RunArgs),
    /// Sweep steady-state metrics over a kappa × theta grid (heavy with the
    /// default 101×21 grid — override with --grid)
    SweepSteady(RunArgs),
    /// Run the quick oracle suite (closed forms, rates, method cross-checks)
    Verify,
    /// Render a PNG heatmap from a sweep channel CSV
    Heatmap(HeatmapArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Config file (flat key = value with one [section] per mode)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coupling amplitude g
    #[arg(long)]
    g: Option<f64>,
    /// Drive-shape parameter theta in [0, 1]
    #[arg(long)]
    theta: Option<f64>,
    /// Cavity decay rate kappa
    #[arg(long)]
    kappa: Option<f64>,
    /// Qubit relaxation rate gamma (both qubits)
    #[arg(long)]
    gamma: Option<f64>,
    /// Pure dephasing rate gamma_phi (both qubits)
    #[arg(long = "gamma-phi")]
    gamma_phi: Option<f64>,
    /// Fock truncation (a convergence parameter; flagged when exceeded)
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    /// Evolution horizon (evolve) or integration horizon override (steady)
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Number of stored time points (evolve)
    #[arg(long = "t-points")]
    t_points: Option<usize>,
    /// Relative ODE tolerance (absolute is 100x tighter)
    #[arg(long = "ode-tol")]
    ode_tol: Option<f64>,
    /// Steady-state residual criterion on ||d rho/dt||_F
    #[arg(long = "steady-tol")]
    steady_tol: Option<f64>,
    /// Axis override, repeatable: <axis>=<start>:<stop>:<count>
    #[arg(long)]
    grid: Vec<String>,
    /// Comma-separated metric channels (e.g. concurrence,n-ph,cond-concurrence-0)
    #[arg(long)]
    metrics: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Hamiltonian frame: effective | lab
    #[arg(long)]
    frame: Option<String>,
    /// Steady-state method: long-time | null-space
    #[arg(long)]
    method: Option<String>,
    /// Render heatmaps of every sweep channel after writing the CSVs
    #[arg(long)]
    render: bool,
}

#[derive(Args)]
struct HeatmapArgs {
    /// Sweep channel CSV produced by a sweep subcommand
    #[arg(long)]
    input: PathBuf,
    /// Optional sweep_status.csv marking flagged cells
    #[arg(long)]
    status: Option<PathBuf>,
    /// Output PNG path (defaults to the input with a .png extension)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pixel size of one grid cell
    #[arg(long, default_value_t = 6)]
    cell_px: u32,
}

/// Layered lookup: CLI flag > config section > config globals > default.
struct Resolver<'a> {
    cfg: Option<&'a ConfigFile>,
    mode: &'a str,
    manifest: Vec<(String, String)>,
}

impl<'a> Resolver<'a> {
    fn new(cfg: Option<&'a ConfigFile>, mode: &'a str) -> Self {
        Resolver {
            cfg,
            mode,
            manifest: Vec::new(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.cfg.and_then(|c| c.get(self.mode, key))
    }

    fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        let value = match flag {
            Some(v) => v,
            None => match self.raw(key) {
                Some(s) => s
                    .parse::<f64>()
                    .with_context(|| format!("config key '{key}': bad float '{s}'"))?,
                None => default,
            },
        };
        self.manifest.push((key.to_string(), format_value(value)));
        Ok(value)
    }

    fn usize(&mut self, key: &str, flag: Option<usize>, default: usize) -> Result<usize> {
        let value = match flag {
            Some(v) => v,
            None => match self.raw(key) {
                Some(s) => s
                    .parse::<usize>()
                    .with_context(|| format!("config key '{key}': bad integer '{s}'"))?,
                None => default,
            },
        };
        self.manifest.push((key.to_string(), value.to_string()));
        Ok(value)
    }

    fn string(&mut self, key: &str, flag: Option<&str>, default: &str) -> String {
        let value = flag
            .map(str::to_string)
            .or_else(|| self.raw(key).map(str::to_string))
            .unwrap_or_else(|| default.to_string());
        self.manifest.push((key.to_string(), value.clone()));
        value
    }

    fn axis(
        &mut self,
        name: &str,
        cli_grids: &[String],
        default: (f64, f64, usize),
    ) -> Result<AxisSpec<f64>> {
        let mut spec = None;
        for g in cli_grids {
            let (axis, start, stop, count) = parse_grid_spec(g)?;
            if axis == name {
                spec = Some((start, stop, count));
            }
        }
        if spec.is_none() {
            if let Some(s) = self.raw(&format!("grid.{name}")) {
                let (axis, start, stop, count) = parse_grid_spec(&format!("{name}={s}"))?;
                debug_assert_eq!(axis, name);
                spec = Some((start, stop, count));
            }
        }
        let (start, stop, count) = spec.unwrap_or(default);
        self.manifest.push((
            format!("grid.{name}"),
            format!("{}:{}:{count}", format_value(start), format_value(stop)),
        ));
        AxisSpec::linspace(name, start, stop, count).map_err(anyhow::Error::new)
    }
}

fn parse_metrics(list: &str) -> Result<Vec<MetricKind>> {
    list.split(',')
        .map(|tok| tok.trim().parse::<MetricKind>().map_err(anyhow::Error::new))
        .collect()
}

fn parse_frame(s: &str) -> Result<Frame> {
    match s {
        "effective" => Ok(Frame::Effective),
        "lab" => Ok(Frame::Lab),
        other => bail!("unknown frame '{other}' (expected effective|lab)"),
    }
}

fn parse_method(s: &str) -> Result<SteadyMethod> {
    match s {
        "long-time" | "long-time-integration" => Ok(SteadyMethod::LongTime),
        "null-space" => Ok(SteadyMethod::NullSpace),
        other => bail!("unknown method '{other}' (expected long-time|null-space)"),
    }
}

struct CommonSettings {
    params: SystemParams<f64>,
    ode_tol: f64,
    steady_tol: f64,
    metrics: Vec<MetricKind>,
    out_dir: PathBuf,
    frame: Frame,
    method: SteadyMethod,
    render: bool,
}

fn resolve_common(
    args: &RunArgs,
    resolver: &mut Resolver<'_>,
    default_n_max: usize,
    default_metrics: &str,
    default_gamma: f64,
) -> Result<CommonSettings> {
    let g = resolver.f64("g", args.g, 0.05)?;
    let theta = resolver.f64("theta", args.theta, 0.5)?;
    let kappa = resolver.f64("kappa", args.kappa, 0.0)?;
    let gamma = resolver.f64("gamma", args.gamma, default_gamma)?;
    let gamma_phi = resolver.f64("gamma-phi", args.gamma_phi, 0.0)?;
    let n_max = resolver.usize("n-max", args.n_max, default_n_max)?;
    let ode_tol = resolver.f64("ode-tol", args.ode_tol, 1e-8)?;
    let steady_tol = resolver.f64("steady-tol", args.steady_tol, 1e-9)?;
    let frame = parse_frame(&resolver.string("frame", args.frame.as_deref(), "effective"))?;
    let method = parse_method(&resolver.string("method", args.method.as_deref(), "long-time"))?;
    let metrics = parse_metrics(&resolver.string(
        "metrics",
        args.metrics.as_deref(),
        default_metrics,
    ))?;
    let out_dir = PathBuf::from(resolver.string(
        "out",
        args.out.as_deref().and_then(Path::to_str),
        "out",
    ));
    let render = args.render
        || resolver
            .raw("render")
            .map(|v| v == "true")
            .unwrap_or(false);
    resolver
        .manifest
        .push(("render".to_string(), render.to_string()));

    let params = SystemParams::new(g, theta, kappa, gamma, gamma_phi, n_max)
        .map_err(anyhow::Error::new)?;
    Ok(CommonSettings {
        params,
        ode_tol,
        steady_tol,
        metrics,
        out_dir,
        frame,
        method,
        render,
    })
}

/// `t-max` for the steady horizon: explicit value or `auto` (50 / max(κ+γ, 1e-3)).
fn resolve_auto_t_max(resolver: &mut Resolver<'_>, flag: Option<f64>) -> Result<Option<f64>> {
    let value = match flag {
        Some(v) => Some(v),
        None => match resolver.raw("t-max") {
            Some("auto") | None => None,
            Some(s) => Some(
                s.parse::<f64>()
                    .with_context(|| format!("config key 't-max': bad float '{s}'"))?,
            ),
        },
    };
    resolver.manifest.push((
        "t-max".to_string(),
        value.map(format_value).unwrap_or_else(|| "auto".to_string()),
    ));
    Ok(value)
}

fn write_manifest(out_dir: &Path, mode: &str, resolver: &Resolver<'_>) -> Result<()> {
    let text = render_manifest(mode, TOOL_VERSION, &resolver.manifest);
    output::write_text(&out_dir.join("manifest.cfg"), &text)
}

fn render_all_channels(grid: &SweepGrid<f64>, out_dir: &Path) -> Result<()> {
    for (kind, _) in &grid.channels {
        let png = out_dir.join(format!("sweep_{}.png", kind.name()));
        heatmap::render_heatmap(grid, *kind, &heatmap::HeatmapStyle::default(), &png)?;
        println!("rendered {}", png.display());
    }
    Ok(())
}

fn write_sweep_outputs(grid: &SweepGrid<f64>, out_dir: &Path, render: bool) -> Result<bool> {
    for (kind, _) in &grid.channels {
        let csv = output::sweep_channel_csv(grid, *kind).expect("channel exists");
        let path = out_dir.join(output::channel_file_name(*kind));
        output::write_text(&path, &csv)?;
        println!("wrote {}", path.display());
    }
    let status_path = out_dir.join("sweep_status.csv");
    output::write_text(&status_path, &output::sweep_status_csv(grid))?;
    println!("wrote {}", status_path.display());
    if render {
        render_all_channels(grid, out_dir)?;
    }
    let n_failed = grid
        .status
        .iter()
        .filter(|s| **s == CellStatus::Failed)
        .count();
    let n_flagged = grid.status.iter().filter(|s| !s.is_ok()).count();
    println!(
        "cells: {} total, {} flagged ({} failed)",
        grid.status.len(),
        n_flagged,
        n_failed
    );
    Ok(n_failed == 0)
}

fn cmd_evolve(args: &RunArgs) -> Result<bool> {
    let cfg = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let mut resolver = Resolver::new(cfg.as_ref(), "evolve");
    let settings = resolve_common(
        args,
        &mut resolver,
        64,
        "concurrence,mutual-information,n-ph,p-exc-q1,p-exc-q2,pop-uu,pop-ud,pop-du,pop-dd",
        0.0,
    )?;
    let t_max = resolver.f64("t-max", args.t_max, 100.0)?;
    let t_points = resolver.usize("t-points", args.t_points, 200)?;
    write_manifest(&settings.out_dir, "evolve", &resolver)?;

    let t_grid: Vec<f64> = (0..=t_points)
        .map(|k| t_max * k as f64 / t_points as f64)
        .collect();
    let mut opts = EvolveOptions::<f64>::default();
    opts.ode = opts
        .ode
        .with_tolerances(settings.ode_tol, settings.ode_tol * 1e-2);
    opts.metrics = settings.metrics.clone();
    opts.keep_states = false;
    let rho0 = DensityMatrix::ground(settings.params.space());
    let traj = evolve(&rho0, &settings.params, &t_grid, settings.frame, &opts)
        .map_err(anyhow::Error::new)?;

    let path = settings.out_dir.join("trajectory.csv");
    output::write_text(&path, &output::trajectory_csv(&traj))?;
    println!("wrote {}", path.display());
    let top = traj.max_top_population();
    if top > 1e-6 {
        log::warn!("top Fock level reached population {top:.2e}; consider raising --n-max");
    }
    Ok(true)
}

fn cmd_steady(args: &RunArgs) -> Result<bool> {
    let cfg = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let mut resolver = Resolver::new(cfg.as_ref(), "steady");
    let settings = resolve_common(
        args,
        &mut resolver,
        12,
        "concurrence,mutual-information,n-ph,p-exc-q1",
        0.01,
    )?;
    let t_max = resolve_auto_t_max(&mut resolver, args.t_max)?;
    write_manifest(&settings.out_dir, "steady", &resolver)?;

    let steady_opts = SteadyOptions {
        tol: settings.steady_tol,
        t_max,
        ..Default::default()
    };
    let result = steady_state(&settings.params, settings.method, &steady_opts)
        .map_err(anyhow::Error::new)?;
    let values = evaluate_metrics(StateRef::Density(&result.state), &settings.metrics);

    let summary = settings.out_dir.join("steady_summary.csv");
    output::write_text(
        &summary,
        &output::steady_summary_csv(&result, &settings.metrics, &values),
    )?;
    println!("wrote {}", summary.display());
    let state_path = settings.out_dir.join("steady_state.csv");
    output::write_text(&state_path, &output::state_csv(&result.state))?;
    println!("wrote {}", state_path.display());
    println!(
        "method {} converged {} residual {:.3e}",
        result.method, result.converged, result.residual
    );
    Ok(result.converged)
}

fn cmd_sweep_time_theta(args: &RunArgs) -> Result<bool> {
    let cfg = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let mut resolver = Resolver::new(cfg.as_ref(), "sweep-time-theta");
    let settings = resolve_common(args, &mut resolver, 40, "concurrence", 0.0)?;
    let time_axis = resolver.axis("time", &args.grid, (0.0, 400.0, 401))?;
    let theta_axis = resolver.axis("theta", &args.grid, (0.0, 1.0, 101))?;
    write_manifest(&settings.out_dir, "sweep-time-theta", &resolver)?;

    let mut opts = TimeThetaOptions::default();
    opts.frame = settings.frame;
    opts.evolve.ode = opts
        .evolve
        .ode
        .with_tolerances(settings.ode_tol, settings.ode_tol * 1e-2);
    let grid = time_theta_map(
        &settings.params,
        &time_axis,
        &theta_axis,
        &settings.metrics,
        &opts,
    );
    write_sweep_outputs(&grid, &settings.out_dir, settings.render)
}

fn cmd_sweep_steady(args: &RunArgs) -> Result<bool> {
    let cfg = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let mut resolver = Resolver::new(cfg.as_ref(), "sweep-steady");
    let settings = resolve_common(
        args,
        &mut resolver,
        24,
        "concurrence,mutual-information,n-ph,p-exc-q1",
        0.01,
    )?;
    let kappa_axis = resolver.axis("kappa", &args.grid, (0.0, 0.1, 21))?;
    let theta_axis = resolver.axis("theta", &args.grid, (0.0, 1.0, 101))?;
    let t_max = resolve_auto_t_max(&mut resolver, args.t_max)?;
    write_manifest(&settings.out_dir, "sweep-steady", &resolver)?;

    let opts = SteadyMapOptions {
        steady: SteadyOptions {
            tol: settings.steady_tol,
            t_max,
            ..Default::default()
        },
        method: settings.method,
        ..Default::default()
    };
    let grid = steady_map(
        &settings.params,
        &kappa_axis,
        &theta_axis,
        &settings.metrics,
        &opts,
    );
    write_sweep_outputs(&grid, &settings.out_dir, settings.render)
}

fn cmd_heatmap(args: &HeatmapArgs) -> Result<bool> {
    let channel_csv = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let status_csv = match &args.status {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?,
        ),
        None => None,
    };
    let (grid, kind) = heatmap::grid_from_csv(&channel_csv, status_csv.as_deref())?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.input.with_extension("png"));
    heatmap::render_heatmap(
        &grid,
        kind,
        &heatmap::HeatmapStyle {
            cell_px: args.cell_px,
        },
        &out,
    )?;
    println!("rendered {}", out.display());
    Ok(true)
}

/// Distinguish usage (2) and I/O (3) failures from computational ones (1).
fn classify_error(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
        if let Some(core_err) = cause.downcast_ref::<parqed::Error>() {
            if matches!(core_err, parqed::Error::InvalidArgument(_)) {
                return 2;
            }
        }
    }
    // config/flag parse problems are usage errors
    let text = format!("{err:#}");
    if text.contains("config key")
        || text.contains("grid spec")
        || text.contains("unknown metric")
        || text.contains("unknown frame")
        || text.contains("unknown method")
        || text.contains("parsing config")
    {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Steady(args) => cmd_steady(args),
        Command::SweepTimeTheta(args) => cmd_sweep_time_theta(args),
        Command::SweepSteady(args) => cmd_sweep_steady(args),
        Command::Verify => verify::run_verification().map_err(|e| anyhow!("{e}")),
        Command::Heatmap(args) => cmd_heatmap(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify_error(&err))
        }
    }
}
