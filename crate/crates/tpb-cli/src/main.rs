//! Command-line front door for the planned-behavior dynamics library: run
//! simulations, classifications, sweeps, boundary traces, and the minimal-
//! attitude computation from a JSON config, emitting CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 2 config error, 3 runtime numeric failure. Errors
//! are reported as one JSON object on stderr. Reruns with the same config
//! reproduce every output byte for byte; individuals are numbered from 1 in
//! all outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use tpb_dynamics::{
    analytic, io as tio, sim, sweep, Error as ModelError, GlobalParams, IndividualConfig,
    SimConfig, SweepMode, SweepSpec,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tpb",
    version,
    about = "Hybrid threshold dynamics of planned behavior: simulate, classify, sweep",
    after_help = "OUTPUT FILES\n\
    \x20 simulate: trajectory.csv (t,x_1..x_n,y_1..y_n), events.csv (individual,t), result.json\n\
    \x20 sweep:    grid.csv (alpha1,alpha2,class,M,margin1,margin2,agreement),\n\
    \x20           boundary_linear.csv, boundary_m0.csv (alpha1,alpha2), summary.json\n\
    \x20 boundary: boundary_m0.csv (alpha1,alpha2)\n\
    Every file embeds a provenance echo of the resolved config; reruns are\n\
    byte-identical. Individuals are numbered from 1 in all outputs."
)]
struct Cli {
    /// Path to the JSON run config (see `tpb example-config`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory. Precedence: this flag, then the TPB_OUT_DIR
    /// environment variable, then the config's out_dir, then "out".
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweep parallelism (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Reserved for future stochastic variants; the current dynamics are
    /// deterministic and this flag is ignored.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the hybrid system and write trajectory/event artifacts.
    Simulate {
        /// Override the integration window.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Classify the configured system (analytic needs n = 2).
    Classify {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Classify every cell of the configured attitude grid.
    Sweep {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Trace the M = 0 boundary curve over the configured alpha1 range.
    Boundary,
    /// Minimal alpha1 for which the partner acts, in the B = 0 special case:
    /// closed form (Lambert W) against a bisection cross-check.
    Minalpha,
    /// Print a commented example config to stdout.
    ExampleConfig,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Analytic,
    Simulated,
    Both,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Analytic => SweepMode::Analytic,
            ModeArg::Simulated => SweepMode::Simulated,
            ModeArg::Both => SweepMode::Both,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    globals: GlobalParams,
    #[serde(default)]
    individuals: Vec<IndividualConfig>,
    #[serde(default)]
    sim: Option<SimOverrides>,
    #[serde(default)]
    sweep: Option<SweepSection>,
    #[serde(default)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimOverrides {
    t_end: Option<f64>,
    dt_max: Option<f64>,
    event_tol: Option<f64>,
    sample_every: Option<f64>,
    horizon_periods: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    alpha_ranges: Vec<sweep::AxisRange>,
    mode: SweepMode,
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

/// Errors raised after the config validated cleanly are runtime failures.
fn runtime(e: ModelError) -> CliError {
    CliError::Runtime(e.to_string())
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = json!({"error": e.message(), "exit": e.exit_code()});
            eprintln!("{payload}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::ExampleConfig = cli.command {
        print!("{}", example_config());
        return Ok(());
    }
    init_workers(cli.workers)?;
    let cfg = load_config(cli)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("TPB_OUT_DIR").map(PathBuf::from))
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match &cli.command {
        Command::Simulate { t_end } => cmd_simulate(&cfg, *t_end, &out_dir),
        Command::Classify { mode } => cmd_classify(&cfg, mode.map(SweepMode::from)),
        Command::Sweep { mode } => cmd_sweep(&cfg, mode.map(SweepMode::from), &out_dir),
        Command::Boundary => cmd_boundary(&cfg, &out_dir),
        Command::Minalpha => cmd_minalpha(&cfg),
        Command::ExampleConfig => unreachable!(),
    }
}

#[cfg(feature = "parallel")]
fn init_workers(workers: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = workers {
        if n == 0 {
            return Err(config_err("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_err(format!("failed to size the worker pool: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn init_workers(workers: Option<usize>) -> Result<(), CliError> {
    if workers.is_some_and(|n| n > 1) {
        eprintln!("note: built without the `parallel` feature; running sequentially");
    }
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let Some(path) = &cli.config else {
        return Err(config_err(
            "missing required --config PATH; see `tpb example-config`",
        ));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("invalid config {}: {e}", path.display())))?;
    cfg.globals
        .validate()
        .map_err(|e| config_err(format!("invalid globals: {e}")))?;
    for (i, ind) in cfg.individuals.iter().enumerate() {
        ind.validate()
            .map_err(|e| config_err(format!("individual {}: {e}", i + 1)))?;
    }
    Ok(cfg)
}

fn alphas_of(cfg: &RunConfig) -> Vec<f64> {
    cfg.individuals.iter().map(|c| c.alpha).collect()
}

fn resolve_sim_config(
    cfg: &RunConfig,
    t_end_flag: Option<f64>,
) -> Result<SimConfig, CliError> {
    if cfg.individuals.len() != cfg.globals.n {
        return Err(config_err(format!(
            "config lists {} individuals but globals.n = {}",
            cfg.individuals.len(),
            cfg.globals.n
        )));
    }
    let ov = cfg.sim.clone().unwrap_or_default();
    let mut sim_cfg = SimConfig::derive(
        &cfg.globals,
        &alphas_of(cfg),
        ov.horizon_periods.unwrap_or(sim::DEFAULT_HORIZON_PERIODS),
        ov.event_tol.unwrap_or(sim::DEFAULT_EVENT_TOL),
    )
    .map_err(|e| config_err(e.to_string()))?;
    if let Some(v) = ov.t_end {
        sim_cfg.t_end = v;
    }
    if let Some(v) = ov.dt_max {
        sim_cfg.dt_max = v;
    }
    if let Some(v) = ov.event_tol {
        sim_cfg.event_tol = v;
    }
    if let Some(v) = ov.sample_every {
        sim_cfg.sample_every = v;
    }
    if let Some(v) = t_end_flag {
        sim_cfg.t_end = v;
    }
    sim_cfg
        .validate()
        .map_err(|e| config_err(e.to_string()))?;
    Ok(sim_cfg)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// The resolved-config echo embedded in every artifact.
fn config_echo(cfg: &RunConfig, sim_cfg: Option<&SimConfig>) -> serde_json::Value {
    json!({
        "globals": cfg.globals,
        "individuals": cfg.individuals,
        "sim": sim_cfg,
        "sweep": cfg.sweep,
    })
}

fn cmd_simulate(cfg: &RunConfig, t_end_flag: Option<f64>, out_dir: &Path) -> Result<(), CliError> {
    if cfg.individuals.is_empty() {
        return Err(config_err("simulate needs a nonempty `individuals` list"));
    }
    let sim_cfg = resolve_sim_config(cfg, t_end_flag)?;
    let traj = sim::simulate(&cfg.globals, &cfg.individuals, &sim_cfg).map_err(runtime)?;

    let mut traj_csv = Vec::new();
    tio::write_trajectory_csv(&mut traj_csv, &traj)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(out_dir, "trajectory.csv", &traj_csv)?;

    let mut events_csv = Vec::new();
    tio::write_events_csv(&mut events_csv, &traj)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(out_dir, "events.csv", &events_csv)?;

    let envelope = tio::trajectory_envelope(&traj, &config_echo(cfg, Some(&sim_cfg)));
    let mut payload = serde_json::to_string_pretty(&envelope).expect("serializable");
    payload.push('\n');
    write_file(out_dir, "result.json", payload.as_bytes())?;

    for (i, count) in traj.event_counts().iter().enumerate() {
        println!("individual {}: {} actions", i + 1, count);
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn cmd_classify(cfg: &RunConfig, mode_flag: Option<SweepMode>) -> Result<(), CliError> {
    let n = cfg.globals.n;
    let mode = mode_flag.unwrap_or(if n == 2 {
        SweepMode::Analytic
    } else {
        SweepMode::Simulated
    });
    if matches!(mode, SweepMode::Analytic | SweepMode::Both) && n != 2 {
        return Err(config_err(format!(
            "analytic classification covers exactly 2 individuals, config has {n}; \
             use --mode simulated"
        )));
    }
    if cfg.individuals.len() != n {
        return Err(config_err(format!(
            "config lists {} individuals but globals.n = {n}",
            cfg.individuals.len()
        )));
    }
    let alphas = alphas_of(cfg);

    let analytic_side = if matches!(mode, SweepMode::Analytic | SweepMode::Both) {
        Some(analytic::classify_two(&cfg.globals, alphas[0], alphas[1]).map_err(runtime)?)
    } else {
        None
    };
    let empirical_side = if matches!(mode, SweepMode::Simulated | SweepMode::Both) {
        let sim_cfg = resolve_sim_config(cfg, None)?;
        let traj = sim::simulate(&cfg.globals, &cfg.individuals, &sim_cfg).map_err(runtime)?;
        Some(sim::empirical_classify(&traj, &cfg.globals, &sim_cfg))
    } else {
        None
    };

    let verdict = analytic_side
        .as_ref()
        .or(empirical_side.as_ref())
        .expect("at least one mode ran");
    let actors_one_based: Vec<usize> = verdict.actors.iter().map(|&i| i + 1).collect();
    let bounds = match (&analytic_side, verdict.evidence.invariant) {
        (Some(_), Some(m)) if m > 0.0 => {
            let (hi, lo) = if alphas[0] >= alphas[1] {
                (alphas[0], alphas[1])
            } else {
                (alphas[1], alphas[0])
            };
            analytic::action_bounds(&cfg.globals, hi, lo).ok()
        }
        _ => None,
    };
    let mut payload = json!({
        "mode": match mode {
            SweepMode::Analytic => "analytic",
            SweepMode::Simulated => "simulated",
            SweepMode::Both => "both",
        },
        "tag": verdict.regime.to_string(),
        "actors": actors_one_based,
        "M": verdict.evidence.invariant,
        "margins": verdict.evidence.margins,
        "bounds": bounds,
        "config": config_echo(cfg, None),
    });
    if let (Some(a), Some(e)) = (&analytic_side, &empirical_side) {
        payload["analytic_tag"] = json!(a.regime.to_string());
        payload["empirical_tag"] = json!(e.regime.to_string());
        payload["agreement"] = json!(a.regime == e.regime);
    }
    println!("{}", serde_json::to_string_pretty(&payload).expect("serializable"));
    Ok(())
}

fn sweep_spec_of(cfg: &RunConfig, mode_flag: Option<SweepMode>) -> Result<SweepSpec, CliError> {
    let Some(section) = &cfg.sweep else {
        return Err(config_err("this command needs a `sweep` config section"));
    };
    let ov = cfg.sim.clone().unwrap_or_default();
    let spec = SweepSpec {
        params: cfg.globals,
        alpha_ranges: section.alpha_ranges.clone(),
        mode: mode_flag.unwrap_or(section.mode),
        horizon_periods: ov.horizon_periods.unwrap_or(sim::DEFAULT_HORIZON_PERIODS),
        event_tol: ov.event_tol.unwrap_or(sim::DEFAULT_EVENT_TOL),
    };
    spec.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(spec)
}

fn cmd_sweep(
    cfg: &RunConfig,
    mode_flag: Option<SweepMode>,
    out_dir: &Path,
) -> Result<(), CliError> {
    let spec = sweep_spec_of(cfg, mode_flag)?;
    let result = sweep::run_sweep(&spec).map_err(runtime)?;

    let mut grid = Vec::new();
    tio::write_grid_csv(&mut grid, &result).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(out_dir, "grid.csv", &grid)?;

    let mut linear = Vec::new();
    tio::write_boundary_csv(&mut linear, &result.boundary_linear, &spec)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(out_dir, "boundary_linear.csv", &linear)?;

    let mut m0 = Vec::new();
    tio::write_boundary_csv(&mut m0, &result.boundary_m0, &spec)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(out_dir, "boundary_m0.csv", &m0)?;

    let mut summary = serde_json::to_string_pretty(&tio::sweep_summary_json(&result))
        .expect("serializable");
    summary.push('\n');
    write_file(out_dir, "summary.json", summary.as_bytes())?;

    let s = &result.summary;
    println!(
        "cells: {} (no_action {}, partial {}, full {}, undetermined {}, errors {})",
        result.cells.len(),
        s.counts.no_action,
        s.counts.partial_action,
        s.counts.full_action,
        s.counts.undetermined,
        s.counts.error
    );
    if let Some(rate) = s.agreement_rate {
        println!(
            "agreement: {:.4} ({} of {}, {} excluded)",
            rate, s.agreeing, s.compared, s.excluded
        );
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn cmd_boundary(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let Some(section) = &cfg.sweep else {
        return Err(config_err("boundary needs a `sweep` config section"));
    };
    let Some(range) = section.alpha_ranges.first() else {
        return Err(config_err("boundary needs a nonempty alpha_ranges"));
    };
    let curve = sweep::trace_boundary_m0(&cfg.globals, range).map_err(|e| match e {
        ModelError::NonPositiveMarginInRange { .. } => config_err(e.to_string()),
        other => runtime(other),
    })?;
    let mut csv = Vec::new();
    tio::write_boundary_csv(&mut csv, &curve, &config_echo(cfg, None))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(out_dir, "boundary_m0.csv", &csv)?;
    let mut worst = 0.0f64;
    for &[a1, a2] in &curve {
        let m = analytic::invariant_m(&cfg.globals, a1, a2).map_err(runtime)?;
        worst = worst.max(m.abs());
    }
    println!(
        "{} boundary points, max |M| residual {:e}",
        curve.len(),
        worst
    );
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn cmd_minalpha(cfg: &RunConfig) -> Result<(), CliError> {
    let params = &cfg.globals;
    let alpha2 = analytic::alpha2_for_b_zero(params).map_err(runtime)?;
    let closed = analytic::min_alpha1_for_action_b0(params).map_err(runtime)?;
    let bisected = analytic::min_alpha1_bisect(params, alpha2, 1e-12).map_err(runtime)?;
    let payload = json!({
        "alpha2_b_zero": alpha2,
        "alpha1_closed_form": closed,
        "alpha1_bisection": bisected,
        "difference": closed - bisected,
        "config": config_echo(cfg, None),
    });
    println!("{}", serde_json::to_string_pretty(&payload).expect("serializable"));
    Ok(())
}

fn example_config() -> String {
    let example = RunConfig {
        globals: GlobalParams {
            sigma_a: 1.0,
            sigma_s: 0.5,
            sigma_c: 0.5,
            mu_s: 0.5,
            mu_c: 0.05,
            r: 0.86,
            tau: 0.8,
            n: 2,
        },
        individuals: vec![
            IndividualConfig {
                alpha: 0.5,
                x0: 0.0,
                y0: 0.0,
            },
            IndividualConfig {
                alpha: 0.23,
                x0: 0.0,
                y0: 0.0,
            },
        ],
        sim: Some(SimOverrides {
            horizon_periods: Some(40),
            ..Default::default()
        }),
        sweep: Some(SweepSection {
            alpha_ranges: vec![
                sweep::AxisRange {
                    lo: 0.0,
                    hi: 0.99,
                    steps: 101,
                },
                sweep::AxisRange {
                    lo: 0.0,
                    hi: 0.99,
                    steps: 101,
                },
            ],
            mode: SweepMode::Both,
        }),
        out_dir: Some(PathBuf::from("out")),
    };
    let mut s = serde_json::to_string_pretty(&example).expect("serializable");
    s.push('\n');
    s
}
