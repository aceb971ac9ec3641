//! Scenario runner: loads a JSON configuration, applies command-line
//! overrides, runs the requested simulation, and writes deterministic CSV and
//! JSON artifacts with a content-hash manifest.
//!
//! Exit codes: 0 success, 1 validation failure, 2 simulation error, 3 IO
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bohmsim_core::bohm::integrate_bohm;
use bohmsim_core::config::validate_config;
use bohmsim_core::io::{fmt_f64, OutputWriter};
use bohmsim_core::potential::PotentialModel;
use bohmsim_core::propagator::{kernel_state, propagate};
use bohmsim_core::quantum::{gaussian_packet, polar_decompose, quantum_potential};
use bohmsim_core::zeno::{
    zeno_convergence_sweep, MonitoringSchedule, SigmaPolicy, ZenoNumerics,
};
use bohmsim_core::{PhaseSpacePoint, Result, SimConfig, SimError};

#[derive(Parser)]
#[command(
    name = "bohmsim",
    about = "Bohmian trajectory simulations with position monitoring",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand; flags override the config file.
#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON configuration file (flags override its fields)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scenario: free | harmonic | quartic
    #[arg(long)]
    scenario: Option<String>,
    /// Lower grid bound
    #[arg(long)]
    grid_lower: Option<f64>,
    /// Upper grid bound
    #[arg(long)]
    grid_upper: Option<f64>,
    /// Grid point count (power of two)
    #[arg(long)]
    grid_points: Option<usize>,
    /// Split-operator steps per unit time
    #[arg(long)]
    prop_steps_per_unit_time: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the configuration and report every violated invariant
    Validate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Split-operator propagation of a Gaussian packet; writes the initial
    /// and final wavefunctions
    Propagate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long, default_value_t = 0.0)]
        p0: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Final time
        #[arg(long, short = 't', default_value_t = 1.0)]
        t: f64,
    },
    /// Bohmian trajectory of a particle riding a Gaussian packet
    Trajectory {
        #[command(flatten)]
        common: CommonOpts,
        /// Particle starting position
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        /// Packet center (the particle may start off-center)
        #[arg(long, default_value_t = 0.0)]
        center: f64,
        /// Packet mean momentum
        #[arg(long, default_value_t = 0.0)]
        p0: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Final time
        #[arg(long, short = 't', default_value_t = 1.0)]
        t: f64,
    },
    /// Monitoring convergence sweep over interval counts
    ZenoSweep {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 0.0)]
        p0: f64,
        /// Final time
        #[arg(long, short = 't', default_value_t = 2.0)]
        t: f64,
        /// Relocalization width
        #[arg(long, default_value_t = 0.05)]
        sigma_m: f64,
        /// Scale the relocalization width as dt^EXP instead of keeping it
        /// fixed
        #[arg(long)]
        sigma_exponent: Option<f64>,
        /// Comma-separated interval counts
        #[arg(long, short = 'N', value_delimiter = ',', default_value = "8,16,32,64,128")]
        n: Vec<usize>,
        /// Width of the unmonitored contrast packet
        #[arg(long, default_value_t = 1.0)]
        unmonitored_sigma: f64,
    },
    /// Build exact harmonic-propagator kernel states and report the grid
    /// quantum potential (expected ~0)
    KernelCheck {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        /// Comma-separated interval lengths
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.6")]
        dt: Vec<f64>,
    },
}

fn exit_code_for(err: &SimError) -> u8 {
    match err {
        SimError::InvalidConfig(_) | SimError::InvalidArgument(_) => 1,
        SimError::Io(_) | SimError::Json(_) => 3,
        _ => 2,
    }
}

/// Loads the config (or the 1D default), applies flag overrides, validates.
fn load_config(common: &CommonOpts) -> Result<SimConfig> {
    let mut cfg = match &common.config {
        Some(path) => SimConfig::from_json_file(path)?,
        None => SimConfig::default_1d(),
    };
    if let Some(s) = &common.scenario {
        cfg.scenario = Some(s.clone());
    }
    if let Some(v) = common.grid_lower {
        for axis in &mut cfg.grid.axes {
            axis.lower = v;
        }
    }
    if let Some(v) = common.grid_upper {
        for axis in &mut cfg.grid.axes {
            axis.upper = v;
        }
    }
    if let Some(v) = common.grid_points {
        for axis in &mut cfg.grid.axes {
            axis.points = v;
        }
    }
    if let Some(v) = common.prop_steps_per_unit_time {
        cfg.tolerances.prop_steps_per_unit_time = v;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    validate_config(cfg)
}

/// Maps a scenario name to its registered potential.
fn scenario_potential(cfg: &SimConfig) -> Result<PotentialModel> {
    if let Some(spec) = &cfg.potential {
        return PotentialModel::from_spec(spec, cfg.params.dimension);
    }
    match cfg.scenario.as_deref() {
        Some("free") => Ok(PotentialModel::zero(cfg.params.dimension)),
        Some("harmonic") => Ok(PotentialModel::harmonic(cfg.params.mass, 1.0)),
        Some("quartic") => Ok(PotentialModel::polynomial_1d(vec![
            0.0, 0.0, 0.5, 0.0, 0.1,
        ])),
        Some(other) => Err(SimError::InvalidArgument(format!(
            "unknown scenario '{other}' (expected free, harmonic, or quartic)"
        ))),
        None => Err(SimError::InvalidArgument(
            "no scenario or potential specified".to_string(),
        )),
    }
}

#[derive(Serialize)]
struct TrajectoryReport {
    scenario: String,
    x0: f64,
    p0: f64,
    sigma: f64,
    t: f64,
    endpoint_position: f64,
    endpoint_momentum: f64,
}

#[derive(Serialize)]
struct PropagateReport {
    scenario: String,
    t: f64,
    norm_initial: f64,
    norm_final: f64,
    mean_position: Vec<f64>,
    mean_momentum: Vec<f64>,
}

#[derive(Serialize)]
struct SweepReport {
    scenario: String,
    x0: f64,
    p0: f64,
    t: f64,
    sigma_m: f64,
    sigma_policy: String,
    #[serde(flatten)]
    summary: bohmsim_core::zeno::SweepSummary,
    slope_window: [f64; 2],
    slope_in_window: bool,
    monotone_ok: bool,
    contrast_threshold: f64,
    contrast_ok: bool,
    pass: bool,
}

#[derive(Serialize)]
struct KernelCheckRow {
    dt: f64,
    max_abs_q: f64,
}

#[derive(Serialize)]
struct KernelCheckReport {
    x0: f64,
    rows: Vec<KernelCheckRow>,
    threshold: f64,
    pass: bool,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { common } => {
            let cfg = load_config(&common)?;
            if cfg.scenario.is_some() || cfg.potential.is_some() {
                scenario_potential(&cfg)?;
            }
            println!("configuration valid");
            Ok(())
        }
        Command::Propagate {
            common,
            x0,
            p0,
            sigma,
            t,
        } => {
            let cfg = load_config(&common)?;
            let v = scenario_potential(&cfg)?;
            let psi0 = gaussian_packet(
                &[x0],
                &[p0],
                sigma,
                cfg.grid.axes.clone(),
                cfg.params,
                0.0,
            )?;
            let steps = ((cfg.tolerances.prop_steps_per_unit_time as f64 * t).ceil()
                as usize)
                .max(1);
            let psi1 = propagate(&psi0, &v, 0.0, t, steps)?;
            let mut w = OutputWriter::new(&cfg.output_dir)?;
            for (name, psi) in [("psi_initial.csv", &psi0), ("psi_final.csv", &psi1)] {
                let polar = polar_decompose(psi, cfg.tolerances.eps_rho)?;
                let q = quantum_potential(&polar)?;
                w.write_wavefunction_csv(name, psi, &polar, &q)?;
            }
            let report = PropagateReport {
                scenario: cfg.scenario.clone().unwrap_or_else(|| "custom".to_string()),
                t,
                norm_initial: psi0.norm(),
                norm_final: psi1.norm(),
                mean_position: psi1.mean_position(),
                mean_momentum: psi1.mean_momentum(),
            };
            w.write_json("summary.json", &report)?;
            w.finish()?;
            println!(
                "final norm {} mean position {:?}",
                fmt_f64(report.norm_final),
                report.mean_position
            );
            Ok(())
        }
        Command::Trajectory {
            common,
            x0,
            center,
            p0,
            sigma,
            t,
        } => {
            let cfg = load_config(&common)?;
            let v = scenario_potential(&cfg)?;
            let psi0 = gaussian_packet(
                &[center],
                &[p0],
                sigma,
                cfg.grid.axes.clone(),
                cfg.params,
                0.0,
            )?;
            let steps = ((cfg.tolerances.prop_steps_per_unit_time as f64 * t).ceil()
                as usize)
                .max(1);
            let traj = integrate_bohm(
                &v,
                &psi0,
                &[x0],
                0.0,
                t,
                steps,
                cfg.tolerances.ode_substeps,
                cfg.tolerances.eps_rho,
            )?;
            let end = traj.last_state().expect("non-empty trajectory");
            let mut w = OutputWriter::new(&cfg.output_dir)?;
            w.write_trajectory_csv("trajectory.csv", &traj)?;
            let report = TrajectoryReport {
                scenario: cfg.scenario.clone().unwrap_or_else(|| "custom".to_string()),
                x0,
                p0,
                sigma,
                t,
                endpoint_position: end.position[0],
                endpoint_momentum: end.momentum[0],
            };
            w.write_json("summary.json", &report)?;
            w.finish()?;
            println!("endpoint position {}", fmt_f64(report.endpoint_position));
            Ok(())
        }
        Command::ZenoSweep {
            common,
            x0,
            p0,
            t,
            sigma_m,
            sigma_exponent,
            n,
            unmonitored_sigma,
        } => {
            let mut cfg = load_config(&common)?;
            // the narrow relocalized packets need a finer default grid
            if common.grid_points.is_none() && common.config.is_none() {
                for axis in &mut cfg.grid.axes {
                    axis.points = 4096;
                }
            }
            let v = scenario_potential(&cfg)?;
            let mut schedule = MonitoringSchedule::fixed(0.0, t, 1, sigma_m);
            if let Some(exponent) = sigma_exponent {
                schedule.sigma_policy = SigmaPolicy::ScaleWithDt { exponent };
            }
            let mut numerics = ZenoNumerics::new_1d(cfg.grid.axes.clone(), cfg.params);
            numerics.prop_steps_per_unit_time = cfg.tolerances.prop_steps_per_unit_time;
            numerics.ode_substeps = cfg.tolerances.ode_substeps;
            numerics.eps_rho = cfg.tolerances.eps_rho;
            let s0 = PhaseSpacePoint::new_1d(x0, p0);
            let summary =
                zeno_convergence_sweep(&v, &s0, &schedule, &n, unmonitored_sigma, &numerics)?;

            let slope_window = [0.5, 1.5];
            let slope_in_window =
                summary.slope >= slope_window[0] && summary.slope <= slope_window[1];
            let monotone_ok = summary.monotone_violations <= 1;
            let contrast_threshold = 0.2;
            let contrast_ok = summary
                .rows
                .last()
                .map(|r| r.endpoint_error < contrast_threshold * summary.unmonitored_error)
                .unwrap_or(false);
            let report = SweepReport {
                scenario: cfg.scenario.clone().unwrap_or_else(|| "custom".to_string()),
                x0,
                p0,
                t,
                sigma_m,
                sigma_policy: match schedule.sigma_policy {
                    SigmaPolicy::Fixed => "fixed".to_string(),
                    SigmaPolicy::ScaleWithDt { exponent } => {
                        format!("scale_with_dt({exponent})")
                    }
                },
                slope_window,
                slope_in_window,
                monotone_ok,
                contrast_threshold,
                contrast_ok,
                pass: slope_in_window && monotone_ok && contrast_ok,
                summary,
            };
            let mut w = OutputWriter::new(&cfg.output_dir)?;
            w.write_sweep_csv("sweep.csv", &report.summary)?;
            w.write_json("summary.json", &report)?;
            w.finish()?;
            println!(
                "slope {} monotone violations {} pass {}",
                fmt_f64(report.summary.slope),
                report.summary.monotone_violations,
                report.pass
            );
            Ok(())
        }
        Command::KernelCheck { common, x0, dt } => {
            let cfg = load_config(&common)?;
            let matrix = nalgebra::DMatrix::from_element(1, 1, 1.0);
            let threshold = 1e-6;
            let mut rows = Vec::new();
            let mut w = OutputWriter::new(&cfg.output_dir)?;
            for (k, &interval) in dt.iter().enumerate() {
                let psi = kernel_state(
                    &matrix,
                    &[x0],
                    interval,
                    0.0,
                    cfg.grid.axes.clone(),
                    cfg.params,
                )?;
                let polar = polar_decompose(&psi, cfg.tolerances.eps_rho)?;
                let q = quantum_potential(&polar)?;
                let max_abs_q = q
                    .iter()
                    .filter(|v| v.is_finite())
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                w.write_wavefunction_csv(&format!("kernel_{k}.csv"), &psi, &polar, &q)?;
                rows.push(KernelCheckRow {
                    dt: interval,
                    max_abs_q,
                });
            }
            let pass = rows.iter().all(|r| r.max_abs_q < threshold);
            let report = KernelCheckReport {
                x0,
                rows,
                threshold,
                pass,
            };
            w.write_json("summary.json", &report)?;
            w.finish()?;
            println!("kernel check pass {pass}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
