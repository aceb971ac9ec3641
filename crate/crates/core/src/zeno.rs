//! Trajectory monitoring: subdivide a time horizon, relocalize the packet at
//! the Bohmian position after each interval while carrying the Bohmian
//! momentum forward, and measure how fast the monitored endpoint converges to
//! the classical flow as the interval count grows.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::bohm::integrate_bohm;
use crate::classical::{classical_endpoint, integrate_classical};
use crate::config::GridAxisSpec;
use crate::error::{Result, SimError};
use crate::potential::PotentialModel;
use crate::propagator::{hamilton_two_point, kernel_state};
use crate::quantum::{gaussian_packet, polar_decompose, quantum_potential};
use crate::types::{PhaseSpacePoint, PhysicalParams, Trajectory};

/// How the relocalization width varies with the interval length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaPolicy {
    /// Constant width `relocalization_sigma`.
    Fixed,
    /// Width `relocalization_sigma * dt^exponent`.
    ScaleWithDt { exponent: f64 },
}

/// Parameters of the monitoring protocol. The momentum carried into each
/// relocalized packet is the Bohmian momentum at the previous endpoint
/// (encoded as the plane-wave phase of the new packet); no other momentum
/// policy is implemented.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitoringSchedule {
    pub t0: f64,
    pub t1: f64,
    pub intervals: usize,
    pub relocalization_sigma: f64,
    pub sigma_policy: SigmaPolicy,
}

impl MonitoringSchedule {
    pub fn fixed(t0: f64, t1: f64, intervals: usize, relocalization_sigma: f64) -> Self {
        Self {
            t0,
            t1,
            intervals,
            relocalization_sigma,
            sigma_policy: SigmaPolicy::Fixed,
        }
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.intervals as f64
    }

    pub fn sigma_for(&self, dt: f64) -> f64 {
        match self.sigma_policy {
            SigmaPolicy::Fixed => self.relocalization_sigma,
            SigmaPolicy::ScaleWithDt { exponent } => {
                self.relocalization_sigma * dt.powf(exponent)
            }
        }
    }

    fn validate(&self, axes: &[GridAxisSpec]) -> Result<()> {
        let mut errs = Vec::new();
        if self.intervals < 1 {
            errs.push("intervals must be at least 1".to_string());
        }
        if !(self.t1 > self.t0) {
            errs.push(format!(
                "t1 = {} must be greater than t0 = {}",
                self.t1, self.t0
            ));
        }
        if !(self.relocalization_sigma > 0.0) {
            errs.push("relocalization sigma must be positive".to_string());
        }
        let max_spacing = axes.iter().map(|a| a.spacing()).fold(0.0f64, f64::max);
        let sigma = self.sigma_for(self.dt());
        if sigma <= 2.0 * max_spacing {
            errs.push(format!(
                "relocalization sigma {sigma} must exceed 2 grid spacings ({})",
                2.0 * max_spacing
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(errs))
        }
    }
}

/// Quantum-potential statistics along one monitoring interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalStats {
    pub mean_abs_q: f64,
    pub max_abs_q: f64,
}

/// Outcome of one monitored run, with the classical reference at the same
/// monitoring instants and optionally a single unmonitored Bohmian run for
/// contrast.
#[derive(Debug, Clone)]
pub struct ZenoRunResult {
    pub monitored: Trajectory,
    pub classical: Trajectory,
    pub unmonitored: Option<Trajectory>,
    pub endpoint_error: f64,
    pub momentum_error: f64,
    pub interval_stats: Vec<IntervalStats>,
}

/// How the wavefunction is propagated across each monitoring interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMethod {
    /// Exact kernel for 1D quadratic potentials, split-operator otherwise.
    Auto,
    SplitOperator,
    /// Exact delta-relocalized kernel evolution; quadratic 1D potentials only.
    ExactKernel,
}

/// Grid and integrator settings for monitored runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ZenoNumerics {
    pub axes: Vec<GridAxisSpec>,
    pub params: PhysicalParams,
    pub prop_steps_per_unit_time: usize,
    pub ode_substeps: usize,
    pub eps_rho: f64,
    pub classical_steps_per_unit_time: usize,
    pub method: PropagationMethod,
}

impl ZenoNumerics {
    pub fn new_1d(axes: Vec<GridAxisSpec>, params: PhysicalParams) -> Self {
        Self {
            axes,
            params,
            prop_steps_per_unit_time: 1000,
            ode_substeps: 4,
            eps_rho: crate::quantum::DEFAULT_EPS_RHO,
            classical_steps_per_unit_time: 10_000,
            method: PropagationMethod::Auto,
        }
    }

    /// Split-operator steps for one grid interval of length `dt` starting from
    /// a packet of width `sigma`. A freshly relocalized packet has momentum
    /// spread hbar/(2 sigma), so its kinetic phases advance at a rate of
    /// hbar/(2 m sigma^2) per unit time; the Strang substep must resolve that
    /// rate or the second-order splitting error leaves a momentum bias per
    /// interval that does not shrink with dt.
    fn grid_steps(&self, dt: f64, sigma: f64) -> usize {
        let rate = self.params.hbar / (2.0 * self.params.mass * sigma * sigma);
        let per_unit = (self.prop_steps_per_unit_time as f64).max(rate / 0.025);
        ((per_unit * dt).ceil() as usize).max(1)
    }
}

/// N equal intervals covering [t0, t1], with t1 hit exactly.
pub fn subdivide(t0: f64, t1: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    if n < 1 {
        return Err(SimError::InvalidArgument(
            "interval count must be at least 1".to_string(),
        ));
    }
    if !(t1 > t0) {
        return Err(SimError::InvalidArgument(format!(
            "t1 = {t1} must be greater than t0 = {t0}"
        )));
    }
    let span = t1 - t0;
    let edge = |k: usize| {
        if k == n {
            t1
        } else {
            t0 + span * k as f64 / n as f64
        }
    };
    Ok((0..n).map(|k| (edge(k), edge(k + 1))).collect())
}

/// Applies a one-interval phase-space map N times.
pub fn trotter_compose<F>(step: F, s0: &PhaseSpacePoint, n: usize) -> Result<PhaseSpacePoint>
where
    F: Fn(&PhaseSpacePoint) -> Result<PhaseSpacePoint>,
{
    if n < 1 {
        return Err(SimError::InvalidArgument(
            "composition count must be at least 1".to_string(),
        ));
    }
    let mut s = s0.clone();
    for _ in 0..n {
        s = step(&s)?;
    }
    Ok(s)
}

fn quadratic_matrix_1d(potential: &PotentialModel) -> Option<DMatrix<f64>> {
    match potential {
        PotentialModel::Quadratic { matrix } if matrix.nrows() == 1 => Some(matrix.clone()),
        PotentialModel::Zero { dimension: 1 } => Some(DMatrix::zeros(1, 1)),
        _ => None,
    }
}

fn classical_reference(
    potential: &PotentialModel,
    s0: &PhaseSpacePoint,
    schedule: &MonitoringSchedule,
    numerics: &ZenoNumerics,
) -> Result<Trajectory> {
    let n = schedule.intervals;
    let per_interval = ((numerics.classical_steps_per_unit_time as f64 * schedule.dt()).ceil()
        as usize)
        .max(1);
    let fine = integrate_classical(
        potential,
        s0,
        numerics.params.mass,
        schedule.t0,
        schedule.t1,
        n * per_interval,
    )?;
    let times: Vec<f64> = (0..=n).map(|k| fine.times()[k * per_interval]).collect();
    let states: Vec<PhaseSpacePoint> = (0..=n)
        .map(|k| fine.states()[k * per_interval].clone())
        .collect();
    Trajectory::new(times, states)
}

/// One monitored run: per interval, relocalize a Gaussian of width
/// sigma_policy(dt) at the current position with the carried momentum as its
/// plane-wave phase, evolve it across the interval, and read the Bohmian
/// endpoint and momentum off the trajectory. With the exact kernel the
/// relocalization is a delta function and the interval map is evaluated in
/// closed form.
pub fn monitored_run(
    potential: &PotentialModel,
    s0: &PhaseSpacePoint,
    schedule: &MonitoringSchedule,
    numerics: &ZenoNumerics,
) -> Result<ZenoRunResult> {
    schedule.validate(&numerics.axes)?;
    let use_kernel = match numerics.method {
        PropagationMethod::SplitOperator => false,
        PropagationMethod::ExactKernel => {
            if quadratic_matrix_1d(potential).is_none() {
                return Err(SimError::InvalidArgument(
                    "exact kernel propagation requires a 1D quadratic potential".to_string(),
                ));
            }
            true
        }
        PropagationMethod::Auto => quadratic_matrix_1d(potential).is_some(),
    };

    let intervals = subdivide(schedule.t0, schedule.t1, schedule.intervals)?;
    let mut times = vec![schedule.t0];
    let mut states = vec![s0.clone()];
    let mut interval_stats = Vec::with_capacity(schedule.intervals);
    let mut current = s0.clone();

    for (k, &(ta, tb)) in intervals.iter().enumerate() {
        let wrap = |e: SimError| SimError::ZenoInterval {
            interval: k,
            source: Box::new(e),
        };
        let dt = tb - ta;
        if use_kernel {
            let matrix = quadratic_matrix_1d(potential).expect("checked above");
            let (next, stats) =
                kernel_interval(&matrix, &current, ta, tb, numerics).map_err(wrap)?;
            current = next;
            interval_stats.push(stats);
        } else {
            let sigma = schedule.sigma_for(dt);
            let steps = numerics.grid_steps(dt, sigma);
            let packet = gaussian_packet(
                &current.position,
                &current.momentum,
                sigma,
                numerics.axes.clone(),
                numerics.params,
                ta,
            )
            .map_err(wrap)?;
            let traj = integrate_bohm(
                potential,
                &packet,
                &current.position,
                ta,
                tb,
                steps,
                numerics.ode_substeps,
                numerics.eps_rho,
            )
            .map_err(wrap)?;
            current = traj.last_state().expect("non-empty").clone();
            let qs = traj.quantum_potential().expect("recorded");
            let mean = qs.iter().map(|q| q.abs()).sum::<f64>() / qs.len() as f64;
            let max = qs.iter().fold(0.0f64, |m, q| m.max(q.abs()));
            interval_stats.push(IntervalStats {
                mean_abs_q: mean,
                max_abs_q: max,
            });
        }
        times.push(tb);
        states.push(current.clone());
    }

    let monitored = Trajectory::new(times, states)?;
    let classical = classical_reference(potential, s0, schedule, numerics)?;
    let end_m = monitored.last_state().expect("non-empty");
    let end_c = classical.last_state().expect("non-empty");
    let endpoint_error = end_m.position_distance(end_c)?;
    let momentum_error = end_m.momentum_distance(end_c)?;
    Ok(ZenoRunResult {
        monitored,
        classical,
        unmonitored: None,
        endpoint_error,
        momentum_error,
        interval_stats,
    })
}

/// One exact-kernel interval. The delta-relocalized state evolves into the
/// kernel G(., x_k); its phase is Hamilton's two-point function W, so the
/// carried momentum picks the trajectory through -grad_{x0} W(x, x_k) = p_k,
/// giving x_{k+1} = L^{-1}(p_k + B x_k) and p_{k+1} = grad_x W. The
/// amplitude of G is position-independent, so the quantum potential of the
/// evolved state vanishes; the grid statistics verify that.
fn kernel_interval(
    matrix: &DMatrix<f64>,
    s: &PhaseSpacePoint,
    ta: f64,
    tb: f64,
    numerics: &ZenoNumerics,
) -> Result<(PhaseSpacePoint, IntervalStats)> {
    let data = hamilton_two_point(matrix, numerics.params.mass, tb, ta)?;
    let x0 = DVector::from_column_slice(&s.position);
    let p0 = DVector::from_column_slice(&s.momentum);
    let l_inv = data
        .l_mat
        .clone()
        .try_inverse()
        .ok_or(SimError::Caustic { dt: tb - ta })?;
    let x1 = &l_inv * (&p0 + &data.b_mat * &x0);
    let p1 = &data.p_mat * &x1 - data.l_mat.transpose() * &x0;

    let psi = kernel_state(
        matrix,
        &s.position,
        tb,
        ta,
        numerics.axes.clone(),
        numerics.params,
    )?;
    let polar = polar_decompose(&psi, numerics.eps_rho)?;
    let q = quantum_potential(&polar)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut max: f64 = 0.0;
    for v in q.iter().filter(|v| !v.is_nan()) {
        sum += v.abs();
        max = max.max(v.abs());
        count += 1;
    }
    let stats = IntervalStats {
        mean_abs_q: sum / count.max(1) as f64,
        max_abs_q: max,
    };
    Ok((
        PhaseSpacePoint::new(x1.as_slice().to_vec(), p1.as_slice().to_vec())?,
        stats,
    ))
}

/// A single continuous (never relocalized) Bohmian run from a Gaussian of
/// width `sigma` at `s0`, reported at the monitoring instants of `schedule`.
pub fn unmonitored_run(
    potential: &PotentialModel,
    s0: &PhaseSpacePoint,
    sigma: f64,
    schedule: &MonitoringSchedule,
    numerics: &ZenoNumerics,
) -> Result<Trajectory> {
    let n = schedule.intervals;
    let per_interval = numerics.grid_steps(schedule.dt(), sigma);
    let packet = gaussian_packet(
        &s0.position,
        &s0.momentum,
        sigma,
        numerics.axes.clone(),
        numerics.params,
        schedule.t0,
    )?;
    let fine = integrate_bohm(
        potential,
        &packet,
        &s0.position,
        schedule.t0,
        schedule.t1,
        n * per_interval,
        numerics.ode_substeps,
        numerics.eps_rho,
    )?;
    let times: Vec<f64> = (0..=n).map(|k| fine.times()[k * per_interval]).collect();
    let states: Vec<PhaseSpacePoint> = (0..=n)
        .map(|k| fine.states()[k * per_interval].clone())
        .collect();
    Trajectory::new(times, states)
}

/// One row of the convergence sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub intervals: usize,
    pub dt: f64,
    pub endpoint_error: f64,
    pub momentum_error: f64,
    pub mean_abs_q: f64,
    pub max_abs_q: f64,
}

/// Sweep table with the fitted convergence slope and the unmonitored
/// contrast error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of log endpoint_error vs log dt.
    pub slope: f64,
    /// Endpoint deviation of the unmonitored run from the classical flow.
    pub unmonitored_error: f64,
    /// Width of the unmonitored initial Gaussian.
    pub unmonitored_sigma: f64,
    pub monotone_violations: usize,
}

/// Least-squares slope of y against x.
fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// Runs `monitored_run` for every interval count in `n_list` (concurrently),
/// fits the log-log convergence slope of the endpoint error against dt, and
/// runs one unmonitored Bohmian trajectory of width `unmonitored_sigma` for
/// contrast.
pub fn zeno_convergence_sweep(
    potential: &PotentialModel,
    s0: &PhaseSpacePoint,
    template: &MonitoringSchedule,
    n_list: &[usize],
    unmonitored_sigma: f64,
    numerics: &ZenoNumerics,
) -> Result<SweepSummary> {
    if n_list.len() < 3 {
        return Err(SimError::InvalidArgument(
            "sweep needs at least 3 interval counts".to_string(),
        ));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::InvalidArgument(
            "interval counts must be strictly increasing".to_string(),
        ));
    }

    let rows: Vec<SweepRow> = n_list
        .par_iter()
        .map(|&n| {
            let schedule = MonitoringSchedule {
                intervals: n,
                ..template.clone()
            };
            let run = monitored_run(potential, s0, &schedule, numerics)?;
            let mean = run
                .interval_stats
                .iter()
                .map(|s| s.mean_abs_q)
                .sum::<f64>()
                / run.interval_stats.len() as f64;
            let max = run
                .interval_stats
                .iter()
                .fold(0.0f64, |m, s| m.max(s.max_abs_q));
            Ok(SweepRow {
                intervals: n,
                dt: schedule.dt(),
                endpoint_error: run.endpoint_error,
                momentum_error: run.momentum_error,
                mean_abs_q: mean,
                max_abs_q: max,
            })
        })
        .collect::<Result<_>>()?;

    let log_dt: Vec<f64> = rows.iter().map(|r| r.dt.max(1e-300).ln()).collect();
    let log_err: Vec<f64> = rows
        .iter()
        .map(|r| r.endpoint_error.max(1e-300).ln())
        .collect();
    let slope = fit_slope(&log_dt, &log_err);
    let monotone_violations = rows
        .windows(2)
        .filter(|w| w[1].endpoint_error >= w[0].endpoint_error)
        .count();

    let contrast = unmonitored_run(potential, s0, unmonitored_sigma, template, numerics)?;
    let reference = classical_endpoint(
        potential,
        s0,
        numerics.params.mass,
        template.t0,
        template.t1,
        ((numerics.classical_steps_per_unit_time as f64 * (template.t1 - template.t0)).ceil()
            as usize)
            .max(1),
    )?;
    let unmonitored_error = contrast
        .last_state()
        .expect("non-empty")
        .position_distance(&reference)?;

    Ok(SweepSummary {
        rows,
        slope,
        unmonitored_error,
        unmonitored_sigma,
        monotone_violations,
    })
}
