//! Bohmian trajectory integration: the guidance equation v = grad(S)/m, the
//! equivalent quantum-Hamilton form with the quantum potential as a force
//! term, and the short-time Euler step in which the quantum potential has
//! dropped out.

use crate::config::GridAxisSpec;
use crate::error::{Result, SimError};
use crate::potential::PotentialModel;
use crate::propagator::{SplitOperator, BOUNDARY_GUARD_CELLS, BOUNDARY_GUARD_MASS};
use crate::quantum::{neighbor, polar_decompose, quantum_potential, strides, GridWaveFunction};
use crate::types::{PhaseSpacePoint, Trajectory};

/// The guidance field sampled at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityFieldSample {
    pub position: Vec<f64>,
    /// grad(S)/m per axis.
    pub velocity: Vec<f64>,
    pub quantum_potential: f64,
    /// grad(Q) per axis; NaN components where the stencil touched nodes.
    pub q_gradient: Vec<f64>,
    /// False if the interpolation touched masked (node) grid points.
    pub valid: bool,
}

/// Node-sampled guidance data for one wavefunction snapshot: velocity,
/// quantum potential, and its gradient on the grid, with validity flags
/// where stencils touch masked nodes.
#[derive(Debug, Clone)]
pub struct VelocityField {
    axes: Vec<GridAxisSpec>,
    shape: Vec<usize>,
    /// velocity[axis][flat index]
    velocity: Vec<Vec<f64>>,
    q: Vec<f64>,
    q_gradient: Vec<Vec<f64>>,
    valid: Vec<bool>,
    pub time: f64,
}

impl VelocityField {
    pub fn from_wavefunction(psi: &GridWaveFunction, eps_rho: f64) -> Result<Self> {
        let polar = polar_decompose(psi, eps_rho)?;
        let q = quantum_potential(&polar)?;
        let shape = psi.shape();
        let n = psi.len();
        let ndim = psi.axes.len();
        let mass = psi.params.mass;

        let mut valid = vec![true; n];
        for i in 0..n {
            if polar.node_mask[i] {
                valid[i] = false;
                continue;
            }
            for a in 0..ndim {
                if polar.node_mask[neighbor(i, a, 1, &shape)]
                    || polar.node_mask[neighbor(i, a, -1, &shape)]
                {
                    valid[i] = false;
                }
            }
        }

        let mut velocity = vec![vec![f64::NAN; n]; ndim];
        for (a, axis) in psi.axes.iter().enumerate() {
            let dx = axis.spacing();
            for i in 0..n {
                if !valid[i] {
                    continue;
                }
                let ds = (polar.action[neighbor(i, a, 1, &shape)]
                    - polar.action[neighbor(i, a, -1, &shape)])
                    / (2.0 * dx);
                velocity[a][i] = ds / mass;
            }
        }

        let mut q_gradient = vec![vec![f64::NAN; n]; ndim];
        for (a, axis) in psi.axes.iter().enumerate() {
            let dx = axis.spacing();
            for i in 0..n {
                let (qp, qm) = (q[neighbor(i, a, 1, &shape)], q[neighbor(i, a, -1, &shape)]);
                if qp.is_nan() || qm.is_nan() {
                    continue;
                }
                q_gradient[a][i] = (qp - qm) / (2.0 * dx);
            }
        }

        Ok(Self {
            axes: psi.axes.clone(),
            shape,
            velocity,
            q,
            q_gradient,
            valid,
            time: psi.time,
        })
    }

    /// Multilinear interpolation of the node data to `x`.
    pub fn sample(&self, x: &[f64]) -> Result<VelocityFieldSample> {
        let ndim = self.axes.len();
        if x.len() != ndim {
            return Err(SimError::DimensionMismatch {
                expected: ndim,
                got: x.len(),
            });
        }
        let st = strides(&self.shape);
        let mut base = vec![0usize; ndim];
        let mut frac = vec![0.0; ndim];
        for (a, axis) in self.axes.iter().enumerate() {
            if !(x[a] >= axis.lower && x[a] <= axis.upper) {
                return Err(SimError::InvalidArgument(format!(
                    "sample point {} outside axis {a} bounds [{}, {}]",
                    x[a], axis.lower, axis.upper
                )));
            }
            let t = ((x[a] - axis.lower) / axis.spacing()).min(self.shape[a] as f64 - 1.0 - 1e-12);
            let i0 = (t.floor() as usize).min(self.shape[a] - 2);
            base[a] = i0;
            frac[a] = t - i0 as f64;
        }

        // the 2^ndim cell corners with their interpolation weights
        let mut corners = vec![(0usize, 1.0f64)];
        for a in 0..ndim {
            let mut next = Vec::with_capacity(corners.len() * 2);
            for &(idx, w) in &corners {
                next.push((idx + base[a] * st[a], w * (1.0 - frac[a])));
                next.push((idx + (base[a] + 1) * st[a], w * frac[a]));
            }
            corners = next;
        }

        let ok = corners.iter().all(|&(i, _)| self.valid[i]);
        if !ok {
            return Ok(VelocityFieldSample {
                position: x.to_vec(),
                velocity: vec![f64::NAN; ndim],
                quantum_potential: f64::NAN,
                q_gradient: vec![f64::NAN; ndim],
                valid: false,
            });
        }
        let mut velocity = vec![0.0; ndim];
        let mut qv = 0.0;
        let mut qg = vec![0.0; ndim];
        for &(i, w) in &corners {
            qv += w * self.q[i];
            for a in 0..ndim {
                velocity[a] += w * self.velocity[a][i];
                qg[a] += w * self.q_gradient[a][i];
            }
        }
        Ok(VelocityFieldSample {
            position: x.to_vec(),
            velocity,
            quantum_potential: qv,
            q_gradient: qg,
            valid: true,
        })
    }
}

/// The guidance field of `psi` at one point: build the node field and sample.
pub fn bohm_velocity(psi: &GridWaveFunction, x: &[f64], eps_rho: f64) -> Result<VelocityFieldSample> {
    VelocityField::from_wavefunction(psi, eps_rho)?.sample(x)
}

/// Gauge-free velocity hbar arg(psi_{i+1} conj(psi_{i-1})) / (2 dx m) at
/// every grid node, per axis: the phase gradient read off locally, with no
/// global unwrapping. Invariant under global phase and amplitude rescaling;
/// cross-check oracle for the unwrapped grad(S)/m route. NaN where either
/// stencil amplitude vanishes.
pub fn probability_current_velocity(psi: &GridWaveFunction) -> Vec<Vec<f64>> {
    let shape = psi.shape();
    let n = psi.len();
    let ndim = psi.axes.len();
    let mut v = vec![vec![f64::NAN; n]; ndim];
    for (a, axis) in psi.axes.iter().enumerate() {
        let dx = axis.spacing();
        for i in 0..n {
            let plus = psi.amplitudes[neighbor(i, a, 1, &shape)];
            let minus = psi.amplitudes[neighbor(i, a, -1, &shape)];
            if plus.norm_sqr() == 0.0 || minus.norm_sqr() == 0.0 {
                continue;
            }
            v[a][i] =
                psi.params.hbar * (plus * minus.conj()).arg() / (2.0 * dx * psi.params.mass);
        }
    }
    v
}

/// Classic RK4 over a frozen (time-independent) right-hand side.
fn rk4_frozen<F>(y: &[f64], h: f64, f: &F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(y)?;
    let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
    let k2 = f(&y2)?;
    let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
    let k3 = f(&y3)?;
    let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
    let k4 = f(&y4)?;
    Ok(y
        .iter()
        .enumerate()
        .map(|(i, a)| a + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn guard_boundary(psi: &GridWaveFunction) -> Result<()> {
    let mass = psi.boundary_mass(BOUNDARY_GUARD_CELLS);
    if mass > BOUNDARY_GUARD_MASS {
        return Err(SimError::BoundaryContamination {
            mass,
            threshold: BOUNDARY_GUARD_MASS,
            t: psi.time,
        });
    }
    Ok(())
}

/// Co-integrates the wavefunction (split-operator, `prop_steps` over
/// [t0, t1]) and the particle (RK4 on the field frozen per propagation step,
/// `ode_substeps` RK4 steps each). Records the quantum potential along the
/// path; momentum entries are m times the sampled guidance velocity.
pub fn integrate_bohm(
    potential: &PotentialModel,
    psi0: &GridWaveFunction,
    x0: &[f64],
    t0: f64,
    t1: f64,
    prop_steps: usize,
    ode_substeps: usize,
    eps_rho: f64,
) -> Result<Trajectory> {
    if prop_steps < 1 || ode_substeps < 1 {
        return Err(SimError::InvalidArgument(
            "prop_steps and ode_substeps must be at least 1".to_string(),
        ));
    }
    if !(t1 > t0) {
        return Err(SimError::InvalidArgument(format!(
            "t1 = {t1} must be greater than t0 = {t0}"
        )));
    }
    let op = SplitOperator::new(potential, &psi0.axes, &psi0.params)?;
    let mut psi = psi0.clone();
    psi.time = t0;
    let mut field = VelocityField::from_wavefunction(&psi, eps_rho)?;

    let s0 = field.sample(x0)?;
    if !s0.valid {
        return Err(SimError::NodeCollision {
            t: t0,
            last_valid: t0,
        });
    }
    let mass = psi.params.mass;
    let mut x = x0.to_vec();
    let mut times = vec![t0];
    let mut states = vec![PhaseSpacePoint::new(
        x.clone(),
        s0.velocity.iter().map(|v| v * mass).collect(),
    )?];
    let mut qs = vec![s0.quantum_potential];

    let span = t1 - t0;
    for k in 1..=prop_steps {
        let t_next = t0 + span * k as f64 / prop_steps as f64;
        let dt = t_next - psi.time;
        let last_valid = *times.last().expect("non-empty");
        // freeze the guidance field at the interval midpoint: the particle
        // step is then second-order accurate in dt
        op.step(&mut psi, dt / 2.0);
        field = VelocityField::from_wavefunction(&psi, eps_rho)?;
        let rhs = |y: &[f64]| -> Result<Vec<f64>> {
            let s = field.sample(y)?;
            if !s.valid {
                return Err(SimError::NodeCollision {
                    t: t_next,
                    last_valid,
                });
            }
            Ok(s.velocity)
        };
        let h = dt / ode_substeps as f64;
        for _ in 0..ode_substeps {
            x = rk4_frozen(&x, h, &rhs)?;
        }
        op.step(&mut psi, dt / 2.0);
        psi.time = t_next;
        guard_boundary(&psi)?;
        field = VelocityField::from_wavefunction(&psi, eps_rho)?;
        let s = field.sample(&x)?;
        if !s.valid {
            return Err(SimError::NodeCollision {
                t: t_next,
                last_valid,
            });
        }
        times.push(t_next);
        states.push(PhaseSpacePoint::new(
            x.clone(),
            s.velocity.iter().map(|v| v * mass).collect(),
        )?);
        qs.push(s.quantum_potential);
    }
    Trajectory::with_quantum_potential(times, states, Some(qs))
}

/// Integrates the quantum Hamilton equations dx/dt = p/m,
/// dp/dt = -grad V - grad Q, with Q from the co-propagated wavefunction.
/// The initial momentum is m times the guidance velocity at `x0`, so the two
/// formulations describe the same trajectory.
pub fn integrate_quantum_hamilton(
    potential: &PotentialModel,
    psi0: &GridWaveFunction,
    x0: &[f64],
    t0: f64,
    t1: f64,
    prop_steps: usize,
    ode_substeps: usize,
    eps_rho: f64,
) -> Result<Trajectory> {
    if prop_steps < 1 || ode_substeps < 1 {
        return Err(SimError::InvalidArgument(
            "prop_steps and ode_substeps must be at least 1".to_string(),
        ));
    }
    if !(t1 > t0) {
        return Err(SimError::InvalidArgument(format!(
            "t1 = {t1} must be greater than t0 = {t0}"
        )));
    }
    let ndim = psi0.axes.len();
    let op = SplitOperator::new(potential, &psi0.axes, &psi0.params)?;
    let mut psi = psi0.clone();
    psi.time = t0;
    let mut field = VelocityField::from_wavefunction(&psi, eps_rho)?;

    let s0 = field.sample(x0)?;
    if !s0.valid {
        return Err(SimError::NodeCollision {
            t: t0,
            last_valid: t0,
        });
    }
    let mass = psi.params.mass;
    // state vector y = (x, p)
    let mut y: Vec<f64> = x0
        .iter()
        .copied()
        .chain(s0.velocity.iter().map(|v| v * mass))
        .collect();
    let mut times = vec![t0];
    let mut states = vec![PhaseSpacePoint::new(
        y[..ndim].to_vec(),
        y[ndim..].to_vec(),
    )?];
    let mut qs = vec![s0.quantum_potential];

    let span = t1 - t0;
    for k in 1..=prop_steps {
        let t_next = t0 + span * k as f64 / prop_steps as f64;
        let dt = t_next - psi.time;
        let last_valid = *times.last().expect("non-empty");
        // midpoint-frozen field, as in the guidance-form integrator
        op.step(&mut psi, dt / 2.0);
        field = VelocityField::from_wavefunction(&psi, eps_rho)?;
        let rhs = |y: &[f64]| -> Result<Vec<f64>> {
            let (x, p) = y.split_at(ndim);
            let s = field.sample(x)?;
            if !s.valid || s.q_gradient.iter().any(|g| g.is_nan()) {
                return Err(SimError::NodeCollision {
                    t: t_next,
                    last_valid,
                });
            }
            let grad_v = potential.gradient(x)?;
            let mut dy = Vec::with_capacity(2 * ndim);
            dy.extend(p.iter().map(|pi| pi / mass));
            dy.extend(
                grad_v
                    .iter()
                    .zip(&s.q_gradient)
                    .map(|(gv, gq)| -gv - gq),
            );
            Ok(dy)
        };
        let h = dt / ode_substeps as f64;
        for _ in 0..ode_substeps {
            y = rk4_frozen(&y, h, &rhs)?;
        }
        op.step(&mut psi, dt / 2.0);
        psi.time = t_next;
        guard_boundary(&psi)?;
        field = VelocityField::from_wavefunction(&psi, eps_rho)?;
        let s = field.sample(&y[..ndim])?;
        if !s.valid {
            return Err(SimError::NodeCollision {
                t: t_next,
                last_valid,
            });
        }
        times.push(t_next);
        states.push(PhaseSpacePoint::new(
            y[..ndim].to_vec(),
            y[ndim..].to_vec(),
        )?);
        qs.push(s.quantum_potential);
    }
    Trajectory::with_quantum_potential(times, states, Some(qs))
}

/// Short-time asymptotic guidance velocity
/// (x - x0)/dt - grad V(x0) dt / (2m), the O(dt^2) term dropped.
pub fn short_time_velocity(
    x: &[f64],
    x0: &[f64],
    dt: f64,
    potential: &PotentialModel,
    mass: f64,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "dt must be positive (got {dt})"
        )));
    }
    if x.len() != x0.len() {
        return Err(SimError::DimensionMismatch {
            expected: x0.len(),
            got: x.len(),
        });
    }
    let grad = potential.gradient(x0)?;
    Ok(x.iter()
        .zip(x0)
        .zip(&grad)
        .map(|((a, b), g)| (a - b) / dt - g * dt / (2.0 * mass))
        .collect())
}

/// One explicit Euler step of the short-time trajectory map:
/// (x, p) -> (x + p dt/m, p - grad V(x) dt). No quantum potential appears.
pub fn euler_g_step(
    s: &PhaseSpacePoint,
    dt: f64,
    potential: &PotentialModel,
    mass: f64,
) -> Result<PhaseSpacePoint> {
    let grad = potential.gradient(&s.position)?;
    PhaseSpacePoint::new(
        s.position
            .iter()
            .zip(&s.momentum)
            .map(|(x, p)| x + p * dt / mass)
            .collect(),
        s.momentum
            .iter()
            .zip(&grad)
            .map(|(p, g)| p - g * dt)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::quantum::{gaussian_packet, DEFAULT_EPS_RHO};
    use crate::types::PhysicalParams;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn axes_1d(points: usize) -> Vec<GridAxisSpec> {
        vec![GridAxisSpec::new(-20.0, 20.0, points)]
    }

    #[test]
    fn plane_wave_velocity_constant() {
        let psi = GridWaveFunction::from_fn(
            PhysicalParams::natural(1),
            axes_1d(512),
            0.0,
            |x| Complex64::from_polar(1.0, 3.0 * x[0]),
        )
        .unwrap();
        for &x in &[-5.0, 0.0, 2.7, 11.3] {
            let s = bohm_velocity(&psi, &[x], DEFAULT_EPS_RHO).unwrap();
            assert!(s.valid);
            assert_abs_diff_eq!(s.velocity[0], 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn resting_gaussian_velocity_zero() {
        let psi = gaussian_packet(
            &[0.0],
            &[0.0],
            1.0,
            axes_1d(1024),
            PhysicalParams::natural(1),
            0.0,
        )
        .unwrap();
        for &x in &[-2.0, 0.0, 1.3] {
            let s = bohm_velocity(&psi, &[x], DEFAULT_EPS_RHO).unwrap();
            assert!(s.valid);
            assert_abs_diff_eq!(s.velocity[0], 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn free_gaussian_velocity_closed_form() {
        // v(x, t) = x (t/4) / (1 + t^2/4) for sigma = hbar = m = 1, x0 = p0 = 0;
        // at t = 2, x = sqrt(2) this is sqrt(2)/4
        let params = PhysicalParams::natural(1);
        let t = 2.0;
        let psi = GridWaveFunction::from_fn_raw(params, axes_1d(1024), t, |x| {
            analytic::free_gaussian(x[0], t, 0.0, 0.0, 1.0, &params)
        })
        .unwrap();
        let x = 2f64.sqrt();
        let s = bohm_velocity(&psi, &[x], DEFAULT_EPS_RHO).unwrap();
        assert!(s.valid);
        assert_abs_diff_eq!(s.velocity[0], 2f64.sqrt() / 4.0, epsilon = 1e-8);
        assert_abs_diff_eq!(
            s.velocity[0],
            analytic::free_gaussian_bohm_velocity(x, t, 0.0, 0.0, 1.0, &params),
            epsilon = 1e-8
        );
    }

    #[test]
    fn unwrapped_gradient_matches_gauge_free_velocity() {
        let params = PhysicalParams::natural(1);
        let t = 0.8;
        let psi = GridWaveFunction::from_fn_raw(params, axes_1d(1024), t, |x| {
            analytic::free_gaussian(x[0], t, 0.5, 2.0, 1.0, &params)
        })
        .unwrap();
        let field = VelocityField::from_wavefunction(&psi, DEFAULT_EPS_RHO).unwrap();
        let current = probability_current_velocity(&psi);
        for i in 0..psi.len() {
            let x = psi.point(i)[0];
            // packet center is at x0 + p0 t = 2.1; stay clear of masked tails
            if (x - 2.1).abs() > 5.0 {
                continue;
            }
            let s = field.sample(&[x]).unwrap();
            assert!(s.valid);
            assert_abs_diff_eq!(s.velocity[0], current[0][i], epsilon = 1e-8);
        }
    }

    #[test]
    fn velocity_invariant_under_phase_and_scale() {
        let params = PhysicalParams::natural(1);
        let base = gaussian_packet(&[0.5], &[1.5], 0.8, axes_1d(1024), params, 0.0).unwrap();
        let mut scaled = base.clone();
        let factor = Complex64::from_polar(3.0, 2.1);
        for c in &mut scaled.amplitudes {
            *c *= factor;
        }
        for &x in &[-1.0, 0.5, 2.0] {
            let a = bohm_velocity(&base, &[x], DEFAULT_EPS_RHO).unwrap();
            let b = bohm_velocity(&scaled, &[x], DEFAULT_EPS_RHO).unwrap();
            assert_abs_diff_eq!(a.velocity[0], b.velocity[0], epsilon = 1e-10);
        }
    }

    #[test]
    fn centered_particle_stays_at_rest() {
        let params = PhysicalParams::natural(1);
        let psi0 = gaussian_packet(&[0.0], &[0.0], 1.0, axes_1d(1024), params, 0.0).unwrap();
        let traj = integrate_bohm(
            &PotentialModel::zero(1),
            &psi0,
            &[0.0],
            0.0,
            1.0,
            100,
            4,
            DEFAULT_EPS_RHO,
        )
        .unwrap();
        for s in traj.states() {
            assert_abs_diff_eq!(s.position[0], 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn free_gaussian_trajectory_endpoint() {
        // x(t) = x0 sqrt(1 + t^2/4): the packet dilation carries the particle
        let params = PhysicalParams::natural(1);
        let psi0 = gaussian_packet(&[0.0], &[0.0], 1.0, axes_1d(1024), params, 0.0).unwrap();
        let traj = integrate_bohm(
            &PotentialModel::zero(1),
            &psi0,
            &[1.0],
            0.0,
            2.0,
            400,
            4,
            DEFAULT_EPS_RHO,
        )
        .unwrap();
        let end = traj.last_state().unwrap().position[0];
        assert!(
            (end - 2f64.sqrt()).abs() < 1e-3,
            "endpoint {end} vs sqrt(2)"
        );
    }

    #[test]
    fn coherent_state_center_rides_classically() {
        let params = PhysicalParams::natural(1);
        let sigma = (0.5f64).sqrt();
        let psi0 = gaussian_packet(&[1.0], &[0.0], sigma, axes_1d(1024), params, 0.0).unwrap();
        let traj = integrate_bohm(
            &PotentialModel::harmonic(1.0, 1.0),
            &psi0,
            &[1.0],
            0.0,
            2.0,
            2000,
            4,
            DEFAULT_EPS_RHO,
        )
        .unwrap();
        for (t, s) in traj.times().iter().zip(traj.states()) {
            assert_abs_diff_eq!(s.position[0], t.cos(), epsilon = 1e-4);
        }
    }

    #[test]
    fn quantum_hamilton_matches_guidance() {
        // the two formulations integrate the same trajectory
        let params = PhysicalParams::natural(1);
        let psi0 = gaussian_packet(&[0.0], &[0.0], 1.0, axes_1d(1024), params, 0.0).unwrap();
        let v = PotentialModel::zero(1);
        let a = integrate_bohm(&v, &psi0, &[1.0], 0.0, 2.0, 400, 4, DEFAULT_EPS_RHO).unwrap();
        let b = integrate_quantum_hamilton(&v, &psi0, &[1.0], 0.0, 2.0, 400, 4, DEFAULT_EPS_RHO)
            .unwrap();
        let mut max_dev: f64 = 0.0;
        for (sa, sb) in a.states().iter().zip(b.states()) {
            max_dev = max_dev.max((sa.position[0] - sb.position[0]).abs());
        }
        assert!(max_dev < 1e-3, "max deviation {max_dev}");
    }

    #[test]
    fn quantum_hamilton_coherent_momentum() {
        let params = PhysicalParams::natural(1);
        let sigma = (0.5f64).sqrt();
        let psi0 = gaussian_packet(&[1.0], &[0.0], sigma, axes_1d(1024), params, 0.0).unwrap();
        let traj = integrate_quantum_hamilton(
            &PotentialModel::harmonic(1.0, 1.0),
            &psi0,
            &[1.0],
            0.0,
            2.0,
            2000,
            4,
            DEFAULT_EPS_RHO,
        )
        .unwrap();
        for (t, s) in traj.times().iter().zip(traj.states()) {
            assert_abs_diff_eq!(s.momentum[0], -t.sin(), epsilon = 1e-4);
        }
    }

    #[test]
    fn frozen_field_refinement_converges() {
        let params = PhysicalParams::natural(1);
        let psi0 = gaussian_packet(&[0.0], &[0.0], 1.0, axes_1d(512), params, 0.0).unwrap();
        let v = PotentialModel::zero(1);
        let end = |steps: usize| {
            integrate_bohm(&v, &psi0, &[1.0], 0.0, 1.0, steps, 4, DEFAULT_EPS_RHO)
                .unwrap()
                .last_state()
                .unwrap()
                .position[0]
        };
        let reference = end(1600);
        let e1 = (end(50) - reference).abs();
        let e2 = (end(100) - reference).abs();
        assert!(e2 < e1, "refinement did not reduce error: {e1} -> {e2}");
        let order = (e1 / e2).log2();
        assert!(order >= 0.8, "observed order {order}");
    }

    #[test]
    fn short_time_velocity_examples() {
        let free = PotentialModel::zero(1);
        let v = short_time_velocity(&[1.0], &[0.0], 0.1, &free, 1.0).unwrap();
        assert_abs_diff_eq!(v[0], 10.0, epsilon = 1e-12);
        let harm = PotentialModel::harmonic(1.0, 1.0);
        let v = short_time_velocity(&[1.1], &[1.0], 0.1, &harm, 1.0).unwrap();
        assert_abs_diff_eq!(v[0], 0.95, epsilon = 1e-12);
        assert!(short_time_velocity(&[1.0], &[0.0], 0.0, &free, 1.0).is_err());
    }

    #[test]
    fn euler_g_step_examples() {
        let harm = PotentialModel::harmonic(1.0, 1.0);
        let s = euler_g_step(&PhaseSpacePoint::new_1d(1.0, 0.0), 0.1, &harm, 1.0).unwrap();
        assert_abs_diff_eq!(s.position[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.momentum[0], -0.1, epsilon = 1e-15);
        // free: exact straight-line flow in one step
        let free = PotentialModel::zero(1);
        let s = euler_g_step(&PhaseSpacePoint::new_1d(0.0, 2.0), 1.5, &free, 1.0).unwrap();
        assert_abs_diff_eq!(s.position[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.momentum[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn masked_region_reports_invalid_sample() {
        let params = PhysicalParams::natural(1);
        let psi = gaussian_packet(&[0.0], &[0.0], 0.5, axes_1d(1024), params, 0.0).unwrap();
        // 19 sigma into the tail: below the density floor
        let s = bohm_velocity(&psi, &[9.5], DEFAULT_EPS_RHO).unwrap();
        assert!(!s.valid);
    }
}
