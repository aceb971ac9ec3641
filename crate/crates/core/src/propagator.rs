//! Wavefunction evolution: the exact quadratic-potential propagator built
//! from Hamilton's two-point characteristic function, split-operator
//! propagation for general potentials, and the short-time action
//! approximation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::classical::quadratic_generator;
use crate::config::GridAxisSpec;
use crate::error::{Result, SimError};
use crate::fft;
use crate::potential::PotentialModel;
use crate::quantum::GridWaveFunction;
use crate::types::PhysicalParams;

const CAUSTIC_TOL: f64 = 1e-10;

/// The quadratic form W(x, x0) = 1/2 P x.x - L x.x0 + 1/2 B x0.x0 together
/// with the Maslov index and Van Vleck density of the exact quadratic
/// propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPropagatorData {
    pub p_mat: DMatrix<f64>,
    pub b_mat: DMatrix<f64>,
    pub l_mat: DMatrix<f64>,
    pub maslov: u32,
    /// det L.
    pub van_vleck: f64,
    pub t: f64,
    pub t0: f64,
}

impl QuadraticPropagatorData {
    pub fn dim(&self) -> usize {
        self.l_mat.nrows()
    }

    /// Hamilton's two-point characteristic function W(x, x0).
    pub fn w_value(&self, x: &[f64], x0: &[f64]) -> Result<f64> {
        let n = self.dim();
        if x.len() != n || x0.len() != n {
            return Err(SimError::DimensionMismatch {
                expected: n,
                got: x.len().min(x0.len()),
            });
        }
        let xv = nalgebra::DVector::from_column_slice(x);
        let x0v = nalgebra::DVector::from_column_slice(x0);
        Ok(0.5 * (&self.p_mat * &xv).dot(&xv) - (&self.l_mat * &xv).dot(&x0v)
            + 0.5 * (&self.b_mat * &x0v).dot(&x0v))
    }

    /// grad_x W = P x - L^T x0, the momentum at the endpoint.
    pub fn w_gradient_x(&self, x: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if x.len() != n || x0.len() != n {
            return Err(SimError::DimensionMismatch {
                expected: n,
                got: x.len().min(x0.len()),
            });
        }
        let xv = nalgebra::DVector::from_column_slice(x);
        let x0v = nalgebra::DVector::from_column_slice(x0);
        Ok((&self.p_mat * xv - self.l_mat.transpose() * x0v)
            .as_slice()
            .to_vec())
    }
}

fn flow_blocks(matrix: &DMatrix<f64>, mass: f64, dt: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    let f = (quadratic_generator(matrix, mass) * dt).exp();
    (
        f.view((0, 0), (n, n)).into_owned(),
        f.view((0, n), (n, n)).into_owned(),
        f.view((n, 0), (n, n)).into_owned(),
        f.view((n, n), (n, n)).into_owned(),
    )
}

/// Builds W for the quadratic potential 1/2 M x.x over [t0, t] from the
/// blocks of the exact flow e^{(t-t0)X}. Fails at caustics, where the
/// position-momentum block of the flow is singular.
pub fn hamilton_two_point(
    matrix: &DMatrix<f64>,
    mass: f64,
    t: f64,
    t0: f64,
) -> Result<QuadraticPropagatorData> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(SimError::InvalidArgument(
            "quadratic matrix must be square".to_string(),
        ));
    }
    let dt = t - t0;
    if dt == 0.0 {
        return Err(SimError::InvalidArgument(
            "two-point action requires t != t0".to_string(),
        ));
    }
    // 1D closed-form caustic test: sin(omega dt) = 0
    if n == 1 && matrix[(0, 0)] > 0.0 {
        let omega = (matrix[(0, 0)] / mass).sqrt();
        if (omega * dt).sin().abs() < CAUSTIC_TOL {
            return Err(SimError::Caustic { dt });
        }
    }
    let (a, bb, c, d) = flow_blocks(matrix, mass, dt);
    let scale = bb.amax().max(f64::MIN_POSITIVE);
    let det_bb = bb.determinant();
    if det_bb.abs() < CAUSTIC_TOL * scale.powi(n as i32) {
        return Err(SimError::Caustic { dt });
    }
    let l = bb
        .clone()
        .try_inverse()
        .ok_or(SimError::Caustic { dt })?;
    let b = &l * &a;
    let p = &d * &l;
    let b = (&b + b.transpose()) * 0.5;
    let p = (&p + p.transpose()) * 0.5;
    // consistency of the generating-function identity C = -L^T + P A
    debug_assert!((&p * &a - &l.transpose() - &c).amax() < 1e-8 * (1.0 + c.amax()));

    let maslov = maslov_index(matrix, mass, dt);
    let van_vleck = l.determinant();
    Ok(QuadraticPropagatorData {
        p_mat: p,
        b_mat: b,
        l_mat: l,
        maslov,
        van_vleck,
        t,
        t0,
    })
}

/// Number of caustics crossed in (t0, t): closed form for 1D, sign changes of
/// det of the position-momentum flow block along a fine time mesh otherwise.
fn maslov_index(matrix: &DMatrix<f64>, mass: f64, dt: f64) -> u32 {
    let n = matrix.nrows();
    if n == 1 {
        let m = matrix[(0, 0)];
        if m <= 0.0 {
            return 0;
        }
        let omega = (m / mass).sqrt();
        return (omega * dt.abs() / std::f64::consts::PI).floor() as u32;
    }
    let samples = 512;
    let mut crossings = 0;
    let mut prev_sign = 0i8;
    for k in 1..=samples {
        let s = dt * k as f64 / samples as f64;
        let (_, bb, _, _) = flow_blocks(matrix, mass, s);
        let det = bb.determinant();
        let sign = if det > 0.0 {
            1
        } else if det < 0.0 {
            -1
        } else {
            0
        };
        if prev_sign != 0 && sign != 0 && sign != prev_sign {
            crossings += 1;
        }
        if sign != 0 {
            prev_sign = sign;
        }
    }
    crossings
}

/// The exact quadratic propagator
/// G = (2 pi i hbar)^{-n/2} i^maslov sqrt(|det L|) e^{iW/hbar}.
pub fn quadratic_propagator_eval(
    data: &QuadraticPropagatorData,
    x: &[f64],
    x0: &[f64],
    params: &PhysicalParams,
) -> Result<Complex64> {
    let n = data.dim();
    let w = data.w_value(x, x0)?;
    let amp = (2.0 * std::f64::consts::PI * params.hbar).powf(-(n as f64) / 2.0)
        * data.van_vleck.abs().sqrt();
    // (1/i)^{n/2} = e^{-i pi n / 4}
    let phase = -std::f64::consts::FRAC_PI_4 * n as f64
        + std::f64::consts::FRAC_PI_2 * data.maslov as f64
        + w / params.hbar;
    Ok(Complex64::from_polar(amp, phase))
}

/// Samples the exact quadratic propagator kernel G(., x0) on a 1D grid as a
/// (normalized) wavefunction snapshot at time `t`.
pub fn kernel_state(
    matrix: &DMatrix<f64>,
    x0: &[f64],
    t: f64,
    t0: f64,
    axes: Vec<GridAxisSpec>,
    params: PhysicalParams,
) -> Result<GridWaveFunction> {
    let data = hamilton_two_point(matrix, params.mass, t, t0)?;
    let mut err = None;
    let psi = GridWaveFunction::from_fn(params, axes, t, |x| {
        match quadratic_propagator_eval(&data, x, x0, &params) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(psi),
    }
}

/// Applies the exact quadratic kernel as a dense integral operator to a 1D
/// wavefunction, advancing it by `dt`. O(N^2) in the grid size.
pub fn apply_kernel_1d(
    psi: &GridWaveFunction,
    matrix: &DMatrix<f64>,
    dt: f64,
) -> Result<GridWaveFunction> {
    if psi.axes.len() != 1 {
        return Err(SimError::InvalidArgument(
            "dense kernel application is 1D only".to_string(),
        ));
    }
    let data = hamilton_two_point(matrix, psi.params.mass, psi.time + dt, psi.time)?;
    let n = psi.len();
    let dx = psi.volume_element();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let xs: Vec<f64> = (0..n).map(|i| psi.point(i)[0]).collect();
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &amp) in psi.amplitudes.iter().enumerate() {
            let g = quadratic_propagator_eval(&data, &[xs[i]], &[xs[j]], &psi.params)?;
            acc += g * amp;
        }
        *o = acc * dx;
    }
    Ok(GridWaveFunction {
        params: psi.params,
        axes: psi.axes.clone(),
        amplitudes: out,
        time: psi.time + dt,
    })
}

/// Short-time action approximation
/// S = sum_j m (x_j - x0_j)^2 / (2 dt) - line_average(V)(x, x0) dt.
pub fn short_time_action(
    potential: &PotentialModel,
    x: &[f64],
    x0: &[f64],
    dt: f64,
    mass: f64,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "dt must be positive (got {dt})"
        )));
    }
    let kinetic: f64 = x
        .iter()
        .zip(x0)
        .map(|(a, b)| mass * (a - b) * (a - b) / (2.0 * dt))
        .sum();
    Ok(kinetic - potential.line_average(x, x0)? * dt)
}

/// Determinant of the mixed Hessian of the short-time action approximant:
/// det((m/dt) I - dt H) with H the mixed Hessian of the line-averaged
/// potential. Approaches (m/dt)^n as dt -> 0.
pub fn short_time_hessian_det(
    potential: &PotentialModel,
    x: &[f64],
    x0: &[f64],
    dt: f64,
    mass: f64,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "dt must be positive (got {dt})"
        )));
    }
    let n = potential.dim();
    let h = potential.line_average_mixed_hessian(x, x0)?;
    let m = DMatrix::<f64>::identity(n, n) * (mass / dt) - h * dt;
    Ok(m.determinant())
}

/// Strang split-operator stepper with cached potential samples and kinetic
/// wavenumbers for a fixed grid.
pub struct SplitOperator {
    shape: Vec<usize>,
    v_grid: Vec<f64>,
    ksq: Vec<f64>,
    hbar: f64,
    mass: f64,
}

impl SplitOperator {
    pub fn new(
        potential: &PotentialModel,
        axes: &[GridAxisSpec],
        params: &PhysicalParams,
    ) -> Result<Self> {
        if potential.dim() != axes.len() {
            return Err(SimError::DimensionMismatch {
                expected: potential.dim(),
                got: axes.len(),
            });
        }
        let shape: Vec<usize> = axes.iter().map(|a| a.points).collect();
        let len: usize = shape.iter().product();
        let st = crate::quantum::strides(&shape);
        let mut v_grid = Vec::with_capacity(len);
        let mut point = vec![0.0; axes.len()];
        for i in 0..len {
            for (a, axis) in axes.iter().enumerate() {
                point[a] = axis.lower + ((i / st[a]) % shape[a]) as f64 * axis.spacing();
            }
            v_grid.push(potential.value(&point)?);
        }
        let ks: Vec<Vec<f64>> = axes
            .iter()
            .map(|a| fft::wavenumbers(a.points, a.spacing()))
            .collect();
        let mut ksq = Vec::with_capacity(len);
        for i in 0..len {
            let mut s = 0.0;
            for a in 0..axes.len() {
                let k = ks[a][(i / st[a]) % shape[a]];
                s += k * k;
            }
            ksq.push(s);
        }
        Ok(Self {
            shape,
            v_grid,
            ksq,
            hbar: params.hbar,
            mass: params.mass,
        })
    }

    /// One Strang step: half potential kick, full kinetic drift in k-space,
    /// half potential kick. Unitary up to rounding.
    pub fn step(&self, psi: &mut GridWaveFunction, dt: f64) {
        let half = dt / (2.0 * self.hbar);
        for (c, &v) in psi.amplitudes.iter_mut().zip(&self.v_grid) {
            *c *= Complex64::from_polar(1.0, -v * half);
        }
        fft::fft_nd(&mut psi.amplitudes, &self.shape, false);
        let kin = self.hbar * dt / (2.0 * self.mass);
        for (c, &k2) in psi.amplitudes.iter_mut().zip(&self.ksq) {
            *c *= Complex64::from_polar(1.0, -k2 * kin);
        }
        fft::fft_nd(&mut psi.amplitudes, &self.shape, true);
        for (c, &v) in psi.amplitudes.iter_mut().zip(&self.v_grid) {
            *c *= Complex64::from_polar(1.0, -v * half);
        }
        psi.time += dt;
    }
}

/// One split-operator step as a standalone operation.
pub fn split_operator_step(
    psi: &GridWaveFunction,
    potential: &PotentialModel,
    dt: f64,
) -> Result<GridWaveFunction> {
    if !(dt > 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "dt must be positive (got {dt})"
        )));
    }
    let op = SplitOperator::new(potential, &psi.axes, &psi.params)?;
    let mut out = psi.clone();
    op.step(&mut out, dt);
    Ok(out)
}

/// Mass within this many grid points of the boundary triggers the
/// contamination error during propagation.
pub const BOUNDARY_GUARD_CELLS: usize = 5;
pub const BOUNDARY_GUARD_MASS: f64 = 1e-8;

/// Repeated split-operator stepping from `t0` to `t1`, with a per-step
/// callback and a boundary-contamination guard.
pub fn propagate_with<F>(
    psi0: &GridWaveFunction,
    potential: &PotentialModel,
    t0: f64,
    t1: f64,
    steps: usize,
    mut on_step: F,
) -> Result<GridWaveFunction>
where
    F: FnMut(&GridWaveFunction) -> Result<()>,
{
    if steps < 1 {
        return Err(SimError::InvalidArgument(
            "steps must be at least 1".to_string(),
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
    let span = t1 - t0;
    for k in 1..=steps {
        let target = t0 + span * k as f64 / steps as f64;
        let dt = target - psi.time;
        op.step(&mut psi, dt);
        psi.time = target;
        let mass = psi.boundary_mass(BOUNDARY_GUARD_CELLS);
        if mass > BOUNDARY_GUARD_MASS {
            return Err(SimError::BoundaryContamination {
                mass,
                threshold: BOUNDARY_GUARD_MASS,
                t: psi.time,
            });
        }
        on_step(&psi)?;
    }
    Ok(psi)
}

/// Propagation without a callback.
pub fn propagate(
    psi0: &GridWaveFunction,
    potential: &PotentialModel,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<GridWaveFunction> {
    propagate_with(psi0, potential, t0, t1, steps, |_| Ok(()))
}
