//! The reference classical Hamiltonian flow: velocity-Verlet integration for
//! general potentials and the exact matrix-exponential flow for quadratic
//! ones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SimError};
use crate::potential::PotentialModel;
use crate::types::{PhaseSpacePoint, Trajectory};

const SYMPLECTIC_TOL: f64 = 1e-10;

/// A 2n x 2n linear phase-space map, checked symplectic on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMatrix {
    entries: DMatrix<f64>,
}

impl FlowMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let r = symplectic_residual(&entries)?;
        if r > SYMPLECTIC_TOL {
            return Err(SimError::InvalidArgument(format!(
                "matrix is not symplectic (residual {r:.3e})"
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dof(&self) -> usize {
        self.entries.nrows() / 2
    }

    /// Applies the linear flow to a phase-space point.
    pub fn apply(&self, s: &PhaseSpacePoint) -> Result<PhaseSpacePoint> {
        let n = self.dof();
        if s.dim() != n {
            return Err(SimError::DimensionMismatch {
                expected: n,
                got: s.dim(),
            });
        }
        let mut z = DVector::zeros(2 * n);
        z.rows_mut(0, n).copy_from_slice(&s.position);
        z.rows_mut(n, n).copy_from_slice(&s.momentum);
        let w = &self.entries * z;
        PhaseSpacePoint::new(
            w.as_slice()[..n].to_vec(),
            w.as_slice()[n..].to_vec(),
        )
    }

    /// Matrix product of two flows (composition, later flow on the left).
    pub fn compose(&self, earlier: &FlowMatrix) -> Result<Self> {
        if self.entries.nrows() != earlier.entries.nrows() {
            return Err(SimError::GridMismatch(format!(
                "flow sizes {} vs {}",
                self.entries.nrows(),
                earlier.entries.nrows()
            )));
        }
        Self::new(&self.entries * &earlier.entries)
    }
}

/// Max-norm residual of J^T Omega J - Omega with Omega the standard
/// symplectic form.
pub fn symplectic_residual(j: &DMatrix<f64>) -> Result<f64> {
    let dim = j.nrows();
    if j.ncols() != dim || !dim.is_multiple_of(2) || dim == 0 {
        return Err(SimError::InvalidArgument(format!(
            "symplectic residual needs a square even-dimension matrix, got {}x{}",
            j.nrows(),
            j.ncols()
        )));
    }
    let n = dim / 2;
    let mut omega = DMatrix::zeros(dim, dim);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    let residual = j.transpose() * &omega * j - omega;
    Ok(residual.amax())
}

/// The linear Hamiltonian generator X = [[0, I/m], [-M, 0]] for
/// V = 1/2 M x . x.
pub fn quadratic_generator(matrix: &DMatrix<f64>, mass: f64) -> DMatrix<f64> {
    let n = matrix.nrows();
    let mut x = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        x[(i, n + i)] = 1.0 / mass;
    }
    for i in 0..n {
        for j in 0..n {
            x[(n + i, j)] = -matrix[(i, j)];
        }
    }
    x
}

/// Exact classical flow e^{tX} for the quadratic potential 1/2 M x . x,
/// by scaling-and-squaring matrix exponential.
pub fn quadratic_flow_matrix(matrix: &DMatrix<f64>, mass: f64, t: f64) -> Result<FlowMatrix> {
    if matrix.nrows() != matrix.ncols() {
        return Err(SimError::InvalidArgument(
            "quadratic flow needs a square matrix".to_string(),
        ));
    }
    let x = quadratic_generator(matrix, mass) * t;
    FlowMatrix::new(x.exp())
}

/// Total energy H = p^2/2m + V(x).
pub fn hamiltonian(potential: &PotentialModel, s: &PhaseSpacePoint, mass: f64) -> Result<f64> {
    let kinetic: f64 = s.momentum.iter().map(|p| p * p).sum::<f64>() / (2.0 * mass);
    Ok(kinetic + potential.value(&s.position)?)
}

/// One velocity-Verlet step of size `dt`.
pub fn verlet_step(
    potential: &PotentialModel,
    s: &PhaseSpacePoint,
    mass: f64,
    dt: f64,
) -> Result<PhaseSpacePoint> {
    let n = s.dim();
    let grad = potential.gradient(&s.position)?;
    let p_half: Vec<f64> = (0..n).map(|i| s.momentum[i] - 0.5 * dt * grad[i]).collect();
    let x_new: Vec<f64> = (0..n)
        .map(|i| s.position[i] + dt * p_half[i] / mass)
        .collect();
    let grad_new = potential.gradient(&x_new)?;
    let p_new: Vec<f64> = (0..n).map(|i| p_half[i] - 0.5 * dt * grad_new[i]).collect();
    PhaseSpacePoint::new(x_new, p_new)
}

/// Velocity-Verlet (Stormer-Verlet) integration of the Hamilton equations
/// x' = p/m, p' = -grad V(x) from `t0` to `t1` in `steps` equal steps.
pub fn integrate_classical(
    potential: &PotentialModel,
    s0: &PhaseSpacePoint,
    mass: f64,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Trajectory> {
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
    let span = t1 - t0;
    let dt = span / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(t0);
    states.push(s0.clone());
    let mut s = s0.clone();
    for k in 1..=steps {
        s = verlet_step(potential, &s, mass, dt)?;
        times.push(t0 + span * k as f64 / steps as f64);
        states.push(s.clone());
    }
    Trajectory::new(times, states)
}

/// Endpoint of the classical flow, convenience wrapper over
/// `integrate_classical`.
pub fn classical_endpoint(
    potential: &PotentialModel,
    s0: &PhaseSpacePoint,
    mass: f64,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<PhaseSpacePoint> {
    Ok(integrate_classical(potential, s0, mass, t0, t1, steps)?
        .last_state()
        .expect("non-empty trajectory")
        .clone())
}

/// Finite-difference Jacobian of the (possibly nonlinear) time-`t` flow map,
/// used to check symplecticity of Verlet trajectories.
pub fn flow_jacobian_fd(
    potential: &PotentialModel,
    s0: &PhaseSpacePoint,
    mass: f64,
    t: f64,
    steps: usize,
    h: f64,
) -> Result<DMatrix<f64>> {
    let n = s0.dim();
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for col in 0..2 * n {
        let mut plus = s0.clone();
        let mut minus = s0.clone();
        if col < n {
            plus.position[col] += h;
            minus.position[col] -= h;
        } else {
            plus.momentum[col - n] += h;
            minus.momentum[col - n] -= h;
        }
        let fp = classical_endpoint(potential, &plus, mass, 0.0, t, steps)?;
        let fm = classical_endpoint(potential, &minus, mass, 0.0, t, steps)?;
        for row in 0..n {
            jac[(row, col)] = (fp.position[row] - fm.position[row]) / (2.0 * h);
            jac[(n + row, col)] = (fp.momentum[row] - fm.momentum[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}
