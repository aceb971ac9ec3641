//! Grid wavefunctions, the polar decomposition rho/S with phase unwrapping,
//! the quantum potential, and the continuity-equation residual.

use num_complex::Complex64;

use crate::config::GridAxisSpec;
use crate::error::{Result, SimError};
use crate::fft;
use crate::types::PhysicalParams;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Default density floor for node masking, relative to the maximum of rho.
pub const DEFAULT_EPS_RHO: f64 = 1e-12;

/// Complex amplitudes on a uniform periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWaveFunction {
    pub params: PhysicalParams,
    pub axes: Vec<GridAxisSpec>,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

pub(crate) fn grid_len(axes: &[GridAxisSpec]) -> usize {
    axes.iter().map(|a| a.points).product()
}

pub(crate) fn grid_shape(axes: &[GridAxisSpec]) -> Vec<usize> {
    axes.iter().map(|a| a.points).collect()
}

/// Row-major strides for a grid shape.
pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

/// Flat index of the periodic neighbor of `i` shifted by `delta` along `axis`.
pub(crate) fn neighbor(i: usize, axis: usize, delta: isize, shape: &[usize]) -> usize {
    let st = strides(shape);
    let n = shape[axis] as isize;
    let coord = ((i / st[axis]) % shape[axis]) as isize;
    let wrapped = (coord + delta).rem_euclid(n);
    (i as isize + (wrapped - coord) * st[axis] as isize) as usize
}

impl GridWaveFunction {
    fn check_axes(axes: &[GridAxisSpec]) -> Result<()> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(SimError::InvalidArgument(format!(
                "grids must have 1 or 2 axes, got {}",
                axes.len()
            )));
        }
        for (i, a) in axes.iter().enumerate() {
            if !a.points.is_power_of_two() {
                return Err(SimError::InvalidConfig(vec![format!(
                    "axis {i}: point count {} must be a power of two",
                    a.points
                )]));
            }
            if !(a.lower < a.upper) || !a.lower.is_finite() || !a.upper.is_finite() {
                return Err(SimError::InvalidConfig(vec![format!(
                    "axis {i}: bounds [{}, {}] invalid",
                    a.lower, a.upper
                )]));
            }
        }
        Ok(())
    }

    /// Builds a normalized wavefunction by sampling `f` on the grid.
    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(
        params: PhysicalParams,
        axes: Vec<GridAxisSpec>,
        time: f64,
        f: F,
    ) -> Result<Self> {
        let mut psi = Self::from_fn_raw(params, axes, time, f)?;
        psi.normalize()?;
        Ok(psi)
    }

    /// As `from_fn` but without normalization.
    pub fn from_fn_raw<F: FnMut(&[f64]) -> Complex64>(
        params: PhysicalParams,
        axes: Vec<GridAxisSpec>,
        time: f64,
        mut f: F,
    ) -> Result<Self> {
        Self::check_axes(&axes)?;
        if axes.len() != params.dimension {
            return Err(SimError::DimensionMismatch {
                expected: params.dimension,
                got: axes.len(),
            });
        }
        let shape = grid_shape(&axes);
        let st = strides(&shape);
        let len = grid_len(&axes);
        let mut amplitudes = Vec::with_capacity(len);
        let mut point = vec![0.0; axes.len()];
        for i in 0..len {
            for (a, axis) in axes.iter().enumerate() {
                let idx = (i / st[a]) % shape[a];
                point[a] = axis.lower + idx as f64 * axis.spacing();
            }
            amplitudes.push(f(&point));
        }
        Ok(Self {
            params,
            axes,
            amplitudes,
            time,
        })
    }

    pub fn shape(&self) -> Vec<usize> {
        grid_shape(&self.axes)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Product of the grid spacings.
    pub fn volume_element(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    /// Physical coordinates of flat index `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        let shape = self.shape();
        let st = strides(&shape);
        self.axes
            .iter()
            .enumerate()
            .map(|(a, axis)| axis.lower + ((i / st[a]) % shape[a]) as f64 * axis.spacing())
            .collect()
    }

    /// L2 norm under the rectangle rule.
    pub fn norm(&self) -> f64 {
        (self
            .amplitudes
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            * self.volume_element())
        .sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(SimError::AllMasked);
        }
        let inv = 1.0 / n;
        for c in &mut self.amplitudes {
            *c *= inv;
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.axes != other.axes {
            return Err(SimError::GridMismatch(
                "axes differ between wavefunctions".to_string(),
            ));
        }
        if self.params != other.params {
            return Err(SimError::GridMismatch(
                "physical parameters differ".to_string(),
            ));
        }
        Ok(())
    }

    /// Grid-quadrature mean position per axis.
    pub fn mean_position(&self) -> Vec<f64> {
        let dv = self.volume_element();
        let mut mean = vec![0.0; self.axes.len()];
        let mut total = 0.0;
        for i in 0..self.len() {
            let w = self.amplitudes[i].norm_sqr() * dv;
            total += w;
            for (a, x) in self.point(i).iter().enumerate() {
                mean[a] += w * x;
            }
        }
        for m in &mut mean {
            *m /= total;
        }
        mean
    }

    /// Spectral mean momentum per axis.
    pub fn mean_momentum(&self) -> Vec<f64> {
        let shape = self.shape();
        let st = strides(&shape);
        let mut hat = self.amplitudes.clone();
        fft::fft_nd(&mut hat, &shape, false);
        let ks: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|a| fft::wavenumbers(a.points, a.spacing()))
            .collect();
        let mut mean = vec![0.0; self.axes.len()];
        let mut total = 0.0;
        for (i, c) in hat.iter().enumerate() {
            let w = c.norm_sqr();
            total += w;
            for a in 0..self.axes.len() {
                let idx = (i / st[a]) % shape[a];
                mean[a] += w * self.params.hbar * ks[a][idx];
            }
        }
        for m in &mut mean {
            *m /= total;
        }
        mean
    }

    /// Probability mass within `cells` grid points of any boundary.
    pub fn boundary_mass(&self, cells: usize) -> f64 {
        let shape = self.shape();
        let st = strides(&shape);
        let dv = self.volume_element();
        let mut mass = 0.0;
        for i in 0..self.len() {
            let near = (0..self.axes.len()).any(|a| {
                let idx = (i / st[a]) % shape[a];
                idx < cells || idx + cells >= shape[a]
            });
            if near {
                mass += self.amplitudes[i].norm_sqr() * dv;
            }
        }
        mass
    }

    /// L2 distance to another wavefunction on the same grid.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        Ok((self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.volume_element())
        .sqrt())
    }
}

/// A normalized Gaussian packet centered at `x0` with mean momentum `p0` and
/// position width `sigma` (in rho the standard deviation is `sigma`).
pub fn gaussian_packet(
    x0: &[f64],
    p0: &[f64],
    sigma: f64,
    axes: Vec<GridAxisSpec>,
    params: PhysicalParams,
    time: f64,
) -> Result<GridWaveFunction> {
    if !(sigma > 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "sigma must be positive (got {sigma})"
        )));
    }
    if x0.len() != axes.len() || p0.len() != axes.len() {
        return Err(SimError::DimensionMismatch {
            expected: axes.len(),
            got: x0.len().min(p0.len()),
        });
    }
    // Estimated probability mass outside the domain; asymptotic erfc bound.
    let mut tail_mass = 0.0;
    let mut min_dist = f64::INFINITY;
    for (a, axis) in axes.iter().enumerate() {
        for d in [x0[a] - axis.lower, axis.upper - x0[a]] {
            min_dist = min_dist.min(d / sigma);
            if d > 0.0 {
                let z = d / (sigma * std::f64::consts::SQRT_2);
                tail_mass += 0.5 * (-z * z).exp() / (z * std::f64::consts::PI.sqrt()).max(1e-300);
            } else {
                tail_mass += 0.5;
            }
        }
    }
    if min_dist < 5.0 || tail_mass > 1e-10 {
        return Err(SimError::PacketNearBoundary { mass: tail_mass });
    }
    let hbar = params.hbar;
    GridWaveFunction::from_fn(params, axes, time, |x| {
        let r2: f64 = x
            .iter()
            .zip(x0)
            .map(|(xi, x0i)| (xi - x0i).powi(2))
            .sum();
        let phase: f64 = x.iter().zip(p0).map(|(xi, pi)| pi * xi).sum::<f64>() / hbar;
        Complex64::from_polar((-r2 / (4.0 * sigma * sigma)).exp(), phase)
    })
}

/// Density and unwrapped phase-action of a wavefunction, with nodes masked.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarField {
    pub params: PhysicalParams,
    pub axes: Vec<GridAxisSpec>,
    pub rho: Vec<f64>,
    /// S = hbar * unwrapped phase.
    pub action: Vec<f64>,
    pub node_mask: Vec<bool>,
    pub time: f64,
}

impl PolarField {
    pub fn shape(&self) -> Vec<usize> {
        grid_shape(&self.axes)
    }

    pub fn unmasked_count(&self) -> usize {
        self.node_mask.iter().filter(|m| !**m).count()
    }

    /// sqrt(rho) e^{iS/hbar}; inverse of the decomposition away from nodes.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        self.rho
            .iter()
            .zip(&self.action)
            .map(|(&r, &s)| Complex64::from_polar(r.sqrt(), s / self.params.hbar))
            .collect()
    }
}

fn wrap_to_pi(d: f64) -> f64 {
    d - TAU * (d / TAU).round()
}

/// Polar decomposition with phase unwrapping from the density maximum
/// outward, axis by axis. `eps_rho` is the node floor relative to max rho.
pub fn polar_decompose(psi: &GridWaveFunction, eps_rho: f64) -> Result<PolarField> {
    let rho: Vec<f64> = psi.amplitudes.iter().map(|c| c.norm_sqr()).collect();
    let (imax, &max_rho) = rho
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if !(max_rho > 0.0) {
        return Err(SimError::AllMasked);
    }
    let floor = eps_rho * max_rho;
    let node_mask: Vec<bool> = rho.iter().map(|&r| r < floor).collect();
    if node_mask.iter().all(|&m| m) {
        return Err(SimError::AllMasked);
    }
    let theta: Vec<f64> = psi.amplitudes.iter().map(|c| c.arg()).collect();
    let shape = psi.shape();
    let mut unwrapped = vec![0.0; theta.len()];

    match shape.as_slice() {
        [n] => {
            unwrap_line(&theta, &mut unwrapped, &(0..*n).collect::<Vec<_>>(), imax, true);
        }
        [n0, n1] => {
            let (r0, c0) = (imax / n1, imax % n1);
            // anchor row first, then every column outward from that row
            let row: Vec<usize> = (0..*n1).map(|c| r0 * n1 + c).collect();
            unwrap_line(&theta, &mut unwrapped, &row, c0, true);
            for c in 0..*n1 {
                let col: Vec<usize> = (0..*n0).map(|r| r * n1 + c).collect();
                unwrap_line(&theta, &mut unwrapped, &col, r0, false);
            }
        }
        other => {
            return Err(SimError::InvalidArgument(format!(
                "unsupported grid rank {}",
                other.len()
            )))
        }
    }

    let action: Vec<f64> = unwrapped.iter().map(|&t| t * psi.params.hbar).collect();
    Ok(PolarField {
        params: psi.params,
        axes: psi.axes.clone(),
        rho,
        action,
        node_mask,
        time: psi.time,
    })
}

/// Unwraps `theta` along the index line `line` outward from position
/// `anchor` (an index into `line`), writing into `out`. With `seed` the
/// anchor takes its raw phase; otherwise it keeps the value an earlier pass
/// left in `out`.
fn unwrap_line(theta: &[f64], out: &mut [f64], line: &[usize], anchor: usize, seed: bool) {
    if seed {
        out[line[anchor]] = theta[line[anchor]];
    }
    for w in anchor + 1..line.len() {
        let (prev, cur) = (line[w - 1], line[w]);
        out[cur] = out[prev] + wrap_to_pi(theta[cur] - theta[prev]);
    }
    for w in (0..anchor).rev() {
        let (next, cur) = (line[w + 1], line[w]);
        out[cur] = out[next] + wrap_to_pi(theta[cur] - theta[next]);
    }
}

/// Bohm's quantum potential Q = -(hbar^2 / 2m) Laplacian(sqrt rho) / sqrt rho
/// via second-order central differences. Masked points carry NaN.
pub fn quantum_potential(polar: &PolarField) -> Result<Vec<f64>> {
    let shape = polar.shape();
    check_support(polar, 5)?;
    let sqrt_rho: Vec<f64> = polar.rho.iter().map(|r| r.sqrt()).collect();
    let coef = -polar.params.hbar * polar.params.hbar / (2.0 * polar.params.mass);
    let mut q = vec![f64::NAN; sqrt_rho.len()];
    for i in 0..sqrt_rho.len() {
        if polar.node_mask[i] {
            continue;
        }
        let mut lap = 0.0;
        for (a, axis) in polar.axes.iter().enumerate() {
            let dx = axis.spacing();
            let left = sqrt_rho[neighbor(i, a, -1, &shape)];
            let right = sqrt_rho[neighbor(i, a, 1, &shape)];
            lap += (left - 2.0 * sqrt_rho[i] + right) / (dx * dx);
        }
        q[i] = coef * lap / sqrt_rho[i];
    }
    Ok(q)
}

/// Requires at least `needed` unmasked points along the grid line through the
/// density maximum on every axis.
fn check_support(polar: &PolarField, needed: usize) -> Result<()> {
    let shape = polar.shape();
    let st = strides(&shape);
    let imax = polar
        .rho
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    for a in 0..shape.len() {
        let base = imax - ((imax / st[a]) % shape[a]) * st[a];
        let count = (0..shape[a])
            .filter(|&k| !polar.node_mask[base + k * st[a]])
            .count();
        if count < needed {
            return Err(SimError::InsufficientSupport {
                axis: a,
                count,
                needed,
            });
        }
    }
    Ok(())
}

/// Residual of the continuity equation d rho/dt + div(rho grad S / m) = 0
/// between two snapshots separated by a small time `delta`: the time
/// derivative is a forward difference, the spatial terms are central
/// differences at the midpoint state. Returns the grid max over unmasked
/// points.
pub fn continuity_residual(psi_a: &GridWaveFunction, psi_b: &GridWaveFunction) -> Result<f64> {
    psi_a.same_grid(psi_b)?;
    let delta = psi_b.time - psi_a.time;
    if !(delta > 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "snapshots must be ordered in time (delta = {delta})"
        )));
    }
    let pa = polar_decompose(psi_a, DEFAULT_EPS_RHO)?;
    let pb = polar_decompose(psi_b, DEFAULT_EPS_RHO)?;
    let shape = pa.shape();
    let n = pa.rho.len();
    let mass = pa.params.mass;
    let rho_mid: Vec<f64> = (0..n).map(|i| 0.5 * (pa.rho[i] + pb.rho[i])).collect();
    let s_mid: Vec<f64> = (0..n)
        .map(|i| 0.5 * (pa.action[i] + pb.action[i]))
        .collect();
    let mask: Vec<bool> = (0..n).map(|i| pa.node_mask[i] || pb.node_mask[i]).collect();

    // flux per axis, then its divergence
    let mut divergence = vec![0.0; n];
    for (a, axis) in pa.axes.iter().enumerate() {
        let dx = axis.spacing();
        let flux: Vec<f64> = (0..n)
            .map(|i| {
                let ds = (s_mid[neighbor(i, a, 1, &shape)] - s_mid[neighbor(i, a, -1, &shape)])
                    / (2.0 * dx);
                rho_mid[i] * ds / mass
            })
            .collect();
        for (i, d) in divergence.iter_mut().enumerate() {
            *d += (flux[neighbor(i, a, 1, &shape)] - flux[neighbor(i, a, -1, &shape)]) / (2.0 * dx);
        }
    }

    let mut max_res: f64 = 0.0;
    for i in 0..n {
        if mask[i] {
            continue;
        }
        // skip points whose stencil touches a masked node: the phase there is
        // unreliable and the velocity undefined
        let stencil_masked = (0..pa.axes.len()).any(|a| {
            mask[neighbor(i, a, 1, &shape)]
                || mask[neighbor(i, a, -1, &shape)]
                || mask[neighbor(neighbor(i, a, 1, &shape), a, 1, &shape)]
                || mask[neighbor(neighbor(i, a, -1, &shape), a, -1, &shape)]
        });
        if stencil_masked {
            continue;
        }
        let res = ((pb.rho[i] - pa.rho[i]) / delta + divergence[i]).abs();
        max_res = max_res.max(res);
    }
    Ok(max_res)
}
