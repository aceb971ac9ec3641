//! Closed-form reference solutions used as independent oracles: the free
//! Gaussian packet and its Bohmian trajectory, harmonic coherent states, and
//! exact two-point actions.

use num_complex::Complex64;

use crate::types::PhysicalParams;

/// Dimensionless spreading parameter tau = hbar t / (2 m sigma^2).
fn spread_tau(t: f64, sigma: f64, params: &PhysicalParams) -> f64 {
    params.hbar * t / (2.0 * params.mass * sigma * sigma)
}

/// Free-particle Gaussian packet that starts at `gaussian_packet(x0, p0,
/// sigma)` at t = 0, evaluated at (x, t).
pub fn free_gaussian(
    x: f64,
    t: f64,
    x0: f64,
    p0: f64,
    sigma: f64,
    params: &PhysicalParams,
) -> Complex64 {
    let a = Complex64::new(1.0, spread_tau(t, sigma, params));
    let xi = x - x0 - p0 * t / params.mass;
    let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25) / a.sqrt();
    let gauss = (-Complex64::new(xi * xi, 0.0) / (4.0 * sigma * sigma * a)).exp();
    let phase = Complex64::new(
        0.0,
        (p0 * x - p0 * p0 * t / (2.0 * params.mass)) / params.hbar,
    )
    .exp();
    norm * gauss * phase
}

/// Bohmian trajectory through the free Gaussian: a particle starting at
/// `x_init` rides the dilation x_c(t) + (x_init - x0) sqrt(1 + tau^2).
pub fn free_gaussian_bohm_position(
    x_init: f64,
    t: f64,
    x0: f64,
    p0: f64,
    sigma: f64,
    params: &PhysicalParams,
) -> f64 {
    let tau = spread_tau(t, sigma, params);
    let center = x0 + p0 * t / params.mass;
    center + (x_init - x0) * (1.0 + tau * tau).sqrt()
}

/// Guidance velocity field of the free Gaussian.
pub fn free_gaussian_bohm_velocity(
    x: f64,
    t: f64,
    x0: f64,
    p0: f64,
    sigma: f64,
    params: &PhysicalParams,
) -> f64 {
    let tau = spread_tau(t, sigma, params);
    let rate = params.hbar / (2.0 * params.mass * sigma * sigma);
    let xi = x - x0 - p0 * t / params.mass;
    p0 / params.mass + xi * rate * rate * t / (1.0 + tau * tau)
}

/// Coherent state of the harmonic oscillator (sigma^2 = hbar / 2 m omega)
/// with classical center (x_c(t), p_c(t)). The time-only global phase is
/// omitted; it affects neither the density nor the guidance field.
pub fn harmonic_coherent(
    x: f64,
    t: f64,
    x0: f64,
    p0: f64,
    omega: f64,
    params: &PhysicalParams,
) -> Complex64 {
    let m = params.mass;
    let sigma2 = params.hbar / (2.0 * m * omega);
    let (s, c) = (omega * t).sin_cos();
    let xc = x0 * c + p0 / (m * omega) * s;
    let pc = p0 * c - m * omega * x0 * s;
    let d = x - xc;
    let norm = (2.0 * std::f64::consts::PI * sigma2).powf(-0.25);
    norm * Complex64::new(-d * d / (4.0 * sigma2), pc * d / params.hbar).exp()
}

/// Exact two-point action of the 1D harmonic oscillator over `dt`.
pub fn harmonic_action(x: f64, x0: f64, dt: f64, mass: f64, omega: f64) -> f64 {
    let (s, c) = (omega * dt).sin_cos();
    mass * omega / (2.0 * s) * ((x * x + x0 * x0) * c - 2.0 * x * x0)
}

/// Exact free-particle two-point action over `dt`.
pub fn free_action(x: f64, x0: f64, dt: f64, mass: f64) -> f64 {
    mass * (x - x0) * (x - x0) / (2.0 * dt)
}
