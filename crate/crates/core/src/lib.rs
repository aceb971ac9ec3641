//! Bohmian trajectory simulation: grid wavefunction propagation, polar
//! decomposition and the quantum potential, exact quadratic propagators,
//! guidance-equation integration, and trajectory monitoring protocols that
//! drive monitored quantum motion toward the classical flow.

// `!(a > b)` deliberately rejects NaN alongside the ordering violation, and
// the integrators take their full set of physical knobs as plain arguments.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::too_many_arguments)]
// grid kernels index several parallel per-point arrays by the flat grid index
#![allow(clippy::needless_range_loop)]

pub mod analytic;
pub mod bohm;
pub mod classical;
pub mod config;
pub mod error;
pub mod fft;
pub mod io;
pub mod potential;
pub mod propagator;
pub mod quadrature;
pub mod quantum;
pub mod types;
pub mod zeno;

pub use config::{GridAxisSpec, GridSpec, PotentialSpec, SimConfig, Tolerances};
pub use error::{Result, SimError};
pub use types::{PhaseSpacePoint, PhysicalParams, Trajectory};
