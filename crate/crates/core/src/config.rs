//! Run configuration, loadable from JSON, with whole-config validation that
//! reports every violated invariant at once.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::types::PhysicalParams;

/// Per-axis uniform grid bounds and point count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxisSpec {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl GridAxisSpec {
    pub fn new(lower: f64, upper: f64, points: usize) -> Self {
        Self {
            lower,
            upper,
            points,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / self.points as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<GridAxisSpec>,
}

impl GridSpec {
    pub fn new_1d(lower: f64, upper: f64, points: usize) -> Self {
        Self {
            axes: vec![GridAxisSpec::new(lower, upper, points)],
        }
    }
}

/// Numerical tolerances and discretization knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Density floor for node masking, relative to the grid maximum of rho.
    #[serde(default = "default_eps_rho")]
    pub eps_rho: f64,
    /// Gauss-Legendre order for line averages without a closed form.
    #[serde(default = "default_quadrature_order")]
    pub quadrature_order: usize,
    /// RK4 substeps per wavefunction propagation step.
    #[serde(default = "default_ode_substeps")]
    pub ode_substeps: usize,
    /// Split-operator steps per unit time (sets the propagation dt).
    #[serde(default = "default_prop_steps_per_unit_time")]
    pub prop_steps_per_unit_time: usize,
}

fn default_eps_rho() -> f64 {
    1e-12
}
fn default_quadrature_order() -> usize {
    16
}
fn default_ode_substeps() -> usize {
    4
}
fn default_prop_steps_per_unit_time() -> usize {
    1000
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_rho: default_eps_rho(),
            quadrature_order: default_quadrature_order(),
            ode_substeps: default_ode_substeps(),
            prop_steps_per_unit_time: default_prop_steps_per_unit_time(),
        }
    }
}

/// Declarative potential description used in config files; converted to a
/// `PotentialModel` by the potential module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum PotentialSpec {
    Zero,
    Quadratic { matrix: Vec<Vec<f64>> },
    Polynomial1d { coefficients: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: PhysicalParams,
    pub grid: GridSpec,
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl SimConfig {
    /// A 1D natural-units config on `[-20, 20]` with 1024 points.
    pub fn default_1d() -> Self {
        Self {
            params: PhysicalParams::natural(1),
            grid: GridSpec::new_1d(-20.0, 20.0, 1024),
            scenario: None,
            potential: None,
            output_dir: default_output_dir(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: SimConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }
}

/// Checks every config invariant and reports all violations by name.
pub fn validate_config(config: SimConfig) -> Result<SimConfig> {
    let mut errs = Vec::new();
    if let Err(mut e) = config.params.validate() {
        errs.append(&mut e);
    }
    if config.grid.axes.is_empty() {
        errs.push("grid must have at least one axis".to_string());
    }
    if !config.grid.axes.is_empty() && config.grid.axes.len() != config.params.dimension {
        errs.push(format!(
            "grid has {} axes but dimension is {}",
            config.grid.axes.len(),
            config.params.dimension
        ));
    }
    for (i, axis) in config.grid.axes.iter().enumerate() {
        if !axis.lower.is_finite() || !axis.upper.is_finite() {
            errs.push(format!("axis {i}: bounds must be finite"));
        } else if !(axis.lower < axis.upper) {
            errs.push(format!(
                "axis {i}: lower bound {} must be below upper bound {}",
                axis.lower, axis.upper
            ));
        }
        if !axis.points.is_power_of_two() {
            errs.push(format!(
                "axis {i}: point count {} must be a power of two",
                axis.points
            ));
        }
    }
    let tol = &config.tolerances;
    if !(tol.eps_rho > 0.0 && tol.eps_rho < 1.0) {
        errs.push(format!("eps_rho must lie in (0, 1) (got {})", tol.eps_rho));
    }
    if tol.quadrature_order == 0 {
        errs.push("quadrature_order must be at least 1".to_string());
    }
    if tol.ode_substeps == 0 {
        errs.push("ode_substeps must be at least 1".to_string());
    }
    if tol.prop_steps_per_unit_time == 0 {
        errs.push("prop_steps_per_unit_time must be at least 1".to_string());
    }
    if let Some(PotentialSpec::Quadratic { matrix }) = &config.potential {
        let n = config.params.dimension;
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            errs.push(format!("quadratic potential matrix must be {n}x{n}"));
        }
    }
    if let Some(PotentialSpec::Polynomial1d { .. }) = &config.potential {
        if config.params.dimension != 1 {
            errs.push("polynomial1d potential requires dimension 1".to_string());
        }
    }
    if errs.is_empty() {
        Ok(config)
    } else {
        Err(SimError::InvalidConfig(errs))
    }
}
