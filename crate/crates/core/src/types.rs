//! Shared value types carried by every other module.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Physical constants of a simulation, kept in natural units (`hbar = mass = 1`
/// by default) with both explicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    pub dimension: usize,
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64, dimension: usize) -> Result<Self> {
        let p = Self {
            hbar,
            mass,
            dimension,
        };
        p.validate().map_err(SimError::InvalidConfig)?;
        Ok(p)
    }

    /// Natural units in one dimension.
    pub fn natural(dimension: usize) -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            dimension,
        }
    }

    pub(crate) fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if !(self.hbar > 0.0) {
            errs.push(format!("hbar must be positive (got {})", self.hbar));
        }
        if !(self.mass > 0.0) {
            errs.push(format!("mass must be positive (got {})", self.mass));
        }
        if self.dimension < 1 {
            errs.push("dimension must be at least 1".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// A classical state `(x, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
}

impl PhaseSpacePoint {
    pub fn new(position: Vec<f64>, momentum: Vec<f64>) -> Result<Self> {
        if position.len() != momentum.len() {
            return Err(SimError::DimensionMismatch {
                expected: position.len(),
                got: momentum.len(),
            });
        }
        Ok(Self { position, momentum })
    }

    pub fn new_1d(x: f64, p: f64) -> Self {
        Self {
            position: vec![x],
            momentum: vec![p],
        }
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// `self + scale * other`, componentwise over both position and momentum.
    pub fn add_scaled(&self, scale: f64, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            position: self
                .position
                .iter()
                .zip(&other.position)
                .map(|(a, b)| a + scale * b)
                .collect(),
            momentum: self
                .momentum
                .iter()
                .zip(&other.momentum)
                .map(|(a, b)| a + scale * b)
                .collect(),
        })
    }

    /// Euclidean distance in position between two states.
    pub fn position_distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .position
            .iter()
            .zip(&other.position)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    pub fn momentum_distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .momentum
            .iter()
            .zip(&other.momentum)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt())
    }
}

/// A time-stamped sequence of classical states, optionally annotated with the
/// quantum potential sampled along the path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PhaseSpacePoint>,
    quantum_potential: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<PhaseSpacePoint>) -> Result<Self> {
        Self::with_quantum_potential(times, states, None)
    }

    pub fn with_quantum_potential(
        times: Vec<f64>,
        states: Vec<PhaseSpacePoint>,
        quantum_potential: Option<Vec<f64>>,
    ) -> Result<Self> {
        if times.len() != states.len() {
            return Err(SimError::LengthMismatch {
                times: times.len(),
                states: states.len(),
            });
        }
        if let Some(q) = &quantum_potential {
            if q.len() != times.len() {
                return Err(SimError::LengthMismatch {
                    times: times.len(),
                    states: q.len(),
                });
            }
        }
        for i in 1..times.len() {
            if !(times[i] > times[i - 1]) {
                return Err(SimError::NonMonotoneTimes { index: i });
            }
        }
        if let Some(first) = states.first() {
            let n = first.dim();
            for s in &states {
                if s.dim() != n {
                    return Err(SimError::DimensionMismatch {
                        expected: n,
                        got: s.dim(),
                    });
                }
            }
        }
        Ok(Self {
            times,
            states,
            quantum_potential,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PhaseSpacePoint] {
        &self.states
    }

    pub fn quantum_potential(&self) -> Option<&[f64]> {
        self.quantum_potential.as_deref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&PhaseSpacePoint> {
        self.states.last()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_reject_nonpositive() {
        assert!(PhysicalParams::new(1.0, 0.0, 1).is_err());
        assert!(PhysicalParams::new(-1.0, 1.0, 1).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 2).is_ok());
    }

    #[test]
    fn phase_space_point_dimension_checked() {
        let a = PhaseSpacePoint::new_1d(1.0, 0.0);
        let b = PhaseSpacePoint::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert!(a.add_scaled(1.0, &b).is_err());
        assert!(PhaseSpacePoint::new(vec![1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn trajectory_rejects_non_monotone_times() {
        let s = PhaseSpacePoint::new_1d(0.0, 0.0);
        let err = Trajectory::new(vec![0.0, 1.0, 1.0], vec![s.clone(), s.clone(), s.clone()]);
        assert!(matches!(err, Err(SimError::NonMonotoneTimes { index: 2 })));
        let err = Trajectory::new(vec![0.0, 1.0], vec![s.clone()]);
        assert!(matches!(err, Err(SimError::LengthMismatch { .. })));
        assert!(Trajectory::new(vec![0.0, 0.5, 1.0], vec![s.clone(), s.clone(), s]).is_ok());
    }
}
