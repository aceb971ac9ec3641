//! Potential-energy models: evaluation, analytic gradients, and the
//! line-averaged potential over the segment `[x0, x]` together with its
//! x-gradient and mixed Hessian.

use nalgebra::{DMatrix, DVector};

use crate::config::PotentialSpec;
use crate::error::{Result, SimError};
use crate::quadrature::integrate_unit_interval;

const SYMMETRY_TOL: f64 = 1e-12;

/// Default Gauss-Legendre order for line averages with no closed form.
pub const DEFAULT_QUADRATURE_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    /// V = 0 in `dimension` variables.
    Zero { dimension: usize },
    /// V(x) = 1/2 M x . x with M symmetric.
    Quadratic { matrix: DMatrix<f64> },
    /// V(x) = sum_k c_k x^k, one dimensional.
    Polynomial1D { coefficients: Vec<f64> },
}

impl PotentialModel {
    pub fn zero(dimension: usize) -> Self {
        Self::Zero { dimension }
    }

    /// Builds the quadratic form 1/2 M x . x. `matrix` is symmetrized; it must
    /// already be symmetric to within 1e-12.
    pub fn quadratic(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(SimError::InvalidArgument(format!(
                "quadratic matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.amax().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(SimError::InvalidArgument(format!(
                "quadratic matrix is not symmetric (residual {asym:.3e})"
            )));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self::Quadratic { matrix: sym })
    }

    /// 1D harmonic oscillator V = 1/2 m w^2 x^2.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        Self::Quadratic {
            matrix: DMatrix::from_element(1, 1, mass * omega * omega),
        }
    }

    pub fn polynomial_1d(coefficients: Vec<f64>) -> Self {
        Self::Polynomial1D { coefficients }
    }

    pub fn from_spec(spec: &PotentialSpec, dimension: usize) -> Result<Self> {
        match spec {
            PotentialSpec::Zero => Ok(Self::zero(dimension)),
            PotentialSpec::Quadratic { matrix } => {
                let n = matrix.len();
                if n != dimension || matrix.iter().any(|r| r.len() != n) {
                    return Err(SimError::InvalidArgument(format!(
                        "quadratic matrix must be {dimension}x{dimension}"
                    )));
                }
                let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
                Self::quadratic(m)
            }
            PotentialSpec::Polynomial1d { coefficients } => {
                if dimension != 1 {
                    return Err(SimError::DimensionMismatch {
                        expected: 1,
                        got: dimension,
                    });
                }
                Ok(Self::polynomial_1d(coefficients.clone()))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Zero { dimension } => *dimension,
            Self::Quadratic { matrix } => matrix.nrows(),
            Self::Polynomial1D { .. } => 1,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// V(x).
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match self {
            Self::Zero { .. } => 0.0,
            Self::Quadratic { matrix } => {
                let v = DVector::from_column_slice(x);
                0.5 * (matrix * &v).dot(&v)
            }
            Self::Polynomial1D { coefficients } => poly_eval(coefficients, x[0]),
        })
    }

    /// grad V(x), closed form per variant.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(match self {
            Self::Zero { dimension } => vec![0.0; *dimension],
            Self::Quadratic { matrix } => {
                let v = DVector::from_column_slice(x);
                (matrix * v).as_slice().to_vec()
            }
            Self::Polynomial1D { coefficients } => {
                vec![poly_eval(&poly_derivative(coefficients), x[0])]
            }
        })
    }

    /// `(V(x), grad V(x))` in one call.
    pub fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    /// Hessian of V at x.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        Ok(match self {
            Self::Zero { dimension } => DMatrix::zeros(*dimension, *dimension),
            Self::Quadratic { matrix } => matrix.clone(),
            Self::Polynomial1D { coefficients } => {
                let second = poly_derivative(&poly_derivative(coefficients));
                DMatrix::from_element(1, 1, poly_eval(&second, x[0]))
            }
        })
    }

    /// Line-averaged potential over the segment from x0 to x:
    /// the integral of V(lambda x + (1 - lambda) x0) over lambda in [0, 1].
    /// Closed form for every built-in variant.
    pub fn line_average(&self, x: &[f64], x0: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(x0)?;
        Ok(match self {
            Self::Zero { .. } => 0.0,
            Self::Quadratic { matrix } => {
                let a = DVector::from_column_slice(x);
                let b = DVector::from_column_slice(x0);
                let ma = matrix * &a;
                let mb = matrix * &b;
                (ma.dot(&a) + ma.dot(&b) + mb.dot(&b)) / 6.0
            }
            Self::Polynomial1D { coefficients } => {
                let q = poly_along_segment(coefficients, x0[0], x[0] - x0[0]);
                integrate_poly_weighted(&q, 0)
            }
        })
    }

    /// Same integral evaluated by Gauss-Legendre quadrature of the given
    /// order. Used for variants without a closed form and as an independent
    /// route in tests.
    pub fn line_average_quadrature(&self, x: &[f64], x0: &[f64], order: usize) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(x0)?;
        let mut point = vec![0.0; x.len()];
        let mut err = None;
        let val = integrate_unit_interval(order, |lambda| {
            for i in 0..x.len() {
                point[i] = lambda * x[i] + (1.0 - lambda) * x0[i];
            }
            match self.value(&point) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(val),
        }
    }

    /// x-gradient of the line average:
    /// the integral of lambda grad V(lambda x + (1 - lambda) x0) over [0, 1].
    /// At x = x0 this reduces to half the gradient of V.
    pub fn line_average_gradient(&self, x: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.check_dim(x0)?;
        Ok(match self {
            Self::Zero { dimension } => vec![0.0; *dimension],
            Self::Quadratic { matrix } => {
                let a = DVector::from_column_slice(x);
                let b = DVector::from_column_slice(x0);
                ((matrix * a) * (2.0 / 6.0) + (matrix * b) * (1.0 / 6.0))
                    .as_slice()
                    .to_vec()
            }
            Self::Polynomial1D { coefficients } => {
                let dv = poly_derivative(coefficients);
                let q = poly_along_segment(&dv, x0[0], x[0] - x0[0]);
                vec![integrate_poly_weighted(&q, 1)]
            }
        })
    }

    /// Mixed Hessian of the line average with respect to (x, x0):
    /// the integral of lambda (1 - lambda) Hess V over the segment.
    pub fn line_average_mixed_hessian(&self, x: &[f64], x0: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        self.check_dim(x0)?;
        Ok(match self {
            Self::Zero { dimension } => DMatrix::zeros(*dimension, *dimension),
            Self::Quadratic { matrix } => matrix / 6.0,
            Self::Polynomial1D { coefficients } => {
                let second = poly_derivative(&poly_derivative(coefficients));
                let q = poly_along_segment(&second, x0[0], x[0] - x0[0]);
                let val = integrate_poly_weighted(&q, 1) - integrate_poly_weighted(&q, 2);
                DMatrix::from_element(1, 1, val)
            }
        })
    }
}

fn poly_eval(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(coefficients: &[f64]) -> Vec<f64> {
    coefficients
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// Coefficients in lambda of p(x0 + lambda d) for a polynomial p.
fn poly_along_segment(coefficients: &[f64], x0: f64, d: f64) -> Vec<f64> {
    let mut q = vec![0.0];
    for &c in coefficients.iter().rev() {
        // q <- q * (x0 + d lambda) + c
        let mut next = vec![0.0; q.len() + 1];
        for (j, &qj) in q.iter().enumerate() {
            next[j] += x0 * qj;
            next[j + 1] += d * qj;
        }
        next[0] += c;
        q = next;
    }
    q
}

/// Exact integral over [0, 1] of lambda^weight * q(lambda).
fn integrate_poly_weighted(q: &[f64], weight: u32) -> f64 {
    q.iter()
        .enumerate()
        .map(|(j, &qj)| qj / (j as f64 + weight as f64 + 1.0))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quartic() -> PotentialModel {
        // V = 1/2 x^2 + 0.1 x^4
        PotentialModel::polynomial_1d(vec![0.0, 0.0, 0.5, 0.0, 0.1])
    }

    #[test]
    fn harmonic_value_and_gradient() {
        let v = PotentialModel::harmonic(1.0, 1.0);
        let (val, grad) = v.value_and_gradient(&[2.0]).unwrap();
        assert_abs_diff_eq!(val, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(grad[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_potential() {
        let v = PotentialModel::zero(2);
        let (val, grad) = v.value_and_gradient(&[3.0, -1.0]).unwrap();
        assert_eq!(val, 0.0);
        assert_eq!(grad, vec![0.0, 0.0]);
        assert_eq!(v.line_average(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn quartic_value_matches_finite_difference_of_v() {
        let v = quartic();
        let (val, grad) = v.value_and_gradient(&[1.0]).unwrap();
        assert_abs_diff_eq!(val, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(grad[0], 1.4, epsilon = 1e-15);
        // finite-difference oracle on V
        let h = 1e-6;
        let fd = (v.value(&[1.0 + h]).unwrap() - v.value(&[1.0 - h]).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(grad[0], fd, epsilon = 1e-8);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let v = PotentialModel::harmonic(1.0, 1.0);
        assert!(v.value(&[1.0, 2.0]).is_err());
        assert!(v.line_average(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(PotentialModel::quadratic(m).is_err());
    }

    #[test]
    fn harmonic_line_average_golden_formula() {
        let v = PotentialModel::harmonic(1.0, 1.0);
        // closed form: (1/6)(x^2 + x x0 + x0^2)
        assert_abs_diff_eq!(
            v.line_average(&[2.0], &[0.0]).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-14
        );
        let (x, x0) = (1.3, -0.4);
        assert_abs_diff_eq!(
            v.line_average(&[x], &[x0]).unwrap(),
            (x * x + x * x0 + x0 * x0) / 6.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn line_average_at_coincident_points_is_value() {
        for v in [
            PotentialModel::harmonic(1.0, 1.0),
            quartic(),
            PotentialModel::zero(1),
        ] {
            let x = [0.7];
            assert_abs_diff_eq!(
                v.line_average(&x, &x).unwrap(),
                v.value(&x).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn line_average_gradient_examples() {
        let v = PotentialModel::harmonic(1.0, 1.0);
        // coincidence limit: half the gradient
        assert_abs_diff_eq!(
            v.line_average_gradient(&[1.0], &[1.0]).unwrap()[0],
            0.5,
            epsilon = 1e-14
        );
        // differentiate the golden formula at x = 2, x0 = 0
        assert_abs_diff_eq!(
            v.line_average_gradient(&[2.0], &[0.0]).unwrap()[0],
            2.0 / 3.0,
            epsilon = 1e-14
        );
        assert_eq!(
            PotentialModel::zero(1)
                .line_average_gradient(&[1.0], &[0.0])
                .unwrap()[0],
            0.0
        );
    }

    #[test]
    fn symmetry_over_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let quad2 = PotentialModel::quadratic(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 0.3, 0.3, 2.0],
        ))
        .unwrap();
        for _ in 0..1000 {
            let (a, b): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let v = quartic();
            assert_abs_diff_eq!(
                v.line_average(&[a], &[b]).unwrap(),
                v.line_average(&[b], &[a]).unwrap(),
                epsilon = 1e-12
            );
            let (c, d): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            assert_abs_diff_eq!(
                quad2.line_average(&[a, c], &[b, d]).unwrap(),
                quad2.line_average(&[b, d], &[a, c]).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn quadrature_route_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for v in [PotentialModel::harmonic(1.0, 1.0), quartic()] {
            for _ in 0..200 {
                let (a, b): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                assert_abs_diff_eq!(
                    v.line_average(&[a], &[b]).unwrap(),
                    v.line_average_quadrature(&[a], &[b], 16).unwrap(),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn gradient_consistent_with_finite_difference_of_line_average() {
        let step = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for v in [PotentialModel::harmonic(1.0, 1.0), quartic()] {
            for _ in 0..100 {
                let (x, x0): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let g = v.line_average_gradient(&[x], &[x0]).unwrap()[0];
                let fd = (v.line_average(&[x + step], &[x0]).unwrap()
                    - v.line_average(&[x - step], &[x0]).unwrap())
                    / (2.0 * step);
                assert_abs_diff_eq!(g, fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn coincidence_limit_all_variants() {
        let quad2 =
            PotentialModel::quadratic(DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]))
                .unwrap();
        let cases: Vec<(PotentialModel, Vec<f64>)> = vec![
            (PotentialModel::harmonic(1.0, 1.0), vec![0.8]),
            (quartic(), vec![-1.2]),
            (PotentialModel::zero(1), vec![0.3]),
            (quad2, vec![0.5, -0.7]),
        ];
        for (v, x0) in cases {
            let g = v.line_average_gradient(&x0, &x0).unwrap();
            let full = v.gradient(&x0).unwrap();
            for i in 0..x0.len() {
                assert_abs_diff_eq!(g[i], 0.5 * full[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mixed_hessian_matches_quadrature() {
        let v = quartic();
        let (x, x0) = (1.1, -0.3);
        let got = v.line_average_mixed_hessian(&[x], &[x0]).unwrap()[(0, 0)];
        let oracle = integrate_unit_interval(16, |l| {
            let p = l * x + (1.0 - l) * x0;
            l * (1.0 - l) * v.hessian(&[p]).unwrap()[(0, 0)]
        });
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-12);
    }
}
