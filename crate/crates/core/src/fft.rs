//! Thin FFT helpers over row-major 1D/2D complex grids.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Angular wavenumbers for an `n`-point periodic grid of spacing `dx`,
/// in FFT ordering.
pub fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    (0..n)
        .map(|i| {
            let f = if i < n.div_ceil(2) {
                i as f64
            } else {
                i as f64 - n as f64
            };
            f * dk
        })
        .collect()
}

/// In-place forward/inverse FFT over a row-major grid of the given shape
/// (1 or 2 axes). The inverse is normalized by 1/N.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    match shape {
        [n] => {
            assert_eq!(data.len(), *n);
            let fft = if inverse {
                planner.plan_fft_inverse(*n)
            } else {
                planner.plan_fft_forward(*n)
            };
            fft.process(data);
        }
        [rows, cols] => {
            assert_eq!(data.len(), rows * cols);
            let fft_c = if inverse {
                planner.plan_fft_inverse(*cols)
            } else {
                planner.plan_fft_forward(*cols)
            };
            for r in 0..*rows {
                fft_c.process(&mut data[r * cols..(r + 1) * cols]);
            }
            let fft_r = if inverse {
                planner.plan_fft_inverse(*rows)
            } else {
                planner.plan_fft_forward(*rows)
            };
            let mut column = vec![Complex64::new(0.0, 0.0); *rows];
            for c in 0..*cols {
                for r in 0..*rows {
                    column[r] = data[r * cols + c];
                }
                fft_r.process(&mut column);
                for r in 0..*rows {
                    data[r * cols + c] = column[r];
                }
            }
        }
        other => panic!("unsupported grid rank {}", other.len()),
    }
    if inverse {
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}
