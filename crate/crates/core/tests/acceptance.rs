//! Acceptance suite: every headline result verified end to end, one pass/fail
//! line per criterion. The lines are written straight to the process's
//! stdout so they are visible in a plain `cargo test` run, where the harness
//! would otherwise swallow the output of passing tests.

use bohmsim_core::analytic;
use bohmsim_core::bohm::{euler_g_step, integrate_bohm, integrate_quantum_hamilton};
use bohmsim_core::classical::{flow_jacobian_fd, symplectic_residual};
use bohmsim_core::config::GridAxisSpec;
use bohmsim_core::potential::PotentialModel;
use bohmsim_core::propagator::{kernel_state, propagate, short_time_action, SplitOperator};
use bohmsim_core::quantum::{
    continuity_residual, gaussian_packet, polar_decompose, quantum_potential, GridWaveFunction,
    DEFAULT_EPS_RHO,
};
use bohmsim_core::types::{PhaseSpacePoint, PhysicalParams};
use bohmsim_core::zeno::{
    trotter_compose, zeno_convergence_sweep, MonitoringSchedule, PropagationMethod, ZenoNumerics,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn axes_1d(points: usize) -> Vec<GridAxisSpec> {
    vec![GridAxisSpec::new(-20.0, 20.0, points)]
}

fn report(criterion: usize, name: &str, pass: bool, detail: &str) {
    use std::io::Write;
    use std::os::fd::FromRawFd;
    let line = format!(
        "acceptance criterion {criterion} — {name}: {} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    // write to fd 1 directly: the test harness captures the print macros of
    // passing tests, but these lines must always reach the user
    let mut out = std::mem::ManuallyDrop::new(unsafe { std::fs::File::from_raw_fd(1) });
    let _ = out.write_all(line.as_bytes());
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

#[test]
fn criterion_1_short_time_action_order() {
    // harmonic oscillator m = omega = 1, endpoints x = 1, x0 = 0.5:
    // |S_exact - S_short| at dt in {0.1, 0.05, 0.025}, log-log slope 2.0 +/- 0.2
    let v = PotentialModel::harmonic(1.0, 1.0);
    let (x, x0) = (1.0, 0.5);
    let dts = [0.1, 0.05, 0.025];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            (analytic::harmonic_action(x, x0, dt, 1.0, 1.0)
                - short_time_action(&v, &[x], &[x0], dt, 1.0).unwrap())
            .abs()
        })
        .collect();
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let slope = fit_slope(&xs, &ys);
    let pass = (1.8..=2.2).contains(&slope);
    report(
        1,
        "short-time action convergence order",
        pass,
        &format!("slope {slope:.3}, window [1.8, 2.2], errors {errs:?}"),
    );
    assert!(pass, "observed slope {slope}, demanded 2.0 +/- 0.2");
}

#[test]
fn criterion_2_line_average_is_dt_coefficient() {
    // the dt-coefficient of the exact harmonic action equals
    // -(m omega^2 / 6)(x^2 + x x0 + x0^2) at 100 random endpoint pairs
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x: f64 = rng.gen_range(-2.0..2.0);
        let x0: f64 = rng.gen_range(-2.0..2.0);
        // Richardson extrapolation of (S_exact - kinetic)/h
        let g = |h: f64| {
            (analytic::harmonic_action(x, x0, h, 1.0, 1.0) - analytic::free_action(x, x0, h, 1.0))
                / h
        };
        let r1 = |h: f64| (4.0 * g(h / 2.0) - g(h)) / 3.0;
        let coeff = (16.0 * r1(0.01) - r1(0.02)) / 15.0;
        let expect = -(x * x + x * x0 + x0 * x0) / 6.0;
        worst = worst.max((coeff - expect).abs());
    }
    let pass = worst < 1e-8;
    report(
        2,
        "line-averaged potential is the action's dt-coefficient",
        pass,
        &format!("worst deviation {worst:.3e}, bound 1e-8"),
    );
    assert!(pass, "worst deviation {worst}");
}

#[test]
fn criterion_3_quadratic_kernel_zero_quantum_potential() {
    let params = PhysicalParams::natural(1);
    let matrix = DMatrix::from_element(1, 1, 1.0);
    let mut worst = 0.0f64;
    for dt in [0.3, 0.6] {
        let psi = kernel_state(&matrix, &[0.0], dt, 0.0, axes_1d(4096), params).unwrap();
        let polar = polar_decompose(&psi, DEFAULT_EPS_RHO).unwrap();
        let q = quantum_potential(&polar).unwrap();
        let max_q = q
            .iter()
            .filter(|v| !v.is_nan())
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        worst = worst.max(max_q);
    }
    let pass = worst < 1e-6;
    report(
        3,
        "quadratic propagator has zero quantum potential",
        pass,
        &format!("max |Q| {worst:.3e}, bound 1e-6"),
    );
    assert!(pass, "max |Q| = {worst}");
}

#[test]
fn criterion_4_guidance_equals_quantum_hamilton() {
    // two independent formulations of the same trajectory, free Gaussian
    let params = PhysicalParams::natural(1);
    let psi0 = gaussian_packet(&[0.0], &[0.0], 1.0, axes_1d(1024), params, 0.0).unwrap();
    let v = PotentialModel::zero(1);
    let a = integrate_bohm(&v, &psi0, &[1.0], 0.0, 2.0, 400, 4, DEFAULT_EPS_RHO).unwrap();
    let b =
        integrate_quantum_hamilton(&v, &psi0, &[1.0], 0.0, 2.0, 400, 4, DEFAULT_EPS_RHO).unwrap();
    let mut max_dev = 0.0f64;
    for (sa, sb) in a.states().iter().zip(b.states()) {
        max_dev = max_dev.max((sa.position[0] - sb.position[0]).abs());
    }
    let pass = max_dev < 1e-3;
    report(
        4,
        "guidance and quantum-Hamilton forms agree",
        pass,
        &format!("max position discrepancy {max_dev:.3e}, bound 1e-3"),
    );
    assert!(pass, "max deviation {max_dev}");
}

#[test]
fn criterion_5_free_gaussian_trajectory_oracle() {
    // closed-form endpoint sqrt(2) * x0 at t = 2
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
    let expect = 2f64.sqrt();
    let rel = (end - expect).abs() / expect;
    let pass = rel < 1e-3;
    report(
        5,
        "free-Gaussian Bohmian endpoint",
        pass,
        &format!("endpoint {end:.6} vs sqrt(2), relative error {rel:.3e}, bound 1e-3"),
    );
    assert!(pass, "relative error {rel}");
}

#[test]
fn criterion_6_trotter_first_order() {
    // composed Euler short-time steps vs the exact rotation, slope 1.0 +/- 0.1
    let v = PotentialModel::harmonic(1.0, 1.0);
    let s0 = PhaseSpacePoint::new_1d(1.0, 0.0);
    let exact = PhaseSpacePoint::new_1d(1f64.cos(), -1f64.sin());
    let ns = [64usize, 128, 256, 512, 1024];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &ns {
        let dt = 1.0 / n as f64;
        let end = trotter_compose(|s| euler_g_step(s, dt, &v, 1.0), &s0, n).unwrap();
        let err = ((end.position[0] - exact.position[0]).powi(2)
            + (end.momentum[0] - exact.momentum[0]).powi(2))
        .sqrt();
        xs.push(dt.ln());
        ys.push(err.ln());
    }
    let slope = fit_slope(&xs, &ys);
    let pass = (0.9..=1.1).contains(&slope);
    report(
        6,
        "short-time map composition is first order",
        pass,
        &format!("slope {slope:.4}, window [0.9, 1.1]"),
    );
    assert!(pass, "slope {slope}");
}

#[test]
fn criterion_7_monitored_trajectory_dequantization() {
    // quartic anharmonic scenario: monitoring drives the Bohmian endpoint to
    // the classical one at first order in the interval length
    let v = PotentialModel::polynomial_1d(vec![0.0, 0.0, 0.5, 0.0, 0.1]);
    let s0 = PhaseSpacePoint::new_1d(1.0, 0.0);
    let mut numerics = ZenoNumerics::new_1d(axes_1d(4096), PhysicalParams::natural(1));
    numerics.method = PropagationMethod::SplitOperator;
    let template = MonitoringSchedule::fixed(0.0, 2.0, 8, 0.05);
    let summary =
        zeno_convergence_sweep(&v, &s0, &template, &[8, 16, 32, 64, 128], 1.0, &numerics).unwrap();

    let monotone_ok = summary.monotone_violations <= 1;
    let slope_ok = (0.5..=1.5).contains(&summary.slope);
    let last = summary.rows.last().unwrap();
    let contrast_ok = last.endpoint_error < 0.2 * summary.unmonitored_error;
    let pass = monotone_ok && slope_ok && contrast_ok;
    let errors: Vec<f64> = summary.rows.iter().map(|r| r.endpoint_error).collect();
    // pairwise slopes expose where on the curve the global fit is dragged
    // down: with a fixed relocalization width the large-interval end is
    // pre-asymptotic (freshly relocalized packets spread far beyond the local
    // potential expansion), while the fine end approaches first order
    let local_slopes: Vec<f64> = summary
        .rows
        .windows(2)
        .map(|w| {
            (w[1].endpoint_error.ln() - w[0].endpoint_error.ln())
                / (w[1].dt.ln() - w[0].dt.ln())
        })
        .collect();
    report(
        7,
        "monitored quartic trajectory converges to the classical flow",
        pass,
        &format!(
            "slope {:.3} (window [0.5, 1.5]), errors {errors:?}, local slopes {local_slopes:?}, \
             monotone violations {}, monitored@N=128 {:.3e} vs 0.2 x unmonitored {:.3e}",
            summary.slope,
            summary.monotone_violations,
            last.endpoint_error,
            0.2 * summary.unmonitored_error
        ),
    );
    assert!(
        pass,
        "slope {} (ok {slope_ok}), monotone violations {} (ok {monotone_ok}), \
         contrast {} vs {} (ok {contrast_ok})",
        summary.slope,
        summary.monotone_violations,
        last.endpoint_error,
        0.2 * summary.unmonitored_error
    );
}

#[test]
fn criterion_8_numerics_hygiene() {
    let params = PhysicalParams::natural(1);
    let v = PotentialModel::harmonic(1.0, 1.0);

    // (a) norm drift over 10^4 split-operator steps
    let psi0 = gaussian_packet(&[1.0], &[0.0], 1.0, axes_1d(512), params, 0.0).unwrap();
    let op = SplitOperator::new(&v, &psi0.axes, &params).unwrap();
    let mut psi = psi0.clone();
    for _ in 0..10_000 {
        op.step(&mut psi, 1e-3);
    }
    let drift = (psi.norm() - 1.0).abs();
    let norm_ok = drift < 1e-10;

    // (b) continuity residual shrinks x4 (+/- 1) under grid-spacing halving
    let state = |points: usize, t: f64| {
        GridWaveFunction::from_fn_raw(params, axes_1d(points), t, |x| {
            analytic::free_gaussian(x[0], t, 0.0, 1.0, 1.0, &params)
        })
        .unwrap()
    };
    let coarse = continuity_residual(&state(1024, 0.5), &state(1024, 0.5001)).unwrap();
    let fine = continuity_residual(&state(2048, 0.5), &state(2048, 0.5001)).unwrap();
    let ratio = coarse / fine;
    let continuity_ok = (3.0..=5.0).contains(&ratio);

    // (c) symplectic residual of the finite-difference flow Jacobian
    let quartic = PotentialModel::polynomial_1d(vec![0.0, 0.0, 0.5, 0.0, 0.1]);
    let j = flow_jacobian_fd(
        &quartic,
        &PhaseSpacePoint::new_1d(1.0, 0.0),
        1.0,
        1.0,
        2000,
        1e-5,
    )
    .unwrap();
    let sres = symplectic_residual(&j).unwrap();
    let symplectic_ok = sres < 1e-5;

    // (d) groupoid law of propagation
    let psi0 = gaussian_packet(&[1.0], &[0.5], 1.0, axes_1d(512), params, 0.0).unwrap();
    let mid = propagate(&psi0, &v, 0.0, 0.5, 100).unwrap();
    let two_leg = propagate(&mid, &v, 0.5, 1.0, 100).unwrap();
    let direct = propagate(&psi0, &v, 0.0, 1.0, 200).unwrap();
    let gap = two_leg.l2_distance(&direct).unwrap();
    let groupoid_ok = gap < 1e-10;

    let pass = norm_ok && continuity_ok && symplectic_ok && groupoid_ok;
    report(
        8,
        "numerics hygiene",
        pass,
        &format!(
            "norm drift {drift:.3e} (<1e-10: {norm_ok}), continuity ratio {ratio:.2} \
             (in [3,5]: {continuity_ok}), symplectic residual {sres:.3e} (<1e-5: {symplectic_ok}), \
             groupoid gap {gap:.3e} (<1e-10: {groupoid_ok})"
        ),
    );
    assert!(pass);
}
