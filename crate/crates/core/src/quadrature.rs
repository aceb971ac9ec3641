//! Gauss-Legendre quadrature nodes and weights on `[-1, 1]`, computed by
//! Newton iteration on the Legendre polynomials.

/// Nodes and weights for an `order`-point Gauss-Legendre rule. Exact for
/// polynomials of degree `2 * order - 1`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be at least 1");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrates `f` over `[0, 1]` with an `order`-point Gauss-Legendre rule.
pub fn integrate_unit_interval<F: FnMut(f64) -> f64>(order: usize, mut f: F) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| 0.5 * w * f(0.5 * (x + 1.0)))
        .sum()
}
