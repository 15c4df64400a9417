//! Quadrature rules used by the numeric guessing-probability oracle:
//! Gauss–Legendre on [−1, 1] and the periodic trapezoid rule on [0, 2π).

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
///
/// Nodes are the roots of the Legendre polynomial Pₙ, found by Newton
/// iteration from the Chebyshev-like initial guesses; weights are
/// 2/((1−x²)·Pₙ′(x)²). Exact for polynomials up to degree 2n−1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess for the i-th root (descending).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate Pₙ(x) and Pₙ′(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Mean of a 2π-periodic function over one period by the n-point trapezoid
/// rule (spectrally accurate for smooth periodic integrands).
pub fn periodic_mean(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    assert!(n >= 1);
    let step = 2.0 * std::f64::consts::PI / n as f64;
    (0..n).map(|k| f(k as f64 * step)).sum::<f64>() / n as f64
}
