//! One-dimensional quadrature: Gauss–Legendre rules and composite Simpson.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over `[a, b]` with an `n`-point Gauss–Legendre rule.
pub fn gauss_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (half, mid) = (0.5 * (b - a), 0.5 * (b + a));
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

pub fn check_simpson_nodes(n: usize) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "Simpson quadrature needs an odd node count ≥ 3, got {n}"
        )));
    }
    Ok(())
}

/// Composite Simpson over equally spaced samples of `[a, b]`
/// (the sample count must be odd).
pub fn simpson(values: &[f64], a: f64, b: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let h = (b - a) / (n - 1) as f64;
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Equally spaced nodes `a, …, b`.
pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Simpson of a function on `[a, b]` with `n` nodes.
pub fn simpson_fn<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let v: Vec<f64> = nodes(a, b, n).into_iter().map(f).collect();
    simpson(&v, a, b)
}

/// Simpson at `n` and `2n − 1` nodes; returns the fine value and the
/// Richardson error estimate `|fine − coarse| / 15`.
pub fn simpson_richardson(fine_values: &[f64], a: f64, b: f64) -> (f64, f64) {
    let coarse: Vec<f64> = fine_values.iter().step_by(2).copied().collect();
    let fine = simpson(fine_values, a, b);
    let c = simpson(&coarse, a, b);
    (fine, (fine - c).abs() / 15.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        // degree 15 is the exactness limit
        let v = gauss_integrate(|x| x.powi(14) + 3.0 * x.powi(3), -1.0, 1.0, &rule);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
        let w: f64 = rule.1.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_matches_known_three_point_rule() {
        let (x, w) = gauss_legendre(3);
        assert!((x[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson_fn(|t| t * t * t - t + 1.0, 0.0, 2.0, 5);
        assert!((v - (4.0 - 2.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn simpson_kills_low_frequency_oscillations() {
        for b in 1..=3 {
            let re = simpson_fn(|t| (2.0 * PI * b as f64 * t).cos(), 0.0, 1.0, 257);
            let im = simpson_fn(|t| (2.0 * PI * b as f64 * t).sin(), 0.0, 1.0, 257);
            assert!(re.hypot(im) < 1e-12);
        }
    }

    #[test]
    fn richardson_estimate_is_small_for_smooth_integrands() {
        let v: Vec<f64> = nodes(0.0, 1.0, 33).into_iter().map(|t| (3.0 * t).exp()).collect();
        let (val, err) = simpson_richardson(&v, 0.0, 1.0);
        let exact = ((3.0f64).exp() - 1.0) / 3.0;
        // the estimate tracks the actual error of the fine rule
        let actual = (val - exact).abs();
        assert!(actual < 1.5 * err && actual > 0.5 * err && err < 1e-4);
    }

    #[test]
    fn even_node_counts_are_rejected() {
        assert!(check_simpson_nodes(256).is_err());
        assert!(check_simpson_nodes(257).is_ok());
    }
}
