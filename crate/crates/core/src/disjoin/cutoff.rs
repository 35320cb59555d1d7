//! The mollifier `ρ(s) = ∫_s¹ g / ∫₀¹ g` with `g(τ) = exp(−1/(τ(1−τ)))`.
//!
//! Values are tabulated once by Gauss–Legendre quadrature on a uniform mesh
//! and interpolated by cubic Hermite polynomials using the exact derivative
//! `ρ' = −g/Z`, so evaluation is O(1) and accurate to ~1e−15.

use std::sync::{Arc, OnceLock};

use crate::quadrature;

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

#[derive(Clone, Debug)]
pub struct SmoothCutoff {
    cells: usize,
    /// `ρ` at the mesh nodes.
    rho: Vec<f64>,
    /// `∫₀^{s_i} (1 − ρ)` at the mesh nodes.
    prim: Vec<f64>,
    norm: f64,
}

pub const DEFAULT_RESOLUTION: usize = 2048;

impl Default for SmoothCutoff {
    fn default() -> Self {
        SmoothCutoff::new(DEFAULT_RESOLUTION)
    }
}

fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

impl SmoothCutoff {
    /// Tabulates on `cells` uniform cells of `[0, 1]`.
    pub fn new(cells: usize) -> Self {
        let cells = cells.max(16);
        let rule = quadrature::gauss_legendre(20);
        let h = 1.0 / cells as f64;
        let pieces: Vec<f64> = (0..cells)
            .map(|i| {
                let a = i as f64 * h;
                quadrature::gauss_integrate(bump, a, a + h, &rule)
            })
            .collect();
        let norm: f64 = pieces.iter().sum();
        let mut rho = vec![0.0; cells + 1];
        let mut acc = 0.0;
        for i in (0..cells).rev() {
            acc += pieces[i];
            rho[i] = acc / norm;
        }
        rho[0] = 1.0;
        let mut c = SmoothCutoff {
            cells,
            rho,
            prim: vec![0.0; cells + 1],
            norm,
        };
        let mut acc = 0.0;
        for i in 0..cells {
            let a = i as f64 * h;
            acc += quadrature::gauss_integrate(|s| c.up(s), a, a + h, &rule);
            c.prim[i + 1] = acc;
        }
        c
    }

    /// Process-wide instance at the default resolution.
    pub fn shared() -> Arc<SmoothCutoff> {
        static SHARED: OnceLock<Arc<SmoothCutoff>> = OnceLock::new();
        SHARED.get_or_init(|| Arc::new(SmoothCutoff::default())).clone()
    }

    fn locate(&self, s: f64) -> (usize, f64, f64) {
        let h = 1.0 / self.cells as f64;
        let i = ((s / h) as usize).min(self.cells - 1);
        (i, (s - i as f64 * h) / h, h)
    }

    /// Non-increasing: 1 on `s ≤ 0`, 0 on `s ≥ 1`.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        if s >= 1.0 {
            return 0.0;
        }
        let (i, t, h) = self.locate(s);
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        hermite(
            self.rho[i],
            self.rho[i + 1],
            self.deriv(a),
            self.deriv(b),
            h,
            t,
        )
    }

    pub fn deriv(&self, s: f64) -> f64 {
        -bump(s) / self.norm
    }

    /// `ρ''` in closed form.
    pub fn second_deriv(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let p = s * (1.0 - s);
        -bump(s) * (1.0 - 2.0 * s) / (p * p) / self.norm
    }

    /// The increasing variant `1 − ρ`.
    pub fn up(&self, s: f64) -> f64 {
        1.0 - self.eval(s)
    }

    pub fn up_deriv(&self, s: f64) -> f64 {
        -self.deriv(s)
    }

    /// `∫₀^x (1 − ρ)`; equals `x − 1/2` for `x ≥ 1`.
    pub fn up_integral(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return self.prim[self.cells] + (x - 1.0);
        }
        let (i, t, h) = self.locate(x);
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        hermite(self.prim[i], self.prim[i + 1], self.up(a), self.up(b), h, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus_and_midpoint() {
        let c = SmoothCutoff::shared();
        assert_eq!(c.eval(-1.0), 1.0);
        assert_eq!(c.eval(2.0), 0.0);
        assert!((c.eval(0.5) - 0.5).abs() < 1e-14);
        assert!((c.up_integral(1.0) - 0.5).abs() < 1e-13);
        assert!((c.up_integral(3.0) - 2.5).abs() < 1e-13);
    }

    #[test]
    fn monotone_and_symmetric() {
        let c = SmoothCutoff::shared();
        let mut prev = 1.0;
        for i in 0..=1000 {
            let s = i as f64 / 1000.0;
            let v = c.eval(s);
            assert!(v <= prev + 1e-15);
            assert!((v + c.eval(1.0 - s) - 1.0).abs() < 1e-13);
            prev = v;
        }
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let c = SmoothCutoff::shared();
        let rule = quadrature::gauss_legendre(60);
        for s in [0.1, 0.237, 0.5, 0.61, 0.9] {
            // split at 1/2 to keep the rule accurate on the flat tails
            let direct = if s < 0.5 {
                quadrature::gauss_integrate(bump, s, 0.5, &rule)
                    + quadrature::gauss_integrate(bump, 0.5, 1.0, &rule)
            } else {
                quadrature::gauss_integrate(bump, s, 1.0, &rule)
            } / c.norm;
            assert!((c.eval(s) - direct).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn derivatives_vanish_at_the_endpoints() {
        let c = SmoothCutoff::shared();
        let h = 0.02;
        for e in [0.0, 1.0] {
            let f = |k: f64| c.eval(e + k * h);
            let d1 = (f(1.0) - f(-1.0)) / (2.0 * h);
            let d2 = (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (h * h);
            let d3 = (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h.powi(3));
            let d4 = (f(2.0) - 4.0 * f(1.0) + 6.0 * f(0.0) - 4.0 * f(-1.0) + f(-2.0)) / h.powi(4);
            for d in [d1, d2, d3, d4] {
                assert!(d.abs() < 1e-4, "endpoint {e}: {d}");
            }
        }
    }

    #[test]
    fn derivative_is_consistent_with_values() {
        let c = SmoothCutoff::shared();
        let h = 1e-5;
        for s in [0.2, 0.45, 0.8] {
            let fd = (c.eval(s + h) - c.eval(s - h)) / (2.0 * h);
            assert!((fd - c.deriv(s)).abs() < 1e-8);
            let fd2 = (c.deriv(s + h) - c.deriv(s - h)) / (2.0 * h);
            assert!((fd2 - c.second_deriv(s)).abs() < 1e-6);
            let fdp = (c.up_integral(s + h) - c.up_integral(s - h)) / (2.0 * h);
            assert!((fdp - c.up(s)).abs() < 1e-9);
        }
    }
}
