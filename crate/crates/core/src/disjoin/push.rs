//! The annulus push `H^{ε,δ}_t(re^{iθ}) = −(θ/2π)·ρ₁(θ)·ρ₂(πr² − t)`.
//!
//! `ρ₁` is 1 on `[δ_θ, 2π − δ_θ]` and flat to all orders at `0, 2π`; `ρ₂` is
//! 1 on `[δ_in, 1 + ε − δ_out]` and 0 off `[0, 1 + ε]`. On the moving wedge
//! the field is `(1/2πr)∂_r`, so the action `π|z|²` grows at unit speed.
//!
//! The three collar widths are independent: the slit-stage image typically
//! stays ~10⁻³ away from the slit in angle but only ~10⁻⁵ away from the
//! origin in action.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::{Hamiltonian, ScalarField};
use crate::error::{Error, Result};

use super::cutoff::SmoothCutoff;

/// Ramp widths of the wedge: angular, inner (action) and outer (action).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Collars {
    pub angle: f64,
    pub inner: f64,
    pub outer: f64,
}

impl Collars {
    pub fn uniform(delta: f64) -> Self {
        Collars {
            angle: delta,
            inner: delta,
            outer: delta,
        }
    }

    pub fn min(&self) -> f64 {
        self.angle.min(self.inner).min(self.outer)
    }
}

#[derive(Clone, Debug)]
pub struct AnnulusPush {
    pub eps: f64,
    pub collars: Collars,
    cutoff: Arc<SmoothCutoff>,
}

/// `(θ ∈ [0, 2π), π|z|²)`.
pub fn angle_action(z: Complex64) -> (f64, f64) {
    let mut th = z.im.atan2(z.re);
    if th < 0.0 {
        th += TAU;
    }
    (th, PI * z.norm_sqr())
}

impl AnnulusPush {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        Self::with_collars(eps, Collars::uniform(delta))
    }

    pub fn with_collars(eps: f64, collars: Collars) -> Result<Self> {
        let Collars { angle, inner, outer } = collars;
        let ok = eps > 0.0
            && eps < 1.0
            && angle > 0.0
            && angle < PI
            && inner > 0.0
            && outer > 0.0
            && inner + outer < 1.0 + eps;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "annulus push needs 0 < ε < 1 and positive collars fitting the band, got ε = {eps}, {collars:?}"
            )));
        }
        Ok(AnnulusPush {
            eps,
            collars,
            cutoff: SmoothCutoff::shared(),
        })
    }

    /// Plateau-ramp profile equal to 1 on `[lo + dl, hi − dh]`, 0 off
    /// `[lo, hi]`; returns value and derivative.
    fn window(&self, x: f64, lo: f64, hi: f64, dl: f64, dh: f64) -> (f64, f64) {
        let (a, b) = ((x - lo) / dl, (hi - x) / dh);
        let (ua, ub) = (self.cutoff.up(a), self.cutoff.up(b));
        (
            ua * ub,
            self.cutoff.up_deriv(a) * ub / dl - ua * self.cutoff.up_deriv(b) / dh,
        )
    }

    /// `(H, ∇H, ∂_t H)` at `(t, z)`.
    pub fn eval(&self, t: f64, z: Complex64) -> (f64, Complex64, f64) {
        let zero = (0.0, Complex64::new(0.0, 0.0), 0.0);
        let r2 = z.norm_sqr();
        if r2 == 0.0 {
            return zero;
        }
        let (th, action) = angle_action(z);
        let c = self.collars;
        let (r1, dr1) = self.window(th, 0.0, TAU, c.angle, c.angle);
        let (q2, dq2) = self.window(action - t, 0.0, 1.0 + self.eps, c.inner, c.outer);
        if r1 == 0.0 || (q2 == 0.0 && dq2 == 0.0) {
            return zero;
        }
        let w = th / TAU;
        let value = -w * r1 * q2;
        let d_theta = -(r1 + th * dr1) * q2 / TAU;
        let d_action = -w * r1 * dq2;
        let grad = Complex64::new(
            -d_theta * z.im / r2 + d_action * 2.0 * PI * z.re,
            d_theta * z.re / r2 + d_action * 2.0 * PI * z.im,
        );
        (value, grad, w * r1 * dq2)
    }

    pub fn value_at(&self, t: f64, z: Complex64) -> f64 {
        self.eval(t, z).0
    }

    /// Support of `H_t` lies in `{t < π|z|² < 1 + t + ε}`.
    pub fn supported_at(&self, t: f64, z: Complex64) -> bool {
        let a = PI * z.norm_sqr() - t;
        a > 0.0 && a < 1.0 + self.eps
    }

    pub fn generator(&self) -> Hamiltonian {
        Hamiltonian::field(Arc::new(self.clone()))
    }
}

impl ScalarField for AnnulusPush {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, t: f64, z: &[Complex64]) -> f64 {
        self.eval(t, z[0]).0
    }

    fn gradient(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) {
        out[0] = self.eval(t, z[0]).1;
    }

    fn name(&self) -> String {
        format!(
            "annulus-push(ε={}, δθ={:.2e}, δin={:.2e}, δout={:.2e})",
            self.eps, self.collars.angle, self.collars.inner, self.collars.outer
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::fd_gradient;
    use crate::flows::{integrate_flow, FlowConfig};
    use crate::phase::PhasePoint;
    use crate::sampling;
    use rand::Rng;

    #[test]
    fn value_in_the_middle_of_the_wedge() {
        let (eps, t) = (0.3, 0.4);
        let h = AnnulusPush::new(eps, 0.05).unwrap();
        let action = t + 0.5 * (1.0 + eps);
        let z = Complex64::from_polar((action / PI).sqrt(), PI);
        assert!((h.value_at(t, z) + 0.5).abs() < 1e-14);
        let inner = Complex64::from_polar((0.9 * t / PI).sqrt(), 2.0);
        let outer = Complex64::from_polar(((1.0 + t + eps) / PI).sqrt(), 2.0);
        assert_eq!(h.value_at(t, inner), 0.0);
        assert_eq!(h.value_at(t, outer), 0.0);
    }

    #[test]
    fn analytic_partials_match_differences() {
        let h = AnnulusPush::new(0.3, 0.1).unwrap();
        let mut rng = sampling::rng(2);
        for _ in 0..100 {
            let t = rng.gen::<f64>() * 0.5;
            let z = sampling::disc_point(2.0, &mut rng);
            let (_, g, dt) = h.eval(t, z);
            let mut fd = [Complex64::new(0.0, 0.0)];
            fd_gradient(|w| h.value_at(t, w[0]), &[z], &mut fd);
            assert!((fd[0] - g).norm() < 1e-6, "{z}: {} vs {g}", fd[0]);
            let e = 1e-6;
            let fdt = (h.value_at(t + e, z) - h.value_at(t - e, z)) / (2.0 * e);
            assert!((fdt - dt).abs() < 1e-6);
        }
    }

    #[test]
    fn uneven_collars_match_differences() {
        let c = Collars {
            angle: 0.02,
            inner: 0.003,
            outer: 0.05,
        };
        let h = AnnulusPush::with_collars(0.2, c).unwrap();
        let mut rng = sampling::rng(4);
        for _ in 0..100 {
            let t = rng.gen::<f64>() * 0.5;
            let z = sampling::disc_point(1.8, &mut rng);
            let g = h.eval(t, z).1;
            let mut fd = [Complex64::new(0.0, 0.0)];
            fd_gradient(|w| h.value_at(t, w[0]), &[z], &mut fd);
            assert!((fd[0] - g).norm() < 1e-5 * g.norm().max(1.0));
        }
        assert!(AnnulusPush::with_collars(0.2, Collars { inner: 0.7, outer: 0.6, ..c }).is_err());
    }

    #[test]
    fn wedge_moves_at_unit_action_speed() {
        let (eps, delta, horizon) = (0.3, 0.05, 0.7);
        let g = AnnulusPush::new(eps, delta).unwrap().generator();
        let mut rng = sampling::rng(17);
        for _ in 0..300 {
            let action = delta + (1.0 + eps - 2.0 * delta) * rng.gen::<f64>();
            let th = delta + (TAU - 2.0 * delta) * rng.gen::<f64>();
            let z = Complex64::from_polar((action / PI).sqrt(), th);
            let w = integrate_flow(&g, 0.0, horizon, &PhasePoint::new(vec![z]), &FlowConfig::rk4(400))
                .unwrap()
                .coords()[0];
            let (th2, action2) = angle_action(w);
            assert!((action2 - action - horizon).abs() < 1e-3);
            assert!((th2 - th).abs() < 1e-9);
        }
    }
}
