//! The slit-disc generator `H^ε(z) = y·ρ((π|z|² − 1)/ε)`: its field is
//! `−∂/∂x` on the unit-area disc and vanishes off `{π|z|² < 1 + ε}`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::{Hamiltonian, ScalarField};
use crate::error::{Error, Result};

use super::cutoff::SmoothCutoff;

#[derive(Clone, Debug)]
pub struct SlitDisc {
    pub eps: f64,
    cutoff: Arc<SmoothCutoff>,
}

impl SlitDisc {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("slit-disc ε must lie in (0,1), got {eps}")));
        }
        Ok(SlitDisc {
            eps,
            cutoff: SmoothCutoff::shared(),
        })
    }

    pub fn value_at(&self, z: Complex64) -> f64 {
        z.im * self.cutoff.eval((PI * z.norm_sqr() - 1.0) / self.eps)
    }

    pub fn gradient_at(&self, z: Complex64) -> Complex64 {
        let s = (PI * z.norm_sqr() - 1.0) / self.eps;
        let r = self.cutoff.eval(s);
        let d = self.cutoff.deriv(s) * 2.0 * PI / self.eps;
        Complex64::new(z.im * d * z.re, r + z.im * d * z.im)
    }

    pub fn supported_at(&self, z: Complex64) -> bool {
        PI * z.norm_sqr() < 1.0 + self.eps
    }

    pub fn generator(&self) -> Hamiltonian {
        Hamiltonian::field(Arc::new(self.clone()))
    }
}

impl ScalarField for SlitDisc {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, _t: f64, z: &[Complex64]) -> f64 {
        self.value_at(z[0])
    }

    fn gradient(&self, _t: f64, z: &[Complex64], out: &mut [Complex64]) {
        out[0] = self.gradient_at(z[0]);
    }

    fn vanishes_at(&self, z: &[Complex64]) -> bool {
        !self.supported_at(z[0])
    }

    fn name(&self) -> String {
        format!("slit-disc(ε={})", self.eps)
    }
}
