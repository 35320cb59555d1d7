//! Randomized oracle for the generator algebra: the integrated flow of a
//! composed (or conjugated) generator against the composition (or
//! conjugation) of the individual flows.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::flows::{self, FlowConfig};
use crate::phase::{PhasePoint, Primitive, SymplecticMapChain};
use crate::sampling;

use super::algebra::{compose_generators, conjugate};
use super::hamiltonian::{ChainFn, Hamiltonian, QuadraticAffine};

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct OracleConfig {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub flow: FlowConfig,
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            dim: 2,
            samples: 100,
            seed: 0,
            flow: FlowConfig::rk4(2000),
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct OracleReport {
    pub samples: usize,
    /// `max |ψ^{K#F}_1(p) − ψ^K_1 ψ^F_1(p)|`.
    pub composition_residual: f64,
    /// `max |ψ^{H∘b⁻¹}_1(p) − b ψ^H_1 b⁻¹(p)|`.
    pub conjugation_residual: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.composition_residual <= self.tolerance && self.conjugation_residual <= self.tolerance
    }
}

/// A shifted rotation generator `c₀ + Σ q_j π|z_j − c_j|²` with its exact
/// flow `T_c ∘ R ∘ T_{−c}`.
struct ShiftedRotation {
    q: Vec<f64>,
    centre: Vec<Complex64>,
    constant: f64,
}

impl ShiftedRotation {
    fn random<R: Rng>(dim: usize, rng: &mut R) -> Self {
        ShiftedRotation {
            q: (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            centre: (0..dim).map(|_| sampling::disc_point(0.5, rng)).collect(),
            constant: rng.gen_range(-1.0..1.0),
        }
    }

    fn generator(&self) -> Hamiltonian {
        let mut g = QuadraticAffine::zero(self.q.len());
        g.constant = self.constant;
        for (j, (&q, &c)) in self.q.iter().zip(&self.centre).enumerate() {
            g.quad[j] = q;
            g.linear[j] = -q * PI * c;
            g.constant += q * PI * c.norm_sqr();
        }
        Hamiltonian::Quadratic(g)
    }

    fn flow(&self) -> ChainFn {
        let (q, centre) = (self.q.clone(), self.centre.clone());
        Arc::new(move |t| {
            let mut prims = Vec::new();
            for (j, (&q, &c)) in q.iter().zip(&centre).enumerate() {
                prims.push(Primitive::translation(j, -c));
                prims.push(Primitive::rotation(j, -q, t));
                prims.push(Primitive::translation(j, c));
            }
            SymplecticMapChain::new(prims)
        })
    }
}

fn random_affine<R: Rng>(dim: usize, rng: &mut R) -> Hamiltonian {
    let mut g = QuadraticAffine::zero(dim);
    g.constant = rng.gen_range(-1.0..1.0);
    for j in 0..dim {
        g.quad[j] = rng.gen_range(-2.0..2.0);
        g.linear[j] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    Hamiltonian::Quadratic(g)
}

fn random_rigid<R: Rng>(dim: usize, rng: &mut R) -> SymplecticMapChain {
    let mut prims = Vec::new();
    for j in 0..dim {
        prims.push(Primitive::rotation(j, rng.gen_range(-1.0..1.0), 1.0));
        prims.push(Primitive::translation(j, sampling::disc_point(1.0, rng)));
    }
    SymplecticMapChain::new(prims)
}

/// Draws one random instance per sample point and measures both residuals.
pub fn calculus_oracle(config: &OracleConfig) -> Result<OracleReport> {
    config.flow.validate()?;
    let mut rng = sampling::rng(config.seed);
    let cases: Vec<_> = (0..config.samples)
        .map(|_| {
            let k = ShiftedRotation::random(config.dim, &mut rng);
            let f = random_affine(config.dim, &mut rng);
            let h = random_affine(config.dim, &mut rng);
            let b = random_rigid(config.dim, &mut rng);
            let p = PhasePoint::new((0..config.dim).map(|_| sampling::disc_point(1.0, &mut rng)).collect());
            (k, f, h, b, p)
        })
        .collect();
    let residuals = cases
        .par_iter()
        .map(|(k, f, h, b, p)| {
            let cfg = &config.flow;
            let composed = compose_generators(&k.generator(), f, k.flow())?;
            let direct = flows::integrate_flow(&composed, 0.0, 1.0, p, cfg)?;
            let after_f = flows::integrate_flow(f, 0.0, 1.0, p, cfg)?;
            let chained = (k.flow())(1.0).apply(&after_f)?;
            let comp = direct.distance(&chained);

            let conj = conjugate(h, b)?;
            let direct = flows::integrate_flow(&conj, 0.0, 1.0, p, cfg)?;
            let pulled = b.inverse().apply(p)?;
            let moved = flows::integrate_flow(h, 0.0, 1.0, &pulled, cfg)?;
            let chained = b.apply(&moved)?;
            Ok((comp, direct.distance(&chained)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport {
        samples: config.samples,
        composition_residual: residuals.iter().map(|r| r.0).fold(0.0, f64::max),
        conjugation_residual: residuals.iter().map(|r| r.1).fold(0.0, f64::max),
        tolerance: config.tolerance,
    })
}
