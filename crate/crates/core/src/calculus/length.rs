//! Loop generators, the positive/negative Hofer length estimator and the
//! loop-closure check.
//!
//! On the noncompact model the lengths are measured against a single
//! reference level `h_ref` (default 0): `ℓ₊ = ∫ (max H_t − h_ref) dt` and
//! `ℓ₋ = ∫ (h_ref − min H_t) dt`, so `ℓ₊ + ℓ₋` is the Hofer length for
//! any choice of `h_ref` and differences of `ℓ±` between two loops that
//! agree off a compact set do not depend on it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flows::{self, FlowConfig};
use crate::phase::EllipsoidModel;
use crate::quadrature;
use crate::sampling;

use super::extremize::Extremizer;
use super::hamiltonian::Hamiltonian;

#[derive(Clone, Debug)]
pub struct LoopGenerator {
    pub generator: Hamiltonian,
    pub domain: EllipsoidModel,
}

impl LoopGenerator {
    pub fn new(generator: Hamiltonian, domain: EllipsoidModel) -> Result<Self> {
        if generator.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: generator.dim(),
            });
        }
        Ok(LoopGenerator { generator, domain })
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HoferReport {
    pub ell_plus: f64,
    pub ell_minus: f64,
    pub total: f64,
    pub quad_error: f64,
    pub reference: f64,
    /// `(t, max H_t, min H_t)` at the quadrature nodes.
    pub profile: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LengthConfig {
    pub t_nodes: usize,
    pub reference: f64,
}

impl Default for LengthConfig {
    fn default() -> Self {
        LengthConfig {
            t_nodes: 257,
            reference: 0.0,
        }
    }
}

/// Integrates `(max, min)` profiles sampled on `2·tNodes − 1` nodes.
pub fn report_from_profile(
    fine: &[(f64, f64, f64)],
    reference: f64,
) -> Result<HoferReport> {
    let plus: Vec<f64> = fine.iter().map(|p| p.1 - reference).collect();
    let minus: Vec<f64> = fine.iter().map(|p| reference - p.2).collect();
    let (a, b) = (fine[0].0, fine[fine.len() - 1].0);
    let coarse_plus: Vec<f64> = plus.iter().step_by(2).copied().collect();
    let coarse_minus: Vec<f64> = minus.iter().step_by(2).copied().collect();
    let ell_plus = quadrature::simpson(&coarse_plus, a, b);
    let ell_minus = quadrature::simpson(&coarse_minus, a, b);
    let err_plus = (quadrature::simpson(&plus, a, b) - ell_plus).abs() / 15.0;
    let err_minus = (quadrature::simpson(&minus, a, b) - ell_minus).abs() / 15.0;
    if !(ell_plus.is_finite() && ell_minus.is_finite()) {
        return Err(Error::Extremizer("non-finite length".into()));
    }
    Ok(HoferReport {
        ell_plus,
        ell_minus,
        total: ell_plus + ell_minus,
        quad_error: err_plus + err_minus,
        reference,
        profile: fine.iter().step_by(2).copied().collect(),
    })
}

/// `ℓ₊`, `ℓ₋` and their sum by composite Simpson over `t_nodes` nodes, with
/// a Richardson error estimate against `2·t_nodes − 1` nodes.
pub fn hofer_length(
    lp: &LoopGenerator,
    config: &LengthConfig,
    extremizer: &dyn Extremizer,
) -> Result<HoferReport> {
    quadrature::check_simpson_nodes(config.t_nodes)?;
    let fine_n = 2 * config.t_nodes - 1;
    let ts = quadrature::nodes(0.0, 1.0, fine_n);
    let fine: Vec<(f64, f64, f64)> = ts
        .par_iter()
        .map(|&t| {
            let (hi, lo) = extremizer.extrema(&lp.generator, t, &lp.domain)?;
            if !(hi.is_finite() && lo.is_finite()) {
                return Err(Error::Extremizer(format!("non-finite extremum at t = {t}")));
            }
            Ok((t, hi, lo))
        })
        .collect::<Result<Vec<_>>>()?;
    report_from_profile(&fine, config.reference)
}

/// Max distance between sampled domain points and their images under the
/// integrated time-1 flow.
pub fn verify_loop_closure(
    lp: &LoopGenerator,
    samples: usize,
    config: &FlowConfig,
    seed: u64,
) -> Result<f64> {
    let pts = sampling::ellipsoid_points(&lp.domain, samples, seed);
    let res: Vec<f64> = pts
        .par_iter()
        .map(|p| {
            let q = flows::integrate_flow(&lp.generator, 0.0, 1.0, p, config)?;
            Ok(p.distance(&q))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{circle_generator, extremize::StandardExtremizer, QuadraticAffine};
    use crate::phase::WeightVector;

    fn model(k: Vec<u32>) -> EllipsoidModel {
        EllipsoidModel::new(WeightVector::new(k).unwrap(), 1.0, 0.0).unwrap()
    }

    #[test]
    fn circle_action_has_length_alpha() {
        let lp = LoopGenerator::new(circle_generator(&[3.0, 1.0]), model(vec![3, 1])).unwrap();
        let r = hofer_length(&lp, &LengthConfig::default(), &StandardExtremizer::default()).unwrap();
        assert!((r.total - 1.0).abs() < 1e-12);
        assert!(r.ell_plus.abs() < 1e-12);
        assert!(r.quad_error < 1e-14);
    }

    #[test]
    fn zero_generator_has_zero_length() {
        let lp = LoopGenerator::new(Hamiltonian::zero(2), model(vec![3, 1])).unwrap();
        let r = hofer_length(&lp, &LengthConfig::default(), &StandardExtremizer::default()).unwrap();
        assert_eq!((r.ell_plus, r.ell_minus, r.total), (0.0, 0.0, 0.0));
    }

    #[test]
    fn even_node_count_is_rejected() {
        let lp = LoopGenerator::new(Hamiltonian::zero(1), model(vec![1])).unwrap();
        let cfg = LengthConfig {
            t_nodes: 10,
            ..Default::default()
        };
        assert!(hofer_length(&lp, &cfg, &StandardExtremizer::default()).is_err());
    }

    #[test]
    fn circle_action_closes_and_translation_does_not() {
        let lp = LoopGenerator::new(circle_generator(&[2.0, 1.0]), model(vec![2, 1])).unwrap();
        let r = verify_loop_closure(&lp, 20, &FlowConfig::rk4(10_000), 1).unwrap();
        assert!(r < 1e-6, "residual {r}");

        let mut q = QuadraticAffine::zero(1);
        q.linear[0] = num_complex::Complex64::new(0.0, 0.5);
        let lp = LoopGenerator::new(Hamiltonian::Quadratic(q), model(vec![1])).unwrap();
        let r = verify_loop_closure(&lp, 20, &FlowConfig::rk4(100), 1).unwrap();
        assert!(r > 0.1 && (r - 1.0).abs() < 1e-9);
    }
}
