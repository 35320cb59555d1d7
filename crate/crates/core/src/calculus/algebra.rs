//! Conjugation, composition and reparametrization of generators.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::phase::{Primitive, SymplecticMapChain};

use super::hamiltonian::{ChainFn, ChainMap, Hamiltonian, QuadraticAffine, TimeMapFn};

/// Generator of `b ψ_t b⁻¹`, i.e. `H_t ∘ b⁻¹`. Quadratic generators and
/// rigid chains are folded in closed form.
pub fn conjugate(h: &Hamiltonian, b: &SymplecticMapChain) -> Result<Hamiltonian> {
    b.check_dim(h.dim())?;
    if b.is_empty() {
        return Ok(h.clone());
    }
    let inv = b.inverse();
    if let Hamiltonian::Quadratic(q) = h {
        if let Some(p) = q.pullback_chain(&inv) {
            return Ok(Hamiltonian::Quadratic(p));
        }
    }
    if let Hamiltonian::TimedQuadratic { dim, slice } = h {
        if inv.is_rigid() {
            let slice = slice.clone();
            return Ok(Hamiltonian::TimedQuadratic {
                dim: *dim,
                slice: Arc::new(move |t| {
                    slice(t)
                        .pullback_chain(&inv)
                        .expect("rigid chain")
                }),
            });
        }
    }
    Ok(Hamiltonian::Pullback {
        inner: Box::new(h.clone()),
        map: ChainMap::Fixed(inv),
    })
}

/// Generator of `ψ^K_t ∘ ψ^F_t`: `K_t + F_t ∘ (ψ^K_t)⁻¹`.
/// `flow_k(t)` must be the time-`t` map of `K`.
pub fn compose_generators(k: &Hamiltonian, f: &Hamiltonian, flow_k: ChainFn) -> Result<Hamiltonian> {
    if k.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            got: f.dim(),
        });
    }
    let inverse_flow: ChainFn = Arc::new(move |t| flow_k(t).inverse());
    Hamiltonian::sum(vec![
        k.clone(),
        Hamiltonian::Pullback {
            inner: Box::new(f.clone()),
            map: ChainMap::Timed(inverse_flow),
        },
    ])
}

/// Generator `H_{t(τ)} · dt/dτ` of `τ ↦ ψ_{t(τ)}`.
pub fn reparametrize(h: &Hamiltonian, time_map: TimeMapFn) -> Hamiltonian {
    Hamiltonian::Reparametrized {
        inner: Box::new(h.clone()),
        time_map,
    }
}

/// `−Σ s_j π|z_j|²`, the generator of the linear action with speeds `s_j`.
pub fn circle_generator(speeds: &[f64]) -> Hamiltonian {
    Hamiltonian::Quadratic(QuadraticAffine::diagonal(speeds.iter().map(|s| -s).collect()))
}

/// `t ↦` time-`t` map of [`circle_generator`].
pub fn circle_flow(speeds: &[f64]) -> ChainFn {
    let speeds = speeds.to_vec();
    Arc::new(move |t| SymplecticMapChain::circle_action(&speeds, t))
}

/// Rotation speeds of a quadratic circle generator (`q_j = −s_j`, no
/// linear part); `None` if the generator is not of that form.
pub fn circle_speeds(h: &Hamiltonian) -> Option<Vec<f64>> {
    match h {
        Hamiltonian::Quadratic(q) if q.linear.iter().all(|l| l.norm_sqr() == 0.0) => {
            Some(q.quad.iter().map(|v| -v).collect())
        }
        _ => None,
    }
}

/// Single-primitive helpers.
pub fn translation_chain(coord: usize, offset: num_complex::Complex64) -> SymplecticMapChain {
    SymplecticMapChain::new(vec![Primitive::translation(coord, offset)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    use crate::phase::PhasePoint;
    use crate::sampling;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn conjugating_the_rotation_generator_by_a_translation() {
        let h = circle_generator(&[1.0]);
        let lambda = c(0.7, -0.4);
        let g = conjugate(&h, &translation_chain(0, lambda)).unwrap();
        assert!(matches!(g, Hamiltonian::Quadratic(_)));
        for z in [c(0.0, 0.0), c(1.0, -2.0), c(0.3, 0.3)] {
            let expanded = -PI * z.norm_sqr() + 2.0 * PI * (lambda.conj() * z).re
                - PI * lambda.norm_sqr();
            assert!((g.value(0.0, &[z]).unwrap() - expanded).abs() < 1e-12);
            assert!((g.value(0.0, &[z]).unwrap() + PI * (z - lambda).norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_conjugation_is_a_no_op() {
        let h = circle_generator(&[2.0, 1.0]);
        let g = conjugate(&h, &SymplecticMapChain::identity()).unwrap();
        let z = [c(0.1, 0.2), c(-0.3, 0.5)];
        assert_eq!(h.value(0.3, &z).unwrap(), g.value(0.3, &z).unwrap());
    }

    #[test]
    fn rotation_conjugation_leaves_invariant_generator_unchanged() {
        let h = circle_generator(&[1.0]);
        let g = conjugate(&h, &SymplecticMapChain::new(vec![Primitive::rotation(0, 1.0, 0.3)])).unwrap();
        let mut r = sampling::rng(11);
        for _ in 0..100 {
            let z = [sampling::disc_point(3.0, &mut r)];
            assert!((h.value(0.0, &z).unwrap() - g.value(0.0, &z).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn composing_rotation_generators_doubles_them() {
        let h = circle_generator(&[1.0]);
        let k = compose_generators(&h, &h, circle_flow(&[1.0])).unwrap();
        let mut r = sampling::rng(5);
        for _ in 0..100 {
            let z = [sampling::disc_point(2.0, &mut r)];
            let t: f64 = rand::Rng::gen(&mut r);
            let expect = -2.0 * PI * z[0].norm_sqr();
            assert!((k.value(t, &z).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn composing_with_zero_returns_k() {
        let k = circle_generator(&[3.0]);
        let g = compose_generators(&k, &Hamiltonian::zero(1), circle_flow(&[3.0])).unwrap();
        let z = [c(0.4, -0.2)];
        assert!((g.value(0.5, &z).unwrap() - k.value(0.5, &z).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn composed_conjugated_rotation_matches_closed_form() {
        // φ_{at} ∘ β_λ φ_{bt} β_{−λ} is generated by aH + bH β_{−λ} φ_{−at}
        let (a, b) = (2.0, 1.0);
        let lambda = c(0.6, 0.25);
        let h = circle_generator(&[1.0]);
        let inner = conjugate(&h.clone().scaled(b), &translation_chain(0, lambda)).unwrap();
        let g = compose_generators(&h.clone().scaled(a), &inner, circle_flow(&[a])).unwrap();
        let mut r = sampling::rng(3);
        for _ in 0..100 {
            let z = sampling::disc_point(2.0, &mut r);
            let t: f64 = rand::Rng::gen(&mut r);
            let rot_back = z * Complex64::from_polar(1.0, 2.0 * PI * a * t);
            let expect = -a * PI * z.norm_sqr() - b * PI * (rot_back - lambda).norm_sqr();
            assert!((g.value(t, &[z]).unwrap() - expect).abs() < 1e-10);
            let s = g.quadratic_slice(t).unwrap();
            assert!((s.value(&[z]) - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn reparametrization_scales_by_the_derivative() {
        let h = Hamiltonian::constant(1, 1.0);
        let g = reparametrize(&h, Arc::new(|tau| (tau * tau, 2.0 * tau)));
        let z = [c(0.0, 0.0)];
        let integral =
            crate::quadrature::simpson_fn(|t| g.value(t, &z).unwrap(), 0.0, 1.0, 257);
        assert!((integral - 1.0).abs() < 1e-12);
        assert!((g.value(0.25, &z).unwrap() - 0.5).abs() < 1e-15);

        let same = reparametrize(&h, Arc::new(|tau| (tau, 1.0)));
        assert_eq!(same.value(0.3, &z).unwrap(), 1.0);
        let _ = PhasePoint::zeros(1);
    }

    #[test]
    fn doubling_time_doubles_the_circle_generator() {
        let h = circle_generator(&[1.0]);
        let g = reparametrize(&h, Arc::new(|tau| (2.0 * tau, 2.0)));
        let z = [c(0.5, 0.1)];
        assert!((g.value(0.4, &z).unwrap() - 2.0 * h.value(0.0, &z).unwrap()).abs() < 1e-15);
    }
}
