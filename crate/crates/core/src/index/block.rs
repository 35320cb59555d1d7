//! The deformation of the `k`-fold rotation of ℂ, its generator and the
//! minimum of `−H̄_t/π` by completing squares.
//!
//! With tail sums `Λ_j = λ_j + … + λ_{k−1}` the deformed loop
//! `φ_t β_{λ_{k−1}} φ_t ⋯ β_{λ₁} φ_t β_{−Λ₁}` factors as
//! `φ_t ∘ (β_{Λ_{k−1}} φ_t β_{−Λ_{k−1}}) ∘ ⋯ ∘ (β_{Λ₁} φ_t β_{−Λ₁})`,
//! a composition of conjugated rotations.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::{circle_flow, circle_generator, compose_generators, conjugate, translation_chain, Hamiltonian, QuadraticAffine};
use crate::error::{Error, Result};
use crate::phase::{PhasePoint, Primitive, SymplecticMapChain};
use crate::quadrature;

fn check_block(k: u32, lambda: &[Complex64]) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("a deformation block needs k ≥ 2, got {k}")));
    }
    if lambda.len() != k as usize - 1 {
        return Err(Error::DimensionMismatch {
            expected: k as usize - 1,
            got: lambda.len(),
        });
    }
    Ok(())
}

fn tails(lambda: &[Complex64]) -> Vec<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut out: Vec<Complex64> = lambda
        .iter()
        .rev()
        .map(|l| {
            acc += l;
            acc
        })
        .collect();
    out.reverse();
    out
}

/// The deformed loop `φ̄_t` as a map chain.
pub fn block_loop(k: u32, lambda: &[Complex64], t: f64) -> Result<SymplecticMapChain> {
    check_block(k, lambda)?;
    let total: Complex64 = lambda.iter().sum();
    // first acts first: β_{−Λ₁}, φ, β_{λ₁}, φ, …, β_{λ_{k−1}}, φ
    let mut p = vec![Primitive::translation(0, -total), Primitive::rotation(0, 1.0, t)];
    for l in lambda {
        p.push(Primitive::translation(0, *l));
        p.push(Primitive::rotation(0, 1.0, t));
    }
    Ok(SymplecticMapChain::new(p))
}

/// Generator of the deformed loop, folded from conjugations and
/// compositions of `H = −π|z|²`.
pub fn single_block_generator(k: u32, lambda: &[Complex64]) -> Result<Hamiltonian> {
    check_block(k, lambda)?;
    let h = circle_generator(&[1.0]);
    let mut acc: Option<Hamiltonian> = None;
    for big in tails(lambda) {
        let b = translation_chain(0, big);
        let g = conjugate(&h, &b)?;
        let flow = Arc::new(move |t: f64| {
            SymplecticMapChain::new(vec![
                Primitive::translation(0, -big),
                Primitive::rotation(0, 1.0, t),
                Primitive::translation(0, big),
            ])
        });
        acc = Some(match acc {
            None => g,
            Some(inner) => compose_generators(&g, &inner, flow)?,
        });
    }
    match acc {
        Some(inner) => compose_generators(&h, &inner, circle_flow(&[1.0])),
        None => Ok(h),
    }
}

/// Closed-form slice of the block generator at time `t`:
/// `Σ_{m<k} −π|e^{2πimt} z − s_m|²` with `s₀ = 0`,
/// `s_m = e^{2πit} s_{m−1} + λ_{k−m}`.
pub fn block_slice(k: u32, lambda: &[Complex64], t: f64) -> Result<QuadraticAffine> {
    check_block(k, lambda)?;
    let mut q = QuadraticAffine::diagonal(vec![-(k as f64)]);
    let rot = Complex64::from_polar(1.0, 2.0 * PI * t);
    let mut s = Complex64::new(0.0, 0.0);
    let mut back = Complex64::new(1.0, 0.0);
    for l in lambda.iter().rev() {
        s = rot * s + l;
        back *= rot.conj();
        q.linear[0] += PI * s * back;
        q.constant -= PI * s.norm_sqr();
    }
    Ok(q)
}

/// Completed square of `−q/π = Σ k_j(x_j² + y_j²) − 2x_j·blah_x − 2y_j·blah_y + rest`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MinimizerResult {
    pub argmin: PhasePoint,
    pub value: f64,
    pub blah_x: Vec<f64>,
    pub blah_y: Vec<f64>,
    pub rest: f64,
    /// `k_j`, the coefficient of `|z_j|²`.
    pub coefficients: Vec<f64>,
}

/// Minimum over ℂⁿ of `−(1/π)·q`.
pub fn minimize_quadratic(q: &QuadraticAffine) -> Result<MinimizerResult> {
    let coefficients: Vec<f64> = q.quad.iter().map(|v| -v).collect();
    if let Some((coord, &c)) = coefficients.iter().enumerate().find(|(_, &c)| !(c > 0.0)) {
        return Err(Error::NotPositiveDefinite { coord, coefficient: c });
    }
    let blah_x: Vec<f64> = q.linear.iter().map(|l| l.re / PI).collect();
    let blah_y: Vec<f64> = q.linear.iter().map(|l| l.im / PI).collect();
    let rest = -q.constant / PI;
    let mut value = rest;
    let mut z = Vec::with_capacity(q.dim());
    for j in 0..q.dim() {
        let k = coefficients[j];
        value -= (blah_x[j] * blah_x[j] + blah_y[j] * blah_y[j]) / k;
        z.push(Complex64::new(blah_x[j] / k, blah_y[j] / k));
    }
    Ok(MinimizerResult {
        argmin: PhasePoint::new(z),
        value,
        blah_x,
        blah_y,
        rest,
        coefficients,
    })
}

/// `∫₀¹ min_z −(1/π) H̄_t dt` by Simpson on `t_nodes` nodes.
pub fn block_length(k: u32, lambda: &[Complex64], t_nodes: usize) -> Result<f64> {
    check_block(k, lambda)?;
    quadrature::check_simpson_nodes(t_nodes)?;
    let mut vals = Vec::with_capacity(t_nodes);
    for t in quadrature::nodes(0.0, 1.0, t_nodes) {
        vals.push(minimize_quadratic(&block_slice(k, lambda, t)?)?.value);
    }
    Ok(quadrature::simpson(&vals, 0.0, 1.0))
}

/// `j(1 − j/k)` for `j = 1, …, k − 1`: the coefficient of `|λ_j|²`.
pub fn block_coefficients(k: u32) -> Vec<f64> {
    (1..k).map(|j| j as f64 * (1.0 - j as f64 / k as f64)).collect()
}
