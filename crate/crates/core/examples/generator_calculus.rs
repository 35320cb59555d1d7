//! Conjugation and composition of generators, checked against flows.

use std::f64::consts::PI;

use num_complex::Complex64;

use hofer_forge::calculus::{calculus_oracle, circle_flow, circle_generator, compose_generators, conjugate, translation_chain, OracleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // β_λ conjugates −π|z|² into −π|z − λ|², folded in closed form
    let lambda = Complex64::new(0.7, -0.4);
    let h = circle_generator(&[1.0]);
    let g = conjugate(&h, &translation_chain(0, lambda))?;
    let z = Complex64::new(0.2, 0.5);
    println!("H∘β_λ⁻¹(z) = {:.12}", g.value(0.0, &[z])?);
    println!("−π|z − λ|²  = {:.12}", -PI * (z - lambda).norm_sqr());

    // composing the action with itself doubles the generator
    let doubled = compose_generators(&h, &h, circle_flow(&[1.0]))?;
    println!("ψ_t∘ψ_t generator at z: {:.12} (expected {:.12})", doubled.value(0.3, &[z])?, -2.0 * PI * z.norm_sqr());

    let r = calculus_oracle(&OracleConfig::default())?;
    println!(
        "oracle on {} random quadratic-affine cases: composition {:.2e}, conjugation {:.2e} (tolerance {:.0e})",
        r.samples, r.composition_residual, r.conjugation_residual, r.tolerance
    );
    Ok(())
}
