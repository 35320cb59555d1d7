//! Second variation of the loop length at the circle action: block
//! minima in closed form and the numeric Hessian against j(1 − j/k).

use num_complex::Complex64;

use hofer_forge::index::{block_length, block_slice, d_radius, hessian_at_origin, minimize_quadratic};
use hofer_forge::WeightVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = Complex64::new(1.0, 0.0);
    let m = minimize_quadratic(&block_slice(2, &[one], 0.0)?)?;
    println!("k = 2, λ = 1: block minimum {:.12} (b(1 − b/k)|λ|² = 0.5)", m.value);
    println!("k = 3, λ = μ = 1: block length {:.8}", block_length(3, &[one, one], 257)?);

    for w in [vec![3], vec![2, 2], vec![3, 1]] {
        let weights = WeightVector::new(w)?;
        let r = hessian_at_origin(&weights, 1e-3, 257)?;
        println!("weights {weights}:");
        for ((label, num), exact) in r.labels.iter().zip(&r.numeric_coefficients).zip(&r.analytic_coefficients) {
            println!("  {label}: {num:.8} (j(1 − j/k) = {exact:.8})");
        }
        println!(
            "  max rel. deviation {:.1e}, max off-diagonal {:.1e}, min eigenvalue {:?}",
            r.max_relative_deviation, r.max_off_diagonal, r.min_eigenvalue
        );
        println!("  D-neighbourhood radius at ε̄ = 0.25: {:.4e}", d_radius(&weights, 0.25, 129, 8, 0)?);
    }
    Ok(())
}
