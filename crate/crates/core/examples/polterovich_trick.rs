//! The Polterovich trick: φ_t b φ_t b⁻¹ for φ the half-speed action. A
//! translation b lowers the maximum of the generator.

use num_complex::Complex64;

use hofer_forge::calculus::{circle_generator, translation_chain, verify_loop_closure, Extremizer, StandardExtremizer};
use hofer_forge::flows::FlowConfig;
use hofer_forge::shorten::polterovich_loop;
use hofer_forge::{EllipsoidModel, WeightVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = EllipsoidModel::new(WeightVector::new(vec![1])?, 2.0, 0.0)?;
    let h = circle_generator(&[2.0]);
    let ex = StandardExtremizer::default();
    for shift in [0.0, 0.2, 0.4] {
        let lp = polterovich_loop(&h, &translation_chain(0, Complex64::new(shift, 0.0)), &model)?;
        let worst = (0..=64)
            .map(|i| ex.extrema(&lp.generator, i as f64 / 64.0, &model).map(|e| e.0))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let residual = verify_loop_closure(&lp, 20, &FlowConfig::rk4(2000), 0)?;
        println!("shift {shift:.1}: max_t max H̄_t = {worst:+.6}, closure residual {residual:.1e}");
    }
    Ok(())
}
