//! Hofer length of the weighted circle action on an ellipsoid model, and
//! its time-1 closure.
//!
//!     cargo run --example circle_action_length -- 3,1 1.0

use hofer_forge::calculus::{
    circle_generator, hofer_length, verify_loop_closure, LengthConfig, LoopGenerator, StandardExtremizer,
};
use hofer_forge::flows::FlowConfig;
use hofer_forge::{EllipsoidModel, WeightVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let weights: Vec<u32> = args
        .next()
        .unwrap_or_else(|| "3,1".into())
        .split(',')
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let alpha: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(1.0);

    let speeds: Vec<f64> = weights.iter().map(|&k| k as f64).collect();
    let model = EllipsoidModel::new(WeightVector::new(weights)?, alpha, 0.0)?;
    let lp = LoopGenerator::new(circle_generator(&speeds), model)?;
    let r = hofer_length(&lp, &LengthConfig::default(), &StandardExtremizer::default())?;
    println!("ℓ₊ = {:.6}  ℓ₋ = {:.6}  total = {:.6}  (α = {alpha})", r.ell_plus, r.ell_minus, r.total);
    println!("Simpson error estimate {:.2e}", r.quad_error);
    let residual = verify_loop_closure(&lp, 50, &FlowConfig::rk4(4000), 0)?;
    println!("time-1 closure residual on 50 samples: {residual:.2e}");
    Ok(())
}
