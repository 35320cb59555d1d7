//! The shortening theorem, measured: ℓ₊ along the deformation path of the
//! weighted circle action, with every consistency check.
//!
//!     cargo run --release --example theorem_shortening -- 3,1 0.9

use hofer_forge::shorten::{theorem_isolated_pipeline, PipelineConfig, ShorteningScenario};
use hofer_forge::{EllipsoidModel, WeightVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let weights: Vec<u32> = args
        .next()
        .unwrap_or_else(|| "3,1".into())
        .split(',')
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let d: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.9);

    let model = EllipsoidModel::new(WeightVector::new(weights)?, 1.0, 0.0)?;
    let scenario = ShorteningScenario::canonical(model, d)?;
    println!("k₁ = {} = {} + {}, target s = {:.4}", scenario.k1(), scenario.a, scenario.b, scenario.shortening());
    let r = theorem_isolated_pipeline(&scenario, &PipelineConfig::default())?.report;
    for p in &r.path {
        println!("u = {:.1}  ℓ₊ = {:+.6}  ℓ₋ = {:.6}", p.u, p.report.ell_plus, p.report.ell_minus);
    }
    println!("drop ℓ₊(0) − ℓ₊(1) = {:.6}", r.drop);
    for c in &r.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(())
}
