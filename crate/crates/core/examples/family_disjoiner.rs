//! The fibrewise disjoiner behind the shortening theorem: on ℂ × W it
//! pushes {π|z₁|² ≤ A₁} off {π|z₁|² ≤ A₂(N)} while preserving N.

use std::f64::consts::PI;

use hofer_forge::disjoin::{FamilyDisjoinSpec, FamilyDisjoiner};
use hofer_forge::flows::FlowConfig;
use hofer_forge::{sampling, EllipsoidModel, WeightVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = EllipsoidModel::new(WeightVector::new(vec![3, 1])?, 1.0, 0.0)?;
    // k₁ = 3 split as a + b = 1 + 2, shortening s = (ab/k₁²)·d with d = 0.9
    let s = 2.0 / 9.0 * 0.9;
    let probe = FamilyDisjoinSpec::theorem(model.clone(), 0, 1, 2, s, 1.0)?;
    let eps_bar = 0.8 * FamilyDisjoinSpec::slack_bound(&model, 0, probe.a1, probe.a2);
    let spec = FamilyDisjoinSpec::theorem(model, 0, 1, 2, s, eps_bar)?;
    println!("A₁ = {:.4}, A₂(N) = {:.4} {:+.4}·N, ε̄ = {eps_bar:.4}", spec.a1, spec.a2.intercept, spec.a2.slope);

    let flow = FlowConfig::rk4(2000);
    let fam = FamilyDisjoiner::new(spec.clone(), &flow)?;
    let mut rng = sampling::rng(1);
    let (mut worst_gap, mut worst_n) = (f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let z1 = sampling::disc_point(spec.a1, &mut rng);
        let z2 = sampling::disc_point(0.05, &mut rng);
        let z = [z1, z2];
        let n = fam.fibre_norm(&z);
        let w = fam.image(&z, 1.0, &flow)?;
        worst_gap = worst_gap.min(PI * w[0].norm_sqr() - spec.a2.at(n));
        worst_n = worst_n.max((fam.fibre_norm(&w) - n).abs());
    }
    println!("min π|D₁z₁|² − A₂(N) over 100 samples: {worst_gap:.4e} (positive = disjoint)");
    println!("max |ΔN|: {worst_n:.2e}");
    Ok(())
}
