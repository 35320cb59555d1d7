//! Splitting a weighted circle action into commuting summands, and the
//! nested loop built from them.

use hofer_forge::calculus::{hofer_length, LengthConfig, StandardExtremizer};
use hofer_forge::shorten::{circle_flows, k_summand_loop, weight_split};
use hofer_forge::{EllipsoidModel, SymplecticMapChain, WeightVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let weights = WeightVector::new(vec![3, 5])?;
    let split = weight_split(&weights);
    println!("columns {:?}", split.columns);
    for row in &split.rows {
        println!("  {row:?}");
    }
    let hs = split.summands(&weights)?;
    let model = EllipsoidModel::new(weights, 1.0, 0.0)?;
    let ids = vec![SymplecticMapChain::identity(); split.k()];
    let lp = k_summand_loop(&hs, &circle_flows(&hs)?, &ids, &model)?;
    let r = hofer_length(&lp, &LengthConfig::default(), &StandardExtremizer::default())?;
    println!("with identity maps the nested loop is the action itself: length {:.6}", r.total);
    Ok(())
}
