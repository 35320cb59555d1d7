//! The disc disjoiner: the unit-area disc is carried into the annulus
//! A < π|z|² < 1 + A + ε while the exterior stays fixed.
//!
//!     cargo run --release --example disc_disjoiner -- 1.0 0.1

use hofer_forge::disjoin::{audit_flow, default_flow, verify_disc, DiscDisjoiner, DisjoinSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let area: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(1.0);
    let eps: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.1);

    let d = DiscDisjoiner::new(&DisjoinSpec::new(area, eps), &default_flow())?;
    println!("collars {:?}, slit-stage time {}", d.collars, d.stage_time);
    let v = verify_disc(&d, 1000, 50, 0, &audit_flow())?;
    println!(
        "{}/{} disc samples land in ({}, {}); image actions [{:.5}, {:.5}]",
        v.landed, v.samples, v.annulus.0, v.annulus.1, v.min_image_action, v.max_image_action
    );
    println!("exterior displacement {:.1e}, area audit {:.2e}, {:.1}s", v.exterior_displacement, v.audit, v.seconds);
    Ok(())
}
