//! Sample-based verification of a disc disjoiner at `τ = 1`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::calculus::ScalarField;
use crate::error::Result;
use crate::flows::{audit_symplectic, FlowConfig};
use crate::phase::PhasePoint;
use crate::sampling;

use super::disc::DiscDisjoiner;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DiscVerification {
    pub samples: usize,
    /// Range of `π|F(z)|²` over the unit-area disc samples.
    pub min_image_action: f64,
    pub max_image_action: f64,
    /// Target annulus `(1, 1 + A + ε)`.
    pub annulus: (f64, f64),
    pub landed: usize,
    /// Largest `|F(z) − z|` over exterior samples.
    pub exterior_displacement: f64,
    /// Largest `|∇F_τ|` over exterior samples and a few `τ`.
    pub exterior_field: f64,
    pub audit: f64,
    /// Wall time; not serialized so reports stay reproducible.
    #[serde(skip_serializing)]
    pub seconds: f64,
}

impl DiscVerification {
    pub fn passed(&self, fixed_tol: f64, audit_tol: f64) -> bool {
        self.landed == self.samples && self.exterior_displacement <= fixed_tol && self.audit < audit_tol
    }
}

/// Pushes `samples` disc points and `samples` exterior points through the
/// time-1 map; audits symplecticity on `audit_points` disc points.
pub fn verify_disc(
    disj: &DiscDisjoiner,
    samples: usize,
    audit_points: usize,
    seed: u64,
    config: &FlowConfig,
) -> Result<DiscVerification> {
    let start = Instant::now();
    let outer = 1.0 + disj.area + disj.eps;
    let mut rng = sampling::rng(seed);
    // a tenth of the disc samples sit on the boundary circle
    let rim = samples / 10;
    let mut disc: Vec<Complex64> = sampling::circle_points(1.0, rim);
    disc.extend((rim..samples).map(|_| sampling::disc_point(1.0, &mut rng)));
    let exterior: Vec<Complex64> = (0..samples)
        .map(|_| sampling::annulus_point(outer, outer + 2.0, &mut rng))
        .collect();

    let actions: Vec<f64> = disc
        .par_iter()
        .map(|&z| Ok(PI * disj.image(z, 1.0, config)?.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    let landed = actions.iter().filter(|&&a| a > 1.0 && a < outer).count();
    let exterior_displacement = exterior
        .par_iter()
        .map(|&z| Ok((disj.image(z, 1.0, config)? - z).norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut exterior_field = 0.0f64;
    let mut g = [Complex64::new(0.0, 0.0)];
    for &z in &exterior {
        for tau in [0.1, 0.3, 0.6, 0.8] {
            disj.gradient(tau, &[z], &mut g);
            exterior_field = exterior_field.max(g[0].norm());
        }
    }
    let pts: Vec<PhasePoint> = disc
        .iter()
        .skip(rim)
        .take(audit_points)
        .map(|&z| PhasePoint::new(vec![z]))
        .collect();
    let audit = audit_symplectic(
        |p| Ok(PhasePoint::new(vec![disj.image(p.coords()[0], 1.0, config)?])),
        &pts,
        1e-5,
    )?;
    Ok(DiscVerification {
        samples,
        min_image_action: actions.iter().copied().fold(f64::INFINITY, f64::min),
        max_image_action: actions.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        annulus: (1.0, outer),
        landed,
        exterior_displacement,
        exterior_field,
        audit,
        seconds: start.elapsed().as_secs_f64(),
    })
}
