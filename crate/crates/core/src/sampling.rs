//! Seeded sampling of points in ellipsoids, discs and annuli.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::phase::{EllipsoidModel, PhasePoint};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the unit ball of ℝ^{2n}, as n complex numbers.
fn unit_ball<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = rng.gen::<f64>().powf(1.0 / (2 * n) as f64);
    for x in &mut v {
        *x *= r / norm;
    }
    v.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Uniform (Liouville-measure) sample of the closed ellipsoid `N ≤ α`.
pub fn ellipsoid_point<R: Rng>(model: &EllipsoidModel, rng: &mut R) -> PhasePoint {
    let u = unit_ball(model.dim(), rng);
    PhasePoint::new(
        u.into_iter()
            .enumerate()
            .map(|(j, u)| u * model.axis_radius(j))
            .collect(),
    )
}

pub fn ellipsoid_points(model: &EllipsoidModel, count: usize, seed: u64) -> Vec<PhasePoint> {
    let mut r = rng(seed);
    (0..count).map(|_| ellipsoid_point(model, &mut r)).collect()
}

/// Uniform sample of `{ a ≤ π|z|² ≤ b }` ⊂ ℂ (area-uniform).
pub fn annulus_point<R: Rng>(a: f64, b: f64, rng: &mut R) -> Complex64 {
    let action = a + (b - a) * rng.gen::<f64>();
    let theta = 2.0 * PI * rng.gen::<f64>();
    Complex64::from_polar((action / PI).sqrt(), theta)
}

/// Uniform sample of the disc `{ π|z|² ≤ area }`.
pub fn disc_point<R: Rng>(area: f64, rng: &mut R) -> Complex64 {
    annulus_point(0.0, area, rng)
}

/// `count` equally spaced points on the circle `π|z|² = area`.
pub fn circle_points(area: f64, count: usize) -> Vec<Complex64> {
    let r = (area / PI).sqrt();
    (0..count)
        .map(|i| Complex64::from_polar(r, 2.0 * PI * i as f64 / count as f64))
        .collect()
}
