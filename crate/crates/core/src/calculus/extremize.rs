//! Extremization over the closed ellipsoid `{ N ≤ α }`.
//!
//! Quadratic-affine slices are handled in closed form: after the scaling
//! `u_j = √(πk_j) z_j` the domain is the ball `‖u‖² ≤ α` and the problem is a
//! trust-region subproblem, solved by bisection on the secular equation
//! (including the degenerate "hard case"). Everything else goes through a
//! uniform grid followed by coordinate-wise golden-section refinement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase::{EllipsoidModel, PhasePoint};

use super::hamiltonian::{Hamiltonian, QuadraticAffine};

#[derive(Clone, Debug, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub point: PhasePoint,
}

/// Scaled problem data: `f(u) = c + Σ d_j|u_j|² + 2Re(conj(m_j) u_j)`.
struct Scaled {
    c: f64,
    d: Vec<f64>,
    m: Vec<Complex64>,
    s: Vec<f64>,
}

fn scaled(q: &QuadraticAffine, model: &EllipsoidModel) -> Scaled {
    let s: Vec<f64> = model
        .weights
        .as_slice()
        .iter()
        .map(|&k| (PI * k as f64).sqrt())
        .collect();
    Scaled {
        c: q.constant,
        d: q.quad.iter().zip(model.weights.as_slice()).map(|(q, &k)| q / k as f64).collect(),
        m: q.linear.iter().zip(&s).map(|(l, s)| l / s).collect(),
        s,
    }
}

impl Scaled {
    fn value(&self, u: &[Complex64]) -> f64 {
        self.c
            + u.iter()
                .enumerate()
                .map(|(j, u)| self.d[j] * u.norm_sqr() + 2.0 * (self.m[j].conj() * u).re)
                .sum::<f64>()
    }

    fn at(&self, mu: f64) -> Vec<Complex64> {
        self.m.iter().zip(&self.d).map(|(m, d)| m / (mu - d)).collect()
    }

    fn norm2(&self, mu: f64) -> f64 {
        self.m
            .iter()
            .zip(&self.d)
            .map(|(m, d)| m.norm_sqr() / ((mu - d) * (mu - d)))
            .sum()
    }

    fn to_point(&self, u: &[Complex64]) -> PhasePoint {
        PhasePoint::new(u.iter().zip(&self.s).map(|(u, s)| u / s).collect())
    }

    /// Largest root `μ > lo` of `‖u(μ)‖² = α` (the norm decreases in μ).
    fn secular(&self, lo: f64, alpha: f64) -> f64 {
        let total: f64 = self.m.iter().map(|m| m.norm_sqr()).sum();
        let mut a = lo;
        let mut b = lo + (total / alpha).sqrt() + 1.0;
        for _ in 0..300 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.norm2(mid) > alpha {
                a = mid;
            } else {
                b = mid;
            }
        }
        b
    }

    /// Hard case: the `d_max` coordinates carry no linear term and the
    /// remaining coordinates reach at most norm² `alpha` at `μ = d_max`.
    fn hard_case(&self, mu: f64, alpha: f64) -> Option<Vec<Complex64>> {
        let top: Vec<usize> = (0..self.d.len()).filter(|&j| self.d[j] == mu).collect();
        if top.is_empty() || top.iter().any(|&j| self.m[j].norm_sqr() != 0.0) {
            return None;
        }
        let mut u = vec![Complex64::new(0.0, 0.0); self.d.len()];
        let mut used = 0.0;
        for j in 0..self.d.len() {
            if self.d[j] != mu {
                u[j] = self.m[j] / (mu - self.d[j]);
                used += u[j].norm_sqr();
            }
        }
        if used > alpha {
            return None;
        }
        u[top[0]] = Complex64::new((alpha - used).sqrt(), 0.0);
        Some(u)
    }
}

fn dmax(d: &[f64]) -> f64 {
    d.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn check_dims(q: &QuadraticAffine, model: &EllipsoidModel) -> Result<()> {
    if q.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: q.dim(),
        });
    }
    Ok(())
}

/// Exact maximum of a quadratic-affine function over `{ N ≤ α }`.
pub fn quadratic_max(q: &QuadraticAffine, model: &EllipsoidModel) -> Result<Extremum> {
    check_dims(q, model)?;
    let p = scaled(q, model);
    let alpha = model.alpha;
    let dm = dmax(&p.d);
    // interior critical point
    if dm < 0.0 {
        let u = p.at(0.0);
        if u.iter().map(|u| u.norm_sqr()).sum::<f64>() <= alpha {
            return Ok(Extremum {
                value: p.value(&u),
                point: p.to_point(&u),
            });
        }
    }
    let lo = dm.max(0.0);
    let u = if dm >= 0.0 {
        p.hard_case(dm, alpha).unwrap_or_else(|| p.at(p.secular(lo, alpha)))
    } else {
        p.at(p.secular(lo, alpha))
    };
    let value = p.value(&u);
    if !value.is_finite() {
        return Err(Error::Extremizer("non-finite closed-form extremum".into()));
    }
    Ok(Extremum {
        value,
        point: p.to_point(&u),
    })
}

pub fn quadratic_min(q: &QuadraticAffine, model: &EllipsoidModel) -> Result<Extremum> {
    let e = quadratic_max(&q.scale(-1.0), model)?;
    Ok(Extremum {
        value: -e.value,
        point: e.point,
    })
}

/// Exact maximum over the ellipsoidal shell `{ N = α }`.
pub fn quadratic_max_on_boundary(q: &QuadraticAffine, model: &EllipsoidModel) -> Result<Extremum> {
    check_dims(q, model)?;
    let p = scaled(q, model);
    let alpha = model.alpha;
    let dm = dmax(&p.d);
    let u = p.hard_case(dm, alpha).unwrap_or_else(|| p.at(p.secular(dm, alpha)));
    Ok(Extremum {
        value: p.value(&u),
        point: p.to_point(&u),
    })
}

/// How a complex coordinate is sampled by the grid extremizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisMode {
    /// Cartesian `res × res` grid in `(x, y)`.
    Full,
    /// `res` radii along the positive real axis; only valid for functions
    /// invariant under rotation of this coordinate.
    Radial,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GridConfig {
    pub resolution: usize,
    /// Per-coordinate modes; missing entries default to `Full`.
    pub modes: Vec<AxisMode>,
    pub refine_sweeps: usize,
    pub refine_candidates: usize,
    /// Hard cap on the number of grid points.
    pub max_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            resolution: 201,
            modes: Vec::new(),
            refine_sweeps: 20,
            refine_candidates: 3,
            max_points: 20_000_000,
        }
    }
}

impl GridConfig {
    pub fn with_resolution(resolution: usize) -> Self {
        GridConfig {
            resolution,
            ..Default::default()
        }
    }

    pub fn radial(mut self, n: usize) -> Self {
        self.modes = vec![AxisMode::Radial; n];
        self
    }

    fn mode(&self, j: usize) -> AxisMode {
        self.modes.get(j).copied().unwrap_or(AxisMode::Full)
    }
}

/// Radially projects `z` onto `{ N ≤ α }`.
pub fn project_into(model: &EllipsoidModel, z: &mut [Complex64]) {
    let n = model.norm(z);
    if n > model.alpha {
        let s = (model.alpha / n).sqrt();
        z.iter_mut().for_each(|c| *c *= s);
    }
}

/// Enumerates the grid; points outside the ellipsoid are projected onto
/// its boundary.
pub fn grid_points(model: &EllipsoidModel, config: &GridConfig) -> Result<Vec<Vec<Complex64>>> {
    let res = config.resolution.max(2);
    let n = model.dim();
    let per: Vec<usize> = (0..n)
        .map(|j| match config.mode(j) {
            AxisMode::Full => res * res,
            AxisMode::Radial => res,
        })
        .collect();
    let total = per.iter().try_fold(1usize, |acc, &p| acc.checked_mul(p));
    let total = match total {
        Some(t) if t <= config.max_points => t,
        _ => {
            return Err(Error::Extremizer(format!(
                "grid of {per:?} points per coordinate exceeds the cap of {}",
                config.max_points
            )))
        }
    };
    let axis: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let r = model.axis_radius(j);
            let lin = |i: usize| -r + 2.0 * r * i as f64 / (res - 1) as f64;
            match config.mode(j) {
                AxisMode::Full => (0..res * res)
                    .map(|i| Complex64::new(lin(i % res), lin(i / res)))
                    .collect(),
                AxisMode::Radial => (0..res)
                    .map(|i| Complex64::new(r * i as f64 / (res - 1) as f64, 0.0))
                    .collect(),
            }
        })
        .collect();
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut z = Vec::with_capacity(n);
        for a in &axis {
            z.push(a[idx % a.len()]);
            idx /= a.len();
        }
        project_into(model, &mut z);
        out.push(z);
    }
    Ok(out)
}

/// Grid + refinement maximum of an arbitrary function on the ellipsoid.
pub fn grid_max<F>(f: F, model: &EllipsoidModel, config: &GridConfig) -> Result<Extremum>
where
    F: Fn(&[Complex64]) -> Result<f64> + Sync,
{
    let pts = grid_points(model, config)?;
    if pts.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|z| f(z))
        .collect::<Result<Vec<f64>>>()?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Extremizer("non-finite value on the grid".into()));
    }
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let spacing = 2.0
        * (0..model.dim()).map(|j| model.axis_radius(j)).fold(0.0, f64::max)
        / (config.resolution.max(2) - 1) as f64;
    let mut best = Extremum {
        value: vals[order[0]],
        point: PhasePoint::new(pts[order[0]].clone()),
    };
    for &i in order.iter().take(config.refine_candidates) {
        let refined = refine(&f, model, config, pts[i].clone(), vals[i], spacing)?;
        if refined.value > best.value {
            best = refined;
        }
    }
    Ok(best)
}

pub fn grid_min<F>(f: F, model: &EllipsoidModel, config: &GridConfig) -> Result<Extremum>
where
    F: Fn(&[Complex64]) -> Result<f64> + Sync,
{
    let e = grid_max(|z| Ok(-f(z)?), model, config)?;
    Ok(Extremum {
        value: -e.value,
        point: e.point,
    })
}

/// Coordinate-wise golden-section ascent on `w ↦ f(P(w))`, where `P` is the
/// radial projection onto the ellipsoid. Working through `P` lets the search
/// slide along the boundary, where constrained maxima usually sit.
fn refine<F>(
    f: &F,
    model: &EllipsoidModel,
    config: &GridConfig,
    start: Vec<Complex64>,
    start_value: f64,
    spacing: f64,
) -> Result<Extremum>
where
    F: Fn(&[Complex64]) -> Result<f64>,
{
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut w = start;
    let mut best = start_value;
    let mut window = spacing;
    let mut probe = w.clone();
    let mut eval = |w: &[Complex64]| -> Result<f64> {
        probe.copy_from_slice(w);
        project_into(model, &mut probe);
        f(&probe)
    };
    for _ in 0..config.refine_sweeps {
        let before = best;
        for j in 0..model.dim() {
            let dirs: &[bool] = match config.mode(j) {
                AxisMode::Full => &[false, true],
                AxisMode::Radial => &[false],
            };
            for &imag in dirs {
                let shifted = |w: &[Complex64], s: f64| {
                    let mut v = w.to_vec();
                    if imag {
                        v[j].im += s;
                    } else {
                        v[j].re += s;
                    }
                    v
                };
                let (mut a, mut b) = (-window, window);
                if !imag && config.mode(j) == AxisMode::Radial {
                    a = a.max(-w[j].re);
                }
                let mut x1 = b - golden * (b - a);
                let mut x2 = a + golden * (b - a);
                let mut f1 = eval(&shifted(&w, x1))?;
                let mut f2 = eval(&shifted(&w, x2))?;
                for _ in 0..80 {
                    if b - a < 1e-13 {
                        break;
                    }
                    if f1 < f2 {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + golden * (b - a);
                        f2 = eval(&shifted(&w, x2))?;
                    } else {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - golden * (b - a);
                        f1 = eval(&shifted(&w, x1))?;
                    }
                }
                let (s, v) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
                if v > best {
                    best = v;
                    w = shifted(&w, s);
                }
            }
        }
        if best - before < 1e-15 * best.abs().max(1.0) {
            window *= 0.5;
        }
    }
    project_into(model, &mut w);
    Ok(Extremum {
        value: best,
        point: PhasePoint::new(w),
    })
}

/// `(max, min)` of a generator slice over the closed model.
pub trait Extremizer: Sync {
    fn extrema(&self, h: &Hamiltonian, t: f64, model: &EllipsoidModel) -> Result<(f64, f64)>;
}

/// Closed form for quadratic slices, grid + refinement otherwise.
#[derive(Clone, Debug, Default)]
pub struct StandardExtremizer {
    pub grid: GridConfig,
}

impl Extremizer for StandardExtremizer {
    fn extrema(&self, h: &Hamiltonian, t: f64, model: &EllipsoidModel) -> Result<(f64, f64)> {
        if h.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: h.dim(),
            });
        }
        if let Some(q) = h.quadratic_slice(t) {
            return Ok((quadratic_max(&q, model)?.value, quadratic_min(&q, model)?.value));
        }
        let f = |z: &[Complex64]| h.value(t, z);
        Ok((grid_max(f, model, &self.grid)?.value, grid_min(f, model, &self.grid)?.value))
    }
}
