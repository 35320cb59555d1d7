//! Phase-space types and exactly symplectic primitives.
//!
//! Points of ℂⁿ are stored as complex numbers, i.e. real pairs `(x_j, y_j)`,
//! and the symplectic form is `ω₀ = Σ dx_j ∧ dy_j`. With this normalization
//! `π|z|²` is the area of the disc of radius `|z|`, so the momentum map of
//! the standard circle action on a coordinate is `−π|z|²`.
//!
//! Rotation sign: a rotation with positive speed `s` acts by
//! `z ↦ e^{−2πist} z` (clockwise). This is the flow generated by `−sπ|z|²`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::Hamiltonian;
use crate::error::{Error, Result};
use crate::flows::{self, FlowConfig};

/// A point of ℂⁿ.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PhasePoint(Vec<Complex64>);

impl PhasePoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        PhasePoint(coords)
    }

    pub fn zeros(n: usize) -> Self {
        PhasePoint(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Builds a point from interleaved real coordinates `(x₁, y₁, x₂, y₂, …)`.
    pub fn from_reals(reals: &[f64]) -> Self {
        assert!(reals.len() % 2 == 0, "odd number of real coordinates");
        PhasePoint(
            reals
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Euclidean distance in ℝ²ⁿ.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// The action variable `π|z_j|²`.
    pub fn action(&self, j: usize) -> f64 {
        PI * self.0[j].norm_sqr()
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl From<Vec<Complex64>> for PhasePoint {
    fn from(v: Vec<Complex64>) -> Self {
        PhasePoint(v)
    }
}

/// Absolute values `k₁,…,k_n` of the isotropy weights at the maximum.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct WeightVector(Vec<u32>);

impl WeightVector {
    pub fn new(k: Vec<u32>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::InvalidParameter("weight vector is empty".into()));
        }
        if let Some(j) = k.iter().position(|&w| w == 0) {
            return Err(Error::InvalidParameter(format!(
                "weight {j} is zero; weights must be ≥ 1"
            )));
        }
        Ok(WeightVector(k))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The equivariant Darboux chart `{ π Σ k_j|z_j|² < α }` around an isolated
/// maximum, carrying the momentum map `h_max − N(z)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EllipsoidModel {
    pub weights: WeightVector,
    pub alpha: f64,
    pub h_max: f64,
}

impl EllipsoidModel {
    pub fn new(weights: WeightVector, alpha: f64, h_max: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if !h_max.is_finite() {
            return Err(Error::InvalidParameter("h_max must be finite".into()));
        }
        Ok(EllipsoidModel {
            weights,
            alpha,
            h_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `N(z) = π Σ k_j |z_j|²`.
    pub fn norm(&self, z: &[Complex64]) -> f64 {
        z.iter()
            .zip(self.weights.as_slice())
            .map(|(z, &k)| k as f64 * z.norm_sqr())
            .sum::<f64>()
            * PI
    }

    pub fn contains(&self, p: &PhasePoint) -> bool {
        self.norm(p.coords()) < self.alpha
    }

    pub fn contains_closed(&self, p: &PhasePoint) -> bool {
        self.norm(p.coords()) <= self.alpha
    }

    /// Radius of the ellipsoid along coordinate `j`.
    pub fn axis_radius(&self, j: usize) -> f64 {
        (self.alpha / (PI * self.weights.get(j) as f64)).sqrt()
    }
}

/// `h_max − π Σ k_j|z_j|²`.
pub fn momentum(model: &EllipsoidModel, p: &PhasePoint) -> Result<f64> {
    p.check_dim(model.dim())?;
    Ok(model.h_max - model.norm(p.coords()))
}

/// A numerically integrated Hamiltonian flow from `t0` to `t1`.
#[derive(Clone)]
pub struct IntegratedFlow {
    pub generator: Arc<Hamiltonian>,
    pub t0: f64,
    pub t1: f64,
    pub config: FlowConfig,
}

impl fmt::Debug for IntegratedFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegratedFlow")
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum Primitive {
    /// `z_j ↦ e^{−2πi·speed·time} z_j`.
    Rotation { coord: usize, speed: f64, time: f64 },
    /// `z_j ↦ z_j + offset`.
    Translation { coord: usize, offset: Complex64 },
    IntegratedFlow(IntegratedFlow),
}

impl Primitive {
    pub fn rotation(coord: usize, speed: f64, time: f64) -> Self {
        Primitive::Rotation { coord, speed, time }
    }

    pub fn translation(coord: usize, offset: Complex64) -> Self {
        Primitive::Translation { coord, offset }
    }

    pub fn flow(generator: Arc<Hamiltonian>, t0: f64, t1: f64, config: FlowConfig) -> Self {
        Primitive::IntegratedFlow(IntegratedFlow {
            generator,
            t0,
            t1,
            config,
        })
    }

    pub fn is_rigid(&self) -> bool {
        !matches!(self, Primitive::IntegratedFlow(_))
    }

    pub fn inverse(&self) -> Primitive {
        match self {
            Primitive::Rotation { coord, speed, time } => Primitive::Rotation {
                coord: *coord,
                speed: *speed,
                time: -*time,
            },
            Primitive::Translation { coord, offset } => Primitive::Translation {
                coord: *coord,
                offset: -*offset,
            },
            Primitive::IntegratedFlow(f) => Primitive::IntegratedFlow(IntegratedFlow {
                generator: f.generator.clone(),
                t0: f.t1,
                t1: f.t0,
                config: f.config.clone(),
            }),
        }
    }

    fn max_coord(&self) -> Option<usize> {
        match self {
            Primitive::Rotation { coord, .. } | Primitive::Translation { coord, .. } => {
                Some(*coord)
            }
            Primitive::IntegratedFlow(_) => None,
        }
    }

    fn apply_in_place(&self, z: &mut [Complex64]) -> Result<()> {
        match self {
            Primitive::Rotation { coord, speed, time } => {
                z[*coord] *= rotation_factor(*speed, *time);
            }
            Primitive::Translation { coord, offset } => {
                z[*coord] += *offset;
            }
            Primitive::IntegratedFlow(f) => {
                let p = PhasePoint(z.to_vec());
                let q = flows::integrate_flow(&f.generator, f.t0, f.t1, &p, &f.config)?;
                z.copy_from_slice(q.coords());
            }
        }
        Ok(())
    }
}

/// `e^{−2πi·speed·time}`.
pub fn rotation_factor(speed: f64, time: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * speed * time)
}

/// A finite composition of primitives, applied in stored order: the first
/// primitive acts first.
#[derive(Clone, Debug, Default)]
pub struct SymplecticMapChain {
    primitives: Vec<Primitive>,
}

impl SymplecticMapChain {
    pub fn new(primitives: Vec<Primitive>) -> Self {
        SymplecticMapChain { primitives }
    }

    pub fn identity() -> Self {
        SymplecticMapChain::default()
    }

    /// The time-`t` map of the linear circle action with the given speeds,
    /// `z_j ↦ e^{−2πi s_j t} z_j`.
    pub fn circle_action(speeds: &[f64], t: f64) -> Self {
        SymplecticMapChain::new(
            speeds
                .iter()
                .enumerate()
                .filter(|(_, &s)| s != 0.0)
                .map(|(j, &s)| Primitive::rotation(j, s, t))
                .collect(),
        )
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn is_rigid(&self) -> bool {
        self.primitives.iter().all(Primitive::is_rigid)
    }

    /// The chain that applies `self` and then `next`.
    pub fn then(&self, next: &SymplecticMapChain) -> SymplecticMapChain {
        let mut primitives = self.primitives.clone();
        primitives.extend(next.primitives.iter().cloned());
        SymplecticMapChain { primitives }
    }

    pub fn push(&self, p: Primitive) -> SymplecticMapChain {
        let mut primitives = self.primitives.clone();
        primitives.push(p);
        SymplecticMapChain { primitives }
    }

    pub fn inverse(&self) -> SymplecticMapChain {
        SymplecticMapChain {
            primitives: self.primitives.iter().rev().map(Primitive::inverse).collect(),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        for p in &self.primitives {
            if let Some(c) = p.max_coord() {
                if c >= n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: c + 1,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, p: &PhasePoint) -> Result<PhasePoint> {
        let mut z = p.coords().to_vec();
        self.apply_in_place(&mut z)?;
        Ok(PhasePoint(z))
    }

    pub fn apply_in_place(&self, z: &mut [Complex64]) -> Result<()> {
        self.check_dim(z.len())?;
        for (index, prim) in self.primitives.iter().enumerate() {
            match prim.apply_in_place(z) {
                Ok(()) => {}
                Err(Error::FlowBlowUp { .. }) | Err(Error::NonFiniteDerivative { .. }) => {
                    return Err(Error::ChainBlowUp { index })
                }
                Err(e) => return Err(e),
            }
            if !z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::ChainBlowUp { index });
            }
        }
        Ok(())
    }

    /// Maps a gradient at the image point back through a rigid chain:
    /// `∇(H∘Φ)(z) = J_Φᵀ ∇H(Φ z)`. Gradients are stored as `∂_x + i∂_y`.
    /// Returns `false` (leaving `g` untouched) when the chain is not rigid.
    pub(crate) fn pull_gradient_rigid(&self, g: &mut [Complex64]) -> bool {
        if !self.is_rigid() {
            return false;
        }
        for p in self.primitives.iter().rev() {
            if let Primitive::Rotation { coord, speed, time } = p {
                g[*coord] *= rotation_factor(*speed, *time).conj();
            }
        }
        true
    }
}

pub fn apply_chain(chain: &SymplecticMapChain, p: &PhasePoint) -> Result<PhasePoint> {
    chain.apply(p)
}

pub fn invert_chain(chain: &SymplecticMapChain) -> SymplecticMapChain {
    chain.inverse()
}
