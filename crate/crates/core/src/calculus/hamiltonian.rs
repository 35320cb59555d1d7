//! Time-dependent Hamiltonians as evaluatable expression trees.
//!
//! Gradients are complex, `g_j = ∂H/∂x_j + i ∂H/∂y_j`, and the Hamiltonian
//! vector field is `X_j = i g_j`, i.e. `(ẋ, ẏ) = (−∂H/∂y, ∂H/∂x)`. This is
//! the orientation for which `−π|z|²` generates `z ↦ e^{−2πit} z` and `y`
//! generates the translation `−∂/∂x`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::{Primitive, SymplecticMapChain};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative step for central-difference partials.
pub const FD_STEP: f64 = 1e-6;

/// `c + Σ q_j π|z_j|² + Σ 2 Re(conj(ℓ_j) z_j)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct QuadraticAffine {
    pub constant: f64,
    pub linear: Vec<Complex64>,
    pub quad: Vec<f64>,
}

impl QuadraticAffine {
    pub fn zero(n: usize) -> Self {
        QuadraticAffine {
            constant: 0.0,
            linear: vec![Complex64::new(0.0, 0.0); n],
            quad: vec![0.0; n],
        }
    }

    /// `Σ q_j π|z_j|²`.
    pub fn diagonal(quad: Vec<f64>) -> Self {
        let n = quad.len();
        QuadraticAffine {
            constant: 0.0,
            linear: vec![Complex64::new(0.0, 0.0); n],
            quad,
        }
    }

    pub fn dim(&self) -> usize {
        self.quad.len()
    }

    pub fn value(&self, z: &[Complex64]) -> f64 {
        let mut v = self.constant;
        for j in 0..z.len() {
            v += self.quad[j] * PI * z[j].norm_sqr() + 2.0 * (self.linear[j].conj() * z[j]).re;
        }
        v
    }

    pub fn gradient(&self, z: &[Complex64], out: &mut [Complex64]) {
        for j in 0..z.len() {
            out[j] = 2.0 * self.quad[j] * PI * z[j] + 2.0 * self.linear[j];
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        QuadraticAffine {
            constant: s * self.constant,
            linear: self.linear.iter().map(|l| l * s).collect(),
            quad: self.quad.iter().map(|q| q * s).collect(),
        }
    }

    pub fn add(&self, other: &QuadraticAffine) -> Self {
        QuadraticAffine {
            constant: self.constant + other.constant,
            linear: self.linear.iter().zip(&other.linear).map(|(a, b)| a + b).collect(),
            quad: self.quad.iter().zip(&other.quad).map(|(a, b)| a + b).collect(),
        }
    }

    /// `H ∘ (z_j ↦ z_j + λ)`.
    pub fn pullback_translation(&mut self, j: usize, lambda: Complex64) {
        let q = self.quad[j];
        self.constant += q * PI * lambda.norm_sqr() + 2.0 * (self.linear[j].conj() * lambda).re;
        self.linear[j] += q * PI * lambda;
    }

    /// `H ∘ (z_j ↦ w z_j)` for a unit complex `w`.
    pub fn pullback_rotation(&mut self, j: usize, w: Complex64) {
        self.linear[j] *= w.conj();
    }

    /// `H ∘ Φ` for a rigid chain; `None` if the chain contains a flow.
    pub fn pullback_chain(&self, chain: &SymplecticMapChain) -> Option<QuadraticAffine> {
        if !chain.is_rigid() {
            return None;
        }
        let mut out = self.clone();
        // H∘p_m∘…∘p_1: peel off the last-applied primitive first
        for p in chain.primitives().iter().rev() {
            match p {
                Primitive::Rotation { coord, speed, time } => {
                    out.pullback_rotation(*coord, crate::phase::rotation_factor(*speed, *time))
                }
                Primitive::Translation { coord, offset } => {
                    out.pullback_translation(*coord, *offset)
                }
                Primitive::IntegratedFlow(_) => unreachable!(),
            }
        }
        Some(out)
    }
}

/// A scalar field on ℂⁿ × time that is not expressible in the structured
/// variants. Implementors may override `gradient` with analytic partials.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, t: f64, z: &[Complex64]) -> f64;

    fn gradient(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) {
        fd_gradient(|w| self.value(t, w), z, out);
    }

    /// `true` when the field (hence the flow) vanishes at `z` for every `t`.
    fn vanishes_at(&self, _z: &[Complex64]) -> bool {
        false
    }

    fn quadratic_slice(&self, _t: f64) -> Option<QuadraticAffine> {
        None
    }

    fn name(&self) -> String {
        "field".into()
    }
}

/// Central differences with step `FD_STEP·max(1, |z_j|)`.
pub fn fd_gradient<F: Fn(&[Complex64]) -> f64>(f: F, z: &[Complex64], out: &mut [Complex64]) {
    let mut w = z.to_vec();
    for j in 0..z.len() {
        let h = FD_STEP * z[j].norm().max(1.0);
        let mut g = Complex64::new(0.0, 0.0);
        for (dir, slot) in [(Complex64::new(h, 0.0), 0), (Complex64::new(0.0, h), 1)] {
            w[j] = z[j] + dir;
            let fp = f(&w);
            w[j] = z[j] - dir;
            let fm = f(&w);
            let d = (fp - fm) / (2.0 * h);
            if slot == 0 {
                g.re = d;
            } else {
                g.im = d;
            }
        }
        w[j] = z[j];
        out[j] = g;
    }
}

pub type ChainFn = Arc<dyn Fn(f64) -> SymplecticMapChain + Send + Sync>;
pub type QuadraticFn = Arc<dyn Fn(f64) -> QuadraticAffine + Send + Sync>;
/// `τ ↦ (t(τ), dt/dτ)`.
pub type TimeMapFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
pub enum ChainMap {
    Fixed(SymplecticMapChain),
    Timed(ChainFn),
}

impl ChainMap {
    pub fn at(&self, t: f64) -> SymplecticMapChain {
        match self {
            ChainMap::Fixed(c) => c.clone(),
            ChainMap::Timed(f) => f(t),
        }
    }
}

/// A time-dependent Hamiltonian `H(t, z)`.
#[derive(Clone)]
pub enum Hamiltonian {
    Quadratic(QuadraticAffine),
    TimedQuadratic { dim: usize, slice: QuadraticFn },
    Field(Arc<dyn ScalarField>),
    Sum { dim: usize, terms: Vec<Hamiltonian> },
    /// `H_t ∘ Φ_t`.
    Pullback { inner: Box<Hamiltonian>, map: ChainMap },
    /// `H_{t(τ)} · dt/dτ`.
    Reparametrized { inner: Box<Hamiltonian>, time_map: TimeMapFn },
    Scaled(f64, Box<Hamiltonian>),
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Quadratic(q) => f.debug_tuple("Quadratic").field(q).finish(),
            Hamiltonian::TimedQuadratic { dim, .. } => write!(f, "TimedQuadratic(dim={dim})"),
            Hamiltonian::Field(s) => write!(f, "Field({})", s.name()),
            Hamiltonian::Sum { terms, .. } => f.debug_list().entries(terms).finish(),
            Hamiltonian::Pullback { inner, map } => match map {
                ChainMap::Fixed(c) => write!(f, "Pullback({inner:?}, {} primitives)", c.len()),
                ChainMap::Timed(_) => write!(f, "Pullback({inner:?}, timed chain)"),
            },
            Hamiltonian::Reparametrized { inner, .. } => write!(f, "Reparametrized({inner:?})"),
            Hamiltonian::Scaled(s, inner) => write!(f, "{s}·{inner:?}"),
        }
    }
}

impl Hamiltonian {
    pub fn zero(n: usize) -> Self {
        Hamiltonian::Quadratic(QuadraticAffine::zero(n))
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut q = QuadraticAffine::zero(n);
        q.constant = c;
        Hamiltonian::Quadratic(q)
    }

    pub fn field(f: Arc<dyn ScalarField>) -> Self {
        Hamiltonian::Field(f)
    }

    pub fn sum(terms: Vec<Hamiltonian>) -> Result<Self> {
        let dim = terms.first().map(|t| t.dim()).ok_or(Error::EmptyDomain)?;
        for t in &terms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.dim(),
                });
            }
        }
        Ok(Hamiltonian::Sum { dim, terms })
    }

    pub fn scaled(self, s: f64) -> Self {
        match self {
            Hamiltonian::Quadratic(q) => Hamiltonian::Quadratic(q.scale(s)),
            other => Hamiltonian::Scaled(s, Box::new(other)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Quadratic(q) => q.dim(),
            Hamiltonian::TimedQuadratic { dim, .. } => *dim,
            Hamiltonian::Field(f) => f.dim(),
            Hamiltonian::Sum { dim, .. } => *dim,
            Hamiltonian::Pullback { inner, .. }
            | Hamiltonian::Reparametrized { inner, .. }
            | Hamiltonian::Scaled(_, inner) => inner.dim(),
        }
    }

    pub fn value(&self, t: f64, z: &[Complex64]) -> Result<f64> {
        let v = match self {
            Hamiltonian::Quadratic(q) => q.value(z),
            Hamiltonian::TimedQuadratic { slice, .. } => slice(t).value(z),
            Hamiltonian::Field(f) => f.value(t, z),
            Hamiltonian::Sum { terms, .. } => {
                let mut s = 0.0;
                for term in terms {
                    s += term.value(t, z)?;
                }
                s
            }
            Hamiltonian::Pullback { inner, map } => {
                let mut w = z.to_vec();
                map.at(t).apply_in_place(&mut w)?;
                inner.value(t, &w)?
            }
            Hamiltonian::Reparametrized { inner, time_map } => {
                let (s, ds) = time_map(t);
                inner.value(s, z)? * ds
            }
            Hamiltonian::Scaled(s, inner) => s * inner.value(t, z)?,
        };
        if !v.is_finite() {
            return Err(Error::NonFiniteDerivative { time: t });
        }
        Ok(v)
    }

    /// Complex gradient `∂_x H + i ∂_y H`, written into `out`.
    pub fn gradient(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        match self {
            Hamiltonian::Quadratic(q) => q.gradient(z, out),
            Hamiltonian::TimedQuadratic { slice, .. } => slice(t).gradient(z, out),
            Hamiltonian::Field(f) => f.gradient(t, z, out),
            Hamiltonian::Sum { terms, .. } => {
                out.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
                let mut buf = vec![Complex64::new(0.0, 0.0); z.len()];
                for term in terms {
                    term.gradient(t, z, &mut buf)?;
                    for (o, b) in out.iter_mut().zip(&buf) {
                        *o += b;
                    }
                }
            }
            Hamiltonian::Pullback { inner, map } => {
                let chain = map.at(t);
                let mut w = z.to_vec();
                chain.apply_in_place(&mut w)?;
                inner.gradient(t, &w, out)?;
                if !chain.pull_gradient_rigid(out) {
                    // X_{H∘Φ}(z) = DΦ(z)⁻¹ X_H(Φz) = D(Φ⁻¹)(Φz)·X_H(Φz)
                    let x: Vec<Complex64> = out.iter().map(|g| I * g).collect();
                    let pulled = directional_derivative(&chain.inverse(), &w, &x)?;
                    for (o, v) in out.iter_mut().zip(pulled) {
                        *o = -I * v;
                    }
                }
            }
            Hamiltonian::Reparametrized { inner, time_map } => {
                let (s, ds) = time_map(t);
                inner.gradient(s, z, out)?;
                out.iter_mut().for_each(|g| *g *= ds);
            }
            Hamiltonian::Scaled(s, inner) => {
                inner.gradient(t, z, out)?;
                out.iter_mut().for_each(|g| *g *= *s);
            }
        }
        if out.iter().any(|g| !(g.re.is_finite() && g.im.is_finite())) {
            return Err(Error::NonFiniteDerivative { time: t });
        }
        Ok(())
    }

    /// The Hamiltonian vector field `X = i·∇H` (complex form).
    pub fn vector_field(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        self.gradient(t, z, out)?;
        out.iter_mut().for_each(|g| *g *= I);
        Ok(())
    }

    /// `true` when the generator's field is known to vanish at `z` for all t.
    pub fn vanishes_at(&self, z: &[Complex64]) -> bool {
        match self {
            Hamiltonian::Quadratic(q) => {
                q.quad.iter().all(|&v| v == 0.0) && q.linear.iter().all(|l| l.norm_sqr() == 0.0)
            }
            Hamiltonian::Field(f) => f.vanishes_at(z),
            Hamiltonian::Sum { terms, .. } => terms.iter().all(|t| t.vanishes_at(z)),
            Hamiltonian::Reparametrized { inner, .. } | Hamiltonian::Scaled(_, inner) => {
                inner.vanishes_at(z)
            }
            Hamiltonian::TimedQuadratic { .. } | Hamiltonian::Pullback { .. } => false,
        }
    }

    /// Closed-form slice at time `t` when the whole tree is quadratic-affine.
    pub fn quadratic_slice(&self, t: f64) -> Option<QuadraticAffine> {
        match self {
            Hamiltonian::Quadratic(q) => Some(q.clone()),
            Hamiltonian::TimedQuadratic { slice, .. } => Some(slice(t)),
            Hamiltonian::Field(f) => f.quadratic_slice(t),
            Hamiltonian::Sum { terms, .. } => {
                let mut acc: Option<QuadraticAffine> = None;
                for term in terms {
                    let s = term.quadratic_slice(t)?;
                    acc = Some(match acc {
                        None => s,
                        Some(a) => a.add(&s),
                    });
                }
                acc
            }
            Hamiltonian::Pullback { inner, map } => {
                inner.quadratic_slice(t)?.pullback_chain(&map.at(t))
            }
            Hamiltonian::Reparametrized { inner, time_map } => {
                let (s, ds) = time_map(t);
                Some(inner.quadratic_slice(s)?.scale(ds))
            }
            Hamiltonian::Scaled(s, inner) => Some(inner.quadratic_slice(t)?.scale(*s)),
        }
    }

    /// `true` when every slice is quadratic-affine (probed at a few times).
    pub fn is_quadratic(&self) -> bool {
        [0.0, 0.37, 1.0].iter().all(|&t| self.quadratic_slice(t).is_some())
    }
}

/// `DΨ(w)·v` by central differences, step `FD_STEP` relative to `max(1,|w|)`.
pub(crate) fn directional_derivative(
    psi: &SymplecticMapChain,
    w: &[Complex64],
    v: &[Complex64],
) -> Result<Vec<Complex64>> {
    let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if vnorm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); w.len()]);
    }
    let wnorm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let h = FD_STEP * wnorm.max(1.0) / vnorm;
    let mut plus: Vec<Complex64> = w.iter().zip(v).map(|(a, b)| a + b * h).collect();
    let mut minus: Vec<Complex64> = w.iter().zip(v).map(|(a, b)| a - b * h).collect();
    psi.apply_in_place(&mut plus)?;
    psi.apply_in_place(&mut minus)?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect())
}
