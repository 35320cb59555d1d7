//! Plugging the block deformation into the ellipsoid model.
//!
//! [`embed_deformation`] replaces every translation `β_Λ` of the factored
//! loop `φ ∘ Π β_Λ φ β_{−Λ}` by the time-1 map `T_Λ` of a cut-off
//! translation generator. Each factor `T_Λ φ T_Λ⁻¹` is a loop, so the
//! product is one; where `T_Λ` is a pure translation the generator is
//! exactly `h_max + H^{(λ)}_t`, and outside `{N < 3ε̄/4}` it is `h_max − N`.
//!
//! [`parameter_cutoff_embedding`] is the direct recipe
//! `h_max + H^{(ρ(N)·λ)}_t`: same values near the maximum and far away, but
//! `N` is not conserved by the deformed flow, so orbits crossing the collar
//! `ε̄/2 < N < ε̄` do not close.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::calculus::{circle_flow, circle_generator, compose_generators, conjugate, ChainFn, Hamiltonian, LoopGenerator, QuadraticAffine, ScalarField};
use crate::flows::FlowConfig;
use crate::phase::{Primitive, SymplecticMapChain};
use crate::disjoin::SmoothCutoff;
use crate::error::{Error, Result};
use crate::phase::{EllipsoidModel, WeightVector};
use crate::quadrature;
use crate::sampling;

use super::block::{block_slice, minimize_quadratic};
use super::hessian::DeformationParams;

/// `H^{(λ)}_t` on ℂⁿ as one diagonal quadratic (blocks with `k = 1` are
/// `−π|z|²`).
pub fn deformation_slice(params: &DeformationParams, t: f64) -> Result<QuadraticAffine> {
    let n = params.weights.len();
    let mut q = QuadraticAffine::zero(n);
    for (j, (b, &k)) in params.blocks.iter().zip(&params.weights).enumerate() {
        if k >= 2 {
            let s = block_slice(k, b, t)?;
            q.quad[j] = s.quad[0];
            q.linear[j] = s.linear[0];
            q.constant += s.constant;
        } else {
            q.quad[j] = -1.0;
        }
    }
    Ok(q)
}

/// `(max_z H^{(λ)}_t, argmax)` over ℂⁿ.
pub fn unconstrained_maximum(params: &DeformationParams, t: f64) -> Result<(f64, Vec<Complex64>)> {
    let r = minimize_quadratic(&deformation_slice(params, t)?)?;
    Ok((-PI * r.value, r.argmin.into_coords()))
}

/// `h_max + H^{(ρ(N)·λ)}_t`; with `H^{(μ)}_t = −N + L^{μ}_t + C^{μ}_t`
/// (`L` linear, `C` quadratic in `μ`) this is `h_max − N + ρL + ρ²C`.
#[derive(Clone, Debug)]
pub struct ParameterCutoff {
    pub params: DeformationParams,
    pub eps_bar: f64,
    pub h_max: f64,
    weights: Vec<f64>,
    cutoff: Arc<SmoothCutoff>,
}

impl ParameterCutoff {
    pub fn norm(&self, z: &[Complex64]) -> f64 {
        z.iter().zip(&self.weights).map(|(z, k)| PI * k * z.norm_sqr()).sum()
    }

    /// `(ρ, ρ')` at `N`: 1 on `[0, ε̄/2]`, 0 beyond `ε̄`.
    fn rho(&self, n: f64) -> (f64, f64) {
        let half = 0.5 * self.eps_bar;
        let s = (n - half) / half;
        (self.cutoff.eval(s), self.cutoff.deriv(s) / half)
    }
}

impl ScalarField for ParameterCutoff {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, t: f64, z: &[Complex64]) -> f64 {
        let n = self.norm(z);
        let (r, _) = self.rho(n);
        if r == 0.0 {
            return self.h_max - n;
        }
        let q = deformation_slice(&self.params, t).expect("validated blocks");
        let lin: f64 = q.linear.iter().zip(z).map(|(l, z)| 2.0 * (l.conj() * z).re).sum();
        self.h_max - n + r * lin + r * r * q.constant
    }

    fn gradient(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) {
        let n = self.norm(z);
        let (r, dr) = self.rho(n);
        for (o, (z, k)) in out.iter_mut().zip(z.iter().zip(&self.weights)) {
            *o = -2.0 * PI * k * z;
        }
        if r == 0.0 && dr == 0.0 {
            return;
        }
        let q = deformation_slice(&self.params, t).expect("validated blocks");
        let lin: f64 = q.linear.iter().zip(z).map(|(l, z)| 2.0 * (l.conj() * z).re).sum();
        let dv = (lin + 2.0 * r * q.constant) * dr;
        for ((o, l), (z, k)) in out.iter_mut().zip(&q.linear).zip(z.iter().zip(&self.weights)) {
            *o += 2.0 * r * l + dv * 2.0 * PI * k * z;
        }
    }

    fn quadratic_slice(&self, _t: f64) -> Option<QuadraticAffine> {
        if self.params.norm() == 0.0 {
            let mut q = QuadraticAffine::diagonal(self.weights.iter().map(|k| -k).collect());
            q.constant = self.h_max;
            Some(q)
        } else {
            None
        }
    }

    fn name(&self) -> String {
        "parameter cutoff".into()
    }
}

/// Worst values of the three smallness conditions over the `t` nodes.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DReport {
    /// `max_t N(argmax)`; must be `≤ ε̄/4`.
    pub argmax_norm: f64,
    /// `min_t max_z H^{(λ)}_t`; must be `> −ε̄/4`.
    pub max_value: f64,
    /// Upper bound of `H^{(νλ)}_t` on `ε̄/2 ≤ N ≤ ε̄`, `0 ≤ ν ≤ 1`; must be `≤ −ε̄/4`.
    pub collar_bound: f64,
}

impl DReport {
    /// First failing condition (1-based), with `margin` shrinking every
    /// threshold.
    fn violation(&self, eps_bar: f64, margin: f64) -> Option<(usize, String)> {
        let q = eps_bar / 4.0;
        if self.argmax_norm > q / margin {
            return Some((1, format!("argmax reaches N = {:.3e} > ε̄/4 = {q:.3e}", self.argmax_norm)));
        }
        if self.max_value <= -q / margin {
            return Some((2, format!("maximum {:.3e} ≤ −ε̄/4 = {:.3e}", self.max_value, -q)));
        }
        if self.collar_bound > -q * margin {
            return Some((3, format!("collar values reach {:.3e} > −ε̄/4 = {:.3e}", self.collar_bound, -q)));
        }
        None
    }
}

/// Measures the three conditions. Condition 3 uses
/// `H^{(νλ)} ≤ −N + 2ν√(N·Σ|ℓ_j|²/(πk_j))` (Cauchy–Schwarz; `C ≤ 0`).
pub fn measure_d_conditions(params: &DeformationParams, eps_bar: f64, t_nodes: usize) -> Result<DReport> {
    let mut rep = DReport {
        argmax_norm: 0.0,
        max_value: f64::INFINITY,
        collar_bound: f64::NEG_INFINITY,
    };
    let lo = 0.5 * eps_bar;
    for t in quadrature::nodes(0.0, 1.0, t_nodes) {
        let q = deformation_slice(params, t)?;
        let (max, z) = unconstrained_maximum(params, t)?;
        let n: f64 = z.iter().zip(&params.weights).map(|(z, &k)| PI * k as f64 * z.norm_sqr()).sum();
        rep.argmax_norm = rep.argmax_norm.max(n);
        rep.max_value = rep.max_value.min(max);
        let s: f64 = q
            .linear
            .iter()
            .zip(&params.weights)
            .map(|(l, &k)| l.norm_sqr() / (PI * k as f64))
            .sum();
        let g = |n: f64| -n + 2.0 * (n * s).sqrt();
        let mut b = g(lo).max(g(eps_bar));
        if s > lo && s < eps_bar {
            b = b.max(g(s));
        }
        rep.collar_bound = rep.collar_bound.max(b);
    }
    Ok(rep)
}

pub fn check_d_conditions(params: &DeformationParams, eps_bar: f64, t_nodes: usize) -> Result<DReport> {
    let rep = measure_d_conditions(params, eps_bar, t_nodes)?;
    match rep.violation(eps_bar, 1.0) {
        Some((condition, detail)) => Err(Error::DCondition { condition, detail }),
        None => Ok(rep),
    }
}

/// Largest `r` such that every probed direction `λ` with `‖λ‖ = 2r` meets
/// the three conditions (bisection; probes are the coordinate axes plus
/// `random` seeded unit vectors).
pub fn d_radius(weights: &WeightVector, eps_bar: f64, t_nodes: usize, random: usize, seed: u64) -> Result<f64> {
    let dim = DeformationParams::zeros(weights).real_dim();
    if dim == 0 {
        return Ok(f64::INFINITY);
    }
    let mut dirs: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut rng = sampling::rng(seed);
    for _ in 0..random {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            dirs.push(v.iter().map(|x| x / n).collect());
        }
    }
    let ok = |r: f64| -> Result<bool> {
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|v| v * 2.0 * r).collect();
            let p = DeformationParams::from_reals(weights, &x)?;
            if measure_d_conditions(&p, eps_bar, t_nodes)?.violation(eps_bar, 1.0).is_some() {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let (mut lo, mut hi) = (0.0, eps_bar.sqrt());
    while ok(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Ok(lo);
        }
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn validate_embedding(model: &EllipsoidModel, params: &DeformationParams, eps_bar: f64, t_nodes: usize) -> Result<()> {
    if params.weights != model.weights.as_slice() {
        return Err(Error::InvalidParameter("deformation blocks do not match the model weights".into()));
    }
    if !(eps_bar > 0.0 && eps_bar <= model.alpha) {
        return Err(Error::InvalidParameter(format!(
            "ε̄ = {eps_bar} must lie in (0, α = {}]",
            model.alpha
        )));
    }
    check_d_conditions(params, eps_bar, t_nodes)?;
    Ok(())
}

/// The direct cutoff recipe `h_max + H^{(ρ(N)·λ)}_t` (not a loop in the
/// collar; see the module notes).
pub fn parameter_cutoff_embedding(
    model: &EllipsoidModel,
    params: &DeformationParams,
    eps_bar: f64,
    t_nodes: usize,
) -> Result<LoopGenerator> {
    validate_embedding(model, params, eps_bar, t_nodes)?;
    let field = ParameterCutoff {
        params: params.clone(),
        eps_bar,
        h_max: model.h_max,
        weights: model.weights.as_slice().iter().map(|&k| k as f64).collect(),
        cutoff: SmoothCutoff::shared(),
    };
    LoopGenerator::new(Hamiltonian::field(Arc::new(field)), model.clone())
}

/// Steps of the cut-off translation flows.
pub const TRANSLATION_STEPS: usize = 128;

/// `ρ̂(N)·Im(conj(z_c)·Λ)`, whose field is the translation by `Λ` in
/// `z_c` on `{N ≤ ε̄/2}`; `ρ̂` vanishes from `N = 3ε̄/4` on.
#[derive(Clone, Debug)]
pub struct CutoffTranslation {
    pub coord: usize,
    pub shift: Complex64,
    pub eps_bar: f64,
    weights: Vec<f64>,
    cutoff: Arc<SmoothCutoff>,
}

impl CutoffTranslation {
    fn rho(&self, z: &[Complex64]) -> (f64, f64) {
        let n: f64 = z.iter().zip(&self.weights).map(|(z, k)| PI * k * z.norm_sqr()).sum();
        let (lo, w) = (0.5 * self.eps_bar, 0.25 * self.eps_bar);
        let s = (n - lo) / w;
        (self.cutoff.eval(s), self.cutoff.deriv(s) / w)
    }

    fn linear(&self, z: &[Complex64]) -> f64 {
        (z[self.coord].conj() * self.shift).im
    }
}

impl ScalarField for CutoffTranslation {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, _t: f64, z: &[Complex64]) -> f64 {
        self.rho(z).0 * self.linear(z)
    }

    fn gradient(&self, _t: f64, z: &[Complex64], out: &mut [Complex64]) {
        let (r, dr) = self.rho(z);
        let h = self.linear(z);
        for (j, (o, (z, k))) in out.iter_mut().zip(z.iter().zip(&self.weights)).enumerate() {
            *o = dr * h * 2.0 * PI * k * z;
            if j == self.coord {
                *o += r * -Complex64::i() * self.shift;
            }
        }
    }

    fn vanishes_at(&self, z: &[Complex64]) -> bool {
        let (r, dr) = self.rho(z);
        r == 0.0 && dr == 0.0
    }

    fn name(&self) -> String {
        "cutoff translation".into()
    }
}

/// The deformation as a loop generator on `model`: a product of
/// rotations conjugated by cut-off translations. `λ` must satisfy the
/// three smallness conditions.
pub fn embed_deformation(
    model: &EllipsoidModel,
    params: &DeformationParams,
    eps_bar: f64,
    t_nodes: usize,
) -> Result<LoopGenerator> {
    validate_embedding(model, params, eps_bar, t_nodes)?;
    let n = model.dim();
    let weights: Vec<f64> = model.weights.as_slice().iter().map(|&k| k as f64).collect();
    let cutoff = SmoothCutoff::shared();
    let flow_cfg = FlowConfig::rk4(TRANSLATION_STEPS);
    // (generator, time-t map) of each factor, in acting order
    let mut factors: Vec<(Hamiltonian, ChainFn)> = Vec::new();
    for (c, block) in params.blocks.iter().enumerate() {
        let mut speeds = vec![0.0; n];
        speeds[c] = 1.0;
        let h = circle_generator(&speeds);
        let mut shifts: Vec<Complex64> = Vec::new();
        let mut acc = Complex64::new(0.0, 0.0);
        for l in block.iter().rev() {
            acc += l;
            shifts.push(acc);
        }
        // Λ₁ acts first
        shifts.reverse();
        for big in shifts.into_iter().chain(std::iter::once(Complex64::new(0.0, 0.0))) {
            if big.norm_sqr() == 0.0 {
                factors.push((h.clone(), circle_flow(&speeds)));
                continue;
            }
            let field = CutoffTranslation {
                coord: c,
                shift: big,
                eps_bar,
                weights: weights.clone(),
                cutoff: cutoff.clone(),
            };
            let t_map = SymplecticMapChain::new(vec![Primitive::flow(
                Arc::new(Hamiltonian::field(Arc::new(field))),
                0.0,
                1.0,
                flow_cfg.clone(),
            )]);
            let g = conjugate(&h, &t_map)?;
            let inv = t_map.inverse();
            let flow: ChainFn = Arc::new(move |t| inv.then(&SymplecticMapChain::new(vec![Primitive::rotation(c, 1.0, t)])).then(&t_map));
            factors.push((g, flow));
        }
    }
    let mut it = factors.into_iter();
    let (mut acc, _) = it.next().ok_or(Error::EmptyDomain)?;
    for (g, flow) in it {
        acc = compose_generators(&g, &acc, flow)?;
    }
    let generator = Hamiltonian::sum(vec![Hamiltonian::constant(n, model.h_max), acc])?;
    LoopGenerator::new(generator, model.clone())
}
