//! The Polterovich trick and the two- and k-summand shortening loops.
//!
//! For commuting circle actions `ψ⁽⁰⁾, …, ψ⁽ᵏ⁾` and maps `b_j`, the loop
//! `ψ̄⁽ʲ⁾_t = ψ̄⁽ʲ⁻¹⁾_t ∘ b_j ψ⁽ʲ⁾_t b_j⁻¹` is generated by
//! `Ḡ_j = Ḡ_{j−1} + H₍ⱼ₎ ∘ b_j⁻¹ ∘ (ψ̄⁽ʲ⁻¹⁾_t)⁻¹`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::{
    circle_flow, circle_speeds, compose_generators, conjugate, ChainFn, Hamiltonian, LoopGenerator,
};
use crate::error::{Error, Result};
use crate::phase::{EllipsoidModel, PhasePoint, SymplecticMapChain};
use crate::sampling;

/// Sample count used by the structural checks.
pub const CHECK_SAMPLES: usize = 32;

/// `|{K, F}|` at sampled points and times; zero iff `K` is invariant
/// under the flow of `F`.
pub fn poisson_defect(k: &Hamiltonian, f: &Hamiltonian, domain: &EllipsoidModel, samples: usize, seed: u64) -> Result<f64> {
    let n = domain.dim();
    let (mut gk, mut gf) = (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]);
    let mut worst = 0.0f64;
    for (i, p) in sampling::ellipsoid_points(domain, samples, seed).iter().enumerate() {
        let t = (i as f64 * 0.618_033_988_75).fract();
        k.gradient(t, p.coords(), &mut gk)?;
        f.gradient(t, p.coords(), &mut gf)?;
        // dK(X_F) with X_F = i∇F
        let bracket: f64 = gk.iter().zip(&gf).map(|(a, b)| (a.conj() * (Complex64::i() * b)).re).sum();
        let scale = gk.iter().map(|g| g.norm()).sum::<f64>() * gf.iter().map(|g| g.norm()).sum::<f64>();
        worst = worst.max(bracket.abs() / scale.max(1.0));
    }
    Ok(worst)
}

/// Largest displacement of sampled boundary points of the model.
pub fn boundary_leakage(b: &SymplecticMapChain, domain: &EllipsoidModel, samples: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in sampling::ellipsoid_points(domain, samples, seed) {
        let n = domain.norm(p.coords());
        if n == 0.0 {
            continue;
        }
        let s = (domain.alpha / n).sqrt();
        let q = PhasePoint::new(p.coords().iter().map(|c| c * s).collect());
        worst = worst.max(b.apply(&q)?.distance(&q));
    }
    Ok(worst)
}

fn check_commuting(k: &Hamiltonian, f: &Hamiltonian, domain: &EllipsoidModel, label: &str) -> Result<()> {
    let d = poisson_defect(k, f, domain, CHECK_SAMPLES, 7)?;
    if d > 1e-9 {
        return Err(Error::Commutation(format!("{label}: |{{K, F}}| reaches {d:.3e}")));
    }
    Ok(())
}

/// Rigid chains are global maps by design; flow-built maps must fix the
/// model boundary.
fn check_support(b: &SymplecticMapChain, domain: &EllipsoidModel, label: &str) -> Result<()> {
    if b.is_rigid() {
        return Ok(());
    }
    let d = boundary_leakage(b, domain, CHECK_SAMPLES, 11)?;
    if d > 1e-9 {
        return Err(Error::SupportLeakage(format!("{label}: boundary points move by {d:.3e}")));
    }
    Ok(())
}

/// Generator of `φ_t b φ_t b⁻¹`, where `φ_t` is the flow of `½H`:
/// `H̄_t = ½H + ½H b⁻¹ φ_t⁻¹`. `½H` must be a closed linear circle action.
pub fn polterovich_loop(h: &Hamiltonian, b: &SymplecticMapChain, domain: &EllipsoidModel) -> Result<LoopGenerator> {
    let half = h.clone().scaled(0.5);
    let speeds = circle_speeds(&half).ok_or_else(|| {
        Error::InvalidParameter("½H must be a linear circle-action generator −Σ s_j π|z_j|²".into())
    })?;
    let residual = speeds.iter().map(|s| (s - s.round()).abs()).fold(0.0, f64::max);
    if residual > 1e-12 {
        return Err(Error::LoopClosure {
            residual,
            tolerance: 1e-12,
        });
    }
    let g = compose_generators(&half, &conjugate(&half, b)?, circle_flow(&speeds))?;
    LoopGenerator::new(g, domain.clone())
}

/// Generator of `ψ^K_t ∘ b ψ^F_t b⁻¹`: `K + F b⁻¹ (ψ^K_t)⁻¹`.
pub fn two_summand_loop(
    k: &Hamiltonian,
    f: &Hamiltonian,
    flow_k: ChainFn,
    b: &SymplecticMapChain,
    domain: &EllipsoidModel,
) -> Result<LoopGenerator> {
    check_commuting(k, f, domain, "two-summand")?;
    check_support(b, domain, "two-summand")?;
    let g = compose_generators(k, &conjugate(f, b)?, flow_k)?;
    LoopGenerator::new(g, domain.clone())
}

/// Nested loop `ψ⁽⁰⁾ ∘ (b₁ψ⁽¹⁾b₁⁻¹) ∘ ⋯ ∘ (b_kψ⁽ᵏ⁾b_k⁻¹)`; `hs[0]` is the
/// unconjugated summand and `bs[j − 1]` conjugates `hs[j]`.
pub fn k_summand_loop(
    hs: &[Hamiltonian],
    flows: &[ChainFn],
    bs: &[SymplecticMapChain],
    domain: &EllipsoidModel,
) -> Result<LoopGenerator> {
    if hs.is_empty() || flows.len() != hs.len() || bs.len() + 1 != hs.len() {
        return Err(Error::InvalidParameter(format!(
            "need k + 1 summands and flows and k maps, got {}, {}, {}",
            hs.len(),
            flows.len(),
            bs.len()
        )));
    }
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            check_commuting(&hs[i], &hs[j], domain, &format!("summands {i}, {j}"))?;
        }
    }
    let mut gen = hs[0].clone();
    let mut bar: ChainFn = flows[0].clone();
    for j in 1..hs.len() {
        let b = &bs[j - 1];
        check_support(b, domain, &format!("summand {j}"))?;
        gen = compose_generators(&gen, &conjugate(&hs[j], b)?, bar.clone())?;
        let (prev, flow, b) = (bar.clone(), flows[j].clone(), b.clone());
        // ψ̄⁽ʲ⁾_t: apply b⁻¹, then ψ⁽ʲ⁾_t, then b, then ψ̄⁽ʲ⁻¹⁾_t
        bar = Arc::new(move |t| b.inverse().then(&flow(t)).then(&b).then(&prev(t)));
    }
    LoopGenerator::new(gen, domain.clone())
}

/// Circle flows of a list of linear circle generators.
pub fn circle_flows(hs: &[Hamiltonian]) -> Result<Vec<ChainFn>> {
    hs.iter()
        .map(|h| {
            circle_speeds(h)
                .map(|s| circle_flow(&s))
                .ok_or_else(|| Error::InvalidParameter("summand is not a linear circle generator".into()))
        })
        .collect()
}
