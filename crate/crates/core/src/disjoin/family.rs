//! Parametrized disjoiner on `ℂ × W`:
//! `H_τ(z, w) = ρ_V(N(w))·c²·F^{A(N(w)), ε}_τ(z/c)`.
//!
//! `z` is the lead coordinate and `N(w) = π Σ_{j≠lead} k_j|z_j|²`. Since `H`
//! depends on `w` only through `N`, the flow rotates each `w_j` and keeps
//! `N` fixed. For fixed `N` the action on `z` is the rescaled disc
//! disjoiner: `{π|z|² ≤ A₁}` is carried into `{π|z|² > A₂(N)}`.
//!
//! Slack bookkeeping for ambient slack `ε̄` (all areas in `z` units):
//! `c² = A₁ + ε̄/8`, `c²ε = ε̄/2`, and the target `A₂` is inflated by `ε̄/8`,
//! so the support sits inside `π|z|² ≤ A₁ + A₂ + 3ε̄/4`. To keep `A` smooth
//! where `A₂(N)` turns negative it is replaced by
//! `A_eff(x) = ∫_{−∞}^x ρ↑((y + κ)/κ) dy`, which equals `x + κ/2` for `x ≥ 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::{Hamiltonian, ScalarField};
use crate::error::{Error, Result};
use crate::flows::{self, FlowConfig};
use crate::phase::{EllipsoidModel, PhasePoint, Primitive, SymplecticMapChain};

use super::cutoff::SmoothCutoff;
use super::disc::{DiscDisjoiner, DisjoinSpec};

/// `A(N) = intercept + slope·N`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AffineProfile {
    pub intercept: f64,
    pub slope: f64,
}

impl AffineProfile {
    pub fn at(&self, n: f64) -> f64 {
        self.intercept + self.slope * n
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FamilyDisjoinSpec {
    pub model: EllipsoidModel,
    /// Index of the `ℂ` factor.
    pub lead: usize,
    /// Constant inner area `A₁`.
    pub a1: f64,
    pub a2: AffineProfile,
    pub eps_bar: f64,
    /// Width of the `N`-collar beyond `C`; defaults to `ε̄`.
    pub window: Option<f64>,
}

/// The containment requirement `s < (ab/k₁²)α` for `A₁ = s/b`,
/// `A₂ = (s − N)/a` on the ellipsoid with lead weight `k₁ = a + b`.
pub fn check_theorem_containment(k1: u32, a: u32, b: u32, s: f64, alpha: f64) -> Result<()> {
    if a + b != k1 || a == 0 || b == 0 {
        return Err(Error::InvalidParameter(format!(
            "split {a} + {b} does not decompose k₁ = {k1} into positive parts"
        )));
    }
    let (af, bf, kf) = (a as f64, b as f64, k1 as f64);
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("shortening s must be positive, got {s}")));
    }
    let lhs = af * bf / (s * kf);
    if !(lhs > kf / alpha) {
        return Err(Error::Containment(format!(
            "ab/(s·k₁) = {lhs:.6} ≥ k₁/α = {:.6} fails: need s < (ab/k₁²)α = {:.6}, got s = {s}",
            kf / alpha,
            af * bf / (kf * kf) * alpha
        )));
    }
    Ok(())
}

impl FamilyDisjoinSpec {
    /// Profiles `A₁ ≡ s/b`, `A₂(N) = (s − N)/a`.
    pub fn theorem(model: EllipsoidModel, lead: usize, a: u32, b: u32, s: f64, eps_bar: f64) -> Result<Self> {
        check_theorem_containment(model.weights.get(lead), a, b, s, model.alpha)?;
        Ok(FamilyDisjoinSpec {
            model,
            lead,
            a1: s / b as f64,
            a2: AffineProfile {
                intercept: s / a as f64,
                slope: -1.0 / a as f64,
            },
            eps_bar,
            window: None,
        })
    }

    /// Largest `ε̄` allowed by containment at `N = 0`, times `fraction`.
    pub fn slack_bound(model: &EllipsoidModel, lead: usize, a1: f64, a2: AffineProfile) -> f64 {
        let k = model.weights.get(lead) as f64;
        4.0 / 3.0 * (model.alpha / k - a1 - a2.intercept.max(0.0))
    }

    fn c_end(&self) -> f64 {
        -self.a2.intercept / self.a2.slope
    }

    pub fn window(&self) -> f64 {
        self.window.unwrap_or(self.eps_bar)
    }
}

#[derive(Clone, Debug)]
pub struct FamilyDisjoiner {
    pub spec: FamilyDisjoinSpec,
    pub c2: f64,
    pub eps: f64,
    pub kappa: f64,
    /// `C = [0, c_end]`.
    pub c_end: f64,
    disc: DiscDisjoiner,
    cutoff: Arc<SmoothCutoff>,
    weights: Vec<f64>,
}

impl FamilyDisjoiner {
    pub fn new(spec: FamilyDisjoinSpec, config: &FlowConfig) -> Result<Self> {
        let n = spec.model.dim();
        if spec.lead >= n {
            return Err(Error::InvalidParameter(format!("lead coordinate {} out of range", spec.lead)));
        }
        if !(spec.a1 > 0.0) {
            return Err(Error::InvalidParameter(format!("A₁ must be positive, got {}", spec.a1)));
        }
        if !(spec.a2.slope < 0.0 && spec.a2.intercept >= 0.0) {
            return Err(Error::InvalidParameter(
                "A₂ must be decreasing with A₂(0) ≥ 0 so that C is a bounded interval".into(),
            ));
        }
        if !(spec.eps_bar > 0.0 && spec.window() > 0.0) {
            return Err(Error::InvalidParameter("ε̄ and the collar width must be positive".into()));
        }
        let c2 = spec.a1 + spec.eps_bar / 8.0;
        let eps = spec.eps_bar / 2.0 / c2;
        let kappa = spec.eps_bar / 4.0 / c2;
        if !(eps < 1.0) {
            return Err(Error::DisjoinConfig(format!("rescaled slack ε = {eps} must be < 1")));
        }
        let disc = DiscDisjoiner::new(&DisjoinSpec::new(0.0, eps), config)?;
        let weights = spec.model.weights.as_slice().iter().map(|&k| k as f64).collect();
        let f = FamilyDisjoiner {
            c_end: spec.c_end(),
            spec,
            c2,
            eps,
            kappa,
            disc,
            cutoff: SmoothCutoff::shared(),
            weights,
        };
        f.check_containment()?;
        Ok(f)
    }

    /// `N(w)`.
    pub fn fibre_norm(&self, z: &[Complex64]) -> f64 {
        z.iter()
            .zip(&self.weights)
            .enumerate()
            .filter(|(j, _)| *j != self.spec.lead)
            .map(|(_, (z, k))| PI * k * z.norm_sqr())
            .sum()
    }

    /// Effective target area (disc units) and its `N`-derivative.
    pub fn target(&self, n: f64) -> (f64, f64) {
        let x = self.spec.a2.at(n) / self.c2;
        let arg = (x + self.kappa) / self.kappa;
        (
            self.kappa * self.cutoff.up_integral(arg),
            self.cutoff.up(arg) * self.spec.a2.slope / self.c2,
        )
    }

    fn collar(&self, n: f64) -> (f64, f64) {
        let w = self.spec.window();
        let s = (n - self.c_end) / w;
        (self.cutoff.eval(s), self.cutoff.deriv(s) / w)
    }

    /// Outer radius (as area `π|z|²`) of the support over the level `N = n`.
    pub fn outer_area(&self, n: f64) -> f64 {
        if n >= self.c_end + self.spec.window() {
            return 0.0;
        }
        self.c2 * (1.0 + self.target(n).0 + self.eps)
    }

    /// The support over each level must sit inside the ellipsoid.
    /// `k·outer(N) + N` is maximal at `N = 0` or at the collar end.
    pub fn check_containment(&self) -> Result<()> {
        let k = self.weights[self.spec.lead];
        let end = self.c_end + self.spec.window();
        for n in [0.0, end * (1.0 - 1e-12)] {
            let load = k * self.outer_area(n) + n;
            if !(load < self.spec.model.alpha) {
                return Err(Error::Containment(format!(
                    "support over N = {n:.4} reaches k·π|z|² + N = {load:.6} ≥ α = {}",
                    self.spec.model.alpha
                )));
            }
        }
        Ok(())
    }

    pub fn supported_at(&self, z: &[Complex64]) -> bool {
        let n = self.fibre_norm(z);
        n < self.c_end + self.spec.window() && PI * z[self.spec.lead].norm_sqr() < self.outer_area(n)
    }

    /// Value and complex gradient.
    pub fn eval(&self, tau: f64, z: &[Complex64], grad: Option<&mut [Complex64]>) -> f64 {
        let n = self.fibre_norm(z);
        let (rv, drv) = self.collar(n);
        let zero = Complex64::new(0.0, 0.0);
        if rv == 0.0 && drv == 0.0 {
            if let Some(g) = grad {
                g.iter_mut().for_each(|g| *g = zero);
            }
            return 0.0;
        }
        let c = self.c2.sqrt();
        let (area, d_area) = self.target(n);
        let (f, gf, fa) = self.disc.eval_with(area, tau, z[self.spec.lead] / c);
        if let Some(g) = grad {
            let dn = drv * self.c2 * f + rv * self.c2 * fa * d_area;
            for (j, (g, (z, k))) in g.iter_mut().zip(z.iter().zip(&self.weights)).enumerate() {
                *g = if j == self.spec.lead {
                    rv * c * gf
                } else {
                    dn * 2.0 * PI * k * z
                };
            }
        }
        rv * self.c2 * f
    }

    pub fn generator(&self) -> Hamiltonian {
        Hamiltonian::field(Arc::new(self.clone()))
    }

    /// The lead-coordinate generator on the level `N = n`.
    pub fn reduced(&self, n: f64) -> ReducedFamily {
        let (rv, _) = self.collar(n);
        ReducedFamily {
            family: self.clone(),
            n,
            weight: rv,
            area: self.target(n).0,
        }
    }

    /// The isotopy up to time `tau`.
    pub fn isotopy(&self, tau: f64, config: &FlowConfig) -> SymplecticMapChain {
        SymplecticMapChain::new(vec![Primitive::flow(
            Arc::new(self.generator()),
            0.0,
            tau,
            config.portion(tau),
        )])
    }

    /// Lead-coordinate images at each of the sorted `times`.
    pub fn lead_snapshots(&self, z1: Complex64, n: f64, times: &[f64], config: &FlowConfig) -> Result<Vec<Complex64>> {
        if n >= self.c_end + self.spec.window() || PI * z1.norm_sqr() >= self.outer_area(n) {
            return Ok(vec![z1; times.len()]);
        }
        let g = Hamiltonian::field(Arc::new(self.reduced(n)));
        Ok(flows::integrate_snapshots(&g, 0.0, times, &PhasePoint::new(vec![z1]), config)?
            .into_iter()
            .map(|p| p.coords()[0])
            .collect())
    }
}

impl FamilyDisjoiner {
    /// Lead-coordinate image at time `u`, integrated with the step size
    /// `1/config.steps` of the full isotopy.
    pub fn lead_image(&self, z1: Complex64, n: f64, u: f64, config: &FlowConfig) -> Result<Complex64> {
        if u <= 0.0 || n >= self.c_end + self.spec.window() || PI * z1.norm_sqr() >= self.outer_area(n) {
            return Ok(z1);
        }
        let g = Hamiltonian::field(Arc::new(self.reduced(n)));
        Ok(flows::integrate_flow(&g, 0.0, u, &PhasePoint::new(vec![z1]), &config.portion(u))?.coords()[0])
    }

    /// Full-dimensional image at time `u`.
    pub fn image(&self, z: &[Complex64], u: f64, config: &FlowConfig) -> Result<Vec<Complex64>> {
        let p = self.isotopy(u, config).apply(&PhasePoint::new(z.to_vec()))?;
        Ok(p.into_coords())
    }
}

impl ScalarField for FamilyDisjoiner {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, t: f64, z: &[Complex64]) -> f64 {
        self.eval(t, z, None)
    }

    fn gradient(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) {
        self.eval(t, z, Some(out));
    }

    fn vanishes_at(&self, z: &[Complex64]) -> bool {
        !self.supported_at(z)
    }

    fn name(&self) -> String {
        format!(
            "family-disjoiner(A₁={}, ε̄={}, lead={})",
            self.spec.a1, self.spec.eps_bar, self.spec.lead
        )
    }
}

/// `ρ_V(n)·c²·F^{A(n),ε}(z/c)` on `ℂ` for a fixed level `N = n`.
#[derive(Clone, Debug)]
pub struct ReducedFamily {
    family: FamilyDisjoiner,
    pub n: f64,
    weight: f64,
    area: f64,
}

impl ScalarField for ReducedFamily {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, t: f64, z: &[Complex64]) -> f64 {
        let c = self.family.c2.sqrt();
        self.weight * self.family.c2 * self.family.disc.eval_with(self.area, t, z[0] / c).0
    }

    fn gradient(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) {
        let c = self.family.c2.sqrt();
        out[0] = self.weight * c * self.family.disc.eval_with(self.area, t, z[0] / c).1;
    }

    fn vanishes_at(&self, z: &[Complex64]) -> bool {
        self.weight == 0.0 || PI * z[0].norm_sqr() >= self.family.outer_area(self.n)
    }

    fn name(&self) -> String {
        format!("reduced-family(N={})", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::fd_gradient;
    use crate::phase::WeightVector;
    use crate::sampling;
    use rand::Rng;

    fn model() -> EllipsoidModel {
        EllipsoidModel::new(WeightVector::new(vec![3, 1]).unwrap(), 1.0, 0.0).unwrap()
    }

    fn theorem_family() -> FamilyDisjoiner {
        let m = model();
        let spec = FamilyDisjoinSpec::theorem(m, 0, 1, 2, 0.2, 0.03).unwrap();
        FamilyDisjoiner::new(spec, &super::super::disc::default_flow()).unwrap()
    }

    #[test]
    fn containment_accepts_and_rejects() {
        assert!(check_theorem_containment(3, 1, 2, 0.2, 1.0).is_ok());
        let e = check_theorem_containment(3, 1, 2, 0.23, 1.0).unwrap_err();
        assert!(matches!(e, Error::Containment(_)));
        assert!(FamilyDisjoinSpec::theorem(model(), 0, 1, 2, 0.23, 0.01).is_err());
        // slack too large for the ellipsoid
        let spec = FamilyDisjoinSpec::theorem(model(), 0, 1, 2, 0.2, 0.2).unwrap();
        assert!(matches!(
            FamilyDisjoiner::new(spec, &FlowConfig::rk4(2000)),
            Err(Error::Containment(_))
        ));
    }

    #[test]
    fn effective_target_extends_the_profile() {
        let f = theorem_family();
        let (a, _) = f.target(0.0);
        assert!((f.c2 * a - (0.2 + f.spec.eps_bar / 8.0)).abs() < 1e-12);
        assert_eq!(f.target(0.5).0, 0.0);
    }

    #[test]
    fn gradient_matches_differences() {
        let f = theorem_family();
        let mut rng = sampling::rng(3);
        let m = model();
        let mut checked = 0;
        while checked < 40 {
            let p = sampling::ellipsoid_point(&m, &mut rng);
            let z = p.coords();
            if !f.supported_at(z) {
                continue;
            }
            checked += 1;
            let tau = rng.gen::<f64>();
            let mut g = vec![Complex64::new(0.0, 0.0); 2];
            f.eval(tau, z, Some(&mut g));
            let mut fd = vec![Complex64::new(0.0, 0.0); 2];
            fd_gradient(|w| f.eval(tau, w, None), z, &mut fd);
            for j in 0..2 {
                assert!((g[j] - fd[j]).norm() < 1e-5 * g[j].norm().max(1.0), "{j}: {} vs {}", g[j], fd[j]);
            }
        }
    }
}
