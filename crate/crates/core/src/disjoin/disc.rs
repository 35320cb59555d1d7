//! The disc disjoiner `F^{A,ε}_τ`: the slit-disc flow run for time `T`
//! (reparametrized by `ρ↑(2τ)`), then the annulus push run for time `A`
//! (reparametrized by `ρ↑(2τ − 1)`). At `τ = 1` the unit-area disc lands in
//! `{A < π|z|² < 1 + A + ε}`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::calculus::{Hamiltonian, ScalarField};
use crate::error::{Error, Result};
use crate::flows::{self, FlowConfig};
use crate::phase::{PhasePoint, Primitive, SymplecticMapChain};

use super::cutoff::SmoothCutoff;
use super::push::{angle_action, AnnulusPush, Collars};
use super::slit::SlitDisc;

/// Default duration of the slit stage. Longer runs let near-axis boundary
/// orbits circle the ring more often and pass closer to the origin.
pub const DEFAULT_STAGE_TIME: f64 = 1.2;
/// Uniformly spaced boundary samples used to size the collars.
pub const COLLAR_SAMPLES: usize = 2000;
/// Geometrically spaced samples per side of each axis crossing.
pub const NEAR_AXIS_SAMPLES: usize = 400;
/// Smallest acceptable angular and outer margins.
pub const MIN_MARGIN: f64 = 1e-3;
/// Ratio of slit-stage to push-stage step size.
pub const PUSH_COARSENING: f64 = 12.0;
/// Smallest acceptable inner (action) margin.
pub const MIN_INNER_MARGIN: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DisjoinSpec {
    /// Target inner area `A ≥ 0`.
    pub area: f64,
    pub eps: f64,
    /// Collar widths; measured from the slit stage when absent.
    pub collars: Option<Collars>,
    /// Slit-stage duration, [`DEFAULT_STAGE_TIME`] when absent.
    pub stage_time: Option<f64>,
}

impl DisjoinSpec {
    pub fn new(area: f64, eps: f64) -> Self {
        DisjoinSpec {
            area,
            eps,
            collars: None,
            stage_time: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.area >= 0.0 && self.area.is_finite()) {
            return Err(Error::DisjoinConfig(format!("A must be ≥ 0, got {}", self.area)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::DisjoinConfig(format!("ε must lie in (0,1), got {}", self.eps)));
        }
        if let Some(c) = self.collars {
            if !(c.min() > 0.0 && c.angle < PI && c.inner + c.outer < self.eps) {
                return Err(Error::DisjoinConfig(format!("collars {c:?} do not fit ε = {}", self.eps)));
            }
        }
        if let Some(t) = self.stage_time {
            if !(t > 2.0 / PI.sqrt()) {
                return Err(Error::DisjoinConfig(format!(
                    "slit stage must outlast the disc diameter 2/√π, got T = {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Extent of the slit-stage image of the unit-area disc.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CollarReport {
    pub stage_time: f64,
    pub min_action: f64,
    pub max_action: f64,
    /// `min(θ, 2π − θ)` over the image.
    pub angle_margin: f64,
    /// Half of each observed margin.
    pub collars: Collars,
}

/// The slit stage `τ ↦ T·2ρ↑'(2τ)·H^ε`, `τ ∈ [0, ½]`.
#[derive(Clone, Debug)]
struct SlitStage {
    slit: SlitDisc,
    time: f64,
    cutoff: Arc<SmoothCutoff>,
}

impl SlitStage {
    fn eval(&self, tau: f64, u: Complex64) -> (f64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        if !(tau > 0.0 && tau < 0.5) {
            return (0.0, zero);
        }
        let rate = self.time * 2.0 * self.cutoff.up_deriv(2.0 * tau);
        if rate == 0.0 || !self.slit.supported_at(u) {
            return (0.0, zero);
        }
        (rate * self.slit.value_at(u), rate * self.slit.gradient_at(u))
    }
}

impl ScalarField for SlitStage {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, t: f64, z: &[Complex64]) -> f64 {
        self.eval(t, z[0]).0
    }

    fn gradient(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) {
        out[0] = self.eval(t, z[0]).1;
    }

    fn name(&self) -> String {
        format!("slit-stage(ε={}, T={})", self.slit.eps, self.time)
    }
}

fn stage_config(config: &FlowConfig) -> FlowConfig {
    config.portion(0.5)
}

/// Flows the unit-area circle through the slit stage (with the same step
/// size the disjoiner uses) and measures how close its image comes to the
/// slit, the origin and the outer circle. The image of the disc is bounded
/// by the image of the circle and neither action nor angle has critical
/// points on the slit disc, so the extremes are attained on the circle.
/// Near-axis boundary points sweep around the outer ring and come back
/// close to the origin, so the circle is sampled geometrically towards the
/// axis crossings and the worst samples are refined by golden section.
pub fn measure_collar(eps: f64, stage_time: f64, config: &FlowConfig) -> Result<CollarReport> {
    let stage = Hamiltonian::field(Arc::new(SlitStage {
        slit: SlitDisc::new(eps)?,
        time: stage_time,
        cutoff: SmoothCutoff::shared(),
    }));
    let cfg = stage_config(config);
    let image = |phi: f64| -> Result<(f64, f64)> {
        let z = Complex64::from_polar((1.0 / PI).sqrt(), phi);
        let p = flows::integrate_flow(&stage, 0.0, 0.5, &PhasePoint::new(vec![z]), &cfg)?;
        Ok(angle_action(p.coords()[0]))
    };
    let mut phis: Vec<f64> = (0..COLLAR_SAMPLES)
        .map(|i| i as f64 * 2.0 * PI / COLLAR_SAMPLES as f64)
        .collect();
    for k in 0..NEAR_AXIS_SAMPLES {
        let eta = 10f64.powf(-7.0 + 6.0 * k as f64 / (NEAR_AXIS_SAMPLES - 1) as f64);
        phis.extend([eta, PI - eta, PI + eta, 2.0 * PI - eta]);
    }
    phis.sort_by(f64::total_cmp);
    phis.dedup();
    let images = phis.par_iter().map(|&p| image(p)).collect::<Result<Vec<_>>>()?;

    // margins to the four walls of the wedge
    let metrics: [fn((f64, f64), f64) -> f64; 4] = [
        |(th, _), _| th,
        |(th, _), _| 2.0 * PI - th,
        |(_, a), _| a,
        |(_, a), eps| 1.0 + eps - a,
    ];
    let mut worst = [f64::INFINITY; 4];
    for (m, metric) in metrics.iter().enumerate() {
        let vals: Vec<f64> = images.iter().map(|&im| metric(im, eps)).collect();
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        worst[m] = vals[order[0]];
        for &i in order.iter().take(4) {
            let lo = if i == 0 { phis[phis.len() - 1] - 2.0 * PI } else { phis[i - 1] };
            let hi = if i + 1 == phis.len() { phis[0] + 2.0 * PI } else { phis[i + 1] };
            let f = |phi: f64| image(phi).map(|im| metric(im, eps));
            worst[m] = worst[m].min(golden_min(f, lo, hi, 40)?);
        }
    }
    let (min_action, max_action) = images.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), im| {
        (lo.min(im.1), hi.max(im.1))
    });
    let angle_margin = worst[0].min(worst[1]);
    Ok(CollarReport {
        stage_time,
        min_action: min_action.min(worst[2]),
        max_action: max_action.max(1.0 + eps - worst[3]),
        angle_margin,
        collars: Collars {
            angle: 0.5 * angle_margin,
            inner: 0.5 * worst[2],
            outer: 0.5 * worst[3],
        },
    })
}

fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, iters: usize) -> Result<f64> {
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - gr * (b - a), a + gr * (b - a));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    let mut best = f1.min(f2);
    for _ in 0..iters {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2)?;
        }
        best = best.min(f1).min(f2);
    }
    Ok(best)
}

#[derive(Clone, Debug)]
pub struct DiscDisjoiner {
    pub area: f64,
    pub eps: f64,
    pub collars: Collars,
    pub stage_time: f64,
    pub collar: Option<CollarReport>,
    stage: SlitStage,
    push: AnnulusPush,
    cutoff: Arc<SmoothCutoff>,
}

/// Default integration budget for the disjoiner stages; ample for collar
/// sizing and action bookkeeping.
pub fn default_flow() -> FlowConfig {
    FlowConfig::rk4(4000)
}

/// Budget under which the slit stage is resolved finely enough for the
/// area audit: its shear near the slit needs ~12× the default steps.
pub fn audit_flow() -> FlowConfig {
    FlowConfig::rk4(48_000)
}

impl DiscDisjoiner {
    /// Builds `F^{A,ε}`; sizes the collars from `config` when
    /// `spec.collars` is absent.
    pub fn new(spec: &DisjoinSpec, config: &FlowConfig) -> Result<Self> {
        spec.validate()?;
        let stage_time = spec.stage_time.unwrap_or(DEFAULT_STAGE_TIME);
        let (collars, collar) = match spec.collars {
            Some(c) => (c, None),
            None => {
                let c = measure_collar(spec.eps, stage_time, config)?;
                let k = c.collars;
                if !(2.0 * k.angle >= MIN_MARGIN && 2.0 * k.outer >= MIN_MARGIN && 2.0 * k.inner >= MIN_INNER_MARGIN) {
                    return Err(Error::DisjoinConfig(format!(
                        "slit stage at T = {stage_time} leaves margins angle {:.3e}, inner {:.3e}, \
                         outer {:.3e} (need ≥ {MIN_MARGIN:e}, {MIN_INNER_MARGIN:e}, {MIN_MARGIN:e})",
                        2.0 * k.angle,
                        2.0 * k.inner,
                        2.0 * k.outer
                    )));
                }
                (k, Some(c))
            }
        };
        Ok(DiscDisjoiner {
            area: spec.area,
            eps: spec.eps,
            collars,
            stage_time,
            collar,
            stage: SlitStage {
                slit: SlitDisc::new(spec.eps)?,
                time: stage_time,
                cutoff: SmoothCutoff::shared(),
            },
            push: AnnulusPush::with_collars(spec.eps, collars).map_err(|e| Error::DisjoinConfig(e.to_string()))?,
            cutoff: SmoothCutoff::shared(),
        })
    }

    /// `(F, ∇F, ∂F/∂A)` at `(τ, u)` for target area `a` (collar fixed).
    pub fn eval_with(&self, a: f64, tau: f64, u: Complex64) -> (f64, Complex64, f64) {
        let zero = Complex64::new(0.0, 0.0);
        if tau <= 0.0 || tau >= 1.0 {
            return (0.0, zero, 0.0);
        }
        if tau < 0.5 {
            let (h, g) = self.stage.eval(tau, u);
            (h, g, 0.0)
        } else {
            let s = 2.0 * tau - 1.0;
            let rate = 2.0 * self.cutoff.up_deriv(s);
            if rate == 0.0 {
                return (0.0, zero, 0.0);
            }
            let up = self.cutoff.up(s);
            let (h, g, ht) = self.push.eval(a * up, u);
            (a * rate * h, a * rate * g, rate * (h + a * up * ht))
        }
    }

    /// Whether `u` can move at all for target area `a`.
    pub fn supported_with(&self, a: f64, u: Complex64) -> bool {
        PI * u.norm_sqr() < 1.0 + a.max(0.0) + self.eps
    }

    pub fn generator(&self) -> Hamiltonian {
        Hamiltonian::field(Arc::new(self.clone()))
    }

    /// Integration pieces up to `tau`: the slit stage at the step size of
    /// `config`, the push stage (smooth in the action) on a grid
    /// [`PUSH_COARSENING`] times coarser.
    fn pieces(&self, tau: f64, config: &FlowConfig) -> Vec<(f64, f64, FlowConfig)> {
        let mut out = Vec::with_capacity(2);
        let split = tau.min(0.5);
        if split > 0.0 {
            out.push((0.0, split, config.portion(split)));
        }
        if tau > 0.5 {
            out.push((0.5, tau, config.portion((tau - 0.5) / PUSH_COARSENING)));
        }
        out
    }

    /// The isotopy up to time `tau`, one integrated primitive per stage.
    pub fn isotopy(&self, tau: f64, config: &FlowConfig) -> SymplecticMapChain {
        let g = Arc::new(self.generator());
        SymplecticMapChain::new(
            self.pieces(tau, config)
                .into_iter()
                .map(|(a, b, c)| Primitive::flow(g.clone(), a, b, c))
                .collect(),
        )
    }

    pub fn image(&self, z: Complex64, tau: f64, config: &FlowConfig) -> Result<Complex64> {
        if !self.supported_with(self.area, z) {
            return Ok(z);
        }
        let g = self.generator();
        let mut p = PhasePoint::new(vec![z]);
        for (a, b, c) in self.pieces(tau, config) {
            p = flows::integrate_flow(&g, a, b, &p, &c)?;
        }
        Ok(p.coords()[0])
    }
}

impl ScalarField for DiscDisjoiner {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, t: f64, z: &[Complex64]) -> f64 {
        self.eval_with(self.area, t, z[0]).0
    }

    fn gradient(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) {
        out[0] = self.eval_with(self.area, t, z[0]).1;
    }

    fn vanishes_at(&self, z: &[Complex64]) -> bool {
        !self.supported_with(self.area, z[0])
    }

    fn name(&self) -> String {
        format!(
            "disc-disjoiner(A={}, ε={}, δ={:.2e}, T={})",
            self.area,
            self.eps,
            self.collars.min(),
            self.stage_time
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::fd_gradient;
    use crate::sampling;
    use rand::Rng;

    fn disjoiner(area: f64, eps: f64) -> DiscDisjoiner {
        DiscDisjoiner::new(&DisjoinSpec::new(area, eps), &default_flow()).unwrap()
    }

    #[test]
    fn collar_is_positive() {
        let d = disjoiner(1.0, 0.1);
        let c = d.collar.clone().unwrap();
        assert!(c.angle_margin > MIN_MARGIN && c.collars.inner > 0.0, "{c:?}");
        assert!(c.min_action > 0.0 && c.max_action < 1.1, "{c:?}");
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(DisjoinSpec::new(-1.0, 0.1).validate().is_err());
        assert!(DisjoinSpec::new(1.0, 1.5).validate().is_err());
        let spec = DisjoinSpec {
            stage_time: Some(1.0),
            ..DisjoinSpec::new(1.0, 0.1)
        };
        assert!(spec.validate().is_err());
        let spec = DisjoinSpec {
            collars: Some(Collars::uniform(0.2)),
            ..DisjoinSpec::new(1.0, 0.1)
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn gradient_and_area_derivative_match_differences() {
        let d = disjoiner(0.7, 0.2);
        let mut rng = sampling::rng(8);
        for _ in 0..60 {
            let tau = rng.gen::<f64>();
            let u = sampling::disc_point(2.0, &mut rng);
            let (_, g, da) = d.eval_with(0.7, tau, u);
            let mut fd = [Complex64::new(0.0, 0.0)];
            fd_gradient(|w| d.eval_with(0.7, tau, w[0]).0, &[u], &mut fd);
            assert!((fd[0] - g).norm() < 1e-5 * g.norm().max(1.0));
            let h = 1e-6;
            let fda = (d.eval_with(0.7 + h, tau, u).0 - d.eval_with(0.7 - h, tau, u).0) / (2.0 * h);
            assert!((fda - da).abs() < 1e-5 * da.abs().max(1.0));
        }
    }

    #[test]
    fn origin_is_displaced_for_zero_area() {
        let d = disjoiner(0.0, 0.2);
        let w = d.image(Complex64::new(0.0, 0.0), 1.0, &default_flow()).unwrap();
        let a = PI * w.norm_sqr();
        assert!(a > 0.0 && a < 1.2, "{w}");
    }

    #[test]
    fn disc_lands_in_the_annulus() {
        let d = disjoiner(0.5, 0.2);
        let mut rng = sampling::rng(1);
        let mut pts: Vec<Complex64> = (0..200).map(|_| sampling::disc_point(1.0, &mut rng)).collect();
        pts.extend(sampling::circle_points(1.0, 64));
        for z in pts {
            let a = PI * d.image(z, 1.0, &default_flow()).unwrap().norm_sqr();
            assert!(a > 0.5 && a < 1.7, "{z}: {a}");
        }
    }
}
