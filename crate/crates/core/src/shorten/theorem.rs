//! Shortening the circle action of an isolated maximum on the ellipsoid
//! model by splitting the lead weight `k₁ = a + b`.
//!
//! `K = h − πb|z₁|²` and `F = −πa|z₁|² − N` generate commuting actions whose
//! composition is the original one. With `b_u` the inverse of the time-`u`
//! map `D_u` of the family disjoiner, the loop `ψ^K_t ∘ b_u ψ^F_t b_u⁻¹` has
//! generator `H̄_t = K + F b_u⁻¹ (ψ^K_t)⁻¹`. Substituting `z = ψ^K_t b_u x`
//! and using `K ∘ ψ^K_t = K`,
//!
//! `max_z H̄_t = max_x K(x) + F(D_u x)`, and likewise for the minimum,
//!
//! so the extremes do not depend on `t`. Since `D_u` preserves `N` and acts
//! on `z₁` through the level `N` only, they are searched over `(x₁, N)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::calculus::{circle_flow, report_from_profile, HoferReport, LengthConfig, LoopGenerator, QuadraticAffine};
use crate::calculus::Hamiltonian;
use crate::disjoin::{FamilyDisjoinSpec, FamilyDisjoiner};
use crate::error::{Error, Result};
use crate::flows::FlowConfig;
use crate::phase::EllipsoidModel;
use crate::quadrature;
use crate::sampling;

use super::loops::two_summand_loop;


#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ShorteningScenario {
    pub model: EllipsoidModel,
    /// Coordinate carrying the split weight `k₁`.
    pub lead: usize,
    pub a: u32,
    pub b: u32,
    /// Gap parameter `0 < d < α`.
    pub d: f64,
}

impl ShorteningScenario {
    /// Lead weight maximizing `ab/k₁²` with `a = ⌊k₁/2⌋`, `b = ⌈k₁/2⌉`
    /// (an even weight if there is one; ties go to the first index).
    pub fn canonical(model: EllipsoidModel, d: f64) -> Result<Self> {
        let ratio = |k: u32| ((k / 2) * k.div_ceil(2)) as f64 / (k * k) as f64;
        let lead = model
            .weights
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &k)| k >= 2)
            .fold(None, |best: Option<(usize, u32)>, (j, &k)| match best {
                Some((_, bk)) if ratio(bk) >= ratio(k) => best,
                _ => Some((j, k)),
            })
            .ok_or_else(|| Error::InvalidParameter("all weights are 1: no weight can be split".into()))?
            .0;
        let k = model.weights.get(lead);
        Self::with_split(model, lead, k / 2, k.div_ceil(2), d)
    }

    pub fn with_split(model: EllipsoidModel, lead: usize, a: u32, b: u32, d: f64) -> Result<Self> {
        let s = ShorteningScenario { model, lead, a, b, d };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lead >= self.model.dim() {
            return Err(Error::InvalidParameter(format!("lead index {} out of range", self.lead)));
        }
        if self.a == 0 || self.b == 0 || self.a + self.b != self.k1() {
            return Err(Error::InvalidParameter(format!(
                "split {} + {} does not decompose k₁ = {}",
                self.a,
                self.b,
                self.k1()
            )));
        }
        if !(self.d > 0.0 && self.d < self.model.alpha) {
            return Err(Error::InvalidParameter(format!(
                "gap d = {} must lie in (0, α = {})",
                self.d, self.model.alpha
            )));
        }
        crate::disjoin::check_theorem_containment(self.k1(), self.a, self.b, self.shortening(), self.model.alpha)
    }

    pub fn k1(&self) -> u32 {
        self.model.weights.get(self.lead)
    }

    fn ratio(&self) -> f64 {
        (self.a * self.b) as f64 / (self.k1() * self.k1()) as f64
    }

    /// Target shortening `s = (ab/k₁²)·d`.
    pub fn shortening(&self) -> f64 {
        self.ratio() * self.d
    }

    /// Supremum `(ab/k₁²)·α` of admissible shortenings.
    pub fn bound(&self) -> f64 {
        self.ratio() * self.model.alpha
    }

    /// `K = h − πb|z₁|²`.
    pub fn k_generator(&self) -> Hamiltonian {
        let mut q = QuadraticAffine::zero(self.model.dim());
        q.constant = self.model.h_max;
        q.quad[self.lead] = -(self.b as f64);
        Hamiltonian::Quadratic(q)
    }

    /// `F = −πa|z₁|² − N`.
    pub fn f_generator(&self) -> Hamiltonian {
        let quad = self
            .model
            .weights
            .as_slice()
            .iter()
            .enumerate()
            .map(|(j, &k)| if j == self.lead { -(self.a as f64) } else { -(k as f64) })
            .collect();
        Hamiltonian::Quadratic(QuadraticAffine::diagonal(quad))
    }

    fn k_speeds(&self) -> Vec<f64> {
        (0..self.model.dim())
            .map(|j| if j == self.lead { self.b as f64 } else { 0.0 })
            .collect()
    }
}

/// Search effort of the `(x₁, N)` extremizer.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CloudConfig {
    pub levels: usize,
    pub radii: usize,
    pub angles: usize,
    pub refine_candidates: usize,
    pub refine_sweeps: usize,
    /// Random support points for the infimum and disjointness checks.
    pub samples: usize,
}

impl Default for CloudConfig {
    fn default() -> Self {
        CloudConfig {
            levels: 25,
            radii: 12,
            angles: 24,
            refine_candidates: 3,
            refine_sweeps: 3,
            samples: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PipelineConfig {
    /// Deformation parameters `u`, starting at 0.
    pub path: Vec<f64>,
    pub length: LengthConfig,
    pub flow: FlowConfig,
    /// `ε̄` as a fraction of the largest slack allowed by containment.
    pub slack_fraction: f64,
    /// Absolute `ε̄`, overriding `slack_fraction`.
    pub eps_bar: Option<f64>,
    pub cloud: CloudConfig,
    pub seed: u64,
    /// Absolute tolerance on the measured drop.
    pub tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            path: (0..=10).map(|i| i as f64 / 10.0).collect(),
            length: LengthConfig::default(),
            flow: FlowConfig::rk4(2000),
            slack_fraction: 0.8,
            eps_bar: None,
            cloud: CloudConfig::default(),
            seed: 0,
            tol: 0.01,
        }
    }
}

/// `(x₁, N)` location of an extremum.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CloudPoint {
    pub re: f64,
    pub im: f64,
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PathPoint {
    pub u: f64,
    pub max: f64,
    pub min: f64,
    pub argmax: CloudPoint,
    /// Best value of the coarse cloud before refinement.
    pub cloud_max: f64,
    pub flows: usize,
    pub report: HoferReport,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Error budget of the measured drop.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ToleranceBudget {
    /// Refinement gain over the coarse cloud at `u = 1`.
    pub grid: f64,
    pub simpson: f64,
    /// Change of the `u = 1` maximum under step doubling.
    pub flow: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ShorteningReport {
    pub scenario: ShorteningScenario,
    pub s: f64,
    pub bound: f64,
    pub eps_bar: f64,
    pub rescaled_eps: f64,
    pub path: Vec<PathPoint>,
    /// `ℓ₊(0) − ℓ₊(1)`.
    pub drop: f64,
    pub budget: ToleranceBudget,
    pub checks: Vec<Check>,
}

impl ShorteningReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub struct PipelineResult {
    pub report: ShorteningReport,
    /// One loop generator per path point.
    pub loops: Vec<LoopGenerator>,
    pub disjoiner: FamilyDisjoiner,
}

struct Reduced<'a> {
    fam: &'a FamilyDisjoiner,
    sc: &'a ShorteningScenario,
    flow: &'a FlowConfig,
}

impl Reduced<'_> {
    fn n_top(&self) -> f64 {
        self.fam.c_end + self.fam.spec.window()
    }

    fn bound(&self, p: &CloudPoint) -> f64 {
        self.sc.model.h_max - PI * self.sc.b as f64 * (p.re * p.re + p.im * p.im) - p.level
    }

    /// `K(x) + F(D_u x)`.
    fn value(&self, u: f64, p: &CloudPoint) -> Result<f64> {
        let w = self.fam.lead_image(Complex64::new(p.re, p.im), p.level, u, self.flow)?;
        Ok(self.bound(p) - PI * self.sc.a as f64 * w.norm_sqr())
    }

    fn support_radius(&self, n: f64) -> f64 {
        (self.fam.outer_area(n) / PI).sqrt()
    }

    /// Largest value over points the disjoiner does not move: the support
    /// boundary of each level and the levels beyond the collar.
    fn unmoved_max(&self, levels: &[f64]) -> f64 {
        let k1 = self.sc.k1() as f64;
        let h = self.sc.model.h_max;
        levels
            .iter()
            .map(|&n| h - k1 * self.fam.outer_area(n) - n)
            .fold(h - self.n_top(), f64::max)
    }

    fn cloud(&self, cfg: &CloudConfig) -> (Vec<f64>, Vec<CloudPoint>) {
        let top = self.n_top();
        let levels = quadrature::nodes(0.0, top, cfg.levels.max(2));
        let mut pts = Vec::new();
        for &n in &levels {
            let r = self.support_radius(n);
            pts.push(CloudPoint { re: 0.0, im: 0.0, level: n });
            for i in 1..=cfg.radii {
                let rad = r * i as f64 / (cfg.radii as f64 + 0.5);
                let shift = if i % 2 == 1 { 0.5 } else { 0.0 };
                for j in 0..cfg.angles {
                    let th = 2.0 * PI * (j as f64 + shift) / cfg.angles as f64;
                    pts.push(CloudPoint {
                        re: rad * th.cos(),
                        im: rad * th.sin(),
                        level: n,
                    });
                }
            }
        }
        (levels, pts)
    }

    /// Sup of `K + F∘D_u`: pruned cloud plus golden-section refinement.
    fn maximize(&self, u: f64, cfg: &CloudConfig) -> Result<(f64, CloudPoint, f64, usize)> {
        let (levels, mut pts) = self.cloud(cfg);
        pts.sort_by(|a, b| self.bound(b).total_cmp(&self.bound(a)));
        let mut best = self.unmoved_max(&levels);
        let mut arg = CloudPoint { re: 0.0, im: 0.0, level: self.n_top() };
        let mut evaluated: Vec<(f64, CloudPoint)> = Vec::new();
        let mut flows = 0;
        for p in pts {
            // F ≤ −N, so the bound is exact from above
            if self.bound(&p) <= best {
                break;
            }
            let v = self.value(u, &p)?;
            flows += 1;
            evaluated.push((v, p));
            if v > best {
                best = v;
                arg = p;
            }
        }
        let cloud_max = best;
        evaluated.sort_by(|a, b| b.0.total_cmp(&a.0));
        let top = self.n_top();
        let dr = self.support_radius(0.0) / cfg.radii as f64;
        let dn = top / (cfg.levels.max(2) - 1) as f64;
        for (v0, p0) in evaluated.into_iter().take(cfg.refine_candidates) {
            let (mut p, mut v) = (p0, v0);
            let mut window = [dr, dr, dn];
            for _ in 0..cfg.refine_sweeps {
                for axis in 0..3 {
                    let at = |s: f64| {
                        let mut q = p;
                        match axis {
                            0 => q.re += s,
                            1 => q.im += s,
                            _ => q.level = (q.level + s).clamp(0.0, top),
                        }
                        q
                    };
                    let (s, sv, n) = golden_max(|s| self.value(u, &at(s)), -window[axis], window[axis], 18)?;
                    flows += n;
                    if sv > v {
                        v = sv;
                        p = at(s);
                    }
                    window[axis] *= 0.5;
                }
            }
            if v > best {
                best = v;
                arg = p;
            }
        }
        Ok((best, arg, cloud_max, flows))
    }

    /// Smallest value over random points of the lead disc `π|x₁|² ≤ A₁`.
    fn sampled_min(&self, u: f64, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = sampling::rng(seed);
        let radius = (self.fam.spec.a1 / PI).sqrt();
        let mut lo = f64::INFINITY;
        for _ in 0..samples {
            let n = self.fam.c_end * rng.gen::<f64>();
            let r = radius * rng.gen::<f64>().sqrt();
            let th = 2.0 * PI * rng.gen::<f64>();
            lo = lo.min(self.value(u, &CloudPoint { re: r * th.cos(), im: r * th.sin(), level: n })?);
        }
        Ok(lo)
    }

    /// `max_N k₁·outer(N) + N − α`: nonpositive iff every support disc sits
    /// inside the ellipsoid slice. The flow maps its support into itself,
    /// so then `K + F∘D_u ≥ h − α` everywhere.
    fn support_excess(&self) -> f64 {
        let k1 = self.sc.k1() as f64;
        quadrature::nodes(0.0, self.n_top(), 4001)
            .into_iter()
            .map(|n| k1 * self.fam.outer_area(n) + n - self.sc.model.alpha)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, iters: usize) -> Result<(f64, f64, usize)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..iters {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1, iters + 2) } else { (x2, f2, iters + 2) })
}

/// Embeds `(x₁, N)` as a full point: `N` is put on the first other axis.
fn embed(sc: &ShorteningScenario, p: &CloudPoint) -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0); sc.model.dim()];
    z[sc.lead] = Complex64::new(p.re, p.im);
    if let Some(j) = (0..z.len()).find(|&j| j != sc.lead) {
        z[j] = Complex64::new((p.level / (PI * sc.model.weights.get(j) as f64)).sqrt(), 0.0);
    }
    z
}

/// Builds the disjoiner for the scenario and measures the loop family
/// along `config.path`.
pub fn theorem_isolated_pipeline(scenario: &ShorteningScenario, config: &PipelineConfig) -> Result<PipelineResult> {
    scenario.validate()?;
    quadrature::check_simpson_nodes(config.length.t_nodes)?;
    if config.path.first() != Some(&0.0) || config.path.iter().any(|u| !(0.0..=1.0).contains(u)) {
        return Err(Error::InvalidParameter("the deformation path must start at u = 0 and stay in [0, 1]".into()));
    }
    let s = scenario.shortening();
    let (a, b) = (scenario.a, scenario.b);
    let model = &scenario.model;
    let probe = FamilyDisjoinSpec::theorem(model.clone(), scenario.lead, a, b, s, 1.0)?;
    let slack = FamilyDisjoinSpec::slack_bound(model, scenario.lead, probe.a1, probe.a2);
    let eps_bar = match config.eps_bar {
        Some(e) if !(e > 0.0 && e < slack) => {
            return Err(Error::InvalidParameter(format!("ε̄ = {e} must lie in (0, {slack:.6}) for this split")));
        }
        Some(e) => e,
        None => config.slack_fraction * slack,
    };
    let spec = FamilyDisjoinSpec::theorem(model.clone(), scenario.lead, a, b, s, eps_bar)?;
    let fam = FamilyDisjoiner::new(spec, &config.flow)?;
    let red = Reduced {
        fam: &fam,
        sc: scenario,
        flow: &config.flow,
    };
    let h = model.h_max;
    let floor = h - model.alpha;

    let measured = config
        .path
        .par_iter()
        .enumerate()
        .map(|(i, &u)| {
            let (max, argmax, cloud_max, flows) = red.maximize(u, &config.cloud)?;
            let sampled = red.sampled_min(u, config.cloud.samples, config.seed.wrapping_add(i as u64))?;
            let min = floor.min(sampled);
            let fine_n = 2 * config.length.t_nodes - 1;
            let profile: Vec<(f64, f64, f64)> =
                quadrature::nodes(0.0, 1.0, fine_n).into_iter().map(|t| (t, max, min)).collect();
            let report = report_from_profile(&profile, config.length.reference)?;
            Ok(PathPoint {
                u,
                max,
                min,
                argmax,
                cloud_max,
                flows,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // loop generators; b_u = D_u⁻¹
    let k = scenario.k_generator();
    let f = scenario.f_generator();
    let loops = config
        .path
        .iter()
        .map(|&u| {
            let b = fam.isotopy(u, &config.flow).inverse();
            two_summand_loop(&k, &f, circle_flow(&scenario.k_speeds()), &b, model)
        })
        .collect::<Result<Vec<_>>>()?;

    let last = measured.last().expect("non-empty path");
    let first = &measured[0];
    let mut checks = Vec::new();

    // disjointness of D_1: {π|x₁|² ≤ A₁} lands outside {π|z₁|² ≤ A₂(N)}
    if last.u == 1.0 {
        let mut rng = sampling::rng(config.seed ^ 0x5eed);
        let mut worst = f64::INFINITY;
        for i in 0..config.cloud.samples {
            let n = fam.c_end * rng.gen::<f64>();
            let r = if i % 4 == 0 { 1.0 } else { rng.gen::<f64>().sqrt() };
            let x = Complex64::from_polar((fam.spec.a1 / PI).sqrt() * r, 2.0 * PI * rng.gen::<f64>());
            let w = fam.lead_image(x, n, 1.0, &config.flow)?;
            worst = worst.min(PI * w.norm_sqr() - fam.spec.a2.at(n));
        }
        if !(worst > 0.0) {
            return Err(Error::Disjointness(format!(
                "a point of the A₁-disc lands {:.3e} inside the A₂-disc",
                -worst
            )));
        }
        checks.push(Check::new("disjointness", true, format!("min π|D₁x|² − A₂(N) = {worst:.3e}")));
    }

    let drop = first.report.ell_plus - last.report.ell_plus;
    let flow_err = if last.u > 0.0 {
        let fine = FlowConfig {
            steps: 2 * config.flow.steps,
            ..config.flow.clone()
        };
        let w = fam.lead_image(Complex64::new(last.argmax.re, last.argmax.im), last.argmax.level, last.u, &fine)?;
        let v = red.bound(&last.argmax) - PI * a as f64 * w.norm_sqr();
        (v - last.max).abs()
    } else {
        0.0
    };
    let budget = ToleranceBudget {
        grid: last.max - last.cloud_max,
        simpson: last.report.quad_error,
        flow: flow_err,
        total: (last.max - last.cloud_max) + last.report.quad_error + flow_err,
    };
    checks.push(Check::new(
        "drop",
        drop >= s - config.tol,
        format!("ℓ₊ drop {drop:.6} vs s − tol = {:.6}", s - config.tol),
    ));
    let worst_max = measured.iter().map(|p| p.max).fold(f64::NEG_INFINITY, f64::max);
    let worst_plus = measured.iter().map(|p| p.report.ell_plus).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::new(
        "monotone-safety",
        worst_max <= h + 1e-6 && worst_plus <= first.report.ell_plus + config.tol,
        format!("max over path and t of max H̄ = {worst_max:.3e} vs max H = {h}"),
    ));
    let inf_dev = measured.iter().map(|p| (p.min - floor).abs()).fold(0.0, f64::max);
    let excess = red.support_excess();
    checks.push(Check::new(
        "infimum-constant",
        inf_dev <= 1e-6 && excess <= 0.0,
        format!("sampled min H̄ deviates from min H = {floor} by {inf_dev:.3e}; support excess {excess:.3e}"),
    ));
    let base_dev = (first.report.total - model.alpha).abs();
    checks.push(Check::new(
        "undeformed-length",
        base_dev <= 0.01 * model.alpha,
        format!("length at u = 0 is {:.6} (α = {})", first.report.total, model.alpha),
    ));

    // the assembled generator at ψ^K_t(x*) must reproduce the reduced maximum
    let x = embed(scenario, &last.argmax);
    let lp = loops.last().expect("non-empty path");
    let mut gen_dev = 0.0f64;
    for t in [0.0, 0.3, 0.7] {
        let mut z = x.clone();
        crate::phase::SymplecticMapChain::circle_action(&scenario.k_speeds(), t).apply_in_place(&mut z)?;
        gen_dev = gen_dev.max((lp.generator.value(t, &z)? - last.max).abs());
    }
    checks.push(Check::new(
        "generator-consistency",
        gen_dev <= 1e-6,
        format!("assembled generator at the maximizer differs by {gen_dev:.3e}"),
    ));

    // N is preserved by the full-dimensional isotopy. Samples come from the
    // lead disc: the push collars outside it are far too stiff for a
    // fixed-step integrator at this resolution.
    let mut rng = sampling::rng(config.seed ^ 0xf00d);
    let mut n_dev = 0.0f64;
    for _ in 0..20 {
        let n = fam.c_end * rng.gen::<f64>();
        let r = (fam.spec.a1 / PI).sqrt() * rng.gen::<f64>().sqrt();
        let th = 2.0 * PI * rng.gen::<f64>();
        let x = embed(scenario, &CloudPoint { re: r * th.cos(), im: r * th.sin(), level: n });
        let y = fam.image(&x, 1.0, &config.flow)?;
        n_dev = n_dev.max((fam.fibre_norm(&y) - fam.fibre_norm(&x)).abs());
    }
    checks.push(Check::new("n-preserved", n_dev <= 1e-8, format!("|ΔN| ≤ {n_dev:.3e}")));

    Ok(PipelineResult {
        report: ShorteningReport {
            scenario: scenario.clone(),
            s,
            bound: scenario.bound(),
            eps_bar,
            rescaled_eps: fam.eps,
            path: measured,
            drop,
            budget,
            checks,
        },
        loops,
        disjoiner: fam,
    })
}
