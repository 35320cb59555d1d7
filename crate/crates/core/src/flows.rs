//! Fixed-step integration of Hamiltonian flows and symplecticity audits.

use std::f64::consts::PI;

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use ode_solvers::dop_shared::IntegrationError;
use ode_solvers::{Dop853, OutputType, System};

use crate::calculus::Hamiltonian;
use crate::error::{Error, Result};
use crate::phase::{PhasePoint, SymplecticMapChain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk4,
    ImplicitMidpoint,
    /// Adaptive Dormand–Prince 8(5,3); `steps` caps the accepted steps.
    Dop853,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FlowConfig {
    pub method: Method,
    /// Total fixed steps over the integration interval.
    pub steps: usize,
    /// Tolerance for the symplecticity audit.
    pub tolerance: f64,
    /// Relative and absolute local error target of the adaptive method.
    pub rtol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            method: Method::Rk4,
            steps: 1000,
            tolerance: 1e-5,
            rtol: 1e-12,
        }
    }
}

impl FlowConfig {
    pub fn rk4(steps: usize) -> Self {
        FlowConfig {
            steps,
            ..Default::default()
        }
    }

    /// Adaptive stepping to local error `rtol`.
    pub fn adaptive(rtol: f64) -> Self {
        FlowConfig {
            method: Method::Dop853,
            steps: 1_000_000,
            rtol,
            ..Default::default()
        }
    }

    /// The config for a sub-interval covering `fraction` of the span: fixed
    /// step methods keep their step size, the adaptive one its budget.
    pub fn portion(&self, fraction: f64) -> Self {
        let steps = match self.method {
            Method::Dop853 => self.steps,
            _ => ((self.steps as f64) * fraction).ceil().max(1.0) as usize,
        };
        FlowConfig {
            steps,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("flow step count must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("symplecticity tolerance must be positive".into()));
        }
        if self.method == Method::Dop853 && !(self.rtol > 0.0) {
            return Err(Error::InvalidParameter("adaptive tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// `X_t(p)` as `2n` reals `(ẋ₁, ẏ₁, …)`.
pub fn hamiltonian_vector_field(h: &Hamiltonian, t: f64, p: &PhasePoint) -> Result<Vec<f64>> {
    p.check_dim(h.dim())?;
    let mut out = vec![Complex64::new(0.0, 0.0); p.dim()];
    h.vector_field(t, p.coords(), &mut out)?;
    Ok(out.iter().flat_map(|v| [v.re, v.im]).collect())
}

fn blow_up(z: &[Complex64]) -> bool {
    !z.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

fn rk4_segment(h: &Hamiltonian, t0: f64, t1: f64, z: &mut [Complex64], steps: usize) -> Result<()> {
    let n = z.len();
    let dt = (t1 - t0) / steps as f64;
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        h.vector_field(t, z, &mut k1)?;
        for j in 0..n {
            tmp[j] = z[j] + 0.5 * dt * k1[j];
        }
        h.vector_field(t + 0.5 * dt, &tmp, &mut k2)?;
        for j in 0..n {
            tmp[j] = z[j] + 0.5 * dt * k2[j];
        }
        h.vector_field(t + 0.5 * dt, &tmp, &mut k3)?;
        for j in 0..n {
            tmp[j] = z[j] + dt * k3[j];
        }
        h.vector_field(t + dt, &tmp, &mut k4)?;
        for j in 0..n {
            z[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if blow_up(z) {
            return Err(Error::FlowBlowUp { time: t + dt });
        }
    }
    Ok(())
}

fn midpoint_segment(h: &Hamiltonian, t0: f64, t1: f64, z: &mut [Complex64], steps: usize) -> Result<()> {
    let n = z.len();
    let dt = (t1 - t0) / steps as f64;
    let zero = Complex64::new(0.0, 0.0);
    let (mut next, mut mid, mut k) = (z.to_vec(), vec![zero; n], vec![zero; n]);
    for s in 0..steps {
        let tm = t0 + (s as f64 + 0.5) * dt;
        next.copy_from_slice(z);
        for _ in 0..100 {
            for j in 0..n {
                mid[j] = 0.5 * (z[j] + next[j]);
            }
            h.vector_field(tm, &mid, &mut k)?;
            let mut change = 0.0f64;
            for j in 0..n {
                let updated = z[j] + dt * k[j];
                change = change.max((updated - next[j]).norm());
                next[j] = updated;
            }
            if change < 1e-15 {
                break;
            }
        }
        z.copy_from_slice(&next);
        if blow_up(z) {
            return Err(Error::FlowBlowUp { time: tm + 0.5 * dt });
        }
    }
    Ok(())
}

struct Field<'a> {
    h: &'a Hamiltonian,
    z: RefCell<Vec<Complex64>>,
    dz: RefCell<Vec<Complex64>>,
    failure: &'a RefCell<Option<Error>>,
}

impl System<f64, DVector<f64>> for Field<'_> {
    fn system(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let mut z = self.z.borrow_mut();
        let mut dz = self.dz.borrow_mut();
        for (j, c) in z.iter_mut().enumerate() {
            *c = Complex64::new(y[2 * j], y[2 * j + 1]);
        }
        if let Err(e) = self.h.vector_field(t, &z, &mut dz) {
            self.failure.borrow_mut().get_or_insert(e);
            dy.fill(0.0);
            return;
        }
        for (j, c) in dz.iter().enumerate() {
            dy[2 * j] = c.re;
            dy[2 * j + 1] = c.im;
        }
    }
}

fn dop853_segment(h: &Hamiltonian, t0: f64, t1: f64, z: &mut [Complex64], config: &FlowConfig) -> Result<()> {
    let n = z.len();
    let failure = RefCell::new(None);
    let field = Field {
        h,
        z: RefCell::new(z.to_vec()),
        dz: RefCell::new(z.to_vec()),
        failure: &failure,
    };
    let y0 = DVector::from_iterator(2 * n, z.iter().flat_map(|c| [c.re, c.im]));
    let budget = u32::try_from(config.steps).unwrap_or(u32::MAX);
    let mut solver = Dop853::from_param(
        field,
        t0,
        t1,
        t1 - t0,
        y0,
        config.rtol,
        config.rtol,
        0.9,
        0.0,
        0.333,
        6.0,
        t1 - t0,
        0.0,
        budget,
        // stiffness detection is a diagnostic we do not want to abort on
        u32::MAX,
        OutputType::Sparse,
    );
    let outcome = solver.integrate();
    let end = solver.y_out().last().cloned();
    drop(solver);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    outcome.map_err(|e| match e {
        IntegrationError::MaxNumStepReached { x, .. } | IntegrationError::StepSizeUnderflow { x } => {
            Error::FlowBlowUp { time: x }
        }
        IntegrationError::StiffnessDetected { x } => Error::FlowBlowUp { time: x },
    })?;
    let y = end.ok_or(Error::FlowBlowUp { time: t0 })?;
    for (j, c) in z.iter_mut().enumerate() {
        *c = Complex64::new(y[2 * j], y[2 * j + 1]);
    }
    if blow_up(z) {
        return Err(Error::FlowBlowUp { time: t1 });
    }
    Ok(())
}

fn segment(h: &Hamiltonian, t0: f64, t1: f64, z: &mut [Complex64], config: &FlowConfig) -> Result<()> {
    match config.method {
        Method::Rk4 => rk4_segment(h, t0, t1, z, config.steps),
        Method::ImplicitMidpoint => midpoint_segment(h, t0, t1, z, config.steps),
        Method::Dop853 => dop853_segment(h, t0, t1, z, config),
    }
}

pub(crate) fn integrate_in_place(
    h: &Hamiltonian,
    t0: f64,
    t1: f64,
    z: &mut [Complex64],
    config: &FlowConfig,
) -> Result<()> {
    if t0 == t1 || h.vanishes_at(z) {
        return Ok(());
    }
    segment(h, t0, t1, z, config).map_err(as_blow_up)
}

/// A non-finite field along a trajectory is a blow-up of that trajectory.
fn as_blow_up(e: Error) -> Error {
    match e {
        Error::NonFiniteDerivative { time } => Error::FlowBlowUp { time },
        other => other,
    }
}

/// Image of `p` under the flow of `h` from `t0` to `t1`.
pub fn integrate_flow(
    h: &Hamiltonian,
    t0: f64,
    t1: f64,
    p: &PhasePoint,
    config: &FlowConfig,
) -> Result<PhasePoint> {
    config.validate()?;
    p.check_dim(h.dim())?;
    let mut z = p.coords().to_vec();
    integrate_in_place(h, t0, t1, &mut z, config)?;
    Ok(PhasePoint::new(z))
}

/// Flow images at each of the sorted `times` (all ≥ `t0`), integrating once.
/// The step size is that of `config.steps` over `[t0, times.last()]`.
pub fn integrate_snapshots(
    h: &Hamiltonian,
    t0: f64,
    times: &[f64],
    p: &PhasePoint,
    config: &FlowConfig,
) -> Result<Vec<PhasePoint>> {
    config.validate()?;
    p.check_dim(h.dim())?;
    let span = times.last().map(|t| t - t0).unwrap_or(0.0);
    let mut z = p.coords().to_vec();
    let mut out = Vec::with_capacity(times.len());
    let fixed = h.vanishes_at(&z);
    let mut current = t0;
    for &t in times {
        if t > current && !fixed {
            let seg = match config.method {
                Method::Dop853 => config.clone(),
                _ => FlowConfig {
                    steps: ((config.steps as f64) * (t - current) / span).round().max(1.0) as usize,
                    ..config.clone()
                },
            };
            segment(h, current, t, &mut z, &seg).map_err(as_blow_up)?;
        }
        current = t;
        out.push(PhasePoint::new(z.clone()));
    }
    Ok(out)
}

/// Max over `points` of `‖JᵀJ₀J − J₀‖_∞`, with `J` the central-difference
/// Jacobian of `map` in the real coordinates `(x₁, y₁, …)`.
pub fn audit_symplectic<F>(map: F, points: &[PhasePoint], fd_step: f64) -> Result<f64>
where
    F: Fn(&PhasePoint) -> Result<PhasePoint>,
{
    let mut worst = 0.0f64;
    for p in points {
        let reals = p.to_reals();
        let m = reals.len();
        let h = fd_step * p.coords().iter().map(|c| c.norm()).fold(1.0, f64::max);
        let central = |col: usize, h: f64| -> Result<Vec<f64>> {
            let mut plus = reals.clone();
            let mut minus = reals.clone();
            plus[col] += h;
            minus[col] -= h;
            let fp = map(&PhasePoint::from_reals(&plus))?.to_reals();
            let fm = map(&PhasePoint::from_reals(&minus))?.to_reals();
            Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        };
        let mut jac = DMatrix::<f64>::zeros(m, m);
        for col in 0..m {
            // one Richardson pass lifts the central difference to O(h⁴)
            let coarse = central(col, h)?;
            let fine = central(col, 0.5 * h)?;
            for row in 0..m {
                jac[(row, col)] = (4.0 * fine[row] - coarse[row]) / 3.0;
            }
        }
        let j0 = standard_form(m / 2);
        let dev = jac.transpose() * &j0 * &jac - &j0;
        worst = worst.max(dev.amax());
    }
    Ok(worst)
}

/// Audit of a map chain.
pub fn audit_chain(chain: &SymplecticMapChain, points: &[PhasePoint], fd_step: f64) -> Result<f64> {
    audit_symplectic(|p| chain.apply(p), points, fd_step)
}

/// Block-diagonal `J₀` for `ω₀ = Σ dx∧dy` in the ordering `(x₁, y₁, …)`.
pub fn standard_form(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// The orientation anchor: the flow of `−π|z|²` must be `e^{−2πit}`, and
/// its field at `1` must be `(0, −2π)`. Every entry point runs this.
pub fn sign_convention_self_test() -> Result<()> {
    let h = crate::calculus::circle_generator(&[1.0]);
    let one = PhasePoint::new(vec![Complex64::new(1.0, 0.0)]);
    let x = hamiltonian_vector_field(&h, 0.0, &one)?;
    if x[0].abs() > 1e-12 || (x[1] + 2.0 * PI).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "sign convention violated: field of −π|z|² at 1 is ({}, {}), expected (0, −2π)",
            x[0], x[1]
        )));
    }
    let t = 0.3;
    let q = integrate_flow(&h, 0.0, t, &one, &FlowConfig::default())?;
    let expected = Complex64::from_polar(1.0, -2.0 * PI * t);
    let err = (q.coords()[0] - expected).norm();
    if err > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "sign convention violated: flow of −π|z|² deviates from e^(−2πit) by {err:e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{circle_generator, Hamiltonian, QuadraticAffine};
    use crate::phase::Primitive;
    use crate::sampling;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn anchor_test_passes() {
        sign_convention_self_test().unwrap();
    }

    #[test]
    fn rotation_field_and_quarter_turn() {
        let h = circle_generator(&[1.0]);
        let x = hamiltonian_vector_field(&h, 0.0, &PhasePoint::new(vec![c(1.0, 0.0)])).unwrap();
        assert!(x[0].abs() < 1e-15 && (x[1] + 2.0 * PI).abs() < 1e-12);
        let q = integrate_flow(&h, 0.0, 0.25, &PhasePoint::new(vec![c(1.0, 0.0)]), &FlowConfig::rk4(1000)).unwrap();
        assert!((q.coords()[0] - c(0.0, -1.0)).norm() < 1e-8);
    }

    #[test]
    fn imaginary_part_generates_leftward_translation() {
        let mut q = QuadraticAffine::zero(1);
        // 2 Re(conj(ℓ) z) = y  ⇔  ℓ = i/2
        q.linear[0] = c(0.0, 0.5);
        let h = Hamiltonian::Quadratic(q);
        let x = hamiltonian_vector_field(&h, 0.0, &PhasePoint::new(vec![c(0.3, 0.2)])).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-15 && x[1].abs() < 1e-15);
    }

    #[test]
    fn constant_generator_has_no_field() {
        let h = Hamiltonian::constant(2, 4.0);
        let p = PhasePoint::new(vec![c(0.3, 0.2), c(-1.0, 0.0)]);
        assert!(hamiltonian_vector_field(&h, 0.0, &p).unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(integrate_flow(&h, 0.0, 1.0, &p, &FlowConfig::default()).unwrap(), p);
    }

    #[test]
    fn inverse_flow_matches_backward_rotation() {
        let h = std::sync::Arc::new(circle_generator(&[1.0]));
        let chain = SymplecticMapChain::new(vec![Primitive::flow(h, 0.0, 0.3, FlowConfig::default())]);
        let inv = chain.inverse();
        let rot = SymplecticMapChain::new(vec![Primitive::rotation(0, 1.0, -0.3)]);
        let model = crate::phase::EllipsoidModel::new(
            crate::phase::WeightVector::new(vec![1]).unwrap(),
            2.0,
            0.0,
        )
        .unwrap();
        for p in sampling::ellipsoid_points(&model, 50, 2) {
            let a = inv.apply(&p).unwrap();
            let b = rot.apply(&p).unwrap();
            assert!(a.distance(&b) < 1e-6);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let h = circle_generator(&[1.0]);
        let p = PhasePoint::new(vec![c(1.0, 0.0)]);
        let exact = Complex64::from_polar(1.0, -2.0 * PI);
        let e1 = (integrate_flow(&h, 0.0, 1.0, &p, &FlowConfig::rk4(25)).unwrap().coords()[0] - exact).norm();
        let e2 = (integrate_flow(&h, 0.0, 1.0, &p, &FlowConfig::rk4(100)).unwrap().coords()[0] - exact).norm();
        assert!(e1 / e2 >= 200.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn adaptive_method_reproduces_rotation() {
        let h = circle_generator(&[1.0]);
        let p = PhasePoint::new(vec![c(1.0, 0.0)]);
        let q = integrate_flow(&h, 0.0, 0.25, &p, &FlowConfig::adaptive(1e-12)).unwrap();
        assert!((q.coords()[0] - c(0.0, -1.0)).norm() < 1e-10);
        let snaps = integrate_snapshots(&h, 0.0, &[0.25, 0.5], &p, &FlowConfig::adaptive(1e-12)).unwrap();
        assert!((snaps[1].coords()[0] - c(-1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn adaptive_budget_exhaustion_is_reported() {
        let h = circle_generator(&[1.0]);
        let cfg = FlowConfig {
            steps: 2,
            ..FlowConfig::adaptive(1e-13)
        };
        let r = integrate_flow(&h, 0.0, 1.0, &PhasePoint::new(vec![c(1.0, 0.0)]), &cfg);
        assert!(matches!(r, Err(Error::FlowBlowUp { .. })));
    }

    #[test]
    fn midpoint_preserves_quadratic_energy() {
        let h = circle_generator(&[2.0, 1.0]);
        let cfg = FlowConfig {
            method: Method::ImplicitMidpoint,
            steps: 50,
            ..Default::default()
        };
        let p = PhasePoint::new(vec![c(0.3, 0.1), c(-0.2, 0.4)]);
        let q = integrate_flow(&h, 0.0, 1.0, &p, &cfg).unwrap();
        let before = h.value(0.0, p.coords()).unwrap();
        let after = h.value(0.0, q.coords()).unwrap();
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn snapshots_match_separate_integrations() {
        let h = circle_generator(&[1.0]);
        let p = PhasePoint::new(vec![c(0.5, 0.5)]);
        let snaps = integrate_snapshots(&h, 0.0, &[0.0, 0.5, 1.0], &p, &FlowConfig::rk4(200)).unwrap();
        let half = integrate_flow(&h, 0.0, 0.5, &p, &FlowConfig::rk4(100)).unwrap();
        assert_eq!(snaps[0], p);
        assert!(snaps[1].distance(&half) < 1e-14);
    }

    #[test]
    fn audit_detects_scaling() {
        let pts = vec![PhasePoint::new(vec![c(0.2, 0.1)])];
        let dev = audit_symplectic(
            |p| Ok(PhasePoint::new(p.coords().iter().map(|z| z * 2.0).collect())),
            &pts,
            1e-6,
        )
        .unwrap();
        assert!((dev - 3.0).abs() < 1e-6);
        let rot = SymplecticMapChain::new(vec![Primitive::rotation(0, 1.0, 0.17)]);
        assert!(audit_chain(&rot, &pts, 1e-6).unwrap() < 1e-9);
    }

    #[test]
    fn blow_up_is_reported_with_time() {
        struct Explode;
        impl crate::calculus::ScalarField for Explode {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, _t: f64, z: &[Complex64]) -> f64 {
                // ẋ = −∂H/∂y = x², blows up at t = 1/x₀
                -z[0].re * z[0].re * z[0].im
            }
            fn gradient(&self, _t: f64, z: &[Complex64], out: &mut [Complex64]) {
                out[0] = Complex64::new(0.0, -z[0].re * z[0].re);
            }
        }
        let h = Hamiltonian::field(std::sync::Arc::new(Explode));
        let err = integrate_flow(&h, 0.0, 5.0, &PhasePoint::new(vec![c(10.0, 0.0)]), &FlowConfig::rk4(20))
            .unwrap_err();
        assert!(matches!(err, Error::FlowBlowUp { .. }));
    }
}
