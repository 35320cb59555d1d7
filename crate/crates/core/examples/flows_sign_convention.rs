//! The sign convention X = i∇H, the RK4 order, and the slit generator
//! pushing the origin toward negative x.

use num_complex::Complex64;

use hofer_forge::calculus::{circle_generator, Hamiltonian};
use hofer_forge::disjoin::SlitDisc;
use hofer_forge::flows::{audit_symplectic, integrate_flow, sign_convention_self_test, FlowConfig};
use hofer_forge::PhasePoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    sign_convention_self_test()?;
    let h = circle_generator(&[1.0]);
    let one = PhasePoint::new(vec![Complex64::new(1.0, 0.0)]);
    let q = integrate_flow(&h, 0.0, 0.25, &one, &FlowConfig::rk4(1000))?;
    println!("flow of −π|z|² for t = ¼ sends 1 to {:.10}", q.coords()[0]);

    let exact = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * 0.8);
    let err = |steps| -> Result<f64, hofer_forge::Error> {
        Ok((integrate_flow(&h, 0.0, 0.8, &one, &FlowConfig::rk4(steps))?.coords()[0] - exact).norm())
    };
    let (e1, e4) = (err(50)?, err(200)?);
    println!("RK4 error at 50 / 200 steps: {e1:.3e} / {e4:.3e}, ratio {:.1}", e1 / e4);

    let slit: Hamiltonian = SlitDisc::new(0.1)?.generator();
    let moved = integrate_flow(&slit, 0.0, 1.0, &PhasePoint::zeros(1), &FlowConfig::rk4(1000))?;
    println!("slit generator moves the origin to {:.6}", moved.coords()[0]);
    let audit = audit_symplectic(|p| integrate_flow(&slit, 0.0, 1.0, p, &FlowConfig::rk4(1000)), &[PhasePoint::zeros(1)], 1e-5)?;
    println!("symplecticity defect of that map at 0: {audit:.2e}");
    Ok(())
}
