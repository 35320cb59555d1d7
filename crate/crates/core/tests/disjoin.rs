use std::f64::consts::PI;

use num_complex::Complex64;

use hofer_forge::disjoin::{
    default_flow, AnnulusPush, DiscDisjoiner, DisjoinSpec, FamilyDisjoinSpec, FamilyDisjoiner, SlitDisc, SmoothCutoff,
};
use hofer_forge::flows::{integrate_flow, FlowConfig};
use hofer_forge::{sampling, EllipsoidModel, Error, PhasePoint, WeightVector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn cutoff_plateaus_and_midpoint() {
    let rho = SmoothCutoff::shared();
    assert_eq!(rho.eval(-1.0), 1.0);
    assert_eq!(rho.eval(2.0), 0.0);
    assert!((rho.eval(0.5) - 0.5).abs() < 1e-12);
}

#[test]
fn slit_disc_values_and_flow() {
    let slit = SlitDisc::new(0.2).unwrap();
    let r = (0.8 / PI).sqrt();
    assert!((slit.value_at(c(0.0, r)) - r).abs() < 1e-15);
    assert_eq!(slit.value_at(c(0.0, (1.2 / PI).sqrt() + 1e-9)), 0.0);
    assert_eq!(slit.value_at(c(1.0, 1.0)), 0.0);

    let g = slit.generator();
    let mut rng = sampling::rng(4);
    let flow = FlowConfig::rk4(1500);
    for i in 0..500 {
        let z = if i % 10 == 0 {
            Complex64::from_polar((1.0 / PI).sqrt(), 2.0 * PI * i as f64 / 500.0)
        } else {
            sampling::disc_point(1.0, &mut rng)
        };
        let w = integrate_flow(&g, 0.0, 1.5, &PhasePoint::new(vec![z]), &flow).unwrap().coords()[0];
        assert!(PI * w.norm_sqr() < 1.2, "{z} → {w}");
        assert!(w.re < 0.0 || w.im.abs() > 1e-9, "{z} → {w} sits on the slit");
    }
}

#[test]
fn annulus_push_values() {
    let (eps, t) = (0.3, 0.4);
    let push = AnnulusPush::new(eps, 0.05).unwrap();
    let mid = Complex64::from_polar((( t + 0.5 * (1.0 + eps)) / PI).sqrt(), PI);
    assert!((push.value_at(t, mid) + 0.5).abs() < 1e-14);
    assert_eq!(push.value_at(t, Complex64::from_polar((t / PI).sqrt() * 0.99, PI)), 0.0);
    assert_eq!(push.value_at(t, Complex64::from_polar(((1.0 + t + eps) / PI).sqrt() * 1.01, PI)), 0.0);
}

#[test]
fn disc_disjoiner_small_cases() {
    let flow = default_flow();
    let d = DiscDisjoiner::new(&DisjoinSpec::new(0.0, 0.1), &flow).unwrap();
    let a = PI * d.image(c(0.0, 0.0), 1.0, &flow).unwrap().norm_sqr();
    assert!(a > 0.0 && a < 1.1, "{a}");

    let d = DiscDisjoiner::new(&DisjoinSpec::new(1.0, 0.1), &flow).unwrap();
    let mut rng = sampling::rng(8);
    for _ in 0..200 {
        let z = sampling::annulus_point(2.1, 4.0, &mut rng);
        assert!((d.image(z, 1.0, &flow).unwrap() - z).norm() <= 1e-9);
    }
    for _ in 0..50 {
        let z = sampling::disc_point(1.0, &mut rng);
        let a = PI * d.image(z, 1.0, &flow).unwrap().norm_sqr();
        assert!(a > 1.0 && a < 2.1, "{a}");
    }
}

#[test]
fn family_disjoiner_containment_and_disjointness() {
    let m = EllipsoidModel::new(WeightVector::new(vec![3, 1]).unwrap(), 1.0, 0.0).unwrap();
    assert!(FamilyDisjoinSpec::theorem(m.clone(), 0, 1, 2, 0.2, 0.03).is_ok());
    assert!(matches!(
        FamilyDisjoinSpec::theorem(m.clone(), 0, 1, 2, 0.23, 0.03),
        Err(Error::Containment(_))
    ));
    let spec = FamilyDisjoinSpec::theorem(m, 0, 1, 2, 0.2, 0.03).unwrap();
    let flow = FlowConfig::rk4(2000);
    let fam = FamilyDisjoiner::new(spec.clone(), &flow).unwrap();
    let mut rng = sampling::rng(12);
    for _ in 0..500 {
        let n = 0.1 * rand::Rng::gen::<f64>(&mut rng);
        let x = sampling::disc_point(spec.a1, &mut rng);
        let w = fam.lead_image(x, n, 1.0, &flow).unwrap();
        assert!(PI * w.norm_sqr() > spec.a2.at(n));
    }
    for _ in 0..100 {
        let z = [sampling::disc_point(spec.a1, &mut rng), sampling::disc_point(0.05, &mut rng)];
        let w = fam.image(&z, 1.0, &flow).unwrap();
        assert!((fam.fibre_norm(&w) - fam.fibre_norm(&z)).abs() < 1e-8);
    }
}
