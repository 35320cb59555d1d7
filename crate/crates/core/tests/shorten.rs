use std::f64::consts::PI;

use num_complex::Complex64;

use hofer_forge::calculus::{circle_flow, circle_generator, translation_chain, Extremizer, Hamiltonian, QuadraticAffine, StandardExtremizer};
use hofer_forge::shorten::{
    circle_flows, k_summand_loop, polterovich_loop, theorem_isolated_pipeline, two_summand_loop, weight_split, PipelineConfig,
    ShorteningScenario,
};
use hofer_forge::{sampling, EllipsoidModel, SymplecticMapChain, WeightVector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn model(k: Vec<u32>, alpha: f64) -> EllipsoidModel {
    EllipsoidModel::new(WeightVector::new(k).unwrap(), alpha, 0.0).unwrap()
}

#[test]
fn polterovich_examples() {
    let ex = StandardExtremizer::default();
    let h = circle_generator(&[2.0]);
    let m = model(vec![1], 100.0);
    let id = polterovich_loop(&h, &SymplecticMapChain::identity(), &m).unwrap();
    let z = [c(0.4, -0.3)];
    assert!((id.generator.value(0.3, &z).unwrap() - h.value(0.3, &z).unwrap()).abs() < 1e-12);

    let lp = polterovich_loop(&h, &translation_chain(0, c(3.0, 0.0)), &m).unwrap();
    assert!((ex.extrema(&lp.generator, 0.0, &m).unwrap().0 + 4.5 * PI).abs() < 1e-9);
    for i in 0..257 {
        assert!(ex.extrema(&lp.generator, i as f64 / 256.0, &m).unwrap().0 <= 0.0);
    }
}

#[test]
fn summand_loops_with_identity_maps_are_the_action() {
    let m = model(vec![3, 1], 1.0);
    let k = Hamiltonian::Quadratic(QuadraticAffine::diagonal(vec![-2.0, 0.0]));
    let f = Hamiltonian::Quadratic(QuadraticAffine::diagonal(vec![-1.0, -1.0]));
    let two = two_summand_loop(&k, &f, circle_flow(&[2.0, 0.0]), &SymplecticMapChain::identity(), &m).unwrap();
    let w = WeightVector::new(vec![3, 5]).unwrap();
    let split = weight_split(&w);
    let hs = split.summands(&w).unwrap();
    let ids = vec![SymplecticMapChain::identity(); split.k()];
    let many = k_summand_loop(&hs, &circle_flows(&hs).unwrap(), &ids, &model(vec![3, 5], 1.0)).unwrap();
    let mut rng = sampling::rng(1);
    for _ in 0..50 {
        let z = [sampling::disc_point(0.1, &mut rng), sampling::disc_point(0.1, &mut rng)];
        let t: f64 = rand::Rng::gen(&mut rng);
        let h31 = circle_generator(&[3.0, 1.0]).value(t, &z).unwrap();
        let h35 = circle_generator(&[3.0, 5.0]).value(t, &z).unwrap();
        assert!((two.generator.value(t, &z).unwrap() - h31).abs() < 1e-12);
        assert!((many.generator.value(t, &z).unwrap() - h35).abs() < 1e-12);
    }
}

#[test]
fn k_summand_collapse_and_strictness() {
    let m = model(vec![2], 4.0);
    let hs = vec![circle_generator(&[1.0]), circle_generator(&[1.0])];
    let b = translation_chain(0, c(0.3, 0.0));
    let kl = k_summand_loop(&hs, &circle_flows(&hs).unwrap(), &[b.clone()], &m).unwrap();
    let tl = two_summand_loop(&hs[0], &hs[1], circle_flow(&[1.0]), &b, &m).unwrap();
    let mut rng = sampling::rng(2);
    for _ in 0..50 {
        let z = [sampling::disc_point(1.0, &mut rng)];
        let t: f64 = rand::Rng::gen(&mut rng);
        assert!((kl.generator.value(t, &z).unwrap() - tl.generator.value(t, &z).unwrap()).abs() < 1e-12);
    }
    let (hi, _) = StandardExtremizer::default().extrema(&kl.generator, 0.0, &m).unwrap();
    assert!(hi < 0.0);
}

#[test]
fn weight_split_examples() {
    let w = WeightVector::new(vec![3, 5]).unwrap();
    let s = weight_split(&w);
    assert_eq!(s.k(), 2);
    assert_eq!(s.rows, vec![vec![1, 1], vec![1, 1], vec![1, 3]]);
    let one = weight_split(&WeightVector::new(vec![1]).unwrap());
    assert_eq!((one.k(), one.rows.clone()), (0, vec![vec![1]]));
    let hs = s.summands(&w).unwrap();
    let mut rng = sampling::rng(3);
    for _ in 0..100 {
        let z = [sampling::disc_point(1.0, &mut rng), sampling::disc_point(1.0, &mut rng)];
        let sum: f64 = hs.iter().map(|h| h.value(0.0, &z).unwrap()).sum();
        let direct = -3.0 * PI * z[0].norm_sqr() - 5.0 * PI * z[1].norm_sqr();
        assert!((sum - direct).abs() < 1e-12);
    }
}

#[test]
fn theorem_data_lowers_the_maximum_by_s() {
    let scenario = ShorteningScenario::canonical(model(vec![3, 1], 1.0), 0.9).unwrap();
    assert_eq!((scenario.a, scenario.b), (1, 2));
    let cfg = PipelineConfig {
        path: vec![0.0, 1.0],
        ..Default::default()
    };
    let r = theorem_isolated_pipeline(&scenario, &cfg).unwrap().report;
    assert!((r.s - 0.2).abs() < 1e-12);
    let (first, last) = (&r.path[0], &r.path[1]);
    assert!((first.report.total - 1.0).abs() < 0.01);
    assert!(last.max <= -r.s, "{}", last.max);
    assert!((last.min + 1.0).abs() < 1e-6);
    assert!(r.passed(), "{:?}", r.checks);
}
