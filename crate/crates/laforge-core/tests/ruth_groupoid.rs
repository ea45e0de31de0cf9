use laforge_core::catalog::{build_example, mutate, mutation_host, Example, ExampleSpec, FAMILIES};
use laforge_core::group::SmoothMap;
use laforge_core::numkit::{max_abs, max_abs_vec, Mat, Vector};
use laforge_core::report::CheckConfig;
use laforge_core::ruth::{
    check_induced_actions, check_ruth, groupoid_axiom_suite, induced_actions, isotropy_check, omega_cocycle,
    orbit_membership, VbArrow,
};
use proptest::prelude::*;

fn examples() -> Vec<Example> {
    let mut specs: Vec<ExampleSpec> = FAMILIES.iter().map(|f| ExampleSpec::new(f.name)).collect();
    specs.push(ExampleSpec::new("trivial").with("boundary", 0.0));
    specs.push(ExampleSpec::new("tangent").with("group", 1.0));
    specs.push(ExampleSpec::new("crossed-module").with("gauge", 0.5));
    specs.push(ExampleSpec::new("trivial-maps").with("gauge", 0.5));
    specs.push(ExampleSpec::new("transitive-core").with("gauge", 0.5));
    specs.iter().map(|s| build_example(s).unwrap()).collect()
}

#[test]
fn catalog_ruths_and_their_groupoids_pass() {
    let cfg = CheckConfig::default();
    for ex in examples() {
        let s = ex.samples(5);
        let r = check_ruth(&ex.mp.ruth, &s, &cfg).unwrap();
        let g = groupoid_axiom_suite(&ex.mp.ruth, &s, &cfg).unwrap();
        for e in r.entries.iter().chain(&g.entries) {
            assert!(e.residual <= 1e-9, "{} {:?}: {} = {:e}", ex.family, ex.params, e.name, e.residual);
        }
    }
}

#[test]
fn curvature_is_a_cocycle_on_catalog_ruths() {
    for ex in examples() {
        let t = omega_cocycle(&ex.mp.ruth, &ex.samples(4)).unwrap();
        assert!(t.value <= 1e-9, "{}: {:e}", ex.family, t.value);
    }
}

#[test]
fn break_ruth_delta_moves_targets() {
    let name = "break-ruth-Δ⁰";
    let ex = build_example(&mutation_host(name).unwrap()).unwrap();
    let m = mutate(&ex.mp, name, 0.1).unwrap();
    let s = ex.samples(5);
    let g = groupoid_axiom_suite(&m.ruth, &s, &CheckConfig::default()).unwrap();
    assert!(g.get("target-of-product").unwrap().residual >= 1e-3);
    assert!(!check_ruth(&m.ruth, &s, &CheckConfig::default()).unwrap().get("quasi-action-on-base").unwrap().passed);
}

#[test]
fn non_cocycle_bump_breaks_associativity() {
    let ex = build_example(&ExampleSpec::new("trivial-maps")).unwrap();
    let mut r = ex.mp.ruth.clone();
    let s_of = |g: &Mat| g.iter().sum::<f64>() - g.nrows() as f64;
    let om = r.omega.clone();
    // vanishes when either argument is the identity
    r.omega = SmoothMap::binary(1, 2, move |g, h| om.at2(g, h) + Mat::from_element(1, 2, 0.1 * s_of(g) * s_of(h)));
    let s = ex.samples(5);
    let cfg = CheckConfig::default();
    assert!(check_ruth(&r, &s, &cfg).unwrap().get("unit-normalization").unwrap().passed);
    assert!(!check_ruth(&r, &s, &cfg).unwrap().get("curvature-cocycle").unwrap().passed);
    assert!(groupoid_axiom_suite(&r, &s, &cfg).unwrap().get("associativity").unwrap().residual >= 1e-3);
}

#[test]
fn structural_maps_on_the_trivial_pair() {
    let ex = build_example(&ExampleSpec::new("trivial")).unwrap();
    let r = &ex.mp.ruth;
    let g = ex.samples(3)[2].clone();
    let a = VbArrow::new(g.clone(), Vector::from_element(1, 2.0), Vector::from_element(1, 3.0));
    // t = ∂z + y and s = y for the everything-trivial pair with ∂ = Id
    assert_eq!(r.target(&a)[0], 5.0);
    assert_eq!(r.source(&a)[0], 3.0);
    let i = r.inv(&a).unwrap();
    assert_eq!((i.z[0], i.y[0]), (-2.0, 5.0));
}

#[test]
fn multiplication_refuses_non_composable_arrows() {
    let ex = build_example(&ExampleSpec::new("trivial")).unwrap();
    let r = &ex.mp.ruth;
    let e = r.chart.identity();
    let a = VbArrow::new(e.clone(), Vector::from_element(1, 0.0), Vector::from_element(1, 1.0));
    let b = VbArrow::new(e, Vector::from_element(1, 0.0), Vector::from_element(1, 2.0));
    assert!(r.mul(&a, &b, 1e-9).is_err());
}

#[test]
fn isotropy_suites_pass_and_reproduce_the_second_differential() {
    let cfg = CheckConfig::default();
    for spec in [ExampleSpec::new("crossed-module"), ExampleSpec::new("crossed-module").with("gauge", 0.5), ExampleSpec::new("trivial-maps")] {
        let ex = build_example(&spec).unwrap();
        let iso = ex.isotropy.as_ref().unwrap();
        let rep = isotropy_check(&ex.mp.ruth, &iso.y, &iso.z, &ex.samples(4), &cfg).unwrap();
        assert!(rep.passed(), "{:?}: {:?}", spec, rep.failing());
        assert!(rep.get("second-differential").unwrap().residual <= 1e-6);
    }
}

#[test]
fn induced_actions_are_honest_actions() {
    let cfg = CheckConfig::default();
    for ex in examples() {
        let ia = induced_actions(&ex.mp.ruth, cfg.tol).unwrap();
        let rep = check_induced_actions(&ex.mp.ruth, &ia, &ex.samples(4), &cfg);
        assert!(rep.passed(), "{}: {:?}", ex.family, rep.failing());
    }
}

#[test]
fn orbit_membership_finds_a_witness_and_rejects_off_orbit_points() {
    let ex = build_example(&ExampleSpec::new("trivial-maps")).unwrap();
    let r = &ex.mp.ruth;
    let s = ex.samples(6);
    let y = Vector::from_vec(vec![0.0, 1.0]);
    let target = r.delta_h.at(&s[3]) * &y;
    let d = orbit_membership(r, &y, &target, &s, 1e-10).unwrap();
    let (_, g, z) = d.witness.unwrap();
    assert!(max_abs_vec(&(r.delta_h.at(&g) * &y + &r.partial * z - &target)) <= 1e-12);
    // Δ⁰ = diag(1, a^mu) never changes the first coordinate
    let off = Vector::from_vec(vec![5.0, 1.0]);
    assert!(orbit_membership(r, &y, &off, &s, 1e-10).unwrap().witness.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn groupoid_laws_hold_for_any_seed(seed in 0u64..10_000, fam in 0usize..5) {
        let mut ex = build_example(&ExampleSpec::new(FAMILIES[fam].name)).unwrap();
        ex.seed = seed;
        let cfg = CheckConfig { seed, ..CheckConfig::default() };
        let rep = groupoid_axiom_suite(&ex.mp.ruth, &ex.samples(3), &cfg).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep.failing());
    }

    #[test]
    fn unit_defect_is_proportional_to_magnitude(eps in -1.0f64..1.0) {
        prop_assume!(eps.abs() > 1e-6);
        let name = "break-omega-units";
        let ex = build_example(&mutation_host(name).unwrap()).unwrap();
        let m = mutate(&ex.mp, name, eps).unwrap();
        let rep = check_ruth(&m.ruth, &ex.samples(3), &CheckConfig::default()).unwrap();
        let r = rep.get("unit-normalization").unwrap().residual;
        prop_assert!((r - eps.abs()).abs() <= 1e-12 * (1.0 + eps.abs()));
    }

    #[test]
    fn inverse_is_an_involution(seed in 0u64..10_000, z in -2.0f64..2.0, y0 in -2.0f64..2.0, y1 in -2.0f64..2.0) {
        let mut ex = build_example(&ExampleSpec::new("trivial-maps").with("gauge", 0.5)).unwrap();
        ex.seed = seed;
        let g = ex.samples(2)[1].clone();
        let r = &ex.mp.ruth;
        let a = VbArrow::new(g, Vector::from_element(1, z), Vector::from_vec(vec![y0, y1]));
        let back = r.inv(&r.inv(&a).unwrap()).unwrap();
        prop_assert!(back.distance(&a) <= 1e-10);
        prop_assert!(max_abs(&(&back.g - &a.g)) <= 1e-12);
    }
}
