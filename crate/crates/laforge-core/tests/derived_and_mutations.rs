use laforge_core::catalog::{build_example, family, mutate, mutation, mutation_host, ExampleSpec, FAMILIES, MUTATIONS};
use laforge_core::error::Error;
use laforge_core::lie::check_butterfly;
use laforge_core::matched::{assemble_unchecked, build_derived, check_matched_pair, derived_structures, verify_morphisms};
use laforge_core::report::{CheckConfig, SuiteReport};
use laforge_core::ruth::{check_ruth, groupoid_axiom_suite};

fn specs() -> Vec<ExampleSpec> {
    let mut v: Vec<ExampleSpec> = FAMILIES.iter().map(|f| ExampleSpec::new(f.name)).collect();
    v.push(ExampleSpec::new("crossed-module").with("gauge", 0.5));
    v.push(ExampleSpec::new("trivial-maps").with("gauge", 0.5));
    v.push(ExampleSpec::new("transitive-core").with("gauge", 0.5));
    v
}

#[test]
fn derived_structures_are_exact_on_the_catalog() {
    let cfg = CheckConfig::default();
    for spec in specs() {
        let ex = build_example(&spec).unwrap();
        let rep = derived_structures(&ex.mp, &ex.samples(5), &cfg).unwrap();
        assert!(rep.passed(), "{spec:?}: {:?}", rep.failing());
        for e in rep.entries.iter().filter(|e| e.applicable) {
            assert!(e.residual <= 1e-9, "{spec:?}: {} = {:e}", e.name, e.residual);
        }
    }
}

#[test]
fn butterfly_quotients_have_equal_dimension() {
    let cfg = CheckConfig::default();
    for spec in specs() {
        let ex = build_example(&spec).unwrap();
        let (der, leak) = build_derived(&ex.mp, &cfg).unwrap();
        assert!(leak <= 1e-9);
        let b = check_butterfly(&der.butterfly, cfg.tol).unwrap();
        assert!(b.nw_se.exact() && b.ne_sw.exact(), "{spec:?}");
        assert_eq!(b.quotient_dims.0, b.quotient_dims.1, "{spec:?}");
        assert!(b.v_bracket <= 1e-9);
    }
}

#[test]
fn crossed_module_has_trivial_quotients() {
    // ∂ = Id: 𝔨 = 𝕜 maps onto ∂𝕜 and ker ∂ = 0
    let ex = build_example(&ExampleSpec::new("crossed-module")).unwrap();
    let (der, _) = build_derived(&ex.mp, &CheckConfig::default()).unwrap();
    let b = check_butterfly(&der.butterfly, 1e-8).unwrap();
    assert_eq!(b.quotient_dims, (0, 0));
    assert_eq!(der.ker_boundary.top.dim(), 0);
}

#[test]
fn zero_magnitude_is_the_identity() {
    let cfg = CheckConfig::default();
    for m in &MUTATIONS {
        let ex = build_example(&mutation_host(m.name).unwrap()).unwrap();
        let s = ex.samples(4);
        let same = mutate(&ex.mp, m.name, 0.0).unwrap();
        let a = check_matched_pair(&ex.mp, &s, &cfg).unwrap();
        let b = check_matched_pair(&same, &s, &cfg).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.residual.to_bits(), y.residual.to_bits(), "{}: {}", m.name, x.name);
        }
    }
}

#[test]
fn unknown_names_are_rejected() {
    let ex = build_example(&ExampleSpec::new("trivial")).unwrap();
    assert!(matches!(mutate(&ex.mp, "break-everything", 0.1), Err(Error::Unknown(_))));
    assert!(matches!(mutation("nope"), Err(Error::Unknown(_))));
    assert!(family("nope").is_err());
    assert!(build_example(&ExampleSpec::new("nope")).is_err());
    assert!(build_example(&ExampleSpec::new("trivial").with("no-such-param", 1.0)).is_err());
}

#[test]
fn vacant_host_cannot_take_a_curvature_mutation() {
    let ex = build_example(&ExampleSpec::new("tangent")).unwrap();
    assert!(matches!(mutate(&ex.mp, "break-MC", 0.1), Err(Error::Precondition(_))));
}

fn suites(ex: &laforge_core::catalog::Example, mp: &laforge_core::matched::MatchedPair) -> Vec<SuiteReport> {
    let cfg = CheckConfig::default();
    let s = ex.samples(5);
    vec![
        check_ruth(&mp.ruth, &s, &cfg).unwrap(),
        groupoid_axiom_suite(&mp.ruth, &s, &cfg).unwrap(),
        check_matched_pair(mp, &s, &cfg).unwrap(),
        verify_morphisms(&assemble_unchecked(mp).unwrap(), &s, &cfg).unwrap(),
        derived_structures(mp, &s, &cfg).unwrap(),
    ]
}

#[test]
fn each_mutation_fails_its_advertised_entries_and_only_those() {
    for m in &MUTATIONS {
        let ex = build_example(&mutation_host(m.name).unwrap()).unwrap();
        let base = suites(&ex, &ex.mp);
        let bad = suites(&ex, &mutate(&ex.mp, m.name, 0.1).unwrap());
        for (b, r) in base.iter().zip(&bad) {
            for (eb, er) in b.entries.iter().zip(&r.entries) {
                let key = (r.suite.as_str(), er.name.as_str());
                if m.advertised.contains(&key) {
                    assert!(!er.passed, "{}: {:?} should fail", m.name, key);
                } else if m.collateral.contains(&key) {
                    assert!((er.residual - eb.residual).abs() >= 1e-9, "{}: {:?} listed as collateral", m.name, key);
                } else {
                    assert!(er.passed, "{}: {:?} failed", m.name, key);
                    assert!((er.residual - eb.residual).abs() < 1e-9, "{}: {:?} moved", m.name, key);
                }
            }
        }
    }
}

#[test]
fn mutation_defect_grows_with_magnitude() {
    let m = "break-MC";
    let ex = build_example(&mutation_host(m).unwrap()).unwrap();
    let s = ex.samples(5);
    let r = |eps: f64| {
        let rep = check_matched_pair(&mutate(&ex.mp, m, eps).unwrap(), &s, &CheckConfig::default()).unwrap();
        rep.get("maurer-cartan").unwrap().residual
    };
    let (a, b) = (r(0.01), r(0.02));
    assert!((b / a - 2.0).abs() < 0.05, "{a:e} {b:e}");
}
