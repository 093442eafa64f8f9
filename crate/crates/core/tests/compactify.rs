use std::time::Instant;

use torickgk_core::compactify::{
    acgtf_check, angle_boundary_check, check_c1_c2, check_c3, AcgtfWeight, CompactifyError, Tolerances,
};
use torickgk_core::expr::parse;
use torickgk_core::gk::c2;
use torickgk_core::polytope::{fixtures, DelzantPolytope};
use torickgk_core::potential::{Polynomial, PotentialSpec};
use torickgk_core::suite::equivalence_corpus as corpus;
use torickgk_core::GKStructure;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn guillemin(p: DelzantPolytope) -> GKStructure {
    GKStructure::kahler(p, PotentialSpec::Guillemin)
}

fn scaled_guillemin(k: f64) -> PotentialSpec {
    PotentialSpec::Scaled(k, Box::new(PotentialSpec::Guillemin))
}

#[test]
fn adding_c_passes() {
    let r = guillemin(fixtures::square());
    for c in [0.3, 1.0, -4.0] {
        let rep = check_c1_c2(&r, &r.with_c(c2(c)).unwrap(), 5, &tol()).unwrap();
        assert!(rep.passed(), "{}", rep.to_json());
        let ratio = rep.condition("C2'").unwrap().values["min_det_ratio"];
        assert!(ratio >= 1.0 - 1e-9);
        assert!(rep.condition("C1").unwrap().values["max_abs_boundary_difference"] <= c.abs() + 1e-9);
    }
}

#[test]
fn double_guillemin_fails_c1_with_witness() {
    let r = guillemin(fixtures::square());
    let t = GKStructure::kahler(fixtures::square(), scaled_guillemin(2.0));
    let rep = check_c1_c2(&r, &t, 5, &tol()).unwrap();
    assert!(!rep.passed());
    let c1 = rep.condition("C1").unwrap();
    assert!(!c1.passed());
    assert!(!c1.witnesses.is_empty() && c1.reason.is_some());
}

#[test]
fn reference_against_itself() {
    for p in [fixtures::square(), fixtures::simplex(), fixtures::hirzebruch(1), fixtures::hirzebruch(2), fixtures::rectangle(2.0, 0.5)] {
        let r = guillemin(p);
        let rep = check_c1_c2(&r, &r, 3, &tol()).unwrap();
        assert!(rep.passed());
        assert!((rep.condition("C2'").unwrap().values["min_det_ratio"] - 1.0).abs() < 1e-12);
    }
    let cube = guillemin(fixtures::cube());
    let rep = check_c3(&cube, &cube, 2, &tol()).unwrap();
    assert!(rep.passed());
    // Relative to the reference metric the form is the identity.
    assert!((rep.condition("C3").unwrap().values["min_eigenvalue"] - 1.0).abs() < 1e-6);
}

#[test]
fn c3_in_dimension_four_is_implied() {
    let r = guillemin(fixtures::square());
    let rep = check_c3(&r, &r.with_c(c2(0.5)).unwrap(), 3, &tol()).unwrap();
    let c = rep.condition("C3").unwrap();
    assert!(c.passed() && c.reason.as_deref().unwrap().contains("implied"));
    let bad = GKStructure::kahler(fixtures::square(), scaled_guillemin(2.0));
    assert!(matches!(check_c3(&r, &bad, 3, &tol()), Err(CompactifyError::RequiresC1C2)));
}

#[test]
fn c3_negative_control_in_dimension_six() {
    let cube = fixtures::cube();
    let r = guillemin(cube.clone());
    let eta = parse("-(mu2-0.5)^2*(1-mu1/2)*4*mu3*(1-mu3)", 3).unwrap();
    let pot = PotentialSpec::Sum(vec![PotentialSpec::Guillemin, PotentialSpec::Polynomial(Polynomial::from_expr(&eta, 3).unwrap())]);
    let mut c = nalgebra::DMatrix::zeros(3, 3);
    c[(1, 2)] = 1.0;
    c[(2, 1)] = -1.0;
    let t = GKStructure::new(cube, pot, c).unwrap();
    assert!(check_c1_c2(&r, &t, 3, &tol()).unwrap().passed());
    let rep = check_c3(&r, &t, 3, &tol()).unwrap();
    let c3 = rep.condition("C3").unwrap();
    assert!(!c3.passed());
    assert!(c3.values["min_eigenvalue"] <= 1e-6);
    assert!(!c3.witnesses.is_empty());
}

#[test]
fn facet_slopes_for_guillemin() {
    for p in [fixtures::square(), fixtures::simplex(), fixtures::hirzebruch(1)] {
        let res = acgtf_check(&guillemin(p), AcgtfWeight::Kahler, 5, &tol()).unwrap();
        assert!(res.report.passed(), "{}", res.report.to_json());
        for f in &res.faces {
            for &(_, s) in &f.slopes {
                assert!((s - 2.0).abs() <= 1e-3);
            }
        }
    }
    let h1 = acgtf_check(&guillemin(fixtures::hirzebruch(1)), AcgtfWeight::Kahler, 5, &tol()).unwrap();
    let facets = h1.faces.iter().filter(|f| f.face.len() == 1).map(|f| f.face[0]).collect::<std::collections::BTreeSet<_>>();
    assert_eq!(facets.len(), 4);
    assert_eq!(h1.faces.iter().filter(|f| f.face.len() == 2).count(), 4);
}

#[test]
fn facet_slopes_for_double_guillemin() {
    let g = GKStructure::kahler(fixtures::square(), scaled_guillemin(2.0));
    let res = acgtf_check(&g, AcgtfWeight::Kahler, 5, &tol()).unwrap();
    assert!(!res.report.passed());
    for f in res.faces.iter().filter(|f| f.face.len() == 1) {
        for &(_, s) in &f.slopes {
            assert!((s - 1.0).abs() <= 1e-3, "slope {s}");
        }
    }
}

#[test]
fn angle_function_tends_to_minus_one() {
    for p in [fixtures::square(), fixtures::simplex(), fixtures::hirzebruch(1)] {
        for c in [0.1, 1.0, 3.0] {
            let g = GKStructure::guillemin(p.clone(), c2(c)).unwrap();
            let rep = angle_boundary_check(&g, 5, &tol()).unwrap();
            assert!(rep.passed(), "{}", rep.to_json());
        }
    }
}

#[test]
fn equivalence_audit() {
    let start = Instant::now();
    let cases = corpus();
    assert_eq!(cases.len(), 20);
    for (k, (r, t, expected)) in cases.iter().enumerate() {
        let c12 = check_c1_c2(r, t, 5, &tol()).unwrap().passed();
        let facet = acgtf_check(t, AcgtfWeight::AngleFactor, 5, &tol()).unwrap().report.passed();
        assert_eq!(c12, facet, "case {k}");
        assert_eq!(c12, *expected, "case {k}");
    }
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn verdicts_are_monotone_in_tolerance() {
    for (r, t, _) in corpus().into_iter().step_by(3) {
        let mut prev = false;
        for s in [0.5, 1.0, 10.0, 1e3] {
            let ok = check_c1_c2(&r, &t, 3, &tol().scaled(s)).unwrap().passed();
            assert!(!prev || ok, "pass flipped to fail when loosening to scale {s}");
            prev = ok;
        }
    }
}

#[test]
fn different_polytopes_rejected() {
    let a = guillemin(fixtures::square());
    let b = guillemin(fixtures::simplex());
    assert!(matches!(check_c1_c2(&a, &b, 3, &tol()), Err(CompactifyError::DifferentPolytopes)));
}
