use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torickgk_core::curvature::{
    dim4_chain, extremal_fit, hermitian_contraction, ricci_chern_components, u_gk_at, CurvatureError,
};
use torickgk_core::expr::parse;
use torickgk_core::gk::{c2, Dim4Scalars, GKStructure, GkError, PointFrame};
use torickgk_core::oracle::{compatibility_check, laplace_beltrami_fd, scalar_curvature_fd, InvariantMetric, OracleError};
use torickgk_core::polytope::fixtures;
use torickgk_core::potential::PotentialSpec;
use torickgk_core::suite::random_interior_points;

fn square_c(c: f64) -> GKStructure {
    GKStructure::guillemin(fixtures::square(), c2(c)).unwrap()
}

#[test]
fn frame_at_square_centre() {
    let f = square_c(0.3).frame_at(&[0.5, 0.5]).unwrap();
    assert!((&f.s - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0])).amax() < 1e-14);
    assert!((&f.psi - DMatrix::from_row_slice(2, 2, &[2.0, 0.3, -0.3, 2.0])).amax() < 1e-14);
    assert!((f.det_psi - 4.09).abs() < 1e-13);
    assert!((f.p.unwrap() - (-3.91 / 4.09)).abs() < 1e-12);
    assert!((f.p.unwrap() + 0.955990).abs() < 1e-6);
    let q = f.q_matrix();
    assert!((q.map(|z| z.re) + DMatrix::identity(2, 2) * 0.5).amax() < 1e-12);
}

#[test]
fn kahler_case() {
    let g = GKStructure::kahler(fixtures::hirzebruch(1), PotentialSpec::Guillemin);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for x in random_interior_points(g.polytope(), 20, 0.1, &mut rng).unwrap() {
        let f = g.frame_at(&x).unwrap();
        assert!((&f.jdual + &f.j).amax() < 1e-14);
        assert!((f.p.unwrap() + 1.0).abs() < 1e-14);
        let q = f.q_matrix();
        assert!(q.iter().all(|z| z.im.abs() < 1e-14));
        assert!((q.map(|z| z.re) + &f.s_inv).amax() < 1e-12);
        let jet = g.jet(&x).unwrap();
        let sc = Dim4Scalars::compute(&f, &jet).unwrap();
        assert_eq!(sc.lee2, 0.0);
        assert!(sc.lap_p.abs() < 1e-12);
    }
}

#[test]
fn structure_validation() {
    let mut c = c2(1.0);
    c[(1, 0)] = -0.999;
    assert!(matches!(GKStructure::guillemin(fixtures::square(), c), Err(GkError::CNotAntisymmetric { .. })));
    assert!(matches!(GKStructure::guillemin(fixtures::square(), DMatrix::zeros(3, 3)), Err(GkError::CShape { .. })));
    let g = square_c(0.3);
    assert!(g.frame_at(&[0.0, 0.5]).is_err());
}

#[test]
fn dim4_scalars_at_centre() {
    let c = 0.3;
    let g = square_c(c);
    let x = [0.5, 0.5];
    let f = g.frame_at(&x).unwrap();
    let sc = Dim4Scalars::compute(&f, &g.jet(&x).unwrap()).unwrap();
    assert!(sc.dp[0].abs() < 1e-14 && sc.dp[1].abs() < 1e-14);
    assert!(sc.lee2.abs() < 1e-14);
    let want = 64.0 * c * c / ((4.0 + c * c) * (4.0 + c * c));
    assert!((sc.lap_p - want).abs() < 1e-12, "{} vs {want}", sc.lap_p);
}

#[test]
fn abreu_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (p, want) in [
        (fixtures::interval(1.0), 4.0),
        (fixtures::simplex(), 12.0),
        (fixtures::rectangle(2.0, 3.0), 4.0 / 2.0 + 4.0 / 3.0),
        (fixtures::cube(), 12.0),
    ] {
        let g = GKStructure::kahler(p.clone(), PotentialSpec::Guillemin);
        for x in random_interior_points(&p, 50, 0.01, &mut rng).unwrap() {
            assert!((u_gk_at(&g, &x).unwrap() - want).abs() < 1e-9);
        }
    }
}

#[test]
fn u_gk_against_grid_finite_differences() {
    // -sum d^2 (S^-1)_ij / dmu^i dmu^j by central differences of S^-1 itself.
    let p = fixtures::hirzebruch(1);
    let poly = torickgk_core::potential::Polynomial::from_expr(&parse("0.1*mu1^2*mu2 + 0.05*mu2^3", 2).unwrap(), 2).unwrap();
    let g = GKStructure::kahler(p.clone(), PotentialSpec::Sum(vec![PotentialSpec::Guillemin, PotentialSpec::Polynomial(poly)]));
    let winv = |x: &[f64]| g.jet(x).unwrap().hess.try_inverse().unwrap();
    let grid = p.sample_interior(8, 0.05).unwrap();
    for gp in &grid.points {
        let x = &gp.x;
        let h = 1e-3 * p.dist_to_boundary(x);
        let at = |dx: f64, dy: f64| winv(&[x[0] + dx, x[1] + dy]);
        let d00 = (at(h, 0.0)[(0, 0)] - 2.0 * at(0.0, 0.0)[(0, 0)] + at(-h, 0.0)[(0, 0)]) / (h * h);
        let d11 = (at(0.0, h)[(1, 1)] - 2.0 * at(0.0, 0.0)[(1, 1)] + at(0.0, -h)[(1, 1)]) / (h * h);
        let d01 = (at(h, h)[(0, 1)] - at(h, -h)[(0, 1)] - at(-h, h)[(0, 1)] + at(-h, -h)[(0, 1)]) / (4.0 * h * h);
        let fd = -(d00 + d11 + 2.0 * d01);
        let u = u_gk_at(&g, x).unwrap();
        assert!((fd - u).abs() <= 1e-5 * u.abs().max(1.0), "{x:?}: {fd} vs {u}");
    }
}

#[test]
fn u_gk_is_independent_of_c() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..50 {
        let p = [fixtures::square(), fixtures::simplex(), fixtures::hirzebruch(1)][k % 3].clone();
        let c = rng.random_range(-5.0..5.0);
        let x = random_interior_points(&p, 1, 0.05, &mut rng).unwrap().remove(0);
        let g0 = GKStructure::kahler(p.clone(), PotentialSpec::Guillemin);
        let gc = g0.with_c(c2(c)).unwrap();
        let (a, b) = (u_gk_at(&g0, &x).unwrap(), u_gk_at(&gc, &x).unwrap());
        assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}

#[test]
fn chain_at_square_centre() {
    let c = 0.3;
    let d = dim4_chain(&square_c(c), &[0.5, 0.5]).unwrap();
    let p = (c * c - 4.0) / (4.0 + c * c);
    let lap = 64.0 * c * c / ((4.0 + c * c) * (4.0 + c * c));
    assert!((d.u_gk - 8.0).abs() < 1e-12);
    assert!((d.p - p).abs() < 1e-14);
    assert!((d.lap_p - lap).abs() < 1e-12);
    // The theta terms vanish at the centre: u_J = u_GK - 2 Delta p / (1 - p).
    assert!((d.u_j - (8.0 - 2.0 * lap / (1.0 - p))).abs() < 1e-12);
    assert!((d.s_g - d.u_j).abs() < 1e-14);
}

#[test]
fn chain_kahler_collapse_and_routes() {
    let g = GKStructure::kahler(fixtures::simplex(), PotentialSpec::Guillemin);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for x in random_interior_points(g.polytope(), 20, 0.1, &mut rng).unwrap() {
        let d = dim4_chain(&g, &x).unwrap();
        assert!((d.u_gk - d.u_j).abs() < 1e-9 && (d.u_j - d.s_g).abs() < 1e-12);
        assert!((d.u_j_ricci - 12.0).abs() < 1e-9);
    }
    let g = g.with_c(c2(0.1)).unwrap();
    for x in random_interior_points(g.polytope(), 50, 0.1, &mut rng).unwrap() {
        let d = dim4_chain(&g, &x).unwrap();
        let s = 1.0 + d.u_j.abs();
        assert!((d.u_j - d.u_j_principal).abs() <= 1e-7 * s);
        assert!((d.u_j - d.u_j_ricci).abs() <= 1e-7 * s);
        assert!((d.lee2 * (1.0 - d.p * d.p) - d.dp_norm2).abs() <= 1e-8 * d.dp_norm2.max(1e-300));
    }
    let cube = GKStructure::kahler(fixtures::cube(), PotentialSpec::Guillemin);
    assert!(matches!(dim4_chain(&cube, &[0.5; 3]), Err(CurvatureError::Dim4Only(3))));
}

#[test]
fn ricci_components() {
    let g = GKStructure::kahler(fixtures::square(), PotentialSpec::Guillemin);
    let x = [0.3, 0.6];
    let rho = ricci_chern_components(&g, &x).unwrap();
    let f = g.frame_at(&x).unwrap();
    assert!((hermitian_contraction(&f, &rho) - 8.0).abs() < 1e-9);
    assert!((&rho - rho.transpose()).amax() < 1e-12);
    // Constant Hessian: det S and det Psi are constant, so rho vanishes.
    let q = PotentialSpec::quadratic(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]), DVector::zeros(2)).unwrap();
    let gq = GKStructure::new(fixtures::square(), q, c2(0.7)).unwrap();
    assert!(ricci_chern_components(&gq, &x).unwrap().amax() < 1e-14);
}

#[test]
fn extremal_fits() {
    let s = fixtures::simplex();
    let grid = s.sample_interior(16, 1e-3).unwrap();
    for c in [0.0, 0.3, 2.0] {
        let f = extremal_fit(&GKStructure::guillemin(s.clone(), c2(c)).unwrap(), &grid).unwrap();
        assert!(f.is_extremal && f.analytic);
        assert!(f.coeffs[0].abs() < 1e-9 && f.coeffs[1].abs() < 1e-9 && (f.coeffs[2] - 12.0).abs() < 1e-9);
    }
    let pert = PotentialSpec::Sum(vec![
        PotentialSpec::Guillemin,
        PotentialSpec::Expression(parse("0.05*mu1^2*mu2^2", 2).unwrap()),
    ]);
    let f = extremal_fit(&GKStructure::kahler(s.clone(), pert), &grid).unwrap();
    assert!(!f.is_extremal && !f.analytic);
    assert!(f.residual > 1e-2);
}

#[test]
fn oracle_scalar_curvature() {
    let flat = InvariantMetric::flat(2);
    assert!(scalar_curvature_fd(&flat, &[0.3, 0.4], 1e-3).unwrap().abs() < 1e-9);
    let cp1 = GKStructure::kahler(fixtures::interval(1.0), PotentialSpec::Guillemin);
    let met = InvariantMetric::kahler(&cp1);
    for x in [0.5, 0.3, 0.8] {
        let h = met.default_step(&[x]);
        assert!((scalar_curvature_fd(&met, &[x], h).unwrap() - 4.0).abs() < 1e-4);
    }
    let cp2 = GKStructure::kahler(fixtures::simplex(), PotentialSpec::Guillemin);
    let met = InvariantMetric::kahler(&cp2);
    for x in [[0.3, 0.3], [0.2, 0.5], [0.6, 0.1]] {
        let h = met.default_step(&x);
        assert!((scalar_curvature_fd(&met, &x, h).unwrap() - 12.0).abs() < 1e-3);
    }
    assert!(matches!(scalar_curvature_fd(&met, &[0.01, 0.5], 0.01), Err(OracleError::StepTooLarge { .. })));
}

#[test]
fn oracle_is_second_order() {
    let cp2 = GKStructure::kahler(fixtures::simplex(), PotentialSpec::Guillemin);
    let met = InvariantMetric::kahler(&cp2);
    let x = [0.25, 0.35];
    let h = met.default_step(&x) * 8.0;
    let e1 = scalar_curvature_fd(&met, &x, h).unwrap() - 12.0;
    let e2 = scalar_curvature_fd(&met, &x, h / 2.0).unwrap() - 12.0;
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn oracle_laplacian_sign_and_calibration() {
    let flat = InvariantMetric::flat(2);
    let lin = |y: &[f64]| y[0];
    let sq = |y: &[f64]| y[0] * y[0];
    assert!(laplace_beltrami_fd(&flat, &lin, &[0.3, 0.2], 1e-3).unwrap().abs() < 1e-9);
    assert!((laplace_beltrami_fd(&flat, &sq, &[0.3, 0.2], 1e-3).unwrap() + 2.0).abs() < 1e-6);

    let c = 0.3;
    let g = square_c(c);
    let met = InvariantMetric::of_structure(&g);
    let p = |y: &[f64]| g.frame_at(y).unwrap().p.unwrap();
    let want = 64.0 * c * c / ((4.0 + c * c) * (4.0 + c * c));
    let got = laplace_beltrami_fd(&met, &p, &[0.5, 0.5], 1e-3).unwrap();
    assert!((got - want).abs() < 1e-4 * want);
    for i in 1..=3 {
        for j in 1..=3 {
            let x = [0.25 * i as f64, 0.25 * j as f64];
            let f = g.frame_at(&x).unwrap();
            let sc = Dim4Scalars::compute(&f, &g.jet(&x).unwrap()).unwrap();
            let fd = laplace_beltrami_fd(&met, &p, &x, met.default_step(&x)).unwrap();
            assert!((fd - sc.lap_p).abs() <= 1e-4 * sc.lap_p.abs(), "{x:?}");
        }
    }
}

#[test]
fn g_ak_compatibility() {
    let g = square_c(0.3);
    let pts: Vec<Vec<f64>> = (1..=5).flat_map(|i| (1..=5).map(move |j| vec![i as f64 / 6.0, j as f64 / 6.0])).collect();
    let g_ak = InvariantMetric::new(2, |x| Ok(g.frame_at(x).unwrap().g_ak().unwrap()), |_| 1.0);
    assert!(compatibility_check(&g_ak, &pts, 1e-10).unwrap().passed());
    let gr = &g;
    let scaled = |factor: fn(f64) -> f64| {
        InvariantMetric::new(
            2,
            move |x| {
                let f: PointFrame = gr.frame_at(x).unwrap();
                Ok(&f.g * factor(f.p.unwrap()))
            },
            |_| 1.0,
        )
    };
    let wrong = scaled(|p| ((1.0 + p) / 2.0).sqrt());
    assert!(!compatibility_check(&wrong, &pts, 1e-10).unwrap().passed());
    // For C = 0 the metric is Kaehler and g_AK = g.
    let k = GKStructure::kahler(fixtures::square(), PotentialSpec::Guillemin);
    let f = k.frame_at(&[0.3, 0.7]).unwrap();
    assert!((f.g_ak().unwrap() - &f.g).amax() < 1e-14);
}
