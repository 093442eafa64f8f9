use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use torickgk_core::compactify::{check_c1_c2, Tolerances};
use torickgk_core::curvature::u_gk_at;
use torickgk_core::deform::DeformationFamily;
use torickgk_core::gk::{antisym, c2, omega, sym, PointFrame};
use torickgk_core::polytope::{fixtures, DelzantPolytope};
use torickgk_core::potential::PotentialSpec;
use torickgk_core::GKStructure;

fn polytope(kind: u8, a: f64, b: f64, k: i64) -> DelzantPolytope {
    match kind % 5 {
        0 => fixtures::rectangle(a, b),
        1 => fixtures::simplex(),
        2 => fixtures::hirzebruch(k),
        3 => fixtures::cube(),
        _ => fixtures::simplex3(),
    }
}

/// Point whose barycentric-like weights are given, kept well inside.
fn interior_point(p: &DelzantPolytope, w: &[f64]) -> Vec<f64> {
    let verts: Vec<&Vec<f64>> = p.vertices().iter().map(|v| &v.point).collect();
    let total: f64 = w.iter().take(verts.len()).sum();
    let c = p.centroid();
    let mut x = vec![0.0; p.dim()];
    for (v, wi) in verts.iter().zip(w) {
        for k in 0..x.len() {
            x[k] += v[k] * wi / total;
        }
    }
    x.iter().zip(&c).map(|(xi, ci)| 0.5 * xi + 0.5 * ci).collect()
}

fn spd(m: usize, entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |i, j| entries[i * m + j]);
    &a * a.transpose() + DMatrix::identity(m, m) * 0.1
}

fn antisymmetric(m: usize, entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |i, j| entries[i * m + j]);
    &a - a.transpose()
}

fn brute_force_vertices(p: &DelzantPolytope) -> Vec<Vec<f64>> {
    let m = p.dim();
    let n = p.n_facets();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let a = DMatrix::from_fn(m, m, |r, c| p.normals()[idx[r]][c] as f64);
        let rhs = DVector::from_iterator(m, idx.iter().map(|&j| -p.offsets()[j]));
        if let Some(x) = a.lu().solve(&rhs) {
            let x: Vec<f64> = x.iter().copied().collect();
            if p.eval_l(&x).iter().all(|&l| l >= -1e-12) && !out.iter().any(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-9)) {
                out.push(x);
            }
        }
        // Next m-subset in lexicographic order.
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - m + i {
                idx[i] += 1;
                for k in i + 1..m {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vertices_match_brute_force(kind in 0u8..5, a in 0.2f64..5.0, b in 0.2f64..5.0, k in 0i64..4) {
        let p = polytope(kind, a, b, k);
        let bf = brute_force_vertices(&p);
        prop_assert_eq!(bf.len(), p.vertices().len());
        for v in p.vertices() {
            prop_assert!(bf.iter().any(|w| w.iter().zip(&v.point).all(|(a, b)| (a - b).abs() < 1e-9)));
            let zero = p.eval_l(&v.point).iter().filter(|l| l.abs() < 1e-12).count();
            prop_assert_eq!(zero, p.dim());
        }
    }

    #[test]
    fn chart_round_trip(kind in 0u8..5, a in 0.2f64..5.0, b in 0.2f64..5.0, k in 0i64..4, w in prop::collection::vec(0.05f64..1.0, 8)) {
        let p = polytope(kind, a, b, k);
        let x = interior_point(&p, &w);
        for v in p.vertices() {
            let chart = p.adapted_chart(&v.active, &v.point).unwrap();
            let back = chart.from_chart(&chart.to_chart(&x));
            prop_assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs())));
        }
    }

    #[test]
    fn pointwise_algebra(m in 1usize..4, s in prop::collection::vec(-2.0f64..2.0, 9), c in prop::collection::vec(-3.0f64..3.0, 9),
                         u in prop::collection::vec(-1.0f64..1.0, 6), v in prop::collection::vec(-1.0f64..1.0, 6)) {
        let s = spd(m, &s);
        let c = antisymmetric(m, &c);
        let f = PointFrame::from_hessian(&vec![0.0; m], &s, &c).unwrap();
        let n = 2 * m;
        let id = DMatrix::<f64>::identity(n, n);
        let jn = f.j.amax().max(1.0);
        prop_assert!((&f.j * &f.j + &id).amax() <= 1e-12 * jn * jn);
        let dn = f.jdual.amax().max(1.0);
        prop_assert!((&f.jdual * &f.jdual + &id).amax() <= 1e-12 * dn * dn);
        let w = omega(m);
        let x = DVector::from_column_slice(&u[..n]);
        let y = DVector::from_column_slice(&v[..n]);
        let lhs = ((&f.j * &x).transpose() * &w * &y)[(0, 0)];
        let rhs = (x.transpose() * &w * (&f.jdual * &y))[(0, 0)];
        prop_assert!((lhs - rhs).abs() <= 1e-12 * jn * dn);
        prop_assert!((&f.g - f.g.transpose()).amax() == 0.0);
        prop_assert!(f.g.clone().cholesky().is_some());
        prop_assert!((&f.bform + f.bform.transpose()).amax() <= 1e-14 * jn);
        let beta = f.beta();
        prop_assert!((sym(&beta) - &f.g).amax() <= 1e-12 * jn);
        prop_assert!((antisym(&beta) + &f.bform).amax() <= 1e-12 * jn);
        let a_ref = (&f.j - &f.jdual).try_inverse().unwrap() * -2.0;
        prop_assert!((&a_ref - &f.a).amax() <= 1e-10 * a_ref.amax().max(1.0));
        if m == 2 {
            let ratio = f.g.determinant().sqrt() * f.det_psi / f.det_s;
            prop_assert!((ratio - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn u_gk_ignores_c(kind in 0u8..5, a in 0.3f64..3.0, b in 0.3f64..3.0, k in 0i64..3, w in prop::collection::vec(0.05f64..1.0, 8),
                      c in prop::collection::vec(-5.0f64..5.0, 9)) {
        let p = polytope(kind, a, b, k);
        let x = interior_point(&p, &w);
        let g0 = GKStructure::kahler(p.clone(), PotentialSpec::Guillemin);
        let gc = g0.with_c(antisymmetric(p.dim(), &c)).unwrap();
        let (u0, uc) = (u_gk_at(&g0, &x).unwrap(), u_gk_at(&gc, &x).unwrap());
        prop_assert!((u0 - uc).abs() <= 1e-10 * (1.0 + u0.abs()));
    }

    #[test]
    fn family_stays_tamed_and_p_grows(a in 0.3f64..3.0, b in 0.3f64..3.0, w in prop::collection::vec(0.05f64..1.0, 4),
                                      c in 0.01f64..5.0, t1 in 0.0f64..10.0, dt in 1e-3f64..10.0) {
        let p = fixtures::rectangle(a, b);
        let x = interior_point(&p, &w);
        let fam = DeformationFamily::new(GKStructure::kahler(p, PotentialSpec::Guillemin), c2(c)).unwrap();
        let f1 = fam.at(t1).frame_at(&x).unwrap();
        let f2 = fam.at(-(t1 + dt)).frame_at(&x).unwrap();
        prop_assert!(sym(&f2.psi).cholesky().is_some());
        prop_assert!(f2.p.unwrap() > f1.p.unwrap());
    }

    #[test]
    fn reference_passes_against_itself(a in 0.3f64..3.0, b in 0.3f64..3.0, k in 0i64..3, kind in 0u8..3) {
        let r = GKStructure::kahler(polytope(kind, a, b, k), PotentialSpec::Guillemin);
        prop_assert!(check_c1_c2(&r, &r, 2, &Tolerances::default()).unwrap().passed());
    }
}
