use torickgk_core::polytope::{fixtures, DelzantPolytope, PolytopeError};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn simplex_vertices() {
    let p = DelzantPolytope::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![0.0, 0.0, 1.0]).unwrap();
    let mut v: Vec<Vec<f64>> = p.vertices().iter().map(|v| v.point.clone()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(v.len(), 3);
    assert!(close(&v[0], &[0.0, 0.0], 1e-12));
    assert!(close(&v[1], &[0.0, 1.0], 1e-12));
    assert!(close(&v[2], &[1.0, 0.0], 1e-12));
}

#[test]
fn rectangle_vertices() {
    let p = fixtures::rectangle(2.0, 3.0);
    let mut v: Vec<Vec<f64>> = p.vertices().iter().map(|v| v.point.clone()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let want = [[0.0, 0.0], [0.0, 3.0], [2.0, 0.0], [2.0, 3.0]];
    for (a, b) in v.iter().zip(want) {
        assert!(close(a, &b, 1e-12));
    }
}

#[test]
fn non_delzant_vertex_is_rejected() {
    let e = DelzantPolytope::new(vec![vec![1, 0], vec![0, 1], vec![-1, -2]], vec![0.0, 0.0, 1.0]).unwrap_err();
    match e {
        PolytopeError::NotDelzant { vertex, determinant } => {
            assert_eq!(determinant.abs(), 2);
            // L1 = L3 = 0 at (0, 1/2).
            assert!(close(&vertex, &[0.0, 0.5], 1e-12), "{vertex:?}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn structural_errors() {
    assert!(matches!(
        DelzantPolytope::new(vec![vec![1, 0], vec![0, 1], vec![1, 1]], vec![0.0, 0.0, 0.0]),
        Err(PolytopeError::Unbounded)
    ));
    assert!(matches!(
        DelzantPolytope::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![0.0, 0.0, -1.0]),
        Err(PolytopeError::EmptyInterior)
    ));
    // x1 <= 5 is implied by the simplex.
    assert!(matches!(
        DelzantPolytope::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1], vec![-1, 0]], vec![0.0, 0.0, 1.0, 5.0]),
        Err(PolytopeError::RedundantHalfspace(3))
    ));
    assert!(matches!(
        DelzantPolytope::new(vec![vec![1, 0], vec![0, 1]], vec![0.0, 0.0, 1.0]),
        Err(PolytopeError::LengthMismatch { .. })
    ));
    assert!(matches!(
        DelzantPolytope::new(vec![vec![1, 0], vec![0, 0], vec![-1, -1]], vec![0.0, 0.0, 1.0]),
        Err(PolytopeError::ZeroNormal(1))
    ));
}

#[test]
fn eval_l_examples() {
    assert!(close(&fixtures::simplex().eval_l(&[0.0, 0.0]), &[0.0, 0.0, 1.0], 0.0));
    assert!(close(&fixtures::square().eval_l(&[0.5, 0.5]), &[0.5; 4], 0.0));
    assert!(close(&fixtures::hirzebruch(1).eval_l(&[1.0, 0.5]), &[1.0, 0.5, 0.5, 0.5], 1e-15));
}

#[test]
fn every_vertex_is_simple_and_unimodular() {
    for p in [fixtures::simplex(), fixtures::square(), fixtures::hirzebruch(1), fixtures::hirzebruch(3), fixtures::cube(), fixtures::simplex3()] {
        let m = p.dim();
        for v in p.vertices() {
            assert_eq!(v.active.len(), m);
            let n = nalgebra::DMatrix::from_fn(m, m, |i, k| p.normals()[v.active[i]][k] as f64);
            assert!((n.determinant().abs() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn face_lattice_counts() {
    let sq = fixtures::square();
    let count = |p: &DelzantPolytope, d: usize| p.faces().iter().filter(|f| f.dim == d).count();
    assert_eq!((count(&sq, 0), count(&sq, 1), count(&sq, 2)), (4, 4, 1));
    let cube = fixtures::cube();
    assert_eq!((count(&cube, 0), count(&cube, 1), count(&cube, 2), count(&cube, 3)), (8, 12, 6, 1));
    assert!(sq.faces()[0].facets.is_empty());
}

#[test]
fn adapted_chart_examples() {
    let sq = fixtures::rectangle(1.0, 2.0);
    let ch = sq.adapted_chart(&[0], &[0.0, 1.0]).unwrap();
    assert!(close(&ch.to_chart(&[0.3, 0.4]), &[0.3, 0.4 - 1.0], 1e-15));

    let s = fixtures::simplex();
    let ch = s.adapted_chart(&[0, 1], &[0.0, 0.0]).unwrap();
    assert!(close(&ch.to_chart(&[0.2, 0.3]), &[0.2, 0.3], 1e-15));

    let h = fixtures::hirzebruch(1);
    let ch = h.adapted_chart(&[3], &[1.5, 0.5]).unwrap();
    assert_eq!(ch.selection, vec![3, 1]);
    let x = [0.7, 0.4];
    assert!(close(&ch.to_chart(&x), &[2.0 - 0.7 - 0.4, 0.4 - 0.5], 1e-15));

    assert!(matches!(h.adapted_chart(&[3], &[0.5, 0.5]), Err(PolytopeError::PointNotOnFaceInterior { .. })));
    assert!(matches!(h.adapted_chart(&[0, 3], &[0.0, 0.0]), Err(PolytopeError::UnknownFace(_))));
}

#[test]
fn chart_round_trip() {
    for p in [fixtures::simplex(), fixtures::hirzebruch(2), fixtures::cube()] {
        for f in p.faces().iter().filter(|f| !f.facets.is_empty()) {
            let x0 = p.face_centroid(f);
            let ch = p.adapted_chart(&f.facets, &x0).unwrap();
            let x: Vec<f64> = p.centroid().iter().map(|c| c * 0.9 + 0.01).collect();
            let back = ch.from_chart(&ch.to_chart(&x));
            assert!(close(&back, &x, 1e-12));
        }
    }
}

#[test]
fn interior_grid_examples() {
    let g = fixtures::square().sample_interior(3, 0.1).unwrap();
    assert_eq!(g.len(), 9);
    assert!(g.points.iter().all(|p| p.l_values.iter().all(|&l| l >= 0.1)));
    assert!(matches!(fixtures::simplex().sample_interior(2, 0.4), Err(PolytopeError::EmptyGrid { .. })));
    assert!(fixtures::simplex().sample_interior(0, 0.1).is_err());
}

#[test]
fn facet_path_halves_l() {
    let sq = fixtures::square();
    let path = sq.facet_path(0, &[0.5, 0.5], 4).unwrap();
    let l: Vec<Vec<f64>> = path.iter().map(|x| sq.eval_l(x)).collect();
    for (k, want) in [0.25, 0.125, 0.0625, 0.03125].iter().enumerate() {
        assert!((l[k][0] - want).abs() < 1e-15);
        assert!(l[k][1..].iter().all(|&v| v >= 0.25));
    }
}
