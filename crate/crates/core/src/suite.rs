//! Identity suites: pointwise algebra at random interior points, and the dimension-four
//! chain cross-checked against the finite-difference oracle.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::curvature::{dim4_chain, u_gk_at, CurvatureError};
use crate::gk::{c2, omega, Dim4Scalars, GKStructure, GkError, PointFrame};
use crate::oracle::{compatibility_defect, laplace_beltrami_fd, scalar_curvature_fd, InvariantMetric, OracleError};
use crate::polytope::DelzantPolytope;
use crate::report::{Condition, ReportDoc, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Gk(#[from] GkError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("could not sample interior points")]
    Sampling,
}

/// Uniform points in the polytope at distance >= `margin` times the centroid's distance to the boundary.
pub fn random_interior_points(poly: &DelzantPolytope, n: usize, margin: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>, SuiteError> {
    let (lo, hi) = poly.bounding_box();
    let d0 = margin * poly.dist_to_boundary(&poly.centroid());
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n {
        tries += 1;
        if tries > 1000 * n + 1000 {
            return Err(SuiteError::Sampling);
        }
        let x: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| rng.random_range(*a..*b)).collect();
        if poly.dist_to_boundary(&x) >= d0 {
            out.push(x);
        }
    }
    Ok(out)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tracks the worst value of one check.
struct Tracker {
    name: String,
    tol: f64,
    worst: f64,
    at: Option<Witness>,
}

impl Tracker {
    fn new(name: &str, tol: f64) -> Self {
        Self { name: name.into(), tol, worst: 0.0, at: None }
    }
    fn see(&mut self, x: &[f64], v: f64) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > self.worst || (self.at.is_none() && v > self.tol) {
            self.worst = v;
            self.at = Some(Witness::new(x, &self.name, v));
        }
    }
    fn finish(self, tol_scale: f64) -> Condition {
        let tol = self.tol * tol_scale;
        let ok = self.worst <= tol;
        let mut c = Condition::new(&self.name, ok).with_tolerance("max", tol).with_value("max", self.worst);
        if !ok {
            if let Some(w) = self.at {
                c = c.with_witness(w);
            }
        }
        c
    }
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

pub const POINTWISE_J_TOL: f64 = 1e-12;
pub const POINTWISE_AB_TOL: f64 = 1e-10;
pub const VOLUME_TOL: f64 = 1e-10;

/// Pointwise algebra of the frame at each point.
pub fn pointwise_suite(g: &GKStructure, points: &[Vec<f64>], rng: &mut ChaCha8Rng, tol_scale: f64) -> Result<ReportDoc, SuiteError> {
    let m = g.dim();
    let n = 2 * m;
    let id = DMatrix::<f64>::identity(n, n);
    let w = omega(m);
    let mut j2 = Tracker::new("J_squared", POINTWISE_J_TOL);
    let mut jd2 = Tracker::new("Jdual_squared", POINTWISE_J_TOL);
    let mut adj = Tracker::new("symplectic_adjoint", POINTWISE_J_TOL);
    let mut gb = Tracker::new("g_minus_b", POINTWISE_J_TOL);
    let mut gpos = Tracker::new("g_positive_b_antisymmetric", 0.0);
    let mut ab = Tracker::new("A2_minus_B2_and_anticommutator", POINTWISE_AB_TOL);
    let mut jab = Tracker::new("J_from_A_B", POINTWISE_AB_TOL);
    let mut req = Tracker::new("ReQ_equals_minus_S_inverse", POINTWISE_J_TOL);
    let mut imq = Tracker::new("ImQ_antisymmetric", POINTWISE_J_TOL);
    let mut vol = Tracker::new("volume_ratio", VOLUME_TOL);
    let mut blocks = Tracker::new("g_b_block_forms", POINTWISE_J_TOL);
    let mut compat = Tracker::new("g_ak_compatible", crate::oracle::COMPAT_TOL);
    for x in points {
        let f = g.frame_at(x)?;
        let jn = f.j.amax().max(1.0);
        let jdn = f.jdual.amax().max(1.0);
        j2.see(x, (&f.j * &f.j + &id).amax() / (jn * jn));
        jd2.see(x, (&f.jdual * &f.jdual + &id).amax() / (jdn * jdn));
        for _ in 0..10 {
            let xv = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let yv = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let lhs = (&f.j * &xv).dot(&(&w * &yv));
            let rhs = xv.dot(&(&w * (&f.jdual * &yv)));
            adj.see(x, rel(lhs, rhs, xv.norm() * yv.norm() * jn));
        }
        let beta = f.beta();
        gb.see(x, (&beta - (&f.g - &f.bform)).amax() / jn);
        let pos = f.g.clone().cholesky().is_some() && (&f.bform + f.bform.transpose()).amax() == 0.0;
        gpos.see(x, if pos { 0.0 } else { 1.0 });
        let an = f.a.amax().max(f.b.amax()).max(1.0);
        let d1 = (&f.a * &f.a - &f.b * &f.b + &id).amax();
        let d2 = (&f.a * &f.b + &f.b * &f.a).amax();
        ab.see(x, d1.max(d2) / (an * an));
        // J = (B - I) A^-1 and Jdual = (B + I) A^-1.
        let d3 = (&f.j * &f.a - (&f.b - &id)).amax().max((&f.jdual * &f.a - (&f.b + &id)).amax());
        jab.see(x, d3 / (an * jn));
        let q = f.q_matrix();
        let sn = f.s_inv.amax().max(1.0);
        let re = q.map(|z| z.re);
        let im = q.map(|z| z.im);
        req.see(x, (&re + &f.s_inv).amax() / sn);
        imq.see(x, (&im + im.transpose()).amax() / sn);
        if m == 2 {
            let sq = f.g.determinant().sqrt();
            vol.see(x, rel(sq, f.volratio, f.volratio.abs().max(1e-300)));
            let cc = f.c[(0, 1)];
            let tblock = &f.s_inv * (f.det_s / f.det_psi);
            let mut dev = 0.0f64;
            for i in 0..2 {
                for jj in 0..2 {
                    dev = dev
                        .max((f.g[(i, jj)] - f.s[(i, jj)]).abs() / f.s.amax())
                        .max((f.g[(2 + i, 2 + jj)] - tblock[(i, jj)]).abs() / tblock.amax())
                        .max((f.bform[(i, jj)] + f.c[(i, jj)]).abs())
                        .max((f.bform[(2 + i, 2 + jj)] - c2(cc)[(i, jj)] / f.det_psi).abs());
                }
            }
            blocks.see(x, dev);
            compat.see(x, compatibility_defect(&f.g_ak()?));
        }
    }
    let mut r = ReportDoc::new("pointwise_algebra");
    for t in [j2, jd2, adj, gb, gpos, ab, jab, req, imq] {
        r.push(t.finish(tol_scale));
    }
    if m == 2 {
        r.push(vol.finish(tol_scale));
        r.push(blocks.finish(tol_scale));
        r.push(compat.finish(tol_scale));
    }
    r.set_info("points", points.len() as f64);
    Ok(r)
}

pub const DET_TOL: f64 = 1e-12;
pub const MAGIC_TOL: f64 = 1e-8;
pub const LEE_TOL: f64 = 1e-8;
pub const ROUTES_TOL: f64 = 1e-7;
pub const ORACLE_TOL: f64 = 1e-4;
pub const INVARIANCE_TOL: f64 = 1e-10;

/// Divergence identity sum_i (det S S^ij)_,i = 0: returns |sum| / sum of |terms|, worst over j.
pub fn divergence_identity_defect(frame: &PointFrame, jet: &crate::potential::Jet4) -> f64 {
    let m = frame.dim();
    let (d, di, _) = crate::gk::det_s_derivatives(jet, &frame.s_inv);
    let inv = crate::curvature::InverseHessianDerivs::of_jet(jet).expect("convex");
    let mut worst = 0.0f64;
    for j in 0..m {
        let mut sum = 0.0;
        let mut mag = 0.0;
        for i in 0..m {
            let a = d * inv.dw[i][(i, j)];
            let b = di[i] * inv.w[(i, j)];
            sum += a + b;
            mag += a.abs() + b.abs();
        }
        worst = worst.max(if mag > 0.0 { sum.abs() / mag } else { 0.0 });
    }
    worst
}

/// Dimension-four identities for the structure's polytope and potential with C = [[0,c],[-c,0]], each c.
pub fn dim4_suite(
    base: &GKStructure,
    c_values: &[f64],
    points: &[Vec<f64>],
    tol_scale: f64,
) -> Result<ReportDoc, SuiteError> {
    let mut det = Tracker::new("det_psi_equals_det_s_plus_c2", DET_TOL);
    let mut ang = Tracker::new("angle_function_identities", DET_TOL);
    let mut magic = Tracker::new("divergence_identity", MAGIC_TOL);
    let mut lee = Tracker::new("lee_form_dp_relation", LEE_TOL);
    let mut routes = Tracker::new("u_j_routes_agree", ROUTES_TOL);
    let mut cor = Tracker::new("u_gk_from_oracle_s_g", ORACLE_TOL);
    let mut lap = Tracker::new("laplacian_of_p_oracle", ORACLE_TOL);
    let mut inv = Tracker::new("u_gk_independent_of_c", INVARIANCE_TOL);
    let mut prange = Tracker::new("angle_in_open_interval", 0.0);
    let kahler = base.with_c(DMatrix::zeros(2, 2))?;
    for &c in c_values {
        let g = base.with_c(c2(c))?;
        let met = InvariantMetric::of_structure(&g);
        for x in points {
            let jet = g.jet(x)?;
            let f = PointFrame::from_hessian(x, &jet.hess, g.c())?;
            let p = f.p.expect("m = 2");
            det.see(x, rel(f.det_psi, f.det_s + c * c, f.det_psi));
            ang.see(x, ((1.0 - p) / 2.0 - f.det_s / f.det_psi).abs().max(((1.0 + p) / 2.0 - c * c / f.det_psi).abs()));
            prange.see(x, if p < 1.0 && (c == 0.0 || p > -1.0) { 0.0 } else { 1.0 });
            magic.see(x, divergence_identity_defect(&f, &jet));
            let sc = Dim4Scalars::compute(&f, &jet)?;
            let l1 = sc.lee2 * (1.0 - p * p);
            lee.see(x, rel(l1, sc.dp_norm2, l1.abs().max(sc.dp_norm2.abs()).max(f64::MIN_POSITIVE)));
            let chain = dim4_chain(&g, x)?;
            let scale = 1.0 + chain.u_j.abs();
            routes.see(x, rel(chain.u_j, chain.u_j_principal, scale).max(rel(chain.u_j, chain.u_j_ricci, scale)));
            let h = met.default_step(x);
            let s_oracle = scalar_curvature_fd(&met, x, h)?;
            cor.see(x, rel(chain.u_gk, chain.u_gk_from_sg(s_oracle), chain.u_gk.abs().max(1.0)));
            let pfun = |y: &[f64]| g.frame_at(y).ok().and_then(|f| f.p).unwrap_or(f64::NAN);
            let lap_oracle = laplace_beltrami_fd(&met, &pfun, x, h)?;
            // Relative to the size of the terms making up the Laplacian; p is constant when c = 0.
            let scale = if c == 0.0 { 1.0 } else { sc.lap_p.abs().max(lap_oracle.abs()).max(sc.lee2.abs()) };
            lap.see(x, rel(lap_oracle, sc.lap_p, scale));
            let u0 = u_gk_at(&kahler, x)?;
            inv.see(x, rel(chain.u_gk, u0, 1.0 + u0.abs()));
        }
    }
    let mut r = ReportDoc::new("dim4_identities");
    for t in [det, ang, prange, magic, lee, routes, cor, lap, inv] {
        r.push(t.finish(tol_scale));
    }
    r.note("Laplacian sign: Delta = -div grad (positive operator); the oracle uses the same sign");
    r.set_info("points", points.len() as f64);
    r.set_info("c_values", serde_json::json!(c_values));
    Ok(r)
}

/// The full identity report for one structure.
pub fn identity_report(g: &GKStructure, n_points: usize, extra_c: &[f64], seed: u64, tol_scale: f64) -> Result<ReportDoc, SuiteError> {
    let mut rng = rng(seed);
    let points = random_interior_points(g.polytope(), n_points, 0.1, &mut rng)?;
    let mut report = ReportDoc::new("identities");
    report.merge("", pointwise_suite(g, &points, &mut rng, tol_scale)?);
    if g.dim() == 2 {
        let mut cs = vec![g.c()[(0, 1)]];
        for &c in extra_c {
            if !cs.contains(&c) {
                cs.push(c);
            }
        }
        report.merge("", dim4_suite(g, &cs, &points, tol_scale)?);
    } else {
        let kahler = g.with_c(DMatrix::zeros(g.dim(), g.dim()))?;
        let mut inv = Tracker::new("u_gk_independent_of_c", INVARIANCE_TOL);
        for x in &points {
            let u = u_gk_at(g, x)?;
            let u0 = u_gk_at(&kahler, x)?;
            inv.see(x, rel(u, u0, 1.0 + u0.abs()));
        }
        report.push(inv.finish(tol_scale));
        report.note("dimension-four identities skipped (m != 2)");
    }
    report.set_info("seed", seed as f64);
    report.set_info("points", n_points as f64);
    Ok(report)
}

/// (reference, test, expected verdict) pairs in dimension four for auditing boundary condition
/// checks against the facet criterion. The reference is always Guillemin with C = 0.
pub fn equivalence_corpus() -> Vec<(GKStructure, GKStructure, bool)> {
    use crate::expr::parse;
    use crate::polytope::fixtures;
    use crate::potential::{Polynomial, PotentialSpec};
    let scaled = |k: f64| PotentialSpec::Scaled(k, Box::new(PotentialSpec::Guillemin));
    let plus_poly = |src: &str| {
        let e = parse(src, 2).expect("corpus expression");
        PotentialSpec::Sum(vec![PotentialSpec::Guillemin, PotentialSpec::Polynomial(Polynomial::from_expr(&e, 2).expect("polynomial"))])
    };
    let polys = [fixtures::square(), fixtures::simplex(), fixtures::hirzebruch(1), fixtures::rectangle(2.0, 3.0)];
    let cs = [0.3, -1.0, 2.5, 0.05];
    let smooth = ["0.1*mu1^2 + 0.05*mu1*mu2 + 0.1*mu2^2", "0.2*mu1^3 + 0.1*mu2^2", "0.05*mu1^2*mu2^2 + 0.1*mu1^2", "0.3*mu2^2"];
    let factors = [0.5, 1.5, 3.0, 0.8];
    let mut out = Vec::new();
    for (i, p) in polys.iter().enumerate() {
        let r = GKStructure::kahler(p.clone(), PotentialSpec::Guillemin);
        let with = |pot: PotentialSpec, c: f64| GKStructure::new(p.clone(), pot, c2(c)).expect("corpus structure");
        out.push((r.clone(), r.clone(), true));
        out.push((r.clone(), with(PotentialSpec::Guillemin, cs[i]), true));
        out.push((r.clone(), with(plus_poly(smooth[i]), 0.7), true));
        out.push((r.clone(), with(scaled(2.0), cs[i]), false));
        out.push((r.clone(), with(scaled(factors[i]), 0.0), false));
    }
    out
}
