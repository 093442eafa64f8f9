//! The family Psi(t) = S + tC over a Kähler base.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;
use thiserror::Error;

use crate::compactify::{check_c1_c2, check_c3, CompactifyError, Tolerances};
use crate::curvature::{u_gk_at, CurvatureError};
use crate::gk::{GKStructure, GkError};
use crate::polytope::InteriorGrid;
use crate::report::{Condition, ReportDoc, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeformError {
    #[error(transparent)]
    Gk(#[from] GkError),
    #[error(transparent)]
    Compactify(#[from] CompactifyError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("base structure must be Kähler (C = 0)")]
    BaseNotKahler,
    #[error("finite-difference step {0:e} underflows")]
    FdStepUnderflow(f64),
    #[error("operation needs m = 2, family has m = {0}")]
    Dim4Only(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationFamily {
    base: GKStructure,
    direction: DMatrix<f64>,
}

/// Largest |t| searched for admissibility.
pub const T_SEARCH_LIMIT: f64 = 1e6;
/// Central-difference step in t.
pub const T_STEP: f64 = 1e-5;

impl DeformationFamily {
    pub fn new(base: GKStructure, direction: DMatrix<f64>) -> Result<Self, DeformError> {
        if base.c().iter().any(|&v| v != 0.0) {
            return Err(DeformError::BaseNotKahler);
        }
        // Validates shape and antisymmetry.
        base.with_c(direction.clone())?;
        Ok(Self { base, direction })
    }

    /// Family through an arbitrary structure: base = its Kähler part, direction = its C.
    pub fn through(g: &GKStructure) -> Result<Self, DeformError> {
        let m = g.dim();
        Self::new(g.with_c(DMatrix::zeros(m, m))?, g.c().clone())
    }

    pub fn base(&self) -> &GKStructure {
        &self.base
    }
    pub fn direction(&self) -> &DMatrix<f64> {
        &self.direction
    }

    pub fn at(&self, t: f64) -> GKStructure {
        self.base.with_c(&self.direction * t).expect("t C is antisymmetric")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RangeBound {
    /// No failure found up to the search limit.
    Unbounded { search_limit: f64 },
    /// Last admissible t before the first failure, with the failing condition.
    Finite { t: f64, failing_t: f64, witness: String },
    /// The base itself is not admissible.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleRange {
    pub base_admissible: bool,
    pub lower: RangeBound,
    pub upper: RangeBound,
    /// m = 2: min over the grid of det(Psi(t_max) Psi(0)^-1)... = (det S + t^2 c^2)/det S at |t| = search limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_min_ratio: Option<f64>,
    /// (t, verdict) pairs evaluated.
    pub evaluated: Vec<(f64, bool)>,
    pub notes: Vec<String>,
}

fn scan_ts() -> Vec<f64> {
    let mut ts = Vec::new();
    for k in -3..=6 {
        ts.push(10f64.powi(k));
    }
    ts
}

/// Admissibility verdict of the structure at t relative to the base.
pub fn verdict_at(
    fam: &DeformationFamily,
    t: f64,
    per_facet: usize,
    tol: &Tolerances,
) -> Result<(bool, String), DeformError> {
    let g = fam.at(t);
    let r = check_c1_c2(&fam.base, &g, per_facet, tol)?;
    if !r.passed() {
        let which = r.conditions.iter().find(|c| !c.passed()).map(|c| c.name.clone()).unwrap_or_default();
        return Ok((false, which));
    }
    if fam.base.dim() > 2 {
        let r3 = check_c3(&fam.base, &g, per_facet, tol)?;
        if !r3.passed() {
            let v = r3.conditions[0].values.get("min_eigenvalue").copied().unwrap_or(f64::NAN);
            return Ok((false, format!("C3 (min eigenvalue {v:.3e})")));
        }
    }
    Ok((true, String::new()))
}

fn search_side(
    fam: &DeformationFamily,
    sign: f64,
    per_facet: usize,
    tol: &Tolerances,
    evaluated: &mut Vec<(f64, bool)>,
) -> Result<RangeBound, DeformError> {
    let mut last_ok = 0.0;
    for t in scan_ts() {
        let (ok, why) = verdict_at(fam, sign * t, per_facet, tol)?;
        evaluated.push((sign * t, ok));
        if ok {
            last_ok = t;
            continue;
        }
        let (mut lo, mut hi, mut reason) = (last_ok, t, why);
        for _ in 0..30 {
            if hi - lo <= 1e-3 * hi {
                break;
            }
            let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
            let (ok, why) = verdict_at(fam, sign * mid, per_facet, tol)?;
            evaluated.push((sign * mid, ok));
            if ok {
                lo = mid;
            } else {
                hi = mid;
                reason = why;
            }
        }
        return Ok(RangeBound::Finite { t: sign * lo, failing_t: sign * hi, witness: reason });
    }
    Ok(RangeBound::Unbounded { search_limit: T_SEARCH_LIMIT })
}

pub fn admissible_range(
    fam: &DeformationFamily,
    grid: &InteriorGrid,
    per_facet: usize,
    tol: &Tolerances,
) -> Result<AdmissibleRange, DeformError> {
    let m = fam.base.dim();
    let mut evaluated = Vec::new();
    let mut notes = Vec::new();
    let (base_ok, _) = verdict_at(fam, 0.0, per_facet, tol)?;
    evaluated.push((0.0, base_ok));
    if !base_ok {
        return Ok(AdmissibleRange {
            base_admissible: false,
            lower: RangeBound::Empty,
            upper: RangeBound::Empty,
            closed_form_min_ratio: None,
            evaluated,
            notes: vec!["base structure fails the compactification conditions".into()],
        });
    }
    if fam.direction.iter().all(|&v| v == 0.0) {
        notes.push("C = 0: the family is constant".into());
        let b = RangeBound::Unbounded { search_limit: f64::INFINITY };
        return Ok(AdmissibleRange {
            base_admissible: true,
            lower: b.clone(),
            upper: b,
            closed_form_min_ratio: None,
            evaluated,
            notes,
        });
    }
    if m == 2 {
        // det Psi(t) / det S = 1 + t^2 c^2 / det S >= 1 for every t: C2' never fails, C1 holds as tC is constant.
        let c = fam.direction[(0, 1)];
        let mut min_ratio = f64::INFINITY;
        for gp in &grid.points {
            let s = fam.base.jet(&gp.x)?.hess;
            let d = s.determinant();
            let ratio = (d + T_SEARCH_LIMIT * T_SEARCH_LIMIT * c * c) / d;
            min_ratio = min_ratio.min(ratio);
        }
        for t in [0.1, 1.0, 10.0, T_SEARCH_LIMIT] {
            for s in [1.0, -1.0] {
                let (ok, _) = verdict_at(fam, s * t, per_facet, tol)?;
                evaluated.push((s * t, ok));
            }
        }
        notes.push("m = 2: det(Psi(0)^-1 Psi(t)) = (det S + t^2 c^2)/det S >= 1, so the range is unbounded".into());
        let b = RangeBound::Unbounded { search_limit: T_SEARCH_LIMIT };
        return Ok(AdmissibleRange {
            base_admissible: true,
            lower: b.clone(),
            upper: b,
            closed_form_min_ratio: Some(min_ratio),
            evaluated,
            notes,
        });
    }
    let upper = search_side(fam, 1.0, per_facet, tol, &mut evaluated)?;
    let lower = search_side(fam, -1.0, per_facet, tol, &mut evaluated)?;
    if matches!(upper, RangeBound::Finite { .. }) || matches!(lower, RangeBound::Finite { .. }) {
        notes.push(format!(
            "finite endpoints mark where the smallest relative eigenvalue of C3 drops below {:.1e}",
            tol.pd_floor
        ));
    }
    Ok(AdmissibleRange { base_admissible: true, lower, upper, closed_form_min_ratio: None, evaluated, notes })
}

/// max over the grid of |u_GK(t) - u_GK(0)|, and max |u_GK(0)|.
pub fn curvature_drift(fam: &DeformationFamily, grid: &InteriorGrid, t: f64) -> Result<(f64, f64), DeformError> {
    let g = fam.at(t);
    let mut drift = 0.0f64;
    let mut umax = 0.0f64;
    for gp in &grid.points {
        let u0 = u_gk_at(&fam.base, &gp.x)?;
        let ut = u_gk_at(&g, &gp.x)?;
        drift = drift.max((ut - u0).abs());
        umax = umax.max(u0.abs());
    }
    Ok((drift, umax))
}

/// Range of the angle function over the grid at t (m = 2).
pub fn p_range(fam: &DeformationFamily, grid: &InteriorGrid, t: f64) -> Result<(f64, f64), DeformError> {
    if fam.base.dim() != 2 {
        return Err(DeformError::Dim4Only(fam.base.dim()));
    }
    let g = fam.at(t);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for gp in &grid.points {
        let p = g.frame_at(&gp.x)?.p.expect("m = 2");
        lo = lo.min(p);
        hi = hi.max(p);
    }
    Ok((lo, hi))
}

/// J_t in the frame (d/du, d/dt) with du = S dmu for the base S.
fn j_in_u_frame(s: &DMatrix<f64>, c: &DMatrix<f64>, t: f64) -> Option<DMatrix<f64>> {
    let m = s.nrows();
    let psi = s + c * t;
    let psi_inv = psi.clone().try_inverse()?;
    let sinv = s.clone().try_inverse()?;
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    j.view_mut((0, m), (m, m)).copy_from(&(-(s * &psi_inv)));
    j.view_mut((m, 0), (m, m)).copy_from(&(&psi * sinv));
    Some(j)
}

pub const FIRST_ORDER_INV_TOL: f64 = 1e-8;
pub const FIRST_ORDER_ALPHA_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstOrderData {
    pub inverse_variation_fd: Vec<Vec<f64>>,
    pub inverse_variation_closed: Vec<Vec<f64>>,
    /// alpha_{j bar k}, row j, column k: (re, im).
    pub alpha_fd: Vec<Vec<(f64, f64)>>,
    pub alpha_closed: Vec<Vec<(f64, f64)>>,
    pub beta_fd_max: f64,
}

pub fn first_order_data(fam: &DeformationFamily, x: &[f64], step: f64) -> Result<FirstOrderData, DeformError> {
    if !(step > 1e-12) {
        return Err(DeformError::FdStepUnderflow(step));
    }
    let m = fam.base.dim();
    let s = fam.base.jet(x)?.hess;
    let c = &fam.direction;
    let sinv = s.clone().try_inverse().ok_or_else(|| GkError::NotConvexAt(x.to_vec()))?;
    let inv = |t: f64| (&s + c * t).try_inverse().ok_or_else(|| GkError::SingularPsi(x.to_vec()));
    let fd = (inv(step)? - inv(-step)?) / (2.0 * step);
    let closed = -(&sinv * c * &sinv);
    let jp = j_in_u_frame(&s, c, step).ok_or_else(|| GkError::SingularPsi(x.to_vec()))?;
    let jm = j_in_u_frame(&s, c, -step).ok_or_else(|| GkError::SingularPsi(x.to_vec()))?;
    let jdot = (jp - jm) / (2.0 * step);
    let cs = c * &sinv;
    let mut alpha_fd = vec![vec![(0.0, 0.0); m]; m];
    let mut alpha_closed = vec![vec![(0.0, 0.0); m]; m];
    let mut beta_max = 0.0f64;
    for j in 0..m {
        // v = Jdot (d/dzbar_j), d/dzbar = (d/du + i d/dt)/2.
        let mut vz = vec![Complex::new(0.0, 0.0); 2 * m];
        for r in 0..2 * m {
            vz[r] = Complex::new(0.5 * jdot[(r, j)], 0.5 * jdot[(r, m + j)]);
        }
        for k in 0..m {
            let (a, b) = (vz[k], vz[m + k]);
            let i = Complex::new(0.0, 1.0);
            let alpha = a + i * b;
            let beta = a - i * b;
            alpha_fd[j][k] = (alpha.re, alpha.im);
            alpha_closed[j][k] = (0.0, cs[(k, j)]);
            beta_max = beta_max.max(beta.norm());
        }
    }
    let rows = |a: &DMatrix<f64>| (0..m).map(|i| (0..m).map(|j| a[(i, j)]).collect()).collect();
    Ok(FirstOrderData {
        inverse_variation_fd: rows(&fd),
        inverse_variation_closed: rows(&closed),
        alpha_fd,
        alpha_closed,
        beta_fd_max: beta_max,
    })
}

pub fn first_order_check(fam: &DeformationFamily, x: &[f64], tol_scale: f64) -> Result<ReportDoc, DeformError> {
    let d = first_order_data(fam, x, T_STEP)?;
    let m = fam.base.dim();
    let mut inv_dev = 0.0f64;
    let mut alpha_dev = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            inv_dev = inv_dev.max((d.inverse_variation_fd[i][j] - d.inverse_variation_closed[i][j]).abs());
            let (a, b) = (d.alpha_fd[i][j], d.alpha_closed[i][j]);
            alpha_dev = alpha_dev.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
        }
    }
    let mut r = ReportDoc::new("first_order");
    let t_inv = FIRST_ORDER_INV_TOL * tol_scale;
    let t_alpha = FIRST_ORDER_ALPHA_TOL * tol_scale;
    let mut c = Condition::new("inverse_variation", inv_dev <= t_inv)
        .with_tolerance("max_abs", t_inv)
        .with_value("max_abs_deviation", inv_dev);
    if inv_dev > t_inv {
        c = c.with_witness(Witness::new(x, "(Psi^-1)'(0) + S^-1 C S^-1", inv_dev));
    }
    r.push(c);
    let mut c = Condition::new("variation_alpha", alpha_dev <= t_alpha)
        .with_tolerance("max_abs", t_alpha)
        .with_value("max_abs_deviation", alpha_dev);
    if alpha_dev > t_alpha {
        c = c.with_witness(Witness::new(x, "alpha - i C S^-1", alpha_dev));
    }
    r.push(c);
    let mut c = Condition::new("variation_antiholomorphic_part", d.beta_fd_max <= t_alpha)
        .with_tolerance("max_abs", t_alpha)
        .with_value("max_abs", d.beta_fd_max);
    if d.beta_fd_max > t_alpha {
        c = c.with_witness(Witness::new(x, "beta", d.beta_fd_max));
    }
    r.push(c);
    r.note("frame: du = S dmu, z = u + i t, d/dz = (d/du - i d/dt)/2; alpha_{j bar k} = i (C S^-1)_{kj} holds with this sign");
    r.set_info("t_step", T_STEP);
    r.set_info("point", serde_json::json!(x));
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonMatrix {
    /// Coefficients of sigma in the K^{1,0} frame (2C).
    pub k10: Vec<Vec<(f64, f64)>>,
    /// Coefficients in the d/dz frame (-2C).
    pub dz: Vec<Vec<(f64, f64)>>,
}

pub fn poisson_matrix(fam: &DeformationFamily) -> PoissonMatrix {
    let m = fam.base.dim();
    let c = &fam.direction;
    let k10 = (0..m).map(|i| (0..m).map(|j| (2.0 * c[(i, j)], 0.0)).collect()).collect();
    let dz = (0..m).map(|i| (0..m).map(|j| (-2.0 * c[(i, j)], 0.0)).collect()).collect();
    PoissonMatrix { k10, dz }
}

/// (2,0) part of P = 1/2 [J, Jdual] g^-1 in the J_t-holomorphic frame z = u_t + i t, du_t = Psi(t) dmu.
pub fn bivector_20(fam: &DeformationFamily, x: &[f64], t: f64) -> Result<DMatrix<Complex<f64>>, DeformError> {
    let m = fam.base.dim();
    if m != 2 {
        return Err(DeformError::Dim4Only(m));
    }
    let f = fam.at(t).frame_at(x)?;
    let ginv = f.g.clone().try_inverse().ok_or_else(|| GkError::NotConvexAt(x.to_vec()))?;
    let comm = &f.j * &f.jdual - &f.jdual * &f.j;
    let p = comm * ginv * 0.5;
    let mut tm = DMatrix::<f64>::identity(2 * m, 2 * m);
    tm.view_mut((0, 0), (m, m)).copy_from(&f.psi);
    let pp = &tm * p * tm.transpose();
    Ok(DMatrix::from_fn(m, m, |k, l| {
        Complex::new(pp[(k, l)] - pp[(m + k, m + l)], pp[(k, m + l)] + pp[(m + k, l)])
    }))
}

/// sigma_t = 2 P^{2,0}(t) compared with 4 t sigma, where sigma = -2C are the d/dz coefficients,
/// matching the frame `bivector_20` pairs with.
pub fn poisson_family_check(fam: &DeformationFamily, points: &[Vec<f64>], ts: &[f64], tol: f64) -> Result<ReportDoc, DeformError> {
    let m = fam.base.dim();
    let mut dev = 0.0f64;
    for x in points {
        for &t in ts {
            let p20 = bivector_20(fam, x, t)?;
            for k in 0..m {
                for l in 0..m {
                    let expected = 4.0 * t * (-2.0 * fam.direction[(k, l)]);
                    let got = 2.0 * p20[(k, l)];
                    dev = dev.max((got - Complex::new(expected, 0.0)).norm() / (1.0 + expected.abs()));
                }
            }
        }
    }
    let mut r = ReportDoc::new("poisson_family");
    r.push(Condition::new("sigma_t_equals_4t_sigma", dev <= tol).with_tolerance("rel", tol).with_value("max_rel_deviation", dev));
    r.note("P = 1/2 [J, Jdual] g^-1, (2,0) part paired with dz = du_t + i dt, du_t = Psi(t) dmu");
    Ok(r)
}
