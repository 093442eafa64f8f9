//! Numerical boundary criteria: conditions C1, C2' and C3 against a reference structure,
//! and the facet criterion on H_ij = <nu_i, S^-1 nu_j> in adapted coordinates.
//!
//! "Extends smoothly" is tested as Cauchy convergence of values and of first divided
//! differences along geometric approach paths. A sequence that fails the Cauchy test is
//! a failure with a reason, never a pass.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::extrapolate::{derivative_limit, limit, Limit};
use crate::gk::{GKStructure, GkError};
use crate::polytope::{geometric_path, DelzantPolytope, Face, PolytopeError};
use crate::report::{Condition, ReportDoc, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompactifyError {
    #[error(transparent)]
    Gk(#[from] GkError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("reference and test structures live on different polytopes")]
    DifferentPolytopes,
    #[error("condition C3 needs C1 and C2' to pass first")]
    RequiresC1C2,
    #[error("no adapted chart for face {face:?}: {source}")]
    ChartFailure { face: Vec<usize>, source: PolytopeError },
    #[error("operation needs m = 2, structure has m = {0}")]
    Dim4Only(usize),
}

pub const PATH_LEN: usize = 12;
/// Probes whose sequences fail the Cauchy test are re-sampled once on a path this long.
pub const DEEP_PATH_LEN: usize = 24;
pub const PROBES_PER_FACET: usize = 5;
const WINDOW: usize = 5;
const DERIV_WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Cauchy tolerance on extrapolated values (relative to 1 + |limit|).
    pub cauchy: f64,
    /// Cauchy tolerance on extrapolated first divided differences.
    pub deriv: f64,
    /// det(Psi^-1 Psi_test) must stay above this.
    pub det_floor: f64,
    /// |H_ij| limits on a facet must be below this.
    pub zero: f64,
    /// |slope - 2| must be below this.
    pub slope: f64,
    /// Smallest eigenvalue floor for positivity conditions.
    pub pd_floor: f64,
    /// |p + 1| at the boundary must be below this.
    pub angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { cauchy: 1e-6, deriv: 1e-4, det_floor: 1e-6, zero: 1e-6, slope: 1e-3, pd_floor: 1e-6, angle: 1e-3 }
    }
}

impl Tolerances {
    /// Multiplies tolerances and divides floors by `s`, so that s > 1 only loosens.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            cauchy: self.cauchy * s,
            deriv: self.deriv * s,
            det_floor: self.det_floor / s,
            zero: self.zero * s,
            slope: self.slope * s,
            pd_floor: self.pd_floor / s,
            angle: self.angle * s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryProbe {
    pub face: Vec<usize>,
    /// Boundary point the path converges to.
    pub target: Vec<f64>,
    /// Interior point the path starts from (h = 1).
    pub start: Vec<f64>,
    pub path: Vec<Vec<f64>>,
    /// Path parameter: x_k - target is proportional to h_k.
    pub h: Vec<f64>,
}

impl BoundaryProbe {
    fn new(face: &[usize], target: Vec<f64>, start: Vec<f64>, path: Vec<Vec<f64>>) -> Self {
        let h = halvings(path.len());
        Self { face: face.to_vec(), target, start, path, h }
    }

    /// The same probe continued to `len` halvings.
    pub fn deepen(&self, len: usize) -> Self {
        Self::new(&self.face, self.target.clone(), self.start.clone(), geometric_path(&self.target, &self.start, len))
    }
}

fn halvings(n: usize) -> Vec<f64> {
    (1..=n).map(|k| 0.5f64.powi(k as i32)).collect()
}

/// Probes converging to a face: facet probes start above `per_facet` base points along the normal,
/// lower-dimensional faces are approached from their centroid towards the polytope centroid.
pub fn face_probes(poly: &DelzantPolytope, face: &Face, per_facet: usize) -> Result<Vec<BoundaryProbe>, PolytopeError> {
    if face.facets.len() == 1 {
        let j = face.facets[0];
        poly.facet_base_points(j, per_facet)?
            .into_iter()
            .map(|y| {
                let x_in = poly.normal_offset_point(j, &y);
                let path = poly.facet_path(j, &x_in, PATH_LEN)?;
                Ok(BoundaryProbe::new(&face.facets, y, x_in, path))
            })
            .collect()
    } else {
        let y = poly.face_centroid(face);
        let path = poly.approach_path(&y, PATH_LEN);
        Ok(vec![BoundaryProbe::new(&face.facets, y, poly.centroid(), path)])
    }
}

/// Facet probes plus one probe per vertex.
pub fn boundary_probes(poly: &DelzantPolytope, per_facet: usize) -> Result<Vec<BoundaryProbe>, PolytopeError> {
    let mut out = Vec::new();
    for face in poly.faces() {
        if face.facets.len() == 1 || face.dim == 0 {
            out.extend(face_probes(poly, face, per_facet)?);
        }
    }
    Ok(out)
}

fn same_polytope(a: &GKStructure, b: &GKStructure) -> Result<(), CompactifyError> {
    if a.polytope() != b.polytope() {
        return Err(CompactifyError::DifferentPolytopes);
    }
    Ok(())
}

struct Failure {
    witness: Witness,
    reason: String,
}

fn limit_failure(probe: &BoundaryProbe, what: &str, l: &Limit, last: f64) -> Failure {
    Failure {
        witness: Witness::new(&probe.target, what, last)
            .on_face(&probe.face)
            .detail(format!("extrapolated {:.6e}, window gap {:.3e} > {:.3e}", l.value, l.gap, l.allowed)),
        reason: format!("{what} does not converge along the approach path (inconclusive counts as failure)"),
    }
}

fn psi(g: &GKStructure, x: &[f64]) -> Result<DMatrix<f64>, CompactifyError> {
    Ok(g.jet(x)?.hess + g.c())
}

#[derive(Default)]
struct C12Outcome {
    c1: Option<Failure>,
    c2: Option<Failure>,
    max_diff: f64,
    min_ratio: f64,
}

impl C12Outcome {
    fn failed(&self) -> bool {
        self.c1.is_some() || self.c2.is_some()
    }
}

fn c1_c2_probe(
    reference: &GKStructure,
    test: &GKStructure,
    probe: &BoundaryProbe,
    tol: &Tolerances,
) -> Result<C12Outcome, CompactifyError> {
    let m = reference.dim();
    let mut out = C12Outcome { min_ratio: f64::INFINITY, ..Default::default() };
    let mut diffs = vec![Vec::with_capacity(probe.path.len()); m * m];
    let mut ratios = Vec::with_capacity(probe.path.len());
    for x in &probe.path {
        let pr = psi(reference, x)?;
        let pt = psi(test, x)?;
        let d = &pt - &pr;
        for (k, v) in d.iter().enumerate() {
            diffs[k].push(*v);
        }
        ratios.push(pt.determinant() / pr.determinant());
    }
    for (k, series) in diffs.iter().enumerate() {
        let (i, j) = (k % m, k / m);
        let name = format!("(Psi_test-Psi_ref)[{i}][{j}]");
        let last = *series.last().unwrap();
        let l = limit(&probe.h, series, WINDOW, tol.cauchy);
        if !l.converged {
            out.c1 = Some(limit_failure(probe, &name, &l, last));
            break;
        }
        out.max_diff = out.max_diff.max(l.value.abs());
        let dl = derivative_limit(&probe.h, series, DERIV_WINDOW, tol.deriv);
        if !dl.converged {
            let mut f = limit_failure(probe, &format!("d/dh {name}"), &dl, last);
            f.reason = format!("first differences of {name} are unbounded or do not converge");
            out.c1 = Some(f);
            break;
        }
    }
    let worst = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let l = limit(&probe.h, &ratios, WINDOW, tol.cauchy);
    if !l.converged {
        out.c2 = Some(limit_failure(probe, "det(Psi_ref^-1 Psi_test)", &l, *ratios.last().unwrap()));
    } else if worst < tol.det_floor || l.value < tol.det_floor {
        out.c2 = Some(Failure {
            witness: Witness::new(&probe.target, "det(Psi_ref^-1 Psi_test)", l.value.min(worst)).on_face(&probe.face),
            reason: "determinant ratio degenerates at the boundary".into(),
        });
    } else {
        out.min_ratio = l.value.min(worst);
    }
    Ok(out)
}

/// Conditions C1 and C2' for `test` against `reference`.
pub fn check_c1_c2(
    reference: &GKStructure,
    test: &GKStructure,
    per_facet: usize,
    tol: &Tolerances,
) -> Result<ReportDoc, CompactifyError> {
    same_polytope(reference, test)?;
    let m = reference.dim();
    let probes = boundary_probes(reference.polytope(), per_facet)?;
    let mut c1_fail: Option<Failure> = None;
    let mut c2_fail: Option<Failure> = None;
    let mut max_diff = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    let mut deepened = 0usize;
    for probe in &probes {
        let mut out = c1_c2_probe(reference, test, probe, tol)?;
        if out.failed() {
            deepened += 1;
            out = c1_c2_probe(reference, test, &probe.deepen(DEEP_PATH_LEN), tol)?;
        }
        max_diff = max_diff.max(out.max_diff);
        min_ratio = min_ratio.min(out.min_ratio);
        if c1_fail.is_none() {
            c1_fail = out.c1;
        }
        if c2_fail.is_none() {
            c2_fail = out.c2;
        }
    }
    let mut report = ReportDoc::new("compactify_c1_c2");
    let mut c1 = Condition::new("C1", c1_fail.is_none())
        .with_tolerance("cauchy", tol.cauchy)
        .with_tolerance("derivative_cauchy", tol.deriv);
    if c1_fail.is_none() {
        c1 = c1.with_value("max_abs_boundary_difference", max_diff);
    }
    if let Some(f) = c1_fail {
        c1 = c1.with_witness(f.witness).with_reason(f.reason);
    }
    let mut c2 = Condition::new("C2'", c2_fail.is_none())
        .with_tolerance("cauchy", tol.cauchy)
        .with_tolerance("det_floor", tol.det_floor);
    if min_ratio.is_finite() {
        c2 = c2.with_value("min_det_ratio", min_ratio);
    }
    if let Some(f) = c2_fail {
        c2 = c2.with_witness(f.witness).with_reason(f.reason);
    }
    report.push(c1);
    report.push(c2);
    report.note("C2 is checked in its equivalent form C2': Psi_ref^-1 Psi_test extends invertibly to the boundary");
    if m == 2 && report.passed() {
        report.note("m = 2: C1 and C2' suffice for compactification; C3 is implied");
    }
    report.set_info("probes", probes.len() as f64);
    report.set_info("path_length", PATH_LEN as f64);
    report.set_info("deepened_probes", deepened as f64);
    report.set_info("probes_per_facet", per_facet as f64);
    Ok(report)
}

/// g_ref^-1 sym(beta_test): its eigenvalues are those of sym(beta_test) relative to g_ref, and its
/// entries are rational along approach paths (a Cholesky normalization would bring in sqrt(h)).
fn c3_relative_form(reference: &GKStructure, test: &GKStructure, x: &[f64]) -> Result<DMatrix<f64>, CompactifyError> {
    let fr = reference.frame_at(x)?;
    let m = reference.dim();
    let pt = psi(test, x)?;
    let pt_inv = pt.clone().try_inverse().ok_or_else(|| GkError::SingularPsi(x.to_vec()))?;
    // beta_ref + (Psi_t - Psi) dmu dmu + (Psi^T Psi_t^-1 Psi - Psi^T)(J dmu)(J dmu)
    let mut form = fr.beta();
    let dmu = &pt - &fr.psi;
    let mid = fr.psi.transpose() * &pt_inv * &fr.psi - fr.psi.transpose();
    let jrows = fr.j.rows(0, m).into_owned();
    let extra = jrows.transpose() * mid * &jrows;
    form += extra;
    for i in 0..m {
        for j in 0..m {
            form[(i, j)] += dmu[(i, j)];
        }
    }
    let sym = crate::gk::sym(&form);
    let ginv = fr.g.clone().cholesky().ok_or_else(|| GkError::NotConvexAt(x.to_vec()))?.inverse();
    Ok(ginv * sym)
}

/// Smallest eigenvalue of the extrapolated relative form along one probe.
/// Entries are extrapolated, not the eigenvalue itself, which is not smooth where eigenvalues cross.
fn c3_probe(
    reference: &GKStructure,
    test: &GKStructure,
    probe: &BoundaryProbe,
    tol: &Tolerances,
) -> Result<Result<f64, Failure>, CompactifyError> {
    let forms: Vec<DMatrix<f64>> =
        probe.path.iter().map(|x| c3_relative_form(reference, test, x)).collect::<Result<_, _>>()?;
    let n = forms[0].nrows();
    let mut lim = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let series: Vec<f64> = forms.iter().map(|f| f[(i, j)]).collect();
            let l = limit(&probe.h, &series, WINDOW, tol.cauchy);
            if !l.converged {
                return Ok(Err(limit_failure(probe, &format!("relative_form[{i}][{j}]"), &l, *series.last().unwrap())));
            }
            lim[(i, j)] = l.value;
        }
    }
    // Similar to a symmetric matrix, so the spectrum is real up to roundoff.
    let Some(schur) = nalgebra::linalg::Schur::try_new(lim, f64::EPSILON, 10_000) else {
        return Ok(Err(Failure {
            witness: Witness::new(&probe.target, "min_eigenvalue", f64::NAN).on_face(&probe.face),
            reason: "eigenvalues of the limiting form did not converge".into(),
        }));
    };
    Ok(Ok(schur.complex_eigenvalues().iter().map(|z| z.re).fold(f64::INFINITY, f64::min) + 0.0))
}

/// Condition C3: positivity of the extended bilinear form on the boundary.
pub fn check_c3(
    reference: &GKStructure,
    test: &GKStructure,
    per_facet: usize,
    tol: &Tolerances,
) -> Result<ReportDoc, CompactifyError> {
    let pre = check_c1_c2(reference, test, per_facet, tol)?;
    if !pre.passed() {
        return Err(CompactifyError::RequiresC1C2);
    }
    let m = reference.dim();
    let probes = boundary_probes(reference.polytope(), per_facet)?;
    let mut min_eig = f64::INFINITY;
    let mut witness: Option<Failure> = None;
    let mut min_witness: Option<Witness> = None;
    let mut deepened = 0usize;
    for probe in &probes {
        let mut out = c3_probe(reference, test, probe, tol)?;
        if out.is_err() {
            deepened += 1;
            out = c3_probe(reference, test, &probe.deepen(DEEP_PATH_LEN), tol)?;
        }
        match out {
            Err(f) => {
                if witness.is_none() {
                    witness = Some(f);
                }
            }
            Ok(e) => {
                if e < min_eig {
                    min_eig = e;
                    min_witness = Some(Witness::new(&probe.target, "min_eigenvalue", e).on_face(&probe.face));
                }
            }
        }
    }
    let mut report = ReportDoc::new("compactify_c3");
    let mut cond = if m == 2 {
        Condition::implied("C3", "implied in dimension four by C1 and C2'")
    } else {
        let ok = witness.is_none() && min_eig > tol.pd_floor;
        let mut c = Condition::new("C3", ok);
        if let Some(f) = witness {
            c = c.with_witness(f.witness).with_reason(f.reason);
        } else if !ok {
            c = c.with_reason("extended form is not positive definite on the boundary");
            if let Some(w) = min_witness.clone() {
                c = c.with_witness(w);
            }
        }
        c
    };
    cond = cond.with_tolerance("pd_floor", tol.pd_floor);
    if min_eig.is_finite() {
        cond = cond.with_value("min_eigenvalue", min_eig);
    }
    report.push(cond);
    if m == 2 {
        report.note("m = 2: eigenvalue report is informational");
        if let Some(w) = min_witness {
            report.set_info("min_eigenvalue_point", serde_json::json!(w.point));
        }
    }
    report.set_info("probes", probes.len() as f64);
    report.set_info("deepened_probes", deepened as f64);
    Ok(report)
}

/// Weighting of H for the facet criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AcgtfWeight {
    /// H for the Kähler metric S dmu^2 + S^-1 dt^2.
    Kahler,
    /// H for f S dmu^2 + f^-1 S^-1 dt^2 with f = sqrt((1 - p)/2); m = 2.
    AngleFactor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceAcgtf {
    pub face: Vec<usize>,
    pub target: Vec<f64>,
    pub selection: Vec<usize>,
    /// (facet index, extrapolated slope dH_ii/dy^i).
    pub slopes: Vec<(usize, f64)>,
    pub h_limit: Vec<Vec<f64>>,
    pub trailing_min_eigenvalue: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcgtfResult {
    pub report: ReportDoc,
    pub faces: Vec<FaceAcgtf>,
}

/// Weighted H and its derivatives dH/dx_k at x, in the chart's normal selection.
fn h_matrix(
    g: &GKStructure,
    nsel: &DMatrix<f64>,
    weight: AcgtfWeight,
    x: &[f64],
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>), CompactifyError> {
    let m = g.dim();
    let jet = g.jet(x)?;
    let w = jet.hess.clone().cholesky().ok_or_else(|| GkError::NotConvexAt(x.to_vec()))?.inverse();
    let h = nsel * &w * nsel.transpose();
    let dh: Vec<DMatrix<f64>> = (0..m).map(|k| -(nsel * (&w * jet.ds(k) * &w) * nsel.transpose())).collect();
    match weight {
        AcgtfWeight::Kahler => Ok((h, dh)),
        AcgtfWeight::AngleFactor => {
            if m != 2 {
                return Err(CompactifyError::Dim4Only(m));
            }
            let c = g.c()[(0, 1)];
            let d = jet.hess.determinant();
            let p = d + c * c;
            let f = (d / p).sqrt();
            let phi = 1.0 / f;
            let dphi: Vec<f64> = (0..m)
                .map(|k| {
                    let dk = d * (&w * jet.ds(k)).trace();
                    let df = dk * c * c / (2.0 * f * p * p);
                    -df / (f * f)
                })
                .collect();
            let dht = (0..m).map(|k| &h * dphi[k] + &dh[k] * phi).collect();
            Ok((h * phi, dht))
        }
    }
}

/// Facet criterion on every proper face: H rows of the face's facets vanish, normal slopes equal 2,
/// and the trailing block stays positive definite.
pub fn acgtf_check(
    g: &GKStructure,
    weight: AcgtfWeight,
    per_facet: usize,
    tol: &Tolerances,
) -> Result<AcgtfResult, CompactifyError> {
    let poly = g.polytope();
    let m = g.dim();
    let mut results = Vec::new();
    let mut conv_fail: Option<Failure> = None;
    let mut zero_fail: Option<Failure> = None;
    let mut slope_fail: Option<Failure> = None;
    let mut pd_fail: Option<Failure> = None;
    let mut worst_slope_dev = 0.0f64;
    for face in poly.faces().iter().filter(|f| !f.facets.is_empty()) {
        for probe in face_probes(poly, face, per_facet)? {
            let chart = poly
                .adapted_chart(&face.facets, &probe.target)
                .map_err(|source| CompactifyError::ChartFailure { face: face.facets.clone(), source })?;
            let nsel = chart.linear_part().clone();
            let ninv = chart.inverse_linear_part().clone();
            let k_face = face.facets.len();
            let mut hs = vec![Vec::with_capacity(PATH_LEN); m * m];
            let mut slopes = vec![Vec::with_capacity(PATH_LEN); k_face];
            for x in &probe.path {
                let (h, dh) = h_matrix(g, &nsel, weight, x)?;
                for (k, v) in h.iter().enumerate() {
                    hs[k].push(*v);
                }
                for (i, s) in slopes.iter_mut().enumerate() {
                    s.push((0..m).map(|k| ninv[(k, i)] * dh[k][(i, i)]).sum::<f64>());
                }
            }
            let mut pass = true;
            let mut reason = None;
            let mut hlim = DMatrix::zeros(m, m);
            for (k, series) in hs.iter().enumerate() {
                let l = limit(&probe.h, series, WINDOW, tol.cauchy);
                hlim[(k % m, k / m)] = l.value;
                if !l.converged {
                    pass = false;
                    reason.get_or_insert_with(|| "H does not converge".to_string());
                    if conv_fail.is_none() {
                        conv_fail = Some(limit_failure(&probe, "H", &l, *series.last().unwrap()));
                    }
                }
            }
            for i in 0..k_face {
                for j in 0..m {
                    let v = hlim[(i, j)];
                    if !(v.abs() <= tol.zero) {
                        pass = false;
                        reason.get_or_insert_with(|| format!("H[{i}][{j}] does not vanish on the face"));
                        if zero_fail.is_none() {
                            zero_fail = Some(Failure {
                                witness: Witness::new(&probe.target, &format!("H[{i}][{j}]"), v).on_face(&face.facets),
                                reason: "H does not vanish on the facet".into(),
                            });
                        }
                    }
                }
            }
            let mut slope_out = Vec::new();
            for (i, series) in slopes.iter().enumerate() {
                let l = limit(&probe.h, series, WINDOW, tol.cauchy);
                slope_out.push((chart.selection[i], l.value));
                let dev = (l.value - 2.0).abs();
                if l.converged {
                    worst_slope_dev = worst_slope_dev.max(dev);
                }
                if !l.converged || !(dev <= tol.slope) {
                    pass = false;
                    reason.get_or_insert_with(|| format!("slope on facet {} is {:.6}", chart.selection[i], l.value));
                    if slope_fail.is_none() {
                        slope_fail = Some(Failure {
                            witness: Witness::new(&probe.target, &format!("dH_ii/dy^i (facet {})", chart.selection[i]), l.value)
                                .on_face(&face.facets)
                                .detail(format!("window gap {:.3e}", l.gap)),
                            reason: "normal slope differs from 2".into(),
                        });
                    }
                }
            }
            let trailing = if k_face < m {
                let t = hlim.view((k_face, k_face), (m - k_face, m - k_face)).into_owned();
                let e = crate::gk::sym(&t).symmetric_eigen().eigenvalues.min();
                if !(e > tol.pd_floor) {
                    pass = false;
                    reason.get_or_insert_with(|| "trailing block not positive definite".into());
                    if pd_fail.is_none() {
                        pd_fail = Some(Failure {
                            witness: Witness::new(&probe.target, "trailing_min_eigenvalue", e).on_face(&face.facets),
                            reason: "trailing block of H not positive definite on the face".into(),
                        });
                    }
                }
                Some(e)
            } else {
                None
            };
            results.push(FaceAcgtf {
                face: face.facets.clone(),
                target: probe.target.clone(),
                selection: chart.selection.clone(),
                slopes: slope_out,
                h_limit: (0..m).map(|i| (0..m).map(|j| hlim[(i, j)]).collect()).collect(),
                trailing_min_eigenvalue: trailing,
                pass,
                reason,
            });
        }
    }
    let mut report = ReportDoc::new("acgtf");
    let mk = |name: &str, f: Option<Failure>| {
        let mut c = Condition::new(name, f.is_none());
        if let Some(f) = f {
            c = c.with_witness(f.witness).with_reason(f.reason);
        }
        c
    };
    report.push(mk("convergence", conv_fail).with_tolerance("cauchy", tol.cauchy));
    report.push(mk("vanishing", zero_fail).with_tolerance("zero", tol.zero));
    report.push(
        mk("normal_slope", slope_fail).with_tolerance("slope", tol.slope).with_value("max_slope_deviation", worst_slope_dev),
    );
    report.push(mk("trailing_positive", pd_fail).with_tolerance("pd_floor", tol.pd_floor));
    report.note("H_ij = <nu_i, S^-1 nu_j> in the adapted normal selection; conditions apply to H itself");
    if weight == AcgtfWeight::AngleFactor {
        report.note("H weighted by 1/f, f = sqrt((1 - p)/2)");
    }
    report.set_info("faces_probed", results.len() as f64);
    Ok(AcgtfResult { report, faces: results })
}

/// Along facet paths with c != 0 the angle function tends to -1.
pub fn angle_boundary_check(g: &GKStructure, per_facet: usize, tol: &Tolerances) -> Result<ReportDoc, CompactifyError> {
    if g.dim() != 2 {
        return Err(CompactifyError::Dim4Only(g.dim()));
    }
    let poly = g.polytope();
    let mut worst = 0.0f64;
    let mut fail: Option<Failure> = None;
    for face in poly.faces().iter().filter(|f| f.facets.len() == 1) {
        for probe in face_probes(poly, face, per_facet)? {
            let ps: Vec<f64> = probe
                .path
                .iter()
                .map(|x| g.frame_at(x).map(|f| f.p.expect("m = 2")))
                .collect::<Result<_, _>>()?;
            let l = limit(&probe.h, &ps, WINDOW, tol.cauchy);
            let dev = (l.value + 1.0).abs();
            if !l.converged || !(dev <= tol.angle) {
                if fail.is_none() {
                    fail = Some(if l.converged {
                        Failure {
                            witness: Witness::new(&probe.target, "p+1", dev).on_face(&probe.face),
                            reason: "angle function does not tend to -1".into(),
                        }
                    } else {
                        limit_failure(&probe, "p", &l, *ps.last().unwrap())
                    });
                }
            } else {
                worst = worst.max(dev);
            }
        }
    }
    let mut report = ReportDoc::new("angle_boundary");
    let mut c = Condition::new("p_tends_to_minus_one", fail.is_none())
        .with_tolerance("abs_p_plus_1", tol.angle)
        .with_value("max_abs_p_plus_1", worst);
    if let Some(f) = fail {
        c = c.with_witness(f.witness).with_reason(f.reason);
    }
    report.push(c);
    Ok(report)
}
