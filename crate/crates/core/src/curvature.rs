//! Generalized Hermitian scalar curvature and the dimension-4 curvature chain.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::gk::{Dim4Scalars, GKStructure, GkError, PointFrame};
use crate::polytope::InteriorGrid;
use crate::potential::Jet4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Gk(#[from] GkError),
    #[error("operation needs m = 2, structure has m = {0}")]
    Dim4Only(usize),
    #[error("angle function too close to 1 at {0:?}")]
    AngleSingularity(Vec<f64>),
    #[error("the two routes to u_J disagree at {point:?}: {a} vs {b}")]
    ChainInconsistent { point: Vec<f64>, a: f64, b: f64 },
    #[error("grid is degenerate for an affine fit ({0} points)")]
    DegenerateGrid(usize),
}

/// W = S^-1 with its first and second derivatives, from a 4-jet.
pub struct InverseHessianDerivs {
    pub w: DMatrix<f64>,
    /// dW/dx_k.
    pub dw: Vec<DMatrix<f64>>,
    /// d^2 W/dx_k dx_l.
    pub ddw: Vec<Vec<DMatrix<f64>>>,
}

impl InverseHessianDerivs {
    /// Derivatives of M^-1 where M = Hess + constant, so dM = dS.
    pub fn of_shifted(jet: &Jet4, inv: &DMatrix<f64>) -> Self {
        let m = jet.dim;
        let ds: Vec<DMatrix<f64>> = (0..m).map(|k| jet.ds(k)).collect();
        let a: Vec<DMatrix<f64>> = ds.iter().map(|sk| inv * sk * inv).collect();
        let dw: Vec<DMatrix<f64>> = a.iter().map(|ak| -ak).collect();
        let ddw = (0..m)
            .map(|k| {
                (0..m)
                    .map(|l| &a[l] * &ds[k] * inv + inv * &ds[k] * &a[l] - inv * jet.dds(k, l) * inv)
                    .collect()
            })
            .collect();
        Self { w: inv.clone(), dw, ddw }
    }

    pub fn of_jet(jet: &Jet4) -> Option<Self> {
        let w = jet.hess.clone().cholesky()?.inverse();
        Some(Self::of_shifted(jet, &w))
    }
}

/// u_GK = -sum_ij d^2 (S^-1)_ij / dx_i dx_j.
pub fn abreu(jet: &Jet4) -> Option<f64> {
    let d = InverseHessianDerivs::of_jet(jet)?;
    let m = jet.dim;
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            s -= d.ddw[i][j][(i, j)];
        }
    }
    Some(s)
}

pub fn u_gk_at(g: &GKStructure, x: &[f64]) -> Result<f64, CurvatureError> {
    let jet = g.jet(x)?;
    if !crate::potential::is_strictly_positive(&jet.hess) {
        return Err(GkError::NotConvexAt(x.to_vec()).into());
    }
    abreu(&jet).ok_or_else(|| GkError::NotConvexAt(x.to_vec()).into())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvaturePointData {
    pub x: Vec<f64>,
    pub u_gk: f64,
    pub u_j: f64,
    pub u_j_principal: f64,
    pub u_j_ricci: f64,
    pub s_g: f64,
    /// Coefficients of rho in dmu^k ^ dt^j, row k, column j.
    pub rho: Vec<Vec<f64>>,
    pub lee2: f64,
    pub lap_p: f64,
    pub bracket: f64,
    pub p: f64,
    pub dp_norm2: f64,
    /// Right-hand side s_g + 2 lap_p/(1-p) - (1/(1-p^2))((4+2p)/(1-p) - 1/2)|dp|^2, given an s_g.
    pub sg_to_ugk_correction: f64,
}

impl CurvaturePointData {
    /// u_GK predicted from an externally supplied Riemannian scalar curvature.
    pub fn u_gk_from_sg(&self, s_g: f64) -> f64 {
        s_g + self.sg_to_ugk_correction
    }
}

/// Chern-Ricci components rho_kj = d/dx_k (sum_i f_i (Psi^-1)_ij), f = -1/2 log det S + log det Psi.
pub fn ricci_from_jet(frame: &PointFrame, jet: &Jet4) -> DMatrix<f64> {
    let m = frame.dim();
    let (d, di, dij) = crate::gk::det_s_derivatives(jet, &frame.s_inv);
    let (p, pi, pij) = det_shifted_derivatives(jet, &frame.psi_inv, frame.det_psi);
    let fi: Vec<f64> = (0..m).map(|i| -0.5 * di[i] / d + pi[i] / p).collect();
    let fik = DMatrix::from_fn(m, m, |i, k| {
        -0.5 * (dij[(i, k)] / d - di[i] * di[k] / (d * d)) + (pij[(i, k)] / p - pi[i] * pi[k] / (p * p))
    });
    let inv = InverseHessianDerivs::of_shifted(jet, &frame.psi_inv);
    DMatrix::from_fn(m, m, |k, j| {
        (0..m).map(|i| fik[(i, k)] * frame.psi_inv[(i, j)] + fi[i] * inv.dw[k][(i, j)]).sum()
    })
}

/// det(Hess + C) and its derivatives.
fn det_shifted_derivatives(jet: &Jet4, inv: &DMatrix<f64>, det: f64) -> (f64, Vec<f64>, DMatrix<f64>) {
    let m = jet.dim;
    let ws: Vec<DMatrix<f64>> = (0..m).map(|k| inv * jet.ds(k)).collect();
    let tr: Vec<f64> = ws.iter().map(|w| w.trace()).collect();
    let grad = tr.iter().map(|t| det * t).collect();
    let hess = DMatrix::from_fn(m, m, |i, j| {
        det * (tr[i] * tr[j] - (&ws[j] * &ws[i]).trace() + (inv * jet.dds(i, j)).trace())
    });
    (det, grad, hess)
}

/// 4-form coefficient of a ^ b on R^4 for 2-forms given as antisymmetric matrices.
pub fn wedge4(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a[(0, 1)] * b[(2, 3)] - a[(0, 2)] * b[(1, 3)] + a[(0, 3)] * b[(1, 2)] + a[(1, 2)] * b[(0, 3)]
        - a[(1, 3)] * b[(0, 2)]
        + a[(2, 3)] * b[(0, 1)]
}

/// Antisymmetric matrix of sum rho_kj dmu^k ^ dt^j.
pub fn rho_two_form(rho: &DMatrix<f64>) -> DMatrix<f64> {
    let m = rho.nrows();
    let mut r = DMatrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        for j in 0..m {
            r[(k, m + j)] += rho[(k, j)];
            r[(m + j, k)] -= rho[(k, j)];
        }
    }
    r
}

/// 4 rho ^ F / (F ^ F) with F = g(J ., .).
pub fn hermitian_contraction(frame: &PointFrame, rho: &DMatrix<f64>) -> f64 {
    let f = frame.j.transpose() * &frame.g;
    let r = rho_two_form(rho);
    4.0 * wedge4(&r, &f) / wedge4(&f, &f)
}

pub fn ricci_chern_components(g: &GKStructure, x: &[f64]) -> Result<DMatrix<f64>, CurvatureError> {
    if g.dim() != 2 {
        return Err(CurvatureError::Dim4Only(g.dim()));
    }
    let jet = g.jet(x)?;
    let frame = PointFrame::from_hessian(x, &jet.hess, g.c())?;
    Ok(ricci_from_jet(&frame, &jet))
}

pub const CHAIN_REL_TOL: f64 = 1e-7;

pub fn dim4_chain(g: &GKStructure, x: &[f64]) -> Result<CurvaturePointData, CurvatureError> {
    if g.dim() != 2 {
        return Err(CurvatureError::Dim4Only(g.dim()));
    }
    let jet = g.jet(x)?;
    let frame = PointFrame::from_hessian(x, &jet.hess, g.c())?;
    let u_gk = abreu(&jet).ok_or_else(|| GkError::NotConvexAt(x.to_vec()))?;
    let sc = Dim4Scalars::compute(&frame, &jet)?;
    let p = sc.p;
    if 1.0 - p < 1e-10 {
        return Err(CurvatureError::AngleSingularity(x.to_vec()));
    }
    let u_j = u_gk - 2.0 * sc.lap_p / (1.0 - p) + (4.0 + 2.0 * p) / (1.0 - p) * sc.lee2;
    let u_j_principal = u_gk + (4.0 - 2.0 * p) / (1.0 - p) * sc.lee2 - 2.0 * sc.bracket / (1.0 - p);
    let rho = ricci_from_jet(&frame, &jet);
    let u_j_ricci = hermitian_contraction(&frame, &rho);
    let scale = 1.0 + u_j.abs().max(u_gk.abs());
    for other in [u_j_principal, u_j_ricci] {
        if (other - u_j).abs() > CHAIN_REL_TOL * scale {
            return Err(CurvatureError::ChainInconsistent { point: x.to_vec(), a: u_j, b: other });
        }
    }
    let one_m_p2 = 1.0 - p * p;
    let dp_term = if sc.dp_norm2 == 0.0 {
        0.0
    } else if one_m_p2 < 1e-12 {
        return Err(CurvatureError::AngleSingularity(x.to_vec()));
    } else {
        ((4.0 + 2.0 * p) / (1.0 - p) - 0.5) * sc.dp_norm2 / one_m_p2
    };
    Ok(CurvaturePointData {
        x: x.to_vec(),
        u_gk,
        u_j,
        u_j_principal,
        u_j_ricci,
        s_g: u_j - 0.5 * sc.lee2,
        rho: (0..2).map(|k| (0..2).map(|j| rho[(k, j)]).collect()).collect(),
        lee2: sc.lee2,
        lap_p: sc.lap_p,
        bracket: sc.bracket,
        p,
        dp_norm2: sc.dp_norm2,
        sg_to_ugk_correction: 2.0 * sc.lap_p / (1.0 - p) - dp_term,
    })
}

pub const EXTREMAL_TOL_ANALYTIC: f64 = 1e-6;
pub const EXTREMAL_TOL_FD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalFit {
    /// (a_1, ..., a_m, b) for u_GK ~ sum a_j mu^j + b.
    pub coeffs: Vec<f64>,
    pub residual: f64,
    pub is_extremal: bool,
    pub threshold: f64,
    pub points: usize,
    pub analytic: bool,
}

pub fn extremal_fit(g: &GKStructure, grid: &InteriorGrid) -> Result<ExtremalFit, CurvatureError> {
    extremal_fit_with(g, grid, 1.0)
}

/// As `extremal_fit` with thresholds multiplied by `tol_scale`.
pub fn extremal_fit_with(g: &GKStructure, grid: &InteriorGrid, tol_scale: f64) -> Result<ExtremalFit, CurvatureError> {
    let m = g.dim();
    let n = grid.len();
    if n < m + 2 {
        return Err(CurvatureError::DegenerateGrid(n));
    }
    let mut a = DMatrix::zeros(n, m + 1);
    let mut u = DVector::zeros(n);
    for (r, gp) in grid.points.iter().enumerate() {
        for k in 0..m {
            a[(r, k)] = gp.x[k];
        }
        a[(r, m)] = 1.0;
        u[r] = u_gk_at(g, &gp.x)?;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.iter().any(|&s| s <= 1e-12 * smax) {
        return Err(CurvatureError::DegenerateGrid(n));
    }
    let coeffs = svd.solve(&u, 0.0).map_err(|_| CurvatureError::DegenerateGrid(n))?;
    let resid = &a * &coeffs - &u;
    let rms = (resid.norm_squared() / n as f64).sqrt();
    let scale = (u.norm_squared() / n as f64).sqrt();
    let residual = if scale > 0.0 { rms / scale } else { rms };
    let analytic = g.potential().is_analytic();
    let threshold = tol_scale * if analytic { EXTREMAL_TOL_ANALYTIC } else { EXTREMAL_TOL_FD };
    Ok(ExtremalFit {
        coeffs: coeffs.iter().copied().collect(),
        residual,
        is_extremal: residual < threshold,
        threshold,
        points: n,
        analytic,
    })
}
