//! Pointwise algebra of anti-diagonal generalized Kähler structures in momentum-angle coordinates.
//!
//! Tangent basis (d/dmu^1..d/dmu^m, d/dt^1..d/dt^m); omega = sum dmu^j ^ dt^j has matrix
//! [[0, I], [-I, 0]] so that omega(X, Y) = X^T Omega Y.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

use crate::polytope::DelzantPolytope;
use crate::potential::{is_strictly_positive, Jet4, PotentialError, PotentialSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GkError {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("C must be {m}x{m}, got {rows}x{cols}")]
    CShape { m: usize, rows: usize, cols: usize },
    #[error("C is not antisymmetric (entry ({i},{j}))")]
    CNotAntisymmetric { i: usize, j: usize },
    #[error("potential dimension does not match polytope: {0}")]
    Dimension(String),
    #[error("Hessian of the potential is not positive definite at {0:?}")]
    NotConvexAt(Vec<f64>),
    #[error("Psi is singular at {0:?}")]
    SingularPsi(Vec<f64>),
    #[error("operation needs m = 2, structure has m = {0}")]
    Dim4Only(usize),
    #[error("angle function degenerate (|p| = 1) at {0:?}")]
    DegenerateAngle(Vec<f64>),
    #[error("angle function disagrees between trace and determinant forms at {point:?}: {trace} vs {closed}")]
    AngleMismatch { point: Vec<f64>, trace: f64, closed: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GKStructure {
    polytope: DelzantPolytope,
    potential: PotentialSpec,
    c: DMatrix<f64>,
}

pub fn omega(m: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        w[(i, m + i)] = 1.0;
        w[(m + i, i)] = -1.0;
    }
    w
}

/// 2x2 antisymmetric matrix [[0, c], [-c, 0]].
pub fn c2(c: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, c, -c, 0.0])
}

fn blocks(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(a);
    out.view_mut((0, m), (m, m)).copy_from(b);
    out.view_mut((m, 0), (m, m)).copy_from(c);
    out.view_mut((m, m), (m, m)).copy_from(d);
    out
}

pub fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}
pub fn antisym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a - a.transpose()) * 0.5
}

impl GKStructure {
    pub fn new(polytope: DelzantPolytope, potential: PotentialSpec, c: DMatrix<f64>) -> Result<Self, GkError> {
        let m = polytope.dim();
        if c.nrows() != m || c.ncols() != m {
            return Err(GkError::CShape { m, rows: c.nrows(), cols: c.ncols() });
        }
        for i in 0..m {
            for j in 0..m {
                if c[(i, j)] + c[(j, i)] != 0.0 {
                    return Err(GkError::CNotAntisymmetric { i, j });
                }
            }
        }
        potential.validate(m).map_err(|e| GkError::Dimension(e.to_string()))?;
        Ok(Self { polytope, potential, c })
    }

    pub fn kahler(polytope: DelzantPolytope, potential: PotentialSpec) -> Self {
        let m = polytope.dim();
        Self::new(polytope, potential, DMatrix::zeros(m, m)).expect("zero C is antisymmetric")
    }

    pub fn guillemin(polytope: DelzantPolytope, c: DMatrix<f64>) -> Result<Self, GkError> {
        Self::new(polytope, PotentialSpec::Guillemin, c)
    }

    pub fn with_c(&self, c: DMatrix<f64>) -> Result<Self, GkError> {
        Self::new(self.polytope.clone(), self.potential.clone(), c)
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }
    pub fn polytope(&self) -> &DelzantPolytope {
        &self.polytope
    }
    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet4, GkError> {
        Ok(self.potential.jet4(&self.polytope, x)?)
    }

    pub fn frame_at(&self, x: &[f64]) -> Result<PointFrame, GkError> {
        let jet = self.jet(x)?;
        PointFrame::from_hessian(x, &jet.hess, &self.c)
    }
}

/// Every pointwise tensor of the structure at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFrame {
    pub x: Vec<f64>,
    pub s: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub psi: DMatrix<f64>,
    pub psi_inv: DMatrix<f64>,
    pub s_inv: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub jdual: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub bform: DMatrix<f64>,
    pub det_s: f64,
    pub det_psi: f64,
    /// -1/4 tr(J Jdual); only m = 2.
    pub p: Option<f64>,
    pub trace_j_jdual: f64,
    pub volratio: f64,
}

impl PointFrame {
    pub fn from_hessian(x: &[f64], s: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Self, GkError> {
        let m = s.nrows();
        if !is_strictly_positive(s) {
            return Err(GkError::NotConvexAt(x.to_vec()));
        }
        let psi = s + c;
        let psi_inv = psi.clone().try_inverse().ok_or_else(|| GkError::SingularPsi(x.to_vec()))?;
        let s_inv = s.clone().cholesky().ok_or_else(|| GkError::NotConvexAt(x.to_vec()))?.inverse();
        let z = DMatrix::zeros(m, m);
        // J d/dmu^j = sum_i Psi_ij d/dt^i, J d/dt^j = -sum_i (Psi^-1)_ij d/dmu^i.
        let j = blocks(&z, &(-&psi_inv), &psi, &z);
        let jdual = blocks(&z, &psi_inv.transpose(), &(-psi.transpose()), &z);
        let w = omega(m);
        let beta = &w * &j;
        let g = sym(&beta);
        let bform = -antisym(&beta);
        let diff = (&j - &jdual).try_inverse().ok_or_else(|| GkError::SingularPsi(x.to_vec()))?;
        let a = &diff * -2.0;
        let b = -(&j + &jdual) * &diff;
        let det_s = s.determinant();
        let det_psi = psi.determinant();
        let trace_j_jdual = (&j * &jdual).trace();
        let p = if m == 2 {
            let p_trace = -0.25 * trace_j_jdual;
            let cc = c[(0, 1)];
            let p_closed = (cc * cc - det_s) / det_psi;
            if (p_trace - p_closed).abs() > 1e-9 * (1.0 + p_closed.abs()) {
                return Err(GkError::AngleMismatch { point: x.to_vec(), trace: p_trace, closed: p_closed });
            }
            Some(p_trace)
        } else {
            None
        };
        Ok(Self {
            x: x.to_vec(),
            s: s.clone(),
            c: c.clone(),
            psi,
            psi_inv,
            s_inv,
            j,
            jdual,
            a,
            b,
            g,
            bform,
            det_s,
            det_psi,
            p,
            trace_j_jdual,
            volratio: det_s / det_psi,
        })
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// omega(J ., .) pairing matrix omega(., J .) = Omega J.
    pub fn beta(&self) -> DMatrix<f64> {
        omega(self.dim()) * &self.j
    }

    /// Q_ij = omega(K K_i, K_j) with K = A + iB and K_i = d/dt^i.
    pub fn q_matrix(&self) -> DMatrix<Complex<f64>> {
        let m = self.dim();
        let k = DMatrix::from_fn(2 * m, 2 * m, |r, s| Complex::new(self.a[(r, s)], self.b[(r, s)]));
        let w = omega(m).map(|v| Complex::new(v, 0.0));
        DMatrix::from_fn(m, m, |i, jj| {
            let kki = k.column(m + i).into_owned();
            let mut e = DVector::zeros(2 * m);
            e[m + jj] = Complex::new(1.0, 0.0);
            (kki.transpose() * &w * e)[(0, 0)]
        })
    }

    /// The ω-compatible metric f S dmu^2 + f^-1 S^-1 dt^2, f = sqrt((1 - p)/2); m = 2 only.
    pub fn g_ak(&self) -> Result<DMatrix<f64>, GkError> {
        let p = self.p.ok_or(GkError::Dim4Only(self.dim()))?;
        let f = ((1.0 - p) / 2.0).sqrt();
        let z = DMatrix::zeros(2, 2);
        Ok(blocks(&(&self.s * f), &z, &z, &(&self.s_inv * (1.0 / f))))
    }
}

/// Dimension-4 scalars built from closed forms in det S and its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Dim4Scalars {
    pub p: f64,
    pub dp: [f64; 2],
    pub lee2: f64,
    pub lap_p: f64,
    pub bracket: f64,
    /// |dp|^2 in the metric g.
    pub dp_norm2: f64,
    pub det_s: f64,
    pub det_s_grad: [f64; 2],
    pub det_s_hess: [[f64; 2]; 2],
}

/// First and second derivatives of det S from the jet.
pub fn det_s_derivatives(jet: &Jet4, s_inv: &DMatrix<f64>) -> (f64, Vec<f64>, DMatrix<f64>) {
    let m = jet.dim;
    let d = jet.hess.determinant();
    let ws: Vec<DMatrix<f64>> = (0..m).map(|k| s_inv * jet.ds(k)).collect();
    let tr: Vec<f64> = ws.iter().map(|w| w.trace()).collect();
    let grad: Vec<f64> = tr.iter().map(|t| d * t).collect();
    let hess = DMatrix::from_fn(m, m, |i, j| {
        d * (tr[i] * tr[j] - (&ws[j] * &ws[i]).trace() + (s_inv * jet.dds(i, j)).trace())
    });
    (d, grad, hess)
}

impl Dim4Scalars {
    pub fn compute(frame: &PointFrame, jet: &Jet4) -> Result<Self, GkError> {
        if frame.dim() != 2 {
            return Err(GkError::Dim4Only(frame.dim()));
        }
        let p = frame.p.expect("m = 2 frame has p");
        let c = frame.c[(0, 1)];
        let c2 = c * c;
        let w = &frame.s_inv;
        let (d, di, dij) = det_s_derivatives(jet, w);
        let pp = d + c2;
        let dp = [-2.0 * c2 * di[0] / (pp * pp), -2.0 * c2 * di[1] / (pp * pp)];
        let mut lap_p = 0.0;
        let mut lee2 = 0.0;
        let mut dp_norm2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                lap_p += 2.0 * c2 / (pp * pp) * (dij[(i, j)] - 3.0 * di[i] * di[j] / pp) * w[(i, j)];
                lee2 += c2 * di[i] * di[j] * w[(i, j)] / (pp * pp * d);
                dp_norm2 += w[(i, j)] * dp[i] * dp[j];
            }
        }
        Ok(Self {
            p,
            dp,
            lee2,
            lap_p,
            bracket: lap_p - 2.0 * p * lee2,
            dp_norm2,
            det_s: d,
            det_s_grad: [di[0], di[1]],
            det_s_hess: [[dij[(0, 0)], dij[(0, 1)]], [dij[(1, 0)], dij[(1, 1)]]],
        })
    }

    /// |theta|^2 recovered from |dp|^2 / (1 - p^2).
    pub fn lee2_from_dp(&self, x: &[f64]) -> Result<f64, GkError> {
        let q = 1.0 - self.p * self.p;
        if q.abs() < 1e-12 {
            return Err(GkError::DegenerateAngle(x.to_vec()));
        }
        Ok(self.dp_norm2 / q)
    }
}
