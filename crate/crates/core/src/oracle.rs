//! Finite-difference Riemannian geometry of torus-invariant metrics, used only as an
//! independent check on closed forms. The oracle sees metric entries and nothing else.
//!
//! Laplacian sign: geometer's convention, Delta f = -(1/sqrt g) d_i(sqrt g g^ij d_j f),
//! so Delta(mu1^2) = -2 for the flat metric.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::gk::{omega, GKStructure};
use crate::report::{Condition, ReportDoc, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("step {h:e} too large: point is only {margin:e} from the boundary (need margin > 4h)")]
    StepTooLarge { h: f64, margin: f64 },
    #[error("metric is not positive definite at {0:?}")]
    NotPositiveDefinite(Vec<f64>),
    #[error("metric evaluation failed: {0}")]
    Eval(String),
    #[error("metric has wrong shape at {0:?}")]
    Shape(Vec<f64>),
}

type MetricFn<'a> = Box<dyn Fn(&[f64]) -> Result<DMatrix<f64>, OracleError> + 'a>;
type MarginFn<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

/// x -> 2m x 2m metric in the basis (d/dmu, d/dt), independent of t.
pub struct InvariantMetric<'a> {
    m: usize,
    eval: MetricFn<'a>,
    margin: MarginFn<'a>,
}

impl<'a> InvariantMetric<'a> {
    pub fn new(
        m: usize,
        eval: impl Fn(&[f64]) -> Result<DMatrix<f64>, OracleError> + 'a,
        margin: impl Fn(&[f64]) -> f64 + 'a,
    ) -> Self {
        Self { m, eval: Box::new(eval), margin: Box::new(margin) }
    }

    pub fn flat(m: usize) -> Self {
        Self::new(m, move |_| Ok(DMatrix::identity(2 * m, 2 * m)), |_| f64::INFINITY)
    }

    /// The metric g = sym(omega(., J .)) of a structure.
    pub fn of_structure(g: &'a GKStructure) -> Self {
        Self::new(
            g.dim(),
            move |x| g.frame_at(x).map(|f| f.g).map_err(|e| OracleError::Eval(e.to_string())),
            move |x| g.polytope().dist_to_boundary(x),
        )
    }

    /// The Kähler metric S dmu^2 + S^-1 dt^2 of the structure's potential.
    pub fn kahler(g: &'a GKStructure) -> Self {
        Self::new(
            g.dim(),
            move |x| {
                let s = g.jet(x).map_err(|e| OracleError::Eval(e.to_string()))?.hess;
                let m = s.nrows();
                let sinv = s.clone().try_inverse().ok_or_else(|| OracleError::NotPositiveDefinite(x.to_vec()))?;
                let mut out = DMatrix::zeros(2 * m, 2 * m);
                out.view_mut((0, 0), (m, m)).copy_from(&s);
                out.view_mut((m, m), (m, m)).copy_from(&sinv);
                Ok(out)
            },
            move |x| g.polytope().dist_to_boundary(x),
        )
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn at(&self, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        let g = (self.eval)(x)?;
        if g.nrows() != 2 * self.m || g.ncols() != 2 * self.m {
            return Err(OracleError::Shape(x.to_vec()));
        }
        Ok(g)
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        (self.margin)(x)
    }

    /// 1e-3 times the distance to the boundary (1e-3 when there is none).
    pub fn default_step(&self, x: &[f64]) -> f64 {
        let d = self.margin(x);
        if d.is_finite() {
            1e-3 * d
        } else {
            1e-3
        }
    }

    fn check_step(&self, x: &[f64], h: f64) -> Result<(), OracleError> {
        let margin = self.margin(x);
        if !(h > 0.0) || margin <= 4.0 * h {
            return Err(OracleError::StepTooLarge { h, margin });
        }
        Ok(())
    }

    fn shifted(&self, x: &[f64], moves: &[(usize, f64)]) -> Result<DMatrix<f64>, OracleError> {
        let mut y = x.to_vec();
        for &(k, d) in moves {
            y[k] += d;
        }
        self.at(&y)
    }
}

fn inverse_pd(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
    let ch = g.clone().cholesky().ok_or_else(|| OracleError::NotPositiveDefinite(x.to_vec()))?;
    Ok(ch.inverse())
}

/// Scalar curvature from central-difference Christoffel symbols.
pub fn scalar_curvature_fd(met: &InvariantMetric, x: &[f64], h: f64) -> Result<f64, OracleError> {
    met.check_step(x, h)?;
    let m = met.dim();
    let n = 2 * m;
    let g0 = met.at(x)?;
    let ginv = inverse_pd(&g0, x)?;
    // dg[e] and ddg[e][f] for e, f < m (t-directions vanish).
    let mut dg = vec![DMatrix::zeros(n, n); n];
    let mut ddg = vec![vec![DMatrix::zeros(n, n); n]; n];
    for e in 0..m {
        let gp = met.shifted(x, &[(e, h)])?;
        let gm = met.shifted(x, &[(e, -h)])?;
        dg[e] = (&gp - &gm) / (2.0 * h);
        ddg[e][e] = (&gp - &g0 * 2.0 + &gm) / (h * h);
        for f in 0..e {
            let pp = met.shifted(x, &[(e, h), (f, h)])?;
            let pm = met.shifted(x, &[(e, h), (f, -h)])?;
            let mp = met.shifted(x, &[(e, -h), (f, h)])?;
            let mm = met.shifted(x, &[(e, -h), (f, -h)])?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            ddg[e][f] = v.clone();
            ddg[f][e] = v;
        }
    }
    // Z[d][b][c] = d_b g_dc + d_c g_db - d_d g_bc and its derivatives.
    let z = |d: usize, b: usize, c: usize| dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)];
    let dz = |e: usize, d: usize, b: usize, c: usize| ddg[e][b][(d, c)] + ddg[e][c][(d, b)] - ddg[e][d][(b, c)];
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                gamma[a][b][c] = 0.5 * (0..n).map(|d| ginv[(a, d)] * z(d, b, c)).sum::<f64>();
            }
        }
    }
    let dginv: Vec<DMatrix<f64>> = (0..n).map(|e| -(&ginv * &dg[e] * &ginv)).collect();
    let dgamma = |e: usize, a: usize, b: usize, c: usize| -> f64 {
        if e >= m {
            return 0.0;
        }
        0.5 * (0..n).map(|d| dginv[e][(a, d)] * z(d, b, c) + ginv[(a, d)] * dz(e, d, b, c)).sum::<f64>()
    };
    let mut s = 0.0;
    for b in 0..n {
        for c in 0..n {
            if ginv[(b, c)] == 0.0 {
                continue;
            }
            let mut r = 0.0;
            for a in 0..n {
                r += dgamma(a, a, b, c) - dgamma(c, a, b, a);
                for d in 0..n {
                    r += gamma[a][a][d] * gamma[d][b][c] - gamma[a][c][d] * gamma[d][b][a];
                }
            }
            s += ginv[(b, c)] * r;
        }
    }
    Ok(s)
}

/// Geometer's Laplacian of a torus-invariant function.
pub fn laplace_beltrami_fd(
    met: &InvariantMetric,
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    h: f64,
) -> Result<f64, OracleError> {
    met.check_step(x, h)?;
    let m = met.dim();
    let flux = |y: &[f64], i: usize| -> Result<f64, OracleError> {
        let g = met.at(y)?;
        let ginv = inverse_pd(&g, y)?;
        let vol = g.determinant().sqrt();
        let mut v = 0.0;
        for j in 0..m {
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[j] += h;
            ym[j] -= h;
            v += ginv[(i, j)] * (f(&yp) - f(&ym)) / (2.0 * h);
        }
        Ok(vol * v)
    };
    let g0 = met.at(x)?;
    let vol0 = g0.determinant().sqrt();
    let mut div = 0.0;
    for i in 0..m {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        div += (flux(&xp, i)? - flux(&xm, i)?) / (2.0 * h);
    }
    Ok(-div / vol0)
}

pub const COMPAT_TOL: f64 = 1e-10;

/// Largest entry of T^2 + I for T = Omega^-1 G.
pub fn compatibility_defect(gmat: &DMatrix<f64>) -> f64 {
    let n = gmat.nrows();
    let w = omega(n / 2);
    let t = -&w * gmat;
    (&t * &t + DMatrix::identity(n, n)).amax()
}

/// Checks that the metric is positive definite and omega-compatible at the given points.
pub fn compatibility_check(met: &InvariantMetric, points: &[Vec<f64>], tol: f64) -> Result<ReportDoc, OracleError> {
    let mut worst = 0.0f64;
    let mut witness: Option<Witness> = None;
    let mut positive = true;
    for x in points {
        let gm = met.at(x)?;
        if gm.clone().cholesky().is_none() {
            positive = false;
            if witness.is_none() {
                witness = Some(Witness::new(x, "metric_not_positive", 0.0));
            }
        }
        let d = compatibility_defect(&gm);
        if d > worst {
            worst = d;
            if d > tol {
                witness = Some(Witness::new(x, "T^2+I", d));
            }
        }
    }
    let mut report = ReportDoc::new("compatibility");
    let mut c = Condition::new("omega_compatible", worst <= tol && positive)
        .with_tolerance("max_abs_T2_plus_I", tol)
        .with_value("max_abs_T2_plus_I", worst);
    if let Some(w) = witness {
        c = c.with_witness(w);
    }
    report.push(c);
    report.set_info("points", points.len() as f64);
    Ok(report)
}
