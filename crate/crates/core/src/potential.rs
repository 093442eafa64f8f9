//! Symplectic potentials and their 4-jets.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::polytope::{DelzantPolytope, InteriorGrid};
use crate::report::{Condition, ReportDoc, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("point {0:?} is outside the domain of the potential")]
    OutsideDomain(Vec<f64>),
    #[error("point {point:?} is too close to the boundary for finite differences (step {step:e})")]
    FdStepUnderflow { point: Vec<f64>, step: f64 },
    #[error("expression evaluation failed at {point:?}: {source}")]
    Eval { point: Vec<f64>, source: EvalError },
    #[error("potential has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("quadratic term is not symmetric")]
    NotSymmetric,
    #[error("expression is not a polynomial: {0}")]
    NotPolynomial(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// 1/2 sum_j L_j log L_j for the structure's polytope.
    Guillemin,
    /// 1/2 x^T Q x + l^T x + constant.
    Quadratic { q: DMatrix<f64>, l: DVector<f64>, constant: f64 },
    Expression(Expr),
    /// Polynomial with exact derivatives.
    Polynomial(Polynomial),
    Sum(Vec<PotentialSpec>),
    Scaled(f64, Box<PotentialSpec>),
}

impl PotentialSpec {
    pub fn quadratic(q: DMatrix<f64>, l: DVector<f64>) -> Result<Self, PotentialError> {
        if q.nrows() != q.ncols() || q.nrows() != l.len() {
            return Err(PotentialError::DimensionMismatch { expected: q.nrows(), got: l.len() });
        }
        if (&q - q.transpose()).amax() != 0.0 {
            return Err(PotentialError::NotSymmetric);
        }
        Ok(Self::Quadratic { q, l, constant: 0.0 })
    }

    /// Checks that every member fits dimension m.
    pub fn validate(&self, m: usize) -> Result<(), PotentialError> {
        match self {
            PotentialSpec::Guillemin => Ok(()),
            PotentialSpec::Quadratic { q, l, .. } => {
                if q.nrows() != m || q.ncols() != m || l.len() != m {
                    Err(PotentialError::DimensionMismatch { expected: m, got: l.len().max(q.nrows()) })
                } else if (q - q.transpose()).amax() != 0.0 {
                    Err(PotentialError::NotSymmetric)
                } else {
                    Ok(())
                }
            }
            PotentialSpec::Expression(e) => match e.max_var() {
                Some(v) if v >= m => Err(PotentialError::DimensionMismatch { expected: m, got: v + 1 }),
                _ => Ok(()),
            },
            PotentialSpec::Polynomial(p) if p.dim != m => {
                Err(PotentialError::DimensionMismatch { expected: m, got: p.dim })
            }
            PotentialSpec::Polynomial(_) => Ok(()),
            PotentialSpec::Sum(terms) => terms.iter().try_for_each(|t| t.validate(m)),
            PotentialSpec::Scaled(_, inner) => inner.validate(m),
        }
    }

    pub fn jet4(&self, poly: &DelzantPolytope, x: &[f64]) -> Result<Jet4, PotentialError> {
        let m = poly.dim();
        if x.len() != m {
            return Err(PotentialError::DimensionMismatch { expected: m, got: x.len() });
        }
        match self {
            PotentialSpec::Guillemin => guillemin_jet(poly, x),
            PotentialSpec::Quadratic { q, l, constant } => {
                let xv = DVector::from_column_slice(x);
                let mut jet = Jet4::zeros(m);
                jet.value = 0.5 * xv.dot(&(q * &xv)) + l.dot(&xv) + constant;
                jet.grad = q * &xv + l;
                jet.hess = q.clone();
                Ok(jet)
            }
            PotentialSpec::Expression(e) => fd_jet(poly, x, |y| {
                e.eval(y).map_err(|source| PotentialError::Eval { point: y.to_vec(), source })
            }),
            PotentialSpec::Polynomial(p) => Ok(p.jet(x)),
            PotentialSpec::Sum(terms) => {
                let mut jet = Jet4::zeros(m);
                for t in terms {
                    jet.add_scaled(1.0, &t.jet4(poly, x)?);
                }
                Ok(jet)
            }
            PotentialSpec::Scaled(a, inner) => {
                let mut jet = Jet4::zeros(m);
                jet.add_scaled(*a, &inner.jet4(poly, x)?);
                Ok(jet)
            }
        }
    }

    /// Value of the potential itself.
    pub fn value(&self, poly: &DelzantPolytope, x: &[f64]) -> Result<f64, PotentialError> {
        match self {
            PotentialSpec::Guillemin => {
                let l = poly.eval_l(x);
                if l.iter().any(|&v| v <= 0.0) {
                    return Err(PotentialError::OutsideDomain(x.to_vec()));
                }
                Ok(0.5 * l.iter().map(|&v| v * v.ln()).sum::<f64>())
            }
            PotentialSpec::Expression(e) => {
                e.eval(x).map_err(|source| PotentialError::Eval { point: x.to_vec(), source })
            }
            PotentialSpec::Sum(terms) => terms.iter().map(|t| t.value(poly, x)).sum(),
            PotentialSpec::Scaled(a, inner) => Ok(a * inner.value(poly, x)?),
            PotentialSpec::Quadratic { .. } => self.jet4(poly, x).map(|j| j.value),
            PotentialSpec::Polynomial(p) => Ok(p.eval(x)),
        }
    }

    /// True when every jet comes from closed forms.
    pub fn is_analytic(&self) -> bool {
        match self {
            PotentialSpec::Expression(_) => false,
            PotentialSpec::Sum(t) => t.iter().all(|s| s.is_analytic()),
            PotentialSpec::Scaled(_, s) => s.is_analytic(),
            _ => true,
        }
    }
}

type Terms = BTreeMap<Vec<u32>, f64>;

/// Sum of coef * prod x_k^e_k.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

const MAX_POLY_EXPONENT: f64 = 32.0;

impl Polynomial {
    /// Expands a polynomial expression: constants, variables, + - *, division by constants,
    /// and nonnegative integer powers.
    pub fn from_expr(e: &Expr, dim: usize) -> Result<Self, PotentialError> {
        let terms = expand(e, dim)?;
        Ok(Self { dim, terms: terms.into_iter().filter(|(_, c)| *c != 0.0).map(|(e, c)| (c, e)).collect() })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()).sum()
    }

    fn derivative(&self, alpha: &[usize], x: &[f64]) -> f64 {
        let mut total = 0.0;
        'terms: for (c, e) in &self.terms {
            let mut v = *c;
            for k in 0..self.dim {
                let (ek, ak) = (e[k] as usize, alpha[k]);
                if ak > ek {
                    continue 'terms;
                }
                for r in 0..ak {
                    v *= (ek - r) as f64;
                }
                v *= x[k].powi((ek - ak) as i32);
            }
            total += v;
        }
        total
    }

    pub fn jet(&self, x: &[f64]) -> Jet4 {
        let m = self.dim;
        let mut jet = Jet4::zeros(m);
        jet.value = self.eval(x);
        for order in 1..=4 {
            let mut idx = vec![0usize; order];
            loop {
                let v = self.derivative(&multi_index(&idx, m), x);
                assign_symmetric(&mut jet, &idx, v);
                if !next_nondecreasing(&mut idx, m) {
                    break;
                }
            }
        }
        jet
    }
}

fn poly_mul(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

fn constant_of(t: &Terms) -> Option<f64> {
    match t.len() {
        0 => Some(0.0),
        1 => t.iter().next().filter(|(e, _)| e.iter().all(|&k| k == 0)).map(|(_, c)| *c),
        _ => None,
    }
}

fn expand(e: &Expr, dim: usize) -> Result<Terms, PotentialError> {
    use crate::expr::BinOp;
    let zero = vec![0u32; dim];
    Ok(match e {
        Expr::Const(c) => Terms::from([(zero, *c)]),
        Expr::Var(i) => {
            if *i >= dim {
                return Err(PotentialError::DimensionMismatch { expected: dim, got: i + 1 });
            }
            let mut ex = zero;
            ex[*i] = 1;
            Terms::from([(ex, 1.0)])
        }
        Expr::Neg(a) => expand(a, dim)?.into_iter().map(|(k, c)| (k, -c)).collect(),
        Expr::Call(..) => return Err(PotentialError::NotPolynomial(e.to_string())),
        Expr::Bin(op, a, b) => {
            let (pa, pb) = (expand(a, dim)?, expand(b, dim)?);
            match op {
                BinOp::Add | BinOp::Sub => {
                    let sign = if *op == BinOp::Add { 1.0 } else { -1.0 };
                    let mut out = pa;
                    for (k, c) in pb {
                        *out.entry(k).or_insert(0.0) += sign * c;
                    }
                    out
                }
                BinOp::Mul => poly_mul(&pa, &pb),
                BinOp::Div => match constant_of(&pb) {
                    Some(d) if d != 0.0 => pa.into_iter().map(|(k, c)| (k, c / d)).collect(),
                    _ => return Err(PotentialError::NotPolynomial(e.to_string())),
                },
                BinOp::Pow => match constant_of(&pb) {
                    Some(n) if n >= 0.0 && n.fract() == 0.0 && n <= MAX_POLY_EXPONENT => {
                        let mut out = Terms::from([(zero, 1.0)]);
                        for _ in 0..n as u32 {
                            out = poly_mul(&out, &pa);
                        }
                        out
                    }
                    _ => return Err(PotentialError::NotPolynomial(e.to_string())),
                },
            }
        }
    })
}

/// Derivatives of a potential up to order four at one point. Tensors are stored flat, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet4 {
    pub dim: usize,
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    pub third: Vec<f64>,
    pub fourth: Vec<f64>,
    pub analytic: bool,
}

impl Jet4 {
    pub fn zeros(m: usize) -> Self {
        Self {
            dim: m,
            value: 0.0,
            grad: DVector::zeros(m),
            hess: DMatrix::zeros(m, m),
            third: vec![0.0; m * m * m],
            fourth: vec![0.0; m * m * m * m],
            analytic: true,
        }
    }

    pub fn t3(&self, i: usize, j: usize, k: usize) -> f64 {
        let m = self.dim;
        self.third[(i * m + j) * m + k]
    }
    pub fn t4(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let m = self.dim;
        self.fourth[((i * m + j) * m + k) * m + l]
    }
    /// dS/dx_k.
    pub fn ds(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.t3(i, j, k))
    }
    /// d^2 S/dx_k dx_l.
    pub fn dds(&self, k: usize, l: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.t4(i, j, k, l))
    }

    pub fn add_scaled(&mut self, a: f64, other: &Jet4) {
        self.value += a * other.value;
        self.grad += &other.grad * a;
        self.hess += &other.hess * a;
        for (s, o) in self.third.iter_mut().zip(&other.third) {
            *s += a * o;
        }
        for (s, o) in self.fourth.iter_mut().zip(&other.fourth) {
            *s += a * o;
        }
        self.analytic &= other.analytic;
    }

    /// Largest deviation of the third and fourth tensors from full symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.dim;
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                worst = worst.max((self.hess[(i, j)] - self.hess[(j, i)]).abs());
                for k in 0..m {
                    let v = self.t3(i, j, k);
                    worst = worst.max((v - self.t3(j, i, k)).abs()).max((v - self.t3(i, k, j)).abs());
                    for l in 0..m {
                        let w = self.t4(i, j, k, l);
                        worst = worst
                            .max((w - self.t4(j, i, k, l)).abs())
                            .max((w - self.t4(i, k, j, l)).abs())
                            .max((w - self.t4(i, j, l, k)).abs());
                    }
                }
            }
        }
        worst
    }
}

fn guillemin_jet(poly: &DelzantPolytope, x: &[f64]) -> Result<Jet4, PotentialError> {
    let m = poly.dim();
    let l = poly.eval_l(x);
    if l.iter().any(|&v| !(v > 0.0)) {
        return Err(PotentialError::OutsideDomain(x.to_vec()));
    }
    let mut jet = Jet4::zeros(m);
    for (j, &t) in l.iter().enumerate() {
        let nu: Vec<f64> = poly.normals()[j].iter().map(|&v| v as f64).collect();
        // Derivatives of phi(t) = t log t, halved.
        let d0 = 0.5 * t * t.ln();
        let d1 = 0.5 * (t.ln() + 1.0);
        let d2 = 0.5 / t;
        let d3 = -0.5 / (t * t);
        let d4 = 1.0 / (t * t * t);
        jet.value += d0;
        for a in 0..m {
            jet.grad[a] += d1 * nu[a];
            for b in 0..m {
                jet.hess[(a, b)] += d2 * nu[a] * nu[b];
                for c in 0..m {
                    let nabc = nu[a] * nu[b] * nu[c];
                    jet.third[(a * m + b) * m + c] += d3 * nabc;
                    for d in 0..m {
                        jet.fourth[((a * m + b) * m + c) * m + d] += d4 * nabc * nu[d];
                    }
                }
            }
        }
    }
    Ok(jet)
}

/// Step per derivative order, relative to the distance to the boundary.
const FD_REL_STEP: [f64; 5] = [0.0, 2e-3, 5e-3, 1e-2, 2e-2];
const FD_MIN_STEP: f64 = 1e-10;

/// One-dimensional central stencils (offsets in units of the step, weights without the h^-n factor).
fn stencil(order: usize) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("stencil order"),
    }
}

struct FdEvaluator<'a, F> {
    f: &'a F,
    x: &'a [f64],
    unit: f64,
    cache: HashMap<Vec<i32>, f64>,
}

impl<F: Fn(&[f64]) -> Result<f64, PotentialError>> FdEvaluator<'_, F> {
    fn at(&mut self, off: &[i32]) -> Result<f64, PotentialError> {
        if let Some(v) = self.cache.get(off) {
            return Ok(*v);
        }
        let y: Vec<f64> = self.x.iter().zip(off).map(|(xi, &o)| xi + o as f64 * self.unit).collect();
        let v = (self.f)(&y)?;
        self.cache.insert(off.to_vec(), v);
        Ok(v)
    }

    /// Tensor-product central difference for per-axis orders `alpha`, step = scale * unit.
    fn derivative(&mut self, alpha: &[usize], scale: i32) -> Result<f64, PotentialError> {
        let m = alpha.len();
        let h = scale as f64 * self.unit;
        let stencils: Vec<&[(i32, f64)]> = alpha.iter().map(|&a| stencil(a)).collect();
        let mut idx = vec![0usize; m];
        let mut sum = 0.0;
        loop {
            let mut w = 1.0;
            let mut off = vec![0i32; m];
            for k in 0..m {
                let (o, wk) = stencils[k][idx[k]];
                w *= wk;
                off[k] = o * scale;
            }
            sum += w * self.at(&off)?;
            let mut k = 0;
            while k < m {
                idx[k] += 1;
                if idx[k] < stencils[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == m {
                break;
            }
        }
        let n: i32 = alpha.iter().map(|&a| a as i32).sum();
        Ok(sum / h.powi(n))
    }

    /// Second-order stencil at steps h and h/2 combined by one Richardson level.
    fn richardson(&mut self, alpha: &[usize]) -> Result<f64, PotentialError> {
        let coarse = self.derivative(alpha, 2)?;
        let fine = self.derivative(alpha, 1)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }
}

fn multi_index(idx: &[usize], m: usize) -> Vec<usize> {
    let mut alpha = vec![0usize; m];
    for &i in idx {
        alpha[i] += 1;
    }
    alpha
}

/// Central-difference 4-jet of f at x, steps scaled by the distance of x to the boundary of the polytope.
pub fn fd_jet<F>(poly: &DelzantPolytope, x: &[f64], f: F) -> Result<Jet4, PotentialError>
where
    F: Fn(&[f64]) -> Result<f64, PotentialError>,
{
    let m = poly.dim();
    let dist = poly.dist_to_boundary(x);
    if !(dist > 0.0) {
        return Err(PotentialError::OutsideDomain(x.to_vec()));
    }
    if FD_REL_STEP[1] * dist < FD_MIN_STEP {
        return Err(PotentialError::FdStepUnderflow { point: x.to_vec(), step: FD_REL_STEP[1] * dist });
    }
    let mut jet = Jet4::zeros(m);
    jet.analytic = false;
    jet.value = f(x)?;
    for order in 1..=4 {
        // Richardson uses offsets up to 2 * 2 = 4 units of h/2, i.e. 2h.
        let mut ev = FdEvaluator { f: &f, x, unit: 0.5 * FD_REL_STEP[order] * dist, cache: HashMap::new() };
        let mut idx = vec![0usize; order];
        loop {
            let alpha = multi_index(&idx, m);
            let v = ev.richardson(&alpha)?;
            // Assign to every permutation by sorting: only nondecreasing idx are visited.
            assign_symmetric(&mut jet, &idx, v);
            if !next_nondecreasing(&mut idx, m) {
                break;
            }
        }
    }
    Ok(jet)
}

fn next_nondecreasing(idx: &mut [usize], m: usize) -> bool {
    let n = idx.len();
    let mut k = n;
    while k > 0 {
        k -= 1;
        if idx[k] + 1 < m {
            idx[k] += 1;
            for r in k + 1..n {
                idx[r] = idx[k];
            }
            return true;
        }
    }
    false
}

fn permutations(idx: &[usize]) -> Vec<Vec<usize>> {
    if idx.len() <= 1 {
        return vec![idx.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..idx.len() {
        let mut rest = idx.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

fn assign_symmetric(jet: &mut Jet4, idx: &[usize], v: f64) {
    let m = jet.dim;
    for p in permutations(idx) {
        match p.len() {
            1 => jet.grad[p[0]] = v,
            2 => jet.hess[(p[0], p[1])] = v,
            3 => jet.third[(p[0] * m + p[1]) * m + p[2]] = v,
            4 => jet.fourth[((p[0] * m + p[1]) * m + p[2]) * m + p[3]] = v,
            _ => unreachable!(),
        }
    }
}

/// Minimal pivot of an LDL^T factorization without pivoting; None if a pivot is not positive.
pub fn min_pivot(s: &DMatrix<f64>) -> Option<f64> {
    let chol = s.clone().cholesky()?;
    let l = chol.l();
    Some((0..s.nrows()).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min))
}

pub const PD_REL_TOL: f64 = 1e-10;
pub const NEAR_SINGULAR_PIVOT: f64 = 1e-6;

/// Positive-definiteness test used throughout: smallest pivot > 1e-10 * trace.
pub fn is_strictly_positive(s: &DMatrix<f64>) -> bool {
    let tr = s.trace();
    tr > 0.0 && min_pivot(s).is_some_and(|p| p > PD_REL_TOL * tr)
}

pub fn check_strict_convexity(
    spec: &PotentialSpec,
    poly: &DelzantPolytope,
    grid: &InteriorGrid,
) -> Result<ReportDoc, PotentialError> {
    let mut worst_pivot = f64::INFINITY;
    let mut failure: Option<Witness> = None;
    let mut near_singular: Option<Witness> = None;
    for gp in &grid.points {
        let jet = spec.jet4(poly, &gp.x)?;
        let s = &jet.hess;
        let min_eig = s.clone().symmetric_eigen().eigenvalues.min();
        if !is_strictly_positive(s) {
            if failure.is_none() {
                failure = Some(Witness::new(&gp.x, "hess_min_eigenvalue", min_eig));
            }
            continue;
        }
        let piv = min_pivot(s).unwrap_or(0.0);
        if piv < worst_pivot {
            worst_pivot = piv;
        }
        if piv < NEAR_SINGULAR_PIVOT && near_singular.is_none() {
            near_singular = Some(Witness::new(&gp.x, "hess_min_pivot", piv));
        }
    }
    let mut cond = Condition::new("strict_convexity", failure.is_none())
        .with_tolerance("min_pivot_over_trace", PD_REL_TOL)
        .with_value("min_pivot", if worst_pivot.is_finite() { worst_pivot } else { 0.0 });
    if let Some(w) = failure {
        cond = cond.with_witness(w);
    }
    let mut report = ReportDoc::new("strict_convexity");
    report.push(cond);
    if let Some(w) = near_singular {
        report.warn(format!(
            "near-singular Hessian: pivot {:.3e} below {NEAR_SINGULAR_PIVOT:e} at {:?}",
            w.value, w.point
        ));
    }
    report.set_info("points", grid.len() as f64);
    Ok(report)
}
