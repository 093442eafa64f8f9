//! Delzant polytopes given by half-spaces L_j(x) = <nu_j, x> + lambda_j >= 0.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

/// Absolute tolerance on L-values for derived geometry (vertices, faces).
pub const GEOM_TOL: f64 = 1e-9;
/// Largest number of half-spaces accepted.
pub const MAX_FACETS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolytopeError {
    #[error("{normals} normals but {offsets} offsets")]
    LengthMismatch { normals: usize, offsets: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("normal {index} has {got} components, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("normal {0} is the zero vector")]
    ZeroNormal(usize),
    #[error("offset {0} is not finite")]
    NonFiniteOffset(usize),
    #[error("need at least {need} half-spaces, got {got}")]
    TooFewHalfspaces { need: usize, got: usize },
    #[error("at most {MAX_FACETS} half-spaces are supported, got {0}")]
    TooManyHalfspaces(usize),
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope has empty interior")]
    EmptyInterior,
    #[error("half-space {0} is redundant (its facet is not of codimension one)")]
    RedundantHalfspace(usize),
    #[error("vertex {vertex:?} is not simple: {active} facets meet there")]
    NonSimpleVertex { vertex: Vec<f64>, active: usize },
    #[error("normals at vertex {vertex:?} have determinant {determinant}, expected +-1")]
    NotDelzant { vertex: Vec<f64>, determinant: i128 },
    #[error("face {0:?} is not a face of the polytope")]
    UnknownFace(Vec<usize>),
    #[error("point {point:?} is not in the relative interior of face {face:?}")]
    PointNotOnFaceInterior { face: Vec<usize>, point: Vec<f64> },
    #[error("no unimodular normal selection for face {0:?}")]
    NoVertexSelection(Vec<usize>),
    #[error("point {0:?} is not interior")]
    NotInterior(Vec<f64>),
    #[error("facet index {0} out of range")]
    FacetOutOfRange(usize),
    #[error("orthogonal foot {foot:?} of the start point is not in the interior of facet {facet}")]
    FootNotOnFacet { facet: usize, foot: Vec<f64> },
    #[error("no grid point has all L_j >= {epsilon}")]
    EmptyGrid { epsilon: f64 },
    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vertex {
    pub point: Vec<f64>,
    /// Sorted indices of the half-spaces vanishing at the vertex.
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Face {
    /// Sorted indices j with L_j = 0 on the face. Empty for the polytope itself.
    pub facets: Vec<usize>,
    /// Indices into the vertex list.
    pub vertices: Vec<usize>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelzantPolytope {
    m: usize,
    normals: Vec<Vec<i64>>,
    offsets: Vec<f64>,
    nmat: DMatrix<f64>,
    vertices: Vec<Vertex>,
    faces: Vec<Face>,
}

fn int_det(rows: &[Vec<i64>]) -> i128 {
    // Bareiss fraction-free elimination.
    let n = rows.len();
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Affine dimension of a point set.
fn affine_dim(points: &[&[f64]]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let m = points[0].len();
    let diffs = DMatrix::from_fn(points.len() - 1, m, |i, k| points[i + 1][k] - points[0][k]);
    diffs.rank(1e-9)
}

impl DelzantPolytope {
    pub fn new(normals: Vec<Vec<i64>>, offsets: Vec<f64>) -> Result<Self, PolytopeError> {
        if normals.len() != offsets.len() {
            return Err(PolytopeError::LengthMismatch {
                normals: normals.len(),
                offsets: offsets.len(),
            });
        }
        let m = normals.first().map(|n| n.len()).unwrap_or(0);
        if m == 0 {
            return Err(PolytopeError::ZeroDimension);
        }
        for (j, n) in normals.iter().enumerate() {
            if n.len() != m {
                return Err(PolytopeError::DimensionMismatch { index: j, expected: m, got: n.len() });
            }
            if n.iter().all(|&v| v == 0) {
                return Err(PolytopeError::ZeroNormal(j));
            }
            if !offsets[j].is_finite() {
                return Err(PolytopeError::NonFiniteOffset(j));
            }
        }
        let d = normals.len();
        if d < m + 1 {
            return Err(PolytopeError::TooFewHalfspaces { need: m + 1, got: d });
        }
        if d > MAX_FACETS {
            return Err(PolytopeError::TooManyHalfspaces(d));
        }
        let nmat = DMatrix::from_fn(d, m, |j, k| normals[j][k] as f64);

        if nmat.rank(1e-12) < m || has_recession_ray(&nmat) {
            return Err(PolytopeError::Unbounded);
        }

        // Vertices from all m-subsets of hyperplanes.
        let mut vertices: Vec<Vertex> = Vec::new();
        for subset in combinations(d, m) {
            let a = DMatrix::from_fn(m, m, |i, k| nmat[(subset[i], k)]);
            let rhs = DVector::from_fn(m, |i, _| -offsets[subset[i]]);
            let Some(x) = a.clone().lu().solve(&rhs) else { continue };
            if a.determinant().abs() < 1e-12 {
                continue;
            }
            let l = &nmat * &x + DVector::from_column_slice(&offsets);
            if l.iter().any(|&v| v < -GEOM_TOL) {
                continue;
            }
            let point: Vec<f64> = x.iter().copied().collect();
            if vertices.iter().any(|v| dist_inf(&v.point, &point) < 1e-8) {
                continue;
            }
            let active: Vec<usize> = (0..d).filter(|&j| l[j].abs() <= GEOM_TOL).collect();
            vertices.push(Vertex { point, active });
        }
        if vertices.is_empty() {
            return Err(PolytopeError::EmptyInterior);
        }
        let centroid = mean_point(vertices.iter().map(|v| v.point.as_slice()), m);
        let lc = &nmat * DVector::from_column_slice(&centroid) + DVector::from_column_slice(&offsets);
        if lc.iter().cloned().fold(f64::INFINITY, f64::min) <= GEOM_TOL {
            return Err(PolytopeError::EmptyInterior);
        }
        vertices.sort_by(|a, b| {
            a.point
                .iter()
                .zip(&b.point)
                .map(|(x, y)| x.partial_cmp(y).unwrap())
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });

        for j in 0..d {
            let pts: Vec<&[f64]> = vertices
                .iter()
                .filter(|v| v.active.contains(&j))
                .map(|v| v.point.as_slice())
                .collect();
            if pts.is_empty() || affine_dim(&pts) + 1 < m {
                return Err(PolytopeError::RedundantHalfspace(j));
            }
        }
        for v in &vertices {
            if v.active.len() != m {
                return Err(PolytopeError::NonSimpleVertex { vertex: v.point.clone(), active: v.active.len() });
            }
            let rows: Vec<Vec<i64>> = v.active.iter().map(|&j| normals[j].clone()).collect();
            let det = int_det(&rows);
            if det.abs() != 1 {
                return Err(PolytopeError::NotDelzant { vertex: v.point.clone(), determinant: det });
            }
        }

        // Faces of a simple polytope: every subset of a vertex's active set.
        let mut keys: Vec<Vec<usize>> = Vec::new();
        for v in &vertices {
            for k in 0..=m {
                for sub in combinations(m, k) {
                    let set: Vec<usize> = sub.iter().map(|&i| v.active[i]).collect();
                    if !keys.contains(&set) {
                        keys.push(set);
                    }
                }
            }
        }
        keys.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        let faces = keys
            .into_iter()
            .map(|facets| {
                let verts: Vec<usize> = (0..vertices.len())
                    .filter(|&i| facets.iter().all(|j| vertices[i].active.contains(j)))
                    .collect();
                Face { dim: m - facets.len(), facets, vertices: verts }
            })
            .collect();

        Ok(Self { m, normals, offsets, nmat, vertices, faces })
    }

    pub fn dim(&self) -> usize {
        self.m
    }
    pub fn n_facets(&self) -> usize {
        self.normals.len()
    }
    pub fn normals(&self) -> &[Vec<i64>] {
        &self.normals
    }
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }
    /// Normals as the rows of a real d x m matrix.
    pub fn normal_matrix(&self) -> &DMatrix<f64> {
        &self.nmat
    }
    pub fn normal(&self, j: usize) -> DVector<f64> {
        self.nmat.row(j).transpose()
    }
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }
    /// All faces including the polytope itself (empty index set), ordered by codimension.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }
    pub fn face(&self, facets: &[usize]) -> Option<&Face> {
        let mut key = facets.to_vec();
        key.sort_unstable();
        self.faces.iter().find(|f| f.facets == key)
    }

    pub fn eval_l(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_facets())
            .map(|j| {
                self.offsets[j] + self.normals[j].iter().zip(x).map(|(&n, &xi)| n as f64 * xi).sum::<f64>()
            })
            .collect()
    }

    pub fn min_l(&self, x: &[f64]) -> f64 {
        self.eval_l(x).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance to the boundary (negative outside).
    pub fn dist_to_boundary(&self, x: &[f64]) -> f64 {
        self.eval_l(x)
            .iter()
            .enumerate()
            .map(|(j, l)| l / self.normal(j).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_interior(&self, x: &[f64]) -> bool {
        x.len() == self.m && self.min_l(x) > 0.0
    }

    /// Average of the vertices; always an interior point.
    pub fn centroid(&self) -> Vec<f64> {
        mean_point(self.vertices.iter().map(|v| v.point.as_slice()), self.m)
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.m];
        let mut hi = vec![f64::NEG_INFINITY; self.m];
        for v in &self.vertices {
            for k in 0..self.m {
                lo[k] = lo[k].min(v.point[k]);
                hi[k] = hi[k].max(v.point[k]);
            }
        }
        (lo, hi)
    }

    pub fn face_centroid(&self, face: &Face) -> Vec<f64> {
        mean_point(face.vertices.iter().map(|&i| self.vertices[i].point.as_slice()), self.m)
    }

    /// True when x lies on the face and off every other facet.
    pub fn in_face_interior(&self, facets: &[usize], x: &[f64]) -> bool {
        let l = self.eval_l(x);
        let scale = 1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        l.iter().enumerate().all(|(j, &v)| {
            if facets.contains(&j) {
                v.abs() <= 1e-9 * scale
            } else {
                v > 1e-9 * scale
            }
        })
    }

    /// `count` distinct-ish points of the relative interior of facet j.
    pub fn facet_base_points(&self, j: usize, count: usize) -> Result<Vec<Vec<f64>>, PolytopeError> {
        let face = self.face(&[j]).ok_or(PolytopeError::FacetOutOfRange(j))?;
        let c = self.face_centroid(face);
        let nv = face.vertices.len();
        let mut out = vec![c.clone()];
        for k in 0..count.saturating_sub(1) {
            let v = &self.vertices[face.vertices[k % nv]].point;
            let r = if k < nv { 0.6 } else { 0.3 };
            out.push(c.iter().zip(v).map(|(ci, vi)| ci + r * (vi - ci)).collect());
        }
        Ok(out)
    }

    /// Interior start point above y in F_j along the normal, with all other L_k kept comparable to L_k(y).
    pub fn normal_offset_point(&self, j: usize, y: &[f64]) -> Vec<f64> {
        let nu = self.normal(j);
        let nn = nu.norm_squared();
        let c = self.centroid();
        let mut delta = self.eval_l(&c)[j] / nn;
        let ly = self.eval_l(y);
        for i in 0..self.n_facets() {
            if i == j {
                continue;
            }
            let dot = self.normal(i).dot(&nu);
            if dot < 0.0 {
                delta = delta.min(0.5 * ly[i] / -dot);
            }
        }
        y.iter().enumerate().map(|(k, yk)| yk + delta * nu[k]).collect()
    }

    /// Points x_k = y + 2^-k (x_in - y), k = 1..n, with y the orthogonal foot of x_in on facet j.
    pub fn facet_path(&self, j: usize, x_in: &[f64], n_steps: usize) -> Result<Vec<Vec<f64>>, PolytopeError> {
        if j >= self.n_facets() {
            return Err(PolytopeError::FacetOutOfRange(j));
        }
        if !self.is_interior(x_in) {
            return Err(PolytopeError::NotInterior(x_in.to_vec()));
        }
        let nu = self.normal(j);
        let lj = self.eval_l(x_in)[j];
        let nn = nu.norm_squared();
        let foot: Vec<f64> = x_in.iter().enumerate().map(|(k, x)| x - lj * nu[k] / nn).collect();
        if !self.in_face_interior(&[j], &foot) {
            return Err(PolytopeError::FootNotOnFacet { facet: j, foot });
        }
        Ok(geometric_path(&foot, x_in, n_steps))
    }

    /// Points y + 2^-k (centroid - y), k = 1..n, approaching a boundary point y.
    pub fn approach_path(&self, y: &[f64], n_steps: usize) -> Vec<Vec<f64>> {
        geometric_path(y, &self.centroid(), n_steps)
    }

    pub fn adapted_chart(&self, face: &[usize], x0: &[f64]) -> Result<AffineChart, PolytopeError> {
        let mut key = face.to_vec();
        key.sort_unstable();
        let f = self.face(&key).ok_or_else(|| PolytopeError::UnknownFace(key.clone()))?;
        if !self.in_face_interior(&key, x0) {
            return Err(PolytopeError::PointNotOnFaceInterior { face: key, point: x0.to_vec() });
        }
        let mut best: Option<Vec<usize>> = None;
        for &vi in &f.vertices {
            let mut sel = key.clone();
            let mut rest: Vec<usize> =
                self.vertices[vi].active.iter().copied().filter(|j| !key.contains(j)).collect();
            rest.sort_unstable();
            sel.extend(rest);
            let rows: Vec<Vec<i64>> = sel.iter().map(|&j| self.normals[j].clone()).collect();
            if sel.len() != self.m || int_det(&rows).abs() != 1 {
                continue;
            }
            if best.as_ref().is_none_or(|b| sel < *b) {
                best = Some(sel);
            }
        }
        let selection = best.ok_or(PolytopeError::NoVertexSelection(key.clone()))?;
        let nsel = DMatrix::from_fn(self.m, self.m, |i, k| self.normals[selection[i]][k] as f64);
        let inverse = nsel.clone().try_inverse().ok_or(PolytopeError::NoVertexSelection(key.clone()))?;
        Ok(AffineChart { face: key, x0: x0.to_vec(), selection, nsel, inverse })
    }

    pub fn sample_interior(&self, resolution: usize, epsilon: f64) -> Result<InteriorGrid, PolytopeError> {
        if resolution == 0 {
            return Err(PolytopeError::InvalidGrid("resolution must be positive".into()));
        }
        if !(epsilon > 0.0) {
            return Err(PolytopeError::InvalidGrid("epsilon must be positive".into()));
        }
        let (lo, hi) = self.bounding_box();
        let m = self.m;
        let total = resolution.checked_pow(m as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| {
            PolytopeError::InvalidGrid(format!("resolution {resolution} too large in dimension {m}"))
        })?;
        let mut points = Vec::new();
        let mut idx = vec![0usize; m];
        for _ in 0..total {
            let x: Vec<f64> = (0..m)
                .map(|k| lo[k] + (idx[k] as f64 + 0.5) * (hi[k] - lo[k]) / resolution as f64)
                .collect();
            let l = self.eval_l(&x);
            if l.iter().all(|&v| v >= epsilon) {
                points.push(GridPoint { index: idx.clone(), x, l_values: l });
            }
            for k in (0..m).rev() {
                idx[k] += 1;
                if idx[k] < resolution {
                    break;
                }
                idx[k] = 0;
            }
        }
        if points.is_empty() {
            return Err(PolytopeError::EmptyGrid { epsilon });
        }
        Ok(InteriorGrid { resolution, epsilon, lo, hi, points })
    }
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

fn mean_point<'a>(pts: impl Iterator<Item = &'a [f64]>, m: usize) -> Vec<f64> {
    let mut sum = vec![0.0; m];
    let mut n = 0usize;
    for p in pts {
        for k in 0..m {
            sum[k] += p[k];
        }
        n += 1;
    }
    sum.iter().map(|s| s / n.max(1) as f64).collect()
}

/// Points y + 2^-k (x - y), k = 1..n.
pub fn geometric_path(y: &[f64], x: &[f64], n: usize) -> Vec<Vec<f64>> {
    (1..=n)
        .map(|k| {
            let s = 0.5f64.powi(k as i32);
            y.iter().zip(x).map(|(yi, xi)| yi + s * (xi - yi)).collect()
        })
        .collect()
}

/// A nonzero r with N r >= 0 exists iff the (full-rank) polytope is unbounded.
/// Such an r can be taken as an extreme ray of the cone, i.e. the kernel of m-1 rows.
fn has_recession_ray(nmat: &DMatrix<f64>) -> bool {
    let (d, m) = nmat.shape();
    let tol = 1e-12;
    let candidates: Vec<DVector<f64>> = if m == 1 {
        vec![DVector::from_element(1, 1.0)]
    } else {
        combinations(d, m - 1)
            .into_iter()
            .filter_map(|rows| {
                // Generalized cross product: the cofactor vector spans the kernel of a full-rank (m-1) x m block.
                let r = DVector::from_fn(m, |k, _| {
                    let minor = DMatrix::from_fn(m - 1, m - 1, |i, c| nmat[(rows[i], if c < k { c } else { c + 1 })]);
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * minor.determinant()
                });
                if r.norm() < 1e-10 {
                    return None;
                }
                Some(r)
            })
            .collect()
    };
    candidates.iter().any(|r| {
        let nr = nmat * r;
        nr.iter().all(|&v| v >= -tol) || nr.iter().all(|&v| v <= tol)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineChart {
    pub face: Vec<usize>,
    pub x0: Vec<f64>,
    /// Face indices first, then the remaining normals at a vertex; lexicographically smallest valid choice.
    pub selection: Vec<usize>,
    nsel: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl AffineChart {
    pub fn to_chart(&self, x: &[f64]) -> Vec<f64> {
        let dx = DVector::from_fn(x.len(), |k, _| x[k] - self.x0[k]);
        (&self.nsel * dx).iter().copied().collect()
    }
    pub fn from_chart(&self, y: &[f64]) -> Vec<f64> {
        let yv = DVector::from_column_slice(y);
        let dx = &self.inverse * yv;
        dx.iter().zip(&self.x0).map(|(d, x)| d + x).collect()
    }
    /// Rows are the selected normals: dy = N dx.
    pub fn linear_part(&self) -> &DMatrix<f64> {
        &self.nsel
    }
    /// d/dy^i = sum_k (N^-1)_{ki} d/dx_k.
    pub fn inverse_linear_part(&self) -> &DMatrix<f64> {
        &self.inverse
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    /// Lattice index on the full resolution^m grid.
    pub index: Vec<usize>,
    pub x: Vec<f64>,
    pub l_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorGrid {
    pub resolution: usize,
    pub epsilon: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Retained points, last coordinate varying fastest.
    pub points: Vec<GridPoint>,
}

impl InteriorGrid {
    /// A grid made of explicit points (no lattice structure; indices are positions).
    pub fn from_points(p: &DelzantPolytope, xs: Vec<Vec<f64>>) -> Result<Self, PolytopeError> {
        let mut points = Vec::new();
        let mut eps = f64::INFINITY;
        for (i, x) in xs.into_iter().enumerate() {
            if !p.is_interior(&x) {
                return Err(PolytopeError::NotInterior(x));
            }
            let l = p.eval_l(&x);
            eps = eps.min(l.iter().cloned().fold(f64::INFINITY, f64::min));
            points.push(GridPoint { index: vec![i], x, l_values: l });
        }
        if points.is_empty() {
            return Err(PolytopeError::EmptyGrid { epsilon: 0.0 });
        }
        let (lo, hi) = p.bounding_box();
        Ok(Self { resolution: points.len(), epsilon: eps, lo, hi, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Standard fixtures.
pub mod fixtures {
    use super::DelzantPolytope;

    pub fn interval(a: f64) -> DelzantPolytope {
        DelzantPolytope::new(vec![vec![1], vec![-1]], vec![0.0, a]).expect("interval")
    }
    pub fn simplex() -> DelzantPolytope {
        DelzantPolytope::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![0.0, 0.0, 1.0]).expect("simplex")
    }
    pub fn rectangle(a: f64, b: f64) -> DelzantPolytope {
        DelzantPolytope::new(vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]], vec![0.0, 0.0, a, b])
            .expect("rectangle")
    }
    pub fn square() -> DelzantPolytope {
        rectangle(1.0, 1.0)
    }
    /// Facets x1 >= 0, x2 >= 0, x2 <= 1, x1 + k x2 <= 2 (for k = 1 as in the usual picture).
    pub fn hirzebruch(k: i64) -> DelzantPolytope {
        let b = 1.0 + k as f64;
        DelzantPolytope::new(vec![vec![1, 0], vec![0, 1], vec![0, -1], vec![-1, -k]], vec![0.0, 0.0, 1.0, b])
            .expect("hirzebruch")
    }
    pub fn cube() -> DelzantPolytope {
        DelzantPolytope::new(
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]],
            vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        )
        .expect("cube")
    }
    pub fn simplex3() -> DelzantPolytope {
        DelzantPolytope::new(
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, -1, -1]],
            vec![0.0, 0.0, 0.0, 1.0],
        )
        .expect("simplex3")
    }
    /// Name lookup used by the CLI and the web demo.
    pub fn by_name(name: &str) -> Option<DelzantPolytope> {
        Some(match name {
            "interval" => interval(1.0),
            "simplex" => simplex(),
            "square" => square(),
            "hirzebruch" => hirzebruch(1),
            "hirzebruch2" => hirzebruch(2),
            "cube" => cube(),
            "simplex3" => simplex3(),
            _ => return None,
        })
    }
}
