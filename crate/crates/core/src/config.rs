//! Run configuration (JSON, `"schema": 1`). Unknown keys are rejected and every error names
//! the offending path.

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use thiserror::Error;

use crate::compactify::Tolerances;
use crate::expr;
use crate::gk::GKStructure;
use crate::polytope::{fixtures, DelzantPolytope, InteriorGrid};
use crate::potential::{Polynomial, PotentialSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config error at {path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn at(path: impl Into<String>, message: impl ToString) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub polytope: PolytopeConfig,
    pub potential: PotentialConfig,
    #[serde(rename = "C", default)]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub suite: SuiteConfig,
    #[serde(default)]
    pub compactify: CompactifyConfig,
    #[serde(default)]
    pub deform: DeformConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PolytopeConfig {
    Preset {
        preset: String,
    },
    Halfspaces {
        normals: Vec<Vec<i64>>,
        offsets: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    /// Empty struct variant so that stray keys are rejected.
    Guillemin {},
    Quadratic {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        l: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
    Expression {
        src: String,
    },
    Polynomial {
        src: String,
    },
    Sum {
        terms: Vec<PotentialConfig>,
    },
    Scaled {
        factor: f64,
        term: Box<PotentialConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub resolution: usize,
    pub epsilon: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { resolution: 16, epsilon: 1e-3 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub cauchy: Option<f64>,
    pub deriv: Option<f64>,
    pub det_floor: Option<f64>,
    pub zero: Option<f64>,
    pub slope: Option<f64>,
    pub pd_floor: Option<f64>,
    pub angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Extra values of c for the dimension-four suite (the config's own C is always included).
    #[serde(default)]
    pub c_values: Vec<f64>,
}

fn default_points() -> usize {
    200
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { points: default_points(), c_values: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactifyConfig {
    #[serde(default = "default_probes")]
    pub probes_per_facet: usize,
}

fn default_probes() -> usize {
    crate::compactify::PROBES_PER_FACET
}

impl Default for CompactifyConfig {
    fn default() -> Self {
        Self { probes_per_facet: default_probes() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformConfig {
    #[serde(default = "default_t_list")]
    pub t_list: Vec<f64>,
}

fn default_t_list() -> Vec<f64> {
    vec![-10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0]
}

impl Default for DeformConfig {
    fn default() -> Self {
        Self { t_list: default_t_list() }
    }
}

/// Validated, typed configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub structure: GKStructure,
    pub grid: InteriorGrid,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub suite: SuiteConfig,
    pub probes_per_facet: usize,
    pub t_list: Vec<f64>,
    pub output: Option<OutputConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::at(if path == "." { "<root>".to_string() } else { path }, e.into_inner())
        })?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(ConfigError::at("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::at(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn polytope(&self) -> Result<DelzantPolytope, ConfigError> {
        match &self.polytope {
            PolytopeConfig::Preset { preset } => {
                fixtures::by_name(preset).ok_or_else(|| ConfigError::at("polytope.preset", format!("unknown preset '{preset}'")))
            }
            PolytopeConfig::Halfspaces { normals, offsets } => {
                DelzantPolytope::new(normals.clone(), offsets.clone()).map_err(|e| ConfigError::at("polytope", e))
            }
        }
    }

    pub fn validate(&self, tol_scale: f64) -> Result<Validated, ConfigError> {
        let poly = self.polytope()?;
        let m = poly.dim();
        let potential = build_potential(&self.potential, m, "potential")?;
        let c = match &self.c {
            None => DMatrix::zeros(m, m),
            Some(rows) => {
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(ConfigError::at("C", format!("expected a {m}x{m} matrix")));
                }
                DMatrix::from_fn(m, m, |i, j| rows[i][j])
            }
        };
        let structure = GKStructure::new(poly.clone(), potential, c).map_err(|e| ConfigError::at("C", e))?;
        if self.grid.resolution == 0 || self.grid.resolution > 4096 {
            return Err(ConfigError::at("grid.resolution", "must be between 1 and 4096"));
        }
        if !(self.grid.epsilon > 0.0) {
            return Err(ConfigError::at("grid.epsilon", "must be positive"));
        }
        let grid = poly.sample_interior(self.grid.resolution, self.grid.epsilon).map_err(|e| ConfigError::at("grid", e))?;
        let mut tol = Tolerances::default();
        let t = &self.tolerances;
        for (name, src, dst) in [
            ("cauchy", t.cauchy, &mut tol.cauchy),
            ("deriv", t.deriv, &mut tol.deriv),
            ("det_floor", t.det_floor, &mut tol.det_floor),
            ("zero", t.zero, &mut tol.zero),
            ("slope", t.slope, &mut tol.slope),
            ("pd_floor", t.pd_floor, &mut tol.pd_floor),
            ("angle", t.angle, &mut tol.angle),
        ] {
            if let Some(v) = src {
                if !(v > 0.0) {
                    return Err(ConfigError::at(format!("tolerances.{name}"), "must be positive"));
                }
                *dst = v;
            }
        }
        if !(tol_scale > 0.0) || !tol_scale.is_finite() {
            return Err(ConfigError::at("--tol-scale", "must be positive"));
        }
        if self.compactify.probes_per_facet == 0 {
            return Err(ConfigError::at("compactify.probes_per_facet", "must be positive"));
        }
        if self.suite.points == 0 {
            return Err(ConfigError::at("suite.points", "must be positive"));
        }
        if let Some(o) = &self.output {
            if let Some(f) = &o.format {
                if crate::field::FieldFormat::parse(f).is_none() {
                    return Err(ConfigError::at("output.format", format!("unknown format '{f}'")));
                }
            }
        }
        Ok(Validated {
            structure,
            grid,
            tolerances: tol.scaled(tol_scale),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            suite: self.suite.clone(),
            probes_per_facet: self.compactify.probes_per_facet,
            t_list: self.deform.t_list.clone(),
            output: self.output.clone(),
        })
    }
}

pub fn build_potential(p: &PotentialConfig, m: usize, path: &str) -> Result<PotentialSpec, ConfigError> {
    Ok(match p {
        PotentialConfig::Guillemin {} => PotentialSpec::Guillemin,
        PotentialConfig::Quadratic { q, l, constant } => {
            if q.len() != m || q.iter().any(|r| r.len() != m) || l.len() != m {
                return Err(ConfigError::at(format!("{path}.Q"), format!("expected {m}x{m} Q and length-{m} l")));
            }
            let qm = DMatrix::from_fn(m, m, |i, j| q[i][j]);
            let spec = PotentialSpec::quadratic(qm, DVector::from_column_slice(l))
                .map_err(|e| ConfigError::at(format!("{path}.Q"), e))?;
            match spec {
                PotentialSpec::Quadratic { q, l, .. } => PotentialSpec::Quadratic { q, l, constant: *constant },
                other => other,
            }
        }
        PotentialConfig::Expression { src } => {
            PotentialSpec::Expression(expr::parse(src, m).map_err(|e| ConfigError::at(format!("{path}.src"), e))?)
        }
        PotentialConfig::Polynomial { src } => {
            let e = expr::parse(src, m).map_err(|e| ConfigError::at(format!("{path}.src"), e))?;
            PotentialSpec::Polynomial(Polynomial::from_expr(&e, m).map_err(|e| ConfigError::at(format!("{path}.src"), e))?)
        }
        PotentialConfig::Sum { terms } => {
            if terms.is_empty() {
                return Err(ConfigError::at(format!("{path}.terms"), "empty sum"));
            }
            PotentialSpec::Sum(
                terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| build_potential(t, m, &format!("{path}.terms[{i}]")))
                    .collect::<Result<_, _>>()?,
            )
        }
        PotentialConfig::Scaled { factor, term } => {
            if !(factor.is_finite() && *factor > 0.0) {
                return Err(ConfigError::at(format!("{path}.factor"), "must be positive"));
            }
            PotentialSpec::Scaled(*factor, Box::new(build_potential(term, m, &format!("{path}.term"))?))
        }
    })
}
