//! Scalar fields on interior grids and their CSV / JSON / PGM encodings.

use serde::Serialize;
use thiserror::Error;

use crate::polytope::InteriorGrid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("format {format} is not available in dimension {dim}")]
    UnsupportedFormatForDim { format: &'static str, dim: usize },
    #[error("field has no points")]
    Empty,
    #[error("field is not sampled on a lattice grid")]
    NotALattice,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldFormat {
    Csv,
    Json,
    Pgm,
}

impl FieldFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            "pgm" => Some(Self::Pgm),
            _ => None,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Pgm => "pgm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMeta {
    pub dim: usize,
    pub resolution: usize,
    pub epsilon: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub indices: Vec<Vec<usize>>,
}

/// One or more named columns sampled on the same grid; the first column is the primary value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarField {
    pub grid: GridMeta,
    pub columns: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ScalarField {
    pub fn sample<E>(
        grid: &InteriorGrid,
        columns: &[&str],
        mut f: impl FnMut(&[f64]) -> Result<Vec<f64>, E>,
    ) -> Result<Self, E> {
        let mut values = vec![Vec::with_capacity(grid.len()); columns.len()];
        for gp in &grid.points {
            let row = f(&gp.x)?;
            for (c, v) in values.iter_mut().zip(row) {
                c.push(v);
            }
        }
        Ok(Self {
            grid: GridMeta {
                dim: grid.lo.len(),
                resolution: grid.resolution,
                epsilon: grid.epsilon,
                lo: grid.lo.clone(),
                hi: grid.hi.clone(),
                points: grid.points.iter().map(|p| p.x.clone()).collect(),
                indices: grid.points.iter().map(|p| p.index.clone()).collect(),
            },
            columns: columns.iter().map(|s| s.to_string()).collect(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.grid.points.is_empty()
    }
    pub fn primary(&self) -> &[f64] {
        &self.values[0]
    }

    pub fn emit(&self, format: FieldFormat) -> Result<Vec<u8>, FieldError> {
        if self.is_empty() {
            return Err(FieldError::Empty);
        }
        Ok(match format {
            FieldFormat::Csv => self.to_csv().into_bytes(),
            FieldFormat::Json => self.to_json().into_bytes(),
            FieldFormat::Pgm => self.to_pgm()?,
        })
    }

    /// Header mu1..mum then the columns; 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<String> = (1..=self.grid.dim).map(|k| format!("mu{k}")).chain(self.columns.iter().cloned()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for (r, x) in self.grid.points.iter().enumerate() {
            let cells: Vec<String> =
                x.iter().copied().chain(self.values.iter().map(|c| c[r])).map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            grid: &'a GridMeta,
            values: &'a [f64],
            columns: std::collections::BTreeMap<&'a str, &'a [f64]>,
        }
        let columns = self.columns.iter().zip(&self.values).map(|(k, v)| (k.as_str(), v.as_slice())).collect();
        let doc = Doc { grid: &self.grid, values: self.primary(), columns };
        let mut s = serde_json::to_string_pretty(&doc).expect("field serializes");
        s.push('\n');
        s
    }

    /// Binary P5, width = height = resolution, first axis left to right, second axis bottom to top.
    /// Values map linearly onto 1..=255; pixels outside the polytope are 0.
    pub fn to_pgm(&self) -> Result<Vec<u8>, FieldError> {
        if self.grid.dim != 2 {
            return Err(FieldError::UnsupportedFormatForDim { format: "pgm", dim: self.grid.dim });
        }
        if self.grid.indices.iter().any(|i| i.len() != 2) {
            return Err(FieldError::NotALattice);
        }
        let n = self.grid.resolution;
        let vals = self.primary();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut pix = vec![0u8; n * n];
        for (idx, &v) in self.grid.indices.iter().zip(vals) {
            let level = if hi > lo && v.is_finite() { 1.0 + 254.0 * (v - lo) / (hi - lo) } else { 255.0 };
            let row = n - 1 - idx[1];
            pix[row * n + idx[0]] = level.round().clamp(1.0, 255.0) as u8;
        }
        let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
        out.extend(pix);
        Ok(out)
    }
}

/// (point, column values).
pub type CsvRow = (Vec<f64>, Vec<f64>);

/// Rows of a CSV file written by `to_csv`.
pub fn parse_csv(text: &str, dim: usize) -> Result<Vec<CsvRow>, FieldError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(FieldError::Parse { line: 1, message: "missing header".into() })?;
    let ncols = header.split(',').count();
    if ncols <= dim {
        return Err(FieldError::Parse { line: 1, message: "too few columns".into() });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Result<Vec<f64>, _> = line.split(',').map(|c| c.parse::<f64>()).collect();
        let cells = cells.map_err(|e| FieldError::Parse { line: i + 2, message: e.to_string() })?;
        if cells.len() != ncols {
            return Err(FieldError::Parse { line: i + 2, message: format!("{} cells, expected {ncols}", cells.len()) });
        }
        rows.push((cells[..dim].to_vec(), cells[dim..].to_vec()));
    }
    Ok(rows)
}
