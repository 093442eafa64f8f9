//! Toric generalized Kähler geometry on Delzant polytopes: symplectic potentials, the
//! generalized scalar curvature, boundary (compactification) checks and deformations.

// Negated comparisons are deliberate: they send NaN down the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Tensor code reads best with explicit index loops.
#![allow(clippy::needless_range_loop)]

pub mod compactify;
pub mod config;
pub mod curvature;
pub mod deform;
pub mod expr;
pub mod extrapolate;
pub mod field;
pub mod gk;
pub mod oracle;
pub mod polytope;
pub mod potential;
pub mod report;
pub mod suite;

pub use config::{ConfigError, RunConfig, Validated};
pub use gk::{GKStructure, PointFrame};
pub use polytope::{fixtures, DelzantPolytope, InteriorGrid};
pub use potential::{Jet4, Polynomial, PotentialSpec};
pub use report::{Condition, ReportDoc, Verdict, Witness};
