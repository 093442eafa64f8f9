//! Browser bindings: a heatmap of curvature quantities, the angle function along a facet
//! approach, and the affine extremality fit. Every entry point returns a JSON string.

use serde_json::{json, Value};
use torickgk_core::curvature::{dim4_chain, extremal_fit};
use torickgk_core::expr::parse;
use torickgk_core::gk::c2;
use torickgk_core::polytope::fixtures;
use torickgk_core::{DelzantPolytope, GKStructure, PotentialSpec};
use wasm_bindgen::prelude::*;

/// Polytopes of dimension two offered by the page.
pub const PRESETS: [&str; 4] = ["square", "simplex", "hirzebruch", "hirzebruch2"];

fn polytope(preset: &str) -> Result<DelzantPolytope, String> {
    if !PRESETS.contains(&preset) {
        return Err(format!("unknown preset '{preset}'"));
    }
    fixtures::by_name(preset).ok_or_else(|| format!("unknown preset '{preset}'"))
}

fn structure(preset: &str, c: f64) -> Result<GKStructure, String> {
    if !c.is_finite() {
        return Err("c must be finite".into());
    }
    GKStructure::guillemin(polytope(preset)?, c2(c)).map_err(|e| e.to_string())
}

/// Values of `quantity` (u_gk, u_j, s_g or p) on a resolution x resolution lattice; cells outside
/// the polytope are null. Rows run along mu1, row index 0 at the smallest mu2.
pub fn heatmap_json(preset: &str, c: f64, quantity: &str, resolution: usize) -> Result<String, String> {
    if !(2..=128).contains(&resolution) {
        return Err("resolution must be between 2 and 128".into());
    }
    let g = structure(preset, c)?;
    let grid = g.polytope().sample_interior(resolution, 1e-3).map_err(|e| e.to_string())?;
    let mut cells = vec![vec![Value::Null; resolution]; resolution];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for gp in &grid.points {
        let d = dim4_chain(&g, &gp.x).map_err(|e| e.to_string())?;
        let v = match quantity {
            "u_gk" => d.u_gk,
            "u_j" => d.u_j,
            "s_g" => d.s_g,
            "p" => d.p,
            other => return Err(format!("unknown quantity '{other}'")),
        };
        lo = lo.min(v);
        hi = hi.max(v);
        cells[gp.index[1]][gp.index[0]] = json!(v);
    }
    Ok(json!({"resolution": resolution, "lo": grid.lo, "hi": grid.hi, "min": lo, "max": hi, "cells": cells}).to_string())
}

/// The angle function along a path approaching the middle of `facet` from inside,
/// with the affine distance L to the facet at each step.
pub fn facet_profile_json(preset: &str, c: f64, facet: usize, steps: usize) -> Result<String, String> {
    let g = structure(preset, c)?;
    let p = g.polytope();
    if facet >= p.n_facets() {
        return Err(format!("facet {facet} out of range (polytope has {})", p.n_facets()));
    }
    if !(2..=40).contains(&steps) {
        return Err("steps must be between 2 and 40".into());
    }
    let base = p.facet_base_points(facet, 1).map_err(|e| e.to_string())?.remove(0);
    let start = p.normal_offset_point(facet, &base);
    let path = p.facet_path(facet, &start, steps).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(steps);
    for x in &path {
        let f = g.frame_at(x).map_err(|e| e.to_string())?;
        rows.push(json!({"L": p.eval_l(x)[facet], "p": f.p, "x": x}));
    }
    Ok(json!({"facet": facet, "target": base, "normal": p.normals()[facet], "profile": rows}).to_string())
}

/// Affine fit of u_GK for Guillemin + eps * mu1^2 mu2^2.
pub fn extremal_json(preset: &str, c: f64, eps: f64) -> Result<String, String> {
    let base = structure(preset, c)?;
    let pot = if eps == 0.0 {
        PotentialSpec::Guillemin
    } else {
        let src = format!("{eps:e}*mu1^2*mu2^2");
        PotentialSpec::Sum(vec![PotentialSpec::Guillemin, PotentialSpec::Expression(parse(&src, 2).map_err(|e| e.to_string())?)])
    };
    let g = GKStructure::new(base.polytope().clone(), pot, c2(c)).map_err(|e| e.to_string())?;
    let grid = g.polytope().sample_interior(16, 1e-3).map_err(|e| e.to_string())?;
    let fit = extremal_fit(&g, &grid).map_err(|e| e.to_string())?;
    serde_json::to_string(&fit).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn presets() -> String {
    json!(PRESETS).to_string()
}

#[wasm_bindgen]
pub fn heatmap(preset: &str, c: f64, quantity: &str, resolution: u32) -> Result<String, JsError> {
    heatmap_json(preset, c, quantity, resolution as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn facet_profile(preset: &str, c: f64, facet: u32, steps: u32) -> Result<String, JsError> {
    facet_profile_json(preset, c, facet as usize, steps as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn extremal(preset: &str, c: f64, eps: f64) -> Result<String, JsError> {
    extremal_json(preset, c, eps).map_err(|e| JsError::new(&e))
}
