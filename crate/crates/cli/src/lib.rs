//! `torickgk` command-line front end. Exit codes: 0 success, 1 verdict failure,
//! 2 usage or configuration error, 3 numerical error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use torickgk_core::compactify::{acgtf_check, angle_boundary_check, check_c1_c2, check_c3, AcgtfWeight};
use torickgk_core::config::ConfigError;
use torickgk_core::curvature::{dim4_chain, extremal_fit_with, u_gk_at};
use torickgk_core::deform::{curvature_drift, p_range, verdict_at, DeformationFamily};
use torickgk_core::field::{FieldFormat, ScalarField};
use torickgk_core::suite::identity_report;
use torickgk_core::{GKStructure, ReportDoc, RunConfig, Validated};

/// Environment variable that redirects written files into another directory.
pub const OUT_DIR_ENV: &str = "TORICKGK_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "torickgk", version, about = "Toric generalized Kähler structures: curvature, identities, compactification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(short = 'c', long = "config")]
    config: PathBuf,
    /// Output file (default: stdout, or output.path from the config for `curvature`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplies every tolerance (floors are divided).
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Pgm,
}

impl Format {
    fn field(self) -> FieldFormat {
        match self {
            Format::Csv => FieldFormat::Csv,
            Format::Json => FieldFormat::Json,
            Format::Pgm => FieldFormat::Pgm,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Reference {
    Guillemin,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate the polytope and list its vertices and faces.
    CheckPolytope(Common),
    /// Sample u_GK (and in dimension four p, u_J, s_g, |theta|^2, Delta p) on the interior grid.
    Curvature(Common),
    /// Run the pointwise and dimension-four identity suites.
    Identities(Common),
    /// Boundary conditions of the configured structure against a reference.
    Compactify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "guillemin")]
        against: Reference,
    },
    /// Sweep the family S + tC.
    Deform {
        #[command(flatten)]
        common: Common,
        /// Comma-separated t values (default: the config's deform.t_list).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t_list: Option<Vec<f64>>,
    },
    /// Affine fit of u_GK over the grid.
    Extremal(Common),
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Config(ConfigError),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage: {s}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numeric(s) => write!(f, "numerical error: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

fn numeric<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Bytes to emit plus whether the verdict passed.
struct Outcome {
    bytes: Vec<u8>,
    pass: bool,
}

impl Outcome {
    fn report(r: &ReportDoc) -> Self {
        let mut s = r.to_json();
        s.push('\n');
        Self { bytes: s.into_bytes(), pass: r.passed() }
    }
    fn json(v: serde_json::Value, pass: bool) -> Self {
        let mut s = serde_json::to_string_pretty(&v).expect("json value");
        s.push('\n');
        Self { bytes: s.into_bytes(), pass }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(pass) => i32::from(!pass),
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let (common, t_list) = match &cli.command {
        Command::CheckPolytope(c) | Command::Curvature(c) | Command::Identities(c) | Command::Extremal(c) => (c, None),
        Command::Compactify { common, .. } => (common, None),
        Command::Deform { common, t_list } => (common, t_list.clone()),
    };
    let cfg = RunConfig::load(&common.config).map_err(CliError::Config)?;
    let v = cfg.validate(common.tol_scale).map_err(CliError::Config)?;
    let outcome = match &cli.command {
        Command::CheckPolytope(c) => check_polytope(c, &cfg, &v)?,
        Command::Curvature(c) => curvature(c, &v)?,
        Command::Identities(c) => identities(c, &v)?,
        Command::Compactify { common, against: Reference::Guillemin } => compactify(common, &v)?,
        Command::Deform { common, .. } => deform(common, &v, t_list)?,
        Command::Extremal(c) => extremal(c, &v)?,
    };
    // The config's output path names a field file, so only `curvature` uses it.
    let cfg_path = match cli.command {
        Command::Curvature(_) => v.output.as_ref().and_then(|o| o.path.as_deref()),
        _ => None,
    };
    write_output(common, cfg_path, &outcome.bytes)?;
    Ok(outcome.pass)
}

/// Appends `other`'s conditions and keeps its info under `section`.
fn merge_section(doc: &mut ReportDoc, section: &str, mut other: ReportDoc) {
    let info = serde_json::to_value(&other.info).expect("info serializes");
    other.info.clear();
    doc.merge("", other);
    doc.set_info(section, info);
}

/// --format, else output.format in the config when the subcommand supports it, else `default`.
fn format(c: &Common, v: &Validated, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
    if let Some(f) = c.format {
        if !allowed.contains(&f) {
            return Err(CliError::Usage(format!("format {f:?} is not available for this subcommand").to_lowercase()));
        }
        return Ok(f);
    }
    let from_cfg = match v.output.as_ref().and_then(|o| o.format.as_deref()) {
        Some("csv") => Some(Format::Csv),
        Some("json") => Some(Format::Json),
        Some("pgm") => Some(Format::Pgm),
        _ => None,
    };
    Ok(from_cfg.filter(|f| allowed.contains(f)).unwrap_or(default))
}

fn write_output(c: &Common, cfg_path: Option<&str>, bytes: &[u8]) -> Result<(), CliError> {
    let path = c.out.clone().or_else(|| cfg_path.map(PathBuf::from));
    let Some(mut path) = path else {
        let mut out = std::io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::Io(e.to_string()));
    };
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        let name = path.file_name().map(|n| n.to_owned()).ok_or_else(|| CliError::Usage("output path has no file name".into()))?;
        path = Path::new(&dir).join(name);
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn check_polytope(c: &Common, cfg: &RunConfig, v: &Validated) -> Result<Outcome, CliError> {
    format(c, v, Format::Json, &[Format::Json])?;
    let p = cfg.polytope().map_err(CliError::Config)?;
    let faces: Vec<_> = p.faces().iter().filter(|f| !f.facets.is_empty()).collect();
    let counts: Vec<usize> = (0..p.dim()).map(|d| faces.iter().filter(|f| f.dim == d).count()).collect();
    let doc = json!({
        "kind": "polytope",
        "verdict": "pass",
        "dim": p.dim(),
        "normals": p.normals(),
        "offsets": p.offsets(),
        "vertices": p.vertices(),
        "face_counts_by_dim": counts,
        "centroid": p.centroid(),
        "delzant": true,
    });
    Ok(Outcome::json(doc, true))
}

fn curvature(c: &Common, v: &Validated) -> Result<Outcome, CliError> {
    let f = format(c, v, Format::Csv, &[Format::Csv, Format::Json, Format::Pgm])?;
    let g = &v.structure;
    let field = if g.dim() == 2 {
        ScalarField::sample(&v.grid, &["u_gk", "p", "u_j", "s_g", "lee2", "lap_p"], |x| {
            dim4_chain(g, x).map(|d| vec![d.u_gk, d.p, d.u_j, d.s_g, d.lee2, d.lap_p])
        })
    } else {
        ScalarField::sample(&v.grid, &["u_gk"], |x| u_gk_at(g, x).map(|u| vec![u]))
    }
    .map_err(numeric)?;
    let bytes = field.emit(f.field()).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Outcome { bytes, pass: true })
}

fn identities(c: &Common, v: &Validated) -> Result<Outcome, CliError> {
    format(c, v, Format::Json, &[Format::Json])?;
    let seed = c.seed.unwrap_or(v.seed);
    let mut r = identity_report(&v.structure, v.suite.points, &v.suite.c_values, seed, c.tol_scale).map_err(numeric)?;
    r.set_info("seed", seed as f64);
    Ok(Outcome::report(&r))
}

fn compactify(c: &Common, v: &Validated) -> Result<Outcome, CliError> {
    format(c, v, Format::Json, &[Format::Json])?;
    let test = &v.structure;
    let reference = GKStructure::kahler(test.polytope().clone(), torickgk_core::PotentialSpec::Guillemin);
    let tol = &v.tolerances;
    let c12 = check_c1_c2(&reference, test, v.probes_per_facet, tol).map_err(numeric)?;
    let mut doc = ReportDoc::new("compactify");
    let c12_pass = c12.passed();
    merge_section(&mut doc, "c1_c2", c12);
    if c12_pass {
        merge_section(&mut doc, "c3", check_c3(&reference, test, v.probes_per_facet, tol).map_err(numeric)?);
    }
    if test.dim() == 2 {
        let mut facet = acgtf_check(test, AcgtfWeight::AngleFactor, v.probes_per_facet, tol).map_err(numeric)?.report;
        for cond in &mut facet.conditions {
            cond.name = format!("facet_criterion.{}", cond.name);
        }
        merge_section(&mut doc, "facet_criterion", facet);
        if test.c().iter().any(|&x| x != 0.0) {
            merge_section(&mut doc, "angle_boundary", angle_boundary_check(test, v.probes_per_facet, tol).map_err(numeric)?);
        }
    }
    doc.note("reference: Guillemin potential on the same polytope, C = 0");
    Ok(Outcome::report(&doc))
}

fn deform(c: &Common, v: &Validated, t_list: Option<Vec<f64>>) -> Result<Outcome, CliError> {
    let f = format(c, v, Format::Csv, &[Format::Csv, Format::Json])?;
    let ts = t_list.unwrap_or_else(|| v.t_list.clone());
    if ts.is_empty() || ts.iter().any(|t| !t.is_finite()) {
        return Err(CliError::Usage("--t-list needs finite values".into()));
    }
    let fam = DeformationFamily::through(&v.structure).map_err(numeric)?;
    let mut rows = Vec::new();
    for &t in &ts {
        let (drift, _) = curvature_drift(&fam, &v.grid, t).map_err(numeric)?;
        let pr = if v.structure.dim() == 2 { Some(p_range(&fam, &v.grid, t).map_err(numeric)?) } else { None };
        let (ok, why) = verdict_at(&fam, t, v.probes_per_facet, &v.tolerances).map_err(numeric)?;
        rows.push((t, drift, pr, ok, why));
    }
    let pass = rows.iter().all(|r| r.3);
    let bytes = match f {
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(t, d, pr, ok, why)| {
                    json!({"t": t, "max_curvature_drift": d, "p_min": pr.map(|p| p.0), "p_max": pr.map(|p| p.1),
                           "admissible": ok, "failing_condition": if why.is_empty() { None } else { Some(why) }})
                })
                .collect();
            return Ok(Outcome::json(json!({"kind": "deform", "rows": items}), pass));
        }
        _ => {
            let mut s = String::from("t,max_curvature_drift,p_min,p_max,admissible\n");
            for (t, d, pr, ok, _) in &rows {
                let (lo, hi) = pr.map(|p| (format!("{:.16e}", p.0), format!("{:.16e}", p.1))).unwrap_or_default();
                s.push_str(&format!("{t:.16e},{d:.16e},{lo},{hi},{ok}\n"));
            }
            s.into_bytes()
        }
    };
    Ok(Outcome { bytes, pass })
}

fn extremal(c: &Common, v: &Validated) -> Result<Outcome, CliError> {
    format(c, v, Format::Json, &[Format::Json])?;
    let fit = extremal_fit_with(&v.structure, &v.grid, c.tol_scale).map_err(numeric)?;
    let pass = fit.is_extremal;
    let mut doc = serde_json::to_value(&fit).expect("fit serializes");
    doc["kind"] = json!("extremal");
    doc["verdict"] = json!(if pass { "pass" } else { "fail" });
    Ok(Outcome::json(doc, pass))
}
