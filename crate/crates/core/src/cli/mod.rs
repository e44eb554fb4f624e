//! The `simplexvol` command line: matrix documents in, JSON or CSV reports
//! out, each report carrying the manifest of the run that produced it.

pub mod document;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use document::{DocKind, MatrixDocument};

use crate::degeneration_lab::{
    run_continuity_experiment_with, schedule, DegenerationReport, ExperimentOptions, MatrixPath,
    PathFamily, Spacing, DEFAULT_FINAL_GAP, DEFAULT_STEPS, DEFAULT_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::gram::{
    hyperbolic_distance_from_angle, spherical_distance_from_angle, vertices_from_angle_gram,
    AngleGramMatrix, Classification, Geometry, SimplexVertices, Tag, DEFAULT_TOL,
};
use crate::hyperbolic_geom::{face_normals, inscribed_ball, tail_volumes, InscribedBall};
use crate::matrix_core::SymMatrix;
use crate::volume_engine::mc::DEFAULT_SAMPLES;
use crate::volume_engine::{
    gauss_bonnet_area, hyperbolic_volume, spherical_volume, HyperbolicMethod, MCConfig,
    VolumeEstimate,
};

#[derive(Parser, Debug)]
#[command(
    name = "simplexvol",
    version,
    about = "Classify angle Gram matrices and estimate volumes of spherical and hyperbolic simplices"
)]
pub struct Cli {
    /// Base seed for every Monte Carlo estimate.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Samples per estimate.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    pub samples: u64,
    /// Classification tolerance, relative to the largest entry.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Read angle matrices in degrees.
    #[arg(long, global = true)]
    pub degrees: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum VolumeMethod {
    /// Orthant route for spherical input, Klein model for hyperbolic input.
    Auto,
    Orthant,
    Klein,
    Cone,
    /// Exact angle excess or defect; triangles only.
    GaussBonnet,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify an angle matrix or angle Gram matrix.
    Classify { input: PathBuf },
    /// Estimate the volume of the simplex a document describes.
    Volume {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = VolumeMethod::Auto)]
        method: VolumeMethod,
    },
    /// Convert between angle matrices, angle Grams, distance Grams and vertices.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: DocKind,
    },
    /// Inscribed ball of a hyperbolic simplex.
    Inball { input: PathBuf },
    /// Volumes along a path toward a boundary matrix, with a Cauchy verdict.
    Degenerate {
        config: PathBuf,
        /// Also write the per-step table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Volume of a hyperbolic simplex outside balls of growing radius.
    Tail {
        input: PathBuf,
        /// `inball` or comma-separated hyperboloid coordinates.
        #[arg(long, default_value = "inball")]
        point: String,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,1,1.5,2,3,5,10")]
        radii: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub samples: u64,
    pub tol: f64,
    pub degrees: bool,
    /// Command-specific settings (input path, method, path config, ...).
    pub config: serde_json::Value,
    pub artifact_version: String,
    pub timestamp: String,
}

impl RunManifest {
    fn new(cli: &Cli, command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.into(),
            seed: cli.seed,
            samples: cli.samples,
            tol: cli.tol,
            degrees: cli.degrees,
            config,
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

#[derive(Serialize)]
struct WithManifest<T: Serialize> {
    #[serde(flatten)]
    body: T,
    manifest: RunManifest,
}

#[derive(Serialize)]
struct VolumeReport {
    #[serde(flatten)]
    estimate: VolumeEstimate,
    tag: Tag,
    n: usize,
}

#[derive(Serialize)]
struct TailRow {
    radius: f64,
    tail_volume: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct TailReport {
    point: Vec<f64>,
    /// Smallest distance from the point to a face hyperplane; negative if
    /// the point lies outside the simplex.
    min_face_distance: f64,
    rows: Vec<TailRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ExplicitPath {
    #[serde(deserialize_with = "document::deserialize_rows")]
    a0: Vec<Vec<f64>>,
    #[serde(deserialize_with = "document::deserialize_rows")]
    a1: Vec<Vec<f64>>,
    #[serde(default)]
    expected_limit: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PathSpec {
    Family(PathFamily),
    Explicit(ExplicitPath),
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_final_gap() -> f64 {
    DEFAULT_FINAL_GAP
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

/// Configuration file of the `degenerate` command. `seed` and `samples`
/// override the command-line flags when present.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DegenerateConfig {
    path: PathSpec,
    #[serde(default = "default_steps")]
    steps: usize,
    #[serde(default)]
    spacing: Spacing,
    #[serde(default)]
    t0: f64,
    #[serde(default = "default_final_gap")]
    final_gap: f64,
    /// Explicit schedule; replaces `steps`, `spacing`, `t0`, `final_gap`.
    #[serde(default)]
    schedule: Option<Vec<f64>>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    samples: Option<u64>,
    #[serde(default = "default_threshold")]
    threshold: f64,
    #[serde(default)]
    hyperbolic_method: HyperbolicMethod,
}

#[derive(Serialize)]
struct DegenerateOutput {
    #[serde(flatten)]
    report: DegenerationReport,
    expected_limit: Option<f64>,
    /// Final estimate minus the expected limit.
    limit_error: Option<f64>,
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Input(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Error::Input(format!("reading {}: {e}", path.display())))
    }
}

fn read_document(path: &Path) -> Result<MatrixDocument> {
    MatrixDocument::from_json(&read_input(path)?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Input(format!("writing {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::Input(format!("writing stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Input(format!("serializing: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn emit_json<T: Serialize>(cli: &Cli, body: T, manifest: RunManifest) -> Result<()> {
    write_output(cli.output.as_deref(), &to_json(&WithManifest { body, manifest })?)
}

/// CSV goes to `path` (or stdout); with a path the manifest is written next
/// to it as `<path>.manifest.json`.
fn emit_csv<T: Serialize>(path: Option<&Path>, rows: &[T], manifest: &RunManifest) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Input(format!("writing CSV: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(format!("writing CSV: {e}")))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Input(format!("writing CSV: {e}")))?;
    write_output(path, &text)?;
    if let Some(p) = path {
        let mut side = p.as_os_str().to_owned();
        side.push(".manifest.json");
        write_output(Some(Path::new(&side)), &to_json(manifest)?)?;
    }
    Ok(())
}

fn json_only(cli: &Cli, command: &str) -> Result<()> {
    match cli.format {
        Some(Format::Csv) => Err(Error::InvalidArgument(format!(
            "`{command}` only writes JSON"
        ))),
        _ => Ok(()),
    }
}

fn mc_config(seed: u64, samples: u64) -> Result<MCConfig> {
    let mc = MCConfig::new(seed, samples);
    mc.validate()?;
    Ok(mc)
}

fn cmd_classify(cli: &Cli, input: &Path) -> Result<()> {
    json_only(cli, "classify")?;
    let doc = read_document(input)?;
    if !matches!(doc.kind, DocKind::AngleMatrix | DocKind::AngleGram) {
        return Err(Error::Input(format!(
            "classify expects an angle_matrix or angle_gram document, got {}",
            doc.kind
        )));
    }
    let a = doc.to_angle_gram(cli.tol, cli.degrees)?;
    let c: Classification = a.classification().clone();
    let manifest = RunManifest::new(cli, "classify", serde_json::json!({ "input": input }));
    emit_json(cli, c, manifest)
}

fn estimate_volume(a: &AngleGramMatrix, method: VolumeMethod, mc: &MCConfig) -> Result<VolumeEstimate> {
    let geometry = match a.tag() {
        Tag::Spherical => Geometry::Spherical,
        Tag::Hyperbolic => Geometry::Hyperbolic,
        Tag::ClosureBoundary => return Err(Error::BoundaryMatrix),
        Tag::Invalid => {
            return Err(Error::ClassificationMismatch {
                expected: "Spherical or Hyperbolic".into(),
                found: Tag::Invalid.to_string(),
            })
        }
    };
    match (geometry, method) {
        (Geometry::Spherical, VolumeMethod::Auto | VolumeMethod::Orthant) => spherical_volume(a, mc),
        (Geometry::Hyperbolic, VolumeMethod::Auto | VolumeMethod::Klein) => {
            hyperbolic_volume(a, mc, HyperbolicMethod::KleinMC)
        }
        (Geometry::Hyperbolic, VolumeMethod::Cone) => hyperbolic_volume(a, mc, HyperbolicMethod::ConeMC),
        (_, VolumeMethod::GaussBonnet) => gauss_bonnet_area(&a.angles()?, geometry),
        (g, m) => Err(Error::InvalidArgument(format!(
            "method {} does not apply to {g} input",
            m.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
        ))),
    }
}

fn cmd_volume(cli: &Cli, input: &Path, method: VolumeMethod) -> Result<()> {
    json_only(cli, "volume")?;
    let mc = mc_config(cli.seed, cli.samples)?;
    let doc = read_document(input)?;
    let a = doc.to_angle_gram(cli.tol, cli.degrees)?;
    let estimate = estimate_volume(&a, method, &mc)?;
    let manifest = RunManifest::new(
        cli,
        "volume",
        serde_json::json!({ "input": input, "method": method }),
    );
    emit_json(
        cli,
        VolumeReport {
            estimate,
            tag: a.tag(),
            n: a.n(),
        },
        manifest,
    )
}

fn convert(doc: &MatrixDocument, to: DocKind, cli: &Cli) -> Result<MatrixDocument> {
    let gram_doc = |a: &AngleGramMatrix| {
        MatrixDocument::from_matrix(DocKind::AngleGram, a.tag().geometry(), a.matrix())
    };
    let hyperbolic_or_spherical = |a: &AngleGramMatrix| -> Result<Geometry> {
        a.tag().geometry().ok_or(match a.tag() {
            Tag::ClosureBoundary => Error::BoundaryMatrix,
            t => Error::ClassificationMismatch {
                expected: "Spherical or Hyperbolic".into(),
                found: t.to_string(),
            },
        })
    };
    match (doc.kind, to) {
        (DocKind::AngleMatrix | DocKind::DistanceGram | DocKind::Vertices, DocKind::AngleGram) => {
            Ok(gram_doc(&doc.to_angle_gram(cli.tol, cli.degrees)?))
        }
        (DocKind::AngleGram, DocKind::AngleMatrix) => {
            let a = doc.to_angle_gram(cli.tol, cli.degrees)?;
            Ok(MatrixDocument::from_matrix(
                DocKind::AngleMatrix,
                a.tag().geometry(),
                a.angles()?.matrix(),
            ))
        }
        (DocKind::AngleGram | DocKind::AngleMatrix, DocKind::DistanceGram) => {
            let a = doc.to_angle_gram(cli.tol, cli.degrees)?;
            let g = match hyperbolic_or_spherical(&a)? {
                Geometry::Spherical => spherical_distance_from_angle(&a)?.0,
                Geometry::Hyperbolic => hyperbolic_distance_from_angle(&a)?.0,
            };
            Ok(MatrixDocument::from_matrix(DocKind::DistanceGram, Some(g.geometry()), g.matrix()))
        }
        (DocKind::AngleGram | DocKind::AngleMatrix, DocKind::Vertices) => {
            let a = doc.to_angle_gram(cli.tol, cli.degrees)?;
            hyperbolic_or_spherical(&a)?;
            Ok(MatrixDocument::from_vertices(&vertices_from_angle_gram(&a)?))
        }
        (DocKind::Vertices, DocKind::DistanceGram) => {
            let g = doc.vertices()?.distance_gram()?;
            Ok(MatrixDocument::from_matrix(DocKind::DistanceGram, Some(g.geometry()), g.matrix()))
        }
        (from, to) => Err(Error::InvalidArgument(format!(
            "conversion from {from} to {to} is not supported"
        ))),
    }
}

fn cmd_convert(cli: &Cli, input: &Path, to: DocKind) -> Result<()> {
    json_only(cli, "convert")?;
    let doc = read_document(input)?;
    let out = convert(&doc, to, cli)?;
    let manifest = RunManifest::new(cli, "convert", serde_json::json!({ "input": input, "to": to }));
    emit_json(cli, out, manifest)
}

fn hyperbolic_vertices(doc: &MatrixDocument, cli: &Cli) -> Result<SimplexVertices> {
    let v = if doc.kind == DocKind::Vertices {
        doc.vertices()?
    } else {
        let a = doc.to_angle_gram(cli.tol, cli.degrees)?;
        a.require(Geometry::Hyperbolic)?;
        vertices_from_angle_gram(&a)?
    };
    if v.geometry() != Geometry::Hyperbolic {
        return Err(Error::ClassificationMismatch {
            expected: Geometry::Hyperbolic.to_string(),
            found: v.geometry().to_string(),
        });
    }
    Ok(v)
}

fn cmd_inball(cli: &Cli, input: &Path) -> Result<()> {
    json_only(cli, "inball")?;
    let doc = read_document(input)?;
    let ball: InscribedBall = inscribed_ball(&hyperbolic_vertices(&doc, cli)?)?;
    let manifest = RunManifest::new(cli, "inball", serde_json::json!({ "input": input }));
    emit_json(cli, ball, manifest)
}

fn build_config_path(cfg: &DegenerateConfig, tol: f64) -> Result<(MatrixPath, Option<f64>)> {
    let sched = match &cfg.schedule {
        Some(s) => s.clone(),
        None => schedule(cfg.steps, cfg.spacing, cfg.t0, cfg.final_gap)?,
    };
    match &cfg.path {
        PathSpec::Family(f) => {
            let limit = f.expected_limit()?;
            Ok((f.path_on(sched)?, Some(limit)))
        }
        PathSpec::Explicit(e) => {
            let a0 = AngleGramMatrix::new(SymMatrix::from_rows(&e.a0)?, tol)?;
            let a1 = SymMatrix::from_rows(&e.a1)?;
            Ok((MatrixPath::new(a0, a1, sched)?, e.expected_limit))
        }
    }
}

fn cmd_degenerate(cli: &Cli, config: &Path, csv_path: Option<&Path>) -> Result<()> {
    let text = read_input(config)?;
    let cfg: DegenerateConfig =
        serde_json::from_str(&text).map_err(|e| Error::Input(format!("malformed config: {e}")))?;
    let seed = cfg.seed.unwrap_or(cli.seed);
    let samples = cfg.samples.unwrap_or(cli.samples);
    let mc = mc_config(seed, samples)?;
    let (path, expected_limit) = build_config_path(&cfg, cli.tol)?;
    let opts = ExperimentOptions {
        threshold: cfg.threshold,
        hyperbolic_method: cfg.hyperbolic_method,
    };
    let report = run_continuity_experiment_with(&path, &mc, &opts)?;
    let mut manifest = RunManifest::new(
        cli,
        "degenerate",
        serde_json::json!({ "input": config, "path_config": cfg }),
    );
    manifest.seed = seed;
    manifest.samples = samples;

    #[derive(Serialize)]
    struct CsvRow {
        t: f64,
        volume: f64,
        std_error: f64,
        succ_diff: Option<f64>,
        lambda_min: f64,
        det: f64,
        min_adjugate: f64,
    }
    let rows: Vec<CsvRow> = report
        .steps
        .iter()
        .map(|s| CsvRow {
            t: s.t,
            volume: s.volume.value,
            std_error: s.volume.std_error,
            succ_diff: s.succ_diff,
            lambda_min: s.lambda_min,
            det: s.det,
            min_adjugate: s.min_adjugate,
        })
        .collect();
    if let Some(p) = csv_path {
        emit_csv(Some(p), &rows, &manifest)?;
    }
    if cli.format == Some(Format::Csv) {
        return emit_csv(cli.output.as_deref(), &rows, &manifest);
    }
    let limit_error = expected_limit.map(|l| report.summary.limit_estimate.value - l);
    emit_json(
        cli,
        DegenerateOutput {
            report,
            expected_limit,
            limit_error,
        },
        manifest,
    )
}

fn parse_point(spec: &str, v: &SimplexVertices) -> Result<Vec<f64>> {
    if spec.trim() == "inball" {
        return Ok(inscribed_ball(v)?.center);
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("point coordinate {s:?} is not a number")))
        })
        .collect()
}

fn cmd_tail(cli: &Cli, input: &Path, point: &str, radii: &[f64]) -> Result<()> {
    let mc = mc_config(cli.seed, cli.samples)?;
    let doc = read_document(input)?;
    let v = hyperbolic_vertices(&doc, cli)?;
    let x = parse_point(point, &v)?;
    let results = tail_volumes(&v, &x, radii, &mc)?;
    let normals = face_normals(&v)?;
    let min_face_distance = InscribedBall::min_face_distance(&normals, &x);
    if min_face_distance < 0.0 {
        eprintln!(
            "warning: the point lies outside the simplex (signed face distance {min_face_distance:.6})"
        );
    }
    let rows: Vec<TailRow> = results
        .iter()
        .map(|r| TailRow {
            radius: r.radius,
            tail_volume: r.estimate.value,
            std_error: r.estimate.std_error,
        })
        .collect();
    let manifest = RunManifest::new(
        cli,
        "tail",
        serde_json::json!({ "input": input, "point": point, "radii": radii }),
    );
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => emit_csv(cli.output.as_deref(), &rows, &manifest),
        Format::Json => emit_json(
            cli,
            TailReport {
                point: x,
                min_face_distance,
                rows,
            },
            manifest,
        ),
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    if !(cli.tol >= 0.0 && cli.tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be finite and nonnegative, got {}", cli.tol)));
    }
    match &cli.command {
        Command::Classify { input } => cmd_classify(cli, input),
        Command::Volume { input, method } => cmd_volume(cli, input, *method),
        Command::Convert { input, to } => cmd_convert(cli, input, *to),
        Command::Inball { input } => cmd_inball(cli, input),
        Command::Degenerate { config, csv } => cmd_degenerate(cli, config, csv.as_deref()),
        Command::Tail { input, point, radii } => cmd_tail(cli, input, point, radii),
    }
}

/// Parses `std::env::args`, runs, prints errors, and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
