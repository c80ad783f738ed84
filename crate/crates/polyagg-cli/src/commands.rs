//! The six subcommands. Each one merges its flags with the matching config
//! file section (flags win), writes the effective-config echo next to its
//! primary output, and then delegates the actual work to the library.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use polyagg::agglomerate::{agglomerate, build_hierarchy, save_agglomeration, AgglomeratedMesh};
use polyagg::bisect::{
    BisectionModel, GnnBisector, KMeansBisector, KMeansConfig, MultilevelBisector,
    MultilevelConfig,
};
use polyagg::gnn::{load_model, save_model, train, GnnModel, TrainConfig, TrainItem};
use polyagg::mesh::{generate_mesh, load_mesh, save_mesh, MeshKind};
use polyagg::metrics::{
    circle_ratios, geometric_sizes, runtime_bench, uniformity_factors, Summary,
};
use polyagg::rng::stream_indexed;
use polyagg::{write_atomic, Error, Result};
use rand::Rng;
use serde::Serialize;

use crate::config::{
    require, write_echo, AgglomerateSection, BenchSection, GenerateSection, HTarget,
    HierarchySection, MetricsSection, TrainSection,
};
use crate::manifest::{Manifest, ManifestEntry, MANIFEST_FILE};

/// Bisection backend selector shared by `agglomerate`, `hierarchy`, and
/// `bench`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Kmeans,
    Gnn,
    Multilevel,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Kmeans => "kmeans",
            Method::Gnn => "gnn",
            Method::Multilevel => "multilevel",
        }
    }

    /// Parses a backend name from a config file value.
    pub fn parse_name(s: &str) -> Result<Method> {
        match s {
            "kmeans" => Ok(Method::Kmeans),
            "gnn" => Ok(Method::Gnn),
            "multilevel" => Ok(Method::Multilevel),
            other => Err(Error::InvalidConfig(format!(
                "unknown method {other:?}; expected kmeans, gnn, or multilevel"
            ))),
        }
    }
}

pub fn parse_kind(s: &str) -> Result<MeshKind> {
    s.parse()
}

pub fn parse_h_target(s: &str) -> Result<HTarget> {
    s.parse()
}

/// Builds the bisection backend for `method`. A GNN backend loads its
/// weights from `model_path` when given and otherwise falls back to fresh
/// seed-derived initialization, which is useful for smoke tests and runtime
/// benchmarks where trained weights do not matter.
fn make_backend(
    method: Method,
    seed: u64,
    model_path: Option<&Path>,
) -> Result<Box<dyn BisectionModel>> {
    Ok(match method {
        Method::Kmeans => Box::new(KMeansBisector::new(KMeansConfig::with_seed(seed))),
        Method::Multilevel => Box::new(MultilevelBisector::new(MultilevelConfig::with_seed(seed))),
        Method::Gnn => {
            let model = match model_path {
                Some(path) => load_model(path)?,
                None => {
                    log::info!(
                        "no --model given; using randomly initialized weights (seed {seed})"
                    );
                    GnnModel::new(seed)
                }
            };
            Box::new(GnnBisector::new(model))
        }
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn ensure_parent_dir(path: &Path) -> Result<()> {
    match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => ensure_dir(parent),
        _ => Ok(()),
    }
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

// ---------------------------------------------------------------------------
// generate

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Mesh family: squares, triangles, random-triangles, or voronoi.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<MeshKind>,
    /// Size parameter: cells per side for grids, seed count for voronoi.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of meshes to generate.
    #[arg(long)]
    pub count: Option<usize>,
    /// Output directory for the mesh files and their manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct GenerateEffective<'a> {
    kind: &'a str,
    n: usize,
    count: usize,
    out: &'a Path,
}

pub fn cmd_generate(args: GenerateArgs, section: Option<GenerateSection>, seed: u64) -> Result<()> {
    let sec = section.unwrap_or_default();
    let kind = match args.kind {
        Some(k) => k,
        None => require(sec.kind, "generate", "kind")?.parse()?,
    };
    let n = require(args.n.or(sec.n), "generate", "n")?;
    let count = require(args.count.or(sec.count), "generate", "count")?;
    let out = require(args.out.or(sec.out), "generate", "out")?;

    ensure_dir(&out)?;
    let manifest_path = out.join(MANIFEST_FILE);
    write_echo(
        &manifest_path,
        "generate",
        seed,
        &GenerateEffective {
            kind: kind.name(),
            n,
            count,
            out: &out,
        },
    )?;

    let mut entries = Vec::with_capacity(count);
    for index in 0..count {
        let mesh_seed: u64 = stream_indexed(seed, "generate", index as u64).random();
        let mesh = generate_mesh(kind, n, mesh_seed)?;
        let file = format!("{}-{index:04}.txt", kind.name());
        save_mesh(&mesh, out.join(&file))?;
        entries.push(ManifestEntry {
            file,
            kind: kind.name().into(),
            n,
            seed: mesh_seed,
        });
    }
    Manifest::new(entries).save(&manifest_path)
}

// ---------------------------------------------------------------------------
// train

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Manifest of the training meshes.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Manifest of the validation meshes.
    #[arg(long)]
    pub val_manifest: Option<PathBuf>,
    /// Adam step size.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// L2 penalty coefficient on the parameters.
    #[arg(long)]
    pub l2_coeff: Option<f64>,
    /// Graphs per optimizer step.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Number of passes over the training set.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Output path for the trained model (the per-epoch loss CSV lands next
    /// to it).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct TrainEffective<'a> {
    manifest: &'a Path,
    val_manifest: &'a Path,
    learning_rate: f64,
    l2_coeff: f64,
    batch_size: usize,
    epochs: usize,
    out: &'a Path,
}

/// Per-epoch loss CSV written next to the model file: `<stem>-history.csv`.
fn history_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    out.with_file_name(format!("{stem}-history.csv"))
}

fn load_items(manifest_path: &Path) -> Result<Vec<TrainItem>> {
    Manifest::load(manifest_path)?
        .load_meshes(manifest_path)?
        .iter()
        .map(|mesh| TrainItem::from_mesh(mesh))
        .collect()
}

pub fn cmd_train(args: TrainArgs, section: Option<TrainSection>, seed: u64) -> Result<()> {
    let sec = section.unwrap_or_default();
    let manifest = require(args.manifest.or(sec.manifest), "train", "manifest")?;
    let val_manifest = require(args.val_manifest.or(sec.val_manifest), "train", "val_manifest")?;
    let out = require(args.out.or(sec.out), "train", "out")?;
    let defaults = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: args
            .learning_rate
            .or(sec.learning_rate)
            .unwrap_or(defaults.learning_rate),
        l2_coeff: args.l2_coeff.or(sec.l2_coeff).unwrap_or(defaults.l2_coeff),
        batch_size: args
            .batch_size
            .or(sec.batch_size)
            .unwrap_or(defaults.batch_size),
        epochs: args.epochs.or(sec.epochs).unwrap_or(defaults.epochs),
        seed,
    };

    ensure_parent_dir(&out)?;
    write_echo(
        &out,
        "train",
        seed,
        &TrainEffective {
            manifest: &manifest,
            val_manifest: &val_manifest,
            learning_rate: cfg.learning_rate,
            l2_coeff: cfg.l2_coeff,
            batch_size: cfg.batch_size,
            epochs: cfg.epochs,
            out: &out,
        },
    )?;

    let train_items = load_items(&manifest)?;
    let val_items = load_items(&val_manifest)?;
    let outcome = train(GnnModel::new(seed), &train_items, &val_items, &cfg)?;

    let mut csv = String::from("epoch,train_loss,val_loss\n");
    for (epoch, record) in outcome.history.iter().enumerate() {
        csv.push_str(&format!(
            "{epoch},{},{}\n",
            record.train_loss, record.val_loss
        ));
    }
    write_atomic(history_path(&out), csv.as_bytes())?;

    if let Some(best) = outcome.best_epoch {
        log::info!(
            "validation loss {} -> {} (best epoch {best})",
            outcome.initial_val_loss,
            outcome.history[best].val_loss
        );
    }
    save_model(&outcome.best_model, &out)
}

// ---------------------------------------------------------------------------
// agglomerate

#[derive(Debug, Args)]
pub struct AgglomerateArgs {
    /// Input mesh file.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Bisection backend.
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Target diameter: absolute (`0.25`) or relative (`4h0`).
    #[arg(long, value_parser = parse_h_target)]
    pub h_target: Option<HTarget>,
    /// Trained model file (gnn method only).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output path for the agglomeration file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct AgglomerateEffective<'a> {
    mesh: &'a Path,
    method: &'a str,
    h_target: String,
    h_target_resolved: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a Path>,
    out: &'a Path,
}

pub fn cmd_agglomerate(
    args: AgglomerateArgs,
    section: Option<AgglomerateSection>,
    seed: u64,
) -> Result<()> {
    let sec = section.unwrap_or_default();
    let mesh_path = require(args.mesh.or(sec.mesh), "agglomerate", "mesh")?;
    let method = match args.method {
        Some(m) => m,
        None => Method::parse_name(&require(sec.method, "agglomerate", "method")?)?,
    };
    let h_target = match args.h_target {
        Some(t) => t,
        None => require(sec.h_target, "agglomerate", "h_target")?.parse()?,
    };
    let model_path = args.model.or(sec.model);
    let out = require(args.out.or(sec.out), "agglomerate", "out")?;

    let mesh = Arc::new(load_mesh(&mesh_path)?);
    let resolved = h_target.resolve(mesh.mesh_size()?);

    ensure_parent_dir(&out)?;
    write_echo(
        &out,
        "agglomerate",
        seed,
        &AgglomerateEffective {
            mesh: &mesh_path,
            method: method.name(),
            h_target: h_target.to_string(),
            h_target_resolved: resolved,
            model: model_path.as_deref(),
            out: &out,
        },
    )?;

    let backend = make_backend(method, seed, model_path.as_deref())?;
    let agg = agglomerate(mesh, resolved, backend.as_ref())?;
    save_agglomeration(&out, std::slice::from_ref(&agg))
}

// ---------------------------------------------------------------------------
// hierarchy

#[derive(Debug, Args)]
pub struct HierarchyArgs {
    /// Input mesh file.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Bisection backend.
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Mesh-size multiples of the nested levels, e.g. `2,4,8`.
    #[arg(long, value_delimiter = ',')]
    pub factors: Option<Vec<f64>>,
    /// Trained model file (gnn method only).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output path for the hierarchy file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct HierarchyEffective<'a> {
    mesh: &'a Path,
    method: &'a str,
    factors: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a Path>,
    out: &'a Path,
}

pub fn cmd_hierarchy(
    args: HierarchyArgs,
    section: Option<HierarchySection>,
    seed: u64,
) -> Result<()> {
    let sec = section.unwrap_or_default();
    let mesh_path = require(args.mesh.or(sec.mesh), "hierarchy", "mesh")?;
    let method = match args.method {
        Some(m) => m,
        None => Method::parse_name(&require(sec.method, "hierarchy", "method")?)?,
    };
    let factors = require(args.factors.or(sec.factors), "hierarchy", "factors")?;
    let model_path = args.model.or(sec.model);
    let out = require(args.out.or(sec.out), "hierarchy", "out")?;

    ensure_parent_dir(&out)?;
    write_echo(
        &out,
        "hierarchy",
        seed,
        &HierarchyEffective {
            mesh: &mesh_path,
            method: method.name(),
            factors: &factors,
            model: model_path.as_deref(),
            out: &out,
        },
    )?;

    let mesh = Arc::new(load_mesh(&mesh_path)?);
    let backend = make_backend(method, seed, model_path.as_deref())?;
    let hierarchy = build_hierarchy(mesh, &factors, backend.as_ref())?;
    hierarchy.save(&out)
}

// ---------------------------------------------------------------------------
// metrics

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Input mesh file.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Agglomeration files to evaluate (repeatable). Without any, the
    /// identity agglomeration of the mesh is evaluated.
    #[arg(long = "agglomeration")]
    pub agglomerations: Vec<PathBuf>,
    /// Output path for the quality CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct MetricsEffective<'a> {
    mesh: &'a Path,
    agglomerations: &'a [PathBuf],
    out: &'a Path,
}

fn quality_row(source: &str, level: usize, agg: &AgglomeratedMesh) -> Result<String> {
    let uf = Summary::of(&uniformity_factors(agg))?;
    let cr = Summary::of(&circle_ratios(agg)?)?;
    Ok(format!(
        "{},{level},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        csv_field(source),
        agg.h_target(),
        agg.cell_count(),
        uf.mean,
        uf.min,
        uf.q1,
        uf.median,
        uf.q3,
        uf.max,
        cr.mean,
        cr.min,
        cr.q1,
        cr.median,
        cr.q3,
        cr.max,
    ))
}

pub fn cmd_metrics(args: MetricsArgs, section: Option<MetricsSection>, seed: u64) -> Result<()> {
    let sec = section.unwrap_or_default();
    let mesh_path = require(args.mesh.or(sec.mesh), "metrics", "mesh")?;
    let agglomerations = if args.agglomerations.is_empty() {
        sec.agglomerations.unwrap_or_default()
    } else {
        args.agglomerations
    };
    let out = require(args.out.or(sec.out), "metrics", "out")?;

    ensure_parent_dir(&out)?;
    write_echo(
        &out,
        "metrics",
        seed,
        &MetricsEffective {
            mesh: &mesh_path,
            agglomerations: &agglomerations,
            out: &out,
        },
    )?;

    let mesh = Arc::new(load_mesh(&mesh_path)?);
    let mut csv = String::from(
        "source,level,h_target,cells,\
         uf_mean,uf_min,uf_q1,uf_median,uf_q3,uf_max,\
         cr_mean,cr_min,cr_q1,cr_median,cr_q3,cr_max\n",
    );
    if agglomerations.is_empty() {
        let identity = AgglomeratedMesh::identity(mesh)?;
        csv.push_str(&quality_row("identity", 0, &identity)?);
    } else {
        for path in &agglomerations {
            let levels = polyagg::agglomerate::load_agglomeration(path, mesh.clone())?;
            for (level, agg) in levels.iter().enumerate() {
                csv.push_str(&quality_row(&path.display().to_string(), level, agg)?);
            }
        }
    }
    write_atomic(&out, csv.as_bytes())
}

// ---------------------------------------------------------------------------
// bench

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Smallest mesh size (element count) on the ladder.
    #[arg(long)]
    pub min_elements: Option<usize>,
    /// Largest mesh size on the ladder.
    #[arg(long)]
    pub max_elements: Option<usize>,
    /// Number of geometrically spaced sizes.
    #[arg(long)]
    pub sizes: Option<usize>,
    /// Timed bisections per mesh.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Backends to time, e.g. `kmeans,gnn`.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// Trained model file for the gnn backend.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output path for the runtime CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct BenchEffective<'a> {
    min_elements: usize,
    max_elements: usize,
    sizes: usize,
    samples: usize,
    methods: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a Path>,
    out: &'a Path,
}

pub fn cmd_bench(args: BenchArgs, section: Option<BenchSection>, seed: u64) -> Result<()> {
    let sec = section.unwrap_or_default();
    let min_elements = args.min_elements.or(sec.min_elements).unwrap_or(25);
    let max_elements = args.max_elements.or(sec.max_elements).unwrap_or(5000);
    let sizes = args.sizes.or(sec.sizes).unwrap_or(21);
    let samples = args.samples.or(sec.samples).unwrap_or(20);
    let methods = match args.methods {
        Some(m) => m,
        None => match sec.methods {
            Some(names) => names
                .iter()
                .map(|s| Method::parse_name(s))
                .collect::<Result<Vec<_>>>()?,
            None => vec![Method::Kmeans, Method::Gnn, Method::Multilevel],
        },
    };
    let model_path = args.model.or(sec.model);
    let out = require(args.out.or(sec.out), "bench", "out")?;
    if min_elements < 4 {
        return Err(Error::InvalidConfig(format!(
            "bench: min_elements must be at least 4 (the smallest valid mesh), got {min_elements}"
        )));
    }

    ensure_parent_dir(&out)?;
    write_echo(
        &out,
        "bench",
        seed,
        &BenchEffective {
            min_elements,
            max_elements,
            sizes,
            samples,
            methods: methods.iter().map(|m| m.name()).collect(),
            model: model_path.as_deref(),
            out: &out,
        },
    )?;

    let backends: Vec<(Method, Box<dyn BisectionModel>)> = methods
        .iter()
        .map(|&m| Ok((m, make_backend(m, seed, model_path.as_deref())?)))
        .collect::<Result<_>>()?;
    let named: Vec<(&str, &dyn BisectionModel)> = backends
        .iter()
        .map(|(m, b)| (m.name(), b.as_ref()))
        .collect();
    let ladder = geometric_sizes(min_elements, max_elements, sizes)?;
    let report = runtime_bench(&named, &ladder, samples, seed)?;
    write_atomic(&out, report.to_csv().as_bytes())
}

// ---------------------------------------------------------------------------
